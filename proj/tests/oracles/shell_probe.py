# Smallest weighted singular values of the radial blocks of (-Laplacian - a^2) on a shell,
# Dirichlet vs outgoing outer closure.
import numpy as np, scipy.special as sp
def block(l, R0, Rmax, dr, a, outer, s):
    n = int(round((Rmax-R0)/dr)); h=(Rmax-R0)/n
    r = R0 + h*np.arange(1, n+1)       # last node on Rmax for outgoing; Dirichlet drops it
    if outer=='dirichlet': r=r[:-1]
    N=len(r); T=np.zeros((N,N),complex)
    for i in range(N):
        T[i,i]=2/h**2 + l*(l+1)/r[i]**2 - a*a
        if i>0: T[i,i-1]=-1/h**2
        if i<N-1: T[i,i+1]=-1/h**2
    if outer=='outgoing':
        # v = r u ; v'/v at Rmax from Riccati-Hankel; ghost node elimination
        z=a*Rmax
        hl=sp.spherical_jn(l,z)+1j*sp.spherical_yn(l,z)
        dhl=sp.spherical_jn(l,z,True)+1j*sp.spherical_yn(l,z,True)
        kappa=(hl+z*dhl)/(Rmax*hl)      # d/dr log(r h_l(ar))
        # ghost v_{N+1} = v_{N-1} + 2h kappa v_N
        T[N-1,N-2]=-2/h**2; T[N-1,N-1]+= -2*h*kappa/h**2
        # symmetrize with trapezoid end weight
        m=np.ones(N); m[-1]=0.5
    else:
        m=np.ones(N)
    W=np.diag(r**-s)   # weighted space: map from r^{-s}L2 ... sigma_min(r^s T r^s)
    D=np.diag(np.sqrt(m))
    A=D@np.diag(r**s)@T@np.diag(r**s)@np.linalg.inv(D)
    return np.linalg.svd(A,compute_uv=False).min()
for outer in ['dirichlet','outgoing']:
  for s in [0,1]:
    row=[]
    for Rmax in [20,40,80]:
        row.append(min(block(l,2.0,Rmax,2*np.pi/16,1.0,outer,s) for l in range(5)))
    print(outer,s,row)
