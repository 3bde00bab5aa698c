# Radial model H = (x^2 D_x)^2 + A x^delta on x in [xmin, x1]; in r = 1/x this is -d^2/dr^2 + A r^-delta.
# Bound-state oracle: decaying solution of -u'' - (c/r) u = -u is the Whittaker function W_{c/2,1/2}(2r);
# Dirichlet at r1 = 1/x1 requires W_{c/2,1/2}(2 r1) = 0.
import mpmath as mp, numpy as np
r1=2.0
f=lambda c: mp.whitw(c/2,0.5,2*r1)
# scan for first root
cs=np.linspace(2.0,12,200); vals=[f(c) for c in cs]
for i in range(len(cs)-1):
    if vals[i]*vals[i+1]<0:
        c0=mp.findroot(f,(cs[i],cs[i+1]),solver='anderson'); print('c*',mp.nstr(c0,17)); break
c0=float(c0)
def probe(N, rmax, lam, amp, s=1.0):
    h=(rmax-r1)/N
    r=r1+h*np.arange(1,N+1)
    T=np.zeros((N,N),complex)
    for i in range(N):
        T[i,i]=2/h**2+amp/r[i]-lam
        if i>0:T[i,i-1]=-1/h**2
        if i<N-1:T[i,i+1]=-1/h**2
    m=np.ones(N)
    if lam>0:
        k=np.sqrt(lam); T[N-1,N-2]=-2/h**2; T[N-1,N-1]+=-2j*k/h; m[-1]=0.5
    D=np.diag(np.sqrt(m)); A=D@np.diag(r**s)@T@np.diag(r**s)@np.linalg.inv(D)
    return np.linalg.svd(A,compute_uv=False).min()
for N in [256,512,1024,2048]:
    print(N, probe(N,2+N*0.05,1.0,0.0), probe(N,2+N*0.05,-1.0,-c0), probe(N,40,-1.0,-c0))
