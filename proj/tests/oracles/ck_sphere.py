# Sphere integrals of the l=1 Chandrasekhar-Kendall field and the finite-difference
# behaviour of X' + 2E on geometric schedules.
import sympy as sp, numpy as np
x,y,z=sp.symbols('x y z',real=True)
R=sp.sqrt(x**2+y**2+z**2)
psi=(sp.sin(R)/R**2-sp.cos(R)/R)*z/R
grad=lambda f:[sp.diff(f,v) for v in (x,y,z)]
X=[x,y,z]; g=grad(psi)
T=[g[1]*z-g[2]*y, g[2]*x-g[0]*z, g[0]*y-g[1]*x]
xg=sum(X[i]*g[i] for i in range(3)); gp=grad(psi+xg)
w=[gp[i]+psi*X[i]+T[i] for i in range(3)]
w2=sp.lambdify((x,y,z),sum(wi**2 for wi in w),'numpy')
wr=sp.lambdify((x,y,z),sum(w[i]*sum(X[j]/R*sp.diff(w[i],X[j]) for j in range(3)) for i in range(3)),'numpy')
ct,cw=np.polynomial.legendre.leggauss(64); ph=np.arange(128)*2*np.pi/128
CT,PH=np.meshgrid(ct,ph,indexing='ij'); W=np.outer(cw,np.full(128,2*np.pi/128))
ST=np.sqrt(1-CT**2)
def Xf(rr): return np.sum(W*w2(rr*ST*np.cos(PH),rr*ST*np.sin(PH),rr*CT))
def Ef(rr): return -np.sum(W*wr(rr*ST*np.cos(PH),rr*ST*np.sin(PH),rr*CT))
if __name__=='__main__':
    for rr in [2,20,50,100,200]:
        print(rr, Xf(rr), Xf(rr)*rr**2/(8*np.pi/3), Ef(rr)*rr**3/(8*np.pi/3))
    for q in [1.05,1.025]:
        rs=[10.0]
        while rs[-1]<200: rs.append(rs[-1]*q)
        rs=np.array(rs); Xs=np.array([Xf(v) for v in rs]); Es=np.array([Ef(v) for v in rs])
        ratios=[]
        for i in range(2,len(rs)-2):
            st=rs[[i-2,i-1,i+1,i+2]]
            A=np.vander(st-rs[i],4,increasing=True).T
            wts=np.linalg.solve(A,np.array([0,1,0,0]))
            d=wts@Xs[[i-2,i-1,i+1,i+2]]
            ratios.append(abs(d+2*Es[i])*rs[i]**2/Xs[i])
        print(q,max(ratios),np.median(ratios))
