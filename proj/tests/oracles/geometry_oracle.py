import sympy as sp, numpy as np
x,y,z=sp.symbols('x y z',real=True); X=[x,y,z]
r=sp.sqrt(x*x+y*y+z*z)
def ricci(g):
    gi=g.inv()
    G=[[[sum(gi[k,l]*(sp.diff(g[l,i],X[j])+sp.diff(g[l,j],X[i])-sp.diff(g[i,j],X[l])) for l in range(3))/2 for j in range(3)] for i in range(3)] for k in range(3)]
    def R(a,b,c,d): return sp.diff(G[a][d][b],X[c])-sp.diff(G[a][c][b],X[d])+sum(G[a][c][e]*G[e][d][b]-G[a][d][e]*G[e][c][b] for e in range(3))
    Ric=sp.Matrix(3,3,lambda b,d: sum(R(a,b,a,d) for a in range(3)))
    return Ric, sum(gi[i,j]*Ric[i,j] for i in range(3) for j in range(3))
p={x:sp.Rational(6,5),y:sp.Rational(-7,10),z:sp.Rational(3,2)}
for name,psi4 in [('schw m=1',(1+1/(2*r))**4),('power',1+r**sp.Rational(-1,2))]:
    Ric,Rs=ricci(sp.eye(3)*psi4)
    print(name,'Ric',[sp.N(Ric[i,j].subs(p),17) for i in range(3) for j in range(i,3)],'R',sp.N(Rs.subs(p),17))
    print(name,'R at (2,0,0)',sp.N(Rs.subs({x:2,y:0,z:0}),17))
# Poincare phi=1-t, R=delta=l=1
t=sp.symbols('t')
print('poincare lhs',sp.N(sp.integrate((1-t)**2/(1+t)**3,(t,0,1)),17),'rhs',sp.integrate(1,(t,0,1)))
# Hessian band for conformal schwarzschild m=1, R=20, delta=0.5
m=1.0; R=20.0
def D(s): return (s-R)+m*np.log(s/R)+m*m/4*(1/R-1/s)
def lam(s):
    psi=1+m/(2*s); dpsi=-m/(2*s*s); return (1+2*s*dpsi/psi)/(psi**2*s)
radii=np.array([25,30,40,60,80,120,160,200.])
for dlt in (0.5,):
    c=np.abs(lam(radii)-1/(R+D(radii)))*(R+D(radii))**(1+dlt)
    print('band C1 delta',dlt,repr(c.max()),'at',radii[c.argmax()])
print('d_R(60)',repr(D(60.0)))
