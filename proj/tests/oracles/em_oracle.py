# Symbolic oracle for the two exact Einstein-Maxwell solutions: Maxwell equations,
# G = kappa T, and L_K F versus the dual with eps_{0123} = +sqrt(-det g).
import sympy as sp, itertools
def levi(p):
    return sp.combinatorics.Permutation(list(p)).signature()
def analyse(coords, g, F, K):
    n=4; ginv=sp.simplify(g.inv()); detg=sp.simplify(g.det())
    sq=sp.sqrt(-detg)
    Fup=sp.simplify(ginv*F*ginv.T)
    dual=sp.zeros(4)
    for a,b in itertools.product(range(4),repeat=2):
        s=0
        for c,d in itertools.product(range(4),repeat=2):
            if len({a,b,c,d})==4: s+=sp.Rational(1,2)*levi((a,b,c,d))*sq*Fup[c,d]
        dual[a,b]=sp.simplify(s)
    # Maxwell
    dF=[sp.simplify(sp.diff(F[b,c],coords[a])+sp.diff(F[c,a],coords[b])+sp.diff(F[a,b],coords[c])) for a,b,c in itertools.combinations(range(4),3)]
    ddF=[sp.simplify(sp.diff(dual[b,c],coords[a])+sp.diff(dual[c,a],coords[b])+sp.diff(dual[a,b],coords[c])) for a,b,c in itertools.combinations(range(4),3)]
    # curvature
    Gam=[[[sp.simplify(sum(ginv[k,l]*(sp.diff(g[l,i],coords[j])+sp.diff(g[l,j],coords[i])-sp.diff(g[i,j],coords[l])) for l in range(4))/2) for j in range(4)] for i in range(4)] for k in range(4)]
    def Riem(a,b,c,d):
        return sp.diff(Gam[a][d][b],coords[c])-sp.diff(Gam[a][c][b],coords[d])+sum(Gam[a][c][e]*Gam[e][d][b]-Gam[a][d][e]*Gam[e][c][b] for e in range(4))
    Ric=sp.Matrix(4,4,lambda b,d: sp.simplify(sum(Riem(a,b,a,d) for a in range(4))))
    Rs=sp.simplify(sum(ginv[i,j]*Ric[i,j] for i in range(4) for j in range(4)))
    G=sp.simplify(Ric-Rs*g/2)
    F2=sp.simplify(sum(F[i,j]*Fup[i,j] for i in range(4) for j in range(4)))
    T=sp.Matrix(4,4,lambda i,j: sp.simplify(sum(F[i,k]*F[j,l]*ginv[k,l] for k in range(4) for l in range(4))-g[i,j]*F2/4))
    # Lie derivative along constant K
    LKF=sp.Matrix(4,4,lambda i,j: sp.simplify(sum(K[k]*sp.diff(F[i,j],coords[k]) for k in range(4))))
    return dF,ddF,G,T,LKF,dual
b=sp.symbols('b',positive=True)
t,r,ph,z=sp.symbols('t r phi z',real=True)
def mc(order):
    X={'t':t,'r':r,'phi':ph,'z':z}; coords=[X[o] for o in order]
    lt=sp.Matrix([[1 if o=='t' else 0 for o in order]])
    w={o:0 for o in order}; w['t']=1; w['phi']=-b*r**2
    wv=sp.Matrix([w[o] for o in order])
    g=-wv*wv.T
    for o in order:
        if o in('z','r'): g[order.index(o),order.index(o)]+=sp.exp(b**2*r**2)
        if o=='phi': g[order.index(o),order.index(o)]+=r**2
    A=[sp.cos(2*b*z)*wv[i] for i in range(4)]
    F=sp.Matrix(4,4,lambda i,j: sp.diff(A[j],coords[i])-sp.diff(A[i],coords[j]))
    K=[1 if o=='z' else 0 for o in order]
    return coords,g,F,K
for order in (['t','r','phi','z'],['t','z','r','phi']):
    coords,g,F,K=mc(order)
    dF,ddF,G,T,LKF,dual=analyse(coords,g,F,K)
    print(order,'dF',dF,'d*F',ddF)
    # kappa
    kap=None
    for i in range(4):
        for j in range(4):
            if T[i,j]!=0:
                kk=sp.simplify(G[i,j]/T[i,j]); print('kappa',i,j,kk); break
        else: continue
        break
    print('G-kT', sp.simplify(G-kk*T))
    # L_K F = c F* ?
    for i in range(4):
        for j in range(i+1,4):
            if dual[i,j]!=0: print('LKF/F*',i,j,sp.simplify(LKF[i,j]/dual[i,j]))
