# Independent numpy/scipy realization of the radial model used by the carleman module.
# Grid: interior nodes, uniform in r = 1/x on [r1, rmax], Dirichlet at both ends.
# measure dr (= dx/x^2); H = -d_r^2 (stiffness / dual-cell measure) + ell(ell+1) x^2 + A x^delta;
# x^2 D_x = i d_r discretized as i M^{-1} S with S the skew central-difference form.
# Remainder norms: Galerkin norm H^1 -> H^{-1} of x^{-p/2} K x^{-p/2} on a tapered sine basis.
import numpy as np, scipy.sparse as sp

def smooth7(t):
    t = np.clip(t, 0, 1)
    return 35*t**4 - 84*t**5 + 70*t**6 - 20*t**7

def chi(x, xa=0.3, xb=0.45):
    return 1 - smooth7((x - xa)/(xb - xa))

def model(n, r1=2.0, rmax=40.0, A=0.0, delta=1.0, ell=0):
    h = (rmax - r1)/(n + 1)
    re = r1 + h*np.arange(0, n + 2)
    r = re[1:-1]; x = 1/r
    m = (re[2:] - re[:-2])/2
    d = np.diff(re)
    main = 1/d[:-1] + 1/d[1:]; off = -1/d[1:-1]
    Ks = sp.diags([off, main, off], [-1, 0, 1])
    Mi = sp.diags(1/m)
    H0 = (Mi@Ks + sp.diags(ell*(ell + 1)*x**2)).tocsc()
    H = (H0 + sp.diags(A*x**delta)).astype(complex).tocsc()
    S = sp.diags([-0.5*np.ones(n - 1), 0.5*np.ones(n - 1)], [-1, 1])
    G = (1j*(Mi@S)).tocsc()
    return dict(r=r, x=x, m=m, H0=H0, H=H, G=G, n=n, r1=r1, rmax=rmax)

def madj(A, o):
    return sp.diags(1/o['m'])@A.conj().T@sp.diags(o['m'])

def enorm(K, o, p, xi_max=8.0, taper=0.85):
    r1, rmax = o['r1'], o['rmax']; L = rmax - r1
    x, m = o['x'], o['m']; u = (o['r'] - r1)/L
    w = 1 - smooth7((u - taper)/(1 - taper))
    kmax = int(np.floor(xi_max*L/np.pi))
    Q = np.sin(np.outer(u, np.pi*np.arange(1, kmax + 1)))*w[:, None]
    W = x**(-p/2)
    A = Q.T@(m[:, None]*(W[:, None]*(K@(W[:, None]*Q))))
    Sg = Q.T@(m[:, None]*((o['H0'] + sp.identity(o['n']))@Q)); Sg = 0.5*(Sg + Sg.T)
    Li = np.linalg.inv(np.linalg.cholesky(Sg))
    return np.linalg.norm(Li@A@Li.T, 2)

def mourre(n, lam=1.0, rmax=40.0, delta=1.0):
    o = model(n, rmax=rmax); x = o['x']; H = o['H']; G = o['G']; I = sp.identity(n)
    c = chi(x); C = sp.diags(c); X = sp.diags(x)
    B = 0.5*(C@G + G@C)
    R = sp.diags(c*c*x)
    K = 1j*(B@H - H@B) - (2*lam*X - 2*B@X@B + (H - lam*I)@R + R@(H - lam*I))
    Xi = sp.diags(1/x)
    A = 0.5*(C@Xi@G + G@Xi@C)
    Rt = sp.diags(c*c)
    Kt = 1j*(A@H - H@A) - 2*lam*I - (H - lam*I)@Rt - Rt@(H - lam*I)
    return enorm(K.tocsc(), o, 1 + delta), enorm(Kt.tocsc(), o, delta)

def weight(x, alpha, beta, gamma):
    F = alpha/x + beta*np.log1p(gamma/(beta*x))
    x2dF = -(alpha + gamma/(1 + gamma/(beta*x)))   # x^2 dF/dx
    return F, x2dF

def conjugated(o, alpha, beta, gamma, lam):
    F, x2dF = weight(o['x'], alpha, beta, gamma)
    Hl = (o['H'] - lam*sp.identity(o['n'])).tocoo()
    P = sp.coo_matrix((Hl.data*np.exp(F[Hl.row] - F[Hl.col]), (Hl.row, Hl.col)), shape=Hl.shape).tocsc()
    Pd = madj(P, o)
    return P, 0.5*(P + Pd), (P - Pd)/(2j), x2dF

def fh3(n, alpha=1.0, beta=1.0, gamma=1.0, lam=1.0, delta=1.0, rmax=40.0):
    o = model(n, rmax=rmax); G = o['G']; H = o['H']
    P, ReP, ImP, x2dF = conjugated(o, alpha, beta, gamma, lam)
    D = sp.diags(x2dF)
    Q1 = H - sp.diags(x2dF**2)
    Q1p = 2*D@G
    Rm = 1j*(ReP@ImP - ImP@ReP) - 1j*(Q1@Q1p - Q1p@Q1)
    return enorm(Rm.tocsc(), o, 1 + delta)

def poly(n, s=2.0, k=1.0, t=0.1, lam=1.0, delta=1.0, rmax=40.0):
    o = model(n, rmax=rmax); x = o['x']; G = o['G']; H = o['H']; I = sp.identity(n)
    ch = chi(x)
    w = ch*x**(-s)*(1 + t/x)**(-k)
    B = 0.5*(sp.diags(w)@G + G@sp.diags(w))
    c = ch*x**(1 - s)*(1 + t/x)**(-k)
    tau = (t/x)/(1 + t/x)
    fac = (s - k) + k/(1 + (t/x))
    Gd = madj(G, o)
    rhs = 2*lam*sp.diags(c) + 2*Gd@sp.diags(c*(fac - 1))@G + (H - lam*I)@sp.diags(c) + sp.diags(c)@(H - lam*I)
    K = 1j*(B@H - H@B) - rhs
    return enorm(K.tocsc(), o, 1 + delta - s), fac.min(), fac.max()

if __name__ == '__main__':
    np.set_printoptions(precision=17)
    print('mourre')
    for n in [1024, 2048]:
        print(n, repr(mourre(n)))
    print('mourre lam=0', repr(mourre(1024, lam=0.0)))
    print('fh3')
    for b in [1.0, 4.0, 16.0]:
        print(b, repr(fh3(1024, beta=b)), repr(fh3(2048, beta=b)))
    print('poly')
    for t in [0.0, 0.01, 0.1, 1.0]:
        print(t, repr(poly(1024, t=t)), repr(poly(2048, t=t)))
