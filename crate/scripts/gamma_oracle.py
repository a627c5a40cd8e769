"""Independent check of the tumour-burden sensitivity to drug infusion.

Solves the six-compartment steady state with scipy from scratch (no shared
code with the Rust crate), then computes the blended index two ways:
via the implicit-function linear solve and via direct re-solves at q(1 +/- h).
"""
import numpy as np
from scipy.optimize import fsolve
from scipy.integrate import solve_ivp

P = dict(K=1e6, alpha=0.8, beta=0.15222854712070424, delta=0.5115, gamma=0.01,
         b=50.0, psi=4.17, delta_U=50.0, delta_I=60.0, phi=0.7, beta_T=0.5,
         delta_V=0.01, delta_T=0.01, K_u=1e5, K_c=1e5, kappa=1e5,
         nu_U=0.08, nu_I=0.1, tau=0.2, q=5.0)

def rhs(t, y, p):
    U, I, V, EV, ET, C = y
    inf = p['beta']*U*V/(p['K_u']+U)
    drug = C/(p['K_c']+C)
    return np.array([
        p['alpha']*U*(1-(U+I)/p['K']) - inf - p['nu_U']*U*ET - p['delta_U']*U*drug,
        inf - p['delta']*I - p['nu_I']*ET*I - p['tau']*EV*I - p['delta_I']*I*drug,
        p['b']*p['delta']*I - inf - p['gamma']*V,
        p['phi']*I - p['delta_V']*EV,
        p['beta_T']*(U+I)/(p['kappa']+U+I) - p['delta_T']*ET,
        p['q'] - p['psi']*C,
    ])

def equilibrium(p):
    u0 = 0.3*p['K']
    seed = [u0, 0.02*u0, 0.1*u0, 1.0, 1.0, p['q']/p['psi']]
    sol = solve_ivp(rhs, (0, 1500), seed, args=(p,), rtol=1e-10, atol=1e-8,
                    method='LSODA')
    x = fsolve(lambda y: rhs(0, y, p), sol.y[:, -1], xtol=1e-13, full_output=False)
    assert np.max(np.abs(rhs(0, x, p))) < 1e-8, rhs(0, x, p)
    return np.array(x)

def gamma_implicit(p, name='q'):
    x = equilibrium(p)
    h = 1e-6*abs(p[name])
    J = np.zeros((6, 6))
    for j in range(6):
        hj = np.cbrt(np.finfo(float).eps)*max(1, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += hj; xm[j] -= hj
        J[:, j] = (rhs(0, xp, p) - rhs(0, xm, p))/(xp[j]-xm[j])
    pp, pm = dict(p), dict(p)
    pp[name] += h; pm[name] -= h
    dfdp = (rhs(0, x, pp) - rhs(0, x, pm))/(2*h)
    shift = np.linalg.solve(J, dfdp)
    g = -p[name]*shift/x
    blended = (x[0]*g[0] + x[1]*g[1])/(x[0]+x[1])
    return blended, x

def gamma_direct(p, name='q'):
    x0 = equilibrium(p)
    h = 1e-4*abs(p[name])
    tot = []
    for s in (+1, -1):
        pp = dict(p); pp[name] += s*h
        x = fsolve(lambda y: rhs(0, y, pp), x0, xtol=1e-13)
        tot.append(x[0]+x[1])
    return (tot[0]-tot[1])/(2*h)*p[name]/(x0[0]+x0[1])

for q in (5.0, 50.0, 100.0):
    p = dict(P); p['q'] = q
    gi, x = gamma_implicit(p)
    gd = gamma_direct(p)
    print(f"q={q:6.1f}  implicit={gi:+.6e}  direct={gd:+.6e}  "
          f"U*={x[0]:.6e} I*={x[1]:.6e} V*={x[2]:.6e} ET*={x[4]:.6e}")
