#!/usr/bin/env python3
"""Independent oracle evaluations for the chemoviro test suite.

Every value printed here is computed term by term with plain Python floats,
deliberately structured differently from the Rust implementation (each term
bound to a local, summed in reading order). The printed 17-significant-digit
values are frozen into the Rust tests; re-run this script to regenerate them.
"""

# Baseline parameter set (must mirror ModelParameters::default()).
K = 1.0e6
alpha = 0.206
beta = 0.01
delta = 0.5115
gamma = 0.01
b = 50.0
psi = 4.17
delta_U = 50.0
delta_I = 60.0
phi = 0.7
beta_T = 0.5
delta_V = 0.01
delta_T = 0.01
K_u = 1.0e5
K_c = 1.0e5
kappa = 1.0e5
nu_U = 0.08
nu_I = 0.1
tau = 0.2
q = 5.0

# Reference initial state.
U0, I0, V0, EV0, ET0, C0 = 10000.0, 100.0, 500.0, 100.0, 100.0, 100.0


def g17(x):
    return f"{x:.17g}"


def rhs_full(U, I, V, EV, ET, C, p=None):
    growth = alpha * U * (1.0 - (U + I) / K)
    infection = beta * U * V / (K_u + U)
    immune_u = nu_U * U * ET
    drug_u = delta_U * U * C / (K_c + C)
    dU = growth - infection - immune_u - drug_u

    lysis = delta * I
    immune_i = nu_I * ET * I
    viral_immune_i = tau * EV * I
    drug_i = delta_I * I * C / (K_c + C)
    dI = infection - lysis - immune_i - viral_immune_i - drug_i

    production = b * delta * I
    dV = production - infection - gamma * V

    dEV = phi * I - delta_V * EV

    burden = U + I
    recruit = beta_T * burden / (kappa + burden)
    dET = recruit - delta_T * ET

    dC = q - psi * C
    return dU, dI, dV, dEV, dET, dC


print("== rhs_full at baseline/reference state ==")
for name, v in zip("U I V E_V E_T C".split(), rhs_full(U0, I0, V0, EV0, ET0, C0)):
    print(f"d{name}/dt = {g17(v)}")

print("== rhs_no_treatment at (10000, 100) ==")
dU = alpha * U0 * (1.0 - U0 / K) - nu_U * U0 * ET0
dET = beta_T * U0 / (kappa + U0) - delta_T * ET0
print(g17(dU), g17(dET))

print("== rhs_chemo_only at (10000, 100, 100) ==")
dU = alpha * U0 * (1.0 - U0 / K) - nu_U * U0 * ET0 - delta_U * U0 * C0 / (K_c + C0)
dET = beta_T * U0 / (kappa + U0) - delta_T * ET0
dC = q - psi * C0
print(g17(dU), g17(dET), g17(dC))

print("== rhs_viro_only at (10000, 100, 500, 100, 100) ==")
inf = beta * U0 * V0 / (K_u + U0)
dU = alpha * U0 * (1.0 - (U0 + I0) / K) - inf - nu_U * U0 * ET0
dI = inf - delta * I0 - nu_I * ET0 * I0 - tau * EV0 * I0
dV = b * delta * I0 - inf - gamma * V0
dEV = phi * I0 - delta_V * EV0
dET = beta_T * (U0 + I0) / (kappa + U0 + I0) - delta_T * ET0
print(g17(dU), g17(dI), g17(dV), g17(dEV), g17(dET))

print("== rhs_control at (10000, 100, 500, 100), u1=500, u2=50 ==")
u1, u2 = 500.0, 50.0
Cc = 100.0
inf = beta * U0 * V0 / (K_u + U0)
dU = alpha * U0 * (1.0 - (U0 + I0) / K) - inf - delta_U * U0 * Cc / (K_c + Cc)
dI = inf - delta * I0 - delta_I * I0 * Cc / (K_c + Cc)
dV = b * delta * I0 - inf - gamma * V0 + u1
dC = u2 - psi * Cc
print(g17(dU), g17(dI), g17(dV), g17(dC))


def no_treatment_endemic(alpha_, nu_u_):
    """Positive root of the tumour/immune steady-state quadratic, via the
    numerically stable form of the quadratic formula."""
    import math

    M = nu_u_ * beta_T / delta_T
    a = alpha_ / K
    bq = alpha_ * kappa / K + M - alpha_
    c = -alpha_ * kappa
    disc = bq * bq - 4.0 * a * c
    root = math.sqrt(disc)
    if bq >= 0.0:
        ustar = 2.0 * c / (-bq - root) / 1.0  # root pair: q/a form
        ustar = (2.0 * c) / (-bq - root)
    else:
        ustar = (-bq + root) / (2.0 * a)
    et = (beta_T / delta_T) * ustar / (kappa + ustar)
    return ustar, et


print("== no-treatment endemic (baseline) ==")
us, et = no_treatment_endemic(alpha, nu_U)
print("U* =", g17(us), "E_T* =", g17(et))
resid = alpha * us * (1.0 - us / K) - nu_U * us * et
print("residual dU/dt at root =", g17(resid))


def chemo_endemic(alpha_, q_):
    import math

    Cs = q_ / psi
    L = delta_U * Cs / (K_c + Cs)
    M = nu_U * beta_T / delta_T
    a = alpha_ / K
    bq = alpha_ * kappa / K + M + L - alpha_
    c = kappa * (L - alpha_)
    if L >= alpha_:
        return None
    disc = bq * bq - 4.0 * a * c
    root = math.sqrt(disc)
    if bq >= 0.0:
        ustar = (2.0 * c) / (-bq - root)
    else:
        ustar = (-bq + root) / (2.0 * a)
    et = (beta_T / delta_T) * ustar / (kappa + ustar)
    return ustar, et, Cs


print("== chemo endemic (baseline, q=5) ==")
us, et, cs = chemo_endemic(alpha, q)
print("U* =", g17(us), "E_T* =", g17(et), "C* =", g17(cs))

print("== chemo endemic (alpha=0.8, q=5) ==")
us8, et8, cs8 = chemo_endemic(0.8, 5.0)
print("U* =", g17(us8), "E_T* =", g17(et8), "C* =", g17(cs8))


def r0(beta_, b_, alpha_, q_):
    us_, et_, cs_ = chemo_endemic(alpha_, q_)
    num = b_ * beta_ * delta * us_ * (K_c + cs_)
    den = gamma * ((K_c + cs_) * (nu_I * et_ + delta) + delta_I * cs_) * (K_u + us_)
    return num / den


print("== R0 at alpha=0.8, b=50, q=5, beta=1 ==")
r0_unit = r0(1.0, 50.0, 0.8, 5.0)
print("R0(beta=1) =", g17(r0_unit))
beta_cal = 51.0476 / r0_unit
print("beta_cal for R0=51.0476:", g17(beta_cal))
print("check R0(beta_cal) =", g17(r0(beta_cal, 50.0, 0.8, 5.0)))

print("== R0 over dose grid at alpha=0.8, b=50, beta_cal ==")
for qq in [5.0, 10.0, 15.0, 35.0, 50.0, 100.0]:
    print(qq, g17(r0(beta_cal, 50.0, 0.8, qq)))
r5 = r0(beta_cal, 50.0, 0.8, 5.0)
r100 = r0(beta_cal, 50.0, 0.8, 100.0)
print("total relative drop 5 -> 100:", g17((r5 - r100) / r5))

print("== dose threshold q* (baseline) ==")
qstar = alpha * psi * K_c / (delta_U - alpha)
print("q* =", g17(qstar))

print("== baseline domain bounds ==")
print("V bound b/gamma =", g17(b / gamma))
print("E_V bound phi/delta_V =", g17(phi / delta_V))
print("E_T bound beta_T/delta_T =", g17(beta_T / delta_T))
print("C bound q/psi =", g17(q / psi))
