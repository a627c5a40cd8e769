//! Steady states of the model variants and their local stability.
//!
//! The tumour-free states and the virus-free endemic states have closed
//! forms (a quadratic in `U` shared by the untreated and drug-treated
//! systems); interior states are found by a damped Newton iteration seeded
//! from a long integration. Every located point is packaged as an
//! [`EquilibriumReport`] carrying the finite-difference Jacobian, its
//! eigenvalues, a stability verdict, and, for the two- and three-dimensional
//! systems, the characteristic-polynomial coefficients a Routh-Hurwitz test
//! needs.
//!
//! Verdicts always come from eigenvalue signs. The Routh-Hurwitz
//! coefficients are reported as diagnostics and cross-checked against the
//! eigenvalue verdict in tests, never used as the primary classifier.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dynamics::{integrate_to_steady_state, DynamicsError, SteadyStateOptions};
use crate::model::ModelVariant;
use crate::params::ModelParameters;

/// Classification margin on the largest eigenvalue real part.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Components smaller than this count as absent when deciding what kind of
/// steady state a solver landed on.
const ZERO_COMPONENT: f64 = 1e-6;

/// Base step for central finite differences, scaled per component by
/// `max(1, |x_j|)`.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.cbrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriaError {
    #[error("Newton did not converge after {iterations} iterations; scaled residual {residual:.3e}")]
    NewtonDidNotConverge {
        iterations: usize,
        residual: f64,
        /// Best iterate seen, for diagnosis or reseeding.
        best: Vec<f64>,
    },
    #[error("Jacobian became singular at Newton iteration {at_iteration}")]
    SingularJacobian { at_iteration: usize },
    #[error("seed has {got} components but the system needs {expected}")]
    SeedDimension { expected: usize, got: usize },
    #[error("no steady-state analysis for the {tag} system")]
    UnsupportedVariant { tag: &'static str },
    #[error("seeding integration failed: {0}")]
    Seeding(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    TumourFree,
    VirusFree,
    Endemic,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumKind::TumourFree => "tumour-free",
            EquilibriumKind::VirusFree => "virus-free",
            EquilibriumKind::Endemic => "endemic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    /// Largest real part within `margin` of zero; no call either way.
    Marginal { margin: f64 },
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StabilityVerdict::Stable => f.write_str("stable"),
            StabilityVerdict::Unstable => f.write_str("unstable"),
            StabilityVerdict::Marginal { .. } => f.write_str("marginal"),
        }
    }
}

/// A steady state with its local analysis attached.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub variant: ModelVariant,
    /// Role of the point within its variant ("tumour-free", "virus-free",
    /// "endemic", "coexistence").
    pub label: &'static str,
    pub point: Vec<f64>,
    pub kind: EquilibriumKind,
    /// Row-major finite-difference Jacobian at the point.
    pub jacobian: Vec<Vec<f64>>,
    /// Eigenvalues as (re, im), sorted by descending real part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Characteristic-polynomial coefficients for the 2- and 3-dimensional
    /// systems: `P_1, P_0` (quadratic) or `a_2, a_1, a_0, a_2*a_1-a_0`
    /// (cubic). Absent for larger systems.
    pub routh_hurwitz: Option<Vec<(&'static str, f64)>>,
    pub verdict: StabilityVerdict,
    /// `||rhs(point)||_inf`.
    pub residual: f64,
}

impl EquilibriumReport {
    /// Stability according to the attached Routh-Hurwitz coefficients, when
    /// the system dimension supports the test.
    pub fn routh_hurwitz_stable(&self) -> Option<bool> {
        let coeffs = self.routh_hurwitz.as_ref()?;
        match coeffs.len() {
            2 => Some(routh_hurwitz_quadratic(coeffs[0].1, coeffs[1].1)),
            4 => Some(routh_hurwitz_cubic(coeffs[0].1, coeffs[1].1, coeffs[2].1)),
            _ => None,
        }
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |m, (re, _)| m.max(*re))
    }
}

/// Equilibria of one variant plus notes about members that could not be
/// produced (absent closed form, failed interior solve).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    pub reports: Vec<EquilibriumReport>,
    pub notes: Vec<String>,
}

/// Stable evaluation of the positive root of `a x^2 + b x + c = 0`.
/// Returns `None` when no strictly positive real root exists.
fn positive_quadratic_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Standard cancellation-free form: compute the larger-magnitude root
    // first, recover the other from the product of roots.
    let q = -0.5 * (b + b.signum() * sq);
    let mut candidates = Vec::new();
    if a != 0.0 {
        candidates.push(q / a);
    }
    if q != 0.0 {
        candidates.push(c / q);
    }
    candidates.into_iter().find(|r| *r > 0.0)
}

/// Tumour level of the drug-suppressed endemic state, with `l` the
/// equilibrium drug kill rate. `l = 0` gives the untreated endemic tumour
/// level; sharing one code path makes the two agree bitwise when `q = 0`.
fn endemic_tumour_root(p: &ModelParameters, l: f64) -> Option<f64> {
    let m = p.nu_u * p.beta_t / p.delta_t;
    let a = p.alpha / p.k;
    let b = (p.alpha * p.kappa / p.k + m + l) - p.alpha;
    let c = p.kappa * (l - p.alpha);
    positive_quadratic_root(a, b, c)
}

fn immune_level(p: &ModelParameters, burden: f64) -> f64 {
    p.beta_t * burden / (p.kappa + burden) / p.delta_t
}

/// Equilibrium drug concentration under constant infusion.
pub fn equilibrium_drug_level(p: &ModelParameters) -> f64 {
    p.q / p.psi
}

/// Equilibrium drug kill rate on tumour cells under constant infusion.
pub fn equilibrium_drug_kill(p: &ModelParameters) -> f64 {
    let c = equilibrium_drug_level(p);
    p.delta_u * c / (p.k_c + c)
}

/// Closed-form coordinates (tumour, immune, drug) of the endemic state under
/// constant infusion, when the drug does not already clear the tumour.
pub fn chemo_endemic_point(p: &ModelParameters) -> Option<(f64, f64, f64)> {
    endemic_tumour_root(p, equilibrium_drug_kill(p))
        .map(|u| (u, immune_level(p, u), equilibrium_drug_level(p)))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Central-difference Jacobian of `f` at `x` with per-component step
/// `h_base * max(1, |x_j|)`.
pub(crate) fn fd_jacobian<F>(f: &F, x: &[f64], h_base: f64) -> DMatrix<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = h_base * x[j].abs().max(1.0);
        let up = x[j] + h;
        let down = x[j] - h;
        xp[j] = up;
        f(&xp, &mut fp);
        xp[j] = down;
        f(&xp, &mut fm);
        xp[j] = x[j];
        // The realized spread, not 2h: cheaper than it looks against rounding
        // when x_j + h is not representable exactly.
        let spread = up - down;
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / spread;
        }
    }
    jac
}

/// Jacobian of a model variant at `point`, row-major, with base step `h`.
pub fn jacobian(
    variant: &ModelVariant,
    p: &ModelParameters,
    point: &[f64],
    h: f64,
) -> Vec<Vec<f64>> {
    assert_eq!(point.len(), variant.dim(), "point size must match the system");
    let f = |x: &[f64], out: &mut [f64]| variant.eval_into(p, 0.0, x, out);
    to_rows(&fd_jacobian(&f, point, h))
}

/// Eigenvalues of a square matrix as (re, im), sorted by descending real
/// part then descending imaginary part. Sized for the systems here (n <= 6).
///
/// Balanced Hessenberg reduction followed by the Francis double-shift QR
/// iteration with exceptional shifts. The Jacobians in this model routinely
/// carry repeated decay rates (several clearance parameters share a value at
/// the reference setting), which defeats unshifted QR; the shifted form
/// deflates them cleanly and a hard iteration cap keeps the routine total.
pub fn eigenvalues(matrix: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = matrix.len();
    assert!(matrix.iter().all(|row| row.len() == n), "matrix must be square");
    let mut out = hqr_eigenvalues(matrix.to_vec());
    out.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    out
}

fn sign_like(magnitude: f64, sign_source: f64) -> f64 {
    if sign_source < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Diagonal similarity scaling by powers of two, balancing row and column
/// norms. Exact in floating point, so it never perturbs the spectrum.
fn balance(a: &mut [Vec<f64>]) {
    let n = a.len();
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let s = c + r;
                let mut c_scaled = c;
                let mut g = r / RADIX;
                while c_scaled < g {
                    f *= RADIX;
                    c_scaled *= SQRDX;
                }
                g = r * RADIX;
                while c_scaled > g {
                    f /= RADIX;
                    c_scaled /= SQRDX;
                }
                if (c_scaled + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
        if done {
            return;
        }
    }
}

/// In-place reduction to upper Hessenberg form by pivoted elimination.
/// Entries below the subdiagonal are left as junk; the QR stage never reads
/// them.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0_f64;
        let mut pivot = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                pivot = j;
            }
        }
        if pivot != m {
            for j in (m - 1)..n {
                let tmp = a[pivot][j];
                a[pivot][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut() {
                row.swap(pivot, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 0..n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
}

/// Classic shifted-QR eigenvalue sweep on a general real matrix.
fn hqr_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<(f64, f64)> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(a[0][0], 0.0)];
    }
    balance(&mut a);
    hessenberg(&mut a);

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut nn: isize = n as isize - 1;
    let mut t = 0.0;
    'deflate: while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let (lu, lp) = (l as usize, (l - 1) as usize);
                let mut s = a[lp][lp].abs() + a[lu][lu].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[lu][lp].abs() <= f64::EPSILON * s {
                    a[lu][lp] = 0.0;
                    break;
                }
                l -= 1;
            }
            let nnu = nn as usize;
            let mut x = a[nnu][nnu];
            if l == nn {
                out.push((x + t, 0.0));
                nn -= 1;
                continue 'deflate;
            }
            let nm = (nn - 1) as usize;
            let mut y = a[nm][nm];
            let mut w = a[nnu][nm] * a[nm][nnu];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let xt = x + t;
                if q >= 0.0 {
                    let z = p + sign_like(z, p);
                    let first = xt + z;
                    let second = if z != 0.0 { xt - w / z } else { first };
                    out.push((first, 0.0));
                    out.push((second, 0.0));
                } else {
                    out.push((xt + p, z));
                    out.push((xt + p, -z));
                }
                nn -= 2;
                continue 'deflate;
            }
            if its == 100 {
                // Emergency deflation after many exceptional shifts; accepts
                // the corner entry rather than spinning forever.
                out.push((x + t, 0.0));
                nn -= 1;
                continue 'deflate;
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=nnu {
                    a[i][i] -= x;
                }
                let s = a[nnu][nm].abs() + a[nm][(nn - 2) as usize].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0_f64, 0.0_f64, 0.0_f64);
            while m >= l {
                let mu = m as usize;
                let z = a[mu][mu];
                let dr = x - z;
                let ds = y - z;
                p = (dr * ds - w) / a[mu + 1][mu] + a[mu][mu + 1];
                q = a[mu + 1][mu + 1] - z - dr - ds;
                r = a[mu + 2][mu + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[mu][mu - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[mu - 1][mu - 1].abs() + z.abs() + a[mu + 1][mu + 1].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in (mu + 2)..=nnu {
                a[i][i - 2] = 0.0;
                if i != mu + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            for k in mu..nnu {
                if k != mu {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nnu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_like((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == mu {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nnu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nnu - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let upper = if nnu < k + 3 { nnu } else { k + 3 };
                for i in (l as usize)..=upper {
                    let mut pp = x * a[i][k] + y * a[i][k + 1];
                    if k != nnu - 1 {
                        pp += z * a[i][k + 2];
                        a[i][k + 2] -= pp * r;
                    }
                    a[i][k + 1] -= pp * q;
                    a[i][k] -= pp;
                }
            }
        }
    }
    out
}

/// Routh-Hurwitz test for `x^2 + p1 x + p0`.
pub fn routh_hurwitz_quadratic(p1: f64, p0: f64) -> bool {
    p1 > 0.0 && p0 > 0.0
}

/// Routh-Hurwitz test for `x^3 + a2 x^2 + a1 x + a0`.
pub fn routh_hurwitz_cubic(a2: f64, a1: f64, a0: f64) -> bool {
    a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0
}

fn classify(eigs: &[(f64, f64)], margin: f64) -> StabilityVerdict {
    let max_re = eigs.iter().fold(f64::NEG_INFINITY, |m, (re, _)| m.max(*re));
    if max_re > margin {
        StabilityVerdict::Unstable
    } else if max_re < -margin {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Marginal { margin }
    }
}

fn char_poly_coefficients(jac: &[Vec<f64>]) -> Option<Vec<(&'static str, f64)>> {
    match jac.len() {
        2 => {
            let tr = jac[0][0] + jac[1][1];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            Some(vec![("P_1", -tr), ("P_0", det)])
        }
        3 => {
            let m = jac;
            let tr = m[0][0] + m[1][1] + m[2][2];
            let minors = (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
                + (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            let (a2, a1, a0) = (-tr, minors, -det);
            Some(vec![
                ("a_2", a2),
                ("a_1", a1),
                ("a_0", a0),
                ("a_2*a_1-a_0", a2 * a1 - a0),
            ])
        }
        _ => None,
    }
}

fn residual_inf(variant: &ModelVariant, p: &ModelParameters, point: &[f64]) -> f64 {
    let mut out = vec![0.0; point.len()];
    variant.eval_into(p, 0.0, point, &mut out);
    out.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn build_report(
    variant: &ModelVariant,
    p: &ModelParameters,
    label: &'static str,
    point: Vec<f64>,
    kind: EquilibriumKind,
) -> EquilibriumReport {
    let jac = jacobian(variant, p, &point, default_fd_step());
    let eigs = eigenvalues(&jac);
    let verdict = classify(&eigs, STABILITY_MARGIN);
    let routh_hurwitz = char_poly_coefficients(&jac);
    let residual = residual_inf(variant, p, &point);
    EquilibriumReport {
        variant: variant.clone(),
        label,
        point,
        kind,
        jacobian: jac,
        eigenvalues: eigs,
        routh_hurwitz,
        verdict,
        residual,
    }
}

/// Options for the damped Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Half-step backtracking attempts per iteration.
    pub max_halvings: usize,
    /// Convergence threshold on `||f||_inf / (1 + ||x||_inf)`.
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 100,
            max_halvings: 8,
            tolerance: 1e-10,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Damped Newton root solve on `f`. Steps that fail to reduce the residual
/// are halved up to `max_halvings` times before the iteration gives up.
pub(crate) fn newton_root<F>(
    f: &F,
    seed: &[f64],
    opts: &NewtonOptions,
) -> Result<Vec<f64>, EquilibriaError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = seed.len();
    let mut x = seed.to_vec();
    let mut r = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; n];

    for iteration in 0..opts.max_iterations {
        f(&x, &mut r);
        let scaled = inf_norm(&r) / (1.0 + inf_norm(&x));
        if scaled < opts.tolerance {
            return Ok(x);
        }
        let jac = fd_jacobian(f, &x, default_fd_step());
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(EquilibriaError::SingularJacobian {
                at_iteration: iteration,
            });
        };
        let base_norm = inf_norm(&r);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for j in 0..n {
                trial[j] = x[j] + lambda * step[j];
            }
            f(&trial, &mut r_trial);
            if r_trial.iter().all(|v| v.is_finite()) && inf_norm(&r_trial) < base_norm {
                x.copy_from_slice(&trial);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(EquilibriaError::NewtonDidNotConverge {
                iterations: iteration,
                residual: scaled,
                best: x,
            });
        }
    }
    f(&x, &mut r);
    let scaled = inf_norm(&r) / (1.0 + inf_norm(&x));
    if scaled < opts.tolerance {
        Ok(x)
    } else {
        Err(EquilibriaError::NewtonDidNotConverge {
            iterations: opts.max_iterations,
            residual: scaled,
            best: x,
        })
    }
}

fn newton_on_variant(
    variant: &ModelVariant,
    p: &ModelParameters,
    seed: &[f64],
    opts: &NewtonOptions,
) -> Result<Vec<f64>, EquilibriaError> {
    if seed.len() != variant.dim() {
        return Err(EquilibriaError::SeedDimension {
            expected: variant.dim(),
            got: seed.len(),
        });
    }
    let f = |x: &[f64], out: &mut [f64]| variant.eval_into(p, 0.0, x, out);
    newton_root(&f, seed, opts)
}

/// Steady states of the untreated tumour/immune system: the tumour-free
/// origin and the endemic state from the closed-form quadratic.
pub fn no_treatment_equilibria(p: &ModelParameters) -> EquilibriumSet {
    let variant = ModelVariant::NoTreatment;
    let mut reports = vec![build_report(
        &variant,
        p,
        "tumour-free",
        vec![0.0, 0.0],
        EquilibriumKind::TumourFree,
    )];
    // The constant term of the quadratic is -alpha*kappa < 0, so a positive
    // root always exists.
    let u = endemic_tumour_root(p, 0.0).expect("untreated endemic root always exists");
    reports.push(build_report(
        &variant,
        p,
        "endemic",
        vec![u, immune_level(p, u)],
        EquilibriumKind::Endemic,
    ));
    EquilibriumSet {
        reports,
        notes: Vec::new(),
    }
}

/// Steady states under constant drug infusion: the tumour-free state and,
/// when the equilibrium kill rate stays below the growth rate, the endemic
/// state. Above that kill rate the endemic state is reported absent.
pub fn chemo_equilibria(p: &ModelParameters) -> EquilibriumSet {
    let variant = ModelVariant::ChemoOnly;
    let c_star = equilibrium_drug_level(p);
    let l = equilibrium_drug_kill(p);
    let mut reports = vec![build_report(
        &variant,
        p,
        "tumour-free",
        vec![0.0, 0.0, c_star],
        EquilibriumKind::TumourFree,
    )];
    let mut notes = Vec::new();
    match endemic_tumour_root(p, l) {
        Some(u) => reports.push(build_report(
            &variant,
            p,
            "endemic",
            vec![u, immune_level(p, u), c_star],
            EquilibriumKind::Endemic,
        )),
        None => notes.push(format!(
            "no endemic state: equilibrium drug kill {l:.6e} meets or exceeds growth rate {:.6e}",
            p.alpha
        )),
    }
    EquilibriumSet { reports, notes }
}

/// Infusion level at which the drug-treated tumour-free state changes
/// stability, when one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoseThreshold {
    pub q_star: f64,
    /// Whether the threshold is reachable under the dosing ceiling `u2_MTD`.
    pub within_mtd: bool,
}

/// The critical constant infusion `q* = alpha psi K_c / (delta_U - alpha)`.
/// `None` when the drug's maximum kill rate cannot match tumour growth
/// (`delta_U <= alpha`), in which case no infusion stabilizes the
/// tumour-free state.
pub fn chemo_dose_threshold(p: &ModelParameters) -> Option<DoseThreshold> {
    if p.delta_u <= p.alpha {
        return None;
    }
    let q_star = p.alpha * p.psi * p.k_c / (p.delta_u - p.alpha);
    Some(DoseThreshold {
        q_star,
        within_mtd: q_star <= p.u2_mtd,
    })
}

fn settle_seed(variant: &ModelVariant, p: &ModelParameters, start: &[f64], t_max: f64) -> Vec<f64> {
    // Coarse step: the integration only needs to land in the Newton basin,
    // not resolve the path.
    let opts = SteadyStateOptions {
        dt: 0.05,
        stall_tol: 1e-10,
        t_max,
    };
    match integrate_to_steady_state(variant, p, start, &opts) {
        Ok(out) => out.state,
        // A diverging probe just means the start was poor; let Newton try
        // from the raw start instead of failing the whole report.
        Err(_) => start.to_vec(),
    }
}

fn kind_of_full_point(u: f64, i: f64, v: f64) -> EquilibriumKind {
    if u.abs() < ZERO_COMPONENT && i.abs() < ZERO_COMPONENT {
        EquilibriumKind::TumourFree
    } else if i.abs() < ZERO_COMPONENT && v.abs() < ZERO_COMPONENT {
        EquilibriumKind::VirusFree
    } else {
        EquilibriumKind::Endemic
    }
}

/// Steady states of the virus-only system: the origin, the virus-free
/// endemic state (identical to the untreated endemic in `(U, E_T)`), and a
/// coexistence state when a Newton solve seeded from a long run finds one.
pub fn viro_equilibria(p: &ModelParameters) -> EquilibriumSet {
    let variant = ModelVariant::ViroOnly;
    let mut reports = vec![build_report(
        &variant,
        p,
        "tumour-free",
        vec![0.0; 5],
        EquilibriumKind::TumourFree,
    )];
    let u = endemic_tumour_root(p, 0.0).expect("untreated endemic root always exists");
    reports.push(build_report(
        &variant,
        p,
        "virus-free",
        vec![u, 0.0, 0.0, 0.0, immune_level(p, u)],
        EquilibriumKind::VirusFree,
    ));

    let mut notes = Vec::new();
    let start = [0.5 * u, 0.02 * u, 5.0 * 0.02 * u, 0.0, immune_level(p, u)];
    let seed = settle_seed(&variant, p, &start, 1500.0);
    match newton_on_variant(&variant, p, &seed, &NewtonOptions::default()) {
        Ok(point) => {
            let kind = kind_of_full_point(point[0], point[1], point[2]);
            if kind == EquilibriumKind::Endemic && point.iter().all(|x| *x > -ZERO_COMPONENT) {
                reports.push(build_report(&variant, p, "coexistence", point, kind));
            } else {
                notes.push(format!(
                    "interior solve settled on a {kind} state; no coexistence equilibrium found"
                ));
            }
        }
        Err(e) => notes.push(format!("no coexistence equilibrium: {e}")),
    }
    EquilibriumSet { reports, notes }
}

fn full_start(p: &ModelParameters) -> [f64; 6] {
    let u = endemic_tumour_root(p, equilibrium_drug_kill(p))
        .or_else(|| endemic_tumour_root(p, 0.0))
        .unwrap_or(p.k * 0.01);
    [
        0.5 * u,
        0.02 * u,
        5.0 * 0.02 * u,
        0.0,
        immune_level(p, u),
        equilibrium_drug_level(p),
    ]
}

/// Endemic steady state of the six-compartment system: a long integration
/// supplies the Newton seed. The returned report's `kind` states what the
/// solve actually landed on, which may be a boundary state when the virus
/// cannot persist.
pub fn full_endemic_equilibrium(
    p: &ModelParameters,
) -> Result<EquilibriumReport, EquilibriaError> {
    let seed = settle_seed(&ModelVariant::Full, p, &full_start(p), 1500.0);
    full_endemic_equilibrium_from(p, &seed)
}

/// Same as [`full_endemic_equilibrium`] but from a caller-supplied seed,
/// with no integration pass first.
pub fn full_endemic_equilibrium_from(
    p: &ModelParameters,
    seed: &[f64],
) -> Result<EquilibriumReport, EquilibriaError> {
    let variant = ModelVariant::Full;
    let point = newton_on_variant(&variant, p, seed, &NewtonOptions::default())?;
    let kind = kind_of_full_point(point[0], point[1], point[2]);
    let label = match kind {
        EquilibriumKind::TumourFree => "tumour-free",
        EquilibriumKind::VirusFree => "virus-free",
        EquilibriumKind::Endemic => "coexistence",
    };
    Ok(build_report(&variant, p, label, point, kind))
}

/// Steady states of the full system: tumour-free, virus-free endemic (when
/// the drug does not already clear the tumour), and coexistence when the
/// interior solve finds one.
pub fn full_equilibria(p: &ModelParameters) -> EquilibriumSet {
    let variant = ModelVariant::Full;
    let c_star = equilibrium_drug_level(p);
    let mut reports = vec![build_report(
        &variant,
        p,
        "tumour-free",
        vec![0.0, 0.0, 0.0, 0.0, 0.0, c_star],
        EquilibriumKind::TumourFree,
    )];
    let mut notes = Vec::new();
    match endemic_tumour_root(p, equilibrium_drug_kill(p)) {
        Some(u) => reports.push(build_report(
            &variant,
            p,
            "virus-free",
            vec![u, 0.0, 0.0, 0.0, immune_level(p, u), c_star],
            EquilibriumKind::VirusFree,
        )),
        None => notes.push("no virus-free endemic state: drug kill exceeds growth".into()),
    }
    match full_endemic_equilibrium(p) {
        Ok(report) if report.kind == EquilibriumKind::Endemic => reports.push(report),
        Ok(report) => notes.push(format!(
            "interior solve settled on a {} state; no coexistence equilibrium found",
            report.kind
        )),
        Err(e) => notes.push(format!("no coexistence equilibrium: {e}")),
    }
    EquilibriumSet { reports, notes }
}

/// Steady-state analysis for any non-driven variant.
pub fn equilibria_for(
    variant: &ModelVariant,
    p: &ModelParameters,
) -> Result<EquilibriumSet, EquilibriaError> {
    match variant {
        ModelVariant::Full => Ok(full_equilibria(p)),
        ModelVariant::NoTreatment => Ok(no_treatment_equilibria(p)),
        ModelVariant::ChemoOnly => Ok(chemo_equilibria(p)),
        ModelVariant::ViroOnly => Ok(viro_equilibria(p)),
        ModelVariant::ControlReduced(_) => Err(EquilibriaError::UnsupportedVariant {
            tag: "time-driven control",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p() -> ModelParameters {
        ModelParameters::default()
    }

    fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        lo * (hi / lo).powf(rng.gen::<f64>())
    }

    /// Random parameter draw kept within ranges where closed-form residuals
    /// stay near machine precision (term magnitudes below ~1e7).
    fn random_params(rng: &mut ChaCha8Rng) -> ModelParameters {
        let mut q = p();
        q.k = log_uniform(rng, 1.0e4, 1.0e6);
        q.alpha = rng.gen_range(0.05..1.0);
        q.kappa = log_uniform(rng, 1.0e3, 1.0e6);
        q.nu_u = rng.gen_range(0.005..0.15);
        q.beta_t = rng.gen_range(0.05..1.0);
        q.delta_t = rng.gen_range(0.01..0.1);
        q.delta_u = rng.gen_range(1.0..100.0);
        q.psi = rng.gen_range(0.5..10.0);
        q.q = rng.gen_range(0.0..50.0);
        q.k_c = log_uniform(rng, 1.0e3, 1.0e6);
        q
    }

    #[test]
    fn untreated_tumour_free_eigenvalues_are_growth_and_immune_decay() {
        let p = p();
        let set = no_treatment_equilibria(&p);
        let x1 = &set.reports[0];
        assert_eq!(x1.point, vec![0.0, 0.0]);
        assert_eq!(x1.verdict, StabilityVerdict::Unstable);
        let eigs = &x1.eigenvalues;
        assert!((eigs[0].0 - p.alpha).abs() < 1e-12 && eigs[0].1 == 0.0);
        assert!((eigs[1].0 + p.delta_t).abs() < 1e-12 && eigs[1].1 == 0.0);
    }

    #[test]
    fn untreated_endemic_matches_frozen_oracle() {
        let set = no_treatment_equilibria(&p());
        let x2 = &set.reports[1];
        let (u, e_t) = (x2.point[0], x2.point[1]);
        assert!((u - 5398.730106676051).abs() < 1e-12 * 5398.73, "U* = {u}");
        assert!((e_t - 2.5610982699753087).abs() < 1e-12 * 2.56, "E_T* = {e_t}");
        assert!(x2.residual < 1e-9, "residual {}", x2.residual);
        assert_eq!(x2.verdict, StabilityVerdict::Stable);
    }

    #[test]
    fn without_immune_pressure_tumour_reaches_capacity() {
        let mut params = p();
        params.nu_u = 0.0;
        let set = no_treatment_equilibria(&params);
        let u = set.reports[1].point[0];
        assert!(
            (u - params.k).abs() <= 1e-12 * params.k,
            "U* = {u}, capacity {}",
            params.k
        );
    }

    #[test]
    fn drug_tumour_free_eigenvalues_match_hand_derivation() {
        let p = p();
        let set = chemo_equilibria(&p);
        let c1 = &set.reports[0];
        let l = equilibrium_drug_kill(&p);
        let mut expected = [p.alpha - l, -p.delta_t, -p.psi];
        expected.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in c1.eigenvalues.iter().zip(expected) {
            assert!(
                (got.0 - want).abs() < 1e-9 * want.abs().max(1.0) && got.1 == 0.0,
                "eigenvalue {got:?} vs {want}"
            );
        }
        // Low dose: the drug cannot hold the tumour at zero.
        assert_eq!(c1.verdict, StabilityVerdict::Unstable);
    }

    #[test]
    fn drug_endemic_matches_frozen_oracle() {
        let set = chemo_equilibria(&p());
        let c2 = &set.reports[1];
        let (u, e_t, c) = (c2.point[0], c2.point[1], c2.point[2]);
        assert!((u - 5382.1775860803755).abs() < 1e-12 * 5382.18, "U* = {u}");
        assert!((e_t - 2.553646977774775).abs() < 1e-12 * 2.55, "E_T* = {e_t}");
        assert!((c - 1.1990407673860912).abs() < 1e-15 * 1.2, "C* = {c}");
        assert!(c2.residual < 1e-9, "residual {}", c2.residual);
        let coeffs = c2.routh_hurwitz.as_ref().unwrap();
        assert_eq!(coeffs.len(), 4);
        assert_eq!(coeffs[3].0, "a_2*a_1-a_0");
        assert_eq!(c2.routh_hurwitz_stable(), Some(true));
        assert_eq!(c2.verdict, StabilityVerdict::Stable);
    }

    #[test]
    fn zero_infusion_reduces_drug_system_to_untreated_bitwise() {
        let mut params = p();
        params.q = 0.0;
        let untreated = no_treatment_equilibria(&params);
        let dosed = chemo_equilibria(&params);
        let x2 = &untreated.reports[1].point;
        let c2 = &dosed.reports[1].point;
        assert_eq!(c2[0], x2[0], "tumour level must agree bitwise at q = 0");
        assert_eq!(c2[1], x2[1]);
        assert_eq!(c2[2], 0.0);
        assert_eq!(dosed.reports[0].point, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn dose_threshold_matches_direct_evaluation() {
        let p = p();
        let th = chemo_dose_threshold(&p).unwrap();
        let direct = 0.206 * 4.17 * 1.0e5 / 49.794;
        assert!((th.q_star - direct).abs() < 1e-12 * direct, "q* = {}", th.q_star);
        assert!((th.q_star - 1725.1476081455596).abs() < 1e-9);
        assert!(!th.within_mtd, "default ceiling 100 sits below q*");
    }

    #[test]
    fn tumour_free_verdict_flips_across_the_threshold() {
        let base = p();
        let th = chemo_dose_threshold(&base).unwrap();
        let at = |q: f64| {
            let mut params = base.clone();
            params.q = q;
            chemo_equilibria(&params).reports[0].verdict
        };
        assert_eq!(at(th.q_star * (1.0 - 1e-3)), StabilityVerdict::Unstable);
        assert_eq!(at(th.q_star * (1.0 + 1e-3)), StabilityVerdict::Stable);
    }

    #[test]
    fn threshold_flip_holds_across_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x715a);
        let mut tested = 0;
        while tested < 10 {
            let params = random_params(&mut rng);
            let Some(th) = chemo_dose_threshold(&params) else {
                continue;
            };
            let mut below = params.clone();
            below.q = th.q_star * (1.0 - 1e-3);
            let mut above = params.clone();
            above.q = th.q_star * (1.0 + 1e-3);
            assert_eq!(
                chemo_equilibria(&below).reports[0].verdict,
                StabilityVerdict::Unstable
            );
            assert_eq!(
                chemo_equilibria(&above).reports[0].verdict,
                StabilityVerdict::Stable
            );
            tested += 1;
        }
    }

    #[test]
    fn weak_drug_has_no_threshold() {
        let mut params = p();
        params.delta_u = params.alpha * 0.5;
        assert_eq!(chemo_dose_threshold(&params), None);
    }

    #[test]
    fn threshold_simplifies_when_kill_is_twice_growth() {
        let mut params = p();
        params.delta_u = 2.0 * params.alpha;
        let th = chemo_dose_threshold(&params).unwrap();
        let want = params.psi * params.k_c;
        assert!((th.q_star - want).abs() < 1e-12 * want);
    }

    #[test]
    fn drug_row_of_the_jacobian_is_linear() {
        let p = p();
        let point = [1.0e4, 100.0, 500.0, 35.0, 25.0, 0.6];
        let jac = jacobian(&ModelVariant::Full, &p, &point, default_fd_step());
        for j in 0..5 {
            assert_eq!(jac[5][j], 0.0, "dC/dt depends only on C");
        }
        assert!((jac[5][5] + p.psi).abs() < 1e-8 * p.psi);
    }

    #[test]
    fn untreated_char_poly_coefficients_match_analytic_forms() {
        let p = p();
        let set = no_treatment_equilibria(&p);
        let x2 = &set.reports[1];
        let u = x2.point[0];
        let p1 = p.alpha * u / p.k + p.delta_t;
        let p0 = p.alpha * p.delta_t * u / p.k
            + p.nu_u * p.beta_t * p.kappa * u / ((p.kappa + u) * (p.kappa + u));
        let coeffs = x2.routh_hurwitz.as_ref().unwrap();
        assert_eq!(coeffs[0].0, "P_1");
        assert!((coeffs[0].1 - p1).abs() < 1e-6 * p1.abs(), "P_1 {} vs {p1}", coeffs[0].1);
        assert!((coeffs[1].1 - p0).abs() < 1e-6 * p0.abs(), "P_0 {} vs {p0}", coeffs[1].1);
    }

    #[test]
    fn virion_column_of_full_jacobian_matches_hand_partials() {
        let p = p();
        let point = [1.0e4, 100.0, 500.0, 35.0, 25.0, 0.6];
        let jac = jacobian(&ModelVariant::Full, &p, &point, default_fd_step());
        let slope = p.beta * point[0] / (p.k_u + point[0]);
        // The row values sit near 2e4 while these derivatives are near 1e-3,
        // so central-difference cancellation noise reaches ~1e-9 absolute.
        assert!((jac[0][2] + slope).abs() < 1e-5 * slope);
        assert!((jac[1][2] - slope).abs() < 1e-5 * slope);
        assert!((jac[2][2] + slope + p.gamma).abs() < 1e-5 * (slope + p.gamma));
        assert_eq!(jac[3][2], 0.0);
        assert_eq!(jac[4][2], 0.0);
        assert_eq!(jac[5][2], 0.0);
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let diag = vec![vec![3.0, 0.0], vec![0.0, -1.0]];
        assert_eq!(eigenvalues(&diag), vec![(3.0, 0.0), (-1.0, 0.0)]);

        // trace 4, determinant 3: eigenvalues 3 and 1.
        let sym = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let eigs = eigenvalues(&sym);
        assert!((eigs[0].0 - 3.0).abs() < 1e-12);
        assert!((eigs[1].0 - 1.0).abs() < 1e-12);

        let rotation = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let eigs = eigenvalues(&rotation);
        assert!(eigs[0].0.abs() < 1e-12 && (eigs[0].1 - 1.0).abs() < 1e-12);
        assert!(eigs[1].0.abs() < 1e-12 && (eigs[1].1 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_transform_preserves_recovered_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51ec);
        let spectrum = [4.0, 2.5, 1.0, -0.5, -2.0, -3.5];
        for _ in 0..20 {
            let s = DMatrix::from_fn(6, 6, |i, j| {
                rng.gen_range(-1.0..1.0) + if i == j { 5.0 } else { 0.0 }
            });
            let d = DMatrix::from_fn(6, 6, |i, j| if i == j { spectrum[i] } else { 0.0 });
            let s_inv = s.clone().try_inverse().expect("diagonally dominant");
            let a = &s * d * s_inv;
            let rows: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| a[(i, j)]).collect()).collect();
            let eigs = eigenvalues(&rows);
            for (got, want) in eigs.iter().zip(spectrum) {
                assert!(
                    (got.0 - want).abs() < 1e-8 && got.1.abs() < 1e-8,
                    "{got:?} vs {want}"
                );
            }
        }
    }

    #[test]
    fn routh_hurwitz_known_cases() {
        assert!(routh_hurwitz_quadratic(1.0, 1.0));
        assert!(!routh_hurwitz_quadratic(-1.0, 1.0));
        assert!(routh_hurwitz_cubic(3.0, 3.0, 1.0));
        assert!(!routh_hurwitz_cubic(1.0, 1.0, 2.0), "a_2*a_1 < a_0 is unstable");
    }

    #[test]
    fn routh_hurwitz_agrees_with_companion_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
        let mut checked = 0;
        while checked < 200 {
            let a2 = rng.gen_range(-2.0..4.0);
            let a1 = rng.gen_range(-2.0..4.0);
            let a0 = rng.gen_range(-2.0..4.0);
            let companion = vec![
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![-a0, -a1, -a2],
            ];
            let max_re = eigenvalues(&companion)
                .iter()
                .fold(f64::NEG_INFINITY, |m, e| m.max(e.0));
            if max_re.abs() < 1e-6 {
                continue;
            }
            assert_eq!(
                routh_hurwitz_cubic(a2, a1, a0),
                max_re < 0.0,
                "coeffs ({a2}, {a1}, {a0}), max re {max_re}"
            );
            checked += 1;
        }
    }

    #[test]
    fn closed_forms_have_tiny_residuals_across_random_draws() {
        // Residuals evaluated directly on the closed-form points; no report
        // assembly, and in particular no interior hunts.
        let mut rng = ChaCha8Rng::seed_from_u64(0xe01);
        for _ in 0..100 {
            let params = random_params(&mut rng);
            let u = endemic_tumour_root(&params, 0.0).unwrap();
            let e_t = immune_level(&params, u);
            let r = residual_inf(&ModelVariant::NoTreatment, &params, &[u, e_t]);
            assert!(r < 1e-8, "untreated residual {r}");
            let rv = residual_inf(
                &ModelVariant::ViroOnly,
                &params,
                &[u, 0.0, 0.0, 0.0, e_t],
            );
            assert!(rv < 1e-8, "virus-free residual {rv}");
            if let Some(uc) = endemic_tumour_root(&params, equilibrium_drug_kill(&params)) {
                let rc = residual_inf(
                    &ModelVariant::ChemoOnly,
                    &params,
                    &[uc, immune_level(&params, uc), equilibrium_drug_level(&params)],
                );
                assert!(rc < 1e-8, "dosed residual {rc}");
            }
        }
    }

    #[test]
    fn routh_hurwitz_verdicts_match_eigenvalue_verdicts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
        for _ in 0..20 {
            let params = random_params(&mut rng);
            let mut reports = no_treatment_equilibria(&params).reports;
            reports.extend(chemo_equilibria(&params).reports);
            for report in &reports {
                let Some(rh_stable) = report.routh_hurwitz_stable() else {
                    continue;
                };
                if report.max_real_part().abs() < 1e-7 {
                    continue;
                }
                assert_eq!(
                    rh_stable,
                    report.verdict == StabilityVerdict::Stable,
                    "report {} disagrees: eigen verdict {:?}, max re {}",
                    report.label,
                    report.verdict,
                    report.max_real_part()
                );
            }
        }
    }

    #[test]
    fn virus_only_tumour_free_eigenvalues_are_the_decay_rates() {
        let p = p();
        let v1 = &viro_equilibria(&p).reports[0];
        assert_eq!(v1.verdict, StabilityVerdict::Unstable);
        let mut expected = [p.alpha, -p.delta, -p.gamma, -p.delta_t, -p.delta_v];
        expected.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in v1.eigenvalues.iter().zip(expected) {
            assert!(
                (got.0 - want).abs() < 1e-12 * want.abs().max(1.0) && got.1 == 0.0,
                "{got:?} vs {want}"
            );
        }
    }

    #[test]
    fn virus_free_state_embeds_the_untreated_endemic_bitwise() {
        let p = p();
        let x2 = &no_treatment_equilibria(&p).reports[1];
        let v2 = &viro_equilibria(&p).reports[1];
        assert_eq!(v2.point[0], x2.point[0]);
        assert_eq!(v2.point[4], x2.point[1]);
        assert_eq!(&v2.point[1..4], &[0.0, 0.0, 0.0]);
        assert_eq!(v2.kind, EquilibriumKind::VirusFree);
    }

    fn aggressive_virus_params() -> ModelParameters {
        let mut params = p();
        params.alpha = 0.8;
        params.beta = 0.15222854712070424;
        params
    }

    #[test]
    fn aggressive_virus_settings_have_a_coexistence_state() {
        let params = aggressive_virus_params();
        let set = viro_equilibria(&params);
        let v3 = set
            .reports
            .iter()
            .find(|r| r.label == "coexistence")
            .unwrap_or_else(|| panic!("coexistence state missing: {:?}", set.notes));
        assert!(v3.point.iter().all(|x| *x > 0.0), "interior point: {:?}", v3.point);
        let scaled = v3.residual / (1.0 + v3.point.iter().fold(0.0_f64, |m, x| m.max(*x)));
        assert!(scaled < 1e-8, "scaled residual {scaled}");
    }

    #[test]
    fn full_endemic_from_two_seeds_agrees() {
        let params = aggressive_virus_params();
        let a = full_endemic_equilibrium(&params).unwrap();
        assert_eq!(a.kind, EquilibriumKind::Endemic, "point {:?}", a.point);
        let seed: Vec<f64> = a.point.iter().map(|x| x * 1.7 + 1.0).collect();
        let b = full_endemic_equilibrium_from(&params, &seed).unwrap();
        for (x, y) in a.point.iter().zip(&b.point) {
            assert!(
                (x - y).abs() <= 1e-8 * x.abs().max(1.0),
                "seeds disagree: {x} vs {y}"
            );
        }
    }

    #[test]
    fn no_virus_source_collapses_to_the_untreated_pattern() {
        let mut params = p();
        params.burst = 0.0;
        params.q = 0.0;
        let report = full_endemic_equilibrium(&params).unwrap();
        let x2 = &no_treatment_equilibria(&params).reports[1];
        assert!((report.point[0] - x2.point[0]).abs() < 1e-6 * x2.point[0]);
        assert!((report.point[4] - x2.point[1]).abs() < 1e-6 * x2.point[1]);
        for idx in [1, 2, 3, 5] {
            assert!(report.point[idx].abs() < 1e-6, "component {idx} = {}", report.point[idx]);
        }
    }

    #[test]
    fn full_baseline_equilibrium_respects_the_burden_bound() {
        let p = p();
        let report = full_endemic_equilibrium(&p).unwrap();
        assert!(report.point[0] + report.point[1] <= p.k);
        let scaled = report.residual / (1.0 + report.point.iter().fold(0.0_f64, |m, x| m.max(*x)));
        assert!(scaled < 1e-10, "scaled residual {scaled}");
    }

    #[test]
    fn newton_converges_and_reports_singularity() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] - 4.0;
            out[1] = x[1] - 1.0;
        };
        let root = newton_root(&f, &[1.0, 0.0], &NewtonOptions::default()).unwrap();
        assert!((root[0] - 2.0).abs() < 1e-9 && (root[1] - 1.0).abs() < 1e-12);

        // Inconsistent linear system: the Jacobian is singular everywhere.
        let g = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] + x[1];
            out[1] = x[0] + x[1] - 1.0;
        };
        match newton_root(&g, &[0.3, 0.4], &NewtonOptions::default()) {
            Err(EquilibriaError::SingularJacobian { .. }) => {}
            other => panic!("expected singular Jacobian, got {other:?}"),
        }
    }

    #[test]
    fn classification_margins() {
        assert_eq!(classify(&[(-1.0, 0.0)], STABILITY_MARGIN), StabilityVerdict::Stable);
        assert_eq!(classify(&[(1e-3, 0.0)], STABILITY_MARGIN), StabilityVerdict::Unstable);
        assert_eq!(
            classify(&[(-1e-12, 0.0)], STABILITY_MARGIN),
            StabilityVerdict::Marginal {
                margin: STABILITY_MARGIN
            }
        );
    }

    #[test]
    fn driven_variant_is_rejected() {
        let sched = crate::model::ControlSchedule::constant(0.0, 0.0);
        let err = equilibria_for(&ModelVariant::ControlReduced(sched), &p()).unwrap_err();
        assert!(matches!(err, EquilibriaError::UnsupportedVariant { .. }));
    }
}
