//! Viral reproduction number and parameter sensitivity measures.
//!
//! The reproduction number is evaluated at the infection-free state of the
//! drug-treated model, where the tumour sits at its infusion equilibrium and
//! no infected cells or virions are present. A closed form is returned
//! together with the next-generation matrices and an independently computed
//! spectral radius, so every report carries its own consistency check.
//!
//! Sensitivities come in two flavours: elasticities of the reproduction
//! number (central differences through the full equilibrium recomposition,
//! with exact special cases substituted where they exist) and sensitivity
//! indices of the coexistence equilibrium obtained from the implicit function
//! theorem at the solved steady state.

use nalgebra::{DMatrix, DVector, Matrix2};
use thiserror::Error;

use crate::equilibria::{
    self, chemo_endemic_point, equilibrium_drug_level, full_endemic_equilibrium,
    full_endemic_equilibrium_from, EquilibriaError, EquilibriumKind,
};
use crate::model::ModelVariant;
use crate::params::{ModelParameters, ParamError};
use crate::state::SystemState;

/// Relative step for central differences on nonzero parameters.
pub const SENSITIVITY_REL_STEP: f64 = 1e-6;

/// Absolute step used when a parameter sits exactly at zero.
pub const SENSITIVITY_ABS_STEP: f64 = 1e-9;

/// Relative displacement for the direct re-solve cross-check.
pub const DIRECT_CHECK_REL_STEP: f64 = 1e-4;

/// Jacobian condition numbers above this abort the implicit-function solve.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Error)]
pub enum ReproductionError {
    /// Next-generation matrices are only defined where the infection is absent.
    #[error("point is not infection-free: I = {i:e}, V = {v:e}")]
    NotInfectionFree { i: f64, v: f64 },
    /// The infusion clears the tumour outright, so there is no tumour-positive
    /// reference state to perturb.
    #[error("no tumour-positive infusion equilibrium at q = {q}")]
    NoTumourState { q: f64 },
    /// The steady-state solver landed somewhere other than coexistence.
    #[error("expected a coexistence equilibrium, found a {found} point")]
    NoCoexistence { found: EquilibriumKind },
    /// Sensitivity solve rejected because the Jacobian is numerically singular.
    #[error("equilibrium Jacobian is too ill-conditioned ({condition:.3e})")]
    IllConditioned { condition: f64 },
    /// A finite-difference displacement left the region where the quantity
    /// being differentiated exists.
    #[error("perturbing {parameter} lost the reference state: {detail}")]
    PerturbationLost { parameter: String, detail: String },
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// How a sensitivity entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityMethod {
    CentralDifference,
    AnalyticSpecialCase,
}

impl std::fmt::Display for SensitivityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SensitivityMethod::CentralDifference => "central-difference",
            SensitivityMethod::AnalyticSpecialCase => "analytic-special-case",
        })
    }
}

/// Reproduction number at the infection-free infusion state.
#[derive(Debug, Clone)]
pub struct R0Report {
    pub value: f64,
    /// Tumour load of the reference state.
    pub u_star: f64,
    /// Immune level of the reference state.
    pub e_t_star: f64,
    /// Drug concentration of the reference state.
    pub c_star: f64,
    /// New-infection matrix at the reference state.
    pub f_matrix: [[f64; 2]; 2],
    /// Transition matrix at the reference state.
    pub v_matrix: [[f64; 2]; 2],
    /// |rho(F V^-1) - value|, with the spectral radius computed numerically
    /// rather than from the closed form.
    pub spectral_radius_check: f64,
    /// True when the infusion clears the tumour and the report falls back to
    /// the tumour-free state, where the value is zero.
    pub at_tumour_free: bool,
}

/// One row of an elasticity table.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub parameter: String,
    /// Raw derivative of the reproduction number.
    pub sensitivity: f64,
    /// Dimensionless elasticity, sensitivity scaled by p / R0.
    pub elasticity: f64,
    pub method: SensitivityMethod,
}

/// Elasticities for a batch of parameters; failures are collected rather than
/// aborting the batch.
#[derive(Debug, Clone, Default)]
pub struct ElasticityTable {
    pub rows: Vec<SensitivityReport>,
    /// (parameter, reason) pairs for entries that could not be computed.
    pub failures: Vec<(String, String)>,
}

/// Normalised sensitivity of the coexistence equilibrium to one parameter.
#[derive(Debug, Clone)]
pub struct EndemicSensitivityReport {
    pub parameter: String,
    /// One index per state component, in state-vector order.
    pub per_component: [f64; 6],
    /// Indices for the two tumour compartments blended by their equilibrium
    /// shares; this equals the elasticity of the total tumour burden.
    pub combined_tumour: f64,
    /// Equilibrium the indices refer to.
    pub equilibrium: Vec<f64>,
    /// One-norm condition estimate of the equilibrium Jacobian.
    pub condition_estimate: f64,
}

/// Reproduction number as a function of infusion rate.
#[derive(Debug, Clone)]
pub struct DoseCurve {
    /// (q, R0) pairs in grid order.
    pub rows: Vec<(f64, f64)>,
    /// Whether the values fall strictly as the dose grows.
    pub strictly_decreasing: bool,
}

/// Per-capita loss rate of infected cells at a given environment.
fn infected_loss_rate(p: &ModelParameters, e_t: f64, c: f64, e_v: f64) -> f64 {
    p.delta + p.nu_i * e_t + p.delta_i * c / (p.k_c + c) + p.tau * e_v
}

/// Closed-form value with the reference coordinates it was evaluated at.
fn r0_components(p: &ModelParameters) -> (f64, f64, f64, f64, bool) {
    let c_star = equilibrium_drug_level(p);
    match chemo_endemic_point(p) {
        Some((u, e_t, c)) => {
            let loss = infected_loss_rate(p, e_t, c, 0.0);
            let value = p.burst * p.beta * p.delta * u / ((p.k_u + u) * p.gamma * loss);
            (value, u, e_t, c, false)
        }
        // The drug alone clears the tumour; with no cells to infect the
        // virus cannot reproduce at all.
        None => (0.0, 0.0, 0.0, c_star, true),
    }
}

/// Next-generation matrices (F, V) at an infection-free point.
///
/// F holds the rates at which new infections appear, V the transfer rates
/// between the two infected compartments (infected cells, free virions).
/// The point may carry any tumour load, immune level and drug concentration,
/// but must have no infection in progress.
pub fn next_generation_matrices(
    p: &ModelParameters,
    point: &SystemState,
) -> Result<([[f64; 2]; 2], [[f64; 2]; 2]), ReproductionError> {
    if point.i != 0.0 || point.v != 0.0 {
        return Err(ReproductionError::NotInfectionFree {
            i: point.i,
            v: point.v,
        });
    }
    let f12 = p.beta * point.u / (p.k_u + point.u);
    let loss = infected_loss_rate(p, point.e_t, point.c, point.e_v);
    let f = [[0.0, f12], [0.0, 0.0]];
    let v = [[loss, 0.0], [-p.burst * p.delta, p.gamma]];
    Ok((f, v))
}

/// Spectral radius of F V^-1, computed through an explicit inverse and the
/// QR eigenvalue routine so it shares no algebra with the closed form.
fn next_generation_spectral_radius(f: &[[f64; 2]; 2], v: &[[f64; 2]; 2]) -> Option<f64> {
    let vm = Matrix2::new(v[0][0], v[0][1], v[1][0], v[1][1]);
    let fm = Matrix2::new(f[0][0], f[0][1], f[1][0], f[1][1]);
    let ngm = fm * vm.try_inverse()?;
    let rows = vec![
        vec![ngm[(0, 0)], ngm[(0, 1)]],
        vec![ngm[(1, 0)], ngm[(1, 1)]],
    ];
    Some(
        equilibria::eigenvalues(&rows)
            .iter()
            .map(|(re, im)| re.hypot(*im))
            .fold(0.0, f64::max),
    )
}

/// Reproduction number of the virus under constant infusion.
///
/// Evaluated at the tumour-positive infusion equilibrium when it exists.
/// A dose strong enough to clear the tumour leaves no infectable population;
/// the report then refers to the tumour-free state, flags it, and the value
/// is zero.
pub fn r0(p: &ModelParameters) -> R0Report {
    let (value, u_star, e_t_star, c_star, at_tumour_free) = r0_components(p);
    let point = SystemState {
        u: u_star,
        i: 0.0,
        v: 0.0,
        e_v: 0.0,
        e_t: e_t_star,
        c: c_star,
    };
    let (f_matrix, v_matrix) =
        next_generation_matrices(p, &point).expect("reference state is infection-free");
    let spectral_radius_check = match next_generation_spectral_radius(&f_matrix, &v_matrix) {
        Some(rho) => (rho - value).abs(),
        None => f64::INFINITY,
    };
    R0Report {
        value,
        u_star,
        e_t_star,
        c_star,
        f_matrix,
        v_matrix,
        spectral_radius_check,
        at_tumour_free,
    }
}

fn fd_step(value: f64) -> f64 {
    if value == 0.0 {
        SENSITIVITY_ABS_STEP
    } else {
        SENSITIVITY_REL_STEP * value.abs()
    }
}

/// Closed-form value at a displaced parameter, or the reason it is undefined.
fn r0_at(p: &ModelParameters, name: &str, value: f64) -> Result<f64, String> {
    let mut shifted = p.clone();
    shifted.set(name, value).map_err(|e| e.to_string())?;
    let (r, _, _, _, fallback) = r0_components(&shifted);
    if fallback {
        Err(format!("no tumour-positive state at {name} = {value}"))
    } else {
        Ok(r)
    }
}

/// Elasticities of the reproduction number for the named parameters.
///
/// Each displaced evaluation rebuilds the infusion equilibrium from scratch,
/// so indirect dependence through the reference state is included. Burst
/// size, infectivity and viral clearance have exact elasticities (1, 1, -1);
/// those rows are checked against the finite difference and reported as
/// analytic. A parameter whose perturbation loses the reference state lands
/// in `failures` instead of poisoning the rest of the table.
pub fn r0_elasticities(
    p: &ModelParameters,
    names: &[&str],
) -> Result<ElasticityTable, ReproductionError> {
    let (base, _, _, _, fallback) = r0_components(p);
    if fallback {
        return Err(ReproductionError::NoTumourState { q: p.q });
    }
    let mut table = ElasticityTable::default();
    for &name in names {
        let value = match p.get(name) {
            Ok(v) => v,
            Err(e) => {
                table.failures.push((name.to_string(), e.to_string()));
                continue;
            }
        };
        let h = fd_step(value);
        let sides = (r0_at(p, name, value + h), r0_at(p, name, value - h));
        let (plus, minus) = match sides {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                table.failures.push((name.to_string(), e));
                continue;
            }
        };
        let sensitivity = (plus - minus) / (2.0 * h);
        let elasticity = sensitivity * value / base;
        match exact_elasticity(name) {
            Some(exact) => {
                if (elasticity - exact).abs() > 1e-6 {
                    table.failures.push((
                        name.to_string(),
                        format!(
                            "finite difference {elasticity:.9} disagrees with exact value {exact}"
                        ),
                    ));
                    continue;
                }
                table.rows.push(SensitivityReport {
                    parameter: name.to_string(),
                    sensitivity: exact * base / value,
                    elasticity: exact,
                    method: SensitivityMethod::AnalyticSpecialCase,
                });
            }
            None => table.rows.push(SensitivityReport {
                parameter: name.to_string(),
                sensitivity,
                elasticity,
                method: SensitivityMethod::CentralDifference,
            }),
        }
    }
    Ok(table)
}

/// The reference state does not depend on these three, and the value is a
/// plain power of each, so their elasticities are known without differencing.
fn exact_elasticity(name: &str) -> Option<f64> {
    match name {
        "b" | "beta" => Some(1.0),
        "gamma" => Some(-1.0),
        _ => None,
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum())
        .fold(0.0, f64::max)
}

/// Normalised sensitivity of the coexistence equilibrium to `name`.
///
/// Differentiating the steady-state condition gives dx*/dp as the solution
/// of J dx = -df/dp at the equilibrium. Indices are the solution scaled to
/// relative changes, p / x_i* per component; the blended tumour index weights
/// the two tumour compartments by their equilibrium shares, which makes it
/// the elasticity of the total burden U* + I*.
pub fn endemic_sensitivity(
    p: &ModelParameters,
    name: &str,
) -> Result<EndemicSensitivityReport, ReproductionError> {
    let value = p.get(name)?;
    let report = full_endemic_equilibrium(p)?;
    if report.kind != EquilibriumKind::Endemic {
        return Err(ReproductionError::NoCoexistence { found: report.kind });
    }
    let dim = report.point.len();
    let j = DMatrix::from_fn(dim, dim, |r, c| report.jacobian[r][c]);
    let lu = j.clone().lu();
    let inverse = lu
        .try_inverse()
        .ok_or(ReproductionError::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let condition = one_norm(&j) * one_norm(&inverse);
    if condition > CONDITION_LIMIT {
        return Err(ReproductionError::IllConditioned { condition });
    }

    let h = fd_step(value);
    let mut plus = p.clone();
    plus.set(name, value + h)?;
    let mut minus = p.clone();
    minus.set(name, value - h)?;
    let mut df_plus = vec![0.0; dim];
    let mut df_minus = vec![0.0; dim];
    ModelVariant::Full.eval_into(&plus, 0.0, &report.point, &mut df_plus);
    ModelVariant::Full.eval_into(&minus, 0.0, &report.point, &mut df_minus);
    let dfdp = DVector::from_fn(dim, |r, _| (df_plus[r] - df_minus[r]) / (2.0 * h));

    let shift = j
        .lu()
        .solve(&dfdp)
        .ok_or(ReproductionError::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let mut per_component = [0.0; 6];
    for k in 0..dim {
        // A parameter absent from the dynamics gives an exactly zero solve;
        // keep the index at zero rather than forming 0 / 0.
        if shift[k] != 0.0 {
            per_component[k] = -value * shift[k] / report.point[k];
        }
    }
    let burden = report.point[0] + report.point[1];
    let combined_tumour = (report.point[0] * per_component[0]
        + report.point[1] * per_component[1])
        / burden;
    Ok(EndemicSensitivityReport {
        parameter: name.to_string(),
        per_component,
        combined_tumour,
        equilibrium: report.point.clone(),
        condition_estimate: condition,
    })
}

/// Blended tumour index by direct re-solve at displaced parameter values.
///
/// Slower than [`endemic_sensitivity`] and used to cross-check it: the
/// equilibrium is re-solved at p (1 +/- 1e-4) and the burden elasticity is
/// taken as a central difference of the solved locations.
pub fn endemic_sensitivity_direct(
    p: &ModelParameters,
    name: &str,
) -> Result<f64, ReproductionError> {
    let value = p.get(name)?;
    let base = full_endemic_equilibrium(p)?;
    if base.kind != EquilibriumKind::Endemic {
        return Err(ReproductionError::NoCoexistence { found: base.kind });
    }
    let h = if value == 0.0 {
        SENSITIVITY_ABS_STEP
    } else {
        DIRECT_CHECK_REL_STEP * value.abs()
    };
    let mut burden = [0.0; 2];
    for (slot, sign) in burden.iter_mut().zip([1.0, -1.0]) {
        let mut shifted = p.clone();
        shifted.set(name, value + sign * h)?;
        let moved = full_endemic_equilibrium_from(&shifted, &base.point)?;
        if moved.kind != EquilibriumKind::Endemic {
            return Err(ReproductionError::PerturbationLost {
                parameter: name.to_string(),
                detail: format!("re-solve landed on a {} point", moved.kind),
            });
        }
        *slot = moved.point[0] + moved.point[1];
    }
    let slope = (burden[0] - burden[1]) / (2.0 * h);
    Ok(slope * value / (base.point[0] + base.point[1]))
}

/// Reproduction number across an infusion-rate grid.
///
/// Every grid point must keep the tumour-positive reference state; a dose
/// beyond the clearance threshold is an error rather than a silent zero.
pub fn r0_vs_dose_curve(
    p: &ModelParameters,
    q_grid: &[f64],
) -> Result<DoseCurve, ReproductionError> {
    let mut rows = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let mut shifted = p.clone();
        shifted.q = q;
        let (value, _, _, _, fallback) = r0_components(&shifted);
        if fallback {
            return Err(ReproductionError::NoTumourState { q });
        }
        rows.push((q, value));
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(DoseCurve {
        rows,
        strictly_decreasing,
    })
}
