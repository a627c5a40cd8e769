//! Right-hand sides of the full model and its sub-models.
//!
//! The full system couples uninfected tumour cells U, infected tumour cells
//! I, free virions V, two immune populations E_V and E_T, and the drug
//! concentration C:
//!
//! ```text
//! U'   = alpha U (1 - (U+I)/K) - beta U V/(K_u+U) - nu_U U E_T - delta_U U C/(K_c+C)
//! I'   = beta U V/(K_u+U) - delta I - nu_I E_T I - tau E_V I - delta_I I C/(K_c+C)
//! V'   = b delta I - beta U V/(K_u+U) - gamma V
//! E_V' = phi I - delta_V E_V
//! E_T' = beta_T (U+I)/(kappa+U+I) - delta_T E_T
//! C'   = q - psi C
//! ```
//!
//! Sub-models arise by switching off treatment arms: no treatment (U, E_T),
//! chemotherapy only (U, E_T, C), virotherapy only (U, I, V, E_V, E_T), and a
//! reduced four-compartment system (U, I, V, C) whose virion and drug inputs
//! are time-dependent controls instead of constants.
//!
//! Every sub-model right-hand side evaluates the same term expressions as the
//! full system, so restricting the full system to a sub-model's compartments
//! reproduces the sub-model derivative bit for bit. Tests rely on that.

use thiserror::Error;

use crate::params::ModelParameters;
use crate::state::{SystemState, STATE_LABELS};

/// Errors for state evaluation and control inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("state component {label} is not finite ({value})")]
    NonFiniteState { label: &'static str, value: f64 },
    #[error("state component {label} is negative ({value}); densities cannot be negative")]
    NegativeState { label: &'static str, value: f64 },
    #[error("control {name} = {value} outside [0, {limit}]")]
    ControlOutOfBounds {
        name: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("state has {got} components, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

// Term helpers. Each sub-model calls exactly these, in the same order as the
// full system, which is what makes restriction bit-exact.

#[inline]
fn logistic_growth(p: &ModelParameters, u: f64, burden: f64) -> f64 {
    p.alpha * u * (1.0 - burden / p.k)
}

#[inline]
fn infection(p: &ModelParameters, u: f64, v: f64) -> f64 {
    p.beta * u * v / (p.k_u + u)
}

#[inline]
fn immune_kill_u(p: &ModelParameters, u: f64, e_t: f64) -> f64 {
    p.nu_u * u * e_t
}

#[inline]
fn drug_kill_u(p: &ModelParameters, u: f64, c: f64) -> f64 {
    p.delta_u * u * c / (p.k_c + c)
}

#[inline]
fn drug_kill_i(p: &ModelParameters, i: f64, c: f64) -> f64 {
    p.delta_i * i * c / (p.k_c + c)
}

#[inline]
fn recruitment(p: &ModelParameters, burden: f64) -> f64 {
    p.beta_t * burden / (p.kappa + burden)
}

#[inline]
fn du_full(p: &ModelParameters, u: f64, i: f64, v: f64, e_t: f64, c: f64) -> f64 {
    logistic_growth(p, u, u + i) - infection(p, u, v) - immune_kill_u(p, u, e_t) - drug_kill_u(p, u, c)
}

#[inline]
fn di_full(p: &ModelParameters, u: f64, i: f64, v: f64, e_v: f64, e_t: f64, c: f64) -> f64 {
    infection(p, u, v) - p.delta * i - p.nu_i * e_t * i - p.tau * e_v * i - drug_kill_i(p, i, c)
}

#[inline]
fn dv_full(p: &ModelParameters, u: f64, i: f64, v: f64) -> f64 {
    p.burst * p.delta * i - infection(p, u, v) - p.gamma * v
}

#[inline]
fn dev_full(p: &ModelParameters, i: f64, e_v: f64) -> f64 {
    p.phi * i - p.delta_v * e_v
}

#[inline]
fn det_full(p: &ModelParameters, burden: f64, e_t: f64) -> f64 {
    recruitment(p, burden) - p.delta_t * e_t
}

fn ensure_valid(y: &[f64], labels: &[&'static str]) -> Result<(), ModelError> {
    for (x, label) in y.iter().zip(labels) {
        if !x.is_finite() {
            return Err(ModelError::NonFiniteState { label, value: *x });
        }
        if *x < 0.0 {
            return Err(ModelError::NegativeState { label, value: *x });
        }
    }
    Ok(())
}

/// Full six-compartment derivative under constant infusion `q`.
///
/// Negative or non-finite components are rejected, never clamped. The time
/// argument is accepted for signature uniformity; the system is autonomous.
pub fn rhs_full(
    p: &ModelParameters,
    state: &SystemState,
    _t: f64,
) -> Result<SystemState, ModelError> {
    ensure_valid(&state.as_array(), &STATE_LABELS)?;
    let SystemState { u, i, v, e_v, e_t, c } = *state;
    Ok(SystemState {
        u: du_full(p, u, i, v, e_t, c),
        i: di_full(p, u, i, v, e_v, e_t, c),
        v: dv_full(p, u, i, v),
        e_v: dev_full(p, i, e_v),
        e_t: det_full(p, u + i, e_t),
        c: p.q - p.psi * c,
    })
}

/// Tumour/immune system with every treatment arm off: state `[U, E_T]`.
pub fn rhs_no_treatment(p: &ModelParameters, state: [f64; 2]) -> Result<[f64; 2], ModelError> {
    ensure_valid(&state, &["U", "E_T"])?;
    let [u, e_t] = state;
    Ok([
        logistic_growth(p, u, u) - immune_kill_u(p, u, e_t),
        det_full(p, u, e_t),
    ])
}

/// Drug-only system: state `[U, E_T, C]`.
pub fn rhs_chemo_only(p: &ModelParameters, state: [f64; 3]) -> Result<[f64; 3], ModelError> {
    ensure_valid(&state, &["U", "E_T", "C"])?;
    let [u, e_t, c] = state;
    Ok([
        logistic_growth(p, u, u) - immune_kill_u(p, u, e_t) - drug_kill_u(p, u, c),
        det_full(p, u, e_t),
        p.q - p.psi * c,
    ])
}

/// Virus-only system: state `[U, I, V, E_V, E_T]`.
pub fn rhs_viro_only(p: &ModelParameters, state: [f64; 5]) -> Result<[f64; 5], ModelError> {
    ensure_valid(&state, &["U", "I", "V", "E_V", "E_T"])?;
    let [u, i, v, e_v, e_t] = state;
    Ok([
        logistic_growth(p, u, u + i) - infection(p, u, v) - immune_kill_u(p, u, e_t),
        infection(p, u, v) - p.delta * i - p.nu_i * e_t * i - p.tau * e_v * i,
        dv_full(p, u, i, v),
        dev_full(p, i, e_v),
        det_full(p, u + i, e_t),
    ])
}

/// Reduced treatment-design system: state `[U, I, V, C]` with virion input
/// `u1` added to `V'` and drug input `u2` replacing the constant infusion.
/// Controls outside `[0, MTD]` are errors.
pub fn rhs_control(
    p: &ModelParameters,
    state: [f64; 4],
    u1: f64,
    u2: f64,
) -> Result<[f64; 4], ModelError> {
    ensure_valid(&state, &["U", "I", "V", "C"])?;
    if !(0.0..=p.u1_mtd).contains(&u1) || !u1.is_finite() {
        return Err(ModelError::ControlOutOfBounds {
            name: "u1",
            value: u1,
            limit: p.u1_mtd,
        });
    }
    if !(0.0..=p.u2_mtd).contains(&u2) || !u2.is_finite() {
        return Err(ModelError::ControlOutOfBounds {
            name: "u2",
            value: u2,
            limit: p.u2_mtd,
        });
    }
    Ok(rhs_control_unchecked(p, state, u1, u2))
}

/// Control-system derivative without input validation; used by the integrator
/// and the sweep solver after controls have been projected onto their boxes.
#[inline]
pub(crate) fn rhs_control_unchecked(
    p: &ModelParameters,
    state: [f64; 4],
    u1: f64,
    u2: f64,
) -> [f64; 4] {
    let [u, i, v, c] = state;
    [
        logistic_growth(p, u, u + i) - infection(p, u, v) - drug_kill_u(p, u, c),
        infection(p, u, v) - p.delta * i - drug_kill_i(p, i, c),
        dv_full(p, u, i, v) + u1,
        u2 - p.psi * c,
    ]
}

/// Piecewise-linear control signal on a uniform mesh over `[t0, t0 + n*dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pub t0: f64,
    pub dt: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl ControlSchedule {
    /// Constant controls over an arbitrary horizon.
    pub fn constant(u1: f64, u2: f64) -> Self {
        ControlSchedule {
            t0: 0.0,
            dt: f64::INFINITY,
            u1: vec![u1, u1],
            u2: vec![u2, u2],
        }
    }

    pub fn from_nodes(t0: f64, dt: f64, u1: Vec<f64>, u2: Vec<f64>) -> Self {
        assert_eq!(u1.len(), u2.len(), "control node vectors must align");
        assert!(u1.len() >= 2, "need at least two control nodes");
        assert!(dt > 0.0, "node spacing must be positive");
        ControlSchedule { t0, dt, u1, u2 }
    }

    /// Linear interpolation at `t`, clamped to the first/last node outside
    /// the mesh.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.u1.len() - 1;
        let s = (t - self.t0) / self.dt;
        if !s.is_finite() || s <= 0.0 {
            return (self.u1[0], self.u2[0]);
        }
        if s >= n as f64 {
            return (self.u1[n], self.u2[n]);
        }
        let k = s.floor() as usize;
        let w = s - k as f64;
        (
            self.u1[k] + w * (self.u1[k + 1] - self.u1[k]),
            self.u2[k] + w * (self.u2[k + 1] - self.u2[k]),
        )
    }
}

/// Which system to integrate: the full model or one of its restrictions.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelVariant {
    /// All six compartments under constant infusion.
    Full,
    /// `[U, E_T]`.
    NoTreatment,
    /// `[U, E_T, C]`.
    ChemoOnly,
    /// `[U, I, V, E_V, E_T]`.
    ViroOnly,
    /// `[U, I, V, C]` driven by a time-dependent dosing schedule.
    ControlReduced(ControlSchedule),
}

impl ModelVariant {
    /// State dimension of the variant.
    pub fn dim(&self) -> usize {
        match self {
            ModelVariant::Full => 6,
            ModelVariant::NoTreatment => 2,
            ModelVariant::ChemoOnly => 3,
            ModelVariant::ViroOnly => 5,
            ModelVariant::ControlReduced(_) => 4,
        }
    }

    /// Labels of the variant's state components, in order.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            ModelVariant::Full => &["U", "I", "V", "E_V", "E_T", "C"],
            ModelVariant::NoTreatment => &["U", "E_T"],
            ModelVariant::ChemoOnly => &["U", "E_T", "C"],
            ModelVariant::ViroOnly => &["U", "I", "V", "E_V", "E_T"],
            ModelVariant::ControlReduced(_) => &["U", "I", "V", "C"],
        }
    }

    /// Short tag for file names and report headers.
    pub fn tag(&self) -> &'static str {
        match self {
            ModelVariant::Full => "full",
            ModelVariant::NoTreatment => "no-treatment",
            ModelVariant::ChemoOnly => "chemo-only",
            ModelVariant::ViroOnly => "viro-only",
            ModelVariant::ControlReduced(_) => "control",
        }
    }

    /// For each full-system column (U, I, V, E_V, E_T, C), the index of the
    /// corresponding component in this variant's state, if present.
    pub fn column_map(&self) -> [Option<usize>; 6] {
        match self {
            ModelVariant::Full => [Some(0), Some(1), Some(2), Some(3), Some(4), Some(5)],
            ModelVariant::NoTreatment => [Some(0), None, None, None, Some(1), None],
            ModelVariant::ChemoOnly => [Some(0), None, None, None, Some(1), Some(2)],
            ModelVariant::ViroOnly => [Some(0), Some(1), Some(2), Some(3), Some(4), None],
            ModelVariant::ControlReduced(_) => [Some(0), Some(1), Some(2), None, None, Some(3)],
        }
    }

    /// Embeds a variant state into the full six-compartment space, with
    /// absent compartments at zero.
    pub fn embed(&self, y: &[f64]) -> SystemState {
        let mut full = [0.0; 6];
        for (col, idx) in self.column_map().iter().enumerate() {
            if let Some(i) = idx {
                full[col] = y[*i];
            }
        }
        SystemState::from_array(full)
    }

    /// Derivative at `(t, y)` written into `dy`, without sign validation;
    /// integration monitors domain breaches separately.
    pub(crate) fn eval_into(&self, p: &ModelParameters, t: f64, y: &[f64], dy: &mut [f64]) {
        match self {
            ModelVariant::Full => {
                let (u, i, v, e_v, e_t, c) = (y[0], y[1], y[2], y[3], y[4], y[5]);
                dy[0] = du_full(p, u, i, v, e_t, c);
                dy[1] = di_full(p, u, i, v, e_v, e_t, c);
                dy[2] = dv_full(p, u, i, v);
                dy[3] = dev_full(p, i, e_v);
                dy[4] = det_full(p, u + i, e_t);
                dy[5] = p.q - p.psi * c;
            }
            ModelVariant::NoTreatment => {
                let (u, e_t) = (y[0], y[1]);
                dy[0] = logistic_growth(p, u, u) - immune_kill_u(p, u, e_t);
                dy[1] = det_full(p, u, e_t);
            }
            ModelVariant::ChemoOnly => {
                let (u, e_t, c) = (y[0], y[1], y[2]);
                dy[0] = logistic_growth(p, u, u) - immune_kill_u(p, u, e_t) - drug_kill_u(p, u, c);
                dy[1] = det_full(p, u, e_t);
                dy[2] = p.q - p.psi * c;
            }
            ModelVariant::ViroOnly => {
                let (u, i, v, e_v, e_t) = (y[0], y[1], y[2], y[3], y[4]);
                dy[0] = logistic_growth(p, u, u + i) - infection(p, u, v) - immune_kill_u(p, u, e_t);
                dy[1] = infection(p, u, v) - p.delta * i - p.nu_i * e_t * i - p.tau * e_v * i;
                dy[2] = dv_full(p, u, i, v);
                dy[3] = dev_full(p, i, e_v);
                dy[4] = det_full(p, u + i, e_t);
            }
            ModelVariant::ControlReduced(schedule) => {
                let (u1, u2) = schedule.eval(t);
                let d = rhs_control_unchecked(p, [y[0], y[1], y[2], y[3]], u1, u2);
                dy[..4].copy_from_slice(&d);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p() -> ModelParameters {
        ModelParameters::default()
    }

    fn reference_state() -> SystemState {
        SystemState::new(10000.0, 100.0, 500.0, 100.0, 100.0, 100.0)
    }

    fn assert_close(got: f64, want: f64, label: &str) {
        let tol = 1e-12 * want.abs().max(1.0);
        assert!(
            (got - want).abs() <= tol,
            "{label}: got {got:.17e}, oracle {want:.17e}"
        );
    }

    // Oracle values computed term by term in scripts/oracle_values.py.

    #[test]
    fn full_rhs_matches_independent_evaluation() {
        let d = rhs_full(&p(), &reference_state(), 0.0).unwrap();
        assert_close(d.u, -78460.761044955041, "dU/dt");
        assert_close(d.i, -3056.6894605394605, "dI/dt");
        assert_close(d.v, 2552.0454545454545, "dV/dt");
        assert_close(d.e_v, 69.0, "dE_V/dt");
        assert_close(d.e_t, -0.95413260672116262, "dE_T/dt");
        assert_close(d.c, -412.0, "dC/dt");
    }

    #[test]
    fn no_treatment_rhs_matches_independent_evaluation() {
        let d = rhs_no_treatment(&p(), [10000.0, 100.0]).unwrap();
        assert_close(d[0], -77960.600000000006, "dU/dt");
        assert_close(d[1], -0.95454545454545459, "dE_T/dt");
    }

    #[test]
    fn chemo_rhs_matches_independent_evaluation() {
        let d = rhs_chemo_only(&p(), [10000.0, 100.0, 100.0]).unwrap();
        assert_close(d[0], -78460.100499500506, "dU/dt");
        assert_close(d[1], -0.95454545454545459, "dE_T/dt");
        assert_close(d[2], -412.0, "dC/dt");
    }

    #[test]
    fn viro_rhs_matches_independent_evaluation() {
        let d = rhs_viro_only(&p(), [10000.0, 100.0, 500.0, 100.0, 100.0]).unwrap();
        assert_close(d[0], -77961.260545454541, "dU/dt");
        assert_close(d[1], -3050.6954545454546, "dI/dt");
        assert_close(d[2], 2552.0454545454545, "dV/dt");
        assert_close(d[3], 69.0, "dE_V/dt");
        assert_close(d[4], -0.95413260672116262, "dE_T/dt");
    }

    #[test]
    fn control_rhs_matches_independent_evaluation() {
        let d = rhs_control(&p(), [10000.0, 100.0, 500.0, 100.0], 500.0, 50.0).unwrap();
        assert_close(d[0], 1539.238955044955, "dU/dt");
        assert_close(d[1], -56.689460539460541, "dI/dt");
        assert_close(d[2], 3052.0454545454545, "dV/dt");
        assert_close(d[3], -367.0, "dC/dt");
    }

    #[test]
    fn origin_is_an_equilibrium_up_to_infusion() {
        let d = rhs_full(&p(), &SystemState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(d.as_array()[..5], [0.0; 5]);
        assert_eq!(d.c, p().q);
    }

    fn random_state(rng: &mut ChaCha8Rng) -> SystemState {
        SystemState::new(
            rng.gen_range(0.0..1.0e6),
            rng.gen_range(0.0..1.0e5),
            rng.gen_range(0.0..1.0e4),
            rng.gen_range(0.0..200.0),
            rng.gen_range(0.0..200.0),
            rng.gen_range(0.0..200.0),
        )
    }

    #[test]
    fn restrictions_reproduce_sub_models_bit_for_bit() {
        let p = p();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..1000 {
            let s = random_state(&mut rng);

            let full = rhs_full(
                &p,
                &SystemState { i: 0.0, v: 0.0, e_v: 0.0, c: 0.0, ..s },
                0.0,
            )
            .unwrap();
            let nt = rhs_no_treatment(&p, [s.u, s.e_t]).unwrap();
            assert_eq!([full.u, full.e_t], nt, "no-treatment restriction");

            let full = rhs_full(&p, &SystemState { i: 0.0, v: 0.0, e_v: 0.0, ..s }, 0.0).unwrap();
            let chemo = rhs_chemo_only(&p, [s.u, s.e_t, s.c]).unwrap();
            assert_eq!([full.u, full.e_t, full.c], chemo, "chemo restriction");

            let full = rhs_full(&p, &SystemState { c: 0.0, ..s }, 0.0).unwrap();
            let viro = rhs_viro_only(&p, [s.u, s.i, s.v, s.e_v, s.e_t]).unwrap();
            assert_eq!(
                [full.u, full.i, full.v, full.e_v, full.e_t],
                viro,
                "viro restriction"
            );
        }
    }

    #[test]
    fn boundary_states_never_point_outward() {
        // Quasi-positivity: whenever a component is zero its derivative is
        // non-negative, so the flow cannot leave the orthant.
        let p = p();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..1000 {
            let mut x = random_state(&mut rng).as_array();
            let n_zeros = rng.gen_range(1..=6);
            for _ in 0..n_zeros {
                x[rng.gen_range(0..6)] = 0.0;
            }
            let d = rhs_full(&p, &SystemState::from_array(x), 0.0)
                .unwrap()
                .as_array();
            for k in 0..6 {
                if x[k] == 0.0 {
                    assert!(
                        d[k] >= 0.0,
                        "component {} derivative {} points out of the orthant at {:?}",
                        STATE_LABELS[k],
                        d[k],
                        x
                    );
                }
            }
        }
    }

    #[test]
    fn control_terms_enter_additively() {
        let p = p();
        let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
        for _ in 0..500 {
            let s = [
                rng.gen_range(0.0..1.0e6),
                rng.gen_range(0.0..1.0e5),
                rng.gen_range(0.0..1.0e4),
                rng.gen_range(0.0..200.0),
            ];
            let u1 = rng.gen_range(0.0..p.u1_mtd);
            let u2 = rng.gen_range(0.0..p.u2_mtd);
            let with = rhs_control(&p, s, u1, u2).unwrap();
            let without = rhs_control(&p, s, 0.0, 0.0).unwrap();
            let expected = [0.0, 0.0, u1, u2];
            for k in 0..4 {
                let diff = with[k] - without[k];
                let scale = without[k].abs().max(u1.abs()).max(1.0);
                assert!(
                    (diff - expected[k]).abs() <= 1e-10 * scale,
                    "component {k}: difference {diff} should be {}",
                    expected[k]
                );
            }
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let p = p();
        let mut s = reference_state();
        s.v = -1.0;
        assert!(matches!(
            rhs_full(&p, &s, 0.0),
            Err(ModelError::NegativeState { label: "V", .. })
        ));
        s.v = f64::NAN;
        assert!(matches!(
            rhs_full(&p, &s, 0.0),
            Err(ModelError::NonFiniteState { label: "V", .. })
        ));
        assert!(rhs_control(&p, [1.0, 1.0, 1.0, 1.0], -0.1, 0.0).is_err());
        assert!(rhs_control(&p, [1.0, 1.0, 1.0, 1.0], 0.0, p.u2_mtd + 0.1).is_err());
        assert!(rhs_no_treatment(&p, [f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn schedule_interpolates_linearly_and_clamps() {
        let sched = ControlSchedule::from_nodes(0.0, 1.0, vec![0.0, 10.0, 20.0], vec![5.0, 5.0, 5.0]);
        assert_eq!(sched.eval(-1.0), (0.0, 5.0));
        assert_eq!(sched.eval(0.5), (5.0, 5.0));
        assert_eq!(sched.eval(1.25), (12.5, 5.0));
        assert_eq!(sched.eval(7.0), (20.0, 5.0));
        let c = ControlSchedule::constant(3.0, 4.0);
        assert_eq!(c.eval(0.0), (3.0, 4.0));
        assert_eq!(c.eval(1.0e9), (3.0, 4.0));
    }

    #[test]
    fn variant_eval_agrees_with_public_rhs() {
        let p = p();
        let s = reference_state();
        let mut dy = [0.0; 6];

        ModelVariant::Full.eval_into(&p, 0.0, &s.as_array(), &mut dy);
        assert_eq!(dy, rhs_full(&p, &s, 0.0).unwrap().as_array());

        let mut dy2 = [0.0; 2];
        ModelVariant::NoTreatment.eval_into(&p, 0.0, &[s.u, s.e_t], &mut dy2);
        assert_eq!(dy2, rhs_no_treatment(&p, [s.u, s.e_t]).unwrap());

        let sched = ControlSchedule::constant(500.0, 50.0);
        let mut dy4 = [0.0; 4];
        ModelVariant::ControlReduced(sched).eval_into(&p, 0.0, &[s.u, s.i, s.v, s.c], &mut dy4);
        assert_eq!(
            dy4,
            rhs_control(&p, [s.u, s.i, s.v, s.c], 500.0, 50.0).unwrap()
        );
    }

    #[test]
    fn embedding_restores_full_layout() {
        let v = ModelVariant::ChemoOnly;
        let s = v.embed(&[7.0, 8.0, 9.0]);
        assert_eq!(s.as_array(), [7.0, 0.0, 0.0, 0.0, 8.0, 9.0]);
    }
}
