//! System state and the invariant region of the model.
//!
//! The full system tracks six non-negative quantities. The biologically
//! meaningful set is the box
//!
//! ```text
//! 0 <= U + I <= K,   0 <= V <= b/gamma,   0 <= E_V <= phi/delta_V,
//! 0 <= E_T <= beta_T/delta_T,   0 <= C <= q/psi
//! ```
//!
//! which is forward-invariant and attracting for the flow. States outside the
//! box are legal inputs everywhere in this crate; [`in_domain`] reports which
//! inequalities fail so that callers can surface diagnostics instead of
//! silently clamping.

use crate::model::ModelError;
use crate::params::ModelParameters;

/// Column labels of the full system, in state order.
pub const STATE_LABELS: [&str; 6] = ["U", "I", "V", "E_V", "E_T", "C"];

/// Densities of the six compartments at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    /// Uninfected tumour cells U (cells/mm3).
    pub u: f64,
    /// Virus-infected tumour cells I (cells/mm3).
    pub i: f64,
    /// Free virions V.
    pub v: f64,
    /// Virus-specific immune cells E_V (cells/mm3).
    pub e_v: f64,
    /// Tumour-specific immune cells E_T (cells/mm3).
    pub e_t: f64,
    /// Drug concentration C (mg/l).
    pub c: f64,
}

impl SystemState {
    pub fn new(u: f64, i: f64, v: f64, e_v: f64, e_t: f64, c: f64) -> Self {
        SystemState { u, i, v, e_v, e_t, c }
    }

    pub fn from_array(x: [f64; 6]) -> Self {
        SystemState::new(x[0], x[1], x[2], x[3], x[4], x[5])
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.u, self.i, self.v, self.e_v, self.e_t, self.c]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    /// First non-finite component, if any, as `(label, value)`.
    pub fn non_finite_component(&self) -> Option<(&'static str, f64)> {
        self.as_array()
            .iter()
            .zip(STATE_LABELS)
            .find(|(x, _)| !x.is_finite())
            .map(|(x, l)| (l, *x))
    }
}

/// One failed inequality of the invariant region.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaViolation {
    /// Human-readable inequality, e.g. `"V <= b/gamma"`.
    pub inequality: &'static str,
    /// Offending value on the left-hand side.
    pub value: f64,
    /// Bound it was compared against.
    pub limit: f64,
    /// How far past the bound the value lies (always positive).
    pub excess: f64,
}

/// Outcome of an invariant-region membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainCheck {
    pub inside: bool,
    pub violations: Vec<OmegaViolation>,
}

/// Tests membership of the invariant region under constant infusion at rate
/// `params.q`. `tol` is relative to each bound's scale, so `tol = 1e-6`
/// tolerates overshoots up to `1e-6 * max(1, bound)` per inequality.
///
/// Returns an error only for non-finite states; out-of-region states are a
/// normal, reportable outcome.
pub fn in_domain(
    params: &ModelParameters,
    state: &SystemState,
    tol: f64,
) -> Result<DomainCheck, ModelError> {
    in_domain_with_infusion(params, state, tol, params.q)
}

/// Same as [`in_domain`] but with an explicit drug infusion rate, used by the
/// integrator when the drug input is a control signal rather than `q`.
pub(crate) fn in_domain_with_infusion(
    params: &ModelParameters,
    state: &SystemState,
    tol: f64,
    infusion: f64,
) -> Result<DomainCheck, ModelError> {
    if let Some((label, value)) = state.non_finite_component() {
        return Err(ModelError::NonFiniteState { label, value });
    }

    let mut violations = Vec::new();
    let mut check_upper = |inequality: &'static str, value: f64, limit: f64| {
        let slack = tol * limit.abs().max(1.0);
        if value > limit + slack {
            violations.push(OmegaViolation {
                inequality,
                value,
                limit,
                excess: value - limit,
            });
        }
    };

    check_upper("U + I <= K", state.u + state.i, params.k);
    check_upper("V <= b/gamma", state.v, params.burst / params.gamma);
    check_upper("E_V <= phi/delta_V", state.e_v, params.phi / params.delta_v);
    check_upper("E_T <= beta_T/delta_T", state.e_t, params.beta_t / params.delta_t);
    check_upper("C <= q_max/psi", state.c, infusion / params.psi);

    // Non-negativity, with slack scaled to each compartment's natural bound.
    let lower = [
        ("U >= 0", state.u, params.k),
        ("I >= 0", state.i, params.k),
        ("V >= 0", state.v, params.burst / params.gamma),
        ("E_V >= 0", state.e_v, params.phi / params.delta_v),
        ("E_T >= 0", state.e_t, params.beta_t / params.delta_t),
        ("C >= 0", state.c, infusion / params.psi),
    ];
    for (inequality, value, scale) in lower {
        let slack = tol * scale.abs().max(1.0);
        if value < -slack {
            violations.push(OmegaViolation {
                inequality,
                value,
                limit: 0.0,
                excess: -value,
            });
        }
    }

    Ok(DomainCheck {
        inside: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParameters {
        ModelParameters::default()
    }

    #[test]
    fn array_round_trip() {
        let s = SystemState::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert_eq!(SystemState::from_array(s.as_array()), s);
    }

    #[test]
    fn interior_point_is_inside() {
        // Well inside every bound for the baseline parameter set.
        let s = SystemState::new(1.0e4, 100.0, 500.0, 35.0, 25.0, 0.5);
        let check = in_domain(&p(), &s, 1e-9).unwrap();
        assert!(check.inside, "violations: {:?}", check.violations);
    }

    #[test]
    fn reference_initial_state_breaches_three_bounds() {
        // The standard starting point lies outside the invariant region: the
        // immune pools exceed their asymptotic caps (70 and 50) and the drug
        // concentration exceeds q/psi ~ 1.2. The region attracts but does not
        // contain it.
        let s = SystemState::new(1.0e4, 100.0, 500.0, 100.0, 100.0, 100.0);
        let check = in_domain(&p(), &s, 1e-6).unwrap();
        assert!(!check.inside);
        let failed: Vec<_> = check.violations.iter().map(|v| v.inequality).collect();
        assert_eq!(
            failed,
            vec!["E_V <= phi/delta_V", "E_T <= beta_T/delta_T", "C <= q_max/psi"]
        );
    }

    #[test]
    fn bound_values_match_hand_computation() {
        // b/gamma = 5000, phi/delta_V = 70, beta_T/delta_T = 50,
        // q/psi = 1.1990407673860912 for the baseline set.
        let s = SystemState::new(0.0, 0.0, 5000.0, 70.0, 50.0, 1.1990407673860912);
        let check = in_domain(&p(), &s, 1e-9).unwrap();
        assert!(check.inside, "exact bounds must pass: {:?}", check.violations);
    }

    #[test]
    fn negative_component_is_reported_not_clamped() {
        let s = SystemState::new(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let check = in_domain(&p(), &s, 1e-9).unwrap();
        assert!(!check.inside);
        assert_eq!(check.violations[0].inequality, "U >= 0");
        assert_eq!(check.violations[0].excess, 1.0);
    }

    #[test]
    fn tolerance_is_relative_to_bound_scale() {
        // 1e-6 relative slack on K = 1e6 admits an overshoot of 1.
        let s = SystemState::new(1.0e6 + 0.5, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(in_domain(&p(), &s, 1e-6).unwrap().inside);
        let s = SystemState::new(1.0e6 + 2.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(!in_domain(&p(), &s, 1e-6).unwrap().inside);
    }

    #[test]
    fn non_finite_state_is_an_error() {
        let s = SystemState::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(in_domain(&p(), &s, 1e-9).is_err());
    }
}
