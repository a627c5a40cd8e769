//! Fixed-step integration of the model variants.
//!
//! The integrator is classical fourth-order Runge-Kutta on a uniform mesh,
//! with the final step shortened so the trajectory lands exactly on the
//! requested end time. Membership of the invariant region is monitored at
//! every accepted step and breaches are recorded as diagnostics; the state is
//! never clamped or projected. Only a non-finite state aborts integration.
//!
//! Steady-state runs integrate without recording and stop early once the
//! scaled derivative norm
//!
//! ```text
//! ||f(y)||_inf / (1 + ||y||_inf) < stall_tol
//! ```
//!
//! stays below threshold, which makes "no longer moving" independent of the
//! state's absolute scale.

use thiserror::Error;

use crate::model::{ModelError, ModelVariant};
use crate::output::g17;
use crate::params::ModelParameters;
use crate::state::{in_domain_with_infusion, OmegaViolation, STATE_LABELS};

/// Integration failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("state became non-finite; last valid time t = {last_valid_time}")]
    Diverged { last_valid_time: f64 },
    #[error("initial state invalid: {0}")]
    BadInitialState(#[from] ModelError),
    #[error("initial state has {got} components but variant needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step size must be positive and finite, got {dt}")]
    BadStepSize { dt: f64 },
    #[error("time span must satisfy t1 > t0, got [{t0}, {t1}]")]
    BadTimeSpan { t0: f64, t1: f64 },
}

/// An invariant-region breach observed along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainEvent {
    pub time: f64,
    pub violation: OmegaViolation,
}

/// A recorded solution: one state row per mesh time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub variant: ModelVariant,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Nominal step size (the final step may be shorter).
    pub dt: f64,
    /// All invariant-region breaches, in time order.
    pub violations: Vec<DomainEvent>,
}

impl Trajectory {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    /// Serializes to CSV with the fixed header `t,U,I,V,E_V,E_T,C`.
    /// Compartments absent from the variant stay empty, so every trajectory
    /// file has the same shape regardless of sub-model.
    pub fn to_csv(&self) -> String {
        let map = self.variant.column_map();
        let mut out = String::from("t,U,I,V,E_V,E_T,C\n");
        for (t, row) in self.times.iter().zip(&self.states) {
            out.push_str(&g17(*t));
            for idx in map {
                out.push(',');
                if let Some(k) = idx {
                    out.push_str(&g17(row[k]));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Relative slack used when monitoring invariant-region membership.
pub const DOMAIN_TOL: f64 = 1e-6;

fn drug_input_cap(variant: &ModelVariant, params: &ModelParameters) -> f64 {
    match variant {
        // The drug enters through the control channel here, so its ceiling
        // is the maximum tolerated infusion rather than the constant q.
        ModelVariant::ControlReduced(_) => params.u2_mtd,
        _ => params.q,
    }
}

fn check_domain(
    variant: &ModelVariant,
    params: &ModelParameters,
    t: f64,
    y: &[f64],
    infusion: f64,
    events: &mut Vec<DomainEvent>,
) {
    let embedded = variant.embed(y);
    if let Ok(check) = in_domain_with_infusion(params, &embedded, DOMAIN_TOL, infusion) {
        for violation in check.violations {
            // Skip inequalities about compartments the variant does not carry.
            let active = variant
                .labels()
                .iter()
                .any(|l| violation.inequality.starts_with(l));
            let joint = violation.inequality.starts_with("U + I");
            if active || joint {
                events.push(DomainEvent { time: t, violation });
            }
        }
    }
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Scratch {
    fn new(dim: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }
}

fn rk4_step(
    variant: &ModelVariant,
    p: &ModelParameters,
    t: f64,
    y: &mut [f64],
    dt: f64,
    s: &mut Rk4Scratch,
) {
    let n = y.len();
    variant.eval_into(p, t, y, &mut s.k1);
    for j in 0..n {
        s.stage[j] = y[j] + 0.5 * dt * s.k1[j];
    }
    variant.eval_into(p, t + 0.5 * dt, &s.stage, &mut s.k2);
    for j in 0..n {
        s.stage[j] = y[j] + 0.5 * dt * s.k2[j];
    }
    variant.eval_into(p, t + 0.5 * dt, &s.stage, &mut s.k3);
    for j in 0..n {
        s.stage[j] = y[j] + dt * s.k3[j];
    }
    variant.eval_into(p, t + dt, &s.stage, &mut s.k4);
    for j in 0..n {
        y[j] += dt / 6.0 * (s.k1[j] + 2.0 * s.k2[j] + 2.0 * s.k3[j] + s.k4[j]);
    }
}

fn validate_setup(
    variant: &ModelVariant,
    params: &ModelParameters,
    initial: &[f64],
    dt: f64,
) -> Result<(), DynamicsError> {
    if initial.len() != variant.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: variant.dim(),
            got: initial.len(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DynamicsError::BadStepSize { dt });
    }
    for (x, label) in initial.iter().zip(variant.labels().iter().copied()) {
        if !x.is_finite() {
            return Err(DynamicsError::BadInitialState(ModelError::NonFiniteState {
                label,
                value: *x,
            }));
        }
        if *x < 0.0 {
            return Err(DynamicsError::BadInitialState(ModelError::NegativeState {
                label,
                value: *x,
            }));
        }
    }
    let _ = params;
    Ok(())
}

/// Splits `[t0, t1]` into full steps of `dt` plus an optional shorter tail.
fn step_plan(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let span = t1 - t0;
    let n_exact = span / dt;
    let rounded = n_exact.round();
    if rounded >= 1.0 && (n_exact - rounded).abs() <= 1e-9 * n_exact.max(1.0) {
        (rounded as usize, 0.0)
    } else {
        let n_full = n_exact.floor() as usize;
        let tail = span - n_full as f64 * dt;
        if tail <= 1e-12 * dt {
            (n_full, 0.0)
        } else {
            (n_full, tail)
        }
    }
}

/// Integrates `variant` over `t_span` with step `dt`, recording every mesh
/// point. Starting outside the invariant region is allowed; the breach shows
/// up in [`Trajectory::violations`] instead of aborting the run.
pub fn integrate_rk4(
    variant: &ModelVariant,
    params: &ModelParameters,
    initial: &[f64],
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    let (t0, t1) = t_span;
    validate_setup(variant, params, initial, dt)?;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(DynamicsError::BadTimeSpan { t0, t1 });
    }

    let infusion_cap = drug_input_cap(variant, params);
    let (n_full, tail) = step_plan(t0, t1, dt);
    let n_rows = n_full + 1 + usize::from(tail > 0.0);

    let mut y = initial.to_vec();
    let mut scratch = Rk4Scratch::new(y.len());
    let mut times = Vec::with_capacity(n_rows);
    let mut states = Vec::with_capacity(n_rows);
    let mut violations = Vec::new();

    let mut t = t0;
    times.push(t);
    states.push(y.clone());
    check_domain(variant, params, t, &y, infusion_cap, &mut violations);

    for step in 0..n_full {
        rk4_step(variant, params, t, &mut y, dt, &mut scratch);
        let t_next = t0 + (step + 1) as f64 * dt;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::Diverged { last_valid_time: t });
        }
        t = t_next;
        times.push(t);
        states.push(y.clone());
        check_domain(variant, params, t, &y, infusion_cap, &mut violations);
    }
    if tail > 0.0 {
        rk4_step(variant, params, t, &mut y, tail, &mut scratch);
        if y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::Diverged { last_valid_time: t });
        }
        t = t1;
        times.push(t);
        states.push(y.clone());
        check_domain(variant, params, t, &y, infusion_cap, &mut violations);
    }

    Ok(Trajectory {
        variant: variant.clone(),
        times,
        states,
        dt,
        violations,
    })
}

/// Options for [`integrate_to_steady_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateOptions {
    pub dt: f64,
    /// Threshold on `||f||_inf / (1 + ||y||_inf)`.
    pub stall_tol: f64,
    /// Give up after this much simulated time.
    pub t_max: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            dt: 0.01,
            stall_tol: 1e-10,
            t_max: 2000.0,
        }
    }
}

/// Result of a steady-state run. `converged` reports whether the stall
/// criterion was met before `t_max`; the final state is returned either way.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateOutcome {
    pub state: Vec<f64>,
    pub time: f64,
    pub converged: bool,
    /// Scaled derivative norm at the final state.
    pub residual: f64,
}

/// Integrates until the derivative stalls or `t_max` is reached, without
/// recording the path.
pub fn integrate_to_steady_state(
    variant: &ModelVariant,
    params: &ModelParameters,
    initial: &[f64],
    options: &SteadyStateOptions,
) -> Result<SteadyStateOutcome, DynamicsError> {
    validate_setup(variant, params, initial, options.dt)?;
    if !(options.t_max > 0.0) {
        return Err(DynamicsError::BadTimeSpan {
            t0: 0.0,
            t1: options.t_max,
        });
    }

    let mut y = initial.to_vec();
    let mut scratch = Rk4Scratch::new(y.len());
    let mut deriv = vec![0.0; y.len()];

    let scaled_residual = |variant: &ModelVariant, y: &[f64], deriv: &mut [f64], t: f64| {
        variant.eval_into(params, t, y, deriv);
        let dnorm = deriv.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let ynorm = y.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        dnorm / (1.0 + ynorm)
    };

    let mut t = 0.0;
    let mut residual = scaled_residual(variant, &y, &mut deriv, t);
    if residual < options.stall_tol {
        return Ok(SteadyStateOutcome {
            state: y,
            time: t,
            converged: true,
            residual,
        });
    }

    let (n_full, tail) = step_plan(0.0, options.t_max, options.dt);
    for step in 0..n_full {
        rk4_step(variant, params, t, &mut y, options.dt, &mut scratch);
        if y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::Diverged { last_valid_time: t });
        }
        t = (step + 1) as f64 * options.dt;
        residual = scaled_residual(variant, &y, &mut deriv, t);
        if residual < options.stall_tol {
            return Ok(SteadyStateOutcome {
                state: y,
                time: t,
                converged: true,
                residual,
            });
        }
    }
    if tail > 0.0 {
        rk4_step(variant, params, t, &mut y, tail, &mut scratch);
        if y.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::Diverged { last_valid_time: t });
        }
        t = options.t_max;
        residual = scaled_residual(variant, &y, &mut deriv, t);
    }

    Ok(SteadyStateOutcome {
        state: y,
        time: options.t_max,
        converged: residual < options.stall_tol,
        residual,
    })
}

/// Labels of the full-system CSV columns; re-exported here because the
/// trajectory schema is fixed to them.
pub const TRAJECTORY_COLUMNS: [&str; 6] = STATE_LABELS;
