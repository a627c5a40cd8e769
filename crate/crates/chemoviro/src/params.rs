//! Model parameters: rates, saturation constants and dosing settings.
//!
//! All rates are per day. Cell densities are in cells/mm3, virion counts in
//! virions, drug concentrations in mg/l. The defaults are the baseline set
//! used throughout the crate; entries that the underlying data only pins to a
//! range (infection rate, burst size) carry a documented default choice, and
//! the dosing weights are calibrated (see `configs/default.ini`).

use thiserror::Error;

/// Parameter validation and lookup failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("unknown parameter name `{name}`")]
    UnknownName { name: String },
}

/// Rates and constants of the tumour / virus / immune / drug system.
///
/// Field names follow the conventional symbols for this model family; the
/// doc comment on each field states its role and units.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    /// Tumour carrying capacity K (cells/mm3).
    pub k: f64,
    /// Intrinsic tumour growth rate alpha (1/day).
    pub alpha: f64,
    /// Infection-rate constant beta of the virus (1/day at saturation).
    pub beta: f64,
    /// Death rate delta of infected tumour cells (1/day).
    pub delta: f64,
    /// Free-virus clearance rate gamma (1/day).
    pub gamma: f64,
    /// Burst size b: virions released per lysed infected cell.
    pub burst: f64,
    /// Drug washout rate psi (1/day).
    pub psi: f64,
    /// Maximal drug kill rate delta_U on uninfected cells (1/day).
    pub delta_u: f64,
    /// Maximal drug kill rate delta_I on infected cells (1/day).
    pub delta_i: f64,
    /// Production rate phi of virus-specific immune cells (1/day).
    pub phi: f64,
    /// Maximal recruitment rate beta_T of tumour-specific immune cells (1/day).
    pub beta_t: f64,
    /// Decay rate delta_V of virus-specific immune cells (1/day).
    pub delta_v: f64,
    /// Decay rate delta_T of tumour-specific immune cells (1/day).
    pub delta_t: f64,
    /// Half-saturation constant K_u of the infection term (cells/mm3).
    pub k_u: f64,
    /// Half-saturation constant K_c of the drug kill terms (mg/l).
    pub k_c: f64,
    /// Half-saturation constant kappa of immune recruitment (cells/mm3).
    pub kappa: f64,
    /// Immune lysis rate nu_U of uninfected tumour cells (1/day per cell).
    pub nu_u: f64,
    /// Immune lysis rate nu_I of infected tumour cells (1/day per cell).
    pub nu_i: f64,
    /// Killing rate tau of infected cells by virus-specific immunes (1/day per cell).
    pub tau: f64,
    /// Constant drug infusion rate q (mg/l per day).
    pub q: f64,
    /// Quadratic cost weight A_1 on the virion injection control.
    pub a1: f64,
    /// Quadratic cost weight A_2 on the drug infusion control.
    pub a2: f64,
    /// Maximum tolerated virion injection rate u1_MTD (virions/day).
    pub u1_mtd: f64,
    /// Maximum tolerated drug infusion rate u2_MTD (mg/l per day).
    pub u2_mtd: f64,
    /// Treatment horizon T_f for the dosing problem (days).
    pub t_f: f64,
}

/// Keys accepted by [`ModelParameters::get`]/[`set`](ModelParameters::set)
/// and by configuration files, in canonical order.
pub const PARAMETER_NAMES: [&str; 25] = [
    "K", "alpha", "beta", "delta", "gamma", "b", "psi", "delta_U", "delta_I", "phi", "beta_T",
    "delta_V", "delta_T", "K_u", "K_c", "kappa", "nu_U", "nu_I", "tau", "q", "A_1", "A_2",
    "u1_MTD", "u2_MTD", "T_f",
];

impl Default for ModelParameters {
    /// Baseline parameter set.
    ///
    /// `beta = 0.01` and `burst = 50` sit inside the supported ranges
    /// (0.001..=0.1 and 0..=1000); both are explicit choices, as is `q = 5`.
    /// `a1 = 2*U0/MTD1^2` and `a2 = 2*U0/MTD2^2` (with U0 = 1e4 cells) make
    /// each quadratic dose penalty at full dosing comparable to the tumour
    /// burden term, so neither cost silently dominates the objective.
    fn default() -> Self {
        ModelParameters {
            k: 1.0e6,
            alpha: 0.206,
            beta: 0.01,
            delta: 0.5115,
            gamma: 0.01,
            burst: 50.0,
            psi: 4.17,
            delta_u: 50.0,
            delta_i: 60.0,
            phi: 0.7,
            beta_t: 0.5,
            delta_v: 0.01,
            delta_t: 0.01,
            k_u: 1.0e5,
            k_c: 1.0e5,
            kappa: 1.0e5,
            nu_u: 0.08,
            nu_i: 0.1,
            tau: 0.2,
            q: 5.0,
            a1: 0.02,
            a2: 2.0,
            u1_mtd: 1000.0,
            u2_mtd: 100.0,
            t_f: 30.0,
        }
    }
}

impl ModelParameters {
    /// Checks the sign and finiteness constraints on every field.
    ///
    /// `beta`, `b`, `q`, `A_1`, `A_2` and the two MTDs may be zero; every
    /// other rate and constant must be strictly positive. The saturation
    /// constants must be strictly positive so that no denominator can vanish
    /// on the non-negative orthant.
    pub fn validate(&self) -> Result<(), ParamError> {
        for name in PARAMETER_NAMES {
            let value = self.get(name).expect("canonical name");
            if !value.is_finite() {
                return Err(ParamError::NotFinite {
                    name: canonical(name),
                    value,
                });
            }
            let may_be_zero = matches!(name, "beta" | "b" | "q" | "A_1" | "A_2" | "u1_MTD" | "u2_MTD");
            if may_be_zero {
                if value < 0.0 {
                    return Err(ParamError::Negative {
                        name: canonical(name),
                        value,
                    });
                }
            } else if value <= 0.0 {
                return Err(ParamError::NotPositive {
                    name: canonical(name),
                    value,
                });
            }
        }
        Ok(())
    }

    /// Reads a parameter by its canonical key (see [`PARAMETER_NAMES`]).
    pub fn get(&self, name: &str) -> Result<f64, ParamError> {
        Ok(match name {
            "K" => self.k,
            "alpha" => self.alpha,
            "beta" => self.beta,
            "delta" => self.delta,
            "gamma" => self.gamma,
            "b" => self.burst,
            "psi" => self.psi,
            "delta_U" => self.delta_u,
            "delta_I" => self.delta_i,
            "phi" => self.phi,
            "beta_T" => self.beta_t,
            "delta_V" => self.delta_v,
            "delta_T" => self.delta_t,
            "K_u" => self.k_u,
            "K_c" => self.k_c,
            "kappa" => self.kappa,
            "nu_U" => self.nu_u,
            "nu_I" => self.nu_i,
            "tau" => self.tau,
            "q" => self.q,
            "A_1" => self.a1,
            "A_2" => self.a2,
            "u1_MTD" => self.u1_mtd,
            "u2_MTD" => self.u2_mtd,
            "T_f" => self.t_f,
            _ => {
                return Err(ParamError::UnknownName {
                    name: name.to_string(),
                })
            }
        })
    }

    /// Writes a parameter by its canonical key. Sign constraints are not
    /// enforced here; call [`validate`](Self::validate) afterwards.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let slot = match name {
            "K" => &mut self.k,
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "delta" => &mut self.delta,
            "gamma" => &mut self.gamma,
            "b" => &mut self.burst,
            "psi" => &mut self.psi,
            "delta_U" => &mut self.delta_u,
            "delta_I" => &mut self.delta_i,
            "phi" => &mut self.phi,
            "beta_T" => &mut self.beta_t,
            "delta_V" => &mut self.delta_v,
            "delta_T" => &mut self.delta_t,
            "K_u" => &mut self.k_u,
            "K_c" => &mut self.k_c,
            "kappa" => &mut self.kappa,
            "nu_U" => &mut self.nu_u,
            "nu_I" => &mut self.nu_i,
            "tau" => &mut self.tau,
            "q" => &mut self.q,
            "A_1" => &mut self.a1,
            "A_2" => &mut self.a2,
            "u1_MTD" => &mut self.u1_mtd,
            "u2_MTD" => &mut self.u2_mtd,
            "T_f" => &mut self.t_f,
            _ => {
                return Err(ParamError::UnknownName {
                    name: name.to_string(),
                })
            }
        };
        *slot = value;
        Ok(())
    }
}

/// Maps a key to its `'static` spelling for error messages.
fn canonical(name: &str) -> &'static str {
    PARAMETER_NAMES
        .iter()
        .find(|n| **n == name)
        .copied()
        .unwrap_or("?")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParameters::default().validate().expect("baseline set must be valid");
    }

    #[test]
    fn strictly_positive_fields_reject_zero() {
        for name in PARAMETER_NAMES {
            let mut p = ModelParameters::default();
            p.set(name, 0.0).unwrap();
            let zero_ok = matches!(name, "beta" | "b" | "q" | "A_1" | "A_2" | "u1_MTD" | "u2_MTD");
            assert_eq!(
                p.validate().is_ok(),
                zero_ok,
                "zero handling wrong for `{name}`"
            );
        }
    }

    #[test]
    fn negative_values_always_rejected() {
        for name in PARAMETER_NAMES {
            let mut p = ModelParameters::default();
            p.set(name, -1.0).unwrap();
            assert!(p.validate().is_err(), "negative `{name}` must be rejected");
        }
    }

    #[test]
    fn non_finite_rejected() {
        for bad in [f64::NAN, f64::INFINITY] {
            let mut p = ModelParameters::default();
            p.k_u = bad;
            assert!(p.validate().is_err());
        }
    }

    #[test]
    fn get_set_round_trip_over_all_names() {
        let mut p = ModelParameters::default();
        for (idx, name) in PARAMETER_NAMES.iter().enumerate() {
            p.set(name, 1000.0 + idx as f64).unwrap();
        }
        for (idx, name) in PARAMETER_NAMES.iter().enumerate() {
            assert_eq!(p.get(name).unwrap(), 1000.0 + idx as f64, "key `{name}`");
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        let mut p = ModelParameters::default();
        assert!(p.get("alpha2").is_err());
        assert!(p.set("Alpha", 1.0).is_err());
        // Keys are case sensitive on purpose: `delta_t` is not `delta_T`.
        assert!(p.get("delta_t").is_err());
    }
}
