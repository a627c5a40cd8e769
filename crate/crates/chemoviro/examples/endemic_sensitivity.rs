//! Sensitivity of the six-compartment coexistence state. The defaults leave
//! no interior steady state, so this run uses a faster-growing, more
//! infectable tumour, then asks how the settled tumour burden responds to
//! small parameter changes.

use std::error::Error;

use chemoviro::params::ModelParameters;
use chemoviro::reproduction::{endemic_sensitivity, endemic_sensitivity_direct};
use chemoviro::state::STATE_LABELS;

fn main() -> Result<(), Box<dyn Error>> {
    let mut p = ModelParameters::default();
    p.alpha = 0.8;
    p.beta = 0.15222854712070424;

    println!("{:>8}  burden elasticity", "param");
    for name in ["q", "alpha", "beta", "delta", "psi"] {
        let report = endemic_sensitivity(&p, name)?;
        println!("{name:>8}  {:+.6e}", report.combined_tumour);
    }

    // Cross-check the linear-solve value for q against a direct re-solve of
    // the equilibrium at nudged parameters.
    let linear = endemic_sensitivity(&p, "q")?;
    let direct = endemic_sensitivity_direct(&p, "q")?;
    let agree = ((linear.combined_tumour - direct) / direct).abs();
    println!("\nq index, linear solve:    {:+.8e}", linear.combined_tumour);
    println!("q index, direct re-solve: {direct:+.8e}");
    println!("relative disagreement:    {agree:.2e}");
    println!("Jacobian condition estimate: {:.2e}", linear.condition_estimate);

    println!("\ncoexistence state:");
    for (label, value) in STATE_LABELS.iter().zip(&linear.equilibrium) {
        println!("  {label:>3} = {value:.6e}");
    }
    Ok(())
}
