//! The critical drug infusion rate: below it the drug-only tumour-free state
//! is unstable, above it stable. Demonstrated by sweeping q across the
//! threshold and watching the verdict flip.

use std::error::Error;

use chemoviro::equilibria::{chemo_dose_threshold, chemo_equilibria};
use chemoviro::params::ModelParameters;

fn main() -> Result<(), Box<dyn Error>> {
    let p = ModelParameters::default();

    let threshold = chemo_dose_threshold(&p).ok_or("drug too weak: delta_U <= alpha")?;
    println!("q* = {:.4} mg/day", threshold.q_star);
    println!("reachable under the dosing ceiling u2_MTD = {}: {}", p.u2_mtd, threshold.within_mtd);
    println!();

    println!("{:>10}  {:>12}  verdict", "q", "max Re(eig)");
    for factor in [0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 1.5] {
        let mut shifted = p.clone();
        shifted.q = factor * threshold.q_star;
        let set = chemo_equilibria(&shifted);
        let tf = set
            .reports
            .iter()
            .find(|r| r.label == "tumour-free")
            .ok_or("tumour-free state missing")?;
        println!(
            "{:>10.2}  {:>+12.3e}  {}",
            shifted.q,
            tf.max_real_part(),
            tf.verdict
        );
    }
    Ok(())
}
