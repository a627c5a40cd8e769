//! Steady states of every analysable variant, with eigenvalues and verdicts.

use std::error::Error;

use chemoviro::equilibria::equilibria_for;
use chemoviro::model::ModelVariant;
use chemoviro::params::ModelParameters;

fn main() -> Result<(), Box<dyn Error>> {
    let p = ModelParameters::default();
    let variants = [
        ModelVariant::NoTreatment,
        ModelVariant::ChemoOnly,
        ModelVariant::ViroOnly,
        ModelVariant::Full,
    ];

    for variant in variants {
        let set = equilibria_for(&variant, &p)?;
        println!("== {} system ==", variant.tag());
        for r in &set.reports {
            let point: Vec<String> = r
                .point
                .iter()
                .zip(variant.labels())
                .map(|(v, l)| format!("{l}={v:.4e}"))
                .collect();
            println!("  {} ({}): {}", r.label, r.verdict, point.join(", "));
            println!(
                "    max Re(eig) = {:+.4e}, residual = {:.1e}",
                r.max_real_part(),
                r.residual
            );
            if let Some(ok) = r.routh_hurwitz_stable() {
                println!("    Routh-Hurwitz agrees: {}", ok == (r.max_real_part() < 0.0));
            }
        }
        for note in &set.notes {
            println!("  note: {note}");
        }
        println!();
    }
    Ok(())
}
