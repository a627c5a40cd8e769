//! How strongly each parameter steers the reproduction number. Burst size
//! and infectivity carry elasticity exactly 1, viral clearance exactly -1;
//! the rest are finite-differenced.

use std::error::Error;

use chemoviro::params::ModelParameters;
use chemoviro::reproduction::r0_elasticities;

fn main() -> Result<(), Box<dyn Error>> {
    let p = ModelParameters::default();
    let names = ["b", "beta", "gamma", "delta", "delta_I", "K_u", "q", "psi"];

    let table = r0_elasticities(&p, &names)?;
    println!("{:>8}  {:>13}  method", "param", "elasticity");
    for row in &table.rows {
        println!("{:>8}  {:>+13.6e}  {}", row.parameter, row.elasticity, row.method);
    }
    for (name, reason) in &table.failures {
        println!("{name:>8}  failed: {reason}");
    }

    // A dose change and a clearance change tug the steady drug level in
    // opposite directions with the same strength.
    let e_q = table.rows.iter().find(|r| r.parameter == "q").unwrap().elasticity;
    let e_psi = table.rows.iter().find(|r| r.parameter == "psi").unwrap().elasticity;
    println!("\ne_q = {e_q:+.6e} and e_psi = {e_psi:+.6e} (mirror pair)");
    Ok(())
}
