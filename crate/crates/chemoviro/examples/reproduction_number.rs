//! The virus's basic reproduction number at the infusion steady state: the
//! closed form, its agreement with the next-generation spectral radius, and
//! its response to the drug infusion rate.

use std::error::Error;

use chemoviro::params::ModelParameters;
use chemoviro::reproduction::{r0, r0_vs_dose_curve};

fn main() -> Result<(), Box<dyn Error>> {
    let p = ModelParameters::default();

    let rep = r0(&p);
    println!("R0 = {:.10}", rep.value);
    println!("  at U* = {:.4e}, E_T* = {:.4}, C* = {:.4}", rep.u_star, rep.e_t_star, rep.c_star);
    println!(
        "  next-generation spectral radius differs by {:.2e} (absolute)",
        rep.spectral_radius_check
    );
    println!("  virus invades (R0 > 1): {}", rep.value > 1.0);
    println!();

    let grid = [5.0, 10.0, 15.0, 35.0, 50.0, 100.0];
    let curve = r0_vs_dose_curve(&p, &grid)?;
    println!("{:>8}  R0", "q");
    for (q, value) in &curve.rows {
        println!("{q:>8.1}  {value:.6}");
    }
    println!("strictly decreasing: {}", curve.strictly_decreasing);
    let (first, last) = (curve.rows[0].1, curve.rows.last().unwrap().1);
    println!("total relative drop: {:.3}%", 100.0 * (first - last) / first);
    Ok(())
}
