//! Thirty-day dosing schedules that minimize tumour burden plus quadratic
//! dose costs, computed by a forward-backward sweep, then summarized.

use std::error::Error;

use chemoviro::control::{forward_backward_sweep, SweepOptions};
use chemoviro::params::ModelParameters;

fn main() -> Result<(), Box<dyn Error>> {
    let p = ModelParameters::default();
    let initial = [1.0e4, 100.0, 500.0, 100.0];
    let opts = SweepOptions::default();

    let sol = forward_backward_sweep(&p, initial, &opts)?;
    println!(
        "converged: {} after {} iterations, J = {:.6e}",
        sol.converged, sol.iterations, sol.objective
    );

    let n = sol.controls.times.len();
    let day7 = sol
        .controls
        .times
        .iter()
        .position(|&t| t >= 7.0)
        .unwrap_or(n - 1);
    let burden = |k: usize| sol.states[k][0] + sol.states[k][1];
    println!(
        "tumour burden: {:.4e} at start, {:.4e} at day 7, {:.4e} at day {}",
        burden(0),
        burden(day7),
        burden(n - 1),
        p.t_f
    );

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!(
        "mean doses: u1 = {:.2} of {} virions/day, u2 = {:.2} of {} mg/day",
        mean(&sol.controls.u1),
        p.u1_mtd,
        mean(&sol.controls.u2),
        p.u2_mtd
    );

    let out = std::env::temp_dir().join("chemoviro_optimal_solution.csv");
    std::fs::write(&out, sol.to_csv())?;
    println!("full mesh written to {}", out.display());

    let conv = std::env::temp_dir().join("chemoviro_convergence.csv");
    std::fs::write(&conv, sol.convergence_csv())?;
    println!("iteration record written to {}", conv.display());
    Ok(())
}
