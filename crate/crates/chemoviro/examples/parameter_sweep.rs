//! Burst size against infusion rate over a small grid, cells run in
//! parallel, one summary line per cell.

use std::error::Error;

use rayon::prelude::*;

use chemoviro::dynamics::integrate_rk4;
use chemoviro::model::ModelVariant;
use chemoviro::params::ModelParameters;
use chemoviro::reproduction::r0;

fn main() -> Result<(), Box<dyn Error>> {
    let bursts = [25.0, 50.0, 100.0];
    let doses = [0.0, 5.0, 50.0];
    let initial = [1.0e4, 100.0, 500.0, 100.0, 100.0, 100.0];

    let cells: Vec<(f64, f64)> = bursts
        .iter()
        .flat_map(|&b| doses.iter().map(move |&q| (b, q)))
        .collect();

    let rows: Vec<Result<String, String>> = cells
        .par_iter()
        .map(|&(b, q)| {
            let mut p = ModelParameters::default();
            p.burst = b;
            p.q = q;
            p.validate().map_err(|e| e.to_string())?;
            let traj = integrate_rk4(&ModelVariant::Full, &p, &initial, (0.0, 60.0), 0.01)
                .map_err(|e| e.to_string())?;
            let last = traj.last_state();
            Ok(format!(
                "{b:>6.0} {q:>6.1}  {:>12.4e}  {:>8.4}",
                last[0] + last[1],
                r0(&p).value
            ))
        })
        .collect();

    println!("{:>6} {:>6}  {:>12}  {:>8}", "b", "q", "burden(60d)", "R0");
    for (cell, row) in cells.iter().zip(rows) {
        match row {
            Ok(line) => println!("{line}"),
            Err(reason) => println!("{:>6} {:>6}  failed: {reason}", cell.0, cell.1),
        }
    }
    Ok(())
}
