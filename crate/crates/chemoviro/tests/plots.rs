//! Layout snapshot: an overlay of virus-and-immunity runs at three burst
//! sizes must keep rendering to exactly the stored bytes. Regenerate with
//! `BLESS=1 cargo test -p chemoviro --test plots` after an intentional
//! layout change and review the diff.

use std::path::Path;

use chemoviro::dynamics::integrate_rk4;
use chemoviro::model::ModelVariant;
use chemoviro::params::ModelParameters;
use chemoviro::plot::{line_chart, Series};

fn burst_overlay() -> String {
    let mut series = Vec::new();
    for b in [25.0, 50.0, 100.0] {
        let mut p = ModelParameters::default();
        p.burst = b;
        // virus and immune compartments only: [U, I, V, E_V, E_T]
        let initial = [1.0e4, 100.0, 500.0, 10.0, 10.0];
        let traj = integrate_rk4(&ModelVariant::ViroOnly, &p, &initial, (0.0, 100.0), 0.05)
            .expect("baseline-ish run integrates");
        let points = traj
            .times
            .iter()
            .zip(traj.states.iter())
            .map(|(t, s)| (*t, s[0]))
            .collect();
        series.push(Series::new(format!("b = {b}"), points));
    }
    line_chart(
        "uninfected tumour cells by burst size",
        "time (days)",
        "U (cells)",
        &series,
    )
    .expect("series are non-empty")
}

#[test]
fn burst_overlay_matches_the_stored_snapshot() {
    let svg = burst_overlay();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(svg.matches("b = ").count(), 3);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/burst_overlay.svg");
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(&path)
        .expect("snapshot exists; bless it with BLESS=1 if this is a fresh checkout");
    assert_eq!(svg, golden, "chart layout drifted from the snapshot");
}
