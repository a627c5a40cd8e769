//! Shared text-output helpers: numbers are written with 17 significant
//! digits so that every CSV value round-trips to the exact binary double and
//! re-runs produce byte-identical files.

/// Formats with 17 significant digits in scientific notation.
pub fn g17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Formats a complex pair as `re` and `im` columns.
pub fn g17_pair(re: f64, im: f64) -> String {
    format!("{},{}", g17(re), g17(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips_exactly() {
        for x in [
            0.0,
            1.0,
            -1.0 / 3.0,
            6.02e23,
            f64::MIN_POSITIVE,
            1.1990407673860912,
            5398.730106676051,
        ] {
            let s = g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "value {x} reformatted as {s}");
        }
    }

    #[test]
    fn g17_is_stable_text() {
        assert_eq!(g17(1.0), "1.0000000000000000e0");
        assert_eq!(g17(-412.0), "-4.1200000000000000e2");
    }
}
