//! Deterministic float formatting for CSV emission.

/// Default number of significant digits: enough to round-trip any f64.
pub const DEFAULT_SIG_DIGITS: usize = 17;

/// Format `x` in scientific notation with `digits` significant digits
/// (clamped to 1..=17). The output is locale-independent and stable, so
/// repeated runs produce byte-identical files.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.clamp(1, DEFAULT_SIG_DIGITS);
    format!("{:.*e}", digits - 1, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_at_full_precision() {
        for &x in &[
            0.0,
            1.0,
            -2.0 / 3.0,
            std::f64::consts::PI,
            6.62607015e-34,
            -1.7976931348623157e308,
        ] {
            let s = sig(x, 17);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn respects_requested_digits() {
        assert_eq!(sig(98.0, 3), "9.80e1");
        assert_eq!(sig(-0.25, 2), "-2.5e-1");
    }
}
