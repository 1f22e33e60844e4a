//! Small helpers for the periodic ring geometry.

use std::f64::consts::TAU;

/// Momentum grid `k_m = 2πm/N`, `m = 0..N-1`.
pub fn momenta(n_sites: usize) -> Vec<f64> {
    (0..n_sites)
        .map(|m| TAU * m as f64 / n_sites as f64)
        .collect()
}

/// Ring distance `d(i, j) = min(|i-j|, N-|i-j|)`.
pub fn ring_distance(n_sites: usize, i: usize, j: usize) -> usize {
    let d = (i % n_sites).abs_diff(j % n_sites);
    d.min(n_sites - d)
}

/// Site diametrically opposite `j` (ring size must be even).
pub fn antipode(n_sites: usize, j: usize) -> usize {
    (j + n_sites / 2) % n_sites
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_symmetry_and_range() {
        let n = 10;
        for i in 0..n {
            for j in 0..n {
                let d = ring_distance(n, i, j);
                assert_eq!(d, ring_distance(n, j, i));
                assert!(d <= n / 2);
            }
        }
        assert_eq!(ring_distance(10, 1, 9), 2);
        assert_eq!(ring_distance(10, 0, 5), 5);
    }

    #[test]
    fn momentum_grid_contains_zero_and_pi() {
        let ks = momenta(8);
        assert_eq!(ks.len(), 8);
        assert_eq!(ks[0], 0.0);
        assert!((ks[4] - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn antipode_wraps() {
        assert_eq!(antipode(40, 10), 30);
        assert_eq!(antipode(40, 30), 10);
        assert_eq!(antipode(4, 3), 1);
    }
}
