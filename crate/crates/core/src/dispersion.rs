//! Single-magnon dispersion relations and the linear-dispersion target.
//!
//! For an XY ring with couplings `J(l)` the one-flip eigenstates are plane
//! waves with energy
//!
//! ```text
//! E_k = -J(0) - Σ_{l>0} 2 J(l) cos(kl),
//! ```
//!
//! except that the antipodal distance `l = N/2` connects a single site pair
//! and enters with weight 1. With that weight the `N`-point curve is exactly
//! the eigenvalue set of the ring Hamiltonian. A linear, photon-like target
//! `ε_k = |k|` corresponds to `J(0) = -π/2`, `J(l) = (1-(-1)^l)/(π l²)`;
//! truncations of that series inherit the usual Gibbs behavior at the cone
//! tips `k = 0, π`, which is expected and quantified rather than hidden.
//!
//! This module works in the dimensionless units of the ideal target
//! (`ε_k = |k|`); engineered tables are mapped onto it by normalizing `J(1)`
//! via [`CouplingTable::normalized_j1`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::coupling::CouplingTable;
use crate::error::{Error, Result};
use crate::numfmt;
use crate::ring;

/// Momentum grid choice for a dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KGrid {
    /// The `N` ring momenta `k_m = 2πm/N` of the table's own ring.
    Ring,
    /// `m` uniform points on `[-π, π]`, endpoints included (`m >= 2`).
    Dense(usize),
}

/// Sampled dispersion curve, retaining the table it came from so that
/// analytic derivatives stay available.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionCurve {
    pub n_sites: usize,
    pub k: Vec<f64>,
    pub e_of_k: Vec<f64>,
    pub couplings: CouplingTable,
}

/// Least-squares linearity diagnostics over a momentum window.
#[derive(Debug, Clone, Serialize)]
pub struct LinearityReport {
    pub max_abs_dev: f64,
    pub rms_dev: f64,
    pub best_fit_slope: f64,
}

/// Dispersion at a single momentum, antipodal term counted once.
pub(crate) fn energy_at(table: &CouplingTable, k: f64) -> f64 {
    let half = table.max_l();
    let mut e = -table.j(0);
    for l in 1..=half {
        let weight = if l == half { 1.0 } else { 2.0 };
        e -= weight * table.j(l) * (k * l as f64).cos();
    }
    e
}

/// Group velocity `dE/dk` at a single momentum (analytic derivative).
fn velocity_at(table: &CouplingTable, k: f64) -> f64 {
    let half = table.max_l();
    let mut v = 0.0;
    for l in 1..=half {
        let weight = if l == half { 1.0 } else { 2.0 };
        v += weight * l as f64 * table.j(l) * (k * l as f64).sin();
    }
    v
}

fn grid_points(table: &CouplingTable, grid: KGrid) -> Result<Vec<f64>> {
    match grid {
        KGrid::Ring => Ok(ring::momenta(table.n_sites)),
        KGrid::Dense(m) => {
            if m < 2 {
                return Err(Error::InvalidInput(format!(
                    "dense grid needs at least 2 points, got {m}"
                )));
            }
            Ok((0..m)
                .map(|i| -PI + 2.0 * PI * i as f64 / (m - 1) as f64)
                .collect())
        }
    }
}

/// Evaluate the dispersion of a coupling table on the requested grid.
pub fn magnon_dispersion(table: &CouplingTable, grid: KGrid) -> Result<DispersionCurve> {
    let k = grid_points(table, grid)?;
    let e_of_k = k.iter().map(|&k| energy_at(table, k)).collect();
    Ok(DispersionCurve {
        n_sites: table.n_sites,
        k,
        e_of_k,
        couplings: table.clone(),
    })
}

/// Analytic group velocities `Σ_{l>0} w_l l J(l) sin(kl)` on the curve's own
/// grid (no finite differences).
pub fn group_velocity(curve: &DispersionCurve) -> Vec<f64> {
    curve.k.iter().map(|&k| velocity_at(&curve.couplings, k)).collect()
}

/// Couplings realizing the linear target `ε_k = |k|`, truncated at `l_max`:
/// `J(0) = -π/2`, `J(l) = (1-(-1)^l)/(π l²)` for `1 <= l <= l_max`.
///
/// The returned table lives on a `2(l_max+1)`-site ring so the truncation
/// tail, not the antipodal weight, is what limits it; re-target it with
/// [`CouplingTable::fit_to_ring`] when driving dynamics on a specific ring.
pub fn ideal_linear_couplings(l_max: usize) -> CouplingTable {
    assert!(l_max >= 1, "ideal couplings need l_max >= 1");
    let n_sites = 2 * (l_max + 1);
    let mut j = vec![0.0; n_sites / 2 + 1];
    j[0] = -PI / 2.0;
    for (l, jl) in j.iter_mut().enumerate().skip(1).take(l_max) {
        if l % 2 == 1 {
            *jl = 2.0 / (PI * (l * l) as f64);
        }
    }
    CouplingTable::new(n_sites, j).expect("ideal table is always well-formed")
}

/// Least-squares line through `(k, E_k)` restricted to `fit_range`
/// (inclusive); reports the deviations from that line.
pub fn linearity_error(curve: &DispersionCurve, fit_range: (f64, f64)) -> Result<LinearityReport> {
    let (lo, hi) = fit_range;
    let pts: Vec<(f64, f64)> = curve
        .k
        .iter()
        .zip(&curve.e_of_k)
        .filter(|(k, _)| **k >= lo && **k <= hi)
        .map(|(k, e)| (*k, *e))
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyRange);
    }
    let n = pts.len() as f64;
    let sk: f64 = pts.iter().map(|(k, _)| k).sum();
    let se: f64 = pts.iter().map(|(_, e)| e).sum();
    let skk: f64 = pts.iter().map(|(k, _)| k * k).sum();
    let ske: f64 = pts.iter().map(|(k, e)| k * e).sum();
    let denom = n * skk - sk * sk;
    if denom == 0.0 {
        return Err(Error::EmptyRange);
    }
    let slope = (n * ske - sk * se) / denom;
    let intercept = (se - slope * sk) / n;

    let mut max_abs = 0.0_f64;
    let mut sq = 0.0_f64;
    for (k, e) in &pts {
        let dev = e - (slope * k + intercept);
        max_abs = max_abs.max(dev.abs());
        sq += dev * dev;
    }
    Ok(LinearityReport {
        max_abs_dev: max_abs,
        rms_dev: (sq / n).sqrt(),
        best_fit_slope: slope,
    })
}

/// CSV emission for a curve and its group velocities: header `k,E,v`.
pub fn dispersion_csv(curve: &DispersionCurve, digits: usize) -> String {
    let v = group_velocity(curve);
    let mut out = String::from("k,E,v\n");
    for ((k, e), v) in curve.k.iter().zip(&curve.e_of_k).zip(&v) {
        out.push_str(&format!(
            "{},{},{}\n",
            numfmt::sig(*k, digits),
            numfmt::sig(*e, digits),
            numfmt::sig(*v, digits)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn nn_table_gives_single_cosine() {
        let table = CouplingTable::nearest_neighbor(40, 0.7).unwrap();
        let curve = magnon_dispersion(&table, KGrid::Dense(101)).unwrap();
        for (k, e) in curve.k.iter().zip(&curve.e_of_k) {
            assert_abs_diff_eq!(*e, -2.0 * 0.7 * k.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn ideal_coupling_values() {
        let table = ideal_linear_couplings(11);
        assert_relative_eq!(table.j(0), -PI / 2.0);
        assert_relative_eq!(table.j(1), 2.0 / PI);
        assert_eq!(table.j(2), 0.0);
        assert_relative_eq!(table.j(3), 2.0 / (9.0 * PI));
        // Odd-l ratios reproduce 1/l².
        for l in [3usize, 5, 7, 9, 11] {
            assert_relative_eq!(
                table.ratio_to_j1(l),
                1.0 / (l * l) as f64,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn ideal_dispersion_is_exact_at_half_pi() {
        let table = ideal_linear_couplings(11);
        let e = energy_at(&table, PI / 2.0);
        assert_abs_diff_eq!(e, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_tip_value_matches_partial_sum() {
        // At k = 0 the truncation leaves the Gibbs residual
        // E_0 = π/2 - (4/π) Σ_{odd l <= 11} 1/l².
        let table = ideal_linear_couplings(11);
        let partial: f64 = [1.0_f64, 9.0, 25.0, 49.0, 81.0, 121.0]
            .iter()
            .map(|ll| 1.0 / ll)
            .sum();
        let expect = PI / 2.0 - 4.0 / PI * partial;
        let curve = magnon_dispersion(&table, KGrid::Ring).unwrap();
        assert_abs_diff_eq!(curve.e_of_k[0], expect, epsilon = 1e-12);
    }

    #[test]
    fn dispersion_matches_fourier_partial_sum_everywhere() {
        // E_k must equal π/2 - (2/π) Σ_{l<=l_max} (1-(-1)^l) cos(kl)/l²
        // to 1e-12 on a dense grid.
        let l_max = 9;
        let table = ideal_linear_couplings(l_max);
        let curve = magnon_dispersion(&table, KGrid::Dense(501)).unwrap();
        for (k, e) in curve.k.iter().zip(&curve.e_of_k) {
            let mut sum = 0.0;
            for l in 1..=l_max {
                let parity = 1.0 - if l % 2 == 0 { 1.0 } else { -1.0 };
                sum += parity * (k * l as f64).cos() / (l * l) as f64;
            }
            let expect = PI / 2.0 - 2.0 / PI * sum;
            assert_abs_diff_eq!(*e, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn tip_energy_vanishes_in_the_full_series() {
        // Σ_{odd} 1/l² = π²/8, so E_0 -> 0 as l_max grows.
        let e0 = energy_at(&ideal_linear_couplings(10001), 0.0);
        assert!(e0.abs() < 1e-4, "E_0 = {e0}");
        let e0_coarse = energy_at(&ideal_linear_couplings(101), 0.0);
        assert!(e0.abs() < e0_coarse.abs());
    }

    #[test]
    fn parity_on_the_ring_grid() {
        let table = ideal_linear_couplings(7).fit_to_ring(24).unwrap();
        let curve = magnon_dispersion(&table, KGrid::Ring).unwrap();
        let n = table.n_sites;
        for m in 1..n {
            assert_abs_diff_eq!(curve.e_of_k[m], curve.e_of_k[n - m], epsilon = 1e-12);
        }
    }

    #[test]
    fn group_velocity_examples() {
        // NN-only: v_k = 2J sin k with peak 2J at k = π/2.
        let table = CouplingTable::nearest_neighbor(40, 0.7).unwrap();
        let curve = magnon_dispersion(&table, KGrid::Dense(201)).unwrap();
        let v = group_velocity(&curve);
        for (k, v) in curve.k.iter().zip(&v) {
            assert_abs_diff_eq!(*v, 2.0 * 0.7 * k.sin(), epsilon = 1e-13);
        }
        let vmax = v.iter().cloned().fold(f64::MIN, f64::max);
        assert_relative_eq!(vmax, 1.4, max_relative = 1e-3);

        // Deep ideal truncation: v -> sign(k) away from the cone tips.
        let table = ideal_linear_couplings(4001);
        for k in [0.3, 1.0, -2.0] {
            let v = velocity_at(&table, k);
            assert_abs_diff_eq!(v, k.signum(), epsilon = 2e-3);
        }
    }

    #[test]
    fn analytic_velocity_matches_finite_difference() {
        let table = ideal_linear_couplings(11);
        let h = 1e-4;
        let k = PI / 2.0;
        let fd = (energy_at(&table, k + h) - energy_at(&table, k - h)) / (2.0 * h);
        assert_abs_diff_eq!(velocity_at(&table, k), fd, epsilon = 1e-6);
    }

    #[test]
    fn linearity_of_exact_line_is_zero() {
        // Feed a hand-built linear "curve" through the report.
        let table = CouplingTable::nearest_neighbor(8, 1.0).unwrap();
        let k: Vec<f64> = (0..50).map(|i| 0.1 + 0.05 * i as f64).collect();
        let e: Vec<f64> = k.iter().map(|k| 3.0 * k - 0.25).collect();
        let curve = DispersionCurve { n_sites: 8, k, e_of_k: e, couplings: table };
        let rep = linearity_error(&curve, (0.0, 10.0)).unwrap();
        assert_abs_diff_eq!(rep.max_abs_dev, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.rms_dev, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rep.best_fit_slope, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn empty_fit_range_errors() {
        let table = CouplingTable::nearest_neighbor(8, 1.0).unwrap();
        let curve = magnon_dispersion(&table, KGrid::Dense(51)).unwrap();
        assert!(matches!(
            linearity_error(&curve, (0.31, 0.32)),
            Err(Error::EmptyRange)
        ));
    }

    #[test]
    fn linearity_improves_with_truncation_depth() {
        let range = (0.1 * PI, 0.9 * PI);
        let mut last = f64::MAX;
        for l_max in (3..=21).step_by(2) {
            let curve =
                magnon_dispersion(&ideal_linear_couplings(l_max), KGrid::Dense(2001)).unwrap();
            let dev = linearity_error(&curve, range).unwrap().max_abs_dev;
            assert!(dev < last, "l_max = {l_max}: {dev} !< {last}");
            last = dev;
        }
    }

    #[test]
    fn csv_has_three_columns() {
        let table = CouplingTable::nearest_neighbor(8, 1.0).unwrap();
        let curve = magnon_dispersion(&table, KGrid::Ring).unwrap();
        let csv = dispersion_csv(&curve, 17);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,E,v"));
        assert_eq!(lines.count(), 8);
    }
}
