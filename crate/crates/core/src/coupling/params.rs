//! Physical parameter records and detuning bookkeeping.
//!
//! All frequencies are in units of the photon tunnelling rate `T`
//! (`t_hop = 1` in the canonical setup); only ratios to `T` matter.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring;

/// Ring of `N` tunnel-coupled single-mode cavities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CavityArray {
    /// Number of cavities `N`; must be even and at least 2 so that the
    /// momentum grid `k = 2πm/N` contains both `k = 0` and `k = π`.
    pub n_sites: usize,
    /// Photon tunnelling rate `T` between neighboring cavities (nonzero).
    pub t_hop: f64,
    /// Bare cavity mode frequency `ω_c`.
    pub omega_c: f64,
}

impl CavityArray {
    pub fn new(n_sites: usize, t_hop: f64, omega_c: f64) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "ring size must be even and >= 2, got {n_sites}"
            )));
        }
        if t_hop == 0.0 || !t_hop.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tunnelling rate must be finite and nonzero, got {t_hop}"
            )));
        }
        if !omega_c.is_finite() {
            return Err(Error::InvalidInput("omega_c must be finite".into()));
        }
        Ok(Self { n_sites, t_hop, omega_c })
    }

    /// Momentum grid of the ring.
    pub fn momenta(&self) -> Vec<f64> {
        ring::momenta(self.n_sites)
    }
}

/// Λ-type three-level atom: ground `|a⟩` at zero energy, metastable `|b⟩`
/// at `ω_ab`, excited `|e⟩` at `ω_e`. The cavity drives `|a⟩ ↔ |e⟩` with
/// coupling `g`; lasers drive `|b⟩ ↔ |e⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSpec {
    pub omega_e: f64,
    pub omega_ab: f64,
    /// Atom-cavity coupling. May be complex; every effective coupling
    /// depends on `|g|` only, so the phase is accepted and ignored.
    pub g: Complex64,
}

impl AtomSpec {
    pub fn new(omega_e: f64, omega_ab: f64, g: Complex64) -> Result<Self> {
        if !(omega_ab >= 0.0 && omega_e > omega_ab) {
            return Err(Error::InvalidInput(format!(
                "level ordering requires omega_e > omega_ab >= 0, got ({omega_e}, {omega_ab})"
            )));
        }
        if !g.is_finite() {
            return Err(Error::InvalidInput("g must be finite".into()));
        }
        Ok(Self { omega_e, omega_ab, g })
    }
}

/// One external driving laser on the `|b⟩ ↔ |e⟩` transition.
///
/// A laser with `rabi == 0` is inert: it contributes nothing to any
/// effective quantity and is skipped by the validity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveLaser {
    /// Complex Rabi frequency `Ω_n`; magnitudes enter all couplings.
    pub rabi: Complex64,
    /// Laser frequency `ω_n`.
    pub omega_l: f64,
}

impl DriveLaser {
    pub fn new(rabi: Complex64, omega_l: f64) -> Self {
        Self { rabi, omega_l }
    }

    pub fn is_active(&self) -> bool {
        self.rabi.norm() > 0.0
    }
}

/// Every detuning combination used by the elimination:
///
/// - `δ_k  = ω_e - ω_c + 2T cos k` (atom vs photon mode `k`),
/// - `Δ_n  = ω_e - ω_ab - ω_n` (atom vs laser `n`),
/// - `Γ_n^k = δ_k - Δ_n` (two-photon, mode `k` vs laser `n`),
/// - `ω_nm = ω_n - ω_m` (pairwise laser differences),
/// - `𝒟_n = ω_c - ω_ab - ω_n` (cavity-line two-photon detuning driving the
///   exchange kernel denominators).
#[derive(Debug, Clone, Serialize)]
pub struct DetuningSet {
    /// `δ_k` over the `N` grid momenta, indexed by `m` in `k_m = 2πm/N`.
    pub delta_k: Vec<f64>,
    /// `Δ_n` per laser.
    pub delta_n: Vec<f64>,
    /// `Γ_n^k = δ_k - Δ_n`, indexed `[laser][momentum]`.
    pub gamma_nk: Vec<Vec<f64>>,
    /// `ω_nm = ω_n - ω_m`, antisymmetric, indexed `[n][m]`.
    pub omega_nm: Vec<Vec<f64>>,
    /// `𝒟_n = ω_c - ω_ab - ω_n` per laser.
    pub d_n: Vec<f64>,
}

/// Photon band of the coupled array: `N` pairs `(k, ω_k)` with
/// `ω_k = ω_c - 2T cos k` on the ring momentum grid. The band spans
/// `4|T|` for any even ring since both `k = 0` and `k = π` are on the grid.
pub fn photon_band(array: &CavityArray) -> Vec<(f64, f64)> {
    array
        .momenta()
        .into_iter()
        .map(|k| (k, array.omega_c - 2.0 * array.t_hop * k.cos()))
        .collect()
}

/// Assemble the full detuning set for a nonempty laser list.
pub fn detunings(
    array: &CavityArray,
    atom: &AtomSpec,
    lasers: &[DriveLaser],
) -> Result<DetuningSet> {
    if lasers.is_empty() {
        return Err(Error::InvalidInput("detunings: empty laser list".into()));
    }
    let delta_k: Vec<f64> = array
        .momenta()
        .into_iter()
        .map(|k| atom.omega_e - array.omega_c + 2.0 * array.t_hop * k.cos())
        .collect();
    let delta_n: Vec<f64> = lasers
        .iter()
        .map(|l| atom.omega_e - atom.omega_ab - l.omega_l)
        .collect();
    let gamma_nk: Vec<Vec<f64>> = delta_n
        .iter()
        .map(|dn| delta_k.iter().map(|dk| dk - dn).collect())
        .collect();
    let omega_nm: Vec<Vec<f64>> = lasers
        .iter()
        .map(|ln| lasers.iter().map(|lm| ln.omega_l - lm.omega_l).collect())
        .collect();
    let d_n: Vec<f64> = lasers
        .iter()
        .map(|l| array.omega_c - atom.omega_ab - l.omega_l)
        .collect();
    Ok(DetuningSet { delta_k, delta_n, gamma_nk, omega_nm, d_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CavityArray::new(3, 1.0, 0.0).is_err());
        assert!(CavityArray::new(0, 1.0, 0.0).is_err());
        assert!(CavityArray::new(4, 0.0, 0.0).is_err());
        assert!(AtomSpec::new(1.0, 2.0, c(0.1)).is_err());
        assert!(AtomSpec::new(1.0, -0.5, c(0.1)).is_err());
    }

    #[test]
    fn two_site_band() {
        let array = CavityArray::new(2, 1.0, 100.0).unwrap();
        let band = photon_band(&array);
        assert_eq!(band.len(), 2);
        assert_abs_diff_eq!(band[0].0, 0.0);
        assert_abs_diff_eq!(band[0].1, 98.0);
        assert_abs_diff_eq!(band[1].0, PI, epsilon = 1e-15);
        assert_abs_diff_eq!(band[1].1, 102.0, epsilon = 1e-12);
    }

    #[test]
    fn four_site_band_values() {
        let array = CavityArray::new(4, 1.0, 0.0).unwrap();
        let mut omegas: Vec<f64> = photon_band(&array).into_iter().map(|(_, w)| w).collect();
        omegas.sort_by(|a, b| a.total_cmp(b));
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (w, e) in omegas.iter().zip(expected) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn bandwidth_is_4t() {
        let array = CavityArray::new(40, 1.0, 7.5).unwrap();
        let band = photon_band(&array);
        let max = band.iter().map(|&(_, w)| w).fold(f64::MIN, f64::max);
        let min = band.iter().map(|&(_, w)| w).fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(max - min, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn on_resonance_laser_has_zero_detuning() {
        let array = CavityArray::new(4, 1.0, 50.0).unwrap();
        let atom = AtomSpec::new(60.0, 1.0, c(0.01)).unwrap();
        let laser = DriveLaser::new(c(0.5), atom.omega_e - atom.omega_ab);
        let det = detunings(&array, &atom, &[laser]).unwrap();
        assert_eq!(det.delta_n[0], 0.0);
    }

    #[test]
    fn flat_band_at_vanishing_hopping() {
        // t_hop = 0 itself is rejected by the type invariant; the flat-band
        // statement is checked in the limit.
        let array = CavityArray::new(8, 1e-12, 10.0).unwrap();
        let atom = AtomSpec::new(30.0, 0.0, c(0.01)).unwrap();
        let laser = DriveLaser::new(c(0.5), 1.0);
        let det = detunings(&array, &atom, &[laser]).unwrap();
        for dk in &det.delta_k {
            assert_abs_diff_eq!(*dk, 20.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn preset_pair_d_values_and_identities() {
        // Mirrored pair with 𝒟 = ±10T/3 in a gauge with positive laser
        // frequencies.
        let array = CavityArray::new(8, 1.0, 200.0).unwrap();
        let atom = AtomSpec::new(300.0, 0.0, c(0.01)).unwrap();
        let d = 10.0 / 3.0;
        let lasers = vec![
            DriveLaser::new(c(1.0), array.omega_c - atom.omega_ab - d),
            DriveLaser::new(c(1.0), array.omega_c - atom.omega_ab + d),
        ];
        let det = detunings(&array, &atom, &lasers).unwrap();
        assert_relative_eq!(det.d_n[0], d, max_relative = 1e-14);
        assert_relative_eq!(det.d_n[1], -d, max_relative = 1e-14);
        // ω_nm antisymmetry and the 𝒟_n = Δ_n - δ_k + 2T cos k identity.
        assert_abs_diff_eq!(det.omega_nm[0][1] + det.omega_nm[1][0], 0.0);
        for (n, dn) in det.d_n.iter().enumerate() {
            for (m, k) in array.momenta().iter().enumerate() {
                let lhs = det.delta_n[n] - det.delta_k[m] + 2.0 * array.t_hop * k.cos();
                assert_abs_diff_eq!(lhs, *dn, epsilon = 1e-10);
                assert_abs_diff_eq!(
                    det.gamma_nk[n][m],
                    det.delta_k[m] - det.delta_n[n],
                    epsilon = 0.0
                );
            }
        }
    }
}
