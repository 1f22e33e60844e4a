//! Exact single-magnon dynamics on the engineered XY ring.
//!
//! The single-flip block of the XY Hamiltonian is a real symmetric circulant
//! matrix, so evolution is computed exactly in the plane-wave eigenbasis:
//! Fourier transform, multiply by `e^{-iE_k t}`, transform back. There is no
//! time-stepping error; unitarity holds to rounding. A dense
//! eigendecomposition route is kept as an independent cross-check.
//!
//! The uniform Zeeman field of the effective model shifts every single-flip
//! state equally and is dropped here as a global phase.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::coupling::CouplingTable;
use crate::dispersion;
use crate::error::{Error, Result};
use crate::numfmt;
use crate::ring;

/// Normalized amplitudes over the site basis `|j⟩` (one flipped spin at `j`
/// on the polarized background).
#[derive(Debug, Clone, PartialEq)]
pub struct MagnonState {
    pub amplitudes: Vec<Complex64>,
}

impl MagnonState {
    /// Single-site excitation `|j⟩`.
    pub fn single_site(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::InvalidInput(format!(
                "site {site} outside ring of {n_sites}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Gaussian wave packet centered on `center` with spatial width `width`
    /// (sites) and carrier momentum `momentum`.
    pub fn gaussian(n_sites: usize, center: usize, width: f64, momentum: f64) -> Result<Self> {
        if center >= n_sites {
            return Err(Error::InvalidInput(format!(
                "center {center} outside ring of {n_sites}"
            )));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("packet width must be positive, got {width}")));
        }
        let amplitudes = (0..n_sites)
            .map(|j| {
                let d = ring::ring_distance(n_sites, j, center) as f64;
                let envelope = (-d * d / (4.0 * width * width)).exp();
                let rel = j as f64 - center as f64;
                envelope * Complex64::from_polar(1.0, momentum * rel)
            })
            .collect();
        Ok(Self::normalized(amplitudes))
    }

    /// Wrap amplitudes that are already normalized (to 1e-10).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self { amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "magnon state norm {norm} deviates from 1 by more than 1e-10"
            )));
        }
        Ok(state)
    }

    /// Normalize arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Self {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize the zero vector");
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self { amplitudes }
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Single-flip block of the XY Hamiltonian: `H[j][j'] = -J(d(j, j'))` off the
/// diagonal and `-J(0)` on it. Real, symmetric, circulant; its eigenvalues
/// are the ring-grid dispersion (antipodal term counted once).
pub fn single_magnon_hamiltonian(table: &CouplingTable) -> DMatrix<f64> {
    let n = table.n_sites;
    DMatrix::from_fn(n, n, |i, j| -table.j(ring::ring_distance(n, i, j)))
}

/// Plane-wave propagator for one coupling table; caches the FFT plans and
/// ring energies so repeated evolutions are cheap.
struct Propagator {
    n: usize,
    energies: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Propagator {
    fn new(table: &CouplingTable) -> Self {
        let n = table.n_sites;
        let energies = ring::momenta(n)
            .into_iter()
            .map(|k| dispersion::energy_at(table, k))
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            energies,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }
    }

    fn evolve(&self, amplitudes: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut buf = amplitudes.to_vec();
        self.fft.process(&mut buf);
        for (a, e) in buf.iter_mut().zip(&self.energies) {
            *a *= Complex64::from_polar(1.0, -e * t);
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        buf
    }
}

fn check_state(table: &CouplingTable, state: &MagnonState) -> Result<()> {
    if state.n_sites() != table.n_sites {
        return Err(Error::GridMismatch {
            expected: table.n_sites,
            got: state.n_sites(),
        });
    }
    Ok(())
}

/// Evolve a magnon state for time `t` in the plane-wave eigenbasis.
pub fn evolve(state: &MagnonState, table: &CouplingTable, t: f64) -> Result<MagnonState> {
    check_state(table, state)?;
    let amplitudes = Propagator::new(table).evolve(&state.amplitudes, t);
    Ok(MagnonState { amplitudes })
}

/// Evolve through the dense eigendecomposition of the circulant Hamiltonian.
/// Independent of the FFT route; used for cross-validation.
pub fn evolve_dense(state: &MagnonState, table: &CouplingTable, t: f64) -> Result<MagnonState> {
    check_state(table, state)?;
    let n = table.n_sites;
    let eig = single_magnon_hamiltonian(table).symmetric_eigen();
    // c = V^T ψ, then ψ(t) = V e^{-iλt} c.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (i, c) in coeffs.iter_mut().enumerate() {
        for (j, a) in state.amplitudes.iter().enumerate() {
            *c += eig.eigenvectors[(j, i)] * a;
        }
        *c *= Complex64::from_polar(1.0, -eig.eigenvalues[i] * t);
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
    for (j, a) in amplitudes.iter_mut().enumerate() {
        for (i, c) in coeffs.iter().enumerate() {
            *a += eig.eigenvectors[(j, i)] * c;
        }
    }
    Ok(MagnonState { amplitudes })
}

/// `|⟨target| e^{-iHt} |source⟩|²`.
pub fn transfer_fidelity(
    table: &CouplingTable,
    source: usize,
    target: usize,
    t: f64,
) -> Result<f64> {
    if target >= table.n_sites {
        return Err(Error::InvalidInput(format!(
            "target {target} outside ring of {}",
            table.n_sites
        )));
    }
    let state = MagnonState::single_site(table.n_sites, source)?;
    let evolved = evolve(&state, table, t)?;
    Ok(evolved.amplitudes[target].norm_sqr())
}

/// Probability record of an evolution: site-resolved probabilities and the
/// fidelity at the antipodal target, over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    /// `probabilities[i][j] = |⟨j|ψ(t_i)⟩|²`; every row sums to 1.
    pub probabilities: Vec<Vec<f64>>,
    /// `|⟨target|ψ(t_i)⟩|²`.
    pub fidelity: Vec<f64>,
    pub target: usize,
}

impl EvolutionRecord {
    /// CSV with header `t,site,prob`, one row per (time, site).
    pub fn profile_csv(&self, digits: usize) -> String {
        let mut out = String::from("t,site,prob\n");
        for (t, row) in self.times.iter().zip(&self.probabilities) {
            for (site, p) in row.iter().enumerate() {
                out.push_str(&format!(
                    "{},{site},{}\n",
                    numfmt::sig(*t, digits),
                    numfmt::sig(*p, digits)
                ));
            }
        }
        out
    }

    /// CSV with header `t,fidelity`.
    pub fn fidelity_csv(&self, digits: usize) -> String {
        let mut out = String::from("t,fidelity\n");
        for (t, f) in self.times.iter().zip(&self.fidelity) {
            out.push_str(&format!(
                "{},{}\n",
                numfmt::sig(*t, digits),
                numfmt::sig(*f, digits)
            ));
        }
        out
    }
}

/// Evolve a single-site start and record the full probability heatmap plus
/// the fidelity at the antipodal site.
pub fn propagation_profile(
    table: &CouplingTable,
    source: usize,
    t_grid: &[f64],
) -> Result<EvolutionRecord> {
    let state = MagnonState::single_site(table.n_sites, source)?;
    let target = ring::antipode(table.n_sites, source);
    let prop = Propagator::new(table);
    let mut probabilities = Vec::with_capacity(t_grid.len());
    let mut fidelity = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let amps = prop.evolve(&state.amplitudes, t);
        fidelity.push(amps[target].norm_sqr());
        probabilities.push(amps.iter().map(|a| a.norm_sqr()).collect());
    }
    Ok(EvolutionRecord {
        times: t_grid.to_vec(),
        probabilities,
        fidelity,
        target,
    })
}

/// Search window for the antipodal revival: coarse scan on
/// `coarse_steps + 1` uniform points, then golden-section refinement around
/// the coarse peak.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RevivalWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub coarse_steps: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Time and value of the maximal antipodal transfer fidelity inside the
/// window. Deterministic: fixed coarse grid, then golden-section.
pub fn revival_search(
    table: &CouplingTable,
    source: usize,
    window: RevivalWindow,
) -> Result<(f64, f64)> {
    if !(window.t_max > window.t_min) || window.coarse_steps == 0 {
        return Err(Error::EmptyWindow);
    }
    let state = MagnonState::single_site(table.n_sites, source)?;
    let target = ring::antipode(table.n_sites, source);
    let prop = Propagator::new(table);
    let fid = |t: f64| prop.evolve(&state.amplitudes, t)[target].norm_sqr();

    let step = (window.t_max - window.t_min) / window.coarse_steps as f64;
    let (mut best_i, mut best_f) = (0, f64::MIN);
    for i in 0..=window.coarse_steps {
        let f = fid(window.t_min + step * i as f64);
        if f > best_f {
            best_f = f;
            best_i = i;
        }
    }
    let mut a = (window.t_min + step * (best_i as f64 - 1.0)).max(window.t_min);
    let mut b = (window.t_min + step * (best_i as f64 + 1.0)).min(window.t_max);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = fid(c);
    let mut fd = fid(d);
    while b - a > 1e-10 * b.abs().max(1.0) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = fid(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = fid(d);
        }
    }
    let t_star = 0.5 * (a + b);
    Ok((t_star, fid(t_star)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{ideal_linear_couplings, magnon_dispersion, KGrid};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> MagnonState {
        let amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        MagnonState::normalized(amps)
    }

    fn ideal_ring_table(n: usize) -> CouplingTable {
        ideal_linear_couplings(n / 2).fit_to_ring(n).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let table = ideal_ring_table(20);
        let state = MagnonState::single_site(20, 3).unwrap();
        let out = evolve(&state, &table, 0.0).unwrap();
        for (a, b) in out.amplitudes.iter().zip(&state.amplitudes) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_couplings_leave_state_unchanged() {
        // The uniform field is a global phase in this sector; with J = 0 the
        // amplitudes are exactly stationary.
        let table = CouplingTable::new(12, vec![0.0; 7]).unwrap();
        let state = MagnonState::gaussian(12, 4, 1.5, 0.7).unwrap();
        let out = evolve(&state, &table, 17.3).unwrap();
        for (a, b) in out.amplitudes.iter().zip(&state.amplitudes) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nn_ring_eigenvalues() {
        let table = CouplingTable::nearest_neighbor(10, 1.0).unwrap();
        let h = single_magnon_hamiltonian(&table);
        let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut expect: Vec<f64> = ring::momenta(10).iter().map(|k| -2.0 * k.cos()).collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        expect.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in eig.iter().zip(&expect) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric_circulant() {
        let table = ideal_ring_table(16);
        let h = single_magnon_hamiltonian(&table);
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(h[(i, j)], h[(j, i)]);
                assert_eq!(h[(i, j)], h[(0, ring::ring_distance(16, i, j))]);
            }
        }
        assert_eq!(h[(0, 0)], -table.j(0));
    }

    #[test]
    fn eigenvalues_match_ring_dispersion() {
        // Both the eigensolve set and the plane-wave Rayleigh quotient must
        // agree with the dispersion formula, antipodal weight included.
        let table = ideal_ring_table(40);
        let h = single_magnon_hamiltonian(&table);
        let curve = magnon_dispersion(&table, KGrid::Ring).unwrap();

        let mut eig: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut expect = curve.e_of_k.clone();
        eig.sort_by(|a, b| a.total_cmp(b));
        expect.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in eig.iter().zip(&expect) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }

        // Rayleigh quotient of the known plane-wave eigenvector at k = π/2.
        let n = 40;
        let k = std::f64::consts::PI / 2.0;
        let wave: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0 / (n as f64).sqrt(), k * j as f64))
            .collect();
        let mut quotient = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                quotient += wave[i].conj() * h[(i, j)] * wave[j];
            }
        }
        assert_abs_diff_eq!(quotient.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(quotient.re, curve.e_of_k[10], epsilon = 1e-10);
    }

    #[test]
    fn unitarity_and_dense_agreement_on_random_states() {
        let table = ideal_ring_table(20);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let state = random_state(&mut rng, 20);
            let t = 10.0 * rng.gen::<f64>();
            let fast = evolve(&state, &table, t).unwrap();
            assert_abs_diff_eq!(fast.norm(), 1.0, epsilon = 1e-12);
            let dense = evolve_dense(&state, &table, t).unwrap();
            for (a, b) in fast.amplitudes.iter().zip(&dense.amplitudes) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let table = ideal_ring_table(24);
        let state = MagnonState::gaussian(24, 5, 2.0, 1.2).unwrap();
        let shift = 7usize;
        let translated = MagnonState {
            amplitudes: (0..24).map(|j| state.amplitudes[(j + 24 - shift) % 24]).collect(),
        };
        let a = evolve(&translated, &table, 4.0).unwrap();
        let b = evolve(&state, &table, 4.0).unwrap();
        for j in 0..24 {
            let expected = b.amplitudes[(j + 24 - shift) % 24];
            assert_abs_diff_eq!((a.amplitudes[j] - expected).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mirror_symmetry_about_the_source() {
        let table = ideal_ring_table(30);
        let state = MagnonState::single_site(30, 11).unwrap();
        let out = evolve(&state, &table, 6.0).unwrap();
        for d in 1..15 {
            let plus = out.amplitudes[(11 + d) % 30].norm();
            let minus = out.amplitudes[(11 + 30 - d) % 30].norm();
            assert_abs_diff_eq!(plus, minus, epsilon = 1e-10);
        }
    }

    #[test]
    fn transfer_fidelity_endpoints() {
        let table = ideal_ring_table(20);
        assert_relative_eq!(transfer_fidelity(&table, 4, 4, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(transfer_fidelity(&table, 4, 9, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn profile_rows_are_normalized_and_constant_for_zero_couplings() {
        let zero = CouplingTable::new(8, vec![0.0; 5]).unwrap();
        let ts: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let rec = propagation_profile(&zero, 2, &ts).unwrap();
        for row in &rec.probabilities {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(row[2], 1.0, epsilon = 1e-12);
        }
        assert_eq!(rec.target, 6);
    }

    #[test]
    fn revival_search_rejects_empty_window() {
        let table = ideal_ring_table(8);
        let bad = RevivalWindow { t_min: 2.0, t_max: 2.0, coarse_steps: 10 };
        assert!(matches!(revival_search(&table, 0, bad), Err(Error::EmptyWindow)));
        let bad = RevivalWindow { t_min: 0.0, t_max: 1.0, coarse_steps: 0 };
        assert!(matches!(revival_search(&table, 0, bad), Err(Error::EmptyWindow)));
    }

    #[test]
    fn csv_shapes() {
        let table = ideal_ring_table(8);
        let rec = propagation_profile(&table, 1, &[0.0, 0.5]).unwrap();
        let profile = rec.profile_csv(17);
        assert_eq!(profile.lines().count(), 1 + 2 * 8);
        assert!(profile.starts_with("t,site,prob\n"));
        let fid = rec.fidelity_csv(17);
        assert_eq!(fid.lines().count(), 3);
        assert!(fid.starts_with("t,fidelity\n"));
    }
}
