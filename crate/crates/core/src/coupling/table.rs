//! Engineered coupling tables and the effective spin model.
//!
//! Each laser contributes `|g Ω_n / (2Δ_n)|² S[n](l)` to the XY exchange
//! `J(l)`; mirrored laser pairs (`𝒟` and `-𝒟` at equal `|Ω/Δ|`) cancel all
//! even-distance couplings exactly, leaving `J(l) ∝ Σ G² |S(l)| (1-(-1)^l)`.
//! A uniform Zeeman shift `B = Σ |Ω_n|²/(8Δ_n)` accompanies the exchange.

use num_complex::Complex64;
use serde::Serialize;

use crate::coupling::kernel::{s_kernel_finite, ExchangeKernel, RESONANCE_GUARD};
use crate::coupling::params::{detunings, AtomSpec, CavityArray, DriveLaser};
use crate::coupling::validity::check_validity;
use crate::error::{Error, Result};
use crate::numfmt;

/// Validity threshold applied by [`coupling_table`] unless bypassed: every
/// elimination inequality must hold at least marginally (ratio >= 1).
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 1.0;

/// Which exchange kernel backs a coupling table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelMode {
    /// Exact momentum sum on the `N`-site ring (the default).
    FiniteN,
    /// Infinite-ring exponential closed form; opt-in for `N → ∞` studies
    /// and cross-validation. Ignores the second ring path, so the antipodal
    /// entry omits its wrap-around image.
    Closed,
}

/// XY couplings by ring distance, `J(l)` for `l = 0 ..= N/2`.
///
/// The table is symmetric by construction (`J(l) = J(-l)`); the antipodal
/// coupling `J(N/2)` connects a single site pair and is stored once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTable {
    pub n_sites: usize,
    pub j_of_l: Vec<f64>,
}

impl CouplingTable {
    pub fn new(n_sites: usize, j_of_l: Vec<f64>) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "coupling table ring size must be even and >= 2, got {n_sites}"
            )));
        }
        if j_of_l.len() != n_sites / 2 + 1 {
            return Err(Error::InvalidInput(format!(
                "coupling table needs {} entries for N = {}, got {}",
                n_sites / 2 + 1,
                n_sites,
                j_of_l.len()
            )));
        }
        if let Some(bad) = j_of_l.iter().find(|j| !j.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coupling {bad}")));
        }
        Ok(Self { n_sites, j_of_l })
    }

    /// Nearest-neighbor-only table: `J(1) = j1`, all else zero.
    pub fn nearest_neighbor(n_sites: usize, j1: f64) -> Result<Self> {
        let mut j = vec![0.0; n_sites / 2 + 1];
        if j.len() > 1 {
            j[1] = j1;
        }
        Self::new(n_sites, j)
    }

    /// Largest stored distance, `N/2`.
    pub fn max_l(&self) -> usize {
        self.n_sites / 2
    }

    /// `J(l)`, zero beyond the stored range.
    pub fn j(&self, l: usize) -> f64 {
        self.j_of_l.get(l).copied().unwrap_or(0.0)
    }

    /// `J(l) / J(1)`.
    pub fn ratio_to_j1(&self, l: usize) -> f64 {
        self.j(l) / self.j(1)
    }

    /// Rescale so that `J(1)` equals `target_j1` (shape-preserving; used to
    /// put engineered tables in the dimensionless units of the ideal target).
    pub fn normalized_j1(&self, target_j1: f64) -> Result<Self> {
        let j1 = self.j(1);
        if j1 == 0.0 {
            return Err(Error::InvalidInput("cannot normalize: J(1) = 0".into()));
        }
        let scale = target_j1 / j1;
        Self::new(self.n_sites, self.j_of_l.iter().map(|j| j * scale).collect())
    }

    /// Re-target the table onto an `n_sites` ring: entries up to the new
    /// `N/2` are kept, missing ones are zero. Entries beyond the new ring
    /// are truncated.
    pub fn fit_to_ring(&self, n_sites: usize) -> Result<Self> {
        let j = (0..=n_sites / 2).map(|l| self.j(l)).collect();
        Self::new(n_sites, j)
    }

    /// CSV emission: header `l,J`, one row per stored distance, floats with
    /// `digits` significant digits.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("l,J\n");
        for (l, j) in self.j_of_l.iter().enumerate() {
            out.push_str(&format!("{l},{}\n", numfmt::sig(*j, digits)));
        }
        out
    }

    /// Parse the [`Self::to_csv`] format.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("l,J") => {}
            other => {
                return Err(Error::InvalidInput(format!(
                    "coupling CSV must start with header 'l,J', got {other:?}"
                )))
            }
        }
        let mut j_of_l = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (l_str, j_str) = line.split_once(',').ok_or_else(|| {
                Error::InvalidInput(format!("coupling CSV row {i}: missing comma"))
            })?;
            let l: usize = l_str.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("coupling CSV row {i}: bad distance {l_str:?}"))
            })?;
            if l != j_of_l.len() {
                return Err(Error::InvalidInput(format!(
                    "coupling CSV row {i}: expected distance {}, got {l}",
                    j_of_l.len()
                )));
            }
            let j: f64 = j_str.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("coupling CSV row {i}: bad coupling {j_str:?}"))
            })?;
            j_of_l.push(j);
        }
        if j_of_l.len() < 2 {
            return Err(Error::InvalidInput("coupling CSV has fewer than two rows".into()));
        }
        Self::new(2 * (j_of_l.len() - 1), j_of_l)
    }
}

/// Effective XY model left after both eliminations: exchange table plus the
/// uniform field `ω_ab/2 - B` per spin.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveModel {
    pub couplings: CouplingTable,
    /// Field coefficient `ω_ab/2 - B` (global phase in the single-flip
    /// sector).
    pub zeeman: f64,
    /// Light shift `B = Σ_n |Ω_n|² / (8Δ_n)`.
    pub b_shift: f64,
}

fn laser_weights(atom: &AtomSpec, det_delta_n: &[f64], lasers: &[DriveLaser]) -> Result<Vec<f64>> {
    let g2 = atom.g.norm_sqr();
    lasers
        .iter()
        .zip(det_delta_n)
        .enumerate()
        .map(|(n, (laser, delta))| {
            let r2 = laser.rabi.norm_sqr();
            if r2 == 0.0 {
                return Ok(0.0);
            }
            if *delta == 0.0 {
                return Err(Error::ZeroDetuning { laser: n });
            }
            Ok(g2 * r2 / (4.0 * delta * delta))
        })
        .collect()
}

fn table_from_weights(
    array: &CavityArray,
    weights: &[f64],
    d_n: &[f64],
    mode: KernelMode,
) -> Result<CouplingTable> {
    let half = array.n_sites / 2;
    let mut j_of_l = vec![0.0; half + 1];
    for (w, d) in weights.iter().zip(d_n) {
        if *w == 0.0 {
            continue;
        }
        match mode {
            KernelMode::FiniteN => {
                for (l, j) in j_of_l.iter_mut().enumerate() {
                    *j += w * s_kernel_finite(array, *d, 0, l)?;
                }
            }
            KernelMode::Closed => {
                let kernel = ExchangeKernel::new(array.t_hop, *d)?;
                for (l, j) in j_of_l.iter_mut().enumerate() {
                    *j += w * kernel.eval(l);
                }
            }
        }
    }
    CouplingTable::new(array.n_sites, j_of_l)
}

/// Engineered coupling distribution `J(l) = Σ_n |gΩ_n/(2Δ_n)|² S[n](l)`.
///
/// Runs [`check_validity`] at [`DEFAULT_VALIDITY_THRESHOLD`] first and
/// refuses to produce a table outside the elimination regime; use
/// [`coupling_table_forced`] to bypass the check deliberately.
pub fn coupling_table(
    array: &CavityArray,
    atom: &AtomSpec,
    lasers: &[DriveLaser],
    mode: KernelMode,
) -> Result<CouplingTable> {
    let report = check_validity(array, atom, lasers, DEFAULT_VALIDITY_THRESHOLD)?;
    if !report.pass {
        return Err(Error::ValidityFailure {
            worst_margin: report.worst_margin,
            family: report.worst_family,
            threshold: report.threshold,
        });
    }
    coupling_table_forced(array, atom, lasers, mode)
}

/// [`coupling_table`] without the validity gate.
pub fn coupling_table_forced(
    array: &CavityArray,
    atom: &AtomSpec,
    lasers: &[DriveLaser],
    mode: KernelMode,
) -> Result<CouplingTable> {
    if lasers.is_empty() {
        return table_from_weights(array, &[], &[], mode);
    }
    let det = detunings(array, atom, lasers)?;
    let weights = laser_weights(atom, &det.delta_n, lasers)?;
    table_from_weights(array, &weights, &det.d_n, mode)
}

/// Materialize a mirrored laser pair from `(𝒟, G)`: frequencies
/// `ω = ω_c - ω_ab ∓ 𝒟` and real Rabi amplitudes `Ω = G |Δ|`, so that both
/// members share `|Ω/Δ| = G` exactly. The positive-`𝒟` member comes first.
pub fn laser_pair(
    array: &CavityArray,
    atom: &AtomSpec,
    d: f64,
    g_ratio: f64,
) -> Result<(DriveLaser, DriveLaser)> {
    let edge = 2.0 * array.t_hop.abs() * (1.0 + RESONANCE_GUARD);
    if !(d > edge) {
        return Err(Error::BandResonance { d_abs: d.abs(), edge });
    }
    if !(g_ratio > 0.0 && g_ratio.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "pair drive ratio must be positive, got {g_ratio}"
        )));
    }
    let base = array.omega_c - atom.omega_ab;
    let mut members = Vec::with_capacity(2);
    for d_signed in [d, -d] {
        let omega_l = base - d_signed;
        let delta = atom.omega_e - atom.omega_ab - omega_l;
        if delta == 0.0 {
            return Err(Error::ZeroDetuning { laser: members.len() });
        }
        members.push(DriveLaser::new(
            Complex64::new(g_ratio * delta.abs(), 0.0),
            omega_l,
        ));
    }
    let negative = members.pop().unwrap();
    let positive = members.pop().unwrap();
    Ok((positive, negative))
}

const PAIR_TOL: f64 = 1e-9;

/// Coupling table from mirrored laser pairs:
/// `J(l) = (|g|²/4) Σ_m G_m² |S[m](l)| (1 - (-1)^l)`.
///
/// Every pair must satisfy the mirror construction (`𝒟` values opposite,
/// `|Ω/Δ|` equal, both to 1e-9 relative); the even-`l` couplings vanish
/// bit-exactly through the `1 - (-1)^l` factor. Agrees with
/// [`coupling_table_forced`] applied to the flattened laser list.
pub fn paired_coupling_table(
    array: &CavityArray,
    atom: &AtomSpec,
    pairs: &[(DriveLaser, DriveLaser)],
) -> Result<CouplingTable> {
    let g2 = atom.g.norm_sqr();
    let half = array.n_sites / 2;
    let mut j_of_l = vec![0.0; half + 1];

    for (idx, (a, b)) in pairs.iter().enumerate() {
        let violation = |detail: String| Error::PairingViolation { pair: idx, detail };
        let d_a = array.omega_c - atom.omega_ab - a.omega_l;
        let d_b = array.omega_c - atom.omega_ab - b.omega_l;
        let scale = d_a.abs().max(d_b.abs());
        if scale == 0.0 || (d_a + d_b).abs() > PAIR_TOL * scale {
            return Err(violation(format!(
                "detunings are not mirrored: D = {d_a:.6e} and {d_b:.6e}"
            )));
        }
        let mut ratios = [0.0; 2];
        for (slot, laser) in [a, b].into_iter().enumerate() {
            let delta = atom.omega_e - atom.omega_ab - laser.omega_l;
            if delta == 0.0 {
                return Err(Error::ZeroDetuning { laser: 2 * idx + slot });
            }
            ratios[slot] = laser.rabi.norm() / delta.abs();
        }
        let g_ratio = ratios[0].max(ratios[1]);
        if g_ratio == 0.0 {
            continue;
        }
        if (ratios[0] - ratios[1]).abs() > PAIR_TOL * g_ratio {
            return Err(violation(format!(
                "drive ratios differ: |Omega/Delta| = {:.6e} and {:.6e}",
                ratios[0], ratios[1]
            )));
        }
        let d_pos = d_a.abs();
        let weight = g2 / 4.0 * ratios[0] * ratios[1];
        for (l, j) in j_of_l.iter_mut().enumerate() {
            if l % 2 == 0 {
                continue; // 1 - (-1)^l = 0: even couplings cancel exactly
            }
            *j += weight * 2.0 * s_kernel_finite(array, d_pos, 0, l)?.abs();
        }
    }
    CouplingTable::new(array.n_sites, j_of_l)
}

/// Light shift `B = Σ_n |Ω_n|² / (8Δ_n)` over the active lasers; an empty
/// list gives zero.
pub fn zeeman_shift(atom: &AtomSpec, lasers: &[DriveLaser]) -> Result<f64> {
    let mut b = 0.0;
    for (n, laser) in lasers.iter().enumerate() {
        let r2 = laser.rabi.norm_sqr();
        if r2 == 0.0 {
            continue;
        }
        let delta = atom.omega_e - atom.omega_ab - laser.omega_l;
        if delta == 0.0 {
            return Err(Error::ZeroDetuning { laser: n });
        }
        b += r2 / (8.0 * delta);
    }
    Ok(b)
}

/// Assemble the full effective model (couplings + uniform field).
pub fn effective_model(
    array: &CavityArray,
    atom: &AtomSpec,
    lasers: &[DriveLaser],
    mode: KernelMode,
) -> Result<EffectiveModel> {
    let couplings = coupling_table(array, atom, lasers, mode)?;
    let b_shift = zeeman_shift(atom, lasers)?;
    Ok(EffectiveModel {
        couplings,
        zeeman: atom.omega_ab / 2.0 - b_shift,
        b_shift,
    })
}
