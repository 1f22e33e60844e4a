//! Regime check for the two-stage adiabatic elimination.
//!
//! The elimination assumes two tiers of inequalities: the single-photon
//! detunings `δ_k`, `Δ_n` must dominate every coupling and every slow
//! frequency (`g`, `Ω_m`, `Γ_m^q`, `ω_lm`), and the slow frequencies
//! `Γ_n^k`, `ω_nm`, `Γ_n^k - ω_lm` must in turn dominate the second-order
//! rates `gΩ_p/Δ_p`, `Ω_p²/Δ_p`. Each (LHS family, RHS family) pair gets a
//! margin `min|LHS| / max|RHS|`; the check passes when every margin clears
//! the caller's threshold.
//!
//! Inert lasers (`Ω = 0`) contribute no terms to the effective model and are
//! excluded from every family.

use serde::Serialize;

use crate::coupling::params::{detunings, AtomSpec, CavityArray, DriveLaser};
use crate::error::{Error, Result};

/// Sentinel margin reported when an RHS family is identically zero.
pub const MARGIN_CAP: f64 = 1e18;

/// One (LHS family, RHS family) margin.
#[derive(Debug, Clone, Serialize)]
pub struct MarginEntry {
    /// Stable family identifier, e.g. `"min|Delta_n| / max|omega_nm|"`.
    pub family: &'static str,
    pub lhs_min: f64,
    pub rhs_max: f64,
    /// `lhs_min / rhs_max`, capped at [`MARGIN_CAP`] when `rhs_max == 0`.
    pub margin: f64,
    /// Whether the RHS scales with the couplings `g`, `Ω` (as opposed to
    /// being fixed by the frequency arrangement alone).
    pub coupling_dependent: bool,
}

/// Full margin table of the elimination conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub entries: Vec<MarginEntry>,
    pub worst_margin: f64,
    pub worst_family: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl ValidityReport {
    /// Smallest margin among the coupling-dependent families only. This is
    /// the knob that scales with `g`, `Ω` at fixed laser geometry.
    pub fn worst_coupling_margin(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.coupling_dependent)
            .map(|e| e.margin)
            .fold(MARGIN_CAP, f64::min)
    }
}

fn margin_of(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        MARGIN_CAP
    } else {
        (lhs / rhs).min(MARGIN_CAP)
    }
}

/// Evaluate every elimination inequality over the whole momentum grid and
/// all active lasers.
///
/// Errors with [`Error::DegenerateLasers`] when two active lasers share a
/// frequency exactly: a vanishing `ω_nm` breaks the second tier structurally,
/// no matter how weak the drive.
pub fn check_validity(
    array: &CavityArray,
    atom: &AtomSpec,
    lasers: &[DriveLaser],
    threshold: f64,
) -> Result<ValidityReport> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "validity threshold must be positive and finite, got {threshold}"
        )));
    }

    let active: Vec<&DriveLaser> = lasers.iter().filter(|l| l.is_active()).collect();
    for (i, ln) in active.iter().enumerate() {
        for (j, lm) in active.iter().enumerate().skip(i + 1) {
            if ln.omega_l == lm.omega_l {
                return Err(Error::DegenerateLasers { n: i, m: j });
            }
        }
    }

    let g_abs = atom.g.norm();
    let delta_k: Vec<f64> = array
        .momenta()
        .into_iter()
        .map(|k| atom.omega_e - array.omega_c + 2.0 * array.t_hop * k.cos())
        .collect();
    let delta_k_min = delta_k.iter().fold(f64::MAX, |a, d| a.min(d.abs()));

    // Per-active-laser quantities.
    let owned: Vec<DriveLaser> = active.iter().map(|l| (*l).clone()).collect();
    let det = if owned.is_empty() {
        None
    } else {
        Some(detunings(array, atom, &owned)?)
    };

    let mut rabi_max = 0.0_f64;
    let mut delta_n_min = f64::MAX;
    let mut gamma_min = f64::MAX;
    let mut gamma_max = 0.0_f64;
    let mut omega_min = f64::MAX;
    let mut omega_max = 0.0_f64;
    let mut gamma_omega_min = f64::MAX;
    let mut second_g_rabi = 0.0_f64;
    let mut second_rabi_sq = 0.0_f64;
    let mut have_pairs = false;

    if let Some(det) = &det {
        for (p, laser) in owned.iter().enumerate() {
            let rabi = laser.rabi.norm();
            rabi_max = rabi_max.max(rabi);
            let dn = det.delta_n[p];
            if dn == 0.0 {
                return Err(Error::ZeroDetuning { laser: p });
            }
            delta_n_min = delta_n_min.min(dn.abs());
            second_g_rabi = second_g_rabi.max((g_abs * rabi / dn).abs());
            second_rabi_sq = second_rabi_sq.max((rabi * rabi / dn).abs());
        }
        for row in &det.gamma_nk {
            for g in row {
                gamma_min = gamma_min.min(g.abs());
                gamma_max = gamma_max.max(g.abs());
            }
        }
        let n_l = owned.len();
        for n in 0..n_l {
            for m in 0..n_l {
                if n == m {
                    continue;
                }
                have_pairs = true;
                let w = det.omega_nm[n][m];
                omega_min = omega_min.min(w.abs());
                omega_max = omega_max.max(w.abs());
                for row in &det.gamma_nk {
                    for g in row {
                        gamma_omega_min = gamma_omega_min.min((g - w).abs());
                    }
                }
            }
        }
    }

    let mut entries = Vec::new();
    let mut push = |family, lhs: f64, rhs: f64, coupling_dependent: bool| {
        entries.push(MarginEntry {
            family,
            lhs_min: lhs,
            rhs_max: rhs,
            margin: margin_of(lhs, rhs),
            coupling_dependent,
        });
    };

    // First tier: fast detunings vs couplings and slow frequencies.
    push("min|delta_k| / |g|", delta_k_min, g_abs, true);
    if !owned.is_empty() {
        push("min|delta_k| / max|rabi|", delta_k_min, rabi_max, true);
        push("min|delta_k| / max|gamma_nk|", delta_k_min, gamma_max, false);
        push("min|Delta_n| / |g|", delta_n_min, g_abs, true);
        push("min|Delta_n| / max|rabi|", delta_n_min, rabi_max, true);
        push("min|Delta_n| / max|gamma_nk|", delta_n_min, gamma_max, false);
        if have_pairs {
            push("min|delta_k| / max|omega_nm|", delta_k_min, omega_max, false);
            push("min|Delta_n| / max|omega_nm|", delta_n_min, omega_max, false);
        }
    }

    // Second tier: slow frequencies vs second-order rates.
    if !owned.is_empty() {
        push("min|gamma_nk| / max|g·rabi/Delta|", gamma_min, second_g_rabi, true);
        push("min|gamma_nk| / max|rabi²/Delta|", gamma_min, second_rabi_sq, true);
        if have_pairs {
            push("min|omega_nm| / max|g·rabi/Delta|", omega_min, second_g_rabi, true);
            push("min|omega_nm| / max|rabi²/Delta|", omega_min, second_rabi_sq, true);
            push(
                "min|gamma_nk - omega_nm| / max|g·rabi/Delta|",
                gamma_omega_min,
                second_g_rabi,
                true,
            );
            push(
                "min|gamma_nk - omega_nm| / max|rabi²/Delta|",
                gamma_omega_min,
                second_rabi_sq,
                true,
            );
        }
    }

    let (worst_margin, worst_family) = entries
        .iter()
        .map(|e| (e.margin, e.family))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((MARGIN_CAP, "none"));
    let pass = worst_margin >= threshold;

    Ok(ValidityReport { entries, worst_margin, worst_family, threshold, pass })
}
