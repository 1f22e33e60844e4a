//! Photon-mediated exchange kernels.
//!
//! Eliminating the photon band leaves each laser `n` with an exchange
//! profile between atoms `i` and `j`,
//!
//! ```text
//! S[n](i, j) = (1/N) Σ_k e^{ik(i-j)} / (𝒟_n - 2T cos k),
//! ```
//!
//! which on an infinite chain closes to a pure exponential
//! `σ^{l+1} e^{-l/ξ} / sqrt(𝒟² - 4T²)` in the ring distance `l`, with decay
//! length `ξ` set by how far `𝒟_n` sits from the photon band and sign
//! `σ = sign(𝒟/T)`. Kernels are only defined off-resonant from the band:
//! `|𝒟| > 2|T|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::coupling::params::CavityArray;
use crate::error::{Error, Result};
use crate::ring;

/// Relative guard keeping kernel detunings away from the band edge:
/// `|𝒟| > 2|T| (1 + RESONANCE_GUARD)` is required everywhere.
pub const RESONANCE_GUARD: f64 = 1e-6;

fn band_edge(t_hop: f64) -> f64 {
    2.0 * t_hop.abs() * (1.0 + RESONANCE_GUARD)
}

fn check_off_resonant(t_hop: f64, d_n: f64) -> Result<()> {
    let edge = band_edge(t_hop);
    if !(d_n.is_finite() && d_n.abs() > edge) {
        return Err(Error::BandResonance { d_abs: d_n.abs(), edge });
    }
    Ok(())
}

/// Closed-form (infinite-ring) exchange kernel for one laser.
#[derive(Debug, Clone, Serialize)]
pub struct ExchangeKernel {
    /// Two-photon detuning `𝒟_n` from the cavity line.
    pub d_n: f64,
    /// Decay length in sites: `exp(-1/ξ) = |𝒟/2T| - sqrt((𝒟/2T)² - 1)`.
    pub xi: f64,
    /// `σ = sign(𝒟/T)`; the kernel carries `σ^{l+1}`.
    pub sigma: f64,
    /// `1 / sqrt(𝒟² - 4T²)`.
    pub prefactor: f64,
}

impl ExchangeKernel {
    pub fn new(t_hop: f64, d_n: f64) -> Result<Self> {
        check_off_resonant(t_hop, d_n)?;
        let ratio = (d_n / (2.0 * t_hop)).abs();
        let decay = ratio - (ratio * ratio - 1.0).sqrt();
        let xi = -1.0 / decay.ln();
        let sigma = if d_n / t_hop > 0.0 { 1.0 } else { -1.0 };
        let prefactor = 1.0 / (d_n * d_n - 4.0 * t_hop * t_hop).sqrt();
        Ok(Self { d_n, xi, sigma, prefactor })
    }

    /// `exp(-1/ξ)`, the per-site decay factor.
    pub fn decay_factor(&self) -> f64 {
        (-1.0 / self.xi).exp()
    }

    /// Kernel value at ring distance `l ≥ 0`.
    pub fn eval(&self, l: usize) -> f64 {
        let sign = if self.sigma > 0.0 || l % 2 == 1 { 1.0 } else { -1.0 };
        sign * (-(l as f64) / self.xi).exp() * self.prefactor
    }
}

/// Exact finite-ring kernel: the momentum sum over the `N` grid modes.
///
/// The imaginary parts cancel pairwise between `k` and `2π - k` on the
/// symmetric grid; the residual is asserted small before being discarded.
/// The value depends on `(i, j)` only through the ring distance.
pub fn s_kernel_finite(array: &CavityArray, d_n: f64, i: usize, j: usize) -> Result<f64> {
    check_off_resonant(array.t_hop, d_n)?;
    let l = ring::ring_distance(array.n_sites, i, j) as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in array.momenta() {
        let denom = d_n - 2.0 * array.t_hop * k.cos();
        sum += Complex64::from_polar(1.0, k * l) / denom;
    }
    sum /= array.n_sites as f64;
    assert!(
        sum.im.abs() <= 1e-12 * (1.0 + sum.re.abs()),
        "finite kernel: imaginary residue {} did not cancel",
        sum.im
    );
    Ok(sum.re)
}

/// Closed-form kernel value at ring distance `l ≥ 0` (infinite-ring limit).
pub fn s_kernel_closed(t_hop: f64, d_n: f64, l: usize) -> Result<f64> {
    Ok(ExchangeKernel::new(t_hop, d_n)?.eval(l))
}

/// Narrow-band kernel `δ_{l,0}/𝒟 + δ_{l,1} T/𝒟²`, valid for `|𝒟| >> 2|T|`.
/// No resonance guard is applied; the truncation is the caller's concern.
pub fn s_kernel_nn(d_n: f64, t_hop: f64, l: usize) -> f64 {
    match l {
        0 => 1.0 / d_n,
        1 => t_hop / (d_n * d_n),
        _ => 0.0,
    }
}
