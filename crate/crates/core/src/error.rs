//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation received parameters violating a type
    /// invariant (odd ring size, empty laser list, bad norm, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two active driving lasers share the same frequency, so a pairwise
    /// laser detuning vanishes and the elimination conditions cannot hold.
    #[error("DegenerateLasers: active lasers {n} and {m} have equal frequency")]
    DegenerateLasers { n: usize, m: usize },

    /// A two-photon detuning sits inside (or too close to) the photon band,
    /// where a mode denominator of the exchange kernel may vanish.
    #[error("BandResonance: |D| = {d_abs:.6} is inside the photon band (requires |D| > {edge:.6})")]
    BandResonance { d_abs: f64, edge: f64 },

    /// The adiabatic-elimination validity check failed at the configured
    /// threshold.
    #[error(
        "ValidityFailure: worst margin {worst_margin:.6} ({family}) below threshold {threshold}"
    )]
    ValidityFailure {
        worst_margin: f64,
        family: &'static str,
        threshold: f64,
    },

    /// A laser with nonzero Rabi frequency is exactly on atomic resonance.
    #[error("ZeroDetuning: active laser {laser} has zero single-photon detuning")]
    ZeroDetuning { laser: usize },

    /// A laser pair does not satisfy the mirrored-detuning construction.
    #[error("PairingViolation: pair {pair}: {detail}")]
    PairingViolation { pair: usize, detail: String },

    /// The fit bounds describe an empty box.
    #[error("NoFeasibleStart: fit bounds are empty")]
    NoFeasibleStart,

    /// Unknown drive preset name.
    #[error("UnknownPreset: {0:?} (expected \"nL2\" or \"nL4\")")]
    UnknownPreset(String),

    /// A fit range contains no grid points.
    #[error("EmptyRange: no dispersion samples inside the fit range")]
    EmptyRange,

    /// A revival search window is empty.
    #[error("EmptyWindow: revival search window is empty")]
    EmptyWindow,

    /// The integrator base step does not resolve the fastest phase.
    #[error("StepTooLarge: dt = {dt:.3e} exceeds 0.1/max-frequency = {max_dt:.3e}")]
    StepTooLarge { dt: f64, max_dt: f64 },

    /// Trajectory and effective model describe different ring sizes.
    #[error("GridMismatch: effective model has {expected} sites, trajectory has {got}")]
    GridMismatch { expected: usize, got: usize },
}
