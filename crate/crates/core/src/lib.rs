//! Engineered long-range XY spin rings from a driven coupled-cavity array.
//!
//! A ring of `N` coupled single-mode cavities, each holding one Λ-type
//! three-level atom, turns into an effective XY spin model once the atomic
//! excited level and the photon band are adiabatically eliminated. The photon
//! tunnelling rate `T` broadens the cavity line into a band
//! `ω_k = ω_c - 2T cos k`, and every driving laser `n` contributes an
//! exchange kernel that decays exponentially with the ring distance between
//! two atoms. Tuning the lasers therefore tunes the coupling distribution
//! `J(l)` directly, which is enough to sculpt the single-magnon dispersion,
//! e.g. into the linear, photon-like form that transports a spin flip without
//! spreading.
//!
//! The crate is organized around that pipeline:
//!
//! - [`coupling`]: physical parameter records, detuning bookkeeping, validity
//!   checks for the elimination regime, exchange kernels, and the engineered
//!   coupling table `J(l)`.
//! - [`dispersion`]: single-magnon dispersion curves, the ideal linear-target
//!   couplings, group velocities, and linearity diagnostics.
//! - [`optimizer`]: derivative-free fitting of drive parameters to a target
//!   coupling distribution, plus the two built-in drive presets.
//! - [`dynamics`]: exact single-magnon evolution on the ring, transfer
//!   fidelities, propagation profiles, and revival searches.
//! - [`oracle`]: brute-force integration of the full atom-cavity
//!   single-excitation dynamics, used to validate the effective model.
//!
//! All frequencies are quoted in units of the tunnelling rate `T` (the
//! canonical setup uses `t_hop = 1`); only ratios to `T` enter any result.

pub mod coupling;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod numfmt;
pub mod optimizer;
pub mod oracle;
pub mod ring;

pub use coupling::{
    check_validity, coupling_table, coupling_table_forced, detunings, effective_model,
    laser_pair, paired_coupling_table, photon_band, s_kernel_closed, s_kernel_finite,
    s_kernel_nn, zeeman_shift, AtomSpec, CavityArray, CouplingTable, DetuningSet, DriveLaser,
    EffectiveModel, ExchangeKernel, KernelMode, ValidityReport,
};
pub use dispersion::{
    group_velocity, ideal_linear_couplings, linearity_error, magnon_dispersion, DispersionCurve,
    KGrid, LinearityReport,
};
pub use dynamics::{
    evolve, evolve_dense, propagation_profile, revival_search, single_magnon_hamiltonian,
    transfer_fidelity, EvolutionRecord, MagnonState, RevivalWindow,
};
pub use error::{Error, Result};
pub use optimizer::{
    evaluate_objective, fit_drives, paper_presets, preset_system, FitProblem, FitResult,
    PairParams,
};
pub use oracle::{
    compare_with_effective, full_hamiltonian_at, integrate_full, leakage, margin_scaled_system,
    FullState, FullTrajectory, InfidelityReport, IntegrationParams,
};
