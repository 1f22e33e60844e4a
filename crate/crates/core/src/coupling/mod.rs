//! Map physical cavity/atom/laser parameters to the effective XY coupling
//! distribution `J(l)` and validate the adiabatic-elimination regime.

mod kernel;
mod params;
mod table;
mod validity;

pub use kernel::{s_kernel_closed, s_kernel_finite, s_kernel_nn, ExchangeKernel, RESONANCE_GUARD};
pub use params::{detunings, photon_band, AtomSpec, CavityArray, DetuningSet, DriveLaser};
pub use table::{
    coupling_table, coupling_table_forced, effective_model, laser_pair, paired_coupling_table,
    zeeman_shift, CouplingTable, EffectiveModel, KernelMode, DEFAULT_VALIDITY_THRESHOLD,
};
pub use validity::{check_validity, MarginEntry, ValidityReport, MARGIN_CAP};
