//! The pulsed coincidence experiment and the double-pulse rate formulas.
//!
//! [`simulate_pulse_train`] draws zero, one or two pairs per pump pulse,
//! routes mode-a photons through a 50-50 coupler onto two threshold
//! detectors and histograms START (D+) to STOP (D−) delays. The central
//! peak collects same-pulse four-photon events (`½P₄`), the side peaks
//! pairs from consecutive pulses (`¼P₂²`), so `R₀/R_side = 1 + χ`.
//!
//! [`appendix_rates`] and [`verify_time_structure`] cover the double-pulse
//! analysis of the same ratio from the spectral moments.

mod appendix;
mod montecarlo;
mod time_structure;

pub use appendix::{appendix_rates, appendix_rates_from, AppendixRates};
pub use montecarlo::{
    simulate_pulse_train, ExperimentConfig, Peak, PeakSummary, RunSummary, TacHistogram, TruncationMode,
    BATCH_PULSES, DEFAULT_BIN_NS, DEFAULT_GATE_NS, DEFAULT_PERIOD_NS,
};
pub use time_structure::{verify_time_structure, TimeStructureConfig, TimeStructureReport, MIN_SEPARATION_WIDTHS};
