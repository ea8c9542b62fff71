//! Four-photon statistics of pulsed parametric down-conversion.
//!
//! The stimulation parameter χ interpolates between two independent pairs
//! (χ = 0, Poissonian) and a fully stimulated four-photon state (χ = 1)
//! through `P₄ = (P₂²/2)(1 + χ)`. This crate computes χ from arbitrary
//! pump, phase-matching and filter spectra ([`moments`]), gives the exact
//! integer-N Fock-space limits ([`fock`]) and simulates the coincidence
//! measurement that recovers `1 + χ` as a ratio of histogram peaks
//! ([`coincidence`]).
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below name the concrete instantiations.

pub mod coincidence;
pub mod error;
pub mod fock;
pub mod moments;
pub mod quadrature;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

pub type FrequencyGrid64 = spectra::FrequencyGrid<f64>;
pub type GaussianPump64 = spectra::GaussianPump<f64>;
pub type GaussianFilter64 = spectra::GaussianFilter<f64>;
pub type PhaseMatching64 = spectra::PhaseMatching<f64>;
pub type JointAmplitude64 = spectra::JointAmplitude<f64>;
pub type FilterProfile64 = spectra::FilterProfile<f64>;
pub type MomentConfig64 = moments::MomentConfig<f64>;
pub type KernelMatrix64 = moments::KernelMatrix<f64>;
pub type MomentResult64 = moments::MomentResult<f64>;
pub type SqueezedProcess64 = fock::SqueezedProcess<f64>;
pub type MultiProcessState64 = fock::MultiProcessState<f64>;
pub type FourPhotonDecomposition64 = fock::FourPhotonDecomposition<f64>;
pub type AppendixRates64 = coincidence::AppendixRates<f64>;
pub type TimeStructureReport64 = coincidence::TimeStructureReport<f64>;

pub type FrequencyGrid32 = spectra::FrequencyGrid<f32>;
pub type GaussianPump32 = spectra::GaussianPump<f32>;
pub type GaussianFilter32 = spectra::GaussianFilter<f32>;
pub type JointAmplitude32 = spectra::JointAmplitude<f32>;
pub type MomentConfig32 = moments::MomentConfig<f32>;
pub type MomentResult32 = moments::MomentResult<f32>;
pub type MultiProcessState32 = fock::MultiProcessState<f32>;
