// Negated comparisons like !(x > 0.0) are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation of a 1D Gaussian matter-wave packet transmitted through an
//! infinitesimally thin absorbing barrier whose transparency follows a
//! prescribed protocol in time.
//!
//! The crate evaluates the transmitted wave function, pure-state and
//! finite-temperature Husimi phase-space distributions, their derived
//! observables (peak, dispersions, phase-space uncertainty, transmission
//! probability, modality), and the steepest-descent predictions that
//! cross-check the numerics in the semiclassical regime.

pub mod aperture;
pub mod error;
pub mod gaussian;
pub mod observables;
pub mod phys;
pub mod quadrature;
pub mod semiclassics;
pub mod transmission;

pub use aperture::{ApertureProtocol, TabulatedAperture};
pub use error::{Error, Result};
pub use observables::ObservableReport;
pub use phys::{
    regime_report, PhaseSpacePoint, RegimeFlags, RegimeReport, SimulationWindow, WavePacketSpec,
    ATOMIC_MASS_UNIT, HBAR,
};
pub use quadrature::{IntegralResult, QuadratureConfig};
pub use semiclassics::ShiftPrediction;
pub use transmission::{FieldKind, GridSpec, HusimiField, ProbeSpec};
