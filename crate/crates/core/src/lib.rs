//! Pseudospectral simulation engine for a quantum Otto cycle running on a
//! trapped, interacting Bose-Einstein condensate.
//!
//! The crate is organised around the four strokes of the cycle:
//!
//! * [`spectral`] — periodic cubic grid, 3D FFTs, 2/3-rule dealiasing,
//!   spectral derivatives, Helmholtz decomposition, shell spectra and the
//!   smoothly continued harmonic trap.
//! * [`gpe`] — Gross-Pitaevskii time evolution (RK4) used for the adiabatic
//!   expansion/compression strokes with a time-dependent trap frequency.
//! * [`sgle`] — stochastic Ginzburg-Landau thermalization (Euler-Maruyama)
//!   used for the isochoric contact with the hot/cold baths, including the
//!   chemical-potential feedback controller and stationarity detection.
//! * [`diagnostics`] — Madelung transform, five-way energy decomposition and
//!   density histograms.
//! * [`otto`] — cycle orchestration, work/heat bookkeeping, Monte Carlo
//!   efficiency statistics and parameter sweeps.
//! * [`io`] — run configuration, binary checkpoints, CSV emitters and run
//!   directory management.
//!
//! Everything is dimensionless: unit mass, unit reference density, and a
//! baseline interaction strength chosen so the speed of sound is 1. See
//! [`gpe::PhysicalParams`] for the unit system.

pub mod diagnostics;
pub mod error;
pub mod gpe;
pub mod io;
pub mod otto;
pub mod sgle;
pub mod spectral;
pub mod util;

pub use diagnostics::{DensityPdf, EnergyBreakdown};
pub use error::Error;
pub use gpe::{PhysicalParams, StrokeSchedule, WaveFunction};
pub use otto::{CycleConfig, CycleRecord, EfficiencyDistribution};
pub use sgle::{BathParams, StationarityCriterion};
pub use spectral::{ComplexField3D, RealField3D, SpectralGrid, SpectralOps, VectorField3D};
