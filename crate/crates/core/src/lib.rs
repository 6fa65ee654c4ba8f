//! Simulation core for sizing reconfigurable intelligent surfaces (RIS).
//!
//! The pipeline: [`catalog`] expands a deployment use case into concrete
//! BS/RIS/UE geometries, [`geometry`] lays out the panel, [`scattering`]
//! evaluates the coherent per-element bistatic response, [`link`] converts
//! power to SNR, and [`kpi`] aggregates sample pools into power/SNR
//! densities, outage probabilities and minimum-size recommendations.
//! [`replay`] runs the same model along a recorded UE trajectory.

pub mod catalog;
pub mod error;
pub mod geometry;
pub mod kpi;
pub mod link;
pub mod report;
pub mod replay;
pub mod scattering;

pub use catalog::{builtin_usecase, builtin_usecases, enumerate_realizations, load_usecase, UseCase};
pub use error::{Error, Result};
pub use geometry::{NodeLayout, ScenarioGeometryInput, Vec3};
pub use kpi::{Criterion, KpiPool, RisSize, SizingResult};
pub use link::Decibel;
pub use scattering::{PhaseStates, RadioParams, RisPanel};
