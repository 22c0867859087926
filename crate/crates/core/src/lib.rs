//! Interference and power-control models for large planar antenna surfaces.

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod powerctl;
pub mod precoding;
pub mod scenarios;

pub use asymptotics::{Aperture, UserLink};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, Direction, SteeringVector};
pub use powerctl::{AllocationProblem, PowerAllocation, UtilityKind};
pub use precoding::{AngleOffsets, Precoder, PrecoderKind, ZfGains};
pub use scenarios::{Column, Experiment, ResultTable, ScenarioConfig, TableFormat};
