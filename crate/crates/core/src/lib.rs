//! Foot–mud interaction forces for legged locomotion on soft, wet ground.
//!
//! The crate couples a thixotropic mud rheology (immediate power-law
//! resistance, structure-dependent viscosity, sealed-cavity suction) with
//! resistive-force integration over the submerged foot surface. Closed forms
//! cover flat, semi-cylindrical and semi-spherical feet; arbitrary triangle
//! meshes are integrated numerically.

pub mod analysis;
pub mod calibration;
pub mod config;
pub mod error;
pub mod force;
pub mod geometry;
pub mod lm;
pub mod rheology;
pub mod trajectory;

pub use error::{MudError, Result};
pub use force::{DirectionalStresses, ResultantForce};
pub use geometry::FootShape;
pub use rheology::{MudDirectionalParams, RheologyState};
pub use trajectory::{simulate, ForceTrace, MotionProfile, Phase, SimulationOptions};
