//! Radiation scattered by a single electron in strong laser fields.
//!
//! The crate follows one electron three ways:
//!
//! - as a classical point charge pushed through a plane-wave or tightly
//!   focused pulse ([`dynamics`]), whose far-field spectrum is computed from
//!   the trajectory ([`radiation`]);
//! - as an extended, coherently radiating Gaussian charge cloud
//!   ([`extended`]);
//! - as a quantum wave packet described by its Wigner function
//!   ([`wigner`]), which radiates as an incoherent ensemble of point emitters
//!   sampled from phase space ([`ensemble`]).
//!
//! Internal units are normalized to the laser (see [`units`]). The [`app`]
//! module drives batch runs from sectioned configuration files and is what the
//! `wpr` binary calls.

pub mod app;
pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod extended;
pub mod grid;
pub mod laser;
pub mod output;
pub mod radiation;
pub mod units;
pub mod vec3;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::AngularSpectralGrid;
pub use laser::{BeamConfig, BeamModel, FieldSample, LaserField};
pub use units::{Direction, UnitSystem};
pub use vec3::Vec3;
