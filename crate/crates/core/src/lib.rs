//! Numerical laboratory for the Dirac quantization condition with a massive
//! photon.
//!
//! The crate is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`); the aliases at the crate root fix it to `f64`, which is what the
//! quoted tolerances assume.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ab_interference;
pub mod angmom;
pub mod error;
pub mod fields;
pub mod gauge;
pub mod numdiff;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod vec3;
pub mod vortex;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type Vec3 = vec3::Vec3<f64>;
pub type PhysicalConfig = fields::PhysicalConfig<f64>;
pub type TubeSpec = fields::TubeSpec<f64>;
pub type PairConfig = angmom::PairConfig<f64>;
pub type QuadratureSpec = angmom::QuadratureSpec<f64>;
pub type SweepQuadrature = angmom::SweepQuadrature<f64>;
pub type AngularMomentum = angmom::AngularMomentum<f64>;
pub type SweepTable = angmom::SweepTable<f64>;
pub type HiggsModel = vortex::HiggsModel<f64>;
pub type VortexProfile = vortex::VortexProfile<f64>;
pub type TensionResult = vortex::TensionResult<f64>;
pub type VortexSolution = vortex::VortexSolution<f64>;
pub type WaveGrid = ab_interference::WaveGrid<f64>;
pub type FluxLine = ab_interference::FluxLine<f64>;
pub type DoubleSlit = ab_interference::DoubleSlit<f64>;
