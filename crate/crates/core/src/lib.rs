//! Blaschke products on the unit disc and weak-type function-space diagnostics.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

pub mod blaschke;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod functions;
pub mod geometry;
pub mod measure;
pub mod norms;
pub mod report;
pub mod scalar;
pub mod sum;
pub mod zeros;

pub use scalar::Real;

pub type DiscPoint64 = geometry::DiscPoint<f64>;
pub type DiscPoint32 = geometry::DiscPoint<f32>;
pub type ZeroSequence64 = blaschke::ZeroSequence<f64>;
pub type ZeroSequence32 = blaschke::ZeroSequence<f32>;
pub type BlaschkeEvaluator64 = blaschke::BlaschkeEvaluator<f64>;
pub type BlaschkeEvaluator32 = blaschke::BlaschkeEvaluator<f32>;
pub type PolarGrid64 = measure::PolarGrid<f64>;
pub type PolarGrid32 = measure::PolarGrid<f32>;
pub type CellField64 = measure::CellField<f64>;
pub type CellField32 = measure::CellField<f32>;
pub type NormEstimate64 = norms::NormEstimate<f64>;
pub type NormEstimate32 = norms::NormEstimate<f32>;
