//! Two-dimensional time-harmonic multiple scattering by circular disks with
//! Fourier-basis boundary integral operators.
//!
//! Everything is generic over the real scalar type `T: Real`; the `*64` and
//! `*32` aliases below fix it to `f64` or `f32`.

pub mod basis;
pub mod dort;
pub mod error;
pub mod formulations;
pub mod geometry;
pub mod incidence;
pub mod operators;
pub mod postproc;
pub mod scalar;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::{Real, C};

pub type C64 = C<f64>;
pub type C32 = C<f32>;
pub type DiskConfig64 = geometry::DiskConfig<f64>;
pub type DiskConfig32 = geometry::DiskConfig<f32>;
pub type CoeffVector64 = basis::CoeffVector<f64>;
pub type CoeffVector32 = basis::CoeffVector<f32>;
pub type Formulation64 = formulations::Formulation<f64>;
pub type Formulation32 = formulations::Formulation<f32>;
pub type Problem64 = formulations::Problem<f64>;
pub type Problem32 = formulations::Problem<f32>;
pub type Solution64 = formulations::Solution<f64>;
pub type Solution32 = formulations::Solution<f32>;
pub type FieldEvaluator64 = postproc::FieldEvaluator<f64>;
pub type FieldEvaluator32 = postproc::FieldEvaluator<f32>;
pub type DenseOperator64 = operators::DenseOperator<f64>;
pub type DenseOperator32 = operators::DenseOperator<f32>;
