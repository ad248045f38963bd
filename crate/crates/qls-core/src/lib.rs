//! Linear quantum systems in real quadrature form: types, the symplectic
//! form, physical realizability checks, and reference/test system builders.

pub mod error;
pub mod examples;
pub mod generate;
pub mod json;
pub mod passive;
mod scalar;
pub mod spectrum;
pub mod symplectic;
pub mod system;

pub use error::{JsonError, SystemError};
pub use examples::{
    example_cascade, example_cascade_default, example_optomech, example_optomech_default,
};
pub use generate::{random_realizable, random_realizable_with_outputs};
pub use passive::{annihilation_to_quadrature, PassiveComplexSystem};
pub use scalar::Real;
pub use symplectic::{symplectic, SymplecticForm};
pub use system::{PassiveResiduals, QuantumLinearSystem, RealizabilityResiduals};

/// Double-precision system, the type used by the CLI and file formats.
pub type System = QuantumLinearSystem<f64>;
/// Single-precision system.
pub type System32 = QuantumLinearSystem<f32>;
