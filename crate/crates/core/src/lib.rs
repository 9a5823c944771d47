//! Arbitrary-precision orthogonal polynomials for the deformed Hermite weight
//! with one jump, `w(z) = e^(-z² + t z) |z - t|^γ (A + B θ(z - t))`.

pub mod error;
pub mod fd;
pub mod identities;
pub mod ladder;
pub mod moments;
pub mod num;
pub mod orthopoly;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod suite;
pub mod weight;

pub use error::{Error, Result};
pub use fd::{FDScheme, FdContext, FdOrder};
pub use moments::{Backend, MomentTable};
pub use orthopoly::{AuxQuantities, RecurrenceData};
pub use pipeline::{compute, Computation};
pub use report::{IdentityId, ResidualReport};
pub use weight::{NumericPolicy, WeightParams};
pub use suite::{run_suites, Suite, SuiteOptions};
