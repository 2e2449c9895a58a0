//! Simulation of strictly α-stable random elements of convex cones.
//!
//! A convex cone here is an abelian semigroup with a neutral element, an
//! involution and an action of the positive reals. Every strictly stable
//! element that admits a Lévy measure is generated by the points
//! `Γ_i^{-1/α} ε_i`, where `Γ_i` are the arrival times of a unit-rate
//! Poisson process and `ε_i` are i.i.d. draws from a spectral law. This
//! crate builds those series for five concrete cones and ships the
//! numerical and statistical machinery that checks the resulting laws.
//!
//! Module map:
//! - [`cone`]: elements, cone algebra and characters
//! - [`polar`]: the radial law `θ_α`, transversals and polar coordinates
//! - [`lepage`]: truncated series, bias bounds and Laplace exponents
//! - [`cones`]: factory for the concrete cones
//! - [`verify`]: ECF estimation, stability and homogeneity tests

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod cones;
mod error;
pub mod expm;
pub mod lepage;
pub mod polar;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use cone::{
    add, char_eval, involve, scale, Atom, Character, ConeDescriptor, ConeElement, Involution, Jump,
    ScalingKind, SemigroupOp, StepFunction, TimeGrid,
};
pub use cones::{make_cone, Cone, ConeKind, ConeSpec};
pub use error::{Error, Result};
pub use polar::{compose, decompose, tau, PolarPair, RadialLaw, Transversal};
pub use rng::{stream_rng, StreamRng};
pub use spectral::SpectralSampler;
pub use verify::{TestBudget, VerificationReport};
pub use lepage::{Series, SeriesSample};
