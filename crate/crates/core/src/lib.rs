//! holderlab: a spectral toolkit for Fourier multipliers acting on
//! function spaces with partial Holder conditions.
//!
//! The crate provides, on uniform periodic grids:
//!
//! * sampled fields with quadrature-normalized forward/inverse transforms
//!   ([`field`]);
//! * numerical estimation of per-axis Holder seminorms, anisotropic norms
//!   and modulus-of-continuity exponents ([`holder`]);
//! * a symbol algebra with anisotropic scaling, vanishing-slice and
//!   homogeneity diagnostics, and the model-problem symbol library
//!   ([`symbols`]);
//! * the anisotropic Littlewood-Paley machinery: dyadic partitions of
//!   unity, block decompositions, localized kernels and their weighted
//!   moment integrals ([`lpdecomp`]);
//! * numerical certification of multiplier sufficient conditions via
//!   lambda-swept annulus derivative norms ([`certify`]);
//! * multiplier application and Holder-gain experiments ([`apply`]);
//! * the model problems: Poisson, heat, and two half-space linearized
//!   Cahn-Hilliard problems with dynamic boundary conditions
//!   ([`problems`]).

pub mod apply;
pub mod certify;
pub mod error;
pub mod field;
pub mod holder;
pub mod lpdecomp;
pub mod problems;
pub mod report;
pub mod symbols;
pub mod synth;

pub use error::{Error, Result};
pub use field::{forward_transform, inverse_transform, sample, Grid, SampledField, Side};
pub use holder::{AnisotropyProfile, SeminormReport, WrapMode};
pub use symbols::Symbol;
