//! Numerical core for divide-and-conquer ReLU classification experiments.
//!
//! Pieces:
//! - [`mlp`]: a dense ReLU multilayer perceptron with hand-derived
//!   backpropagation and SGD (momentum, weight decay, step LR decay),
//! - [`synth`]: a 2-d synthetic benchmark with a cosine decision boundary,
//!   a designed localized noise-exponent profile, and exact distribution
//!   oracles (conditional probability, densities, Bayes risk),
//! - [`grid`], [`localized`]: grid partition of the reduced coordinates and
//!   per-cell local classifiers with routed prediction,
//! - [`pwl`], [`stitch`]: exact compilation of piecewise-linear functions to
//!   one-hidden-layer ReLU nets and the windowed combination that merges
//!   boundary-form local nets into a single network,
//! - [`theory`]: estimators for separation exponents, low-separation
//!   measures, and set distances between boundary-fragment regions,
//! - [`risk`]: misclassification and excess-risk evaluation against the
//!   exact oracle, with a deterministic chunked Monte-Carlo protocol.
//!
//! The crate is `no_std`-compatible (`alloc` required). Transcendental math
//! goes through `libm`, so a given build produces bit-identical numbers
//! regardless of the platform's system math library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod fit;
pub mod grid;
mod linalg;
pub mod localized;
pub mod mlp;
pub mod pwl;
pub mod quad;
pub mod risk;
pub mod seeds;
pub mod stitch;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
