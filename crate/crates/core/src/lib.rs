//! Additive-error dimension reduction for finite point sets in `L_p`.
//!
//! Given `n` points living in a finite weighted `L_p(μ)` space (each point is
//! a vector of values against `m` weighted atoms), this crate produces an
//! embedding into plain `ℓ_p^d` whose pairwise *p-th-power* distances match
//! the originals up to an additive error `ε`:
//!
//! ```text
//! | ‖y_i − y_j‖_p^p  −  ‖x_i − x_j‖_{L_p(μ)}^p |  ≤  ε    for all i < j.
//! ```
//!
//! The target dimension depends on how *incompressible* the input is — the
//! `L_p` norm of the pointwise maximum of the set — and only logarithmically
//! on `n`. The pipeline:
//!
//! 1. [`measure::change_of_measure`] reweights the atoms so the pointwise
//!    maximum becomes constant, without changing any pairwise distance.
//! 2. [`cone::decompose`] writes the distance matrix as a convex combination
//!    of single-atom "extreme" matrices, one per atom.
//! 3. [`sampler`] picks `d` atoms whose average reconstructs the distance
//!    matrix: uniformly at random ([`sampler::random_sample`]), by a
//!    deterministic one-step-lookahead potential minimization
//!    ([`sampler::greedy_sample`]), or by doubling `d` until the target error
//!    is met ([`sampler::adaptive_sample`]).
//! 4. [`embed::reduce`] assembles the coordinates and the reusable linear
//!    operator behind them; [`embed::verify`] re-checks an embedding against
//!    its source set pair by pair.
//!
//! [`gen`] builds test inputs (uniform samples from the `ℓ_p^N` ball, Haar
//! rotations, Walsh systems) and [`bound`] evaluates the theoretical
//! dimension bounds in both directions.
//!
//! # Example
//!
//! ```
//! use lp_reduce::point_set::PointSet;
//! use lp_reduce::sampler::{SamplerConfig, SamplerMode};
//! use lp_reduce::embed::{reduce, verify};
//!
//! // Four points over three atoms of a probability measure, p = 1.
//! let ps = PointSet::new(
//!     1.0,
//!     vec![0.5, 0.25, 0.25],
//!     vec![
//!         vec![0.0, 0.0, 0.0],
//!         vec![1.0, -1.0, 0.5],
//!         vec![0.25, 2.0, -0.75],
//!         vec![-1.0, 0.5, 1.5],
//!     ],
//! )
//! .unwrap();
//!
//! let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.05);
//! cfg.d_override = Some(256);
//! let out = reduce(&ps, &cfg).unwrap();
//! assert!(out.embedding.achieved_eps <= 0.05);
//!
//! let report = verify(&ps, &out.embedding).unwrap();
//! assert_eq!(report.pairs_violating(0.05), 0);
//! ```
//!
//! All randomness flows through explicitly seeded ChaCha8 generators, so
//! every operation here is reproducible from its arguments alone.

pub mod bound;
pub mod cone;
pub mod embed;
mod error;
pub mod gen;
pub mod measure;
pub mod point_set;
pub mod sampler;

pub use error::{Error, Result};
pub use point_set::{sup_additive_distortion, DistanceMatrix, PointSet};
