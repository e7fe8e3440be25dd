//! Change of measure: reweight the atoms so the pointwise maximum of the set
//! becomes constant, without moving any pairwise distance.
//!
//! With envelope `M_k = max_i |values[i][k]|` and `Z = Σ_k w_k·M_k^p`, the
//! density `f_k = M_k^p / Z` integrates to 1 against the original weights.
//! Atoms are reweighted to `ν_k = w_k·f_k` and values rescaled to
//! `values[i][k] · f_k^(−1/p)` (= `values[i][k] · Z^(1/p) / M_k`), which
//!
//! * preserves every pairwise p-th-power distance exactly (each summand picks
//!   up the factor `f_k / f_k = 1`),
//! * flattens the envelope of the result to the constant `Z^(1/p)` — the
//!   incompressibility of the input — which is what makes uniform-radius
//!   sampling in [`crate::sampler`] effective,
//! * is idempotent: running it again yields density identically 1.
//!
//! Atoms where the envelope vanishes (every point is zero there) contribute
//! nothing to any distance and are dropped; `kept` records the surviving
//! original indices so embeddings can be expressed over the original atoms.

use crate::error::{Error, Result};
use crate::point_set::{pow_p, PointSet};

/// The reweighting computed by [`change_of_measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeOfMeasure {
    /// Original indices of the atoms that survive (envelope > 0), in order.
    pub kept: Vec<usize>,
    /// Density `f_k = M_k^p / Z`, one entry per kept atom; strictly positive.
    pub density: Vec<f64>,
    /// Weights `ν_k = w_k·f_k` of the transformed set, one per kept atom,
    /// summing to 1.
    pub new_weights: Vec<f64>,
    /// Normalizer `Z = Σ_k w_k·M_k^p`, the p-th power of the
    /// incompressibility.
    pub normalizer: f64,
}

impl ChangeOfMeasure {
    /// Density spread back over the original atom indices, `0.0` on dropped
    /// atoms. This is the per-atom diagonal of the embedding operator.
    pub fn density_over_original(&self, n_original: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_original];
        for (&k, &f) in self.kept.iter().zip(&self.density) {
            full[k] = f;
        }
        full
    }
}

/// Reweights `ps` so its envelope is constant; returns the reweighting and
/// the transformed set.
///
/// Fails with [`Error::ZeroSet`] when every value is zero (there is nothing
/// to normalize against).
pub fn change_of_measure(ps: &PointSet) -> Result<(ChangeOfMeasure, PointSet)> {
    let p = ps.p();
    let env = ps.max_envelope();
    let weights = ps.weights();

    let normalizer: f64 = env
        .iter()
        .zip(weights)
        .map(|(&m, &w)| w * pow_p(m, p))
        .sum();
    if normalizer <= 0.0 {
        return Err(Error::ZeroSet);
    }

    let kept: Vec<usize> = (0..ps.n_atoms()).filter(|&k| env[k] > 0.0).collect();
    let density: Vec<f64> = kept.iter().map(|&k| pow_p(env[k], p) / normalizer).collect();
    let new_weights: Vec<f64> = kept
        .iter()
        .zip(&density)
        .map(|(&k, &f)| weights[k] * f)
        .collect();

    // values[i][k] · f_k^(−1/p), columns restricted to the kept atoms. This
    // equals Z^(1/p)/M_k but keeps density-1 atoms bitwise untouched and is
    // the same per-atom coefficient the embedding operator applies later.
    let col_scale: Vec<f64> = density.iter().map(|&f| f.powf(-1.0 / p)).collect();
    let rows: Vec<Vec<f64>> = (0..ps.n_points())
        .map(|i| {
            let row = ps.row(i);
            kept.iter()
                .zip(&col_scale)
                .map(|(&k, &s)| row[k] * s)
                .collect()
        })
        .collect();

    let transformed = PointSet::new(p, new_weights.clone(), rows)?;
    Ok((
        ChangeOfMeasure {
            kept,
            density,
            new_weights,
            normalizer,
        },
        transformed,
    ))
}
