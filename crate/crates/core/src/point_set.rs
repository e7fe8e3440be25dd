//! Weighted finite point sets and their pairwise p-th-power distance matrices.
//!
//! A [`PointSet`] is `n` points over `m` weighted atoms: point `i` takes the
//! value `values[i][k]` on atom `k`, and atom `k` carries probability weight
//! `weights[k]`. The p-th power of the distance between points `i` and `j` is
//! `Σ_k weights[k]·|values[i][k] − values[j][k]|^p`, collected for all pairs
//! by [`PointSet::distance_matrix`] into a packed symmetric
//! [`DistanceMatrix`].

use crate::error::{Error, Result};

/// `|x|^p` with fast paths for the small integer exponents that dominate use.
#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p.fract() == 0.0 && p <= 32.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

/// Number of unordered pairs of `n` items.
#[inline]
pub(crate) fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `n` points over `m` atoms of a probability measure, with exponent `p`.
///
/// Construction validates everything once; the rest of the crate relies on
/// these invariants:
/// * `1 ≤ p < ∞`,
/// * every weight is strictly positive and finite (zero-weight atoms are
///   dropped together with their value columns),
/// * the weights sum to exactly 1 after renormalization,
/// * every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    p: f64,
    n_points: usize,
    n_atoms: usize,
    weights: Vec<f64>,
    /// Row-major `n_points × n_atoms`.
    values: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from per-point value rows.
    ///
    /// Weights within `1e-9` of summing to 1 are renormalized; anything
    /// further off is rejected. Atoms with zero weight are dropped along with
    /// their value columns.
    pub fn new(p: f64, weights: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidInput(format!(
                "exponent p must satisfy 1 <= p < inf, got {p}"
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("at least one atom required".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("at least one point required".into()));
        }
        let m = weights.len();
        for row in &values {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "values row length vs atom count",
                    expected: m,
                    got: row.len(),
                });
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::InvalidInput(format!("negative weight {w}")));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("values"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightsNotProbability { sum });
        }

        let kept: Vec<usize> = (0..m).filter(|&k| weights[k] > 0.0).collect();
        if kept.is_empty() {
            // All-zero weights sum to 0 and are caught above; this guards the
            // pathological "sums to 1 but every atom is zero" case, which
            // cannot happen, and keeps the invariant explicit.
            return Err(Error::WeightsNotProbability { sum });
        }
        let mut w: Vec<f64> = kept.iter().map(|&k| weights[k] / sum).collect();
        // Pin the sum to exactly 1: fold residual rounding into the heaviest
        // atom so downstream convex combinations are genuinely convex.
        let total: f64 = w.iter().sum();
        if total != 1.0 {
            let imax = (0..w.len())
                .max_by(|&a, &b| w[a].total_cmp(&w[b]))
                .expect("nonempty");
            w[imax] += 1.0 - total;
        }

        let n = values.len();
        let mut flat = Vec::with_capacity(n * kept.len());
        for row in &values {
            flat.extend(kept.iter().map(|&k| row[k]));
        }
        Ok(PointSet {
            p,
            n_points: n,
            n_atoms: kept.len(),
            weights: w,
            values: flat,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Values of point `i` across the atoms.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_atoms..(i + 1) * self.n_atoms]
    }

    /// Value of point `i` on atom `k`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_atoms + k]
    }

    /// Per-point value rows (the inverse of [`PointSet::new`]'s input).
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_points).map(|i| self.row(i).to_vec()).collect()
    }

    /// Pointwise maximum of `|values|` over the points, one entry per atom.
    pub fn max_envelope(&self) -> Vec<f64> {
        let mut env = vec![0.0; self.n_atoms];
        for i in 0..self.n_points {
            for (e, v) in env.iter_mut().zip(self.row(i)) {
                let a = v.abs();
                if a > *e {
                    *e = a;
                }
            }
        }
        env
    }

    /// How far the set is from being compressible: the `L_p` norm of the
    /// pointwise maximum, `(Σ_k w_k · max_i |values[i][k]|^p)^(1/p)`.
    ///
    /// Scales linearly under scalar multiplication of the values and is the
    /// quantity the dimension bound in
    /// [`crate::sampler::required_dimension`] depends on.
    pub fn incompressibility(&self) -> f64 {
        let env = self.max_envelope();
        let total: f64 = env
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * pow_p(e, self.p))
            .sum();
        total.powf(1.0 / self.p)
    }

    /// All pairwise p-th-power distances.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.n_points;
        let mut packed = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            let ri = self.row(i);
            for j in i + 1..n {
                let rj = self.row(j);
                let d: f64 = ri
                    .iter()
                    .zip(rj)
                    .zip(&self.weights)
                    .map(|((&a, &b), &w)| w * pow_p(a - b, self.p))
                    .sum();
                packed.push(d);
            }
        }
        DistanceMatrix { n, packed }
    }

    /// The same set with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite("scale factor"));
        }
        Ok(PointSet {
            p: self.p,
            n_points: self.n_points,
            n_atoms: self.n_atoms,
            weights: self.weights.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        })
    }
}

/// Symmetric zero-diagonal matrix of pairwise values, stored as the packed
/// upper triangle (`i < j`, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps an already-packed upper triangle of `pair_count(n)` entries.
    pub fn from_packed(n: usize, packed: Vec<f64>) -> Result<Self> {
        if packed.len() != pair_count(n) {
            return Err(Error::DimensionMismatch {
                what: "packed length vs pair count",
                expected: pair_count(n),
                got: packed.len(),
            });
        }
        Ok(DistanceMatrix { n, packed })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Packed upper triangle, pair `(i, j)` with `i < j` at
    /// `i·(2n−i−1)/2 + (j−i−1)`.
    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Entry `(i, j)`; symmetric, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "pair index out of range");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.packed[self.index(i, j)],
            std::cmp::Ordering::Greater => self.packed[self.index(j, i)],
        }
    }

    /// Iterates `(i, j, value)` over the upper triangle in storage order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.packed.iter())
            .map(|((i, j), &v)| (i, j, v))
    }

    /// Largest entry (0 when there are no pairs).
    pub fn max_entry(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, &v| if v > m { v } else { m })
    }
}

/// Largest absolute entrywise difference between two distance matrices: the
/// additive distortion of one set of pairwise p-th-power distances against
/// another. Zero when there are fewer than two points.
pub fn sup_additive_distortion(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            what: "distance matrix sizes",
            expected: a.n,
            got: b.n,
        });
    }
    Ok(a.packed
        .iter()
        .zip(&b.packed)
        .fold(0.0, |m, (&x, &y)| {
            let d = (x - y).abs();
            if d > m {
                d
            } else {
                m
            }
        }))
}
