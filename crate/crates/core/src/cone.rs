//! Writes the distance matrix as a convex combination of one matrix per atom.
//!
//! For each atom `k` the *extreme matrix* has entries
//! `|values[i][k] − values[j][k]|^p`; weighting it by `λ_k = w_k` and summing
//! over atoms reproduces the full p-th-power distance matrix exactly. The
//! sampler approximates that convex combination by an average of `d` extreme
//! matrices, so the decomposition's `radius` — the largest sup-norm of any
//! extreme matrix — controls how hard the sampling problem is.

use crate::error::{Error, Result};
use crate::point_set::{pair_count, pow_p, DistanceMatrix, PointSet};

/// The distance matrix of a set expressed as a convex combination of its
/// per-atom extreme matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDecomposition {
    /// The matrix being decomposed: the set's pairwise p-th-power distances.
    pub target: DistanceMatrix,
    /// Convex weights, one per atom (the atom weights of the set).
    pub lambda: Vec<f64>,
    /// `max_k ‖extreme matrix k‖_∞`, i.e. the largest `(max_i − min_i)^p`
    /// spread of any atom column. Never exceeds `(2·max|value|)^p`.
    pub radius: f64,
}

impl ConeDecomposition {
    /// Number of extreme matrices available (one per atom).
    pub fn atom_count(&self) -> usize {
        self.lambda.len()
    }
}

/// Decomposes the distance matrix of `ps` over its atoms.
pub fn decompose(ps: &PointSet) -> ConeDecomposition {
    let mut radius = 0.0f64;
    for k in 0..ps.n_atoms() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..ps.n_points() {
            let v = ps.value(i, k);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let spread = pow_p(hi - lo, ps.p());
        if spread > radius {
            radius = spread;
        }
    }
    ConeDecomposition {
        target: ps.distance_matrix(),
        lambda: ps.weights().to_vec(),
        radius,
    }
}

/// The extreme matrix of atom `k`: entries `|values[i][k] − values[j][k]|^p`.
pub fn extreme_matrix(ps: &PointSet, k: usize) -> Result<DistanceMatrix> {
    if k >= ps.n_atoms() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: ps.n_atoms(),
        });
    }
    let n = ps.n_points();
    let mut packed = Vec::with_capacity(pair_count(n));
    extreme_packed_into(ps, k, &mut packed);
    DistanceMatrix::from_packed(n, packed)
}

/// Appends the packed upper triangle of atom `k`'s extreme matrix to `out`.
/// Hot-path form used by the sampler; `k` must be in range.
pub(crate) fn extreme_packed_into(ps: &PointSet, k: usize, out: &mut Vec<f64>) {
    let n = ps.n_points();
    let p = ps.p();
    for i in 0..n {
        let vi = ps.value(i, k);
        for j in i + 1..n {
            out.push(pow_p(vi - ps.value(j, k), p));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_set::sup_additive_distortion;

    fn sample_set() -> PointSet {
        PointSet::new(
            2.0,
            vec![0.2, 0.3, 0.5],
            vec![
                vec![1.0, -1.0, 0.0],
                vec![0.0, 2.0, 0.5],
                vec![-1.5, 0.0, 2.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn extreme_matrix_matches_hand_computation() {
        let ps = sample_set();
        let x0 = extreme_matrix(&ps, 0).unwrap();
        // Column 0 is (1, 0, -1.5); squared gaps: (0,1)→1, (0,2)→6.25, (1,2)→2.25.
        assert!((x0.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((x0.get(0, 2) - 6.25).abs() < 1e-15);
        assert!((x0.get(1, 2) - 2.25).abs() < 1e-15);
    }

    #[test]
    fn weighted_extremes_reconstruct_the_target() {
        let ps = sample_set();
        let dec = decompose(&ps);
        let n = ps.n_points();
        let mut sum = vec![0.0; crate::point_set::pair_count(n)];
        for k in 0..ps.n_atoms() {
            let xk = extreme_matrix(&ps, k).unwrap();
            for (s, &v) in sum.iter_mut().zip(xk.packed()) {
                *s += dec.lambda[k] * v;
            }
        }
        let recon = DistanceMatrix::from_packed(n, sum).unwrap();
        let dev = sup_additive_distortion(&recon, &dec.target).unwrap();
        assert!(dev < 1e-12, "reconstruction off by {dev}");
    }

    #[test]
    fn radius_is_the_largest_column_spread() {
        let ps = sample_set();
        let dec = decompose(&ps);
        // Spreads: (1−(−1.5))² = 6.25, (2−(−1))² = 9, (2−0)² = 4.
        assert!((dec.radius - 9.0).abs() < 1e-15);
        assert_eq!(dec.atom_count(), 3);

        // Never more than (2·max absolute value)^p.
        let maxval = (0..ps.n_points())
            .flat_map(|i| ps.row(i).iter().copied())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dec.radius <= (2.0 * maxval).powi(2) + 1e-12);
    }

    #[test]
    fn duplicate_columns_give_radius_and_weights_directly() {
        // Both columns produce extreme matrix [[0,1],[1,0]]; λ = weights, R = 1.
        let ps = PointSet::new(
            1.0,
            vec![0.5, 0.5],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let dec = decompose(&ps);
        assert_eq!(dec.lambda, vec![0.5, 0.5]);
        assert!((dec.radius - 1.0).abs() < 1e-15);
        assert!((dec.target.get(0, 1) - 1.0).abs() < 1e-15);
        let x0 = extreme_matrix(&ps, 0).unwrap();
        let x1 = extreme_matrix(&ps, 1).unwrap();
        assert_eq!(x0, x1);
    }

    #[test]
    fn out_of_range_atom_is_an_error() {
        let ps = sample_set();
        assert!(matches!(
            extreme_matrix(&ps, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }
}
