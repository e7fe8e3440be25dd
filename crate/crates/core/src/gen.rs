//! Test-instance generators: uniform random points in the unit ball of the
//! `N`-atom model of `L_p`, Haar random rotations for `p = 2`, Walsh-matrix
//! point sets, and concentrated standard-basis spikes.
//!
//! Conversion convention used by every generator: a coordinate vector `x` in
//! plain `ℓ_p^N` is stored as values `x·N^(1/p)` over `N` atoms of weight
//! `1/N`, which preserves the norm exactly.

use crate::error::{Error, Result};
use crate::point_set::{pow_p, PointSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Largest supported doubling exponent for Walsh matrices; `2^12 = 4096`
/// rows is already a 128 MiB matrix.
const MAX_WALSH_LOG: usize = 12;

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!(
            "exponent must be finite and ≥ 1, got {p}"
        )));
    }
    Ok(())
}

/// `n` independent uniform points in the unit ball of the `N`-atom model of
/// `L_p`, reproducible from `seed`.
///
/// Sampling: each coordinate gets an independent p-generalized normal
/// magnitude (drawn as `Gamma(1/p, 1)^(1/p)`) with a random sign; the vector
/// is normalized to the unit sphere and multiplied by `U^(1/N)` for a
/// uniform radial factor.
pub fn random_ball(n: usize, n_atoms: usize, p: f64, seed: u64) -> Result<PointSet> {
    if n == 0 || n_atoms == 0 {
        return Err(Error::InvalidInput(
            "need at least one point and one atom".into(),
        ));
    }
    check_p(p)?;
    let gamma = Gamma::new(1.0 / p, 1.0)
        .map_err(|e| Error::InvalidInput(format!("magnitude distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n_atoms as f64;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        // Draw |g_k|^p and signs until the norm is representable (an
        // all-underflow draw has probability ~0 but would divide by zero).
        let (coords, sum_pows) = loop {
            let mut coords = Vec::with_capacity(n_atoms);
            let mut sum_pows = 0.0f64;
            for _ in 0..n_atoms {
                let pow: f64 = gamma.sample(&mut rng);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                coords.push(sign * pow.powf(1.0 / p));
                sum_pows += pow;
            }
            if sum_pows > 0.0 && sum_pows.is_finite() {
                break (coords, sum_pows);
            }
        };
        let u: f64 = rng.gen();
        // Radius times sphere normalization, with the model's N^(1/p) value
        // scaling folded in.
        let scale = u.powf(1.0 / nf) * (nf / sum_pows).powf(1.0 / p);
        values.push(coords.into_iter().map(|c| c * scale).collect());
    }
    PointSet::new(p, vec![1.0 / nf; n_atoms], values)
}

/// A Haar-distributed orthogonal `m×m` matrix, reproducible from `seed`.
///
/// Built by modified Gram–Schmidt (with one re-orthogonalization pass) on an
/// i.i.d. standard Gaussian matrix; the positive-diagonal convention this
/// enforces is exactly the sign fix that makes the factor Haar-distributed.
pub fn haar_matrix(m: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(m >= 1, "matrix size must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Columns of the Gaussian matrix, orthonormalized in order.
    let mut cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..m).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for j in 0..m {
        let (done, rest) = cols.split_at_mut(j);
        let col_j = &mut rest[0];
        for _pass in 0..2 {
            for col_i in done.iter() {
                let proj: f64 = col_i.iter().zip(col_j.iter()).map(|(&a, &b)| a * b).sum();
                for (b, &a) in col_j.iter_mut().zip(col_i) {
                    *b -= proj * a;
                }
            }
        }
        let norm: f64 = col_j.iter().map(|&x| x * x).sum::<f64>().sqrt();
        assert!(
            norm > 0.0,
            "degenerate Gaussian draw (probability zero); reseed"
        );
        for x in col_j.iter_mut() {
            *x /= norm;
        }
    }
    // Transpose column storage into row-major Q.
    (0..m)
        .map(|r| (0..m).map(|j| cols[j][r]).collect())
        .collect()
}

/// Applies an explicit rotation matrix to every point's value row
/// (`y = x·Q`). Exposed so tests can inject the identity or a fixed matrix;
/// [`haar_rotate`] is this with a Haar draw.
pub fn rotate_with(ps: &PointSet, q: &[Vec<f64>]) -> Result<PointSet> {
    if ps.p() != 2.0 {
        return Err(Error::InvalidInput(format!(
            "rotation preserves distances only at exponent 2, got {}",
            ps.p()
        )));
    }
    let m = ps.n_atoms();
    let uniform = 1.0 / m as f64;
    if ps
        .weights()
        .iter()
        .any(|&w| (w - uniform).abs() > 1e-12 * uniform.max(1.0))
    {
        return Err(Error::InvalidInput(
            "rotation requires uniform atom weights".into(),
        ));
    }
    if q.len() != m || q.iter().any(|row| row.len() != m) {
        return Err(Error::DimensionMismatch {
            what: "rotation matrix size vs atom count",
            expected: m,
            got: q.len(),
        });
    }
    let values: Vec<Vec<f64>> = (0..ps.n_points())
        .map(|i| {
            let x = ps.row(i);
            (0..m)
                .map(|c| (0..m).map(|k| x[k] * q[k][c]).sum())
                .collect()
        })
        .collect();
    PointSet::new(2.0, ps.weights().to_vec(), values)
}

/// Rotates a uniform-weight `p = 2` point set by a Haar-random orthogonal
/// matrix. Pairwise distances are preserved (up to roundoff); coordinate
/// concentration — and with it the incompressibility — is typically
/// destroyed, which is the point.
pub fn haar_rotate(ps: &PointSet, seed: u64) -> Result<PointSet> {
    // Validate before paying for the matrix draw.
    if ps.p() != 2.0 {
        return Err(Error::InvalidInput(format!(
            "rotation preserves distances only at exponent 2, got {}",
            ps.p()
        )));
    }
    rotate_with(ps, &haar_matrix(ps.n_atoms(), seed))
}

/// The `2^m × 2^m` Walsh matrix (Sylvester construction, entries exactly
/// `±1`): the `m`-fold tensor power of `[[1, 1], [1, −1]]`.
pub fn walsh_matrix(m: usize) -> Result<Vec<Vec<f64>>> {
    if m == 0 || m > MAX_WALSH_LOG {
        return Err(Error::InvalidInput(format!(
            "Walsh exponent must be in 1..={MAX_WALSH_LOG}, got {m}"
        )));
    }
    let mut w = vec![vec![1.0]];
    for _ in 0..m {
        let size = w.len();
        let mut next = vec![vec![0.0; 2 * size]; 2 * size];
        for (i, row) in w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                next[i][j] = v;
                next[i][j + size] = v;
                next[i + size][j] = v;
                next[i + size][j + size] = -v;
            }
        }
        w = next;
    }
    Ok(w)
}

/// The `2^(m+1) + 1` point set on `2^m` uniform atoms consisting of the
/// origin, the `ℓ_p` standard basis vectors, and the normalized Walsh rows.
///
/// In the stored model the basis vectors become single spikes of height
/// `2^(m/p)` and the Walsh rows keep their exact `±1` entries; every point
/// has norm 1 except the origin.
pub fn walsh_set(m: usize, p: f64) -> Result<PointSet> {
    check_p(p)?;
    let w = walsh_matrix(m)?;
    let n_atoms = w.len();
    let nf = n_atoms as f64;
    let spike = nf.powf(1.0 / p);
    let mut values = Vec::with_capacity(2 * n_atoms + 1);
    values.push(vec![0.0; n_atoms]);
    for j in 0..n_atoms {
        let mut row = vec![0.0; n_atoms];
        row[j] = spike;
        values.push(row);
    }
    values.extend(w);
    PointSet::new(p, vec![1.0 / nf; n_atoms], values)
}

/// `n` concentrated unit-norm spikes: point `i` is `n^(1/p)·e_i` on `n`
/// uniform atoms. Pairwise p-th-power distances are all exactly 2 and the
/// incompressibility is `n^(1/p)` — the worst case among unit-ball sets.
pub fn basis_set(n: usize, p: f64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    check_p(p)?;
    let nf = n as f64;
    let spike = nf.powf(1.0 / p);
    let values: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = spike;
            row
        })
        .collect();
    PointSet::new(p, vec![1.0 / nf; n], values)
}

/// Weighted `L_p` norm of one point of `ps` — test helper used across the
/// crate's suites.
pub fn point_norm(ps: &PointSet, i: usize) -> f64 {
    ps.row(i)
        .iter()
        .zip(ps.weights())
        .map(|(&v, &w)| w * pow_p(v, ps.p()))
        .sum::<f64>()
        .powf(1.0 / ps.p())
}
