//! Dimension lower bound for linear near-isometric embeddings, and an
//! auditor that checks a concrete matrix against it.
//!
//! Any linear map into `ℓ_p^d` (`p ≠ 2`) whose images of the scaled standard
//! basis vectors and normalized Walsh rows all have norms inside a window
//! `[lower, upper]` must satisfy
//! `d ≥ (lower/upper)^(2p/|p−2|) · (n−1)/2`
//! where `n = 2^(m+1)+1` counts those test vectors plus the origin. The
//! derivation combines the Walsh-row Parseval identity (which holds for
//! every matrix) with the standard `ℓ_2`/`ℓ_p` norm comparisons — applied in
//! one direction for `p < 2` and the swapped direction for `p > 2`.

use crate::error::{Error, Result};
use crate::gen::walsh_matrix;
use crate::point_set::pow_p;

/// The two endpoints of the admissible norm window for images of unit
/// vectors: an embedding with additive-error guarantees maps unit-distance
/// pairs to distances in `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliPair {
    pub lower: f64,
    pub upper: f64,
}

impl ModuliPair {
    /// Requires `0 < lower ≤ upper`, both finite.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper) || !upper.is_finite() {
            return Err(Error::InvalidInput(format!(
                "moduli window must satisfy 0 < lower ≤ upper < ∞, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `lower/upper ∈ (0, 1]` — the quantity the bound is monotone in.
    pub fn ratio(&self) -> f64 {
        self.lower / self.upper
    }
}

/// The norm window implied by an additive error `eps` on p-th-power
/// distances of unit-distance pairs: `((1−eps)^(1/p), (1+eps)^(1/p))`.
/// Requires `0 < eps < 1` (at `eps ≥ 1` the lower endpoint collapses).
pub fn eps_isometric_moduli(p: f64, eps: f64) -> Result<ModuliPair> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!(
            "exponent must be finite and ≥ 1, got {p}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!(
            "additive error must lie in (0, 1), got {eps}"
        )));
    }
    ModuliPair::new((1.0 - eps).powf(1.0 / p), (1.0 + eps).powf(1.0 / p))
}

/// The dimension lower bound `(lower/upper)^(2p/|p−2|) · (n−1)/2` for linear
/// maps admissible at the window on the `n`-point Walsh test set.
///
/// `n` must have the form `2^(m+1)+1` (origin + basis vectors + Walsh rows).
/// Vacuous at `p = 2`, where the exponent blows up — rejected.
pub fn linear_lower_bound(p: f64, n: usize, moduli: ModuliPair) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!(
            "exponent must be finite and ≥ 1, got {p}"
        )));
    }
    if p == 2.0 {
        return Err(Error::InvalidInput(
            "the linear lower bound is vacuous at exponent 2".into(),
        ));
    }
    if n < 5 || !(n - 1).is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "point count must be 2^(m+1)+1 for some m ≥ 1, got {n}"
        )));
    }
    let exponent = 2.0 * p / (p - 2.0).abs();
    Ok(moduli.ratio().powf(exponent) * (n - 1) as f64 / 2.0)
}

/// Outcome of auditing a concrete matrix against the lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Output dimension of the audited map (its row count).
    pub d: usize,
    /// Size of the Walsh test set the audit used: `2^(m+1)+1`.
    pub n_points: usize,
    /// `ℓ_p` norms of the scaled-basis images, one per column.
    pub basis_norms: Vec<f64>,
    /// `ℓ_p` norms of the normalized-Walsh-row images.
    pub walsh_norms: Vec<f64>,
    /// The bound the admissible map must satisfy.
    pub lower_bound: f64,
    /// `d ≥ lower_bound` (up to 1e−9 slop) — must hold for every map that
    /// passes the norm-window checks, or the bound itself is falsified.
    pub meets_lower_bound: bool,
    /// Relative residual of the Walsh Parseval identity
    /// `Σ_i ‖T w_i‖_2² = 2^m · Σ_j ‖T e_j‖_2²`, which holds for every
    /// matrix regardless of admissibility.
    pub parseval_residual: f64,
    /// `parseval_residual ≤ 1e−9`.
    pub parseval_ok: bool,
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    v.iter().map(|&x| pow_p(x, p)).sum::<f64>().powf(1.0 / p)
}

fn l2_sq(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum()
}

/// Audits a `d × 2^m` matrix `t` (given by its rows): checks that every
/// scaled-basis image and normalized-Walsh-row image has `ℓ_p` norm inside
/// the window, reports the Parseval residual, and compares `d` against
/// [`linear_lower_bound`].
///
/// Returns [`Error::ModuliViolated`] on the first out-of-window image; the
/// norm-window tolerance is `1e−9` relative so exact-equality cases (the
/// identity map) pass.
pub fn audit_linear_map(
    p: f64,
    m: usize,
    t: &[Vec<f64>],
    moduli: ModuliPair,
) -> Result<AuditReport> {
    let n_cols = 1usize << m;
    let n_points = 2 * n_cols + 1;
    // Validates p ≠ 2, p ≥ 1 and m's range up front.
    let lower_bound = linear_lower_bound(p, n_points, moduli)?;
    let d = t.len();
    if d == 0 {
        return Err(Error::InvalidInput("audited matrix has no rows".into()));
    }
    if let Some(row) = t.iter().find(|row| row.len() != n_cols) {
        return Err(Error::DimensionMismatch {
            what: "matrix columns vs Walsh size",
            expected: n_cols,
            got: row.len(),
        });
    }
    let tol = 1e-9 * moduli.upper.max(1.0);
    let window = |norm: f64| norm >= moduli.lower - tol && norm <= moduli.upper + tol;

    // Images of the basis vectors are the columns of t.
    let columns: Vec<Vec<f64>> = (0..n_cols)
        .map(|j| t.iter().map(|row| row[j]).collect())
        .collect();
    let basis_norms: Vec<f64> = columns.iter().map(|c| lp_norm(c, p)).collect();
    for (j, &norm) in basis_norms.iter().enumerate() {
        if !window(norm) {
            return Err(Error::ModuliViolated {
                which: "basis image",
                index: j,
                norm,
                lower: moduli.lower,
                upper: moduli.upper,
            });
        }
    }

    let walsh = walsh_matrix(m)?;
    let row_scale = (n_cols as f64).powf(1.0 / p);
    let mut walsh_norms = Vec::with_capacity(n_cols);
    let mut walsh_l2_sum = 0.0f64;
    for (i, w_row) in walsh.iter().enumerate() {
        // T·w_i as a combination of the stored columns.
        let mut image = vec![0.0f64; d];
        for (j, &sign) in w_row.iter().enumerate() {
            for (acc, &v) in image.iter_mut().zip(&columns[j]) {
                *acc += sign * v;
            }
        }
        walsh_l2_sum += l2_sq(&image);
        let norm = lp_norm(&image, p) / row_scale;
        if !window(norm) {
            return Err(Error::ModuliViolated {
                which: "normalized Walsh image",
                index: i,
                norm,
                lower: moduli.lower,
                upper: moduli.upper,
            });
        }
        walsh_norms.push(norm);
    }

    let basis_l2_sum: f64 = columns.iter().map(|c| l2_sq(c)).sum();
    let rhs = n_cols as f64 * basis_l2_sum;
    let scale = walsh_l2_sum.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let parseval_residual = (walsh_l2_sum - rhs).abs() / scale;

    Ok(AuditReport {
        d,
        n_points,
        basis_norms,
        walsh_norms,
        lower_bound,
        meets_lower_bound: d as f64 >= lower_bound - 1e-9,
        parseval_residual,
        parseval_ok: parseval_residual <= 1e-9,
    })
}
