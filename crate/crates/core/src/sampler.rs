//! Atom selection: approximate the target distance matrix by an average of
//! `d` extreme matrices.
//!
//! After the change of measure, the distance matrix is a convex combination
//! `Σ_k λ_k·X_k` of per-atom extreme matrices. Averaging `d` atoms drawn
//! i.i.d. from `λ` ([`random_sample`]) matches the target in sup norm up to
//! the certificate `4·R·T₂/√d`, where `R` is the decomposition radius and
//! `T₂ = e·√(q−1)` the type-2 constant of the smoothing norm `ℓ_q` with
//! `q = max(2, ln(pair count))` — the smallest exponent whose norm still
//! dominates `‖·‖_∞` within a factor `e` (the "norm sandwich"), which is
//! what lets a Hilbert-style `1/√d` rate act on a sup-norm target.
//!
//! [`greedy_sample`] derandomizes this: at each step it scans every atom and
//! keeps the one minimizing the `ℓ_q` distance between the new running
//! average and the target, ties to the smallest index. [`adaptive_sample`]
//! wraps the greedy in a doubling search over `d` for callers who want the
//! smallest dimension that empirically meets the error target rather than
//! the worst-case bound of [`required_dimension`].

use crate::cone::{self, ConeDecomposition};
use crate::error::{Error, Result};
use crate::point_set::{pair_count, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::E;
use std::fmt;

/// Atom-selection strategy used by [`crate::embed::reduce`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerMode {
    /// I.i.d. draws from the atom weights, retried until the target error is
    /// met.
    Random,
    /// Deterministic one-step-lookahead potential minimization.
    Greedy,
    /// Greedy at `d = 1, 2, 4, …` until the target error is met or the cap
    /// is exhausted.
    Adaptive,
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::Random => "random",
            SamplerMode::Greedy => "greedy",
            SamplerMode::Adaptive => "adaptive",
        })
    }
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SamplerMode::Random),
            "greedy" => Ok(SamplerMode::Greedy),
            "adaptive" => Ok(SamplerMode::Adaptive),
            other => Err(Error::InvalidInput(format!(
                "unknown sampler mode {other:?} (expected random, greedy, or adaptive)"
            ))),
        }
    }
}

/// Everything [`crate::embed::reduce`] needs to know about how to sample.
#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    /// Target additive error on p-th-power distances; must be positive.
    pub epsilon: f64,
    /// Use exactly this output dimension instead of [`required_dimension`].
    pub d_override: Option<usize>,
    /// Doubling cap for [`SamplerMode::Adaptive`]; defaults to the
    /// theoretical dimension when unset.
    pub d_cap: Option<usize>,
    /// Override for the smoothing exponent; defaults to
    /// [`q_exponent_for`]`(n)`.
    pub q_exponent: Option<f64>,
    /// Seed for the randomized mode.
    pub seed: u64,
    /// Attempt budget for the randomized mode.
    pub max_retries: u32,
}

impl SamplerConfig {
    pub fn new(mode: SamplerMode, epsilon: f64) -> Self {
        SamplerConfig {
            mode,
            epsilon,
            d_override: None,
            d_cap: None,
            q_exponent: None,
            seed: 0,
            max_retries: 16,
        }
    }
}

/// Outcome of one sampling run.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    /// The selected atoms `k_1, …, k_d`, repetitions allowed, in selection
    /// order.
    pub chosen_atoms: Vec<usize>,
    /// Exactly `sup_additive_distortion(average of chosen extremes, target)`.
    pub achieved_sup_error: f64,
    /// The a-priori bound `4·R·e·√(q−1)/√d`, independent of the draw.
    pub certificate_error: f64,
}

impl SampleResult {
    /// Output dimension of this sample.
    pub fn d(&self) -> usize {
        self.chosen_atoms.len()
    }
}

/// Result of the doubling search: either the first size that met the target
/// error, or the best attempt if the cap ran out (callers typically fall
/// back to [`crate::embed::exact_embed`]).
#[derive(Clone, Debug, PartialEq)]
pub enum AdaptiveOutcome {
    Converged(SampleResult),
    CapExhausted { best: SampleResult },
}

/// Smoothing exponent for `n` points: `max(2, ln C(n,2))`, with the
/// degenerate `n ≤ 2` case pinned to 2.
pub fn q_exponent_for(n: usize) -> f64 {
    let pairs = pair_count(n);
    if pairs <= 1 {
        2.0
    } else {
        (pairs as f64).ln().max(2.0)
    }
}

/// Type-2 constant of the smoothing norm: `e·√(q−1)`.
pub fn type2_constant(q: f64) -> f64 {
    E * (q - 1.0).sqrt()
}

/// The a-priori sup-norm error bound `4·R·T₂/√d` for an average of `d`
/// extremes from a decomposition of radius `R`.
pub fn certificate_error(radius: f64, q: f64, d: usize) -> f64 {
    4.0 * radius * type2_constant(q) / (d as f64).sqrt()
}

/// The raw dimension bound `32e²·(2K)^(2p)·ln(n)/ε²` before ceiling, with
/// `n` as a real so limiting cases are directly evaluable.
pub fn dimension_bound(p: f64, incompressibility: f64, n_points: f64, epsilon: f64) -> f64 {
    32.0 * E * E * (2.0 * incompressibility).powf(2.0 * p) * n_points.ln()
        / (epsilon * epsilon)
}

/// Output dimension sufficient for a `K`-incompressible `n`-point set to be
/// embedded with additive error `ε`: `ceil(32e²·(2K)^(2p)·ln n/ε²)`, at
/// least 1.
pub fn required_dimension(p: f64, incompressibility: f64, n: usize, epsilon: f64) -> Result<usize> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidInput(format!("exponent p must be ≥ 1, got {p}")));
    }
    if !incompressibility.is_finite() || incompressibility <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "incompressibility must be positive, got {incompressibility}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "dimension bound needs at least 2 points, got {n}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "error target must be positive and finite, got {epsilon}"
        )));
    }
    let bound = dimension_bound(p, incompressibility, n as f64, epsilon);
    if !bound.is_finite() || bound > 9.0e18 {
        return Err(Error::InvalidInput(format!(
            "required dimension {bound:e} is out of range"
        )));
    }
    Ok((bound.ceil() as usize).max(1))
}

/// `‖v‖_q` computed with the largest entry factored out, so exponents of
/// `q ≈ ln N` scale never overflow: `v_max·(Σ (|v_i|/v_max)^q)^(1/q)`.
pub fn lq_norm(v: &[f64], q: f64) -> f64 {
    debug_assert!(q >= 1.0);
    let vmax = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if vmax == 0.0 || !vmax.is_finite() {
        return vmax;
    }
    let sum: f64 = v.iter().map(|&x| (x.abs() / vmax).powf(q)).sum();
    vmax * sum.powf(1.0 / q)
}

/// Shared validation: `d ≥ 1` and `dec` really is the decomposition of `ps`.
fn check_inputs(dec: &ConeDecomposition, ps: &PointSet, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidInput("sample dimension d must be ≥ 1".into()));
    }
    if dec.lambda.len() != ps.n_atoms() {
        return Err(Error::DimensionMismatch {
            what: "decomposition atoms vs point-set atoms",
            expected: ps.n_atoms(),
            got: dec.lambda.len(),
        });
    }
    if dec.target.n_points() != ps.n_points() {
        return Err(Error::DimensionMismatch {
            what: "decomposition pairs vs point-set points",
            expected: ps.n_points(),
            got: dec.target.n_points(),
        });
    }
    if dec.lambda != ps.weights() {
        return Err(Error::InvalidInput(
            "decomposition weights do not match the point set (was it decomposed from a \
             different set?)"
            .into(),
        ));
    }
    Ok(())
}

/// Extreme rows cached up front when affordable (64 MiB of entries); above
/// that, random sampling recomputes rows on the fly instead of holding
/// `m·C(n,2)` doubles.
const EXTREME_CACHE_ENTRIES: usize = 1 << 23;

fn all_extremes(ps: &PointSet) -> Vec<Vec<f64>> {
    let n_pairs = pair_count(ps.n_points());
    (0..ps.n_atoms())
        .map(|k| {
            let mut row = Vec::with_capacity(n_pairs);
            cone::extreme_packed_into(ps, k, &mut row);
            row
        })
        .collect()
}

fn sup_error_of_mean(sum: &[f64], d: usize, target: &[f64]) -> f64 {
    let inv = 1.0 / (d as f64);
    sum.iter()
        .zip(target)
        .fold(0.0f64, |e, (&s, &t)| e.max((s * inv - t).abs()))
}

/// Draws `d` atoms i.i.d. from the decomposition weights and averages their
/// extreme matrices; retries (fresh draws from the same stream) until the
/// sup error is at most `epsilon` or the attempt budget runs out.
///
/// Pass `epsilon = f64::INFINITY` to accept the first draw unconditionally.
/// On exhaustion the error payload carries the best draw seen.
pub fn random_sample(
    dec: &ConeDecomposition,
    ps: &PointSet,
    d: usize,
    epsilon: f64,
    seed: u64,
    max_retries: u32,
) -> Result<SampleResult> {
    check_inputs(dec, ps, d)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "error target must be positive, got {epsilon}"
        )));
    }
    let n_pairs = pair_count(ps.n_points());
    let target = dec.target.packed();
    let cert = certificate_error(dec.radius, q_exponent_for(ps.n_points()), d);
    let m = ps.n_atoms();

    let mut cum = Vec::with_capacity(m);
    let mut acc = 0.0f64;
    for &w in ps.weights() {
        acc += w;
        cum.push(acc);
    }

    let cache = if m.saturating_mul(n_pairs) <= EXTREME_CACHE_ENTRIES {
        Some(all_extremes(ps))
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = max_retries.max(1);
    let mut best: Option<SampleResult> = None;
    let mut sum = vec![0.0f64; n_pairs];
    let mut scratch: Vec<f64> = Vec::with_capacity(if cache.is_none() { n_pairs } else { 0 });

    for _ in 0..attempts {
        sum.fill(0.0);
        let mut chosen = Vec::with_capacity(d);
        for _ in 0..d {
            let u: f64 = rng.gen::<f64>() * acc;
            let k = cum.partition_point(|&c| c <= u).min(m - 1);
            chosen.push(k);
            let row: &[f64] = match &cache {
                Some(rows) => &rows[k],
                None => {
                    scratch.clear();
                    cone::extreme_packed_into(ps, k, &mut scratch);
                    &scratch
                }
            };
            for (s, &x) in sum.iter_mut().zip(row) {
                *s += x;
            }
        }
        let err = sup_error_of_mean(&sum, d, target);
        let result = SampleResult {
            chosen_atoms: chosen,
            achieved_sup_error: err,
            certificate_error: cert,
        };
        if err <= epsilon {
            return Ok(result);
        }
        if best.as_ref().is_none_or(|b| err < b.achieved_sup_error) {
            best = Some(result);
        }
    }
    let best = best.expect("at least one attempt ran");
    Err(Error::RetriesExhausted {
        target: epsilon,
        attempts,
        best_error: best.achieved_sup_error,
        best: Box::new(best),
        embedding: None,
    })
}

/// One-step-lookahead greedy pick of `d` atoms, smoothing exponent derived
/// from the point count. Deterministic; repetitions allowed.
pub fn greedy_sample(dec: &ConeDecomposition, ps: &PointSet, d: usize) -> Result<SampleResult> {
    greedy_sample_with_exponent(dec, ps, d, q_exponent_for(ps.n_points()))
}

/// [`greedy_sample`] with an explicit smoothing exponent `q ≥ 2`.
///
/// At step `s+1` the chosen atom minimizes
/// `Φ(k) = ‖(Σ_s + X_k)/(s+1) − target‖_q` over all atoms, ties broken by
/// smallest index. The scan evaluates the strictly monotone surrogate
/// `Σ_e |scaled residual|^q` — same argmin and same tie order as `Φ`, one
/// power per entry instead of two, and the per-step scaling keeps the powers
/// out of overflow range for any input magnitude.
pub fn greedy_sample_with_exponent(
    dec: &ConeDecomposition,
    ps: &PointSet,
    d: usize,
    q: f64,
) -> Result<SampleResult> {
    check_inputs(dec, ps, d)?;
    if q.is_nan() || q < 2.0 {
        return Err(Error::InvalidInput(format!(
            "smoothing exponent must be ≥ 2, got {q}"
        )));
    }
    let prepared = all_extremes(ps);
    Ok(greedy_core(&prepared, dec, d, q))
}

fn greedy_core(extremes: &[Vec<f64>], dec: &ConeDecomposition, d: usize, q: f64) -> SampleResult {
    let target = dec.target.packed();
    let n_pairs = target.len();
    let mut sum = vec![0.0f64; n_pairs];
    let mut residual = vec![0.0f64; n_pairs];
    let mut chosen = Vec::with_capacity(d);

    for s in 0..d {
        let steps = (s + 1) as f64;
        // residual = Σ_s − (s+1)·target, so candidate k scores Σ|residual + X_k|^q.
        let mut rmax = 0.0f64;
        for ((r, &se), &te) in residual.iter_mut().zip(&sum).zip(target) {
            let v = se - steps * te;
            *r = v;
            rmax = rmax.max(v.abs());
        }
        let scale = 1.0 / (1.0 + rmax + dec.radius);

        let mut best_k = 0usize;
        let mut best_score = f64::INFINITY;
        for (k, xk) in extremes.iter().enumerate() {
            let score: f64 = residual
                .iter()
                .zip(xk)
                .map(|(&re, &xe)| ((re + xe) * scale).abs().powf(q))
                .sum();
            if score < best_score {
                best_score = score;
                best_k = k;
            }
        }
        chosen.push(best_k);
        for (se, &xe) in sum.iter_mut().zip(&extremes[best_k]) {
            *se += xe;
        }
    }

    let err = sup_error_of_mean(&sum, d, target);
    SampleResult {
        chosen_atoms: chosen,
        achieved_sup_error: err,
        certificate_error: certificate_error(dec.radius, q, d),
    }
}

/// Runs the greedy at `d = 1, 2, 4, 8, …` until the sup error is at most
/// `epsilon`, trying no size beyond `d_cap`.
pub fn adaptive_sample(
    dec: &ConeDecomposition,
    ps: &PointSet,
    epsilon: f64,
    d_cap: usize,
) -> Result<AdaptiveOutcome> {
    adaptive_sample_with_exponent(dec, ps, epsilon, d_cap, q_exponent_for(ps.n_points()))
}

/// [`adaptive_sample`] with an explicit smoothing exponent.
pub fn adaptive_sample_with_exponent(
    dec: &ConeDecomposition,
    ps: &PointSet,
    epsilon: f64,
    d_cap: usize,
    q: f64,
) -> Result<AdaptiveOutcome> {
    check_inputs(dec, ps, d_cap.max(1))?;
    if d_cap == 0 {
        return Err(Error::InvalidInput("adaptive cap must be ≥ 1".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "error target must be positive, got {epsilon}"
        )));
    }
    if q.is_nan() || q < 2.0 {
        return Err(Error::InvalidInput(format!(
            "smoothing exponent must be ≥ 2, got {q}"
        )));
    }
    let prepared = all_extremes(ps);
    let mut d = 1usize;
    let mut best: Option<SampleResult> = None;
    loop {
        let result = greedy_core(&prepared, dec, d, q);
        if result.achieved_sup_error <= epsilon {
            return Ok(AdaptiveOutcome::Converged(result));
        }
        if best
            .as_ref()
            .is_none_or(|b| result.achieved_sup_error < b.achieved_sup_error)
        {
            best = Some(result);
        }
        match d.checked_mul(2) {
            Some(next) if next <= d_cap => d = next,
            _ => {
                return Ok(AdaptiveOutcome::CapExhausted {
                    best: best.expect("at least one size ran"),
                })
            }
        }
    }
}
