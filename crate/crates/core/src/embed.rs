//! Assemble low-dimensional coordinates from chosen atoms, expose the linear
//! operator behind them, verify embeddings, and fall back to the exact
//! weighted embedding when sampling cannot help.
//!
//! Every embedding here is the same linear map in two factors: a diagonal
//! change-of-measure rescaling on the original atoms (`density^(−1/p)`),
//! then a coordinate-selection-and-scaling map that reads one source atom
//! per output coordinate and multiplies by a common `scale`. Storing the
//! factors instead of a dense `d×m` matrix keeps repeated atoms cheap and
//! makes the operator reusable on new points from the same atom layout.

use crate::cone::decompose;
use crate::error::{Error, Result};
use crate::measure::{change_of_measure, ChangeOfMeasure};
use crate::point_set::{pair_count, pow_p, sup_additive_distortion, DistanceMatrix, PointSet};
use crate::sampler::{
    adaptive_sample_with_exponent, greedy_sample_with_exponent, q_exponent_for, random_sample,
    required_dimension, AdaptiveOutcome, SampleResult, SamplerConfig, SamplerMode,
};

/// The factored linear map behind an [`Embedding`].
///
/// Output coordinate `s` of a point with original value row `row` is
/// `row[atoms[s]] · density[atoms[s]]^(−1/p) · scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOperator {
    /// Change-of-measure density per original atom (`0.0` on atoms dropped
    /// by the transform, which no output coordinate references).
    pub density: Vec<f64>,
    /// Source original-atom index for each of the `d` output coordinates;
    /// repetitions are kept as repeated coordinates.
    pub atoms: Vec<usize>,
    /// Common factor on every output coordinate (`d^(−1/p)` for sampled
    /// embeddings, `1` for the exact embedding).
    pub scale: f64,
}

impl EmbedOperator {
    /// Applies the map to one value row over the original atoms.
    pub fn apply(&self, row: &[f64], p: f64) -> Result<Vec<f64>> {
        if row.len() != self.density.len() {
            return Err(Error::DimensionMismatch {
                what: "value row length vs operator atoms",
                expected: self.density.len(),
                got: row.len(),
            });
        }
        // Collapse density^(−1/p)·scale into one coefficient per atom so
        // repeated atoms cost a multiply, not a powf.
        let coeff: Vec<f64> = self
            .density
            .iter()
            .map(|&f| if f > 0.0 { f.powf(-1.0 / p) * self.scale } else { 0.0 })
            .collect();
        Ok(self.atoms.iter().map(|&k| row[k] * coeff[k]).collect())
    }
}

/// `n` points in plain `ℓ_p^d` together with the linear operator that
/// produced them and the verified error against their source set.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub p: f64,
    pub d: usize,
    /// The embedded coordinates, one row of length `d` per point.
    pub points: Vec<Vec<f64>>,
    pub operator: EmbedOperator,
    /// Sup additive distortion of p-th-power distances against the source
    /// set, recomputed from `points` at assembly time.
    pub achieved_eps: f64,
}

impl Embedding {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Pairwise p-th-power `ℓ_p^d` distances of the embedded points
    /// (counting measure — no weights).
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.points.len();
        let mut packed = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in i + 1..n {
                let d: f64 = self.points[i]
                    .iter()
                    .zip(&self.points[j])
                    .map(|(&a, &b)| pow_p(a - b, self.p))
                    .sum();
                packed.push(d);
            }
        }
        DistanceMatrix::from_packed(n, packed).expect("counted pairs")
    }

    /// Applies the stored operator to a fresh value row over the original
    /// atoms.
    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.operator.apply(row, self.p)
    }
}

/// What [`reduce`] produced, with the run's context attached.
#[derive(Debug, Clone)]
pub struct ReduceOutcome {
    pub embedding: Embedding,
    /// The ε the caller asked for.
    pub target_epsilon: f64,
    /// Dimension the worst-case bound prescribes at the measured
    /// incompressibility; `None` when the formula value is out of range.
    pub theoretical_dimension: Option<usize>,
    /// Measured incompressibility of the input.
    pub incompressibility: f64,
    /// The sampling record, absent for the zero set and the exact fallback.
    pub sample: Option<SampleResult>,
    /// Adaptive mode ran out of cap and fell back to [`exact_embed`].
    pub used_exact_fallback: bool,
    /// `ε ≥ 1` lies outside the guarantee's stated domain; the run proceeds
    /// but is flagged.
    pub epsilon_flagged: bool,
}

fn assemble(
    ps: &PointSet,
    cm: &ChangeOfMeasure,
    chosen_kept_atoms: &[usize],
) -> Embedding {
    let p = ps.p();
    let d = chosen_kept_atoms.len();
    let operator = EmbedOperator {
        density: cm.density_over_original(ps.n_atoms()),
        atoms: chosen_kept_atoms.iter().map(|&s| cm.kept[s]).collect(),
        scale: (d as f64).powf(-1.0 / p),
    };
    finish(ps, d, operator)
}

fn finish(ps: &PointSet, d: usize, operator: EmbedOperator) -> Embedding {
    let points: Vec<Vec<f64>> = (0..ps.n_points())
        .map(|i| operator.apply(ps.row(i), ps.p()).expect("row length checked"))
        .collect();
    let mut emb = Embedding {
        p: ps.p(),
        d,
        points,
        operator,
        achieved_eps: 0.0,
    };
    emb.achieved_eps = sup_additive_distortion(&ps.distance_matrix(), &emb.distance_matrix())
        .expect("same point count");
    emb
}

/// The zero set cannot be renormalized, but it embeds exactly into one
/// dimension as all-zero coordinates.
fn zero_embedding(ps: &PointSet) -> Embedding {
    let operator = EmbedOperator {
        density: vec![1.0; ps.n_atoms()],
        atoms: vec![0],
        scale: 1.0,
    };
    finish(ps, 1, operator)
}

/// Full pipeline: change of measure → cone decomposition → atom sampling per
/// `cfg.mode` → coordinate assembly.
///
/// The sampling dimension is `cfg.d_override` if set, otherwise
/// [`required_dimension`] at the measured incompressibility, which
/// guarantees `achieved_eps ≤ cfg.epsilon` (deterministically for greedy on
/// the scales this crate targets, with retries for random mode).
///
/// The all-zero set short-circuits to the zero embedding with `d = 1`. In
/// random mode an exhausted retry budget surfaces as
/// [`Error::RetriesExhausted`] with the best-effort embedding attached.
/// In adaptive mode an exhausted cap falls back to [`exact_embed`].
pub fn reduce(ps: &PointSet, cfg: &SamplerConfig) -> Result<ReduceOutcome> {
    if ps.n_points() < 2 {
        return Err(Error::InvalidInput(
            "reduction needs at least 2 points".into(),
        ));
    }
    if !cfg.epsilon.is_finite() || cfg.epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "error target must be positive and finite, got {}",
            cfg.epsilon
        )));
    }
    let epsilon_flagged = cfg.epsilon >= 1.0;

    let (cm, tps) = match change_of_measure(ps) {
        Ok(pair) => pair,
        Err(Error::ZeroSet) => {
            return Ok(ReduceOutcome {
                embedding: zero_embedding(ps),
                target_epsilon: cfg.epsilon,
                theoretical_dimension: Some(1),
                incompressibility: 0.0,
                sample: None,
                used_exact_fallback: false,
                epsilon_flagged,
            });
        }
        Err(e) => return Err(e),
    };
    let dec = decompose(&tps);
    let incompressibility = ps.incompressibility();
    let q = cfg
        .q_exponent
        .unwrap_or_else(|| q_exponent_for(ps.n_points()));
    let theoretical =
        required_dimension(ps.p(), incompressibility, ps.n_points(), cfg.epsilon).ok();

    let (sample, used_exact_fallback) = match cfg.mode {
        SamplerMode::Greedy => {
            let d = explicit_or_theoretical(cfg.d_override, theoretical)?;
            (Some(greedy_sample_with_exponent(&dec, &tps, d, q)?), false)
        }
        SamplerMode::Random => {
            let d = explicit_or_theoretical(cfg.d_override, theoretical)?;
            match random_sample(&dec, &tps, d, cfg.epsilon, cfg.seed, cfg.max_retries) {
                Ok(r) => (Some(r), false),
                Err(Error::RetriesExhausted {
                    target,
                    attempts,
                    best_error,
                    best,
                    ..
                }) => {
                    let embedding = assemble(ps, &cm, &best.chosen_atoms);
                    return Err(Error::RetriesExhausted {
                        target,
                        attempts,
                        best_error,
                        best,
                        embedding: Some(Box::new(embedding)),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        SamplerMode::Adaptive => {
            let cap = explicit_or_theoretical(cfg.d_cap, theoretical)?;
            match adaptive_sample_with_exponent(&dec, &tps, cfg.epsilon, cap, q)? {
                AdaptiveOutcome::Converged(r) => (Some(r), false),
                AdaptiveOutcome::CapExhausted { .. } => (None, true),
            }
        }
    };

    let embedding = match &sample {
        Some(r) => assemble(ps, &cm, &r.chosen_atoms),
        None => exact_embed(ps),
    };
    Ok(ReduceOutcome {
        embedding,
        target_epsilon: cfg.epsilon,
        theoretical_dimension: theoretical,
        incompressibility,
        sample,
        used_exact_fallback,
        epsilon_flagged,
    })
}

fn explicit_or_theoretical(explicit: Option<usize>, theoretical: Option<usize>) -> Result<usize> {
    explicit.or(theoretical).ok_or_else(|| {
        Error::InvalidInput(
            "the worst-case dimension for these parameters is out of range; pass an explicit \
             dimension (or cap) instead"
                .into(),
        )
    })
}

/// The isometric embedding into `ℓ_p^m`: `y_i(k) = w_k^(1/p)·values[i][k]`.
/// Exact by construction (up to roundoff), at the cost of `d = m`.
pub fn exact_embed(ps: &PointSet) -> Embedding {
    let operator = EmbedOperator {
        density: ps.weights().iter().map(|&w| 1.0 / w).collect(),
        atoms: (0..ps.n_atoms()).collect(),
        scale: 1.0,
    };
    finish(ps, ps.n_atoms(), operator)
}

/// One row of a [`VerifyReport`]: a pair of points, their source and
/// embedded p-th-power distances, and the absolute deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub source: f64,
    pub embedded: f64,
    pub deviation: f64,
}

/// Independent recomputation of both distance matrices, pair by pair.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n_points: usize,
    /// Largest absolute deviation over all pairs.
    pub max_additive_error: f64,
    /// Every pair, in packed upper-triangle order.
    pub pairs: Vec<PairCheck>,
}

impl VerifyReport {
    /// Number of pairs whose deviation exceeds `epsilon`.
    pub fn pairs_violating(&self, epsilon: f64) -> usize {
        self.pairs.iter().filter(|c| c.deviation > epsilon).count()
    }
}

/// Recomputes both distance matrices from scratch and compares them.
pub fn verify(ps: &PointSet, emb: &Embedding) -> Result<VerifyReport> {
    if emb.n_points() != ps.n_points() {
        return Err(Error::DimensionMismatch {
            what: "embedding points vs source points",
            expected: ps.n_points(),
            got: emb.n_points(),
        });
    }
    if emb.p != ps.p() {
        return Err(Error::InvalidInput(format!(
            "embedding exponent {} does not match the point set's {}",
            emb.p,
            ps.p()
        )));
    }
    if let Some(row) = emb.points.iter().find(|r| r.len() != emb.d) {
        return Err(Error::DimensionMismatch {
            what: "embedded row length vs d",
            expected: emb.d,
            got: row.len(),
        });
    }
    let src = ps.distance_matrix();
    let dst = emb.distance_matrix();
    let mut pairs = Vec::with_capacity(pair_count(ps.n_points()));
    let mut max_additive_error = 0.0f64;
    for ((i, j, s), (_, _, e)) in src.iter_pairs().zip(dst.iter_pairs()) {
        let deviation = (e - s).abs();
        if deviation > max_additive_error {
            max_additive_error = deviation;
        }
        pairs.push(PairCheck {
            i,
            j,
            source: s,
            embedded: e,
            deviation,
        });
    }
    Ok(VerifyReport {
        n_points: ps.n_points(),
        max_additive_error,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross_pair() -> PointSet {
        PointSet::new(
            1.0,
            vec![0.5, 0.5],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn two_point_greedy_with_forced_d_is_exact() {
        // Both extreme matrices equal the target, so any selection is exact.
        let ps = cross_pair();
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.1);
        cfg.d_override = Some(2);
        let out = reduce(&ps, &cfg).unwrap();
        assert_eq!(out.embedding.d, 2);
        assert_eq!(out.embedding.achieved_eps, 0.0);
        let emb_dist: f64 = out.embedding.points[0]
            .iter()
            .zip(&out.embedding.points[1])
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        assert!((emb_dist - 1.0).abs() <= 0.1);
    }

    #[test]
    fn identical_zero_points_take_the_zero_shortcut() {
        let ps = PointSet::new(
            2.0,
            vec![0.5, 0.5],
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let cfg = SamplerConfig::new(SamplerMode::Greedy, 0.25);
        let out = reduce(&ps, &cfg).unwrap();
        assert_eq!(out.embedding.d, 1);
        assert_eq!(out.embedding.achieved_eps, 0.0);
        assert!(out.embedding.points.iter().all(|r| r == &vec![0.0]));
        assert!(out.sample.is_none());
        // The stored operator still reproduces Y from the original values.
        for (i, row) in out.embedding.points.iter().enumerate() {
            assert_eq!(&out.embedding.apply(ps.row(i)).unwrap(), row);
        }
    }

    #[test]
    fn identical_nonzero_points_embed_with_zero_error() {
        let ps = PointSet::new(
            2.0,
            vec![0.25, 0.75],
            vec![vec![1.0, -2.0], vec![1.0, -2.0]],
        )
        .unwrap();
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.25);
        cfg.d_override = Some(4);
        let out = reduce(&ps, &cfg).unwrap();
        assert_eq!(out.embedding.achieved_eps, 0.0);
        assert_eq!(out.embedding.points[0], out.embedding.points[1]);
    }

    #[test]
    fn exact_embed_is_exact_and_survives_composition() {
        let ps = PointSet::new(
            2.5,
            vec![0.2, 0.3, 0.5],
            vec![
                vec![1.0, -2.0, 0.5],
                vec![0.0, 1.0, -1.5],
                vec![2.0, 0.25, 0.0],
            ],
        )
        .unwrap();
        let emb = exact_embed(&ps);
        assert_eq!(emb.d, 3);
        assert!(emb.achieved_eps <= 1e-12);

        // Still exact for the original distances after a change of measure.
        let (_, tps) = change_of_measure(&ps).unwrap();
        let emb2 = exact_embed(&tps);
        let dev =
            sup_additive_distortion(&ps.distance_matrix(), &emb2.distance_matrix()).unwrap();
        assert!(dev <= 1e-12);
    }

    #[test]
    fn exact_embed_single_atom_is_a_scaled_scalar() {
        let ps = PointSet::new(3.0, vec![1.0], vec![vec![2.0], vec![-1.0]]).unwrap();
        let emb = exact_embed(&ps);
        assert_eq!(emb.d, 1);
        assert_eq!(emb.points, vec![vec![2.0], vec![-1.0]]);
        assert!(emb.achieved_eps <= 1e-12);
    }

    #[test]
    fn verify_agrees_with_assembly_and_detects_tampering() {
        let ps = PointSet::new(
            1.0,
            vec![0.4, 0.6],
            vec![vec![1.0, 0.5], vec![-0.5, 2.0], vec![0.0, -1.0]],
        )
        .unwrap();
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.5);
        cfg.d_override = Some(64);
        let out = reduce(&ps, &cfg).unwrap();

        let report = verify(&ps, &out.embedding).unwrap();
        assert_eq!(report.max_additive_error, out.embedding.achieved_eps);
        assert_eq!(report.pairs.len(), 3);

        let mut tampered = out.embedding.clone();
        tampered.points[1][0] += 0.75;
        let bad = verify(&ps, &tampered).unwrap();
        assert!(bad.max_additive_error > report.max_additive_error + 0.01);
        assert!(bad.pairs_violating(report.max_additive_error + 0.01) > 0);
    }

    #[test]
    fn operator_is_linear_on_fresh_rows() {
        let ps = PointSet::new(
            2.0,
            vec![0.3, 0.3, 0.4],
            vec![vec![1.0, 0.0, -1.0], vec![0.5, 2.0, 0.0], vec![0.0, 1.0, 1.0]],
        )
        .unwrap();
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.5);
        cfg.d_override = Some(16);
        let emb = reduce(&ps, &cfg).unwrap().embedding;

        let u = [0.5, -1.0, 2.0];
        let v = [1.5, 0.25, -0.5];
        let sum: Vec<f64> = u.iter().zip(&v).map(|(&a, &b)| a + b).collect();
        let eu = emb.apply(&u).unwrap();
        let ev = emb.apply(&v).unwrap();
        let esum = emb.apply(&sum).unwrap();
        for ((&a, &b), &c) in eu.iter().zip(&ev).zip(&esum) {
            assert!((a + b - c).abs() <= 1e-12);
        }
        let scaled: Vec<f64> = u.iter().map(|&a| -2.5 * a).collect();
        let escaled = emb.apply(&scaled).unwrap();
        for (&a, &b) in eu.iter().zip(&escaled) {
            assert!((-2.5 * a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_mode_attaches_best_effort_embedding_on_exhaustion() {
        // Extremes 1.0 and 0.5 mixed at weight 1/3: unreachable at d = 1.
        let ps = PointSet::new(
            1.0,
            vec![1.0 / 3.0, 2.0 / 3.0],
            vec![vec![1.0, 0.5], vec![0.0, 1.0]],
        )
        .unwrap();
        let mut cfg = SamplerConfig::new(SamplerMode::Random, 1e-9);
        cfg.d_override = Some(1);
        cfg.max_retries = 3;
        match reduce(&ps, &cfg).unwrap_err() {
            Error::RetriesExhausted {
                best, embedding, ..
            } => {
                let emb = embedding.expect("best-effort embedding attached");
                assert_eq!(emb.d, 1);
                assert_eq!(emb.n_points(), 2);
                assert_eq!(best.d(), 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn adaptive_mode_falls_back_to_exact_on_cap_exhaustion() {
        // Best achievable error at dimension d ≤ 8 is min_c |c/d − 1/3|/2,
        // far above the 1e−9 target, so the cap must run out.
        let ps = PointSet::new(
            1.0,
            vec![1.0 / 3.0, 2.0 / 3.0],
            vec![vec![1.0, 0.5], vec![0.0, 1.0]],
        )
        .unwrap();
        let mut cfg = SamplerConfig::new(SamplerMode::Adaptive, 1e-9);
        cfg.d_cap = Some(8);
        let out = reduce(&ps, &cfg).unwrap();
        assert!(out.used_exact_fallback);
        assert!(out.sample.is_none());
        assert_eq!(out.embedding.d, ps.n_atoms());
        assert!(out.embedding.achieved_eps <= 1e-12);
    }

    #[test]
    fn epsilon_domain_is_enforced_and_flagged() {
        let ps = cross_pair();
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, -0.5);
        cfg.d_override = Some(2);
        assert!(reduce(&ps, &cfg).is_err());
        cfg.epsilon = 1.5;
        let out = reduce(&ps, &cfg).unwrap();
        assert!(out.epsilon_flagged);
        cfg.epsilon = 0.5;
        let out = reduce(&ps, &cfg).unwrap();
        assert!(!out.epsilon_flagged);
    }

    #[test]
    fn verify_rejects_mismatched_inputs() {
        let ps = cross_pair();
        let emb = exact_embed(&ps);
        let other = PointSet::new(1.0, vec![1.0], vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(
            verify(&other, &emb),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut wrong_p = emb.clone();
        wrong_p.p = 2.0;
        assert!(verify(&ps, &wrong_p).is_err());
    }
}
