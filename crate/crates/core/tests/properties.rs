//! Property tests for the algebraic invariants of the pipeline: measure
//! bookkeeping, cone reconstruction, norm comparisons, greedy optimality at
//! each step, and operator/verification round trips.

use lp_reduce::bound::{audit_linear_map, ModuliPair};
use lp_reduce::cone::{decompose, extreme_matrix};
use lp_reduce::embed::{reduce, verify};
use lp_reduce::gen::point_norm;
use lp_reduce::measure::change_of_measure;
use lp_reduce::sampler::{greedy_sample, lq_norm, q_exponent_for, SamplerConfig, SamplerMode};
use lp_reduce::{sup_additive_distortion, PointSet};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// |a − b| within `tol`, measured relative to the larger magnitude once the
/// values leave the unit scale.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

prop_compose! {
    fn point_set()(
        (p_idx, n, m) in (0usize..4, 2usize..6, 1usize..6)
    )(
        p_idx in Just(p_idx),
        raw_weights in proptest::collection::vec(0.05f64..1.0, m),
        values in proptest::collection::vec(
            proptest::collection::vec(-4.0f64..4.0, m), n),
    ) -> PointSet {
        PointSet::new(EXPONENTS[p_idx], normalized(raw_weights), values).unwrap()
    }
}

proptest! {
    #[test]
    fn distances_survive_atom_permutation(
        ps in point_set(),
        perm_seed in proptest::collection::vec(0usize..1000, 8),
    ) {
        let m = ps.n_atoms();
        // Fisher–Yates driven by the generated swap values.
        let mut order: Vec<usize> = (0..m).collect();
        for (i, &r) in perm_seed.iter().enumerate().take(m) {
            order.swap(i, r % m);
        }
        let weights: Vec<f64> = order.iter().map(|&k| ps.weights()[k]).collect();
        let values: Vec<Vec<f64>> = (0..ps.n_points())
            .map(|i| order.iter().map(|&k| ps.row(i)[k]).collect())
            .collect();
        let permuted = PointSet::new(ps.p(), weights, values).unwrap();

        let a = ps.distance_matrix();
        let b = permuted.distance_matrix();
        for ((_, _, x), (_, _, y)) in a.iter_pairs().zip(b.iter_pairs()) {
            prop_assert!(close(x, y, 1e-12));
        }
        prop_assert!(close(
            ps.incompressibility(),
            permuted.incompressibility(),
            1e-12
        ));
    }

    #[test]
    fn splitting_an_atom_changes_nothing(
        ps in point_set(),
        split_raw in 0usize..64,
        alpha in 0.05f64..0.95,
    ) {
        let m = ps.n_atoms();
        let k = split_raw % m;
        let mut weights = ps.weights().to_vec();
        let w = weights[k];
        weights[k] = alpha * w;
        weights.push((1.0 - alpha) * w);
        let values: Vec<Vec<f64>> = (0..ps.n_points())
            .map(|i| {
                let mut row = ps.row(i).to_vec();
                row.push(row[k]);
                row
            })
            .collect();
        let split = PointSet::new(ps.p(), weights, values).unwrap();

        let a = ps.distance_matrix();
        let b = split.distance_matrix();
        for ((_, _, x), (_, _, y)) in a.iter_pairs().zip(b.iter_pairs()) {
            prop_assert!(close(x, y, 1e-12));
        }
        prop_assert!(close(
            ps.incompressibility(),
            split.incompressibility(),
            1e-12
        ));
    }

    #[test]
    fn disjoint_union_mixes_distances_convexly(
        (p_idx, n, m1, m2) in (0usize..4, 2usize..5, 1usize..4, 1usize..4),
        lambda in 0.1f64..0.9,
    ) {
        let p = EXPONENTS[p_idx];
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let mk = |m: usize, runner: &mut proptest::test_runner::TestRunner| {
            let raw_w = proptest::collection::vec(0.05f64..1.0, m)
                .new_tree(runner).unwrap().current();
            let values = proptest::collection::vec(
                proptest::collection::vec(-4.0f64..4.0, m), n)
                .new_tree(runner).unwrap().current();
            (normalized(raw_w), values)
        };
        let (w1, v1) = mk(m1, runner);
        let (w2, v2) = mk(m2, runner);
        let ps1 = PointSet::new(p, w1.clone(), v1.clone()).unwrap();
        let ps2 = PointSet::new(p, w2.clone(), v2.clone()).unwrap();

        let weights: Vec<f64> = w1
            .iter()
            .map(|&w| lambda * w)
            .chain(w2.iter().map(|&w| (1.0 - lambda) * w))
            .collect();
        let values: Vec<Vec<f64>> = (0..n)
            .map(|i| v1[i].iter().chain(&v2[i]).copied().collect())
            .collect();
        let union = PointSet::new(p, weights, values).unwrap();

        let du = union.distance_matrix();
        let d1 = ps1.distance_matrix();
        let d2 = ps2.distance_matrix();
        for (((_, _, u), (_, _, a)), (_, _, b)) in
            du.iter_pairs().zip(d1.iter_pairs()).zip(d2.iter_pairs())
        {
            prop_assert!(close(u, lambda * a + (1.0 - lambda) * b, 1e-12));
        }
    }

    #[test]
    fn incompressibility_sits_between_the_norm_extremes(ps in point_set()) {
        let incompressibility = ps.incompressibility();
        let max_point_norm = (0..ps.n_points())
            .map(|i| point_norm(&ps, i))
            .fold(0.0f64, f64::max);
        let max_value = ps
            .rows()
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        prop_assert!(incompressibility >= max_point_norm - 1e-12 * max_point_norm.max(1.0));
        prop_assert!(incompressibility <= max_value + 1e-12 * max_value.max(1.0));
    }

    #[test]
    fn change_of_measure_is_isometric_and_capped(ps in point_set()) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let incompressibility = ps.incompressibility();
        let (cm, tps) = change_of_measure(&ps).unwrap();

        let before = ps.distance_matrix();
        let after = tps.distance_matrix();
        prop_assert!(sup_additive_distortion(&before, &after).unwrap() <= 1e-10);

        let max_after = tps
            .rows()
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        prop_assert!(max_after <= incompressibility + 1e-9);

        let weight_sum: f64 = cm.new_weights.iter().sum();
        prop_assert!((weight_sum - 1.0).abs() <= 1e-12);
        prop_assert!(close(cm.normalizer, incompressibility.powf(ps.p()), 1e-12));
        prop_assert!(cm.density.iter().all(|&f| f > 0.0));
    }

    #[test]
    fn change_of_measure_is_idempotent(ps in point_set()) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let (_, tps) = change_of_measure(&ps).unwrap();
        let (cm2, _) = change_of_measure(&tps).unwrap();
        prop_assert!(cm2.density.iter().all(|&f| (f - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn change_of_measure_scaling_equivariance(
        ps in point_set(),
        c in 0.25f64..4.0,
    ) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let (cm, tps) = change_of_measure(&ps).unwrap();
        let (cm_scaled, tps_scaled) = change_of_measure(&ps.scaled(c).unwrap()).unwrap();

        prop_assert!(close(
            cm_scaled.normalizer,
            c.powf(ps.p()) * cm.normalizer,
            1e-12
        ));
        for (&a, &b) in cm_scaled.new_weights.iter().zip(&cm.new_weights) {
            prop_assert!(close(a, b, 1e-12));
        }
        for i in 0..ps.n_points() {
            for (&a, &b) in tps_scaled.row(i).iter().zip(tps.row(i)) {
                prop_assert!(close(a, c * b, 1e-12));
            }
        }
    }

    #[test]
    fn cone_reconstruction_radius_and_translation(ps in point_set()) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let (_, tps) = change_of_measure(&ps).unwrap();
        let dec = decompose(&tps);

        // Reconstruction: the λ-mix of extreme matrices is the target.
        let n_pairs = dec.target.packed().len();
        let mut mix = vec![0.0f64; n_pairs];
        for k in 0..dec.atom_count() {
            let ext = extreme_matrix(&tps, k).unwrap();
            for (acc, &x) in mix.iter_mut().zip(ext.packed()) {
                *acc += dec.lambda[k] * x;
            }
        }
        for (acc, &t) in mix.iter().zip(dec.target.packed()) {
            prop_assert!((acc - t).abs() <= 1e-10 * t.abs().max(1.0));
        }

        // Radius never exceeds the diameter bound from the largest value.
        let max_value = tps
            .rows()
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let p = tps.p();
        prop_assert!(dec.radius <= (2.0 * max_value).powf(p) * (1.0 + 1e-12));

        // Extreme matrices ignore translation of a column.
        let k = 0;
        let shifted_values: Vec<Vec<f64>> = (0..tps.n_points())
            .map(|i| {
                let mut row = tps.row(i).to_vec();
                row[k] += 2.5;
                row
            })
            .collect();
        let shifted = PointSet::new(p, tps.weights().to_vec(), shifted_values).unwrap();
        let before = extreme_matrix(&tps, k).unwrap();
        let after = extreme_matrix(&shifted, k).unwrap();
        for (&a, &b) in before.packed().iter().zip(after.packed()) {
            prop_assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn lq_norm_sandwiches_the_sup_norm(
        v in proptest::collection::vec(-10.0f64..10.0, 1..200),
    ) {
        let n = v.len();
        let q = (n as f64).ln().max(2.0);
        let sup = v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let lq = lq_norm(&v, q);
        prop_assert!(sup <= lq * (1.0 + 1e-12) + 1e-300);
        prop_assert!(lq <= std::f64::consts::E * sup * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn greedy_choice_is_a_step_minimizer(
        ps in point_set(),
        d_raw in 1usize..10,
    ) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let (_, tps) = change_of_measure(&ps).unwrap();
        let dec = decompose(&tps);
        let m = dec.atom_count();
        let q = q_exponent_for(tps.n_points());
        let result = greedy_sample(&dec, &tps, d_raw).unwrap();
        prop_assert_eq!(result.chosen_atoms.len(), d_raw);

        let n_pairs = dec.target.packed().len();
        let extremes: Vec<Vec<f64>> = (0..m)
            .map(|k| extreme_matrix(&tps, k).unwrap().packed().to_vec())
            .collect();
        let mut sum = vec![0.0f64; n_pairs];
        for (step, &chosen) in result.chosen_atoms.iter().enumerate() {
            let s1 = (step + 1) as f64;
            let phi = |k: usize| {
                let diff: Vec<f64> = sum
                    .iter()
                    .zip(&extremes[k])
                    .zip(dec.target.packed())
                    .map(|((&acc, &x), &t)| (acc + x) / s1 - t)
                    .collect();
                lq_norm(&diff, q)
            };
            let phis: Vec<f64> = (0..m).map(phi).collect();
            let best = phis.iter().cloned().fold(f64::INFINITY, f64::min);
            // The chosen atom attains the step minimum (up to roundoff from
            // the replay's different evaluation order).
            prop_assert!(
                phis[chosen] <= best * (1.0 + 1e-9) + 1e-12,
                "step {}: chose {} with {} but the minimum was {}",
                step, chosen, phis[chosen], best
            );
            // When one atom wins by a clear margin, it must be the one.
            let (arg_best, _) = phis
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                .unwrap();
            let unique = phis
                .iter()
                .enumerate()
                .all(|(k, &v)| k == arg_best || v > best * (1.0 + 1e-8) + 1e-12);
            if unique {
                prop_assert_eq!(chosen, arg_best);
            }
            for (acc, &x) in sum.iter_mut().zip(&extremes[chosen]) {
                *acc += x;
            }
        }

        // Determinism: the same call reproduces the same multiset bitwise.
        let again = greedy_sample(&dec, &tps, d_raw).unwrap();
        prop_assert_eq!(result, again);
    }

    #[test]
    fn reduce_round_trip_operator_and_pth_root_gap(
        ps in point_set(),
        d_pow in 2usize..6,
    ) {
        if ps.incompressibility() == 0.0 {
            return Ok(());
        }
        let mut cfg = SamplerConfig::new(SamplerMode::Greedy, 0.5);
        cfg.d_override = Some(1 << d_pow);
        let out = reduce(&ps, &cfg).unwrap();
        let emb = &out.embedding;

        // Verification recomputes exactly what assembly recorded.
        let report = verify(&ps, emb).unwrap();
        prop_assert_eq!(report.max_additive_error, emb.achieved_eps);

        // The stored operator regenerates the coordinates from the original
        // value rows.
        for (i, row) in emb.points.iter().enumerate() {
            let regen = emb.apply(ps.row(i)).unwrap();
            for (&a, &b) in regen.iter().zip(row) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }

        // Additive error on p-th powers bounds the norm difference by its
        // p-th root.
        let p = ps.p();
        let allowance = emb.achieved_eps.powf(1.0 / p) + 1e-9;
        let src = ps.distance_matrix();
        let dst = emb.distance_matrix();
        for ((_, _, s), (_, _, e)) in src.iter_pairs().zip(dst.iter_pairs()) {
            let gap = (e.powf(1.0 / p) - s.powf(1.0 / p)).abs();
            prop_assert!(gap <= allowance, "gap {} vs allowance {}", gap, allowance);
        }

        // The sampler's achieved error and the assembled embedding's agree
        // up to reassembly roundoff.
        if let Some(sample) = &out.sample {
            prop_assert!(close(sample.achieved_sup_error, emb.achieved_eps, 1e-10));
        }
    }

    #[test]
    fn walsh_parseval_identity_for_any_matrix(
        m in 1usize..=6,
        seed in 0u64..1000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cols = 1usize << m;
        let d = 1 + (seed as usize % 7);
        let t: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let wide = ModuliPair::new(1e-9, 1e9).unwrap();
        let report = audit_linear_map(1.0, m, &t, wide).unwrap();
        prop_assert!(report.parseval_residual <= 1e-9);
    }
}
