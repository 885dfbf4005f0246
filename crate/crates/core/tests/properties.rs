mod common;

use d2d_ee::assignment::brute_force_assignment;
use d2d_ee::channel::{d2d_rate, noise_power_w, pathloss_gain, MIN_LINK_DISTANCE_M};
use d2d_ee::dinkelbach::evaluate_f;
use d2d_ee::power::{feasible_rbs, optimal_power, p_min};
use d2d_ee::{
    generate_scenario, max_weight_assignment, real_roots, AssignmentPolicy, CellConfig, CubicCoefficients, RateMode,
    SolverConfig,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{bisection_roots, random_context, same_roots};

fn from_roots(k: f64, r: [f64; 3]) -> CubicCoefficients {
    let [r1, r2, r3] = r;
    CubicCoefficients::new(k, -k * (r1 + r2 + r3), k * (r1 * r2 + r1 * r3 + r2 * r3), -k * r1 * r2 * r3)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-50.0..50.0f64, cols), rows)
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|r| (Just(r), r..=7))
}

proptest! {
    #[test]
    fn cubic_matches_bisection_for_separated_roots(
        k in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64],
        base in -10.0..10.0f64,
        g1 in 0.05..5.0f64,
        g2 in 0.05..5.0f64,
    ) {
        let c = from_roots(k, [base, base + g1, base + g1 + g2]);
        let ours = real_roots(&c).unwrap();
        let oracle = bisection_roots(&c);
        prop_assert_eq!(ours.len(), 3);
        prop_assert!(same_roots(&ours, &oracle, 1e-6), "{:?} vs {:?}", ours, oracle);
    }

    #[test]
    fn cubic_roots_invariant_under_scaling(
        a in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64],
        b in -1e3..1e3f64,
        c in -1e3..1e3f64,
        d in -1e3..1e3f64,
        scale in prop_oneof![-1e6..-1e-6f64, 1e-6..1e6f64],
    ) {
        let p = CubicCoefficients::new(a, b, c, d);
        let q = CubicCoefficients::new(a * scale, b * scale, c * scale, d * scale);
        let rp = real_roots(&p).unwrap();
        let rq = real_roots(&q).unwrap();
        // Near-tangent cubics can legitimately flip between one and three
        // roots under rounding; compare only when the counts agree.
        if rp.len() == rq.len() {
            prop_assert!(same_roots(&rp, &rq, 1e-6), "{:?} vs {:?}", rp, rq);
        }
    }

    #[test]
    fn single_real_root_when_complex_pair(
        k in prop_oneof![-1e2..-1e-2f64, 1e-2..1e2f64],
        r in -10.0..10.0f64,
        re in -10.0..10.0f64,
        im in 0.1..10.0f64,
    ) {
        // k (x - r)(x^2 - 2 re x + re^2 + im^2)
        let m = re * re + im * im;
        let c = CubicCoefficients::new(k, -k * (2.0 * re + r), k * (m + 2.0 * re * r), -k * r * m);
        let roots = real_roots(&c).unwrap();
        prop_assert_eq!(roots.len(), 1);
        prop_assert!((roots[0] - r).abs() <= 1e-6 * (1.0 + r.abs()), "{:?} vs {}", roots, r);
    }

    #[test]
    fn hungarian_matches_brute_force((rows, cols) in shape(), seed in any::<u64>()) {
        let u = matrix_from_seed(rows, cols, seed);
        let fast = max_weight_assignment(&u, AssignmentPolicy::Strict).unwrap();
        let slow = brute_force_assignment(&u).unwrap();
        prop_assert!((fast.total_utility - slow.total_utility).abs() <= 1e-9 * (1.0 + slow.total_utility.abs()));
    }

    #[test]
    fn hungarian_equivariant_under_row_permutation(u in matrix(5, 6), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| u[i].clone()).collect();
        let a = max_weight_assignment(&u, AssignmentPolicy::Strict).unwrap();
        let b = max_weight_assignment(&permuted, AssignmentPolicy::Strict).unwrap();
        prop_assert!((a.total_utility - b.total_utility).abs() <= 1e-9);
        // Each assignment is a valid matching.
        let mut cols: Vec<usize> = b.rb_of_pair.iter().map(|c| c.unwrap()).collect();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(cols.len(), 5);
    }

    #[test]
    fn row_offset_shifts_total_only(u in matrix(4, 6), row in 0usize..4, offset in -100.0..100.0f64) {
        let mut shifted = u.clone();
        for x in &mut shifted[row] {
            *x += offset;
        }
        let a = max_weight_assignment(&u, AssignmentPolicy::Strict).unwrap();
        let b = max_weight_assignment(&shifted, AssignmentPolicy::Strict).unwrap();
        prop_assert!((a.total_utility + offset - b.total_utility).abs() <= 1e-9 * (1.0 + b.total_utility.abs()));
    }

    #[test]
    fn p_min_grows_with_rate_target(seed in any::<u64>(), g1 in 0.0..4.0f64, g2 in 0.0..4.0f64) {
        let mut ctx = random_context(&mut StdRng::seed_from_u64(seed));
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        ctx.gamma_bps = lo * ctx.w_hz;
        let p_lo = p_min(&ctx);
        ctx.gamma_bps = hi * ctx.w_hz;
        prop_assert!(p_lo <= p_min(&ctx));
    }

    #[test]
    fn net_rate_never_exceeds_rate(seed in any::<u64>(), frac in 0.0..=1.0f64) {
        let ctx = random_context(&mut StdRng::seed_from_u64(seed));
        let p = frac * ctx.p_max_w;
        prop_assert!(ctx.net_rate(p) <= ctx.rate(p));
        prop_assert!(ctx.cu_loss(p) >= 0.0);
    }

    #[test]
    fn chosen_power_stays_in_interval(seed in any::<u64>(), cu_loss in any::<bool>()) {
        let ctx = random_context(&mut StdRng::seed_from_u64(seed));
        let mode = if cu_loss { RateMode::CuLoss } else { RateMode::NoCuLoss };
        let d = optimal_power(&ctx, mode);
        if d.feasible {
            let lo = p_min(&ctx);
            prop_assert!(d.power_w >= lo * (1.0 - 1e-12) && d.power_w <= ctx.p_max_w * (1.0 + 1e-12));
        } else {
            prop_assert!(p_min(&ctx) > ctx.p_max_w);
        }
    }

    #[test]
    fn d2d_rate_is_concave_and_increasing(
        h_dd in 1e-11..1e-6f64,
        p_cu in 1e-4..0.2f64,
        h_cd in 1e-13..1e-8f64,
        p1 in 0.0..0.1f64,
        p2 in 0.0..0.1f64,
    ) {
        let w = 180_000.0;
        let n0 = noise_power_w(-174.0, w);
        let r = |p: f64| d2d_rate(p, h_dd, p_cu, h_cd, n0, w).unwrap();
        let mid = r(0.5 * (p1 + p2));
        let chord = 0.5 * (r(p1) + r(p2));
        prop_assert!(mid >= chord - 1e-9 * mid.abs().max(1.0));
        prop_assert!((r(p1) - r(p2)) * (p1 - p2) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feasible_rbs_grow_with_threshold(seed in 0u64..10_000, t1 in 1e-16..1e-10f64, t2 in 1e-16..1e-10f64) {
        let inst = generate_scenario(&CellConfig::default(), seed).unwrap().instance();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for pair in 0..inst.n_pairs() {
            let small = feasible_rbs(&inst, pair, lo);
            let large = feasible_rbs(&inst, pair, hi);
            prop_assert!(small.iter().all(|rb| large.contains(rb)));
        }
    }

    #[test]
    fn inner_value_non_increasing_in_q(seed in 0u64..10_000, q1 in 0.0..5e7f64, q2 in 0.0..5e7f64, cu_loss in any::<bool>()) {
        let inst = generate_scenario(&CellConfig::default(), seed).unwrap().instance();
        let cfg = SolverConfig {
            mode: if cu_loss { RateMode::CuLoss } else { RateMode::NoCuLoss },
            policy: AssignmentPolicy::DropInfeasible,
            ..SolverConfig::default()
        };
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let f_lo = evaluate_f(&inst, lo, &cfg).unwrap().f_value;
        let f_hi = evaluate_f(&inst, hi, &cfg).unwrap().f_value;
        prop_assert!(f_hi <= f_lo + 1e-9 * f_lo.abs().max(1.0), "F({lo}) = {f_lo}, F({hi}) = {f_hi}");
    }

    #[test]
    fn scenarios_are_reproducible(seed in any::<u64>()) {
        let cfg = CellConfig::default();
        prop_assert_eq!(generate_scenario(&cfg, seed).unwrap(), generate_scenario(&cfg, seed).unwrap());
    }
}

fn matrix_from_seed(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(seed);
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect()
}

#[test]
fn shadowing_statistics_over_many_drops() {
    let cfg = CellConfig::default();
    let mut samples = Vec::new();
    for seed in 1..=1000 {
        let s = generate_scenario(&cfg, seed).unwrap();
        for ((tx, rx), g) in s.d2d_tx_positions.iter().zip(&s.d2d_rx_positions).zip(&s.gain_dd) {
            let d = tx.distance(*rx).max(MIN_LINK_DISTANCE_M);
            let pl = pathloss_gain(d, cfg.kappa, cfg.chi).unwrap();
            samples.push(10.0 * (g / pl).log10());
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 0.3, "mean {mean}");
    assert!((std - cfg.shadowing_sigma_db).abs() < 0.5, "std {std}");
}
