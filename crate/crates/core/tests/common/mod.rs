#![allow(dead_code)]

use d2d_ee::channel::noise_power_w;
use d2d_ee::power::PairRbContext;
use d2d_ee::CubicCoefficients;
use rand::Rng;

/// Real roots of a cubic by bisection on the monotone pieces between its
/// critical points. Independent of the closed-form solver.
pub fn bisection_roots(c: &CubicCoefficients) -> Vec<f64> {
    let f = |x: f64| ((c.a * x + c.b) * x + c.c) * x + c.d;
    let bound = 1.0 + c.b.abs().max(c.c.abs()).max(c.d.abs()) / c.a.abs();
    // f'(x) = 3a x^2 + 2b x + c
    let (qa, qb, qc) = (3.0 * c.a, 2.0 * c.b, c.c);
    let disc = qb * qb - 4.0 * qa * qc;
    let mut knots = vec![-bound];
    if disc > 0.0 {
        let t = -0.5 * (qb + qb.signum() * disc.sqrt());
        let mut crit = [t / qa, if t != 0.0 { qc / t } else { -qb / (2.0 * qa) }];
        crit.sort_by(f64::total_cmp);
        knots.extend(crit.iter().copied().filter(|x| x.abs() < bound));
    }
    knots.push(bound);

    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if f(bound) == 0.0 {
        roots.push(bound);
    }
    // Tangent (double) roots sit on a critical point without a sign change.
    for &k in &knots[1..knots.len() - 1] {
        let scale = (c.a * k * k * k).abs().max((c.b * k * k).abs()).max((c.c * k).abs()).max(c.d.abs());
        if f(k).abs() <= 1e-13 * scale && !roots.iter().any(|r| (r - k).abs() <= 1e-7 * k.abs().max(1e-300)) {
            roots.push(k);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

pub fn relative_residual(c: &CubicCoefficients, x: f64) -> f64 {
    let scale = (c.a * x * x * x).abs().max((c.b * x * x).abs()).max((c.c * x).abs()).max(c.d.abs()).max(1.0);
    c.eval(x).abs() / scale
}

pub fn same_roots(a: &[f64], b: &[f64], rtol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rtol * x.abs().max(y.abs()))
}

/// A coefficient with random sign and log-uniform magnitude in [1e-3, 1e3].
pub fn log_uniform_coefficient<R: Rng>(rng: &mut R) -> f64 {
    let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Half of the draws are built from three random real roots so that every
/// root-count case is exercised.
pub fn random_cubic<R: Rng>(rng: &mut R) -> CubicCoefficients {
    if rng.gen_bool(0.5) {
        let a = log_uniform_coefficient(rng);
        let r: [f64; 3] = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        CubicCoefficients::new(
            a,
            -a * (r[0] + r[1] + r[2]),
            a * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]),
            -a * r[0] * r[1] * r[2],
        )
    } else {
        CubicCoefficients::new(
            log_uniform_coefficient(rng),
            log_uniform_coefficient(rng),
            log_uniform_coefficient(rng),
            log_uniform_coefficient(rng),
        )
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..hi.log10()))
}

/// Link-budget-scale context: gains from 1e-13 to 1e-6, W = 180 kHz.
pub fn random_context<R: Rng>(rng: &mut R) -> PairRbContext {
    let w_hz = 180_000.0;
    PairRbContext {
        h_dd: log_uniform(rng, 1e-11, 1e-6),
        h_cd: log_uniform(rng, 1e-13, 1e-8),
        h_cb: log_uniform(rng, 1e-12, 1e-8),
        h_db: log_uniform(rng, 1e-13, 1e-8),
        p_cu_w: log_uniform(rng, 1e-4, 0.2),
        n0_w: noise_power_w(-174.0, w_hz),
        w_hz,
        gamma_bps: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..4.0) * w_hz },
        p_max_w: 0.1,
        q_s: log_uniform(rng, 1e5, 1e8),
    }
}
