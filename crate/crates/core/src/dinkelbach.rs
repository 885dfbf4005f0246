//! Dinkelbach iteration for the EE ratio `sum R / (sum P + P_C)`.
//!
//! Starting from `q = 0`, each iteration maximizes the subtractive form
//! `F(q) = max sum (R - q P) - q P_C` with the two-layer scheme (per-entry
//! power optimization, then assignment) and moves `q` to the ratio achieved
//! by the maximizer. The loop stops once `|F(q)| / W` drops below `epsilon`.

use serde::{Deserialize, Serialize};

use crate::assignment::{max_weight_assignment, Assignment, AssignmentPolicy};
use crate::channel::ProblemInstance;
use crate::error::{domain, Error, Result};
use crate::power::{build_utility_matrix, p_min, PairRbContext, RateMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on `|F(q)|`, in bits/s per Hz.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub mode: RateMode,
    pub policy: AssignmentPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iterations: 50,
            mode: RateMode::NoCuLoss,
            policy: AssignmentPolicy::Strict,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one inner two-layer solve at a fixed `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub f_value: f64,
    pub assignment: Assignment,
    /// Transmit power per pair; 0 for unserved pairs.
    pub powers: Vec<f64>,
    /// Rate per pair in the solver's rate mode; 0 for unserved pairs.
    pub rates: Vec<f64>,
}

impl InnerSolution {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn sum_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub q_s: f64,
    pub f_value: f64,
    pub assignment: Assignment,
    pub powers: Vec<f64>,
    pub sum_rate: f64,
    pub sum_power: f64,
    /// Some served pair has a negative net rate (CU-loss mode only).
    pub negative_net_rate: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DinkelbachTrace {
    pub iterations: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Achieved EE in bits/s per watt.
    pub ee: f64,
    pub assignment: Assignment,
    pub powers: Vec<f64>,
    pub rates: Vec<f64>,
    pub trace: DinkelbachTrace,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.trace.iterations.len()
    }
}

/// `sum rates / (sum powers + p_c_w)`.
pub fn compute_ee(rates: &[f64], powers: &[f64], p_c_w: f64) -> Result<f64> {
    let denominator = powers.iter().sum::<f64>() + p_c_w;
    if !(denominator > 0.0) {
        return Err(domain("EE denominator must be positive"));
    }
    Ok(rates.iter().sum::<f64>() / denominator)
}

/// Inner problem at fixed `q`: utility matrix, then assignment.
pub fn evaluate_f(inst: &ProblemInstance, q_s: f64, config: &SolverConfig) -> Result<InnerSolution> {
    let matrix = build_utility_matrix(inst, q_s, config.mode, inst.tau_w);
    let assignment = max_weight_assignment(&matrix.utilities, config.policy)?;
    let n = inst.n_pairs();
    let mut powers = vec![0.0; n];
    let mut rates = vec![0.0; n];
    for (pair, rb) in assignment.served() {
        let decision = &matrix.decisions[pair][rb];
        let ctx = PairRbContext::from_instance(inst, pair, rb, q_s);
        powers[pair] = decision.power_w;
        rates[pair] = ctx.rate_in(config.mode, decision.power_w);
    }
    Ok(InnerSolution {
        f_value: assignment.total_utility - q_s * inst.p_c_w,
        assignment,
        powers,
        rates,
    })
}

pub fn solve(inst: &ProblemInstance, config: &SolverConfig) -> Result<Solution> {
    inst.validate()?;
    config.validate()?;
    let mut trace = DinkelbachTrace::default();
    let mut q_s = 0.0;
    let mut best_ee = 0.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let inner = evaluate_f(inst, q_s, config)?;
        let sum_rate = inner.sum_rate();
        let sum_power = inner.sum_power();
        let next_q = sum_rate / (sum_power + inst.p_c_w);
        best_ee = best_ee.max(next_q);
        residual = (inner.f_value / inst.w_hz).abs();
        trace.iterations.push(IterationRecord {
            q_s,
            f_value: inner.f_value,
            assignment: inner.assignment.clone(),
            powers: inner.powers.clone(),
            sum_rate,
            sum_power,
            negative_net_rate: inner.assignment.served().any(|(i, _)| inner.rates[i] < 0.0),
        });
        if residual < config.epsilon {
            return Ok(Solution {
                ee: next_q,
                assignment: inner.assignment,
                powers: inner.powers,
                rates: inner.rates,
                trace,
            });
        }
        q_s = next_q;
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        residual,
        best_ee,
    })
}

/// Fraction of (pair, RB) combinations rejected by the interference threshold.
pub fn tau_filtered_fraction(inst: &ProblemInstance) -> f64 {
    let total = inst.n_pairs() * inst.n_rbs();
    if total == 0 {
        return 0.0;
    }
    let filtered = (0..inst.n_pairs())
        .flat_map(|i| (0..inst.n_rbs()).map(move |j| (i, j)))
        .filter(|&(i, j)| inst.interference_w(i, j) > inst.tau_w)
        .count();
    filtered as f64 / total as f64
}

pub const BRUTE_FORCE_MAX_PAIRS: usize = 3;
pub const BRUTE_FORCE_MAX_RBS: usize = 4;
pub const BRUTE_FORCE_MAX_GRID: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSolution {
    pub ee: f64,
    pub assignment: Assignment,
    pub powers: Vec<f64>,
    /// Largest EE change caused by moving one pair's power a single grid
    /// step away from the returned point, summed over pairs.
    pub resolution_bound: f64,
}

struct PowerGrid {
    powers: Vec<f64>,
    rates: Vec<f64>,
}

/// Exhaustive maximization of the EE ratio over injective assignments and
/// per-pair power grids spanning `[p_min, p_max]`.
///
/// Only assignments serving the largest achievable number of pairs are
/// considered, matching the drop-infeasible policy of the solver.
pub fn joint_brute_force(inst: &ProblemInstance, mode: RateMode, grid_points: usize) -> Result<BruteForceSolution> {
    inst.validate()?;
    let (n, m) = (inst.n_pairs(), inst.n_rbs());
    if n > BRUTE_FORCE_MAX_PAIRS || m > BRUTE_FORCE_MAX_RBS || !(2..=BRUTE_FORCE_MAX_GRID).contains(&grid_points) {
        return Err(Error::TooLarge {
            rows: n,
            cols: m,
            limit: BRUTE_FORCE_MAX_GRID,
        });
    }

    let grids: Vec<Vec<Option<PowerGrid>>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if inst.interference_w(i, j) > inst.tau_w {
                        return None;
                    }
                    let ctx = PairRbContext::from_instance(inst, i, j, 0.0);
                    let (lo, hi) = (p_min(&ctx), inst.p_max_w);
                    if !(lo <= hi) {
                        return None;
                    }
                    let powers: Vec<f64> = (0..grid_points)
                        .map(|k| lo + (hi - lo) * k as f64 / (grid_points - 1) as f64)
                        .collect();
                    let rates = powers.iter().map(|&p| ctx.rate_in(mode, p)).collect();
                    Some(PowerGrid { powers, rates })
                })
                .collect()
        })
        .collect();

    let mut maps = Vec::new();
    collect_maps(&grids, &mut Vec::new(), &mut vec![false; m], &mut maps);
    let most_served = maps.iter().map(|map| map.iter().flatten().count()).max().unwrap_or(0);

    let mut best: Option<(f64, Vec<Option<usize>>, Vec<usize>)> = None;
    for map in maps.iter().filter(|map| map.iter().flatten().count() == most_served) {
        let served: Vec<&PowerGrid> = map
            .iter()
            .enumerate()
            .filter_map(|(i, rb)| rb.map(|j| grids[i][j].as_ref().expect("admissible")))
            .collect();
        let mut index = vec![0; served.len()];
        let mut local_best = (f64::NEG_INFINITY, Vec::new());
        search_grid(&served, inst.p_c_w, 0, 0.0, 0.0, &mut index, &mut local_best);
        if best.as_ref().is_none_or(|(ee, _, _)| local_best.0 > *ee) {
            best = Some((local_best.0, map.clone(), local_best.1));
        }
    }

    let Some((ee, map, idx)) = best else {
        return Err(Error::Infeasible { pairs: (0..n).collect() });
    };
    let served: Vec<(usize, &PowerGrid)> = map
        .iter()
        .enumerate()
        .filter_map(|(i, rb)| rb.map(|j| (i, grids[i][j].as_ref().expect("admissible"))))
        .collect();
    let ee_at = |idx: &[usize]| {
        let rate: f64 = served.iter().zip(idx).map(|((_, g), &k)| g.rates[k]).sum();
        let power: f64 = served.iter().zip(idx).map(|((_, g), &k)| g.powers[k]).sum();
        rate / (power + inst.p_c_w)
    };
    let mut resolution_bound = 0.0;
    for s in 0..served.len() {
        let mut worst = 0.0f64;
        for step in [-1i64, 1] {
            let k = idx[s] as i64 + step;
            if k < 0 || k >= grid_points as i64 {
                continue;
            }
            let mut moved = idx.clone();
            moved[s] = k as usize;
            worst = worst.max((ee_at(&moved) - ee).abs());
        }
        resolution_bound += worst;
    }

    let mut powers = vec![0.0; n];
    let mut rb_of_pair = vec![None; n];
    for ((i, g), &k) in served.iter().zip(&idx) {
        powers[*i] = g.powers[k];
        rb_of_pair[*i] = map[*i];
    }
    let dropped = (0..n).filter(|&i| rb_of_pair[i].is_none()).collect();
    Ok(BruteForceSolution {
        ee: if ee.is_finite() { ee } else { 0.0 },
        assignment: Assignment {
            rb_of_pair,
            dropped,
            total_utility: f64::NAN,
        },
        powers,
        resolution_bound,
    })
}

fn collect_maps(
    grids: &[Vec<Option<PowerGrid>>],
    current: &mut Vec<Option<usize>>,
    used: &mut [bool],
    out: &mut Vec<Vec<Option<usize>>>,
) {
    let i = current.len();
    if i == grids.len() {
        out.push(current.clone());
        return;
    }
    for j in 0..used.len() {
        if used[j] || grids[i][j].is_none() {
            continue;
        }
        used[j] = true;
        current.push(Some(j));
        collect_maps(grids, current, used, out);
        current.pop();
        used[j] = false;
    }
    current.push(None);
    collect_maps(grids, current, used, out);
    current.pop();
}

fn search_grid(
    served: &[&PowerGrid],
    p_c_w: f64,
    depth: usize,
    rate: f64,
    power: f64,
    index: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if depth == served.len() {
        let ee = rate / (power + p_c_w);
        if ee > best.0 {
            *best = (ee, index.clone());
        }
        return;
    }
    let grid = served[depth];
    for k in 0..grid.powers.len() {
        index[depth] = k;
        search_grid(served, p_c_w, depth + 1, rate + grid.rates[k], power + grid.powers[k], index, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_link(p_c_w: f64) -> ProblemInstance {
        ProblemInstance {
            gain_dd: vec![1e-7],
            gain_cd: vec![vec![1e-14]],
            gain_cb: vec![1e-10],
            gain_db: vec![1e-12],
            cu_power_w: vec![0.05],
            n0_w: 7.16e-16,
            w_hz: 180_000.0,
            gamma_bps: 0.0,
            p_max_w: 0.1,
            tau_w: 1.0,
            p_c_w,
        }
    }

    #[test]
    fn compute_ee_examples() {
        assert_eq!(compute_ee(&[1.0, 1.0], &[0.5, 0.5], 1.0).unwrap(), 1.0);
        assert_eq!(compute_ee(&[0.0, 0.0], &[0.1, 0.2], 1.0).unwrap(), 0.0);
        // log2(1 + 1.3327/0.11) / 2.3327, mpmath
        let ee = compute_ee(&[3.713195903184838], &[1.3327], 1.0).unwrap();
        assert!((ee - 1.5918017332639596).abs() < 1e-12);
        assert!(compute_ee(&[1.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn evaluate_f_at_zero_uses_full_power() {
        let inst = single_link(0.2);
        let cfg = SolverConfig::default();
        let inner = evaluate_f(&inst, 0.0, &cfg).unwrap();
        assert_eq!(inner.powers, vec![0.1]);
        let ctx = PairRbContext::from_instance(&inst, 0, 0, 0.0);
        assert_eq!(inner.f_value, ctx.rate(0.1));
    }

    #[test]
    fn evaluate_f_single_entry() {
        let inst = single_link(0.2);
        let q = 2e7;
        let inner = evaluate_f(&inst, q, &SolverConfig::default()).unwrap();
        let ctx = PairRbContext::from_instance(&inst, 0, 0, q);
        let d = crate::power::optimal_power_no_cu_loss(&ctx);
        assert_eq!(inner.f_value, d.utility - q * inst.p_c_w);
    }

    #[test]
    fn single_link_matches_grid_search() {
        for p_c in [0.01, 0.2, 2.0] {
            let inst = single_link(p_c);
            let sol = solve(&inst, &SolverConfig::default()).unwrap();
            let ctx = PairRbContext::from_instance(&inst, 0, 0, 0.0);
            let n = 1_000_000;
            let grid_best = (1..=n)
                .map(|k| {
                    let p = 0.1 * k as f64 / n as f64;
                    ctx.rate(p) / (p + p_c)
                })
                .fold(0.0f64, f64::max);
            assert!((sol.ee - grid_best).abs() <= 1e-4 * grid_best, "{} vs {grid_best}", sol.ee);
        }
    }

    #[test]
    fn fixed_point_after_convergence() {
        let inst = single_link(0.05);
        let cfg = SolverConfig::default();
        let sol = solve(&inst, &cfg).unwrap();
        let again = evaluate_f(&inst, sol.ee, &cfg).unwrap();
        assert!((again.f_value / inst.w_hz).abs() < cfg.epsilon);
        let qs: Vec<f64> = sol.trace.iterations.iter().map(|it| it.q_s).collect();
        assert!(qs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn infeasible_rate_gives_zero_ee_under_drop_policy() {
        let inst = ProblemInstance {
            gamma_bps: 1e9,
            ..single_link(0.2)
        };
        let cfg = SolverConfig {
            policy: AssignmentPolicy::DropInfeasible,
            ..SolverConfig::default()
        };
        let sol = solve(&inst, &cfg).unwrap();
        assert_eq!(sol.ee, 0.0);
        assert_eq!(sol.assignment.dropped, vec![0]);
        assert!(matches!(
            solve(&inst, &SolverConfig::default()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let cfg = SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&single_link(0.2), &cfg),
            Err(Error::NotConverged { iterations: 1, .. })
        ));
    }

    #[test]
    fn brute_force_single_link_agrees() {
        let inst = single_link(0.2);
        let sol = solve(&inst, &SolverConfig::default()).unwrap();
        let bf = joint_brute_force(&inst, RateMode::NoCuLoss, 200).unwrap();
        assert!(sol.ee >= bf.ee * (1.0 - 1e-12));
        assert!(sol.ee <= bf.ee + bf.resolution_bound);
    }

    #[test]
    fn brute_force_guards() {
        let mut inst = single_link(0.2);
        assert!(joint_brute_force(&inst, RateMode::NoCuLoss, 201).is_err());
        inst.gain_dd = vec![1e-7; 4];
        inst.gain_db = vec![1e-12; 4];
        inst.gain_cd = vec![vec![1e-14; 4]; 5];
        inst.gain_cb = vec![1e-10; 5];
        inst.cu_power_w = vec![0.05; 5];
        assert!(joint_brute_force(&inst, RateMode::NoCuLoss, 10).is_err());
    }
}
