//! Per-(pair, RB) transmit power optimization for a fixed EE ratio `q`.
//!
//! For a D2D pair reusing the RB of one CU the subtractive objective is
//! `R(p) - q p`, optionally with `R` replaced by the rate net of the CU's
//! loss. Rate and power-cap constraints bound `p` to `[p_min, p_max]`;
//! outside that interval the decision is infeasible.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ProblemInstance;
use crate::cubic::{real_roots, CubicCoefficients};
use crate::error::{domain, Result};

/// Utility carried by infeasible (pair, RB) entries. Finite so that the
/// assignment arithmetic never sees infinities.
pub const INFEASIBLE_UTILITY: f64 = -1e30;

pub fn is_infeasible_utility(u: f64) -> bool {
    u <= INFEASIBLE_UTILITY * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum RateMode {
    /// Objective uses the D2D rate only.
    #[default]
    NoCuLoss,
    /// Objective subtracts the uplink rate the CU loses to D2D leakage.
    CuLoss,
}

/// Everything needed to optimize the power of one pair on one RB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRbContext {
    /// Direct D2D gain.
    pub h_dd: f64,
    /// CU to D2D receiver.
    pub h_cd: f64,
    /// CU to BS.
    pub h_cb: f64,
    /// D2D transmitter to BS.
    pub h_db: f64,
    pub p_cu_w: f64,
    pub n0_w: f64,
    pub w_hz: f64,
    pub gamma_bps: f64,
    pub p_max_w: f64,
    /// Current EE ratio, bits/s per watt.
    pub q_s: f64,
}

impl PairRbContext {
    pub fn from_instance(inst: &ProblemInstance, pair: usize, rb: usize, q_s: f64) -> Self {
        Self {
            h_dd: inst.gain_dd[pair],
            h_cd: inst.gain_cd[rb][pair],
            h_cb: inst.gain_cb[rb],
            h_db: inst.gain_db[pair],
            p_cu_w: inst.cu_power_w[rb],
            n0_w: inst.n0_w,
            w_hz: inst.w_hz,
            gamma_bps: inst.gamma_bps,
            p_max_w: inst.p_max_w,
            q_s,
        }
    }

    /// CU interference plus noise at the D2D receiver.
    fn interference(&self) -> f64 {
        self.p_cu_w * self.h_cd + self.n0_w
    }

    /// CU signal power at the BS.
    fn cu_signal(&self) -> f64 {
        self.p_cu_w * self.h_cb
    }

    pub fn sinr(&self, p: f64) -> f64 {
        p * self.h_dd / self.interference()
    }

    pub fn rate(&self, p: f64) -> f64 {
        self.w_hz * self.sinr(p).ln_1p() / LN_2
    }

    pub fn cu_loss(&self, p: f64) -> f64 {
        let s = self.cu_signal();
        let clean = (s / self.n0_w).ln_1p();
        let interfered = (s / (p * self.h_db + self.n0_w)).ln_1p();
        self.w_hz * (clean - interfered) / LN_2
    }

    pub fn net_rate(&self, p: f64) -> f64 {
        self.rate(p) - self.cu_loss(p)
    }

    pub fn rate_in(&self, mode: RateMode, p: f64) -> f64 {
        match mode {
            RateMode::NoCuLoss => self.rate(p),
            RateMode::CuLoss => self.net_rate(p),
        }
    }

    fn rate_target_factor(&self) -> f64 {
        (self.gamma_bps / self.w_hz * LN_2).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyFactors {
    /// Weight on the minimum-rate violation.
    pub phi1: f64,
    /// Weight on the power-cap violation.
    pub phi2: f64,
}

impl Default for PenaltyFactors {
    fn default() -> Self {
        Self { phi1: 1e9, phi2: 1e9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Interior,
    ClampedMin,
    ClampedMax,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDecision {
    pub power_w: f64,
    /// Objective value at `power_w`; [`INFEASIBLE_UTILITY`] when infeasible.
    pub utility: f64,
    pub feasible: bool,
    pub boundary: Boundary,
}

impl PowerDecision {
    pub fn infeasible() -> Self {
        Self {
            power_w: 0.0,
            utility: INFEASIBLE_UTILITY,
            feasible: false,
            boundary: Boundary::Infeasible,
        }
    }
}

/// Smallest power meeting the minimum-rate requirement.
pub fn p_min(ctx: &PairRbContext) -> f64 {
    ctx.rate_target_factor() * ctx.interference() / ctx.h_dd
}

fn penalty(p: f64, ctx: &PairRbContext, penalties: PenaltyFactors) -> f64 {
    let rate_slack = 1.0 + ctx.sinr(p) - 2f64.powf(ctx.gamma_bps / ctx.w_hz);
    penalties.phi1 * rate_slack.min(0.0) + penalties.phi2 * (ctx.p_max_w - p).min(0.0)
}

/// Penalized objective `f(p)` without CU rate loss.
pub fn utility_no_cu_loss(p: f64, ctx: &PairRbContext, penalties: PenaltyFactors) -> f64 {
    ctx.rate(p) - ctx.q_s * p + penalty(p, ctx, penalties)
}

/// Penalized objective `theta(p)` using the net rate.
pub fn utility_with_cu_loss(p: f64, ctx: &PairRbContext, penalties: PenaltyFactors) -> f64 {
    ctx.net_rate(p) - ctx.q_s * p + penalty(p, ctx, penalties)
}

/// Unpenalized objective; only meaningful on `[p_min, p_max]`.
pub fn objective(p: f64, ctx: &PairRbContext, mode: RateMode) -> f64 {
    ctx.rate_in(mode, p) - ctx.q_s * p
}

fn classify(p: f64, lo: f64, hi: f64) -> Boundary {
    if p <= lo {
        Boundary::ClampedMin
    } else if p >= hi {
        Boundary::ClampedMax
    } else {
        Boundary::Interior
    }
}

/// Closed-form optimum of `R(p) - q p` clamped to the feasible interval.
pub fn optimal_power_no_cu_loss(ctx: &PairRbContext) -> PowerDecision {
    let lo = p_min(ctx);
    let hi = ctx.p_max_w;
    if !(lo <= hi) {
        return PowerDecision::infeasible();
    }
    let (power_w, boundary) = if ctx.q_s <= 0.0 {
        // Objective is increasing in p.
        (hi, Boundary::ClampedMax)
    } else {
        let stationary = ctx.w_hz / (ctx.q_s * LN_2) - ctx.interference() / ctx.h_dd;
        let boundary = classify(stationary, lo, hi);
        (stationary.clamp(lo, hi), boundary)
    };
    PowerDecision {
        power_w,
        utility: objective(power_w, ctx, RateMode::NoCuLoss),
        feasible: true,
        boundary,
    }
}

/// `d theta / dp` for the net-rate objective.
pub fn theta_derivative(p: f64, ctx: &PairRbContext) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(domain(format!("power must be non-negative, got {p}")));
    }
    let d1 = p * ctx.h_dd + ctx.interference();
    let d3 = p * ctx.h_db + ctx.n0_w;
    let d2 = d3 + ctx.cu_signal();
    if !(d1 > 0.0 && d3 > 0.0) {
        return Err(domain("derivative denominators must be positive"));
    }
    let own = ctx.w_hz * ctx.h_dd / (LN_2 * d1);
    let leak = ctx.w_hz * ctx.cu_signal() * ctx.h_db / (LN_2 * d2 * d3);
    Ok(own - leak - ctx.q_s)
}

fn theta_second_derivative(p: f64, ctx: &PairRbContext) -> f64 {
    let d1 = p * ctx.h_dd + ctx.interference();
    let d3 = p * ctx.h_db + ctx.n0_w;
    let d2 = d3 + ctx.cu_signal();
    let own = -ctx.w_hz * ctx.h_dd * ctx.h_dd / (LN_2 * d1 * d1);
    let leak = ctx.w_hz * ctx.cu_signal() * ctx.h_db * ctx.h_db * (d2 + d3) / (LN_2 * d2 * d2 * d3 * d3);
    own + leak
}

/// Polynomial whose roots are the stationary points of `theta`, for any `q`.
///
/// Equals `-theta'(p) * (ln2 / W) * D1 D2 D3` with
/// `D1 = p h_dd + I`, `D2 = p h_db + S + N0`, `D3 = p h_db + N0`,
/// `I = P_cu h_cd + N0` and `S = P_cu h_cb`.
fn stationary_polynomial(ctx: &PairRbContext) -> CubicCoefficients {
    let k = ctx.q_s * LN_2 / ctx.w_hz;
    let h = ctx.h_dd;
    let g = ctx.h_db;
    let n0 = ctx.n0_w;
    let s = ctx.cu_signal();
    let i = ctx.interference();
    let b_sum = s + n0;
    CubicCoefficients {
        a: k * h * g * g,
        b: k * (h * g * (b_sum + n0) + i * g * g) - h * g * g,
        c: k * (h * b_sum * n0 + i * g * (b_sum + n0)) - 2.0 * h * g * n0,
        d: k * i * b_sum * n0 - h * b_sum * n0 + s * g * i,
    }
}

/// Cubic whose roots are the stationary points of `theta`; requires `q_s > 0`.
pub fn cubic_coefficients(ctx: &PairRbContext) -> Result<CubicCoefficients> {
    if !(ctx.q_s > 0.0) {
        return Err(domain(format!("cubic form needs q_s > 0, got {}", ctx.q_s)));
    }
    Ok(stationary_polynomial(ctx))
}

/// Newton steps on `theta'` that stay inside `[lo, hi]` and shrink `|theta'|`.
fn refine_stationary(mut p: f64, lo: f64, hi: f64, ctx: &PairRbContext) -> f64 {
    let Ok(mut slope) = theta_derivative(p, ctx) else {
        return p;
    };
    for _ in 0..4 {
        let curvature = theta_second_derivative(p, ctx);
        if slope == 0.0 || curvature == 0.0 || !curvature.is_finite() {
            break;
        }
        let next = (p - slope / curvature).clamp(lo, hi);
        match theta_derivative(next, ctx) {
            Ok(s) if s.abs() < slope.abs() => {
                p = next;
                slope = s;
            }
            _ => break,
        }
    }
    p
}

/// Optimum of the net-rate objective over `[p_min, p_max]`: the best of the
/// interval endpoints and every stationary point inside the interval.
pub fn optimal_power_with_cu_loss(ctx: &PairRbContext) -> PowerDecision {
    if ctx.h_db == 0.0 {
        return optimal_power_no_cu_loss(ctx);
    }
    let lo = p_min(ctx);
    let hi = ctx.p_max_w;
    if !(lo <= hi) {
        return PowerDecision::infeasible();
    }
    let mut candidates = vec![lo, hi];
    if let Ok(roots) = real_roots(&stationary_polynomial(ctx)) {
        candidates.extend(
            roots
                .into_iter()
                .filter(|r| *r > lo && *r < hi)
                .map(|r| refine_stationary(r, lo, hi, ctx)),
        );
    }
    candidates.sort_by(|x, y| x.total_cmp(y));

    let mut best = (lo, objective(lo, ctx, RateMode::CuLoss));
    for &p in &candidates[1..] {
        let value = objective(p, ctx, RateMode::CuLoss);
        if value > best.1 {
            best = (p, value);
        }
    }
    PowerDecision {
        power_w: best.0,
        utility: best.1,
        feasible: true,
        boundary: classify(best.0, lo, hi),
    }
}

pub fn optimal_power(ctx: &PairRbContext, mode: RateMode) -> PowerDecision {
    match mode {
        RateMode::NoCuLoss => optimal_power_no_cu_loss(ctx),
        RateMode::CuLoss => optimal_power_with_cu_loss(ctx),
    }
}

/// RBs whose CU interference at the receiver of `pair` is within `tau_w`.
pub fn feasible_rbs(inst: &ProblemInstance, pair: usize, tau_w: f64) -> Vec<usize> {
    (0..inst.n_rbs())
        .filter(|&rb| inst.interference_w(pair, rb) <= tau_w)
        .collect()
}

/// Per-(pair, RB) optimal utilities and the decisions behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    pub utilities: Vec<Vec<f64>>,
    pub decisions: Vec<Vec<PowerDecision>>,
}

impl UtilityMatrix {
    /// Number of (pair, RB) entries rejected by the interference threshold.
    pub fn count_infeasible(&self) -> usize {
        self.utilities.iter().flatten().filter(|u| is_infeasible_utility(**u)).count()
    }
}

pub fn build_utility_matrix(inst: &ProblemInstance, q_s: f64, mode: RateMode, tau_w: f64) -> UtilityMatrix {
    let rows: Vec<Vec<PowerDecision>> = (0..inst.n_pairs())
        .into_par_iter()
        .map(|pair| {
            let mut row = vec![PowerDecision::infeasible(); inst.n_rbs()];
            for rb in feasible_rbs(inst, pair, tau_w) {
                row[rb] = optimal_power(&PairRbContext::from_instance(inst, pair, rb, q_s), mode);
            }
            row
        })
        .collect();
    let utilities = rows.iter().map(|row| row.iter().map(|d| d.utility).collect()).collect();
    UtilityMatrix {
        utilities,
        decisions: rows,
    }
}
