//! Single-cell geometry, large-scale channel model and link rates.
//!
//! The base station sits at the origin of a disc of radius `cell_radius_m`.
//! Cellular users (CUs), D2D transmitters and D2D receivers are dropped
//! uniformly in the disc; every link gain is `kappa * d^-chi` multiplied by a
//! lognormal shadowing factor. CU `k` owns RB `k` (the uplink allocation is
//! fixed), and its transmit power is chosen so that the pathloss-only
//! received power at the BS equals the configured target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Links shorter than this are evaluated at this distance so the pathloss
/// model stays finite for co-located nodes.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

/// Angle resamples allowed when a D2D receiver lands outside the cell.
const RX_PLACEMENT_ATTEMPTS: usize = 100;

/// Thermal noise over `bandwidth_hz` for a PSD given in dBm/Hz, in watts.
pub fn noise_power_w(psd_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf((psd_dbm_per_hz + 10.0 * bandwidth_hz.log10() - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Large-scale pathloss gain `kappa * d^-chi`.
pub fn pathloss_gain(distance_m: f64, kappa: f64, chi: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(domain(format!("distance must be positive, got {distance_m}")));
    }
    Ok(kappa * distance_m.powf(-chi))
}

/// CU transmit power that yields `received_w` at the BS over a pure
/// pathloss link of length `distance_m`.
pub fn cu_power_from_target(received_w: f64, distance_m: f64, kappa: f64, chi: f64) -> Result<f64> {
    if !(received_w > 0.0) {
        return Err(domain(format!("target received power must be positive, got {received_w}")));
    }
    if !(kappa > 0.0) {
        return Err(domain(format!("pathloss constant must be positive, got {kappa}")));
    }
    Ok(received_w / pathloss_gain(distance_m, kappa, chi)?)
}

/// Shannon rate of a D2D link interfered by one CU, in bits/s.
pub fn d2d_rate(power_w: f64, h_dd: f64, p_cu_w: f64, h_cd: f64, n0_w: f64, w_hz: f64) -> Result<f64> {
    let interference = p_cu_w * h_cd + n0_w;
    if !(interference > 0.0) {
        return Err(domain("interference-plus-noise must be positive"));
    }
    if !(w_hz > 0.0) {
        return Err(domain("bandwidth must be positive"));
    }
    Ok(w_hz * (power_w * h_dd / interference).ln_1p() / std::f64::consts::LN_2)
}

/// Gains of the D2D pair itself: direct link and its receiver's exposure to the CU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGains {
    pub h_dd: f64,
    pub h_cd: f64,
}

/// Gains seen at the BS: the CU uplink and the D2D transmitter's leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuGains {
    pub p_cu_w: f64,
    pub h_cb: f64,
    pub h_db: f64,
}

/// Uplink rate the CU loses because the D2D transmitter leaks into the BS.
pub fn cu_rate_loss(power_w: f64, cu: CuGains, n0_w: f64, w_hz: f64) -> Result<f64> {
    let leak = power_w * cu.h_db + n0_w;
    if !(n0_w > 0.0) || !(leak > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    let signal = cu.p_cu_w * cu.h_cb;
    let clean = (signal / n0_w).ln_1p();
    let interfered = (signal / leak).ln_1p();
    Ok(w_hz * (clean - interfered) / std::f64::consts::LN_2)
}

/// D2D rate net of the CU rate loss it causes, in bits/s.
pub fn net_rate_with_cu_loss(
    power_w: f64,
    pair: PairGains,
    cu: CuGains,
    n0_w: f64,
    w_hz: f64,
) -> Result<f64> {
    let rate = d2d_rate(power_w, pair.h_dd, cu.p_cu_w, pair.h_cd, n0_w, w_hz)?;
    Ok(rate - cu_rate_loss(power_w, cu, n0_w, w_hz)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub cell_radius_m: f64,
    pub kappa: f64,
    pub chi: f64,
    pub shadowing_sigma_db: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub n_cu: usize,
    pub n_rb: usize,
    pub n_d2d: usize,
    pub p_max_w: f64,
    /// Target CU power at the BS relative to the noise power over one RB.
    pub p_b_over_n0_db: f64,
    /// Admission threshold on CU interference at a D2D receiver, in watts.
    pub tau_w: f64,
    pub gamma_bps: f64,
    /// Aggregate circuit power of all D2D pairs.
    pub p_c_w: f64,
    pub d2d_distance_m: f64,
}

pub const DEFAULT_RB_BANDWIDTH_HZ: f64 = 180_000.0;
pub const DEFAULT_NOISE_PSD_DBM_PER_HZ: f64 = -174.0;
/// Default interference threshold, as a multiple of the RB noise power.
pub const DEFAULT_TAU_OVER_N0: f64 = 100.0;
pub const DEFAULT_P_B_OVER_N0_DB: f64 = 25.0;

impl Default for CellConfig {
    fn default() -> Self {
        let n0 = noise_power_w(DEFAULT_NOISE_PSD_DBM_PER_HZ, DEFAULT_RB_BANDWIDTH_HZ);
        Self {
            cell_radius_m: 500.0,
            kappa: 1e-2,
            chi: 4.0,
            shadowing_sigma_db: 8.0,
            noise_psd_dbm_per_hz: DEFAULT_NOISE_PSD_DBM_PER_HZ,
            rb_bandwidth_hz: DEFAULT_RB_BANDWIDTH_HZ,
            n_cu: 16,
            n_rb: 16,
            n_d2d: 8,
            p_max_w: 0.1,
            p_b_over_n0_db: DEFAULT_P_B_OVER_N0_DB,
            tau_w: DEFAULT_TAU_OVER_N0 * n0,
            gamma_bps: 0.0,
            p_c_w: 10.0,
            d2d_distance_m: 50.0,
        }
    }
}

impl CellConfig {
    pub fn noise_w(&self) -> f64 {
        noise_power_w(self.noise_psd_dbm_per_hz, self.rb_bandwidth_hz)
    }

    /// Target CU received power at the BS, in watts.
    pub fn p_b_w(&self) -> f64 {
        self.noise_w() * db_to_linear(self.p_b_over_n0_db)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("cell_radius_m", self.cell_radius_m),
            ("kappa", self.kappa),
            ("rb_bandwidth_hz", self.rb_bandwidth_hz),
            ("p_max_w", self.p_max_w),
            ("tau_w", self.tau_w),
            ("p_c_w", self.p_c_w),
            ("d2d_distance_m", self.d2d_distance_m),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return invalid(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !(self.chi >= 2.0) || !self.chi.is_finite() {
            return invalid(format!("chi must be at least 2, got {}", self.chi));
        }
        if !(self.shadowing_sigma_db >= 0.0) || !self.shadowing_sigma_db.is_finite() {
            return invalid(format!("shadowing_sigma_db must be non-negative, got {}", self.shadowing_sigma_db));
        }
        if !(self.gamma_bps >= 0.0) || !self.gamma_bps.is_finite() {
            return invalid(format!("gamma_bps must be non-negative, got {}", self.gamma_bps));
        }
        if !self.noise_psd_dbm_per_hz.is_finite() || !self.p_b_over_n0_db.is_finite() {
            return invalid("noise_psd_dbm_per_hz and p_b_over_n0_db must be finite".into());
        }
        if self.n_cu != self.n_rb {
            return invalid(format!("n_cu ({}) must equal n_rb ({})", self.n_cu, self.n_rb));
        }
        if self.n_d2d > self.n_cu {
            return invalid(format!("n_d2d ({}) must not exceed n_cu ({})", self.n_d2d, self.n_cu));
        }
        if self.n_rb == 0 {
            return invalid("n_rb must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One random drop: node positions and every link gain the optimizer needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: CellConfig,
    pub seed: u64,
    pub cu_positions: Vec<Point>,
    pub d2d_tx_positions: Vec<Point>,
    pub d2d_rx_positions: Vec<Point>,
    /// Transmit power of CU `k` on its own RB.
    pub cu_tx_power_w: Vec<f64>,
    /// `gain_dd[i]`: D2D transmitter `i` to its receiver.
    pub gain_dd: Vec<f64>,
    /// `gain_cd[k][i]`: CU `k` to D2D receiver `i`.
    pub gain_cd: Vec<Vec<f64>>,
    /// `gain_cb[k]`: CU `k` to the BS.
    pub gain_cb: Vec<f64>,
    /// `gain_db[i]`: D2D transmitter `i` to the BS.
    pub gain_db: Vec<f64>,
    /// `rb_of_cu[k]`: the RB CU `k` transmits on.
    pub rb_of_cu: Vec<usize>,
}

fn uniform_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let angle = rng.gen::<f64>() * std::f64::consts::TAU;
    Point {
        x: r * angle.cos(),
        y: r * angle.sin(),
    }
}

fn place_receiver(rng: &mut ChaCha8Rng, tx: Point, distance: f64, radius: f64) -> Point {
    let mut candidate = tx;
    for _ in 0..RX_PLACEMENT_ATTEMPTS {
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        candidate = Point {
            x: tx.x + distance * angle.cos(),
            y: tx.y + distance * angle.sin(),
        };
        if candidate.norm() <= radius {
            return candidate;
        }
    }
    let scale = radius / candidate.norm();
    Point {
        x: candidate.x * scale,
        y: candidate.y * scale,
    }
}

/// Draws one scenario. Identical `(config, seed)` pairs give identical scenarios.
pub fn generate_scenario(config: &CellConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = config.cell_radius_m;
    let origin = Point { x: 0.0, y: 0.0 };

    let cu_positions: Vec<Point> = (0..config.n_cu).map(|_| uniform_in_disc(&mut rng, radius)).collect();
    let d2d_tx_positions: Vec<Point> = (0..config.n_d2d).map(|_| uniform_in_disc(&mut rng, radius)).collect();
    let d2d_rx_positions: Vec<Point> = d2d_tx_positions
        .iter()
        .map(|&tx| place_receiver(&mut rng, tx, config.d2d_distance_m, radius))
        .collect();

    let shadowing = Normal::new(0.0, config.shadowing_sigma_db)
        .map_err(|e| Error::InvalidConfig(format!("shadowing: {e}")))?;
    let mut link = |a: Point, b: Point| -> Result<f64> {
        let d = a.distance(b).max(MIN_LINK_DISTANCE_M);
        let shadow_db: f64 = shadowing.sample(&mut rng);
        Ok(pathloss_gain(d, config.kappa, config.chi)? * db_to_linear(shadow_db))
    };

    let gain_dd = d2d_tx_positions
        .iter()
        .zip(&d2d_rx_positions)
        .map(|(&tx, &rx)| link(tx, rx))
        .collect::<Result<Vec<_>>>()?;
    let gain_cd = cu_positions
        .iter()
        .map(|&cu| d2d_rx_positions.iter().map(|&rx| link(cu, rx)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let gain_cb = cu_positions.iter().map(|&cu| link(cu, origin)).collect::<Result<Vec<_>>>()?;
    let gain_db = d2d_tx_positions.iter().map(|&tx| link(tx, origin)).collect::<Result<Vec<_>>>()?;

    let p_b = config.p_b_w();
    let cu_tx_power_w = cu_positions
        .iter()
        .map(|cu| cu_power_from_target(p_b, cu.norm().max(MIN_LINK_DISTANCE_M), config.kappa, config.chi))
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        config: config.clone(),
        seed,
        cu_positions,
        d2d_tx_positions,
        d2d_rx_positions,
        cu_tx_power_w,
        gain_dd,
        gain_cd,
        gain_cb,
        gain_db,
        rb_of_cu: (0..config.n_cu).collect(),
    })
}

/// The q-independent inputs of the optimization, indexed by D2D pair and RB.
///
/// The CU occupying each RB is folded in, so `gain_cd[j][i]` is the gain from
/// the CU on RB `j` to the receiver of pair `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub gain_dd: Vec<f64>,
    pub gain_cd: Vec<Vec<f64>>,
    pub gain_cb: Vec<f64>,
    pub gain_db: Vec<f64>,
    pub cu_power_w: Vec<f64>,
    pub n0_w: f64,
    pub w_hz: f64,
    pub gamma_bps: f64,
    pub p_max_w: f64,
    pub tau_w: f64,
    pub p_c_w: f64,
}

impl ProblemInstance {
    pub fn n_pairs(&self) -> usize {
        self.gain_dd.len()
    }

    pub fn n_rbs(&self) -> usize {
        self.gain_cb.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n_pairs(), self.n_rbs());
        if self.gain_db.len() != n || self.gain_cd.len() != m || self.cu_power_w.len() != m {
            return Err(Error::InvalidConfig("inconsistent instance dimensions".into()));
        }
        if self.gain_cd.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidConfig("gain_cd rows must have one entry per pair".into()));
        }
        let all_gains = self
            .gain_dd
            .iter()
            .chain(self.gain_cd.iter().flatten())
            .chain(&self.gain_cb)
            .chain(&self.gain_db)
            .chain(&self.cu_power_w);
        if all_gains.into_iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidConfig("gains and CU powers must be finite and non-negative".into()));
        }
        for (name, value) in [
            ("n0_w", self.n0_w),
            ("w_hz", self.w_hz),
            ("p_max_w", self.p_max_w),
            ("p_c_w", self.p_c_w),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.gamma_bps >= 0.0) || self.tau_w.is_nan() || self.tau_w < 0.0 {
            return Err(Error::InvalidConfig("gamma_bps and tau_w must be non-negative".into()));
        }
        Ok(())
    }

    /// CU interference power at the receiver of `pair` when reusing `rb`.
    pub fn interference_w(&self, pair: usize, rb: usize) -> f64 {
        self.cu_power_w[rb] * self.gain_cd[rb][pair]
    }
}

impl Scenario {
    pub fn instance(&self) -> ProblemInstance {
        let c = &self.config;
        // Reorder CU-indexed quantities by the RB each CU occupies.
        let m = self.rb_of_cu.len();
        let mut gain_cd = vec![Vec::new(); m];
        let mut gain_cb = vec![0.0; m];
        let mut cu_power_w = vec![0.0; m];
        for (k, &rb) in self.rb_of_cu.iter().enumerate() {
            gain_cd[rb] = self.gain_cd[k].clone();
            gain_cb[rb] = self.gain_cb[k];
            cu_power_w[rb] = self.cu_tx_power_w[k];
        }
        ProblemInstance {
            gain_dd: self.gain_dd.clone(),
            gain_cd,
            gain_cb,
            gain_db: self.gain_db.clone(),
            cu_power_w,
            n0_w: c.noise_w(),
            w_hz: c.rb_bandwidth_hz,
            gamma_bps: c.gamma_bps,
            p_max_w: c.p_max_w,
            tau_w: c.tau_w,
            p_c_w: c.p_c_w,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn pathloss_examples() {
        assert!(close(pathloss_gain(10.0, 1e-2, 4.0).unwrap(), 1e-6, 1e-15));
        assert_eq!(pathloss_gain(1.0, 1.0, 4.0).unwrap(), 1.0);
        // 1e-2 / 500^4 = 1e-2 / 6.25e10
        assert!(close(pathloss_gain(500.0, 1e-2, 4.0).unwrap(), 1.6e-13, 1e-15));
        assert!(pathloss_gain(0.0, 1.0, 4.0).is_err());
        assert!(pathloss_gain(-3.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn cu_power_examples() {
        assert!(close(cu_power_from_target(1e-7, 10.0, 1e-2, 4.0).unwrap(), 0.1, 1e-14));
        assert!(close(cu_power_from_target(1e-2, 1.0, 1e-2, 4.0).unwrap(), 1.0, 1e-15));
        let p = cu_power_from_target(1e-13, 500.0, 1e-2, 4.0).unwrap();
        assert!(close(p, 0.625, 1e-14));
        assert!(close(p * pathloss_gain(500.0, 1e-2, 4.0).unwrap(), 1e-13, 1e-15));
        assert!(cu_power_from_target(0.0, 10.0, 1e-2, 4.0).is_err());
        assert!(cu_power_from_target(1.0, 0.0, 1e-2, 4.0).is_err());
    }

    #[test]
    fn noise_conversion_matches_formula() {
        let n0 = noise_power_w(-174.0, 180_000.0);
        let expected = 10f64.powf((-174.0 + 10.0 * 180_000f64.log10() - 30.0) / 10.0);
        assert_eq!(n0, expected);
        assert!(close(n0, 7.165929069962951e-16, 1e-12));
    }

    #[test]
    fn d2d_rate_examples() {
        assert_eq!(d2d_rate(0.0, 1.0, 1.0, 0.1, 0.01, 1.0).unwrap(), 0.0);
        assert!(close(d2d_rate(0.11, 1.0, 1.0, 0.1, 0.01, 1.0).unwrap(), 1.0, 1e-14));
        // log2(1 + 1.3327 / 0.11), evaluated with mpmath at 30 digits.
        let r = d2d_rate(1.3327, 1.0, 1.0, 0.1, 0.01, 1.0).unwrap();
        assert!(close(r, 3.713195903184838, 1e-12), "{r}");
        assert!(d2d_rate(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn net_rate_examples() {
        let pair = PairGains { h_dd: 1.0, h_cd: 0.1 };
        let cu = CuGains { p_cu_w: 1.0, h_cb: 0.5, h_db: 0.2 };
        assert_eq!(net_rate_with_cu_loss(0.0, pair, cu, 0.01, 1.0).unwrap(), 0.0);
        let no_leak = CuGains { h_db: 0.0, ..cu };
        for p in [0.1, 1.0, 7.0] {
            assert_eq!(
                net_rate_with_cu_loss(p, pair, no_leak, 0.01, 1.0).unwrap(),
                d2d_rate(p, 1.0, 1.0, 0.1, 0.01, 1.0).unwrap()
            );
        }
        // log2(1+1/0.11) - [log2(1+0.5/0.01) - log2(1+0.5/0.21)], mpmath.
        let x = net_rate_with_cu_loss(1.0, pair, cu, 0.01, 1.0).unwrap();
        assert!(close(x, -0.5800113975327651, 1e-12), "{x}");
    }

    #[test]
    fn rate_is_increasing_and_concave() {
        let rate = |p: f64| d2d_rate(p, 2e-7, 0.05, 1e-12, 7e-16, 180_000.0).unwrap();
        let step = 1e-3;
        let grid: Vec<f64> = (0..200).map(|k| rate(k as f64 * step)).collect();
        for w in grid.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] < 0.0);
        }
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = CellConfig::default();
        let a = generate_scenario(&cfg, 7).unwrap();
        let b = generate_scenario(&cfg, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&cfg, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scenario_geometry_and_calibration() {
        let cfg = CellConfig::default();
        let s = generate_scenario(&cfg, 11).unwrap();
        let all = s.cu_positions.iter().chain(&s.d2d_tx_positions).chain(&s.d2d_rx_positions);
        for p in all {
            assert!(p.norm() <= cfg.cell_radius_m * (1.0 + 1e-12));
        }
        for (tx, rx) in s.d2d_tx_positions.iter().zip(&s.d2d_rx_positions) {
            assert!((tx.distance(*rx) - cfg.d2d_distance_m).abs() < 1e-9);
        }
        for (cu, p) in s.cu_positions.iter().zip(&s.cu_tx_power_w) {
            let received = p * pathloss_gain(cu.norm(), cfg.kappa, cfg.chi).unwrap();
            assert!(close(received, cfg.p_b_w(), 1e-12));
        }
        let gains = s.gain_dd.iter().chain(s.gain_cd.iter().flatten()).chain(&s.gain_cb).chain(&s.gain_db);
        for g in gains {
            assert!(g.is_finite() && *g > 0.0);
        }
    }

    #[test]
    fn zero_shadowing_gives_pure_pathloss() {
        let cfg = CellConfig {
            shadowing_sigma_db: 0.0,
            ..CellConfig::default()
        };
        let s = generate_scenario(&cfg, 3).unwrap();
        let pl = |a: Point, b: Point| pathloss_gain(a.distance(b).max(MIN_LINK_DISTANCE_M), cfg.kappa, cfg.chi).unwrap();
        for i in 0..cfg.n_d2d {
            assert_eq!(s.gain_dd[i], pl(s.d2d_tx_positions[i], s.d2d_rx_positions[i]));
            assert_eq!(s.gain_db[i], pl(s.d2d_tx_positions[i], Point { x: 0.0, y: 0.0 }));
            for k in 0..cfg.n_cu {
                assert_eq!(s.gain_cd[k][i], pl(s.cu_positions[k], s.d2d_rx_positions[i]));
            }
        }
    }

    #[test]
    fn receiver_outside_cell_is_pulled_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // A transmitter on the rim with a separation longer than the diameter
        // can never place its receiver inside, so it is clamped to the rim.
        let rx = place_receiver(&mut rng, Point { x: 500.0, y: 0.0 }, 2000.0, 500.0);
        assert!((rx.norm() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(CellConfig::default().validate().is_ok());
        let bad = [
            CellConfig { n_d2d: 17, ..CellConfig::default() },
            CellConfig { n_rb: 15, ..CellConfig::default() },
            CellConfig { chi: 1.5, ..CellConfig::default() },
            CellConfig { p_max_w: 0.0, ..CellConfig::default() },
            CellConfig { shadowing_sigma_db: -1.0, ..CellConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn instance_reorders_by_rb() {
        let cfg = CellConfig::default();
        let mut s = generate_scenario(&cfg, 5).unwrap();
        s.rb_of_cu.reverse();
        let inst = s.instance();
        let m = cfg.n_rb;
        for k in 0..m {
            assert_eq!(inst.cu_power_w[m - 1 - k], s.cu_tx_power_w[k]);
            assert_eq!(inst.gain_cb[m - 1 - k], s.gain_cb[k]);
        }
        assert!(inst.validate().is_ok());
    }
}
