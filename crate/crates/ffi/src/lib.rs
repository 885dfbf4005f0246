//! C ABI over `d2d_ee`.
//!
//! Every fallible function returns a [`D2dEeStatus`]. On failure a message is
//! kept per thread and can be read with [`d2d_ee_last_error_message`].
//! Scenarios and solutions are opaque heap handles owned by the caller and
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use d2d_ee::experiment::{parse_key_values, run_experiment, write_csv_file, ExperimentConfig};
use d2d_ee::{AssignmentPolicy, CellConfig, CubicCoefficients, Error, RateMode, Scenario, Solution, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D2dEeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Degenerate = 4,
    Infeasible = 5,
    NotConverged = 6,
    TooLarge = 7,
    Io = 8,
    Parse = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D2dEeRateMode {
    NoCuLoss = 0,
    CuLoss = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D2dEePolicy {
    Strict = 0,
    DropInfeasible = 1,
}

/// Mirror of the library cell configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2dEeCellConfig {
    pub cell_radius_m: f64,
    pub kappa: f64,
    pub chi: f64,
    pub shadowing_sigma_db: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub n_cu: u32,
    pub n_rb: u32,
    pub n_d2d: u32,
    pub p_max_w: f64,
    pub p_b_over_n0_db: f64,
    pub tau_w: f64,
    pub gamma_bps: f64,
    pub p_c_w: f64,
    pub d2d_distance_m: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2dEeSolverConfig {
    /// Threshold on |F| per Hz.
    pub epsilon: f64,
    pub max_iterations: u32,
    /// A [`D2dEeRateMode`] value.
    pub mode: u32,
    /// A [`D2dEePolicy`] value.
    pub policy: u32,
}

/// Opaque random drop.
pub struct D2dEeScenario(Scenario);

/// Opaque solver result.
pub struct D2dEeSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> D2dEeStatus {
    match err {
        Error::Domain(_) | Error::Shape { .. } => D2dEeStatus::InvalidArgument,
        Error::InvalidConfig(_) => D2dEeStatus::InvalidConfig,
        Error::DegenerateLeadingCoefficient { .. } | Error::ZeroPolynomial => D2dEeStatus::Degenerate,
        Error::Infeasible { .. } => D2dEeStatus::Infeasible,
        Error::NotConverged { .. } => D2dEeStatus::NotConverged,
        Error::TooLarge { .. } => D2dEeStatus::TooLarge,
        Error::Io(_) => D2dEeStatus::Io,
        Error::Parse(_) => D2dEeStatus::Parse,
    }
}

fn fail(status: D2dEeStatus, msg: &str) -> D2dEeStatus {
    set_last_error(msg);
    status
}

/// Runs `body`, turning library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), D2dEeStatus>) -> D2dEeStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => D2dEeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(D2dEeStatus::Panic, "internal panic"),
    }
}

fn lib_err(err: Error) -> D2dEeStatus {
    fail(status_of(&err), &err.to_string())
}

fn null(name: &str) -> D2dEeStatus {
    fail(D2dEeStatus::NullPointer, &format!("{name} is null"))
}

impl From<&CellConfig> for D2dEeCellConfig {
    fn from(c: &CellConfig) -> Self {
        Self {
            cell_radius_m: c.cell_radius_m,
            kappa: c.kappa,
            chi: c.chi,
            shadowing_sigma_db: c.shadowing_sigma_db,
            noise_psd_dbm_per_hz: c.noise_psd_dbm_per_hz,
            rb_bandwidth_hz: c.rb_bandwidth_hz,
            n_cu: c.n_cu as u32,
            n_rb: c.n_rb as u32,
            n_d2d: c.n_d2d as u32,
            p_max_w: c.p_max_w,
            p_b_over_n0_db: c.p_b_over_n0_db,
            tau_w: c.tau_w,
            gamma_bps: c.gamma_bps,
            p_c_w: c.p_c_w,
            d2d_distance_m: c.d2d_distance_m,
        }
    }
}

impl From<&D2dEeCellConfig> for CellConfig {
    fn from(c: &D2dEeCellConfig) -> Self {
        Self {
            cell_radius_m: c.cell_radius_m,
            kappa: c.kappa,
            chi: c.chi,
            shadowing_sigma_db: c.shadowing_sigma_db,
            noise_psd_dbm_per_hz: c.noise_psd_dbm_per_hz,
            rb_bandwidth_hz: c.rb_bandwidth_hz,
            n_cu: c.n_cu as usize,
            n_rb: c.n_rb as usize,
            n_d2d: c.n_d2d as usize,
            p_max_w: c.p_max_w,
            p_b_over_n0_db: c.p_b_over_n0_db,
            tau_w: c.tau_w,
            gamma_bps: c.gamma_bps,
            p_c_w: c.p_c_w,
            d2d_distance_m: c.d2d_distance_m,
        }
    }
}

fn mode_of(raw: u32) -> Result<RateMode, D2dEeStatus> {
    match raw {
        x if x == D2dEeRateMode::NoCuLoss as u32 => Ok(RateMode::NoCuLoss),
        x if x == D2dEeRateMode::CuLoss as u32 => Ok(RateMode::CuLoss),
        other => Err(fail(D2dEeStatus::InvalidArgument, &format!("unknown rate mode {other}"))),
    }
}

fn policy_of(raw: u32) -> Result<AssignmentPolicy, D2dEeStatus> {
    match raw {
        x if x == D2dEePolicy::Strict as u32 => Ok(AssignmentPolicy::Strict),
        x if x == D2dEePolicy::DropInfeasible as u32 => Ok(AssignmentPolicy::DropInfeasible),
        other => Err(fail(D2dEeStatus::InvalidArgument, &format!("unknown policy {other}"))),
    }
}

fn solver_config(c: &D2dEeSolverConfig) -> Result<SolverConfig, D2dEeStatus> {
    Ok(SolverConfig {
        epsilon: c.epsilon,
        max_iterations: c.max_iterations as usize,
        mode: mode_of(c.mode)?,
        policy: policy_of(c.policy)?,
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn d2d_ee_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn d2d_ee_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be null or point to writable memory for one config.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_cell_config_default(out: *mut D2dEeCellConfig) -> D2dEeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(D2dEeCellConfig::from(&CellConfig::default()));
        Ok(())
    })
}

/// # Safety
/// `out` must be null or point to writable memory for one config.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solver_config_default(out: *mut D2dEeSolverConfig) -> D2dEeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = SolverConfig::default();
        out.write(D2dEeSolverConfig {
            epsilon: d.epsilon,
            max_iterations: d.max_iterations as u32,
            mode: D2dEeRateMode::NoCuLoss as u32,
            policy: D2dEePolicy::Strict as u32,
        });
        Ok(())
    })
}

/// Draws a scenario. On success `*out` receives a handle to release with
/// [`d2d_ee_scenario_free`].
///
/// # Safety
/// `config` must be null or point to a valid config; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_scenario_generate(
    config: *const D2dEeCellConfig,
    seed: u64,
    out: *mut *mut D2dEeScenario,
) -> D2dEeStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let cfg = CellConfig::from(&*config);
        let scenario = d2d_ee::generate_scenario(&cfg, seed).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(D2dEeScenario(scenario))));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from [`d2d_ee_scenario_generate`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_scenario_free(scenario: *mut D2dEeScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of D2D pairs in the scenario, 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_scenario_n_pairs(scenario: *const D2dEeScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.gain_dd.len())
}

/// Runs the Dinkelbach solver on a scenario.
///
/// # Safety
/// `scenario` and `config` must be null or valid; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solve(
    scenario: *const D2dEeScenario,
    config: *const D2dEeSolverConfig,
    out: *mut *mut D2dEeSolution,
) -> D2dEeStatus {
    guard(|| {
        let Some(scenario) = scenario.as_ref() else {
            return Err(null("scenario"));
        };
        let Some(config) = config.as_ref() else {
            return Err(null("config"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let solution = d2d_ee::solve(&scenario.0.instance(), &solver_config(config)?).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(D2dEeSolution(solution))));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a handle from [`d2d_ee_solve`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solution_free(solution: *mut D2dEeSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Energy efficiency in bits/s per watt; NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solution_ee(solution: *const D2dEeSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.ee)
}

/// Number of inner solves performed; 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solution_iterations(solution: *const D2dEeSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.iterations())
}

/// Copies the RB index of each pair into `rb_of_pair` (-1 for unserved
/// pairs) and the transmit powers into `powers_w`. Either output may be
/// null. Both must hold `len` elements, and `len` must be at least the
/// number of pairs.
///
/// # Safety
/// Non-null outputs must be writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_solution_allocation(
    solution: *const D2dEeSolution,
    rb_of_pair: *mut i64,
    powers_w: *mut f64,
    len: usize,
) -> D2dEeStatus {
    guard(|| {
        let Some(solution) = solution.as_ref() else {
            return Err(null("solution"));
        };
        let s = &solution.0;
        let n = s.powers.len();
        if len < n {
            return Err(fail(
                D2dEeStatus::BufferTooSmall,
                &format!("buffers hold {len} elements, {n} needed"),
            ));
        }
        if !rb_of_pair.is_null() {
            for (i, rb) in s.assignment.rb_of_pair.iter().enumerate() {
                rb_of_pair.add(i).write(rb.map_or(-1, |j| j as i64));
            }
        }
        if !powers_w.is_null() {
            ptr::copy_nonoverlapping(s.powers.as_ptr(), powers_w, n);
        }
        Ok(())
    })
}

/// Distinct real roots of `a x^3 + b x^2 + c x + d`, ascending. `roots` must
/// hold 3 values; `*count` receives how many were written.
///
/// # Safety
/// `roots` must be null or writable for 3 values; `count` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_cubic_real_roots(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    roots: *mut f64,
    count: *mut usize,
) -> D2dEeStatus {
    guard(|| {
        if roots.is_null() {
            return Err(null("roots"));
        }
        if count.is_null() {
            return Err(null("count"));
        }
        let found = d2d_ee::real_roots(&CubicCoefficients::new(a, b, c, d)).map_err(lib_err)?;
        let n = found.len().min(3);
        ptr::copy_nonoverlapping(found.as_ptr(), roots, n);
        count.write(n);
        Ok(())
    })
}

/// Maximum-weight assignment of `rows` pairs to `cols` RBs from a row-major
/// utility matrix; `policy` is a [`D2dEePolicy`] value. Writes each row's
/// column (-1 if dropped) to `col_of_row` (`rows` elements) and the
/// objective to `total`.
///
/// # Safety
/// `utilities` must be readable for `rows * cols` values; `col_of_row`
/// writable for `rows` values; `total` null or writable.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_max_weight_assignment(
    utilities: *const f64,
    rows: usize,
    cols: usize,
    policy: u32,
    col_of_row: *mut i64,
    total: *mut f64,
) -> D2dEeStatus {
    guard(|| {
        if col_of_row.is_null() && rows > 0 {
            return Err(null("col_of_row"));
        }
        let cells = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(D2dEeStatus::TooLarge, "rows * cols overflows"))?;
        if utilities.is_null() && cells > 0 {
            return Err(null("utilities"));
        }
        let policy = policy_of(policy)?;
        let matrix: Vec<Vec<f64>> = (0..rows)
            .map(|i| std::slice::from_raw_parts(utilities.add(i * cols), cols).to_vec())
            .collect();
        let assignment = d2d_ee::max_weight_assignment(&matrix, policy).map_err(lib_err)?;
        for (i, col) in assignment.rb_of_pair.iter().enumerate() {
            col_of_row.add(i).write(col.map_or(-1, |j| j as i64));
        }
        if !total.is_null() {
            total.write(assignment.total_utility);
        }
        Ok(())
    })
}

/// Runs an experiment described by flat `key = value` text (the CLI config
/// format) and writes the CSV to its `output_path`.
///
/// # Safety
/// `config_text` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn d2d_ee_run_experiment(config_text: *const c_char) -> D2dEeStatus {
    guard(|| {
        if config_text.is_null() {
            return Err(null("config_text"));
        }
        let text = CStr::from_ptr(config_text)
            .to_str()
            .map_err(|_| fail(D2dEeStatus::InvalidArgument, "config text is not UTF-8"))?;
        let cfg = ExperimentConfig::from_pairs(&parse_key_values(text).map_err(lib_err)?).map_err(lib_err)?;
        let report = run_experiment(&cfg).map_err(lib_err)?;
        write_csv_file(&report.rows, &cfg.output_path).map_err(lib_err)?;
        Ok(())
    })
}
