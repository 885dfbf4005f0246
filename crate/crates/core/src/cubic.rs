//! Real roots of `a x^3 + b x^2 + c x + d` via Nickalls' parameterization.
//!
//! With `x_N = -b / 3a`, `delta^2 = (b^2 - 3ac) / 9a^2` and
//! `y_N = f(x_N)`, the sign of `y_N^2 - h^2` (where `h^2 = 4 a^2 delta^6`)
//! decides between one, two and three real roots.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative threshold below which the leading coefficient is treated as zero.
const LEADING_REL_TOL: f64 = 1e-14;
/// Relative band around `y_N^2 == h^2` that is classified as a repeated root.
const REPEATED_ROOT_REL_TOL: f64 = 1e-12;
const POLISH_STEPS: usize = 4;
/// Roots closer than this (relative) are reported once.
const MERGE_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicCoefficients {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.a * x + 2.0 * self.b) * x + self.c
    }

    /// Largest magnitude among the four monomials at `x`, floored at 1.
    pub fn term_scale(&self, x: f64) -> f64 {
        [self.a * x * x * x, self.b * x * x, self.c * x, self.d]
            .iter()
            .fold(1.0f64, |m, t| m.max(t.abs()))
    }

    fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    fn scaled(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Threshold on `|a|` below which the cubic degrades to a quadratic.
    pub fn leading_tolerance(&self) -> f64 {
        LEADING_REL_TOL * self.b.abs().max(self.c.abs()).max(self.d.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NickallsParams {
    /// Abscissa of the inflection point, `-b / 3a`.
    pub p_n: f64,
    /// `sqrt(max(0, delta_sq))`.
    pub delta: f64,
    /// Signed `(b^2 - 3ac) / 9a^2`; negative when the cubic is monotone.
    pub delta_sq: f64,
    /// `-2 a delta^3`.
    pub h: f64,
    /// Value of the cubic at the inflection point.
    pub y_n: f64,
}

impl NickallsParams {
    /// `h^2` computed from the signed `delta_sq`, so it goes negative for
    /// monotone cubics.
    pub fn h_sq(&self, a: f64) -> f64 {
        4.0 * a * a * self.delta_sq * self.delta_sq * self.delta_sq
    }

    /// `lambda^2 = 3 delta^2`; informational only.
    pub fn lambda_sq(&self) -> f64 {
        3.0 * self.delta_sq
    }
}

pub fn nickalls_params(coeffs: &CubicCoefficients) -> Result<NickallsParams> {
    let CubicCoefficients { a, b, c, d } = *coeffs;
    let tol = coeffs.leading_tolerance();
    if a == 0.0 || a.abs() < tol {
        return Err(Error::DegenerateLeadingCoefficient { a, tol });
    }
    let p_n = -b / (3.0 * a);
    let delta_sq = (b * b - 3.0 * a * c) / (9.0 * a * a);
    let delta = delta_sq.max(0.0).sqrt();
    let h = -2.0 * a * delta * delta * delta;
    let y_n = 2.0 * b * b * b / (27.0 * a * a) - b * c / (3.0 * a) + d;
    Ok(NickallsParams {
        p_n,
        delta,
        delta_sq,
        h,
        y_n,
    })
}

/// All distinct real roots, ascending.
///
/// Returns an empty vector for a nonzero constant and an error for the zero
/// polynomial. Coefficients are normalized before classification, so the
/// result does not depend on a common scale factor.
pub fn real_roots(coeffs: &CubicCoefficients) -> Result<Vec<f64>> {
    if !coeffs.is_finite() {
        return Err(crate::error::domain("cubic coefficients must be finite"));
    }
    let scale = coeffs.max_abs();
    if scale == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    // Power-of-two scaling keeps the coefficients exact.
    let poly = coeffs.scaled(2f64.powi(-scale.log2().round() as i32));

    let mut roots = match nickalls_params(&poly) {
        Ok(params) => {
            let roots: Vec<f64> = nickalls_roots(&poly, &params).into_iter().map(|r| polish(&poly, r)).collect();
            deflated_roots(&poly, &roots)
        }
        Err(_) => lower_degree_roots(poly.b, poly.c, poly.d),
    };
    roots.retain(|r| r.is_finite());
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0));
    Ok(roots)
}

fn nickalls_roots(poly: &CubicCoefficients, p: &NickallsParams) -> Vec<f64> {
    let a = poly.a;
    let y_sq = p.y_n * p.y_n;
    let h_sq = p.h_sq(a);
    let disc = y_sq - h_sq;
    // y_N carries rounding error proportional to the terms it is built from.
    let y_terms = (2.0 * poly.b.powi(3) / (27.0 * a * a))
        .abs()
        .max((poly.b * poly.c / (3.0 * a)).abs())
        .max(poly.d.abs());
    let floor = (1e-13 * y_terms).powi(2);
    let band = REPEATED_ROOT_REL_TOL * y_sq.max(h_sq.abs()) + floor;

    if disc.abs() <= band {
        // y_N = +-h, so delta^3 = y_N / 2a fixes the sign of the double-root offset.
        let offset = p.delta.copysign(p.y_n / a);
        vec![p.p_n + offset, p.p_n - 2.0 * offset]
    } else if disc > 0.0 {
        // One real root: sum of the two real cube roots, the smaller one
        // obtained from their product delta^2 to avoid cancellation.
        let root_disc = disc.sqrt();
        let sign = if p.y_n >= 0.0 { 1.0 } else { -1.0 };
        let big = ((-p.y_n - sign * root_disc) / (2.0 * a)).cbrt();
        let small = if big == 0.0 { 0.0 } else { p.delta_sq / big };
        vec![p.p_n + big + small]
    } else {
        // Three real roots. With h = -2 a delta^3 the angle is acos(y_N / h) / 3.
        let ratio = if p.h == 0.0 { 0.0 } else { (p.y_n / p.h).clamp(-1.0, 1.0) };
        let rho = ratio.acos() / 3.0;
        let two_delta = 2.0 * p.delta;
        vec![
            p.p_n + two_delta * rho.cos(),
            p.p_n + two_delta * (2.0 * PI / 3.0 - rho).cos(),
            p.p_n + two_delta * (2.0 * PI / 3.0 + rho).cos(),
        ]
    }
}

/// Keeps the largest-magnitude closed-form root and takes the others from
/// the quotient quadratic. When the root magnitudes are far apart
/// `y_N^2 - h^2` cancels and the closed-form case split can miss or invent
/// small roots; the quotient does not.
///
/// The quotient is built from the constant term upwards when the kept root
/// dominates the other two (`r1^2 >= |r2 r3|`) and from the leading term
/// otherwise, which is the stable direction in each case.
fn deflated_roots(poly: &CubicCoefficients, roots: &[f64]) -> Vec<f64> {
    let Some(&r1) = roots.iter().max_by(|x, y| x.abs().total_cmp(&y.abs())) else {
        return Vec::new();
    };
    if r1 == 0.0 {
        return roots.to_vec();
    }
    let other_product = (poly.d / (poly.a * r1)).abs();
    let (beta, gamma) = if r1 * r1 >= other_product {
        let gamma = -poly.d / r1;
        ((gamma - poly.c) / r1, gamma)
    } else {
        let beta = poly.b + poly.a * r1;
        (beta, poly.c + beta * r1)
    };
    let mut out = vec![r1];
    out.extend(lower_degree_roots(poly.a, beta, gamma).into_iter().map(|r| polish(poly, r)));
    out.sort_by(|x, y| x.total_cmp(y));
    // A double root is only determined to about sqrt(eps); collapse the pair.
    let mut merged: Vec<f64> = Vec::with_capacity(out.len());
    for r in out {
        match merged.last_mut() {
            Some(last) if (r - *last).abs() <= MERGE_REL_TOL * r.abs().max(last.abs()) => {
                if poly.eval(r).abs() < poly.eval(*last).abs() {
                    *last = r;
                }
            }
            _ => merged.push(r),
        }
    }
    merged
}

/// Roots of `b x^2 + c x + d` (falling through to linear).
fn lower_degree_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    if b == 0.0 || b.abs() < LEADING_REL_TOL * c.abs().max(d.abs()) {
        if c == 0.0 {
            return Vec::new();
        }
        return vec![-d / c];
    }
    let disc = c * c - 4.0 * b * d;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-c / (2.0 * b)];
    }
    let sign = if c >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c + sign * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / b, d / q]
}

/// Newton refinement that only accepts steps reducing the residual.
fn polish(poly: &CubicCoefficients, mut x: f64) -> f64 {
    let mut fx = poly.eval(x);
    for _ in 0..POLISH_STEPS {
        let slope = poly.derivative(x);
        if fx == 0.0 || slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - fx / slope;
        let f_next = poly.eval(next);
        if !(f_next.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = f_next;
    }
    x
}
