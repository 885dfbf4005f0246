//! One-RB-per-pair maximum-weight assignment over a utility matrix.
//!
//! Rows are D2D pairs, columns are RBs, and every pair receives a distinct
//! RB. Entries at or below [`INFEASIBLE_UTILITY`] mark (pair, RB)
//! combinations that violate the interference threshold or the power
//! interval; the solver serves as many pairs as possible on admissible
//! entries before maximizing utility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::is_infeasible_utility;
#[cfg(doc)]
use crate::power::INFEASIBLE_UTILITY;

/// Largest dimension accepted by [`brute_force_assignment`].
pub const BRUTE_FORCE_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AssignmentPolicy {
    /// Fail when any pair must sit on an infeasible entry.
    #[default]
    Strict,
    /// Leave such pairs unserved and report them in [`Assignment::dropped`].
    DropInfeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// RB of each pair; `None` for dropped pairs.
    pub rb_of_pair: Vec<Option<usize>>,
    /// Pairs left unserved, ascending.
    pub dropped: Vec<usize>,
    /// Sum of the selected entries, accumulated in pair order.
    pub total_utility: f64,
}

impl Assignment {
    pub fn empty(n_pairs: usize) -> Self {
        Self {
            rb_of_pair: vec![None; n_pairs],
            dropped: (0..n_pairs).collect(),
            total_utility: 0.0,
        }
    }

    /// `(pair, rb)` for every served pair.
    pub fn served(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rb_of_pair.iter().enumerate().filter_map(|(i, rb)| rb.map(|j| (i, j)))
    }

    pub fn served_count(&self) -> usize {
        self.rb_of_pair.iter().filter(|rb| rb.is_some()).count()
    }
}

fn check_shape(utilities: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = utilities.len();
    let cols = utilities.first().map_or(0, Vec::len);
    if utilities.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape {
            rows,
            cols,
            reason: "rows have different lengths",
        });
    }
    if rows > cols {
        return Err(Error::Shape {
            rows,
            cols,
            reason: "more pairs than RBs",
        });
    }
    if utilities.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::Shape {
            rows,
            cols,
            reason: "matrix contains NaN",
        });
    }
    Ok((rows, cols))
}

/// Minimum-cost assignment of every row of a `n x m` matrix (`n <= m`) to a
/// distinct column. Returns the column of each row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // owner[j]: row (1-based) matched to column j; 0 means free.
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0; n];
    for j in 1..=m {
        if owner[j] > 0 {
            col_of_row[owner[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Best total weight for `rows` using only columns where `available` is set.
fn best_completion(weights: &[Vec<f64>], rows: &[usize], available: &[bool]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let cols: Vec<usize> = (0..available.len()).filter(|&j| available[j]).collect();
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| -weights[i][j]).collect())
        .collect();
    hungarian_min(&cost)
        .iter()
        .zip(rows)
        .map(|(&c, &i)| weights[i][cols[c]])
        .sum()
}

/// Maximum-weight assignment, choosing the lexicographically smallest column
/// vector among (numerically) tied optima.
fn lexicographic_max(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let m = weights[0].len();
    let neg: Vec<Vec<f64>> = weights.iter().map(|r| r.iter().map(|w| -w).collect()).collect();
    let first = hungarian_min(&neg);
    let optimum: f64 = first.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
    let scale = weights.iter().flatten().fold(1e-300f64, |acc, w| acc.max(w.abs()));
    let tol = 1e-12 * scale * n as f64;

    let mut chosen = Vec::with_capacity(n);
    let mut available = vec![true; m];
    let mut prefix = 0.0;
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let row_max_rest: f64 = rest
            .iter()
            .map(|&r| {
                (0..m)
                    .filter(|&j| available[j])
                    .map(|j| weights[r][j])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        let mut fallback: Option<(usize, f64)> = None;
        let mut pick = None;
        for j in 0..m {
            if !available[j] {
                continue;
            }
            let head = prefix + weights[i][j];
            if head + row_max_rest < optimum - tol {
                continue;
            }
            available[j] = false;
            let total = head + best_completion(weights, &rest, &available);
            available[j] = true;
            if total >= optimum - tol {
                pick = Some(j);
                break;
            }
            if fallback.is_none_or(|(_, t)| total > t) {
                fallback = Some((j, total));
            }
        }
        let j = pick.or(fallback.map(|(j, _)| j)).unwrap_or(first[i]);
        available[j] = false;
        prefix += weights[i][j];
        chosen.push(j);
    }
    chosen
}

/// Maximum-total-utility assignment of every pair to a distinct RB.
pub fn max_weight_assignment(utilities: &[Vec<f64>], policy: AssignmentPolicy) -> Result<Assignment> {
    let (n, m) = check_shape(utilities)?;
    let hopeless: Vec<usize> = (0..n)
        .filter(|&i| utilities[i].iter().all(|&u| is_infeasible_utility(u)))
        .collect();
    if policy == AssignmentPolicy::Strict && !hopeless.is_empty() {
        return Err(Error::Infeasible { pairs: hopeless });
    }
    let active: Vec<usize> = (0..n).filter(|i| !hopeless.contains(i)).collect();
    if active.is_empty() {
        return Ok(Assignment::empty(n));
    }

    // Replace infeasible entries by a value low enough that serving one more
    // pair always outweighs any utility difference, yet of the same order of
    // magnitude as the real utilities.
    let finite = active
        .iter()
        .flat_map(|&i| utilities[i].iter())
        .copied()
        .filter(|&u| !is_infeasible_utility(u));
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u), hi.max(u)));
    let floor = lo - (active.len() as f64 + 1.0) * (hi - lo + 1.0);
    let weights: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            (0..m)
                .map(|j| {
                    let u = utilities[i][j];
                    if is_infeasible_utility(u) {
                        floor
                    } else {
                        u
                    }
                })
                .collect()
        })
        .collect();

    let cols = lexicographic_max(&weights);
    let mut rb_of_pair = vec![None; n];
    let mut blocked = Vec::new();
    for (&i, &j) in active.iter().zip(&cols) {
        if is_infeasible_utility(utilities[i][j]) {
            blocked.push(i);
        } else {
            rb_of_pair[i] = Some(j);
        }
    }
    if policy == AssignmentPolicy::Strict && !blocked.is_empty() {
        return Err(Error::Infeasible { pairs: blocked });
    }
    let mut dropped: Vec<usize> = hopeless.into_iter().chain(blocked).collect();
    dropped.sort_unstable();
    let total_utility = rb_of_pair
        .iter()
        .enumerate()
        .filter_map(|(i, rb)| rb.map(|j| utilities[i][j]))
        .sum();
    Ok(Assignment {
        rb_of_pair,
        dropped,
        total_utility,
    })
}

/// Exhaustive search over all injective maps; ties go to the
/// lexicographically smallest RB vector. Entries are used as given,
/// infeasible markers included.
pub fn brute_force_assignment(utilities: &[Vec<f64>]) -> Result<Assignment> {
    let (n, m) = check_shape(utilities)?;
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            rows: n,
            cols: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; m];
    enumerate(utilities, &mut current, &mut used, &mut best);
    let (total_utility, cols) = best.unwrap_or((0.0, Vec::new()));
    Ok(Assignment {
        rb_of_pair: cols.into_iter().map(Some).collect(),
        dropped: Vec::new(),
        total_utility,
    })
}

fn enumerate(w: &[Vec<f64>], current: &mut Vec<usize>, used: &mut [bool], best: &mut Option<(f64, Vec<usize>)>) {
    let i = current.len();
    if i == w.len() {
        let total: f64 = current.iter().enumerate().map(|(r, &c)| w[r][c]).sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            *best = Some((total, current.clone()));
        }
        return;
    }
    for j in 0..used.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        current.push(j);
        enumerate(w, current, used, best);
        current.pop();
        used[j] = false;
    }
}
