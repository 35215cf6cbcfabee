//! Calabrese-Cardy and Casimir finite-size fits, and disorder ensembles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use faer::linalg::solvers::{DenseSolveCore, SolveLstsq};
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{entropy_profile, Prescription, Tolerances};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, DisorderProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimPolicy {
    /// Drop exactly this many smallest-`ell` points.
    FixedCount(usize),
    /// Drop smallest-`ell` points until the sum of squared residuals is at most this.
    UntilSse(f64),
    /// Drop smallest-`ell` points until the root-mean-square residual is at most this.
    UntilRmse(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub coefficients: BTreeMap<String, f64>,
    /// From the normal equations of the final linear solve; informational.
    pub standard_errors: BTreeMap<String, f64>,
    pub sse: f64,
    pub rmse: f64,
    pub trim_count: usize,
    /// Points that entered the final fit.
    pub n_points: usize,
    /// Casimir extrapolation length when one was used.
    pub delta_l: Option<i64>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients[name]
    }
}

struct Linear {
    coefficients: Vec<f64>,
    standard_errors: Vec<f64>,
    sse: f64,
}

/// Least squares `y ~ X beta` by QR.
fn linear_fit(x: &Mat<f64>, y: &[f64]) -> Linear {
    let (n, p) = (x.nrows(), x.ncols());
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| y[i]);
    let beta = x.qr().solve_lstsq(&rhs);
    let coefficients: Vec<f64> = (0..p).map(|j| beta[(j, 0)]).collect();
    let residual = &rhs - x * &beta;
    let sse: f64 = (0..n).map(|i| residual[(i, 0)].powi(2)).sum();
    let standard_errors = if n > p {
        let sigma2 = sse / (n - p) as f64;
        let gram = x.transpose() * x;
        let inv = gram.partial_piv_lu().inverse();
        (0..p).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect()
    } else {
        vec![f64::NAN; p]
    };
    Linear {
        coefficients,
        standard_errors,
        sse,
    }
}

fn sorted_by_x(table: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut t = table.to_vec();
    t.sort_by(|a, b| a.0.total_cmp(&b.0));
    t
}

fn trim_start(policy: TrimPolicy) -> usize {
    match policy {
        TrimPolicy::FixedCount(n) => n,
        TrimPolicy::UntilSse(_) | TrimPolicy::UntilRmse(_) => 0,
    }
}

fn accepts(policy: TrimPolicy, sse: f64, n: usize) -> bool {
    match policy {
        TrimPolicy::FixedCount(_) => true,
        TrimPolicy::UntilSse(tol) => sse <= tol,
        TrimPolicy::UntilRmse(tol) => (sse / n as f64).sqrt() <= tol,
    }
}

/// Runs `fit` on successively trimmed tails of `points` until the policy accepts.
fn trimmed<T>(
    points: &[(f64, f64)],
    policy: TrimPolicy,
    min_points: usize,
    mut fit: impl FnMut(&[(f64, f64)]) -> Result<(T, f64)>,
) -> Result<(T, f64, usize)> {
    let mut trim = trim_start(policy);
    loop {
        let rest = points.len().saturating_sub(trim);
        if rest < min_points {
            return Err(Error::InsufficientPoints {
                needed: min_points,
                have: rest,
            });
        }
        let (value, sse) = fit(&points[trim..])?;
        if accepts(policy, sse, rest) {
            return Ok((value, sse, trim));
        }
        trim += 1;
    }
}

fn named(names: &[&str], values: &[f64]) -> BTreeMap<String, f64> {
    names.iter().map(|s| s.to_string()).zip(values.iter().copied()).collect()
}

fn finish(
    names: &[&str],
    lin: &Linear,
    sse: f64,
    trim: usize,
    n_points: usize,
    delta_l: Option<i64>,
) -> FitResult {
    FitResult {
        coefficients: named(names, &lin.coefficients),
        standard_errors: named(names, &lin.standard_errors),
        sse,
        rmse: (sse / n_points as f64).sqrt(),
        trim_count: trim,
        n_points,
        delta_l,
    }
}

/// `Re S = (c/3) ln sin(pi ell / L) + s0`.
pub fn cc_fit_pbc(table: &[(f64, f64)], cells: f64, policy: TrimPolicy) -> Result<FitResult> {
    let points = sorted_by_x(table);
    let (lin, sse, trim) = trimmed(&points, policy, 4, |pts| {
        let x = Mat::<f64>::from_fn(pts.len(), 2, |i, j| {
            if j == 0 {
                (PI * pts[i].0 / cells).sin().ln()
            } else {
                1.0
            }
        });
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let lin = linear_fit(&x, &y);
        let sse = lin.sse;
        Ok((lin, sse))
    })?;
    Ok(finish(&["c_over_3", "s0"], &lin, sse, trim, points.len() - trim, None))
}

/// `ln sin(pi (ell + dl) / (L + 2 dl))`, symmetric about `ell = L/2`.
fn shifted_log_sine(ell: f64, cells: f64, delta: f64) -> f64 {
    (PI * (ell + delta) / (cells + 2.0 * delta)).sin().ln()
}

/// Inner linear fit of the shifted form at fixed `delta`; `None` when the sine
/// argument leaves `(0, pi)` for some point.
fn shifted_fit(pts: &[(f64, f64)], cells: f64, delta: f64) -> Option<Linear> {
    if pts.iter().any(|p| p.0 + delta <= 0.0 || p.0 >= cells + delta) {
        return None;
    }
    let x = Mat::<f64>::from_fn(pts.len(), 2, |i, j| {
        if j == 0 {
            shifted_log_sine(pts[i].0, cells, delta)
        } else {
            1.0
        }
    });
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Some(linear_fit(&x, &y))
}

struct ShiftCost<'a> {
    pts: &'a [(f64, f64)],
    cells: f64,
}

impl CostFunction for ShiftCost<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, delta: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(shifted_fit(self.pts, self.cells, *delta).map_or(f64::MAX, |l| l.sse))
    }
}

const SHIFT_GRID: usize = 400;

/// Best `delta` in `[-L/4, L/4]`: coarse grid, then Brent refinement on the
/// bracketing cells.
fn best_shift(pts: &[(f64, f64)], cells: f64) -> Result<(f64, Linear)> {
    let lo_domain = -pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let lo = (-cells / 4.0).max(lo_domain + 1e-9 * cells);
    let hi = cells / 4.0;
    if !(lo < hi) {
        return Err(Error::NoConvergence("empty shift interval".into()));
    }
    let cost = ShiftCost { pts, cells };
    let grid: Vec<f64> = (0..=SHIFT_GRID)
        .map(|j| lo + (hi - lo) * j as f64 / SHIFT_GRID as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|d| cost.cost(d).unwrap()).collect();
    let j = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    if values[j] == f64::MAX {
        return Err(Error::NoConvergence("no admissible shift".into()));
    }
    let a = grid[j.saturating_sub(1)];
    let b = grid[(j + 1).min(SHIFT_GRID)];
    let solver = BrentOpt::new(a, b).set_tolerance(1e-10, 1e-12);
    let result = Executor::new(cost, solver)
        .configure(|s| s.max_iters(500))
        .run()
        .map_err(|e| Error::NoConvergence(format!("shift refinement: {e}")))?;
    let state = result.state();
    let delta = state.best_param.unwrap_or(grid[j]);
    let delta = if state.best_cost <= values[j] { delta } else { grid[j] };
    let lin = shifted_fit(pts, cells, delta)
        .ok_or_else(|| Error::NoConvergence("refined shift left the domain".into()))?;
    Ok((delta, lin))
}

/// `Re S = (c/6) ln sin(pi [ell + dl] / (L + 2 dl)) + s0` with `dl` searched
/// in `[-L/4, L/4]`.
///
/// Shifting both ends of the block by `dl` keeps the maximum of the fit form at
/// half chain. Pass `ell <= L/2`; the profile is mirror symmetric.
pub fn cc_fit_obc(table: &[(f64, f64)], cells: f64, policy: TrimPolicy) -> Result<FitResult> {
    let points = sorted_by_x(table);
    let ((delta, lin), sse, trim) = trimmed(&points, policy, 5, |pts| {
        let (delta, lin) = best_shift(pts, cells)?;
        let sse = lin.sse;
        Ok(((delta, lin), sse))
    })?;
    let mut fit = finish(&["c_over_6", "s0"], &lin, sse, trim, points.len() - trim, None);
    fit.coefficients.insert("delta_ell".into(), delta);
    Ok(fit)
}

/// Objective of the shifted fit at a given `delta`, for diagnostics.
pub fn cc_obc_objective(table: &[(f64, f64)], cells: f64, delta: f64) -> Option<f64> {
    shifted_fit(&sorted_by_x(table), cells, delta).map(|l| l.sse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CasimirShift {
    Fixed(i64),
    /// Every integer in `[-4, 4]`, keeping the smallest SSE.
    Scan,
}

pub const CASIMIR_SCAN: std::ops::RangeInclusive<i64> = -4..=4;

/// `E0 = L eps + b + A/(L + dL)` (open) or `E0 = L eps + A/L` (periodic).
pub fn casimir_fit(table: &[(f64, f64)], periodic: bool, shift: CasimirShift) -> Result<FitResult> {
    let points = sorted_by_x(table);
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            have: points.len(),
        });
    }
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    if periodic {
        let x = Mat::<f64>::from_fn(points.len(), 2, |i, j| {
            if j == 0 {
                points[i].0
            } else {
                1.0 / points[i].0
            }
        });
        let lin = linear_fit(&x, &y);
        return Ok(finish(&["eps_bulk", "slope"], &lin, lin.sse, 0, points.len(), None));
    }
    let fit_at = |dl: i64| -> Option<Linear> {
        if points.iter().any(|p| p.0 + dl as f64 == 0.0) {
            return None;
        }
        let x = Mat::<f64>::from_fn(points.len(), 3, |i, j| match j {
            0 => points[i].0,
            1 => 1.0,
            _ => 1.0 / (points[i].0 + dl as f64),
        });
        Some(linear_fit(&x, &y))
    };
    let candidates: Vec<i64> = match shift {
        CasimirShift::Fixed(dl) => vec![dl],
        CasimirShift::Scan => CASIMIR_SCAN.collect(),
    };
    let (dl, lin) = candidates
        .into_iter()
        .filter_map(|dl| fit_at(dl).map(|l| (dl, l)))
        .min_by(|a, b| a.1.sse.total_cmp(&b.1.sse))
        .ok_or_else(|| Error::InvalidSpec("Casimir shift makes L + dL vanish".into()))?;
    Ok(finish(&["eps_bulk", "b", "slope"], &lin, lin.sse, 0, points.len(), Some(dl)))
}

/// `count` distinct integers in `[lo, hi]`, as close to geometric spacing as
/// integers allow: the geometric grid is refined until rounding leaves
/// `count` distinct values.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo || count == 0 || count > hi - lo + 1 {
        return Err(Error::InvalidSpec(format!(
            "cannot place {count} distinct points in [{lo}, {hi}]"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo as f64, hi as f64);
    for n in count.. {
        let mut v: Vec<usize> = (0..n)
            .map(|i| (a * (b / a).powf(i as f64 / (n - 1) as f64)).round() as usize)
            .collect();
        v.dedup();
        if v.len() >= count {
            // Keep both ends and thin the interior evenly in index.
            let m = v.len();
            return Ok((0..count).map(|i| v[i * (m - 1) / (count - 1)]).collect());
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub ells: Vec<usize>,
    pub mean_re: Vec<f64>,
    pub sem_re: Vec<f64>,
    pub mean_im: Vec<f64>,
    pub sem_im: Vec<f64>,
    pub realizations: usize,
    pub base_seed: u64,
    pub bound: f64,
    /// Per-realization `Im S`, realization-major.
    pub im_per_realization: Vec<Vec<f64>>,
}

/// Sample mean and `stddev / sqrt(N)`, summed in realization order. A single
/// realization has s.e.m. 0.
fn mean_sem(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Regularized entropy profiles over `n` realizations with offsets uniform in
/// `[-bound, bound]`; realization `r` is seeded with `base_seed + r`.
pub fn disorder_ensemble(
    template: &ChainSpec,
    bound: f64,
    n: usize,
    base_seed: u64,
    ells: &[usize],
    tol: &Tolerances,
) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(Error::InsufficientPoints { needed: 1, have: 0 });
    }
    let runs: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r as u64);
            let spec = template
                .clone()
                .with_disorder(DisorderProfile::uniform(template.cells, bound, seed));
            entropy_profile(&spec, ells, Prescription::Regularized, tol)
                .map(|rows| rows.iter().map(|row| (row.entropy.value.re, row.entropy.value.im)).collect())
                .map_err(|e| Error::Realization {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut stats = EnsembleStats {
        ells: ells.to_vec(),
        mean_re: Vec::new(),
        sem_re: Vec::new(),
        mean_im: Vec::new(),
        sem_im: Vec::new(),
        realizations: n,
        base_seed,
        bound,
        im_per_realization: runs.iter().map(|run| run.iter().map(|p| p.1).collect()).collect(),
    };
    for i in 0..ells.len() {
        let (m, s) = mean_sem(runs.iter().map(|run| run[i].0), n);
        stats.mean_re.push(m);
        stats.sem_re.push(s);
        let (m, s) = mean_sem(runs.iter().map(|run| run[i].1), n);
        stats.mean_im.push(m);
        stats.sem_im.push(s);
    }
    Ok(stats)
}
