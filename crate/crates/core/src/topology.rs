//! Winding number, complex Zak phase and symmetry-closure residuals.
//!
//! The winding number is `omega = -(1/2pi) \oint d arg v_k`. With
//! `v_k = v e^{-i(alpha-1)k} - w e^{-i alpha k}` this gives `alpha - 1` for
//! `v > w` and `alpha` for `w > v`, and makes `Re Q = pi omega` hold with the
//! connection `A(k) = -phi'/2 + (phi'/2) iu / sqrt(|v_k|^2 - u^2)`.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use roots::{find_root_brent, SimpleConvergency};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{classify_pt, ChainSpec, PtClass};

pub const DEFAULT_TOL_ZAK: f64 = 1e-6;
pub const DEFAULT_TOL_SYM: f64 = 1e-8;
pub const MAX_ZAK_GRID: usize = 1 << 16;

/// Smallest |v_k| accepted on the winding grid, relative to |v| + |w|.
const GAPLESS_TOL: f64 = 1e-12;
/// Largest distance from an integer accepted for the accumulated phase / 2pi.
const ROUNDING_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologyResult {
    pub winding: i64,
    pub zak: Complex64,
    pub re_zak_deviation: f64,
    pub pt_class: PtClass,
}

fn require_clean(spec: &ChainSpec) -> Result<()> {
    if spec.disorder.is_some() {
        return Err(Error::DisorderPresent);
    }
    Ok(())
}

fn grid(n_k: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n_k as f64
}

pub fn winding_number(spec: &ChainSpec, n_k: usize) -> Result<i64> {
    require_clean(spec)?;
    if n_k < 3 {
        return Err(Error::InvalidSpec("winding grid needs at least 3 points".into()));
    }
    let floor = GAPLESS_TOL * (spec.v.abs() + spec.w.abs());
    let values: Vec<Complex64> = (0..n_k).map(|j| spec.off_diagonal(grid(n_k, j))).collect();
    if let Some(j) = values.iter().position(|z| z.norm() <= floor) {
        return Err(Error::GaplessWinding(format!(
            "v_k vanishes at k = {}",
            grid(n_k, j)
        )));
    }
    let total: f64 = (0..n_k)
        .map(|j| (values[(j + 1) % n_k] / values[j]).arg())
        .sum();
    let turns = -total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > ROUNDING_TOL {
        return Err(Error::GaplessWinding(format!(
            "accumulated phase {turns} turns is not close to an integer"
        )));
    }
    Ok(rounded as i64)
}

/// `g(k) = |v_k|^2 - u^2`; its sign decides whether momentum k is PT-broken.
fn gap_function(spec: &ChainSpec, k: f64) -> f64 {
    spec.gap_sqr(k)
}

fn gap_function_derivative(spec: &ChainSpec, k: f64) -> f64 {
    2.0 * (spec.off_diagonal(k).conj() * spec.off_diagonal_derivative(k)).re
}

/// Biorthogonal Berry connection of the lower band.
pub fn zak_connection(spec: &ChainSpec, k: f64) -> Complex64 {
    let vk = spec.off_diagonal(k);
    let dphi = (vk.conj() * spec.off_diagonal_derivative(k)).im / vk.norm_sqr();
    let root = Complex64::new(gap_function(spec, k), 0.0).sqrt();
    let iu = Complex64::new(0.0, spec.u_eff());
    -0.5 * dphi + 0.5 * dphi * iu / root
}

fn brent(a: f64, b: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut conv = SimpleConvergency {
        eps: 1e-15,
        max_iter: 200,
    };
    find_root_brent(a, b, f, &mut conv).ok()
}

/// Breakpoints splitting `[-pi, pi]` so every sign change and near-zero
/// minimum of `g` sits on a panel end, with geometric grading around it.
fn breakpoints(spec: &ChainSpec, n_k: usize) -> Result<Vec<f64>> {
    let g: Vec<f64> = (0..=n_k).map(|j| gap_function(spec, grid(n_k, j))).collect();
    let h = 2.0 * PI / n_k as f64;
    let scale = spec.v * spec.v + spec.w * spec.w;
    let mut special = Vec::new();
    for j in 0..n_k {
        let (a, b) = (grid(n_k, j), grid(n_k, j + 1));
        if g[j] == 0.0 {
            special.push(a);
        } else if g[j] * g[j + 1] < 0.0 {
            if let Some(k) = brent(a, b, |k| gap_function(spec, k)) {
                special.push(k);
            }
        }
        // Local minimum of g between grid points j-1 and j+1 (periodic).
        let prev = if j == 0 { g[n_k - 1] } else { g[j - 1] };
        if g[j] <= prev && g[j] <= g[j + 1] && g[j] >= 0.0 {
            let lo = grid(n_k, j) - h;
            let hi = grid(n_k, j) + h;
            let k0 = brent(lo, hi, |k| gap_function_derivative(spec, k)).unwrap_or(grid(n_k, j));
            let gmin = gap_function(spec, k0);
            if gmin.abs() <= 1e-14 * scale {
                return Err(Error::InvalidSpec(format!(
                    "exceptional point at k = {k0}; add detuning"
                )));
            }
            special.push(k0);
        }
    }
    let mut points = vec![-PI, PI];
    for &k in &special {
        let k = (k + PI).rem_euclid(2.0 * PI) - PI;
        points.push(k);
        let mut d = h;
        while d > 1e-13 {
            points.push(k - d);
            points.push(k + d);
            d *= 0.5;
        }
    }
    let mut points: Vec<f64> = points
        .into_iter()
        .map(|k| k.clamp(-PI, PI))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Ok(points)
}

fn integrate_connection(spec: &ChainSpec, n_k: usize) -> Result<Complex64> {
    let points = breakpoints(spec, n_k)?;
    let mut total = Complex64::new(0.0, 0.0);
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let re = quadrature::double_exponential::integrate(|k| zak_connection(spec, k).re, a, b, 1e-13);
        let im = quadrature::double_exponential::integrate(|k| zak_connection(spec, k).im, a, b, 1e-13);
        total += Complex64::new(re.integral, im.integral);
    }
    Ok(total)
}

/// `Q = \int A(k) dk` over the Brillouin zone.
///
/// The integral is split at the roots and minima of `|v_k|^2 - u^2` found on
/// an `n_k` scan grid and each panel integrated by tanh-sinh quadrature. The
/// scan grid doubles until successive results agree within `DEFAULT_TOL_ZAK`.
pub fn zak_phase(spec: &ChainSpec, n_k: usize) -> Result<Complex64> {
    zak_phase_with_tol(spec, n_k, DEFAULT_TOL_ZAK)
}

pub fn zak_phase_with_tol(spec: &ChainSpec, n_k: usize, tol_zak: f64) -> Result<Complex64> {
    require_clean(spec)?;
    spec.validate()?;
    if n_k < 8 {
        return Err(Error::InvalidSpec("Zak grid needs at least 8 points".into()));
    }
    let limit = MAX_ZAK_GRID.max(2 * n_k);
    let mut n = n_k;
    let mut previous = integrate_connection(spec, n)?;
    let mut change = f64::INFINITY;
    while 2 * n <= limit {
        let next = integrate_connection(spec, 2 * n)?;
        change = (next - previous).norm();
        if change <= tol_zak {
            return Ok(next);
        }
        previous = next;
        n *= 2;
    }
    Err(Error::GridTooCoarse { change, n_k: n })
}

pub fn topology(spec: &ChainSpec, n_k: usize) -> Result<TopologyResult> {
    let pt_class = classify_pt(spec)?;
    let winding = winding_number(spec, n_k)?;
    let zak = zak_phase(spec, n_k)?;
    Ok(TopologyResult {
        winding,
        zak,
        re_zak_deviation: (zak.re - PI * winding as f64).abs(),
        pt_class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub t_plus_residual: f64,
    pub ph_residual: f64,
    pub t_plus_ok: bool,
    pub ph_ok: bool,
}

/// Largest singular value.
pub fn operator_norm(m: MatRef<'_, Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    match m.singular_values() {
        Ok(s) => s.into_iter().fold(0.0, f64::max),
        Err(_) => m.norm_l2(),
    }
}

/// `U_T` acting on a block of `cells` whole cells: `(x, A) <-> (cells-1-x, B)`.
pub(crate) fn t_plus_partner(site: usize, cells: usize) -> usize {
    let (x, sub) = (site / 2, site % 2);
    2 * (cells - 1 - x) + (1 - sub)
}

/// `U_T C^* U_T^dagger - C`, with `U_T` the PT map restricted to the block.
pub fn t_plus_defect(c: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let n = c.nrows();
    let cells = n / 2;
    Mat::from_fn(n, n, |i, j| {
        c[(t_plus_partner(i, cells), t_plus_partner(j, cells))].conj() - c[(i, j)]
    })
}

/// `u C^dagger u + C - I` with `u = sigma_z` per cell.
pub fn ph_defect(c: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let n = c.nrows();
    let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    Mat::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        c[(j, i)].conj() * (sign(i) * sign(j)) + c[(i, j)] - delta
    })
}

pub fn symmetry_closure(c: MatRef<'_, Complex64>) -> Result<SymmetryReport> {
    symmetry_closure_with_tol(c, DEFAULT_TOL_SYM)
}

pub fn symmetry_closure_with_tol(c: MatRef<'_, Complex64>, tol_sym: f64) -> Result<SymmetryReport> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::InvalidSpec(format!("matrix is {}x{}", n, c.ncols())));
    }
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let t_plus_residual = operator_norm(t_plus_defect(c).as_ref());
    let ph_residual = operator_norm(ph_defect(c).as_ref());
    Ok(SymmetryReport {
        t_plus_residual,
        ph_residual,
        t_plus_ok: t_plus_residual <= tol_sym,
        ph_ok: ph_residual <= tol_sym,
    })
}
