//! Edge and interface bound states: continuum roots, the continuum interface
//! solution and the lattice interface root-finder.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_interface, InterfaceSpec};
use crate::spectral::{biorthogonal_diagonalize, DensityProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRootSet {
    /// Distinct roots with multiplicities.
    pub roots: Vec<(Complex64, usize)>,
    /// Roots (with multiplicity) with `Re beta < 0`.
    pub normalizable_count: usize,
}

impl EdgeRootSet {
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|&(_, m)| m).sum()
    }
}

/// Roots of `(beta + 1)^(alpha - 1) [(v - w) - w beta] = 0`.
pub fn continuum_edge_roots(alpha: usize, v: f64, w: f64) -> Result<EdgeRootSet> {
    if alpha == 0 {
        return Err(Error::InvalidSpec("alpha must be at least 1".into()));
    }
    if w == 0.0 {
        return Err(Error::DegenerateW);
    }
    let mass_root = Complex64::new((v - w) / w, 0.0);
    let minus_one = Complex64::new(-1.0, 0.0);
    let mut roots = Vec::new();
    if mass_root == minus_one {
        roots.push((minus_one, alpha));
    } else {
        if alpha > 1 {
            roots.push((minus_one, alpha - 1));
        }
        roots.push((mass_root, 1));
    }
    let normalizable_count = roots.iter().filter(|(b, _)| b.re < 0.0).map(|&(_, m)| m).sum();
    Ok(EdgeRootSet {
        roots,
        normalizable_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub energy: Complex64,
    /// `E = i a u`.
    pub a: f64,
    /// Decay rate on the Hermitian (left) side, `psi ~ exp(-kappa1 x)` for `x < 0`.
    pub kappa1: Complex64,
    /// Decay rate on the non-Hermitian (right) side, `psi ~ exp(kappa2 x)` for `x > 0`.
    pub kappa2: Complex64,
    /// Lattice decay factors, `psi_{n-1} = beta_l psi_n` on the left and
    /// `psi_{n+1} = beta_r psi_n` on the right. Absent for the continuum solution.
    pub beta_l: Option<Complex64>,
    pub beta_r: Option<Complex64>,
    /// `psi_A / psi_B` at the interface.
    pub sublattice_ratio: Complex64,
    /// Interface matching residual (zero for the closed-form continuum solution).
    pub residual: f64,
    /// Right-eigenvector amplitudes in site order, unit 2-norm.
    pub profile: Option<Vec<Complex64>>,
    pub warnings: Vec<String>,
}

/// Continuum interface between a Hermitian mass `m1` and the non-Hermitian
/// side at its critical point, `m2 = u`.
pub fn interface_continuum(m1: f64, u: f64) -> Result<BoundState> {
    if !(u > 0.0 && u.is_finite()) || !m1.is_finite() {
        return Err(Error::InvalidSpec(format!("interface needs finite m1 and u > 0, got m1 = {m1}, u = {u}")));
    }
    if m1 > 0.0 {
        return Err(Error::ExtraneousRoot(m1));
    }
    if m1 == 0.0 {
        return Err(Error::NoBoundState);
    }
    let a = (-m1 / (2.0 * u - m1)).sqrt();
    let energy = Complex64::new(0.0, a * u);
    let kappa2 = Complex64::new(-a * u, 0.0);
    let kappa1 = Complex64::new(-m1.hypot(a * u), 0.0);
    // Right-side form; equal to (kappa1 + m1) / E by the matching condition.
    let sublattice_ratio = (energy + Complex64::new(0.0, u)) / (kappa2 + u);
    Ok(BoundState {
        energy,
        a,
        kappa1,
        kappa2,
        beta_l: None,
        beta_r: None,
        sublattice_ratio,
        residual: 0.0,
        profile: None,
        warnings: Vec::new(),
    })
}

/// Root of `p beta^2 - q beta + p = 0` inside the unit disk. The roots are
/// reciprocal, so at most one qualifies.
fn decaying_root(p: f64, q: Complex64, side: &'static str) -> Result<Complex64> {
    let disc = (q * q - 4.0 * p * p).sqrt();
    let big = if (q + disc).norm() >= (q - disc).norm() {
        (q + disc) / (2.0 * p)
    } else {
        (q - disc) / (2.0 * p)
    };
    let beta = big.inv();
    if !beta.is_finite() || beta.norm() >= 1.0 - 1e-12 {
        return Err(Error::NoRootInDisk(side));
    }
    Ok(beta)
}

struct Trial {
    beta_l: Complex64,
    beta_r: Complex64,
    residual: Complex64,
}

/// Matching condition with the sublattice ratios eliminated:
/// `E (E - iu) = (v1 beta_l - w)(v2 beta_r - w)`.
fn trial(spec: &InterfaceSpec, e: Complex64) -> Result<Trial> {
    let (v1, v2, w, u) = (spec.v1, spec.v2, spec.w, spec.u);
    let iu = Complex64::new(0.0, u);
    let beta_l = decaying_root(v1 * w, Complex64::from(v1 * v1 + w * w) - e * e, "left")?;
    let beta_r = decaying_root(v2 * w, Complex64::from(v2 * v2 + w * w - u * u) - e * e, "right")?;
    let residual = (e * (e - iu) - (beta_l * v1 - w) * (beta_r * v2 - w)) / (w * w);
    Ok(Trial {
        beta_l,
        beta_r,
        residual,
    })
}

pub const LATTICE_TOL: f64 = 1e-10;
const MAX_SECANT_STEPS: usize = 200;

/// Interface bound state of the lattice, found by damped complex secant
/// iteration on the matching residual.
pub fn interface_lattice_solve(spec: &InterfaceSpec) -> Result<BoundState> {
    spec.validate()?;
    if spec.v1 == 0.0 || spec.v2 == 0.0 || spec.w == 0.0 {
        return Err(Error::InvalidSpec("interface solver needs nonzero v1, v2, w".into()));
    }
    let mut warnings = Vec::new();
    let detuning = spec.u - (spec.w - spec.v2);
    if detuning.abs() > 1e-9 {
        warnings.push(format!("non-Hermitian side is off its critical point by {detuning:.3e}"));
    }
    let seed = interface_continuum(spec.w - spec.v1, spec.u)?.energy;

    let mut x0 = seed;
    let mut f0 = trial(spec, x0)?.residual;
    let mut x1 = seed * 0.99 + Complex64::new(1e-3, 0.0) * spec.u;
    let mut f1 = trial(spec, x1)?.residual;
    let mut converged = None;
    for _ in 0..MAX_SECANT_STEPS {
        if f1.norm() <= LATTICE_TOL {
            converged = Some(x1);
            break;
        }
        let slope = (f1 - f0) / (x1 - x0);
        if !slope.is_finite() || slope.norm() == 0.0 {
            break;
        }
        let step = f1 / slope;
        // Halve the step until the residual drops or the trial leaves the
        // bound-state domain too often.
        let mut damping = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let x = x1 - step * damping;
            if let Ok(t) = trial(spec, x) {
                if t.residual.norm() < f1.norm() || damping < 1e-6 {
                    next = Some((x, t.residual));
                    break;
                }
            }
            damping *= 0.5;
        }
        let Some((x, f)) = next else { break };
        (x0, f0, x1, f1) = (x1, f1, x, f);
    }
    let energy = converged.ok_or_else(|| {
        Error::NoConvergence(format!("interface secant stalled at E = {x1}, residual {:.3e}", f1.norm()))
    })?;
    let t = trial(spec, energy)?;
    let iu = Complex64::new(0.0, spec.u);
    let w = spec.w;
    // psi_B / psi_A on the right, and the link across the junction.
    let r_right = (energy - iu) / (spec.v2 - w / t.beta_r);
    let link = energy / (t.beta_l * spec.v1 - w);
    let r_left = (spec.v1 - w / t.beta_l) / energy;
    let profile = synthesize_profile(spec, t.beta_l, t.beta_r, r_left, r_right, link);
    Ok(BoundState {
        energy,
        a: energy.im / spec.u,
        kappa1: t.beta_l.ln(),
        kappa2: t.beta_r.ln(),
        beta_l: Some(t.beta_l),
        beta_r: Some(t.beta_r),
        sublattice_ratio: r_right.inv(),
        residual: t.residual.norm(),
        profile: Some(profile),
        warnings,
    })
}

/// Exponential profile with `psi_A = 1` on the last Hermitian cell.
fn synthesize_profile(
    spec: &InterfaceSpec,
    beta_l: Complex64,
    beta_r: Complex64,
    r_left: Complex64,
    r_right: Complex64,
    link: Complex64,
) -> Vec<Complex64> {
    let last = spec.cells_left - 1;
    let first_right = link * r_left;
    let mut psi = Vec::with_capacity(2 * spec.cells());
    for n in 0..spec.cells() {
        let a = if n <= last {
            beta_l.powu((last - n) as u32)
        } else {
            first_right * beta_r.powu((n - last - 1) as u32)
        };
        let r = if n <= last { r_left } else { r_right };
        psi.push(a);
        psi.push(a * r);
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter().map(|z| z / norm).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceDensity {
    /// Lattice prediction used to select the mode.
    pub predicted: BoundState,
    /// Eigenvalue of the selected dense mode.
    pub energy: Complex64,
    pub ipr: f64,
    /// `<L|c_i^dagger c_i|R>` of the selected mode.
    pub density: DensityProfile,
}

pub fn default_ipr_threshold(sites: usize) -> f64 {
    4.0 / sites as f64
}

/// Biorthogonal density of the interface mode of the dense interface chain.
pub fn interface_density(spec: &InterfaceSpec, ipr_threshold: f64) -> Result<InterfaceDensity> {
    let predicted = interface_lattice_solve(spec)?;
    let sys = biorthogonal_diagonalize(build_interface(spec)?.as_ref())?;
    let n = sys.dim();
    let ipr = |m: usize| {
        let norm: f64 = (0..n).map(|i| sys.right[(i, m)].norm_sqr()).sum();
        (0..n).map(|i| sys.right[(i, m)].norm_sqr().powi(2)).sum::<f64>() / (norm * norm)
    };
    let best_ipr = (0..n).map(ipr).fold(0.0, f64::max);
    let chosen = (0..n)
        .filter(|&m| ipr(m) >= ipr_threshold)
        .min_by(|&a, &b| {
            let da = (sys.energies[a] - predicted.energy).norm();
            let db = (sys.energies[b] - predicted.energy).norm();
            da.total_cmp(&db)
        })
        .ok_or(Error::NoLocalizedMode {
            ipr: best_ipr,
            threshold: ipr_threshold,
        })?;
    let sites: Vec<Complex64> = (0..n)
        .map(|i| sys.left[(i, chosen)].conj() * sys.right[(i, chosen)])
        .collect();
    let cells = sites.chunks(2).map(|p| p[0] + p[1]).collect();
    Ok(InterfaceDensity {
        predicted,
        energy: sys.energies[chosen],
        ipr: ipr(chosen),
        density: DensityProfile { sites, cells },
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn degree_is_alpha(alpha in 1usize..6, v in -3.0f64..3.0, w in 0.1f64..3.0) {
            prop_assert_eq!(continuum_edge_roots(alpha, v, w).unwrap().degree(), alpha);
        }

        #[test]
        fn a_grows_with_inverted_mass(m in 1e-3f64..1e3, ratio in 1.001f64..10.0, u in 0.1f64..2.0) {
            let a1 = interface_continuum(-m, u).unwrap().a;
            let a2 = interface_continuum(-m * ratio, u).unwrap().a;
            prop_assert!(a2 > a1 && a2 < 1.0);
        }
    }
}
