//! Biorthogonal diagonalization, half filling and ground-state observables.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{band_energy, build_real_space, Boundary, ChainSpec};

pub const DEFAULT_TOL_ZERO: f64 = 1e-8;
pub const DEFAULT_TOL_BIORTH: f64 = 1e-9;

/// Largest accepted eigenvector condition number `|L_n| |R_n|` (with
/// `<L_n|R_n> = 1`). At an exact exceptional point of a double-precision
/// matrix this reaches `~1/sqrt(eps)`.
pub fn default_max_condition() -> f64 {
    0.1 / f64::EPSILON.sqrt()
}

#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub energies: Vec<Complex64>,
    /// Column `n` is `R_n`, normalized to unit Euclidean norm.
    pub right: Mat<Complex64>,
    /// Column `n` is `L_n`, scaled so that `L_n^dagger R_n = 1`.
    pub left: Mat<Complex64>,
    pub biorth_residual: f64,
    /// `max_n |L_n| |R_n|`.
    pub condition: f64,
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

/// Orders indices by (Re, Im, index).
pub(crate) fn sorted_order(values: &[Complex64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
            .then(a.cmp(&b))
    });
    order
}

pub fn biorthogonal_diagonalize(h: MatRef<'_, Complex64>) -> Result<BiorthogonalSystem> {
    biorthogonal_diagonalize_with(h, DEFAULT_TOL_BIORTH, default_max_condition())
}

/// Right eigenvectors from the Schur-based solver; left eigenvectors from
/// `L^dagger = R^{-1}`, which makes degenerate blocks biorthonormal without any
/// overlap matching.
pub fn biorthogonal_diagonalize_with(
    h: MatRef<'_, Complex64>,
    tol_biorth: f64,
    max_condition: f64,
) -> Result<BiorthogonalSystem> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::InvalidSpec(format!("matrix is {}x{}", n, h.ncols())));
    }
    if !(0..n).all(|j| (0..n).all(|i| h[(i, j)].is_finite())) {
        return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
    }
    let eig = h
        .eigen()
        .map_err(|e| Error::NoConvergence(format!("eigendecomposition failed: {e:?}")))?;
    let raw_values: Vec<Complex64> = (0..n).map(|i| eig.S().column_vector()[i]).collect();
    let order = sorted_order(&raw_values);
    let energies: Vec<Complex64> = order.iter().map(|&i| raw_values[i]).collect();
    let u = eig.U();
    let right = Mat::<Complex64>::from_fn(n, n, |i, j| u[(i, order[j])]);
    let right = {
        let norms: Vec<f64> = (0..n).map(|j| right.col(j).norm_l2()).collect();
        Mat::<Complex64>::from_fn(n, n, |i, j| right[(i, j)] / norms[j])
    };
    let mut inverse = right.partial_piv_lu().inverse();
    // One Newton-Schulz step, X <- X + (I - X R) X.
    let mut defect = -(&inverse * &right);
    for i in 0..n {
        defect[(i, i)] += Complex64::new(1.0, 0.0);
    }
    inverse = &inverse + &defect * &inverse;
    if !(0..n).all(|j| (0..n).all(|i| inverse[(i, j)].is_finite())) {
        return Err(Error::DefectiveMatrix {
            condition: f64::INFINITY,
        });
    }
    let left = inverse.adjoint().to_owned();
    let condition = (0..n).map(|j| left.col(j).norm_l2()).fold(0.0, f64::max);
    if condition > max_condition {
        return Err(Error::DefectiveMatrix { condition });
    }
    let overlap = left.adjoint() * &right;
    let biorth_residual = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| {
            let delta = if i == j { 1.0 } else { 0.0 };
            (overlap[(i, j)] - delta).norm()
        })
        .fold(0.0, f64::max);
    if biorth_residual > tol_biorth {
        return Err(Error::DefectiveMatrix { condition });
    }
    Ok(BiorthogonalSystem {
        energies,
        right,
        left,
        biorth_residual,
        condition,
    })
}

/// Mode weights at half filling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationSet {
    /// `s_n` for every mode, in the order of the energies it was built from.
    pub weights: Vec<f64>,
    /// Number of occupied particles, half the number of modes.
    pub particles: usize,
}

impl OccupationSet {
    /// `(mode index, s_n)` for modes with nonzero weight.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().copied().enumerate().filter(|&(_, s)| s != 0.0)
    }

    pub fn bell_pairs(&self) -> usize {
        self.weights.iter().filter(|&&s| s == 0.5).count() / 2
    }
}

pub fn select_half_filling(sys: &BiorthogonalSystem) -> Result<OccupationSet> {
    half_filling_weights(&sys.energies, DEFAULT_TOL_ZERO)
}

/// Weight 1 below zero, 0 above, and 1/2 for each imaginary zero-real-part mode.
pub fn half_filling_weights(energies: &[Complex64], tol_zero: f64) -> Result<OccupationSet> {
    let n = energies.len();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let mut halves = 0usize;
    let mut fulls = 0usize;
    let mut weights = Vec::with_capacity(n);
    for e in energies {
        let w = if e.re < -tol_zero {
            fulls += 1;
            1.0
        } else if e.re > tol_zero {
            0.0
        } else if e.im.abs() > tol_zero {
            halves += 1;
            0.5
        } else {
            return Err(Error::AmbiguousFilling(format!(
                "real zero mode at E = {e}; increase the detuning"
            )));
        };
        weights.push(w);
    }
    if halves % 2 != 0 || 2 * fulls + halves != n {
        return Err(Error::AmbiguousFilling(format!(
            "{fulls} filled and {halves} half-filled modes cannot make {} particles",
            n / 2
        )));
    }
    Ok(OccupationSet {
        weights,
        particles: n / 2,
    })
}

pub fn occupied_energy(energies: &[Complex64], occ: &OccupationSet) -> Complex64 {
    occ.occupied().map(|(n, s)| energies[n] * s).sum()
}

/// `sum_n s_n E_n` at half filling.
///
/// Clean periodic chains sum `-sqrt(|v_k|^2 - u^2)` over the momentum grid;
/// PT-broken momenta carry a Bell pair and contribute zero.
pub fn ground_state_energy(spec: &ChainSpec) -> Result<Complex64> {
    spec.validate()?;
    if spec.boundary == Boundary::Pbc && spec.is_translation_invariant() {
        Ok(ground_state_energy_k_space(spec))
    } else {
        ground_state_energy_dense(spec)
    }
}

pub(crate) fn ground_state_energy_k_space(spec: &ChainSpec) -> Complex64 {
    let cells = spec.cells;
    (0..cells)
        .map(|n| {
            let k = 2.0 * std::f64::consts::PI * n as f64 / cells as f64;
            let e = band_energy(spec.gap_sqr(k));
            if e.re > 0.0 {
                -e
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .sum()
}

/// Dense path using eigenvalues only.
pub fn ground_state_energy_dense(spec: &ChainSpec) -> Result<Complex64> {
    let h = build_real_space(spec)?;
    let energies = sorted_eigenvalues(h.as_ref())?;
    let occ = half_filling_weights(&energies, DEFAULT_TOL_ZERO)?;
    Ok(occupied_energy(&energies, &occ))
}

pub fn sorted_eigenvalues(h: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    let values = h
        .eigenvalues()
        .map_err(|e| Error::NoConvergence(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(sorted_order(&values).into_iter().map(|i| values[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    /// `n_{i,a}` in site order.
    pub sites: Vec<Complex64>,
    /// `n_{i,A} + n_{i,B}`.
    pub cells: Vec<Complex64>,
}

/// Diagonal of the full correlation matrix, `n_i = sum_n s_n conj(L_n(i)) R_n(i)`.
pub fn density_profile(sys: &BiorthogonalSystem, occ: &OccupationSet) -> DensityProfile {
    let n = sys.dim();
    let sites: Vec<Complex64> = (0..n)
        .map(|i| {
            occ.occupied()
                .map(|(m, s)| sys.left[(i, m)].conj() * sys.right[(i, m)] * s)
                .sum()
        })
        .collect();
    let cells = sites.chunks(2).map(|p| p.iter().sum()).collect();
    DensityProfile { sites, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dispersion;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat2(a: [[Complex64; 2]; 2]) -> Mat<Complex64> {
        Mat::from_fn(2, 2, |i, j| a[i][j])
    }

    #[test]
    fn hermitian_dimer() {
        let sys = biorthogonal_diagonalize(mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]).as_ref()).unwrap();
        assert!((sys.energies[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((sys.energies[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(sys.biorth_residual < 1e-14);
    }

    #[test]
    fn exceptional_point_is_defective() {
        let h = mat2([[c(0., 1.), c(1., 0.)], [c(1., 0.), c(0., -1.)]]);
        assert!(matches!(
            biorthogonal_diagonalize(h.as_ref()),
            Err(Error::DefectiveMatrix { .. })
        ));
    }

    #[test]
    fn gapped_non_hermitian_dimer() {
        let h = mat2([[c(0., 1.), c(2., 0.)], [c(2., 0.), c(0., -1.)]]);
        let sys = biorthogonal_diagonalize(h.as_ref()).unwrap();
        let s3 = 3f64.sqrt();
        assert!((sys.energies[0] - c(-s3, 0.0)).norm() < 1e-12);
        assert!((sys.energies[1] - c(s3, 0.0)).norm() < 1e-12);
        assert!(sys.biorth_residual < 1e-12);
        // Hand solution: R_+ ∝ (2, sqrt3 - i), L_+ ∝ (2, sqrt3 + i).
        let (r, l) = (sys.right.col(1), sys.left.col(1));
        let ratio_r = r[1] / r[0];
        let ratio_l = l[1] / l[0];
        assert!((ratio_r - c(s3, -1.0) / 2.0).norm() < 1e-12);
        assert!((ratio_l - c(s3, 1.0) / 2.0).norm() < 1e-12);
        let hr = &h * r;
        for i in 0..2 {
            assert!((hr[i] - r[i] * s3).norm() < 1e-12);
        }
    }

    #[test]
    fn near_exceptional_point_is_accepted() {
        let spec = ChainSpec::at_criticality(1, 2.0, 1.0, 64, Boundary::Pbc);
        let sys = biorthogonal_diagonalize(build_real_space(&spec).unwrap().as_ref()).unwrap();
        assert!(sys.biorth_residual < DEFAULT_TOL_BIORTH);
    }

    #[test]
    fn dimer_filling_energy() {
        let spec = ChainSpec::new(1, 1.0, 0.0, 0.0, 2, Boundary::Obc);
        let sys = biorthogonal_diagonalize(build_real_space(&spec).unwrap().as_ref()).unwrap();
        let occ = select_half_filling(&sys).unwrap();
        assert_eq!(occ.weights, vec![1.0, 1.0, 0.0, 0.0]);
        assert!((occupied_energy(&sys.energies, &occ) - c(-2.0, 0.0)).norm() < 1e-14);
        let three = ChainSpec::new(1, 1.0, 0.0, 0.0, 3, Boundary::Obc);
        assert!((ground_state_energy(&three).unwrap() - c(-3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn topological_edge_pair_is_bell_filled() {
        let spec = ChainSpec::at_criticality(1, 1.0, 2.0, 20, Boundary::Obc);
        let sys = biorthogonal_diagonalize(build_real_space(&spec).unwrap().as_ref()).unwrap();
        let occ = select_half_filling(&sys).unwrap();
        assert_eq!(occ.bell_pairs(), 1);
        let edge: Complex64 = occ
            .occupied()
            .filter(|&(_, s)| s == 0.5)
            .map(|(n, s)| sys.energies[n] * s)
            .sum();
        assert!(edge.norm() < 1e-12);
        for (n, s) in occ.occupied().filter(|&(_, s)| s == 0.5) {
            assert!((sys.energies[n].im.abs() - spec.u_eff()).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn zero_real_mode_is_ambiguous() {
        let energies = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            half_filling_weights(&energies, DEFAULT_TOL_ZERO),
            Err(Error::AmbiguousFilling(_))
        ));
    }

    fn dispersion_multiset(spec: &ChainSpec) -> Vec<Complex64> {
        let mut grid = Vec::new();
        for n in 0..spec.cells {
            let k = 2.0 * std::f64::consts::PI * n as f64 / spec.cells as f64;
            let (p, m) = dispersion(spec, k).unwrap();
            grid.push(p);
            grid.push(m);
        }
        sorted_order(&grid).into_iter().map(|i| grid[i]).collect()
    }

    #[test]
    fn pbc_spectrum_matches_dispersion() {
        let spec = ChainSpec::new(1, 2.0, 1.0, 0.5, 3, Boundary::Pbc);
        let dense = sorted_eigenvalues(build_real_space(&spec).unwrap().as_ref()).unwrap();
        for (d, g) in dense.iter().zip(dispersion_multiset(&spec)) {
            assert!((d - g).norm() < 1e-10, "{d} vs {g}");
        }
    }

    #[test]
    fn pbc_spectrum_at_exceptional_momentum() {
        // k = 0 sits exactly on the exceptional point; a defective double
        // eigenvalue is only resolved to O(sqrt(eps)).
        let spec = ChainSpec::new(1, 2.0, 1.0, 1.0, 3, Boundary::Pbc);
        let dense = sorted_eigenvalues(build_real_space(&spec).unwrap().as_ref()).unwrap();
        for (d, g) in dense.iter().zip(dispersion_multiset(&spec)) {
            let tol = if g.norm() < 1e-6 { 1e-7 } else { 1e-10 };
            assert!((d - g).norm() < tol, "{d} vs {g}");
        }
    }

    #[test]
    fn energy_paths_agree() {
        let spec = ChainSpec::new(1, 1.0, 2.0, 0.5, 64, Boundary::Pbc);
        let k = ground_state_energy(&spec).unwrap();
        let dense = ground_state_energy_dense(&spec).unwrap();
        assert!((k - dense).norm() / k.norm() < 1e-12, "{k} vs {dense}");
    }

    #[test]
    fn hermitian_density_is_real_and_half_filled() {
        let spec = ChainSpec::new(1, 2.0, 1.0, 0.0, 30, Boundary::Obc);
        let sys = biorthogonal_diagonalize(build_real_space(&spec).unwrap().as_ref()).unwrap();
        let occ = select_half_filling(&sys).unwrap();
        let prof = density_profile(&sys, &occ);
        assert!(prof.sites.iter().all(|n| n.im.abs() < 1e-12));
        let total: Complex64 = prof.cells.iter().sum();
        assert!((total - c(30.0, 0.0)).norm() < 1e-10);
    }
}
