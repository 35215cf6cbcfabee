//! Correlation matrices, classified entanglement spectra and complex entropy.

pub mod classify;
pub mod correlation;
pub mod entropy;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use classify::{
    classify_spectrum, EntanglementSpectrum, ModeGroup, ModeLabel, QuartetParameters, Tolerances,
};
pub use correlation::{correlation_k_space, correlation_matrix, CorrelationMatrix, Provenance};
pub use entropy::{
    entanglement_energies, entropy, ComplexEntropy, EntanglementEnergies, LedgerEntry, Prescription,
};

use crate::error::{Error, Result};
use crate::model::{build_real_space, Boundary, ChainSpec};
use crate::spectral::{biorthogonal_diagonalize, select_half_filling};
use crate::topology::{t_plus_defect, t_plus_partner, DEFAULT_TOL_SYM};

/// Eigenvalues of a subsystem correlation matrix.
///
/// When `C` commutes with the PT map of the block, `C` is unitarily similar to
/// a real matrix in the partner basis, and the real eigensolver returns
/// conjugate pairs that are exact mirror images.
pub fn correlation_eigenvalues(c: &CorrelationMatrix) -> Result<Vec<Complex64>> {
    let m = c.matrix.as_ref();
    let n = m.nrows();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let failed = |e| Error::NoConvergence(format!("correlation eigenvalues: {e:?}"));
    // The Frobenius norm bounds the operator norm, so this never admits a
    // matrix that fails the T_+ closure check.
    if t_plus_defect(m).norm_l2() > DEFAULT_TOL_SYM {
        return m.eigenvalues().map_err(failed);
    }
    let cells = n / 2;
    // Partner pair q = (2q, p(2q)) spans basis vectors
    // e_{2q} = (e_i + e_p)/sqrt2 and e_{2q+1} = i(e_i - e_p)/sqrt2, so
    // <a|C|b> needs four entries of C per element.
    let pair = |q: usize| (2 * q, t_plus_partner(2 * q, cells));
    let real = Mat::<f64>::from_fn(n, n, |a, b| {
        let (i, p) = pair(a / 2);
        let (j, r) = pair(b / 2);
        let (cij, cir, cpj, cpr) = (m[(i, j)], m[(i, r)], m[(p, j)], m[(p, r)]);
        let z = match (a % 2, b % 2) {
            (0, 0) => cij + cir + cpj + cpr,
            (0, 1) => (cij - cir + cpj - cpr) * Complex64::i(),
            (1, 0) => (cij + cir - cpj - cpr) * -Complex64::i(),
            _ => cij - cir - cpj + cpr,
        };
        0.5 * z.re
    });
    real.eigenvalues().map_err(failed)
}

pub fn entanglement_spectrum(c: &CorrelationMatrix, tol: &Tolerances) -> Result<EntanglementSpectrum> {
    Ok(classify_spectrum(&correlation_eigenvalues(c)?, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeCounts {
    pub edge_pairs: usize,
    pub quartets: usize,
    pub real_pairs: usize,
    pub residual_pairs: usize,
    pub unpaired: usize,
}

impl ModeCounts {
    pub fn of(spec: &EntanglementSpectrum) -> Self {
        Self {
            edge_pairs: spec.count(ModeLabel::EdgePair),
            quartets: spec.count(ModeLabel::Quartet),
            real_pairs: spec.count(ModeLabel::RealPair),
            residual_pairs: spec.count(ModeLabel::ResidualPHPair),
            unpaired: spec
                .labels
                .iter()
                .filter(|&&l| l == ModeLabel::Unpaired)
                .count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub cells: usize,
    pub entropy: ComplexEntropy,
    pub counts: ModeCounts,
}

/// Entropy of the first `ell` cells for every `ell` in `ells`.
///
/// Clean periodic chains use the momentum-space correlations; everything else
/// diagonalizes the chain once and restricts the biorthogonal correlations.
pub fn entropy_profile(
    spec: &ChainSpec,
    ells: &[usize],
    prescription: Prescription,
    tol: &Tolerances,
) -> Result<Vec<ProfileRow>> {
    spec.validate()?;
    if let Some(&bad) = ells.iter().find(|&&l| l == 0 || l > spec.cells) {
        return Err(Error::InvalidSpec(format!(
            "subsystem of {bad} cells in a {}-cell chain",
            spec.cells
        )));
    }
    let k_space = spec.boundary == Boundary::Pbc && spec.is_translation_invariant();
    let dense = if k_space {
        None
    } else {
        let sys = biorthogonal_diagonalize(build_real_space(spec)?.as_ref())?;
        let occ = select_half_filling(&sys)?;
        Some((sys, occ))
    };
    ells.par_iter()
        .map(|&ell| {
            let c = match &dense {
                None => correlation_k_space(spec, ell)?,
                Some((sys, occ)) => correlation_matrix(sys, occ, ell)?,
            };
            let classified = entanglement_spectrum(&c, tol)?;
            Ok(ProfileRow {
                cells: ell,
                entropy: entropy(&classified, prescription)?,
                counts: ModeCounts::of(&classified),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::symmetry_closure;
    use approx::assert_abs_diff_eq;

    fn max_deviation(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
        (0..a.nrows())
            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
            .fold(0.0, f64::max)
    }

    fn real_space(spec: &ChainSpec, ell: usize) -> CorrelationMatrix {
        let sys = biorthogonal_diagonalize(build_real_space(spec).unwrap().as_ref()).unwrap();
        let occ = select_half_filling(&sys).unwrap();
        correlation_matrix(&sys, &occ, ell).unwrap()
    }

    #[test]
    fn hermitian_dimer() {
        let spec = ChainSpec::new(1, 1.0, 0.0, 0.0, 2, Boundary::Obc);
        let c = real_space(&spec, 1);
        let expected = [[0.5, -0.5], [-0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(c.matrix[(i, j)].re, expected[i][j], epsilon = 1e-14);
                assert_abs_diff_eq!(c.matrix[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn k_space_matches_real_space() {
        for (u, cells, ell) in [(0.0, 12, 5), (0.4, 16, 6), (1.5, 12, 4)] {
            let spec = ChainSpec::new(1, 2.0, 1.0, u, cells, Boundary::Pbc);
            let d = max_deviation(&correlation_k_space(&spec, ell).unwrap().matrix, &real_space(&spec, ell).matrix);
            assert!(d < 1e-10, "u = {u}: deviation {d:e}");
        }
        let spec = ChainSpec::new(2, 1.0, 2.0, 1.3, 10, Boundary::Pbc);
        let d = max_deviation(&correlation_k_space(&spec, 4).unwrap().matrix, &real_space(&spec, 4).matrix);
        assert!(d < 1e-10, "alpha = 2: deviation {d:e}");
    }

    #[test]
    fn real_path_matches_complex_solver() {
        let spec = ChainSpec::new(1, 1.0, 2.0, 1.6, 30, Boundary::Pbc);
        let c = correlation_k_space(&spec, 7).unwrap();
        let fast = correlation_eigenvalues(&c).unwrap();
        let mut slow = c.matrix.eigenvalues().unwrap();
        for a in &fast {
            let j = (0..slow.len())
                .min_by(|&x, &y| (slow[x] - a).norm().total_cmp(&(slow[y] - a).norm()))
                .unwrap();
            assert!((slow[j] - a).norm() < 1e-10, "{a} vs {}", slow[j]);
            slow.swap_remove(j);
        }
        assert!(fast.iter().any(|z| z.im.abs() > 1e-3));
    }

    #[test]
    fn whole_system_gives_occupations() {
        let spec = ChainSpec::new(1, 2.0, 1.0, 0.5, 8, Boundary::Pbc);
        let c = correlation_k_space(&spec, 8).unwrap();
        let mut nus = correlation_eigenvalues(&c).unwrap();
        nus.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (n, nu) in nus.iter().enumerate() {
            let target = if n < 8 { 0.0 } else { 1.0 };
            assert_abs_diff_eq!(nu.re, target, epsilon = 1e-10);
            assert_abs_diff_eq!(nu.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn periodic_correlations_close_under_both_symmetries() {
        for spec in [
            ChainSpec::at_criticality(1, 1.0, 2.0, 40, Boundary::Pbc),
            ChainSpec::new(1, 2.0, 1.0, 1.7, 40, Boundary::Pbc),
            ChainSpec::at_criticality(2, 1.0, 2.0, 40, Boundary::Pbc),
        ] {
            let c = correlation_k_space(&spec, 9).unwrap();
            let report = symmetry_closure(c.matrix.as_ref()).unwrap();
            assert!(report.t_plus_ok && report.ph_ok, "{report:?}");
            assert_abs_diff_eq!(c.trace().re, 9.0, epsilon = 1e-6);
            assert_abs_diff_eq!(c.trace().im, 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn critical_profile_has_quantized_imaginary_part() {
        let spec = ChainSpec::at_criticality(1, 1.0, 2.0, 200, Boundary::Pbc);
        let ells: Vec<usize> = (2..=100).step_by(7).collect();
        let rows = entropy_profile(&spec, &ells, Prescription::BranchCut, &Tolerances::default()).unwrap();
        for row in rows {
            let edges = row.counts.edge_pairs as f64;
            assert_abs_diff_eq!(row.entropy.value.im, -PI * edges, epsilon = 1e-9);
            assert_eq!(row.counts.edge_pairs, 1, "ell = {}", row.cells);
            assert_eq!(row.counts.unpaired + row.counts.residual_pairs, 0);
        }
    }

    #[test]
    fn hermitian_prescriptions_agree() {
        let spec = ChainSpec::new(1, 1.0, 1.6, 0.0, 30, Boundary::Pbc);
        let tol = Tolerances::default();
        let c = correlation_k_space(&spec, 7).unwrap();
        let s = entanglement_spectrum(&c, &tol).unwrap();
        let reference = entropy(&s, Prescription::BranchCut).unwrap().value;
        assert_eq!(reference.im, 0.0);
        for p in [Prescription::Principal, Prescription::AbsoluteValue, Prescription::Regularized] {
            let v = entropy(&s, p).unwrap().value;
            assert_abs_diff_eq!(v.re, reference.re, epsilon = 1e-10);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
        }
    }

    use std::f64::consts::PI;
}
