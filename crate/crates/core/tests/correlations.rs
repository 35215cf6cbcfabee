//! Correlation matrices against a brute-force many-body calculation.

mod common;

use common::{fock_correlation, fock_ground_state, max_deviation};
use faer::Mat;
use ptchain_core::entanglement::{
    correlation_k_space, correlation_matrix, entanglement_spectrum, entropy, Prescription, Tolerances,
};
use ptchain_core::model::{build_real_space, Boundary, ChainSpec};
use ptchain_core::spectral::{biorthogonal_diagonalize, select_half_filling};
use ptchain_core::Complex64;

#[test]
fn hermitian_entropy_matches_reduced_density_matrix() {
    let spec = ChainSpec::new(1, 1.0, 1.7, 0.0, 3, Boundary::Pbc);
    let h = build_real_space(&spec).unwrap();
    let gs = fock_ground_state(&h);
    // Reduced density matrix of sites {0, 1}: the low two bits of the state.
    let mut rho = Mat::<Complex64>::zeros(4, 4);
    for (p, &s) in gs.basis.iter().enumerate() {
        for (q, &t) in gs.basis.iter().enumerate() {
            if s >> 2 == t >> 2 {
                rho[((s & 3) as usize, (t & 3) as usize)] += gs.right[p] * gs.right[q].conj();
            }
        }
    }
    let norm: f64 = gs.right.iter().map(|z| z.norm_sqr()).sum();
    let weights = rho.eigenvalues().unwrap();
    let oracle: f64 = weights
        .iter()
        .map(|w| w.re / norm)
        .filter(|&w| w > 1e-300)
        .map(|w| -w * w.ln())
        .sum();

    let sys = biorthogonal_diagonalize(h.as_ref()).unwrap();
    let occ = select_half_filling(&sys).unwrap();
    let c = correlation_matrix(&sys, &occ, 1).unwrap();
    let s = entanglement_spectrum(&c, &Tolerances::default()).unwrap();
    let value = entropy(&s, Prescription::BranchCut).unwrap().value;
    assert!((value.re - oracle).abs() < 1e-10, "{} vs {oracle}", value.re);
    assert!(value.im.abs() < 1e-12);
}

#[test]
fn biorthogonal_correlations_match_many_body_expectation() {
    for spec in [
        ChainSpec::new(1, 1.0, 1.7, 0.3, 3, Boundary::Pbc),
        ChainSpec::new(1, 2.0, 0.8, 0.5, 3, Boundary::Obc),
        ChainSpec::new(2, 1.0, 1.6, 0.4, 3, Boundary::Pbc),
    ] {
        let h = build_real_space(&spec).unwrap();
        let oracle = fock_correlation(&fock_ground_state(&h), spec.sites());
        let sys = biorthogonal_diagonalize(h.as_ref()).unwrap();
        let occ = select_half_filling(&sys).unwrap();
        let c = correlation_matrix(&sys, &occ, spec.cells).unwrap();
        let d = max_deviation(&c.matrix, &oracle);
        assert!(d < 1e-10, "{spec:?}: deviation {d:e}");
    }
}

fn dual_path_deviation(detuning: f64) -> (f64, f64, f64) {
    let spec = ChainSpec::new(1, 2.0, 1.0, 1.0 - detuning, 64, Boundary::Pbc);
    let k = correlation_k_space(&spec, 8).unwrap();
    let sys = biorthogonal_diagonalize(build_real_space(&spec).unwrap().as_ref()).unwrap();
    let occ = select_half_filling(&sys).unwrap();
    let r = correlation_matrix(&sys, &occ, 8).unwrap();
    let scale = (0..16)
        .flat_map(|i| (0..16).map(move |j| (i, j)))
        .map(|(i, j)| k.matrix[(i, j)].norm())
        .fold(0.0, f64::max);
    (max_deviation(&k.matrix, &r.matrix), scale, sys.condition)
}

#[test]
fn momentum_and_real_space_paths_agree() {
    for detuning in [1e-2, 1e-4] {
        let (d, _, _) = dual_path_deviation(detuning);
        assert!(d <= 1e-10, "detuning {detuning:e}: deviation {d:e}");
    }
}

#[test]
fn dual_path_deviation_near_criticality_is_conditioning_limited() {
    // A dense eigensolver resolves a mode of condition kappa only to
    // ~kappa^2 eps relative accuracy; at 1e-12 detuning kappa ~ 7e5.
    let (d, scale, kappa) = dual_path_deviation(1e-12);
    assert!(kappa > 1e5);
    assert!(d <= 10.0 * kappa * kappa * f64::EPSILON * scale, "deviation {d:e}, entries {scale:e}");
}

#[test]
fn hermitian_k_space_correlations_are_hermitian() {
    let spec = ChainSpec::new(1, 2.0, 1.0, 0.0, 50, Boundary::Pbc);
    let c = correlation_k_space(&spec, 10).unwrap().matrix;
    let d = max_deviation(&c, &c.adjoint().to_owned());
    assert!(d <= 1e-12, "{d:e}");
}
