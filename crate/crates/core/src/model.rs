//! Momentum- and real-space Hamiltonians of the alpha-range non-Hermitian SSH family.
//!
//! Real-space sites are ordered `(cell 0, A), (cell 0, B), (cell 1, A), ...`.
//! The on-site potential is `+i u(x)` on A and `-i u(x)` on B. The intra-type
//! leg `v(x)` joins `A(x)` to `B(x + alpha - 1)` and the inter-type leg `-w`
//! joins `A(x)` to `B(x + alpha)`, so that the Bloch off-diagonal element is
//!
//! ```text
//! v_k = v e^{-i(alpha-1)k} - w e^{-i alpha k}
//! ```
//!
//! under the plane-wave convention `psi(x) = e^{-ikx} psi(0)`.

use faer::Mat;
use num_complex::Complex64;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detuning applied below a critical line so the k = 0 mode stays off the
/// exceptional point.
pub const DEFAULT_CRITICAL_DETUNING: f64 = 1e-12;

/// Tolerance on `| |v - w| - u_eff |` for the `Critical` classification.
pub const DEFAULT_TOL_CRIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Pbc,
    Obc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtClass {
    Symmetric,
    Critical,
    Broken,
}

/// Per-cell offsets `delta(x)` entering `v(x) = v + delta(x)` and
/// `u(x) = u - delta(x) - detuning`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderProfile {
    offsets: Vec<f64>,
}

impl DisorderProfile {
    pub fn new(offsets: Vec<f64>) -> Self {
        Self { offsets }
    }

    /// Offsets drawn uniformly from `[-bound, bound]`.
    ///
    /// The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`; each
    /// draw takes the top 53 bits of one `next_u64` as a mantissa, so the
    /// sequence is identical on every platform.
    pub fn uniform(cells: usize, bound: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets = (0..cells)
            .map(|_| {
                let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                bound * (2.0 * unit - 1.0)
            })
            .collect();
        Self { offsets }
    }

    pub fn zeros(cells: usize) -> Self {
        Self { offsets: vec![0.0; cells] }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// One chain instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub alpha: usize,
    pub v: f64,
    pub w: f64,
    pub u: f64,
    pub cells: usize,
    pub boundary: Boundary,
    pub disorder: Option<DisorderProfile>,
    pub detuning: f64,
}

impl ChainSpec {
    pub fn new(alpha: usize, v: f64, w: f64, u: f64, cells: usize, boundary: Boundary) -> Self {
        Self {
            alpha,
            v,
            w,
            u,
            cells,
            boundary,
            disorder: None,
            detuning: 0.0,
        }
    }

    /// Chain sitting on the critical line `u = |v - w|`, detuned by
    /// [`DEFAULT_CRITICAL_DETUNING`].
    pub fn at_criticality(alpha: usize, v: f64, w: f64, cells: usize, boundary: Boundary) -> Self {
        Self::new(alpha, v, w, (v - w).abs(), cells, boundary).with_detuning(DEFAULT_CRITICAL_DETUNING)
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_disorder(mut self, disorder: DisorderProfile) -> Self {
        self.disorder = Some(disorder);
        self
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn u_eff(&self) -> f64 {
        self.u - self.detuning
    }

    pub fn sites(&self) -> usize {
        2 * self.cells
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.disorder.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.v, self.w, self.u, self.detuning].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("couplings must be finite".into()));
        }
        if self.alpha == 0 {
            return Err(Error::InvalidSpec("alpha must be at least 1".into()));
        }
        if self.cells < self.alpha + 1 {
            return Err(Error::SpecTooSmall {
                cells: self.cells,
                alpha: self.alpha,
            });
        }
        if self.u < 0.0 || self.detuning < 0.0 {
            return Err(Error::InvalidSpec("u and detuning must be non-negative".into()));
        }
        if self.u_eff() < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "detuning {} exceeds u = {}",
                self.detuning, self.u
            )));
        }
        if let Some(disorder) = &self.disorder {
            if disorder.len() != self.cells {
                return Err(Error::InvalidSpec(format!(
                    "disorder has {} offsets for {} cells",
                    disorder.len(),
                    self.cells
                )));
            }
            let bound = self.v.min(self.u);
            if let Some(bad) = disorder.offsets().iter().find(|d| !(d.abs() < bound)) {
                return Err(Error::InvalidSpec(format!(
                    "disorder offset {bad} violates |delta| < min(v, u) = {bound}"
                )));
            }
        }
        Ok(())
    }

    fn require_clean(&self) -> Result<()> {
        if self.disorder.is_some() {
            Err(Error::DisorderPresent)
        } else {
            Ok(())
        }
    }

    /// Intra-type coupling of cell `x`.
    pub fn cell_v(&self, x: usize) -> f64 {
        self.v + self.offset(x)
    }

    /// Effective imaginary potential strength of cell `x`.
    pub fn cell_u(&self, x: usize) -> f64 {
        self.u - self.offset(x) - self.detuning
    }

    fn offset(&self, x: usize) -> f64 {
        self.disorder.as_ref().map_or(0.0, |d| d.offsets[x])
    }

    /// Bloch off-diagonal element `v_k`.
    pub fn off_diagonal(&self, k: f64) -> Complex64 {
        let a = self.alpha as f64;
        self.v * Complex64::cis(-(a - 1.0) * k) - self.w * Complex64::cis(-a * k)
    }

    /// `d v_k / d k`.
    pub fn off_diagonal_derivative(&self, k: f64) -> Complex64 {
        let a = self.alpha as f64;
        let i = Complex64::i();
        -i * (a - 1.0) * self.v * Complex64::cis(-(a - 1.0) * k) + i * a * self.w * Complex64::cis(-a * k)
    }

    /// `|v_k|^2 - u_eff^2`, written as
    /// `(|v-w| - u + detuning)(|v-w| + u_eff) + 4 v w sin^2(k/2)` so that it
    /// keeps full relative precision next to a detuned exceptional point.
    pub fn gap_sqr(&self, k: f64) -> f64 {
        let d = (self.v - self.w).abs();
        let s = (0.5 * k).sin();
        (d - self.u + self.detuning) * (d + self.u_eff()) + 4.0 * self.v * self.w * s * s
    }

    /// `min_k |v_k|`, attained at k = 0 for `v w > 0`.
    pub fn min_off_diagonal(&self) -> f64 {
        (self.v.abs() - self.w.abs()).abs()
    }
}

/// 2x2 Bloch Hamiltonian `[[i u, v_k], [v_k*, -i u]]`, row-major.
pub fn bloch_hamiltonian(spec: &ChainSpec, k: f64) -> Result<[[Complex64; 2]; 2]> {
    spec.require_clean()?;
    let vk = spec.off_diagonal(k);
    let iu = Complex64::new(0.0, spec.u_eff());
    Ok([[iu, vk], [vk.conj(), -iu]])
}

/// Band energies `(+sqrt(|v_k|^2 - u^2), -sqrt(|v_k|^2 - u^2))` on the principal branch.
pub fn dispersion(spec: &ChainSpec, k: f64) -> Result<(Complex64, Complex64)> {
    spec.require_clean()?;
    let e = band_energy(spec.gap_sqr(k));
    Ok((e, -e))
}

/// Principal square root of `|v_k|^2 - u^2`.
pub(crate) fn band_energy(gap_sqr: f64) -> Complex64 {
    Complex64::new(gap_sqr, 0.0).sqrt()
}

pub fn classify_pt(spec: &ChainSpec) -> Result<PtClass> {
    classify_pt_with_tol(spec, DEFAULT_TOL_CRIT)
}

/// PT phase from `min_k |v_k|` against `u_eff`.
///
/// For `v w <= 0` the minimum is located on a fine momentum grid and the
/// result is returned inside [`Error::UnsupportedCouplings`].
pub fn classify_pt_with_tol(spec: &ChainSpec, tol_crit: f64) -> Result<PtClass> {
    spec.require_clean()?;
    let u = spec.u_eff();
    let classify = |gap: f64| {
        if (gap - u).abs() <= tol_crit {
            PtClass::Critical
        } else if gap > u {
            PtClass::Symmetric
        } else {
            PtClass::Broken
        }
    };
    if spec.v * spec.w > 0.0 {
        return Ok(classify(spec.min_off_diagonal()));
    }
    let n = 1 << 14;
    let gap = (0..n)
        .map(|j| {
            let k = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            spec.off_diagonal(k).norm()
        })
        .fold(f64::INFINITY, f64::min);
    Err(Error::UnsupportedCouplings {
        v: spec.v,
        w: spec.w,
        class: classify(gap),
    })
}

fn add_bond(h: &mut Mat<Complex64>, a: usize, b: usize, amplitude: f64) {
    h[(a, b)] += Complex64::new(amplitude, 0.0);
    h[(b, a)] += Complex64::new(amplitude, 0.0);
}

/// Dense `2L x 2L` single-particle Hamiltonian.
pub fn build_real_space(spec: &ChainSpec) -> Result<Mat<Complex64>> {
    spec.validate()?;
    let cells = spec.cells;
    let mut h = Mat::<Complex64>::zeros(2 * cells, 2 * cells);
    let target = |x: usize| -> Option<usize> {
        match spec.boundary {
            Boundary::Pbc => Some(x % cells),
            Boundary::Obc => (x < cells).then_some(x),
        }
    };
    for x in 0..cells {
        let u = spec.cell_u(x);
        h[(2 * x, 2 * x)] = Complex64::new(0.0, u);
        h[(2 * x + 1, 2 * x + 1)] = Complex64::new(0.0, -u);
        if let Some(y) = target(x + spec.alpha - 1) {
            add_bond(&mut h, 2 * x, 2 * y + 1, spec.cell_v(x));
        }
        if let Some(y) = target(x + spec.alpha) {
            add_bond(&mut h, 2 * x, 2 * y + 1, -spec.w);
        }
    }
    Ok(h)
}

/// Hermitian SSH block on the left joined to a non-Hermitian SSH block on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub v1: f64,
    pub v2: f64,
    pub w: f64,
    pub u: f64,
    pub cells_left: usize,
    pub cells_right: usize,
}

impl InterfaceSpec {
    pub fn new(v1: f64, v2: f64, w: f64, u: f64, cells_left: usize, cells_right: usize) -> Self {
        Self {
            v1,
            v2,
            w,
            u,
            cells_left,
            cells_right,
        }
    }

    pub fn cells(&self) -> usize {
        self.cells_left + self.cells_right
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells_left < 2 || self.cells_right < 2 {
            return Err(Error::InvalidSpec("interface needs at least 2 cells per side".into()));
        }
        if ![self.v1, self.v2, self.w, self.u].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidSpec("couplings must be finite".into()));
        }
        Ok(())
    }
}

/// Open chain: cells `0..cells_left` carry `(v1, w, u = 0)`, the rest `(v2, w, +-iu)`.
///
/// The inter-cell bond joins B(x) to A(x+1), so the non-Hermitian block hosts
/// its `E = +iu` A-sublattice edge mode at the junction.
pub fn build_interface(spec: &InterfaceSpec) -> Result<Mat<Complex64>> {
    spec.validate()?;
    let cells = spec.cells();
    let mut h = Mat::<Complex64>::zeros(2 * cells, 2 * cells);
    for x in 0..cells {
        let (v, u) = if x < spec.cells_left {
            (spec.v1, 0.0)
        } else {
            (spec.v2, spec.u)
        };
        h[(2 * x, 2 * x)] = Complex64::new(0.0, u);
        h[(2 * x + 1, 2 * x + 1)] = Complex64::new(0.0, -u);
        add_bond(&mut h, 2 * x, 2 * x + 1, v);
        if x + 1 < cells {
            add_bond(&mut h, 2 * x + 1, 2 * x + 2, -spec.w);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn bloch_examples() {
        let h = bloch_hamiltonian(&ChainSpec::new(1, 2.0, 1.0, 1.0, 4, Boundary::Pbc), 0.0).unwrap();
        assert!(close(h[0][0], c(0.0, 1.0), 1e-15));
        assert!(close(h[0][1], c(1.0, 0.0), 1e-15));
        assert!(close(h[1][0], c(1.0, 0.0), 1e-15));
        assert!(close(h[1][1], c(0.0, -1.0), 1e-15));

        let h = bloch_hamiltonian(&ChainSpec::new(1, 1.0, 2.0, 0.0, 4, Boundary::Pbc), PI).unwrap();
        assert!(close(h[0][1], c(3.0, 0.0), 1e-14));
        assert!(close(h[0][0], c(0.0, 0.0), 0.0));

        let h = bloch_hamiltonian(&ChainSpec::new(2, 1.0, 2.0, 1.0, 4, Boundary::Pbc), PI / 2.0).unwrap();
        assert!(close(h[0][1], c(2.0, -1.0), 1e-14));
        assert!(close(h[1][0], c(2.0, 1.0), 1e-14));
    }

    #[test]
    fn bloch_rejects_disorder() {
        let spec = ChainSpec::new(1, 2.0, 1.0, 1.0, 3, Boundary::Pbc).with_disorder(DisorderProfile::zeros(3));
        assert_eq!(bloch_hamiltonian(&spec, 0.0), Err(Error::DisorderPresent));
        assert_eq!(dispersion(&spec, 0.0), Err(Error::DisorderPresent));
    }

    #[test]
    fn dispersion_examples() {
        let (p, m) = dispersion(&ChainSpec::new(1, 2.0, 1.0, 1.0, 4, Boundary::Pbc), 0.0).unwrap();
        assert!(p.norm() < 1e-15 && m.norm() < 1e-15);
        let (p, m) = dispersion(&ChainSpec::new(1, 1.0, 2.0, 1.0, 4, Boundary::Pbc), PI).unwrap();
        assert!(close(p, c(8f64.sqrt(), 0.0), 1e-12));
        assert!(close(m, c(-8f64.sqrt(), 0.0), 1e-12));
        let (p, m) = dispersion(&ChainSpec::new(1, 1.0, 1.2, 1.0, 4, Boundary::Pbc), 0.0).unwrap();
        assert!(close(p, c(0.0, 0.96f64.sqrt()), 1e-12));
        assert!(close(m, c(0.0, -0.96f64.sqrt()), 1e-12));
    }

    #[test]
    fn pt_classification() {
        let class = |v, w, u| classify_pt(&ChainSpec::new(1, v, w, u, 4, Boundary::Pbc)).unwrap();
        assert_eq!(class(2.0, 1.0, 0.5), PtClass::Symmetric);
        assert_eq!(class(1.0, 2.0, 1.0), PtClass::Critical);
        assert_eq!(class(1.0, 1.2, 1.0), PtClass::Broken);
        let detuned = ChainSpec::at_criticality(2, 1.0, 2.0, 8, Boundary::Pbc);
        assert_eq!(classify_pt(&detuned).unwrap(), PtClass::Critical);
    }

    #[test]
    fn pt_classification_flags_sign_changing_couplings() {
        let err = classify_pt(&ChainSpec::new(1, 1.0, -2.0, 0.5, 4, Boundary::Pbc)).unwrap_err();
        match err {
            Error::UnsupportedCouplings { class, .. } => assert_eq!(class, PtClass::Symmetric),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn obc_dimers() {
        let h = build_real_space(&ChainSpec::new(1, 1.0, 0.0, 0.0, 2, Boundary::Obc)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i / 2 == j / 2 && i != j { 1.0 } else { 0.0 };
                assert_eq!(h[(i, j)], c(expected, 0.0));
            }
        }
        let h = build_real_space(&ChainSpec::new(1, 0.0, 1.0, 0.0, 2, Boundary::Obc)).unwrap();
        let nonzero: Vec<_> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| h[(i, j)].norm() > 0.0)
            .collect();
        assert_eq!(nonzero, vec![(0, 3), (3, 0)]);
        assert_eq!(h[(0, 3)], c(-1.0, 0.0));
    }

    #[test]
    fn real_space_requires_room_for_legs() {
        let spec = ChainSpec::new(3, 1.0, 2.0, 0.0, 3, Boundary::Pbc);
        assert_eq!(
            build_real_space(&spec).unwrap_err(),
            Error::SpecTooSmall { cells: 3, alpha: 3 }
        );
    }

    #[test]
    fn disorder_is_validated() {
        let bad = ChainSpec::new(1, 1.0, 2.0, 1.0, 3, Boundary::Obc).with_disorder(DisorderProfile::new(vec![0.0, 1.0, 0.0]));
        assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        let short = ChainSpec::new(1, 1.0, 2.0, 1.0, 3, Boundary::Obc).with_disorder(DisorderProfile::zeros(2));
        assert!(matches!(short.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn disorder_rule_anticorrelates_v_and_u() {
        let spec = ChainSpec::new(1, 1.0, 2.0, 1.0, 3, Boundary::Obc)
            .with_detuning(1e-10)
            .with_disorder(DisorderProfile::new(vec![0.5, -0.25, 0.0]));
        let h = build_real_space(&spec).unwrap();
        assert_eq!(h[(0, 1)], c(1.5, 0.0));
        assert_eq!(h[(0, 0)], c(0.0, 1.0 - 0.5 - 1e-10));
        assert_eq!(h[(3, 3)], c(0.0, -(1.0 + 0.25 - 1e-10)));
    }

    #[test]
    fn uniform_disorder_is_reproducible_and_bounded() {
        let a = DisorderProfile::uniform(500, 0.999, 7);
        let b = DisorderProfile::uniform(500, 0.999, 7);
        let c = DisorderProfile::uniform(500, 0.999, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.offsets().iter().all(|d| d.abs() <= 0.999));
        let mean = a.offsets().iter().sum::<f64>() / 500.0;
        assert!(mean.abs() < 0.1);
    }

    #[test]
    fn interface_layout() {
        let spec = InterfaceSpec::new(1.5, 0.5, 1.0, 0.5, 2, 2);
        let h = build_interface(&spec).unwrap();
        assert_eq!(h[(0, 1)], c(1.5, 0.0));
        assert_eq!(h[(4, 5)], c(0.5, 0.0));
        assert_eq!(h[(3, 4)], c(-1.0, 0.0));
        assert_eq!(h[(2, 5)], c(0.0, 0.0));
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        assert_eq!(h[(4, 4)], c(0.0, 0.5));
        assert_eq!(h[(7, 7)], c(0.0, -0.5));
        assert!(build_interface(&InterfaceSpec::new(1.0, 1.0, 1.0, 0.0, 1, 3)).is_err());
    }
}
