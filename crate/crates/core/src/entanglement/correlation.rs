//! Subsystem correlation matrices `C_ij = <G_L| c_i^dagger c_j |G_R>`.
//!
//! With `|G_R> = prod_n (sum_i R_n(i) c_i^dagger)|0>` and the matching left
//! state, `C_ij = sum_n s_n conj(L_n(i)) R_n(j)`. For a Hermitian chain this is
//! the usual `<c_i^dagger c_j>`; the many-body oracle in the test suite pins it.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec};
use crate::spectral::{BiorthogonalSystem, OccupationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    RealSpace,
    KSpace,
}

#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    /// `2 cells x 2 cells`, sites ordered as in the chain.
    pub matrix: Mat<Complex64>,
    /// Subsystem cells `0..cells`.
    pub cells: usize,
    pub provenance: Provenance,
}

impl CorrelationMatrix {
    pub fn trace(&self) -> Complex64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }
}

pub fn correlation_matrix(
    sys: &BiorthogonalSystem,
    occ: &OccupationSet,
    cells: usize,
) -> Result<CorrelationMatrix> {
    let n = 2 * cells;
    if n > sys.dim() || cells == 0 {
        return Err(Error::InvalidSpec(format!(
            "subsystem of {cells} cells does not fit a {}-site chain",
            sys.dim()
        )));
    }
    if occ.weights.len() != sys.dim() {
        return Err(Error::InvalidSpec("occupation does not match the system".into()));
    }
    let modes: Vec<(usize, f64)> = occ.occupied().collect();
    let left = Mat::<Complex64>::from_fn(n, modes.len(), |i, m| {
        let (mode, s) = modes[m];
        sys.left[(i, mode)].conj() * s
    });
    let right_t = Mat::<Complex64>::from_fn(modes.len(), n, |m, j| sys.right[(j, modes[m].0)]);
    Ok(CorrelationMatrix {
        matrix: &left * &right_t,
        cells,
        provenance: Provenance::RealSpace,
    })
}

/// Clean periodic chain, lower band filled.
///
/// `C_{(x,a),(y,b)} = (1/L) sum_k e^{ik(x-y)} P(k)_{ba}` with the band
/// projector `P(k) = (1 - H(k)/eps_k)/2`. PT-broken momenta hold a Bell pair
/// and contribute `P(k) = 1/2`.
pub fn correlation_k_space(spec: &ChainSpec, cells: usize) -> Result<CorrelationMatrix> {
    if spec.disorder.is_some() {
        return Err(Error::DisorderPresent);
    }
    if spec.boundary != Boundary::Pbc {
        return Err(Error::InvalidSpec("k-space correlations need periodic boundaries".into()));
    }
    spec.validate()?;
    let l = spec.cells;
    if cells == 0 || cells > l {
        return Err(Error::InvalidSpec(format!("subsystem of {cells} cells in a {l}-cell chain")));
    }
    let iu = Complex64::new(0.0, spec.u_eff());
    let half = Complex64::new(0.5, 0.0);
    let mut projectors = Vec::with_capacity(l);
    for n in 0..l {
        let k = 2.0 * PI * n as f64 / l as f64;
        let g = spec.gap_sqr(k);
        if g == 0.0 {
            return Err(Error::AmbiguousFilling(format!(
                "exceptional point at k = {k}; increase the detuning"
            )));
        }
        let p = if g > 0.0 {
            let eps = g.sqrt();
            let vk = spec.off_diagonal(k);
            [
                [half - iu / (2.0 * eps), -vk / (2.0 * eps)],
                [-vk.conj() / (2.0 * eps), half + iu / (2.0 * eps)],
            ]
        } else {
            let zero = Complex64::new(0.0, 0.0);
            [[half, zero], [zero, half]]
        };
        projectors.push(p);
    }
    // Exact phase table e^{2 pi i m / L}.
    let phases: Vec<Complex64> = (0..l)
        .map(|m| Complex64::cis(2.0 * PI * m as f64 / l as f64))
        .collect();
    // blocks[d + cells - 1] holds G(d) with G(d)_{ab} = C_{(x,a),(x-d,b)}.
    let blocks: Vec<[[Complex64; 2]; 2]> = (-(cells as i64 - 1)..cells as i64)
        .map(|d| {
            let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
            let dm = d.rem_euclid(l as i64) as usize;
            for (n, p) in projectors.iter().enumerate() {
                let phase = phases[(n * dm) % l];
                for a in 0..2 {
                    for b in 0..2 {
                        g[a][b] += phase * p[b][a];
                    }
                }
            }
            for row in g.iter_mut() {
                for z in row.iter_mut() {
                    *z /= l as f64;
                }
            }
            g
        })
        .collect();
    let matrix = Mat::<Complex64>::from_fn(2 * cells, 2 * cells, |i, j| {
        let (x, a) = (i / 2, i % 2);
        let (y, b) = (j / 2, j % 2);
        let d = x as i64 - y as i64;
        blocks[(d + cells as i64 - 1) as usize][a][b]
    });
    Ok(CorrelationMatrix {
        matrix,
        cells,
        provenance: Provenance::KSpace,
    })
}
