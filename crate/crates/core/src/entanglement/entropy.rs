//! Complex entanglement entropy under the four logarithm prescriptions.
//!
//! Every prescription evaluates `S = -sum_n [nu ln nu + (1 - nu) ln(1 - nu)]`;
//! they differ only in which branch each logarithm takes. Contributions are
//! collected per mode group so the branch choices stay auditable.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classify::{classify_spectrum, EntanglementSpectrum, ModeLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prescription {
    /// Every logarithm on `arg in (-pi, pi]`.
    Principal,
    /// Branches reassigned inside each pairing group.
    BranchCut,
    /// `ln |z|` in place of `ln z`.
    AbsoluteValue,
    /// `BranchCut` on the spectrum together with its conjugate, halved.
    Regularized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub label: ModeLabel,
    /// Indices into the classified eigenvalues.
    pub members: Vec<usize>,
    pub contribution: Complex64,
    /// Number of logarithms moved by `2 pi i` away from the principal branch.
    pub branch_shifts: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexEntropy {
    pub value: Complex64,
    pub ledger: Vec<LedgerEntry>,
    pub prescription: Prescription,
}

impl ComplexEntropy {
    fn from_ledger(ledger: Vec<LedgerEntry>, prescription: Prescription) -> Self {
        let value = ledger.iter().map(|e| e.contribution).sum();
        Self {
            value,
            ledger,
            prescription,
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `-nu (ln nu + 2 pi i a) - (1 - nu)(ln(1 - nu) + 2 pi i b)` with principal logs.
pub(crate) fn shifted_term(nu: Complex64, a: i32, b: i32) -> Complex64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let m = one() - nu;
    // z (ln z + shift) vanishes at z = 0.
    let t = |z: Complex64, k: i32| if z == Complex64::new(0.0, 0.0) { z } else { z * (z.ln() + two_pi_i * k as f64) };
    -t(nu, a) - t(m, b)
}

/// `x ln|x|` with the limit 0 at `x = 0`.
fn xlog_abs(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

fn magnitude_term(nu: Complex64) -> Complex64 {
    let m = one() - nu;
    let t = |z: Complex64| if z.norm() == 0.0 { z } else { z * z.norm().ln() };
    -t(nu) - t(m)
}

/// Binary entropy of a real value in `[0, 1]`, with `0 ln 0 = 0`.
fn real_term(x: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    h(x) + h(1.0 - x)
}

/// `-2 ln r + (4 phi - 2 pi) I - i pi` with `r = sqrt(1/4 + I^2)`, `phi = arctan 2I`.
pub fn edge_pair_branch_cut(i: f64) -> Complex64 {
    let r = (0.25 + i * i).sqrt();
    let phi = (2.0 * i).atan();
    Complex64::new(-2.0 * r.ln() + (4.0 * phi - 2.0 * PI) * i, -PI)
}

/// `-4R ln r - 4(1-R) ln rho + 4I(phi + varphi - pi)` for the quartet of `nu`.
pub fn quartet_branch_cut(nu: Complex64) -> f64 {
    let (re, im) = (nu.re, nu.im.abs());
    let nu = Complex64::new(re, im);
    let r = nu.norm();
    let rho = (one() - nu).norm();
    let phi = nu.arg();
    let varphi = (one() - nu.conj()).arg();
    -4.0 * re * r.ln() - 4.0 * (1.0 - re) * rho.ln() + 4.0 * im * (phi + varphi - PI)
}

/// `-2[nu ln|nu| + (1 - nu) ln|1 - nu|]` for a real pair `{nu, 1 - nu}`.
pub fn real_pair_branch_cut(nu: f64) -> f64 {
    -2.0 * (xlog_abs(nu) + xlog_abs(1.0 - nu))
}

fn count(spec: &EntanglementSpectrum, label: ModeLabel) -> usize {
    spec.groups
        .iter()
        .filter(|g| g.label == label)
        .map(|g| g.members.len())
        .sum()
}

fn per_group(spec: &EntanglementSpectrum, term: impl Fn(Complex64) -> Complex64) -> Vec<LedgerEntry> {
    spec.groups
        .iter()
        .map(|g| LedgerEntry {
            label: g.label,
            members: g.members.clone(),
            contribution: g.members.iter().map(|&m| term(spec.eigenvalues[m])).sum(),
            branch_shifts: 0,
        })
        .collect()
}

fn branch_cut_ledger(spec: &EntanglementSpectrum) -> Result<Vec<LedgerEntry>> {
    let unpaired = count(spec, ModeLabel::Unpaired);
    if unpaired > 0 {
        return Err(Error::UnpairedMode(unpaired));
    }
    let residual = spec.count(ModeLabel::ResidualPHPair);
    if residual > 0 {
        return Err(Error::ResidualNeedsRegularized(residual));
    }
    let nus = &spec.eigenvalues;
    Ok(spec
        .groups
        .iter()
        .map(|g| {
            let (contribution, branch_shifts) = match g.label {
                ModeLabel::RealInRange => {
                    (Complex64::new(real_term(nus[g.members[0]].re), 0.0), 0)
                }
                // Opposite +-i pi branches on the two negative-argument logs.
                ModeLabel::RealPair => {
                    let nu = 0.5 * (nus[g.members[0]].re + 1.0 - nus[g.members[1]].re);
                    (Complex64::new(real_pair_branch_cut(nu), 0.0), 1)
                }
                // ln nu_- moved up by 2 pi i.
                ModeLabel::EdgePair => {
                    let i = 0.5 * (nus[g.members[0]].im - nus[g.members[1]].im);
                    (edge_pair_branch_cut(i), 1)
                }
                // ln nu down and ln nu^* up by 2 pi i.
                ModeLabel::Quartet => {
                    let one = one();
                    let [a, b, c, d] = [0, 1, 2, 3].map(|k| nus[g.members[k]]);
                    let nu = 0.25 * (a + b.conj() + (one - c) + (one - d).conj());
                    (Complex64::new(quartet_branch_cut(nu), 0.0), 2)
                }
                ModeLabel::ResidualPHPair | ModeLabel::Unpaired => unreachable!(),
            };
            LedgerEntry {
                label: g.label,
                members: g.members.clone(),
                contribution,
                branch_shifts,
            }
        })
        .collect())
}

pub fn entropy(spec: &EntanglementSpectrum, prescription: Prescription) -> Result<ComplexEntropy> {
    let ledger = match prescription {
        Prescription::Principal => per_group(spec, |nu| shifted_term(nu, 0, 0)),
        Prescription::AbsoluteValue => per_group(spec, magnitude_term),
        Prescription::BranchCut => branch_cut_ledger(spec)?,
        Prescription::Regularized => {
            let n = spec.eigenvalues.len();
            let doubled: Vec<Complex64> = spec
                .eigenvalues
                .iter()
                .copied()
                .chain(spec.eigenvalues.iter().map(|z| z.conj()))
                .collect();
            let union = classify_spectrum(&doubled, &spec.tolerances);
            branch_cut_ledger(&union)?
                .into_iter()
                .map(|mut e| {
                    e.contribution *= 0.5;
                    // Members >= n index the conjugated copy.
                    e.members = e.members.iter().map(|&m| m % n).collect();
                    e
                })
                .collect()
        }
    };
    Ok(ComplexEntropy::from_ledger(ledger, prescription))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementEnergies {
    pub energies: Vec<Complex64>,
}

/// `eps_n = ln((1 - nu_n)/nu_n)` on the principal branch.
pub fn entanglement_energies(spec: &EntanglementSpectrum) -> Result<EntanglementEnergies> {
    let energies = spec
        .eigenvalues
        .iter()
        .map(|&nu| {
            if nu.norm() == 0.0 || (one() - nu).norm() == 0.0 {
                return Err(Error::DegenerateEigenvalue(format!("{nu}")));
            }
            Ok(((one() - nu) / nu).ln())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntanglementEnergies { energies })
}
