//! Pairing structure of complex correlation eigenvalues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    RealInRange,
    RealPair,
    EdgePair,
    Quartet,
    ResidualPHPair,
    Unpaired,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_real: f64,
    pub tol_edge: f64,
    pub tol_pair: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_real: 1e-8,
            tol_edge: 1e-6,
            tol_pair: 1e-8,
        }
    }
}

/// One labelled set of eigenvalues. Members are indices into
/// [`EntanglementSpectrum::eigenvalues`].
///
/// Member order is fixed per label:
/// `EdgePair` = `[1/2 + iI, 1/2 - iI]` with `I > 0`;
/// `Quartet` = `[nu, nu*, 1 - nu, 1 - nu*]` with `Im nu > 0`;
/// `RealPair` = `[nu, 1 - nu]` with `nu < 0`;
/// `ResidualPHPair` = `[nu, 1 - nu*]`, or a single self-paired edge value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGroup {
    pub label: ModeLabel,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuartetParameters {
    pub re: f64,
    pub im: f64,
    /// `|nu|`
    pub r: f64,
    /// `|1 - nu|`
    pub rho: f64,
    /// `arg nu`
    pub phi: f64,
    /// `arg (1 - nu*)`
    pub varphi: f64,
}

impl QuartetParameters {
    pub fn from_eigenvalue(nu: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            re: nu.re,
            im: nu.im,
            r: nu.norm(),
            rho: (one - nu).norm(),
            phi: nu.arg(),
            varphi: (one - nu.conj()).arg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub labels: Vec<ModeLabel>,
    pub groups: Vec<ModeGroup>,
    pub tolerances: Tolerances,
}

impl EntanglementSpectrum {
    pub fn count(&self, label: ModeLabel) -> usize {
        self.groups.iter().filter(|g| g.label == label).count()
    }

    /// `I` of every `1/2 +- iI` edge pair.
    pub fn edge_parameters(&self) -> Vec<f64> {
        self.groups
            .iter()
            .filter(|g| g.label == ModeLabel::EdgePair)
            .map(|g| self.eigenvalues[g.members[0]].im)
            .collect()
    }

    pub fn quartet_parameters(&self) -> Vec<QuartetParameters> {
        self.groups
            .iter()
            .filter(|g| g.label == ModeLabel::Quartet)
            .map(|g| QuartetParameters::from_eigenvalue(self.eigenvalues[g.members[0]]))
            .collect()
    }
}

fn scaled(tol: f64, nu: Complex64) -> f64 {
    tol * nu.norm().max(1.0)
}

/// Nearest unused index to `target` within `tol`. Two candidates within `tol`
/// that are themselves further than `tol` apart make the match ambiguous.
enum Match {
    Found(usize),
    None,
    Ambiguous,
}

fn nearest(values: &[Complex64], pool: &[usize], used: &[bool], target: Complex64, tol: f64) -> Match {
    let mut hits: Vec<(f64, usize)> = pool
        .iter()
        .copied()
        .filter(|&j| !used[j])
        .map(|j| ((values[j] - target).norm(), j))
        .filter(|&(d, _)| d <= tol)
        .collect();
    if hits.is_empty() {
        return Match::None;
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let best = hits[0].1;
    if hits[1..]
        .iter()
        .any(|&(_, j)| (values[j] - values[best]).norm() > tol)
    {
        return Match::Ambiguous;
    }
    Match::Found(best)
}

pub fn classify_spectrum(nus: &[Complex64], tol: &Tolerances) -> EntanglementSpectrum {
    let n = nus.len();
    let one = Complex64::new(1.0, 0.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        nus[a]
            .re
            .total_cmp(&nus[b].re)
            .then(nus[a].im.total_cmp(&nus[b].im))
            .then(a.cmp(&b))
    });
    // The scale max(|nu|, |1 - nu|, 1) is the same for nu, nu* and 1 - nu*,
    // so symmetry partners always land on the same side of the cut.
    let is_real = |nu: Complex64| nu.im.abs() < tol.tol_real * nu.norm().max((one - nu).norm()).max(1.0);
    let reals: Vec<usize> = order.iter().copied().filter(|&j| is_real(nus[j])).collect();
    let complexes: Vec<usize> = order.iter().copied().filter(|&j| !is_real(nus[j])).collect();

    let mut used = vec![false; n];
    let mut labels = vec![ModeLabel::Unpaired; n];
    let mut groups = Vec::new();
    let mut emit = |label: ModeLabel, members: Vec<usize>, used: &mut Vec<bool>, labels: &mut Vec<ModeLabel>| {
        for &m in &members {
            used[m] = true;
            labels[m] = label;
        }
        groups.push(ModeGroup { label, members });
    };

    for &j in &reals {
        let nu = nus[j];
        let t = scaled(tol.tol_real, nu);
        if nu.re >= -t && nu.re <= 1.0 + t {
            emit(ModeLabel::RealInRange, vec![j], &mut used, &mut labels);
        }
    }
    // A value accepted as real is paired by its real part; the discarded
    // imaginary noise of two partners can add up past tol_pair.
    let real_parts: Vec<Complex64> = nus.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
    for &j in &reals {
        if used[j] {
            continue;
        }
        let nu = nus[j];
        used[j] = true;
        let found = nearest(&real_parts, &reals, &used, one - nu.re, scaled(tol.tol_pair, nu));
        used[j] = false;
        match found {
            Match::Found(p) => {
                let pair = if nu.re < 0.0 { vec![j, p] } else { vec![p, j] };
                emit(ModeLabel::RealPair, pair, &mut used, &mut labels);
            }
            // Rounding noise can push a value near 0 or 1 just outside the
            // interval while its mirror image stays inside.
            _ if nu.re >= -scaled(tol.tol_edge, nu) && nu.re <= 1.0 + scaled(tol.tol_edge, nu) => {
                emit(ModeLabel::RealInRange, vec![j], &mut used, &mut labels)
            }
            _ => emit(ModeLabel::Unpaired, vec![j], &mut used, &mut labels),
        }
    }

    for &j in &complexes {
        if used[j] {
            continue;
        }
        let nu = nus[j];
        let tp = scaled(tol.tol_pair, nu);
        used[j] = true;
        let find = |target: Complex64, used: &[bool]| nearest(nus, &complexes, used, target, tp);
        if (nu.re - 0.5).abs() < tol.tol_edge * nu.norm().max(1.0) {
            match find(nu.conj(), &used) {
                Match::Found(p) => {
                    let pair = if nu.im > 0.0 { vec![j, p] } else { vec![p, j] };
                    emit(ModeLabel::EdgePair, pair, &mut used, &mut labels);
                }
                Match::None => emit(ModeLabel::ResidualPHPair, vec![j], &mut used, &mut labels),
                Match::Ambiguous => emit(ModeLabel::Unpaired, vec![j], &mut used, &mut labels),
            }
            continue;
        }
        let conj = find(nu.conj(), &used);
        let mut quartet = None;
        if let Match::Found(c) = conj {
            used[c] = true;
            if let Match::Found(p) = find(one - nu, &used) {
                used[p] = true;
                if let Match::Found(q) = find(one - nu.conj(), &used) {
                    quartet = Some((c, p, q));
                }
                used[p] = false;
            }
            used[c] = false;
        }
        if let Some((c, p, q)) = quartet {
            // Canonical order [nu, nu*, 1 - nu, 1 - nu*] with Im nu > 0.
            let members = if nu.im > 0.0 { vec![j, c, p, q] } else { vec![c, j, q, p] };
            emit(ModeLabel::Quartet, members, &mut used, &mut labels);
            continue;
        }
        let conj_present = matches!(conj, Match::Found(_) | Match::Ambiguous);
        match (conj_present, find(one - nu.conj(), &used)) {
            (false, Match::Found(p)) => emit(ModeLabel::ResidualPHPair, vec![j, p], &mut used, &mut labels),
            _ => emit(ModeLabel::Unpaired, vec![j], &mut used, &mut labels),
        }
    }

    EntanglementSpectrum {
        eigenvalues: nus.to_vec(),
        labels,
        groups,
        tolerances: *tol,
    }
}
