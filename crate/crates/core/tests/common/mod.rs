//! Brute-force many-body oracle shared by the integration tests.
#![allow(dead_code)]

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use ptchain_core::Complex64;

/// `c_i^dagger c_j |s>` in the occupation basis, Jordan-Wigner ordered by site.
pub fn hop(s: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    if s & (1 << j) == 0 {
        return None;
    }
    let parity = |x: u32, k: usize| if (x & ((1u32 << k) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let mut sign = parity(s, j);
    let t = s & !(1 << j);
    if t & (1 << i) != 0 {
        return None;
    }
    sign *= parity(t, i);
    Some((t | (1 << i), sign))
}

pub struct FockGround {
    pub basis: Vec<u32>,
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

/// Half-filled many-body ground state of `sum_ij h_ij c_i^dagger c_j`, with
/// `<G_L|G_R> = 1`.
pub fn fock_ground_state(h: &Mat<Complex64>) -> FockGround {
    let n = h.nrows();
    let basis: Vec<u32> = (0..1u32 << n).filter(|s| s.count_ones() as usize == n / 2).collect();
    let index = |s: u32| basis.iter().position(|&b| b == s).unwrap();
    let dim = basis.len();
    let mut big = Mat::<Complex64>::zeros(dim, dim);
    for (col, &s) in basis.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                if h[(i, j)] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((t, sign)) = hop(s, i, j) {
                    big[(index(t), col)] += h[(i, j)] * sign;
                }
            }
        }
    }
    let eig = big.eigen().unwrap();
    let values: Vec<Complex64> = (0..dim).map(|k| eig.S().column_vector()[k]).collect();
    let g = (0..dim).min_by(|&a, &b| values[a].re.total_cmp(&values[b].re)).unwrap();
    let u = eig.U().to_owned();
    let inv = u.partial_piv_lu().inverse();
    FockGround {
        basis,
        right: (0..dim).map(|k| u[(k, g)]).collect(),
        // Row g of U^{-1} is <G_L|.
        left: (0..dim).map(|k| inv[(g, k)]).collect(),
    }
}

pub fn fock_correlation(gs: &FockGround, n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (col, &s) in gs.basis.iter().enumerate() {
            if let Some((t, sign)) = hop(s, i, j) {
                let row = gs.basis.iter().position(|&b| b == t).unwrap();
                acc += gs.left[row] * gs.right[col] * sign;
            }
        }
        acc
    })
}

pub fn max_deviation(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    (0..a.nrows())
        .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
        .fold(0.0, f64::max)
}

/// Biorthogonal reduced density matrix `Tr_B |G_R><G_L|` of the sites in
/// `subset`. The sites are moved to the front of the Jordan-Wigner order first,
/// so the trace runs over the high bits without sign strings.
pub fn reduced_density_matrix(h: &Mat<Complex64>, subset: &[usize]) -> Mat<Complex64> {
    let n = h.nrows();
    let mut order: Vec<usize> = subset.to_vec();
    order.extend((0..n).filter(|i| !subset.contains(i)));
    let permuted = Mat::from_fn(n, n, |a, b| h[(order[a], order[b])]);
    let gs = fock_ground_state(&permuted);
    let k = subset.len();
    let low = (1u32 << k) - 1;
    let mut rho = Mat::<Complex64>::zeros(1 << k, 1 << k);
    for (p, &s) in gs.basis.iter().enumerate() {
        for (q, &t) in gs.basis.iter().enumerate() {
            if s >> k == t >> k {
                rho[((s & low) as usize, (t & low) as usize)] += gs.right[p] * gs.left[q];
            }
        }
    }
    rho
}

/// `-sum lambda ln lambda` over the eigenvalues of `rho`, principal logs.
pub fn von_neumann(rho: &Mat<Complex64>) -> Complex64 {
    rho.eigenvalues()
        .unwrap()
        .into_iter()
        .filter(|l| l.norm() > 1e-300)
        .map(|l| -l * l.ln())
        .sum()
}
