//! Hermitian eigensolvers and matrix functions.
//!
//! Eigendecompositions are delegated to `nalgebra`; everything here works on
//! `ndarray` matrices so callers never touch the nalgebra types.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64 as C64;

fn to_nalgebra(m: &Array2<C64>) -> DMatrix<C64> {
    let (r, c) = m.dim();
    DMatrix::from_fn(r, c, |i, j| m[[i, j]])
}

fn from_nalgebra(m: &DMatrix<C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(m: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Array2::zeros((0, 0)));
    }
    // symmetrize so round-off asymmetry does not leak into the solver
    let sym = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (m[[i, j]] + m[[j, i]].conj()));
    let eig = SymmetricEigen::new(to_nalgebra(&sym));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = from_nalgebra(&eig.eigenvectors);
    let sorted = Array2::from_shape_fn((n, n), |(i, j)| vecs[[i, order[j]]]);
    (values, sorted)
}

/// Connected components of the nonzero pattern of a square matrix.
pub(crate) fn components(m: &Array2<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let zero = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if m[[i, j]] != zero || m[[j, i]] != zero {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// All eigenvalues of a Hermitian matrix, solving each connected block of
/// its nonzero pattern separately. Exact for block-diagonal structure and
/// much cheaper for the sector-structured states the propagator produces.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows());
    for block in components(m) {
        if block.len() == 1 {
            out.push(m[[block[0], block[0]]].re);
            continue;
        }
        let sub = Array2::from_shape_fn((block.len(), block.len()), |(a, b)| m[[block[a], block[b]]]);
        out.extend(eigh(&sub).0);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// exp(−i H t) for Hermitian H.
pub fn unitary_from_hamiltonian(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, -vals[j] * t);
        for i in 0..n {
            scaled[[i, j]] *= phase;
        }
    }
    scaled.dot(&vecs.t().mapv(|z| z.conj()))
}

/// exp(K) for anti-Hermitian K.
pub fn expm_anti_hermitian(k: &Array2<C64>) -> Array2<C64> {
    // K = −iH with H = iK Hermitian
    let h = k.mapv(|z| z * C64::new(0.0, 1.0));
    unitary_from_hamiltonian(&h, 1.0)
}

/// Von Neumann entropy (natural log) from a spectrum; eigenvalues below
/// 1e−15 are treated as zero.
pub fn entropy_from_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}
