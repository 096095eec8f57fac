//! Minimal CSR matrices for the propagator.

use ndarray::Array2;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, Default)]
pub(crate) struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<C64>,
}

impl Csr {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &Array2<C64>) -> Self {
        let zero = C64::new(0.0, 0.0);
        let rows = m
            .outer_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != zero)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(m.ncols(), rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect())
    }

    pub fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[s..e].iter().copied().zip(self.values[s..e].iter().copied())
    }

    pub fn kron(&self, other: &Csr) -> Self {
        let mut rows = Vec::with_capacity(self.nrows() * other.nrows());
        for i in 0..self.nrows() {
            for k in 0..other.nrows() {
                let mut row = Vec::new();
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        row.push((j * other.n + l, a * b));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(self.n * other.n, rows)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.nrows() {
            for (j, v) in self.row(i) {
                rows[j].push((i, v.conj()));
            }
        }
        Self::from_rows(self.nrows(), rows)
    }

    /// Same pattern, unconjugated.
    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.nrows() {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Self::from_rows(self.nrows(), rows)
    }

    pub fn matmul(&self, rhs: &Csr) -> Self {
        let rows = (0..self.nrows())
            .map(|i| {
                let mut row = Vec::new();
                for (k, a) in self.row(i) {
                    for (j, b) in rhs.row(k) {
                        row.push((j, a * b));
                    }
                }
                row
            })
            .collect();
        Self::from_rows(rhs.n, rows)
    }

    pub fn add(&self, rhs: &Csr) -> Self {
        let rows = (0..self.nrows())
            .map(|i| self.row(i).chain(rhs.row(i)).collect())
            .collect();
        Self::from_rows(self.n, rows)
    }

    /// y = A x
    #[cfg(test)]
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    #[cfg(test)]
    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.nrows(), self.n));
        for i in 0..self.nrows() {
            for (j, v) in self.row(i) {
                m[[i, j]] += v;
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn round_trips_and_products() {
        let a = Array2::from_shape_vec((2, 2), vec![c(1.0), C64::new(0.0, 2.0), c(0.0), c(3.0)]).unwrap();
        let b = Array2::from_shape_vec((2, 2), vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        let sa = Csr::from_dense(&a);
        let sb = Csr::from_dense(&b);
        assert_eq!(sa.to_dense(), a);
        assert_eq!(sa.matmul(&sb).to_dense(), a.dot(&b));
        assert_eq!(sa.adjoint().to_dense(), a.t().mapv(|z| z.conj()));
        let k = sa.kron(&sb).to_dense();
        assert_eq!(k[[0, 3]], C64::new(0.0, 2.0));
        assert_eq!(k[[1, 0]], c(1.0));
        let mut y = vec![c(0.0); 2];
        sa.mul_vec_into(&[c(1.0), c(1.0)], &mut y);
        assert_eq!(y, vec![C64::new(1.0, 2.0), c(3.0)]);
    }
}
