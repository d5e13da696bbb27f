//! Minimal CSR storage for the assembled forms.

use num_complex::Complex64;

/// Compressed sparse row matrix over `T`, square.
#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Copy + std::ops::AddAssign + Default + PartialEq> Csr<T> {
    /// Build from triplets, summing duplicates. Deterministic for a fixed
    /// triplet order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry (i, j) if stored.
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        let cols = &self.col_idx[lo..hi];
        cols.binary_search(&j).ok().map(|k| self.vals[lo + k])
    }
}

impl Csr<Complex64> {
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// max |A[i][j] − conj(A[j][i])| over stored entries (a missing partner
    /// counts with full magnitude).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let partner = self.get(j, i).unwrap_or(Complex64::new(0.0, 0.0));
                worst = worst.max((self.vals[k] - partner.conj()).norm());
            }
        }
        worst
    }
}

impl Csr<f64> {
    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[k]] * self.vals[k];
            }
            y[i] = acc;
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let partner = self.get(j, i).unwrap_or(0.0);
                worst = worst.max((self.vals[k] - partner).abs());
            }
        }
        worst
    }

    /// Diagonal entries; 0 where absent.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.get(i, i).unwrap_or(0.0))
            .collect()
    }
}
