//! Small dense complex matrices and vector helpers.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Inner products longer than this use compensated summation.
pub const COMPENSATED_THRESHOLD: usize = 4096;

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(CMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[C64]> {
        (0..self.cols).map(move |c| self.col(c))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for c in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, c)];
                if b == C64::new(0.0, 0.0) {
                    continue;
                }
                let a = self.col(k);
                for (o, &x) in out.col_mut(c).iter_mut().zip(a) {
                    *o += x * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a vector of length `cols`.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (c, &b) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.col(c)) {
                *o += x * b;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sqr(&self.data).sqrt()
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[c * self.rows + r]
    }
}

/// `⟨a, b⟩ = Σ a_k conj(b_k)`, linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() > COMPENSATED_THRESHOLD {
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for (x, y) in a.iter().zip(b) {
            let p = x * y.conj();
            re.add(p.re);
            im.add(p.im);
        }
        C64::new(re.value(), im.value())
    } else {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    }
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    if a.len() > COMPENSATED_THRESHOLD {
        let mut s = NeumaierSum::default();
        for z in a {
            s.add(z.norm_sqr());
        }
        s.value()
    } else {
        a.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Compensated (Kahan–Babuška–Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Removes from `v` its components along the orthonormal vectors in `basis`.
/// Two passes of modified Gram–Schmidt.
pub fn orthogonalize_against(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = inner(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Orthonormal basis for the span of `vectors`, dropping any vector whose
/// residual after orthogonalization is at most `tol`.
pub fn orthonormal_basis<'a>(
    vectors: impl IntoIterator<Item = &'a [C64]>,
    tol: f64,
) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.to_vec();
        orthogonalize_against(&mut w, &basis);
        let nw = norm(&w);
        if nw > tol {
            w.iter_mut().for_each(|z| *z /= nw);
            basis.push(w);
        }
    }
    basis
}

/// Orthogonal projection of `v` onto the span of an orthonormal `basis`.
pub fn project_onto(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for b in basis {
        axpy(inner(v, b), b, &mut out);
    }
    out
}
