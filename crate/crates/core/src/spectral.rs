//! Hermitian eigendecomposition and SVD for small dense complex matrices.
//!
//! The eigensolver is a cyclic complex Jacobi iteration. Its output is made
//! deterministic per input: eigenvalues are sorted in descending order,
//! eigenvectors inside a (numerically) degenerate eigenspace are replaced by
//! the Gram–Schmidt image of the canonical basis vectors taken in index order,
//! and every eigenvector is rotated so that its largest-modulus entry is real
//! and non-negative.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Default relative rank tolerance for singular values / eigenvalues.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;
/// Residual threshold when picking canonical basis vectors for a degenerate
/// block or a completion. Any value below `1/sqrt(dim)` always succeeds.
const PICK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates Hermitian symmetry within a relative tolerance of `1e-12`
    /// (against the largest entry modulus) and then symmetrizes exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(Error::invalid("hermitian matrix must have dim >= 1"));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("hermitian matrix"));
        }
        let scale = m.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dim = m.rows();
        for i in 0..dim {
            for j in i..dim {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::invalid(format!(
                        "matrix is not hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation. The caller guarantees the input is
    /// Hermitian up to rounding.
    pub(crate) fn symmetrized(mut m: CMatrix) -> Self {
        let dim = m.rows();
        for i in 0..dim {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..dim {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        HermitianMatrix(m)
    }

    /// Gram matrix `A* A` of the columns of `a`: entry `(i, j)` is `⟨a_j, a_i⟩`.
    pub fn gram_of_columns(a: &CMatrix) -> Self {
        let m = a.cols();
        let mut g = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = linalg::inner(a.col(j), a.col(i));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
            g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
        }
        HermitianMatrix(g)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let dim = v.rows();
        CMatrix::from_fn(dim, dim, |r, c| {
            (0..dim)
                .map(|k| v[(r, k)] * self.eigenvalues[k] * v[(c, k)].conj())
                .sum()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// One value per column of the input, non-increasing.
    pub singular_values: Vec<f64>,
    /// `N × min(N, m)`, orthonormal columns.
    pub left_vectors: CMatrix,
    /// `m × m`, orthonormal columns.
    pub right_vectors: CMatrix,
    pub rank: usize,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMatrix {
        let u = &self.left_vectors;
        let y = &self.right_vectors;
        let k = u.cols();
        CMatrix::from_fn(u.rows(), y.rows(), |r, c| {
            (0..k)
                .map(|i| u[(r, i)] * self.singular_values[i] * y[(c, i)].conj())
                .sum()
        })
    }
}

/// Eigendecomposition with descending eigenvalues and canonical eigenvectors.
pub fn eigh_descending(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let dim = h.dim();
    let mut a = h.matrix().clone();
    if !a.is_finite() {
        return Err(Error::NonFinite("hermitian matrix"));
    }
    let mut v = CMatrix::identity(dim);
    let total = a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= JACOBI_TOL * total {
            break;
        }
        if sweeps == MAX_SWEEPS {
            // Rounding can keep the off-diagonal mass a few ulps above the
            // target for larger dims; anything near machine precision is fine.
            if off <= f64::EPSILON.sqrt() * total {
                break;
            }
            return Err(Error::NoConvergence {
                sweeps,
                residual: off / total,
            });
        }
        for p in 0..dim {
            for q in p + 1..dim {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors: Vec<Vec<C64>> = order.iter().map(|&i| v.col(i).to_vec()).collect();

    let scale = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    for l in eigenvalues.iter_mut() {
        if *l < 0.0 && *l >= -CLAMP_TOL * scale {
            *l = 0.0;
        }
    }

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (eigenvalues[end - 1] - eigenvalues[end]).abs() <= DEGENERACY_TOL * scale
        {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_block(&mut vectors[start..end], dim);
        }
        start = end;
    }
    for vec in vectors.iter_mut() {
        canonical_phase(vec);
    }

    let eigenvectors = CMatrix::from_columns(dim, &vectors)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for c in 0..n {
        for r in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing `a[(p, q)]`; accumulates into `v`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let beta = b.norm();
    if beta == 0.0 {
        return;
    }
    let phase = b / beta;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let pc = phase.conj();
    let j00 = C64::new(c, 0.0);
    let j01 = C64::new(s, 0.0);
    let j10 = pc * -s;
    let j11 = pc * c;

    let n = a.rows();
    for k in 0..n {
        let hp = a[(k, p)];
        let hq = a[(k, q)];
        a[(k, p)] = hp * j00 + hq * j10;
        a[(k, q)] = hp * j01 + hq * j11;
    }
    for k in 0..n {
        let hp = a[(p, k)];
        let hq = a[(q, k)];
        a[(p, k)] = j00.conj() * hp + j10.conj() * hq;
        a[(q, k)] = j01.conj() * hp + j11.conj() * hq;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..v.rows() {
        let vp = v[(k, p)];
        let vq = v[(k, q)];
        v[(k, p)] = vp * j00 + vq * j10;
        v[(k, q)] = vp * j01 + vq * j11;
    }
}

/// Replace an orthonormal basis of a degenerate eigenspace by the
/// Gram–Schmidt image of `e_0, e_1, ...` projected into that space.
fn canonicalize_block(block: &mut [Vec<C64>], dim: usize) {
    let k = block.len();
    let span: Vec<Vec<C64>> = block.to_vec();
    let mut picked: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..dim {
        if picked.len() == k {
            break;
        }
        // P e_j = Σ_b conj(b_j) b
        let mut w = vec![C64::new(0.0, 0.0); dim];
        for b in &span {
            linalg::axpy(b[j].conj(), b, &mut w);
        }
        linalg::orthogonalize_against(&mut w, &picked);
        let nw = linalg::norm(&w);
        if nw > PICK_TOL {
            w.iter_mut().for_each(|z| *z /= nw);
            picked.push(w);
        }
    }
    debug_assert_eq!(picked.len(), k);
    if picked.len() == k {
        block.clone_from_slice(&picked);
    }
}

/// Rotate so the entry of largest modulus (lowest index on ties) is real and ≥ 0.
fn canonical_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mod = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mod * (1.0 + 1e-12) {
            best = i;
            best_mod = m;
        }
    }
    if best_mod <= 0.0 {
        return;
    }
    let rot = v[best].conj() / best_mod;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = C64::new(v[best].re, 0.0);
}

pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    svd_with_tol(a, DEFAULT_RANK_TOL)
}

/// SVD through the eigendecomposition of `A* A`: right vectors are its
/// eigenvectors, `σ_k = ‖A y_k‖`, and `u_k = A y_k / σ_k` above the rank
/// threshold `tol · max(σ_1, 1)`. Remaining left vectors complete an
/// orthonormal set orthogonal to the numerical column span.
pub fn svd_with_tol(a: &CMatrix, tol: f64) -> Result<SvdResult> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("svd needs a non-empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    let eig = eigh_descending(&HermitianMatrix::gram_of_columns(a))?;

    let mut triplets: Vec<(f64, Vec<C64>, Vec<C64>)> = eig
        .eigenvectors
        .columns()
        .map(|y| {
            let ay = a.mul_vec(y);
            (linalg::norm(&ay), ay, y.to_vec())
        })
        .collect();
    // Stable: only reorders where rounding broke the eigenvalue order.
    triplets.sort_by(|x, y| y.0.total_cmp(&x.0));

    let sigma_max = triplets[0].0;
    let threshold = tol * sigma_max.max(1.0);
    let rank = triplets.iter().take_while(|t| t.0 > threshold).count();
    let kept = rows.min(cols);

    let mut left: Vec<Vec<C64>> = Vec::with_capacity(kept);
    for (sigma, ay, _) in triplets.iter().take(rank) {
        let mut u: Vec<C64> = ay.iter().map(|z| z / sigma).collect();
        linalg::orthogonalize_against(&mut u, &left);
        let nu = linalg::norm(&u);
        u.iter_mut().for_each(|z| *z /= nu);
        left.push(u);
    }
    for j in 0..rows {
        if left.len() == kept {
            break;
        }
        let mut e = vec![C64::new(0.0, 0.0); rows];
        e[j] = C64::new(1.0, 0.0);
        linalg::orthogonalize_against(&mut e, &left);
        let ne = linalg::norm(&e);
        if ne > PICK_TOL {
            e.iter_mut().for_each(|z| *z /= ne);
            left.push(e);
        }
    }

    let singular_values = triplets.iter().map(|t| t.0).collect();
    let right: Vec<Vec<C64>> = triplets.into_iter().map(|t| t.2).collect();
    Ok(SvdResult {
        singular_values,
        left_vectors: CMatrix::from_columns(rows, &left)?,
        right_vectors: CMatrix::from_columns(cols, &right)?,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_fn(rows, cols, |r, c| C64::new(v[r * cols + c], 0.0))
    }

    #[test]
    fn diagonal_is_sorted_with_permuted_basis() {
        let h = HermitianMatrix::new(real(2, 2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        let e = eigh_descending(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvectors, real(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn identity_tie_break_gives_identity() {
        let h = HermitianMatrix::new(CMatrix::identity(2)).unwrap();
        let e = eigh_descending(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        assert_eq!(e.eigenvectors, CMatrix::identity(2));
    }

    #[test]
    fn degenerate_block_is_basis_independent() {
        // Same matrix written in two rotated bases of the degenerate space:
        // the canonical output must coincide.
        let h1 = HermitianMatrix::new(real(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0]))
            .unwrap();
        let e1 = eigh_descending(&h1).unwrap();
        let (c, s) = (0.6_f64, 0.8_f64);
        let q = real(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let h2m = q.matmul(h1.matrix()).unwrap().matmul(&q.adjoint()).unwrap();
        let e2 = eigh_descending(&HermitianMatrix::new(h2m).unwrap()).unwrap();
        assert!(e1.eigenvectors.sub(&e2.eigenvectors).frobenius_norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        assert!(HermitianMatrix::new(real(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
        assert!(matches!(
            HermitianMatrix::new(real(1, 1, &[f64::NAN])),
            Err(Error::NonFinite(_))
        ));
        assert!(svd(&real(1, 2, &[1.0, f64::INFINITY])).is_err());
    }

    #[test]
    fn phase_rule_holds() {
        let m = CMatrix::from_fn(3, 3, |r, c| {
            if r == c {
                C64::new(r as f64, 0.0)
            } else if r < c {
                C64::new(0.3, 0.7 * (c - r) as f64)
            } else {
                C64::new(0.3, -0.7 * (r - c) as f64)
            }
        });
        let e = eigh_descending(&HermitianMatrix::new(m).unwrap()).unwrap();
        for v in e.eigenvectors.columns() {
            let (idx, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
            assert_eq!(v[idx].im, 0.0);
            assert!(v[idx].re > 0.0);
        }
    }

    #[test]
    fn svd_of_diagonal() {
        let s = svd(&real(2, 2, &[2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.singular_values, vec![2.0, 0.0]);
        assert_eq!(s.rank, 1);
    }

    #[test]
    fn svd_identical_columns_have_rank_one() {
        let inv = 1.0 / 2f64.sqrt();
        let a = real(2, 2, &[inv, inv, inv, inv]);
        let s = svd(&a).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.singular_values[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(s.reconstruct().sub(&a).frobenius_norm() < 1e-14);
        // completion is orthogonal to the column span
        let u = &s.left_vectors;
        assert!(linalg::inner(u.col(1), a.col(0)).norm() < 1e-14);
    }

    #[test]
    fn svd_wide_matrix() {
        let a = CMatrix::from_fn(2, 4, |r, c| C64::new((r + 2 * c) as f64, (r * c) as f64 - 1.0));
        let s = svd(&a).unwrap();
        assert_eq!(s.left_vectors.cols(), 2);
        assert_eq!(s.rank, 2);
        assert!(s.reconstruct().sub(&a).frobenius_norm() < 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn zero_matrix() {
        let e = eigh_descending(&HermitianMatrix::new(CMatrix::zeros(3, 3)).unwrap()).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
        assert_eq!(e.eigenvectors, CMatrix::identity(3));
        let s = svd(&CMatrix::zeros(3, 2)).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.left_vectors.cols(), 2);
    }
}
