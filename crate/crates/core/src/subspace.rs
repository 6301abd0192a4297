//! Best approximating subspace of dimension at most `n` for a finite family
//! of vectors, and the associated Parseval frame.
//!
//! For data `a_1..a_m` with Gram matrix `𝔊_ij = ⟨a_i, a_j⟩`, let
//! `λ_1 ≥ … ≥ λ_m` be its eigenvalues with left eigenvectors `y_i`. The
//! vectors `q_i = λ_i^{-1/2} Σ_j y_ij a_j` (zero where `λ_i` is below the rank
//! threshold) span an optimal subspace and form a Parseval frame for it.
//! The optimal error is the eigenvalue tail `Σ_{i>n} λ_i`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::spectral::{eigh_descending, HermitianMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `q_1..q_n`; entries past the effective rank are zero vectors.
    pub frame_vectors: Vec<Vec<C64>>,
    pub error: f64,
    /// Gram eigenvalues, non-increasing, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Left eigenvectors `y_i` as columns.
    pub left_vectors: CMatrix,
    pub effective_rank: usize,
    pub gap_ok: bool,
}

/// Gram matrix with entries `⟨a_i, a_j⟩`.
pub fn gram(vectors: &CMatrix) -> HermitianMatrix {
    let m = vectors.cols();
    let mut g = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = linalg::inner(vectors.col(i), vectors.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    HermitianMatrix::symmetrized(g)
}

/// Eigenvalues (clamped, non-increasing) and left eigenvectors of a Gram
/// matrix with entries `⟨a_i, a_j⟩`.
pub(crate) fn left_eigensystem(g: &HermitianMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = eigh_descending(g)?;
    let values = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    // y^t G = λ y^t  ⇔  G ȳ = λ ȳ
    let dim = g.dim();
    let left = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, c)].conj());
    Ok((values, left))
}

/// Count of eigenvalues above `rank_tol · λ_1`.
pub fn numerical_rank(eigenvalues: &[f64], rank_tol: f64) -> usize {
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&l| l > rank_tol * top).count()
}

/// `λ_i^{-1/2}` above the rank threshold, else 0.
pub fn sigma_tilde(eigenvalues: &[f64], rank_tol: f64) -> Vec<f64> {
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    eigenvalues
        .iter()
        .map(|&l| {
            if top > 0.0 && l > rank_tol * top {
                1.0 / l.sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

/// `λ_n − λ_{n+1}` with `λ_{m+1} = 0`; infinite for `n = 0`.
pub fn spectral_gap(eigenvalues: &[f64], n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let m = eigenvalues.len();
    let n = n.min(m);
    let next = if n < m { eigenvalues[n] } else { 0.0 };
    eigenvalues[n - 1] - next
}

pub fn gap_is_strict(eigenvalues: &[f64], n: usize, gap_tol: f64) -> bool {
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    spectral_gap(eigenvalues, n) > gap_tol * top.max(1.0)
}

/// `q_i = σ̃_i Σ_j y_ij a_j` for `i < n`.
pub(crate) fn frame_from_eigensystem(
    data: &CMatrix,
    left: &CMatrix,
    sigma_tilde: &[f64],
    n: usize,
) -> Vec<Vec<C64>> {
    (0..n)
        .map(|i| {
            let s = sigma_tilde.get(i).copied().unwrap_or(0.0);
            if s == 0.0 {
                return vec![C64::new(0.0, 0.0); data.rows()];
            }
            let mut q = data.mul_vec(left.col(i));
            q.iter_mut().for_each(|z| *z *= s);
            q
        })
        .collect()
}

/// Optimal subspace of dimension `≤ n` for the columns of `vectors`.
pub fn best_subspace(vectors: &CMatrix, n: usize, tol: &Tolerances) -> Result<FitResult> {
    if vectors.cols() == 0 || vectors.rows() == 0 {
        return Err(Error::invalid("best_subspace needs m >= 1 vectors of dimension >= 1"));
    }
    if !vectors.is_finite() {
        return Err(Error::NonFinite("subspace data"));
    }
    let (eigenvalues, left) = left_eigensystem(&gram(vectors))?;
    let st = sigma_tilde(&eigenvalues, tol.rank);
    let frame_vectors = frame_from_eigensystem(vectors, &left, &st, n);
    let error = eigenvalues.iter().skip(n).sum();
    Ok(FitResult {
        frame_vectors,
        error,
        effective_rank: numerical_rank(&eigenvalues, tol.rank),
        gap_ok: gap_is_strict(&eigenvalues, n, tol.gap),
        eigenvalues,
        left_vectors: left,
    })
}

/// Convenience wrapper taking the vectors as a slice.
pub fn best_subspace_of(vectors: &[Vec<C64>], n: usize, tol: &Tolerances) -> Result<FitResult> {
    let dim = vectors.first().map_or(0, |v| v.len());
    best_subspace(&CMatrix::from_columns(dim, vectors)?, n, tol)
}

/// `Σ_i ‖a_i − P_S a_i‖²` where `S = span{basis}`. Dependent basis vectors
/// (residual below `1e-10` of the largest basis norm) are dropped.
pub fn residual(vectors: &[Vec<C64>], basis: &[Vec<C64>]) -> f64 {
    let scale = basis.iter().map(|b| linalg::norm(b)).fold(0.0, f64::max);
    let ortho = linalg::orthonormal_basis(basis.iter().map(|b| b.as_slice()), 1e-10 * scale);
    vectors
        .iter()
        .map(|a| {
            let mut r = a.clone();
            linalg::orthogonalize_against(&mut r, &ortho);
            linalg::norm_sqr(&r)
        })
        .sum()
}
