//! Least-squares fitting of finitely generated shift-invariant spaces to
//! sampled signals on periodic grids.
//!
//! Given signals `f_1..f_m`, [`model::synthesize`] returns `n` generators whose
//! lattice translates span the shift-invariant space minimizing
//! `Σ_j ‖f_j − P_V f_j‖²` and form a Parseval frame for it. The work is done
//! independently on each Fourier fiber, where the problem reduces to a small
//! best-subspace problem solved through the fiber Gramian's eigenvectors.
//!
//! Layers, bottom up:
//! - [`spectral`]: Hermitian eigendecomposition (Jacobi) and SVD.
//! - [`fft`], [`grid`], [`fiber`]: unitary DFT and fiber maps.
//! - [`subspace`]: finite-dimensional optimal subspaces and Parseval frames.
//! - [`model`]: per-fiber assembly, projection, diagnostics, error curves.
//! - [`io`]: text formats for signals, weights and models.
//!
//! Per-fiber work runs on rayon when the `parallel` feature (default) is
//! enabled; see [`Execution`].

pub mod error;
pub mod exec;
pub mod fft;
pub mod fiber;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod subspace;
pub mod tolerance;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fiber::{defiberize, fiberize, FiberSet, SignalSet};
pub use grid::GridSpec;
pub use linalg::{CMatrix, C64};
pub use model::{
    apply_weights, direct_error, error_curve, error_formula, gramian, spectral_profile,
    synthesize, synthesize_weighted, synthesize_with, uniqueness_check, ApproximationReport,
    ErrorCurve, FiberGramian, FrameBounds, GeneratorSystem, SisModel, SpectralProfile,
    UniquenessReport, WeightVector,
};
pub use spectral::{eigh_descending, svd, EigenDecomposition, HermitianMatrix, SvdResult};
pub use subspace::{best_subspace, residual, FitResult};
pub use tolerance::Tolerances;
