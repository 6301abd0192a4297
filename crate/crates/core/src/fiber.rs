//! Signal sets and their fiber decomposition.
//!
//! The fiber of `f` at offset `ω` is the vector `(f̂(ω + k⊙P))_k` of length
//! `Q`. Stacking the fibers of `m` signals column-wise gives the `Q × m`
//! matrix `A(ω)` whose Gram matrix is the fiber Gramian.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fft::Dft;
use crate::grid::GridSpec;
use crate::linalg::{self, CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    grid: GridSpec,
    samples: Vec<Vec<C64>>,
}

impl SignalSet {
    pub fn new(grid: GridSpec, samples: Vec<Vec<C64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal set must contain at least one signal"));
        }
        for s in &samples {
            if s.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    found: s.len(),
                });
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("signal samples"));
            }
        }
        Ok(SignalSet { grid, samples })
    }

    pub fn from_real(grid: GridSpec, samples: Vec<Vec<f64>>) -> Result<Self> {
        let samples = samples
            .into_iter()
            .map(|s| s.into_iter().map(|x| C64::new(x, 0.0)).collect())
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn signal(&self, j: usize) -> &[C64] {
        &self.samples[j]
    }

    pub fn signals(&self) -> &[Vec<C64>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Vec<C64>> {
        self.samples
    }

    /// `Σ_j ‖f_j‖²`
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| linalg::norm_sqr(s)).sum()
    }
}

/// Per-fiber data matrices `A(ω)`, one `Q × m` matrix per fiber index.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSet {
    grid: GridSpec,
    matrices: Vec<CMatrix>,
}

impl FiberSet {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn signal_count(&self) -> usize {
        self.matrices.first().map_or(0, |a| a.cols())
    }

    pub fn matrix(&self, w: usize) -> &CMatrix {
        &self.matrices[w]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `Σ_ω ‖A(ω)‖_F²`
    pub fn energy(&self) -> f64 {
        self.matrices
            .iter()
            .map(|a| linalg::norm_sqr(a.as_slice()))
            .sum()
    }
}

/// Splits a spectrum into its `P` fibers.
pub fn split_spectrum(spectrum: &[C64], grid: &GridSpec) -> Vec<Vec<C64>> {
    (0..grid.fiber_count())
        .map(|w| grid.fiber_indices(w).iter().map(|&i| spectrum[i]).collect())
        .collect()
}

/// Fibers of a single time-domain signal.
pub fn signal_fibers(signal: &[C64], grid: &GridSpec) -> Result<Vec<Vec<C64>>> {
    let spectrum = Dft::new(grid).forward(signal)?;
    Ok(split_spectrum(&spectrum, grid))
}

pub fn fiberize(signals: &SignalSet) -> FiberSet {
    fiberize_with(signals, Execution::default())
}

pub fn fiberize_with(signals: &SignalSet, exec: Execution) -> FiberSet {
    let grid = signals.grid();
    let dft = Dft::new(grid);
    let spectra: Vec<Vec<C64>> = exec.map(signals.count(), |j| {
        dft.forward(signals.signal(j))
            .expect("signal length validated by SignalSet")
    });
    let q = grid.fiber_len();
    let m = signals.count();
    let matrices = exec.map(grid.fiber_count(), |w| {
        let idx = grid.fiber_indices(w);
        CMatrix::from_fn(q, m, |k, j| spectra[j][idx[k]])
    });
    FiberSet {
        grid: grid.clone(),
        matrices,
    }
}

/// Reassembles a time-domain signal from one length-`Q` vector per fiber.
pub fn defiberize(fibers: &[Vec<C64>], grid: &GridSpec) -> Result<Vec<C64>> {
    if fibers.len() != grid.fiber_count() {
        return Err(Error::invalid(format!(
            "expected {} fibers, found {}",
            grid.fiber_count(),
            fibers.len()
        )));
    }
    let q = grid.fiber_len();
    let mut spectrum = vec![C64::new(0.0, 0.0); grid.len()];
    for (w, fiber) in fibers.iter().enumerate() {
        if fiber.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: fiber.len(),
            });
        }
        for (&i, &v) in grid.fiber_indices(w).iter().zip(fiber) {
            spectrum[i] = v;
        }
    }
    Dft::new(grid).inverse(&spectrum)
}
