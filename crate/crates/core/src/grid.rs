//! Periodic sample grids and the shift lattice acting on them.
//!
//! A grid has per-axis sizes `N_j` and per-axis phase counts `P_j | N_j`.
//! The lattice shifts by `Q_j = N_j / P_j` samples along axis `j`, so there
//! are `P = Π P_j` distinct translates. Multi-indices are flattened
//! row-major with axis 0 slowest.

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone)]
pub struct GridSpec {
    axes: Vec<usize>,
    phases: Vec<usize>,
    /// `fiber_map[w * Q + k]` = flat spectral index of `ω + k ⊙ P`.
    fiber_map: Vec<usize>,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes && self.phases == other.phases
    }
}

impl Eq for GridSpec {}

impl GridSpec {
    pub fn new(axes: Vec<usize>, phases: Vec<usize>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("grid needs at least one axis"));
        }
        if axes.len() != phases.len() {
            return Err(Error::invalid(format!(
                "{} axis sizes but {} phase counts",
                axes.len(),
                phases.len()
            )));
        }
        for (j, (&n, &p)) in axes.iter().zip(&phases).enumerate() {
            if n == 0 || p == 0 {
                return Err(Error::invalid(format!("axis {j}: sizes must be positive")));
            }
            if n % p != 0 {
                return Err(Error::invalid(format!(
                    "axis {j}: phase count {p} does not divide axis size {n}"
                )));
            }
        }
        let mut grid = GridSpec {
            axes,
            phases,
            fiber_map: Vec::new(),
        };
        grid.fiber_map = grid.build_fiber_map();
        Ok(grid)
    }

    /// One-dimensional grid of `n` samples with `p` lattice phases.
    pub fn line(n: usize, p: usize) -> Result<Self> {
        Self::new(vec![n], vec![p])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn phases(&self) -> &[usize] {
        &self.phases
    }

    pub fn periods(&self) -> Vec<usize> {
        self.axes.iter().zip(&self.phases).map(|(n, p)| n / p).collect()
    }

    /// Total sample count `N`.
    pub fn len(&self) -> usize {
        self.axes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of fibers (and of lattice translates) `P`.
    pub fn fiber_count(&self) -> usize {
        self.phases.iter().product()
    }

    /// Fiber length `Q`.
    pub fn fiber_len(&self) -> usize {
        self.len() / self.fiber_count()
    }

    #[cfg(test)]
    pub(crate) fn fiber_map(&self) -> &[usize] {
        &self.fiber_map
    }

    /// Flat spectral indices making up fiber `w`, in row-major order of `k`.
    pub fn fiber_indices(&self, w: usize) -> &[usize] {
        let q = self.fiber_len();
        &self.fiber_map[w * q..(w + 1) * q]
    }

    fn build_fiber_map(&self) -> Vec<usize> {
        let periods = self.periods();
        let p_total = self.fiber_count();
        let q_total = self.fiber_len();
        let mut map = Vec::with_capacity(self.len());
        for w in 0..p_total {
            let omega = unflatten(w, &self.phases);
            for k in 0..q_total {
                let kk = unflatten(k, &periods);
                let xi: Vec<usize> = omega
                    .iter()
                    .zip(&kk)
                    .zip(&self.phases)
                    .map(|((o, k), p)| o + k * p)
                    .collect();
                map.push(flatten(&xi, &self.axes));
            }
        }
        map
    }

    /// Multi-index of the lattice translate with flat index `s` (row-major over `P_j`).
    pub fn lattice_shift(&self, s: usize) -> Vec<usize> {
        unflatten(s, &self.phases)
    }

    /// `T_s f(x) = f(x − s ⊙ Q)` with periodic wrap-around.
    pub fn translate(&self, signal: &[C64], shift: &[usize]) -> Vec<C64> {
        debug_assert_eq!(signal.len(), self.len());
        let periods = self.periods();
        let offset: Vec<usize> = shift
            .iter()
            .zip(&periods)
            .zip(&self.axes)
            .map(|((s, q), n)| (s * q) % n)
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); signal.len()];
        for (x, &v) in signal.iter().enumerate() {
            let idx = unflatten(x, &self.axes);
            let moved: Vec<usize> = idx
                .iter()
                .zip(&offset)
                .zip(&self.axes)
                .map(|((i, o), n)| (i + o) % n)
                .collect();
            out[flatten(&moved, &self.axes)] = v;
        }
        out
    }
}

pub(crate) fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for j in (0..shape.len()).rev() {
        idx[j] = flat % shape[j];
        flat /= shape[j];
    }
    idx
}

pub(crate) fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (i, n)| acc * n + i)
}
