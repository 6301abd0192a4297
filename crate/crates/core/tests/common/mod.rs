#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sisfit::fiber::signal_fibers;
use sisfit::{CMatrix, GeneratorSystem, GridSpec, SignalSet, C64};

pub type NaMatrix = DMatrix<C64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut impl Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| cnormal(rng)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cnormal(rng))
}

pub fn random_signals(rng: &mut impl Rng, grid: &GridSpec, m: usize) -> SignalSet {
    let n = grid.len();
    SignalSet::new(grid.clone(), (0..m).map(|_| random_vec(rng, n)).collect()).unwrap()
}

pub fn random_real_signals(rng: &mut impl Rng, grid: &GridSpec, m: usize) -> SignalSet {
    let n = grid.len();
    SignalSet::from_real(
        grid.clone(),
        (0..m)
            .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn to_na(m: &CMatrix) -> NaMatrix {
    NaMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

pub fn sub_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Orthogonal projector `U U*` onto the span of the given columns, built with
/// nalgebra's SVD and a relative cut.
pub fn projector_of_columns(cols: &[Vec<C64>], dim: usize) -> NaMatrix {
    if cols.is_empty() {
        return NaMatrix::zeros(dim, dim);
    }
    let a = NaMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    let svd = a.svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut p = NaMatrix::zeros(dim, dim);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e-8 * smax {
            let col = u.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// Per-fiber projector onto the model's fiber space, from its generator fibers.
pub fn model_fiber_projector(system: &GeneratorSystem, w: usize) -> NaMatrix {
    let f = system.fiber(w);
    let cols: Vec<Vec<C64>> = f.columns().map(|c| c.to_vec()).collect();
    projector_of_columns(&cols, f.rows())
}

/// Fibers of the data computed independently: naive DFT, then explicit
/// coset gathering from the grid's per-axis description.
pub fn oracle_fiber_matrix(signals: &SignalSet, w: usize) -> NaMatrix {
    let grid = signals.grid();
    let spectra: Vec<Vec<C64>> = signals
        .signals()
        .iter()
        .map(|s| sisfit::fft::naive_dft(s, grid).unwrap())
        .collect();
    let idx = oracle_fiber_indices(grid, w);
    NaMatrix::from_fn(idx.len(), signals.count(), |k, j| spectra[j][idx[k]])
}

/// `ω + k ⊙ P` flattened, enumerated without the library's fiber map.
pub fn oracle_fiber_indices(grid: &GridSpec, w: usize) -> Vec<usize> {
    let axes = grid.axes();
    let phases = grid.phases();
    let d = axes.len();
    let mut omega = vec![0; d];
    let mut rem = w;
    for j in (0..d).rev() {
        omega[j] = rem % phases[j];
        rem /= phases[j];
    }
    let periods: Vec<usize> = axes.iter().zip(phases).map(|(n, p)| n / p).collect();
    let q: usize = periods.iter().product();
    (0..q)
        .map(|k| {
            let mut kk = vec![0; d];
            let mut rem = k;
            for j in (0..d).rev() {
                kk[j] = rem % periods[j];
                rem /= periods[j];
            }
            let mut flat = 0;
            for j in 0..d {
                flat = flat * axes[j] + omega[j] + kk[j] * phases[j];
            }
            flat
        })
        .collect()
}

/// `Σ_{s,i} |⟨f, T_s φ_i⟩|²` by explicit time-domain translation.
pub fn direct_frame_sum(grid: &GridSpec, generators: &[Vec<C64>], f: &[C64]) -> f64 {
    let mut total = 0.0;
    for s in 0..grid.fiber_count() {
        let shift = grid.lattice_shift(s);
        for g in generators {
            let t = grid.translate(g, &shift);
            total += dot(f, &t).norm_sqr();
        }
    }
    total
}

/// Signals whose per-fiber data matrix is `U_ω diag(√λ) V_ω*` with random
/// isometries, so every fiber Gramian has eigenvalues exactly `λ`.
pub fn signals_with_spectrum(rng: &mut impl Rng, grid: &GridSpec, lambdas: &[f64]) -> SignalSet {
    let m = lambdas.len();
    let q = grid.fiber_len();
    assert!(q >= m);
    let mut spectra = vec![vec![C64::new(0.0, 0.0); grid.len()]; m];
    for w in 0..grid.fiber_count() {
        let u = to_na(&random_matrix(rng, q, m)).qr().q();
        let v = to_na(&random_matrix(rng, m, m)).qr().q();
        let d = NaMatrix::from_fn(m, m, |r, c| {
            if r == c {
                C64::new(lambdas[r].sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let a = &u * d * v.adjoint();
        for (k, &idx) in oracle_fiber_indices(grid, w).iter().enumerate() {
            for j in 0..m {
                spectra[j][idx] = a[(k, j)];
            }
        }
    }
    let samples = spectra
        .iter()
        .map(|s| sisfit::fft::inverse_dft(s, grid).unwrap())
        .collect();
    SignalSet::new(grid.clone(), samples).unwrap()
}

pub fn fibers_of(f: &[C64], grid: &GridSpec) -> Vec<Vec<C64>> {
    signal_fibers(f, grid).unwrap()
}
