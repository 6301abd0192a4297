//! Optimal shift-invariant models built fiber by fiber.
//!
//! For each fiber index `ω` the data fibers `A(ω)` are reduced to a
//! finite-dimensional best-subspace problem. The per-fiber Parseval frame
//! vectors are scaled by `P^{-1/2}` and reassembled into time-domain
//! generators `φ_1..φ_n`; their `P` lattice translates form a Parseval frame
//! of the optimal space `V`, and `E(F, n) = Σ_ω Σ_{i>n} λ_i(ω)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fiber::{defiberize, fiberize_with, signal_fibers, FiberSet, SignalSet};
use crate::grid::GridSpec;
use crate::linalg::{self, CMatrix, C64};
use crate::spectral::HermitianMatrix;
use crate::subspace::{self, frame_from_eigensystem};
use crate::tolerance::Tolerances;

/// Per-fiber Gramians `G(ω)_ij = ⟨Γ_ω f̂_i, Γ_ω f̂_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberGramian {
    grid: GridSpec,
    matrices: Vec<HermitianMatrix>,
}

impl FiberGramian {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self, w: usize) -> &HermitianMatrix {
        &self.matrices[w]
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn total_trace(&self) -> f64 {
        self.matrices.iter().map(|g| g.trace()).sum()
    }
}

pub fn gramian(fibers: &FiberSet) -> FiberGramian {
    gramian_with(fibers, Execution::default())
}

pub fn gramian_with(fibers: &FiberSet, exec: Execution) -> FiberGramian {
    let matrices = exec.map(fibers.grid().fiber_count(), |w| {
        subspace::gram(fibers.matrix(w))
    });
    FiberGramian {
        grid: fibers.grid().clone(),
        matrices,
    }
}

/// Per-fiber eigenvalues, left eigenvectors and ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    grid: GridSpec,
    eigenvalues: Vec<Vec<f64>>,
    left_vectors: Vec<CMatrix>,
    ranks: Vec<usize>,
}

impl SpectralProfile {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn signal_count(&self) -> usize {
        self.eigenvalues.first().map_or(0, |v| v.len())
    }

    pub fn fiber_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `λ_1(ω) ≥ … ≥ λ_m(ω)`
    pub fn eigenvalues(&self, w: usize) -> &[f64] {
        &self.eigenvalues[w]
    }

    /// Left eigenvector `y_i(ω)` is column `i`.
    pub fn left_vectors(&self, w: usize) -> &CMatrix {
        &self.left_vectors[w]
    }

    pub fn rank(&self, w: usize) -> usize {
        self.ranks[w]
    }

    pub fn r_min(&self) -> usize {
        self.ranks.iter().copied().min().unwrap_or(0)
    }

    pub fn r_max(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().flatten().sum()
    }
}

pub fn spectral_profile(g: &FiberGramian, tol: &Tolerances) -> Result<SpectralProfile> {
    spectral_profile_with(g, tol, Execution::default())
}

pub fn spectral_profile_with(
    g: &FiberGramian,
    tol: &Tolerances,
    exec: Execution,
) -> Result<SpectralProfile> {
    let systems = exec.try_map(g.matrices.len(), |w| {
        subspace::left_eigensystem(&g.matrices[w])
    })?;
    let mut eigenvalues = Vec::with_capacity(systems.len());
    let mut left_vectors = Vec::with_capacity(systems.len());
    let mut ranks = Vec::with_capacity(systems.len());
    for (values, left) in systems {
        ranks.push(subspace::numerical_rank(&values, tol.rank));
        eigenvalues.push(values);
        left_vectors.push(left);
    }
    Ok(SpectralProfile {
        grid: g.grid.clone(),
        eigenvalues,
        left_vectors,
        ranks,
    })
}

/// `E(F, n) = Σ_ω Σ_{i>n} λ_i(ω)`.
pub fn error_formula(profile: &SpectralProfile, n: usize) -> Result<f64> {
    let m = profile.signal_count();
    if n > m {
        return Err(Error::invalid(format!("n = {n} exceeds signal count {m}")));
    }
    Ok(profile
        .eigenvalues
        .iter()
        .map(|l| l[n..].iter().sum::<f64>())
        .sum())
}

/// `E(F, n)` for `n = 0..=m`.
pub fn error_curve_from(profile: &SpectralProfile) -> Vec<f64> {
    let m = profile.signal_count();
    let mut curve = vec![0.0; m + 1];
    for l in &profile.eigenvalues {
        // tail sums, accumulated from the end so each entry is exact per fiber
        let mut tail = 0.0;
        for n in (0..m).rev() {
            tail += l[n];
            curve[n] += tail;
        }
    }
    curve
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub unique: bool,
    /// `min_ω λ_n(ω) − λ_{n+1}(ω)`.
    pub min_gap: f64,
    pub r_min: usize,
}

pub fn uniqueness_check(
    profile: &SpectralProfile,
    n: usize,
    tol: &Tolerances,
) -> Result<UniquenessReport> {
    let m = profile.signal_count();
    if n == 0 || n > m {
        return Err(Error::invalid(format!("uniqueness needs 1 <= n <= {m}, got {n}")));
    }
    let unique = profile
        .eigenvalues
        .iter()
        .all(|l| subspace::gap_is_strict(l, n, tol.gap));
    let min_gap = profile
        .eigenvalues
        .iter()
        .map(|l| subspace::spectral_gap(l, n))
        .fold(f64::INFINITY, f64::min);
    let r_min = profile.r_min();
    debug_assert!(!unique || n <= r_min);
    Ok(UniquenessReport {
        unique,
        min_gap,
        r_min,
    })
}

/// Positive per-signal weights for the weighted objective `Σ w_i ‖f_i − P f_i‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::invalid(format!(
                "weight {} must be positive and finite, got {w}",
                i + 1
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Scales `f_i` by `√w_i`, turning the weighted objective into the unweighted one.
pub fn apply_weights(signals: &SignalSet, weights: &WeightVector) -> Result<SignalSet> {
    if weights.0.len() != signals.count() {
        return Err(Error::DimensionMismatch {
            expected: signals.count(),
            found: weights.0.len(),
        });
    }
    let scaled = signals
        .signals()
        .iter()
        .zip(&weights.0)
        .map(|(s, w)| {
            let r = w.sqrt();
            s.iter().map(|z| z * r).collect()
        })
        .collect();
    SignalSet::new(signals.grid().clone(), scaled)
}

/// Lattice translates of a finite generator family, held in both time and
/// fiber form.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSystem {
    grid: GridSpec,
    generators: Vec<Vec<C64>>,
    /// `Q × n` per fiber; column `i` is `Γ_ω φ̂_i`.
    fibers: Vec<CMatrix>,
    /// Orthonormal basis of each fiber space `V_ω`.
    bases: Vec<Vec<Vec<C64>>>,
}

impl GeneratorSystem {
    /// Builds a system from time-domain generators.
    pub fn from_generators(grid: GridSpec, generators: Vec<Vec<C64>>) -> Result<Self> {
        let q = grid.fiber_len();
        let per_gen: Vec<Vec<Vec<C64>>> = generators
            .iter()
            .map(|g| signal_fibers(g, &grid))
            .collect::<Result<_>>()?;
        let fibers = (0..grid.fiber_count())
            .map(|w| CMatrix::from_fn(q, generators.len(), |k, i| per_gen[i][w][k]))
            .collect();
        Ok(Self::assemble(grid, generators, fibers))
    }

    fn assemble(grid: GridSpec, generators: Vec<Vec<C64>>, fibers: Vec<CMatrix>) -> Self {
        let scale = fibers
            .iter()
            .flat_map(|f| f.columns().map(linalg::norm))
            .fold(0.0, f64::max);
        let bases = fibers
            .iter()
            .map(|f| linalg::orthonormal_basis(f.columns(), 1e-8 * scale))
            .collect();
        GeneratorSystem {
            grid,
            generators,
            fibers,
            bases,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Vec<C64>] {
        &self.generators
    }

    pub fn fiber(&self, w: usize) -> &CMatrix {
        &self.fibers[w]
    }

    /// Dimension of the fiber space `V_ω`.
    pub fn fiber_dim(&self, w: usize) -> usize {
        self.bases[w].len()
    }

    fn check_len(&self, f: &[C64]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "signal has {} samples, model grid has {}",
                f.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Orthogonal projection onto the span of all translates.
    pub fn project(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.check_len(f)?;
        let fibers = signal_fibers(f, &self.grid)?;
        let projected: Vec<Vec<C64>> = fibers
            .iter()
            .zip(&self.bases)
            .map(|(v, b)| linalg::project_onto(v, b))
            .collect();
        defiberize(&projected, &self.grid)
    }

    /// `Σ_{i,k} |⟨f, T_k φ_i⟩|² = P Σ_ω Σ_i |⟨Γ_ω f̂, Γ_ω φ̂_i⟩|²`.
    pub fn frame_sum(&self, f: &[C64]) -> Result<f64> {
        self.check_len(f)?;
        let fibers = signal_fibers(f, &self.grid)?;
        Ok(self.frame_sum_fibers(&fibers))
    }

    fn frame_sum_fibers(&self, fibers: &[Vec<C64>]) -> f64 {
        let p = self.grid.fiber_count() as f64;
        let s: f64 = fibers
            .iter()
            .zip(&self.fibers)
            .map(|(v, phi)| {
                phi.columns()
                    .map(|c| linalg::inner(v, c).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        p * s
    }

    /// `P · G_Φ(ω)` with `G_Φ(ω)_ij = ⟨Γ_ω φ̂_j, Γ_ω φ̂_i⟩`; the identity
    /// exactly when the translates are orthonormal on this fiber.
    pub fn normalized_fiber_gramian(&self, w: usize) -> CMatrix {
        let p = self.grid.fiber_count() as f64;
        self.fibers[w].adjoint().matmul(&self.fibers[w]).expect("square").scale(p)
    }

    /// `max_ω ‖P·G_Φ(ω) − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let id = CMatrix::identity(n);
        (0..self.grid.fiber_count())
            .map(|w| {
                self.normalized_fiber_gramian(w)
                    .sub(&id)
                    .as_slice()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `max_{ω, i≠j} P·|⟨Γ_ω φ̂_i, Γ_ω φ̂_j⟩|`.
    pub fn cross_orthogonality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for w in 0..self.grid.fiber_count() {
            let g = self.normalized_fiber_gramian(w);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        worst = worst.max(g[(i, j)].norm());
                    }
                }
            }
        }
        worst
    }

    /// `max_{ω,i} √P · ‖Γ_ω φ̂_i − P_{span A(ω)} Γ_ω φ̂_i‖`.
    pub fn containment_defect(&self, data: &FiberSet) -> Result<f64> {
        if data.grid() != &self.grid {
            return Err(Error::GridMismatch("data and model grids differ".into()));
        }
        let sp = (self.grid.fiber_count() as f64).sqrt();
        let mut worst: f64 = 0.0;
        for (w, phi) in self.fibers.iter().enumerate() {
            let a = data.matrix(w);
            let scale = a.columns().map(linalg::norm).fold(0.0, f64::max);
            let span = linalg::orthonormal_basis(a.columns(), 1e-12 * scale);
            for c in phi.columns() {
                let mut r = c.to_vec();
                linalg::orthogonalize_against(&mut r, &span);
                worst = worst.max(sp * linalg::norm(&r));
            }
        }
        Ok(worst)
    }

    /// Empirical frame bounds over random unit-norm elements of the space.
    pub fn verify_parseval(&self, trials: usize, seed: u64) -> Result<FrameBounds> {
        if trials == 0 {
            return Err(Error::invalid("verify_parseval needs at least one trial"));
        }
        if self.bases.iter().all(|b| b.is_empty()) {
            return Err(Error::invalid("model space is {0}; no frame to verify"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for _ in 0..trials {
            let fibers: Vec<Vec<C64>> = self
                .fibers
                .iter()
                .map(|phi| {
                    let coeffs: Vec<C64> = (0..phi.cols())
                        .map(|_| {
                            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                        })
                        .collect();
                    phi.mul_vec(&coeffs)
                })
                .collect();
            let energy: f64 = fibers.iter().map(|v| linalg::norm_sqr(v)).sum();
            if energy == 0.0 {
                continue;
            }
            let ratio = self.frame_sum_fibers(&fibers) / energy;
            lower = lower.min(ratio);
            upper = upper.max(ratio);
        }
        Ok(FrameBounds { lower, upper })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_parseval(&self, tol: f64) -> bool {
        (self.lower - 1.0).abs() <= tol && (self.upper - 1.0).abs() <= tol
    }
}

/// Optimal model with `n` generators for a signal set.
#[derive(Debug, Clone, PartialEq)]
pub struct SisModel {
    system: GeneratorSystem,
    requested: usize,
    signal_count: usize,
    sigma_tilde: Vec<Vec<f64>>,
    length_actual: usize,
    r_min: usize,
    r_max: usize,
    unique: bool,
    min_gap: f64,
    curve: Vec<f64>,
    tolerances: Tolerances,
    weighted: bool,
}

impl SisModel {
    pub fn system(&self) -> &GeneratorSystem {
        &self.system
    }

    pub fn grid(&self) -> &GridSpec {
        self.system.grid()
    }

    pub fn generators(&self) -> &[Vec<C64>] {
        self.system.generators()
    }

    /// Requested generator count (may exceed the signal count).
    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Generators actually built: `min(n, m)`.
    pub fn effective(&self) -> usize {
        self.system.len()
    }

    pub fn signal_count(&self) -> usize {
        self.signal_count
    }

    /// `σ̃_i(ω)` for `i < effective()`.
    pub fn sigma_tilde(&self, w: usize) -> &[f64] {
        &self.sigma_tilde[w]
    }

    pub fn length_actual(&self) -> usize {
        self.length_actual
    }

    pub fn r_min(&self) -> usize {
        self.r_min
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn unique(&self) -> bool {
        self.unique
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn curve(&self) -> &[f64] {
        &self.curve
    }

    /// `E(F, n)` from the eigenvalue tail.
    pub fn error(&self) -> f64 {
        self.curve[self.effective()]
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn project(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.system.project(f)
    }

    pub fn report(&self, trials: usize, seed: u64) -> Result<ApproximationReport> {
        let bounds = if self.system.bases.iter().any(|b| !b.is_empty()) {
            Some(self.system.verify_parseval(trials, seed)?)
        } else {
            None
        };
        Ok(ApproximationReport {
            n: self.requested,
            error: self.error(),
            curve: self.curve.clone(),
            frame_bounds: bounds,
            unique: self.unique,
            min_gap: self.min_gap,
            r_min: self.r_min,
            r_max: self.r_max,
            length_actual: self.length_actual,
            weighted: self.weighted,
        })
    }
}

pub fn synthesize(signals: &SignalSet, n: usize, tol: &Tolerances) -> Result<SisModel> {
    synthesize_with(signals, n, tol, Execution::default())
}

pub fn synthesize_weighted(
    signals: &SignalSet,
    weights: &WeightVector,
    n: usize,
    tol: &Tolerances,
) -> Result<SisModel> {
    let mut model = synthesize(&apply_weights(signals, weights)?, n, tol)?;
    model.weighted = true;
    Ok(model)
}

pub fn synthesize_with(
    signals: &SignalSet,
    n: usize,
    tol: &Tolerances,
    exec: Execution,
) -> Result<SisModel> {
    let grid = signals.grid().clone();
    let fibers = fiberize_with(signals, exec);
    let profile = spectral_profile_with(&gramian_with(&fibers, exec), tol, exec)?;
    synthesize_from_profile(&fibers, &profile, n, tol, exec).map(|(system, sigma_tilde)| {
        let m = signals.count();
        let eff = system.len();
        let (unique, min_gap) = if eff == 0 {
            (true, f64::INFINITY)
        } else {
            let u = uniqueness_check(&profile, eff, tol).expect("1 <= eff <= m");
            (u.unique, u.min_gap)
        };
        let length_actual = (0..grid.fiber_count())
            .map(|w| profile.rank(w).min(eff))
            .max()
            .unwrap_or(0);
        SisModel {
            system,
            requested: n,
            signal_count: m,
            sigma_tilde,
            length_actual,
            r_min: profile.r_min(),
            r_max: profile.r_max(),
            unique,
            min_gap,
            curve: error_curve_from(&profile),
            tolerances: *tol,
            weighted: false,
        }
    })
}

/// Generator fibers `Γ_ω φ̂_i = P^{-1/2} σ̃_i(ω) Σ_j y_ij(ω) Γ_ω f̂_j` and the
/// time-domain generators they define.
fn synthesize_from_profile(
    fibers: &FiberSet,
    profile: &SpectralProfile,
    n: usize,
    tol: &Tolerances,
    exec: Execution,
) -> Result<(GeneratorSystem, Vec<Vec<f64>>)> {
    let grid = fibers.grid();
    let eff = n.min(fibers.signal_count());
    let inv_sqrt_p = 1.0 / (grid.fiber_count() as f64).sqrt();
    let q = grid.fiber_len();

    let per_fiber: Vec<(CMatrix, Vec<f64>)> = exec.map(grid.fiber_count(), |w| {
        let st = subspace::sigma_tilde(profile.eigenvalues(w), tol.rank);
        let frame = frame_from_eigensystem(fibers.matrix(w), profile.left_vectors(w), &st, eff);
        let mut mat = CMatrix::from_columns(q, &frame).expect("fiber length");
        for i in 0..eff {
            mat.col_mut(i).iter_mut().for_each(|z| *z *= inv_sqrt_p);
        }
        (mat, st[..eff].to_vec())
    });
    let (gen_fibers, sigma_tilde): (Vec<CMatrix>, Vec<Vec<f64>>) = per_fiber.into_iter().unzip();

    let generators = exec.try_map(eff, |i| {
        let cols: Vec<Vec<C64>> = gen_fibers.iter().map(|f| f.col(i).to_vec()).collect();
        defiberize(&cols, grid)
    })?;
    Ok((
        GeneratorSystem::assemble(grid.clone(), generators, gen_fibers),
        sigma_tilde,
    ))
}

/// `Σ_j ‖f_j − P_V f_j‖²` computed by explicit projection.
pub fn direct_error(system: &GeneratorSystem, signals: &SignalSet) -> Result<f64> {
    if signals.grid() != system.grid() {
        return Err(Error::GridMismatch("signals and model grids differ".into()));
    }
    signals
        .signals()
        .iter()
        .map(|f| {
            let p = system.project(f)?;
            let r: Vec<C64> = f.iter().zip(&p).map(|(a, b)| a - b).collect();
            Ok(linalg::norm_sqr(&r))
        })
        .sum()
}

/// Error curve `E(F, 0..=m)` with an order-selection helper.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub values: Vec<f64>,
}

impl ErrorCurve {
    /// `J(n) = E(F, n) + γ n`.
    pub fn cost(&self, n: usize, gamma: f64) -> f64 {
        self.values[n] + gamma * n as f64
    }

    /// Smallest minimizer of `J`.
    pub fn select_order(&self, gamma: f64) -> Result<usize> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
        }
        let mut best = 0;
        for n in 1..self.values.len() {
            if self.cost(n, gamma) < self.cost(best, gamma) {
                best = n;
            }
        }
        Ok(best)
    }
}

pub fn error_curve(signals: &SignalSet, tol: &Tolerances) -> Result<ErrorCurve> {
    let fibers = fiberize_with(signals, Execution::default());
    let profile = spectral_profile(&gramian(&fibers), tol)?;
    Ok(ErrorCurve {
        values: error_curve_from(&profile),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub n: usize,
    pub error: f64,
    pub curve: Vec<f64>,
    /// `None` when the model space is `{0}`.
    pub frame_bounds: Option<FrameBounds>,
    pub unique: bool,
    pub min_gap: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub length_actual: usize,
    pub weighted: bool,
}
