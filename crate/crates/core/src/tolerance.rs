/// Numerical thresholds shared by the fitting layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues `λ_i ≤ rank · λ_1` are treated as zero.
    pub rank: f64,
    /// A spectral gap counts as strict when it exceeds `gap · max(λ_1, 1)`.
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-10,
            gap: 1e-8,
        }
    }
}
