//! Unitary multi-dimensional DFT.
//!
//! Each axis is transformed with a recursive mixed-radix Cooley–Tukey
//! decimation in time. Radix-`p` butterflies are evaluated directly, so a
//! prime length degenerates to the naive `O(N²)` sum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{unflatten, GridSpec};
use crate::linalg::C64;

/// Plan for one axis of length `n` (forward direction, unnormalized).
#[derive(Debug, Clone)]
struct AxisPlan {
    n: usize,
    factors: Vec<usize>,
    twiddles: Vec<C64>,
}

impl AxisPlan {
    fn new(n: usize) -> Self {
        let twiddles = (0..n)
            .map(|t| {
                let (s, c) = (-2.0 * PI * t as f64 / n as f64).sin_cos();
                C64::new(c, s)
            })
            .collect();
        AxisPlan {
            n,
            factors: prime_factors(n),
            twiddles,
        }
    }

    fn forward(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.n);
        if self.n <= 1 {
            return;
        }
        let input = data.to_vec();
        let mut scratch = vec![C64::new(0.0, 0.0); self.n];
        self.recurse(&input, 0, 1, self.n, data, &self.factors, 1, &mut scratch);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        input: &[C64],
        offset: usize,
        stride: usize,
        n: usize,
        out: &mut [C64],
        factors: &[usize],
        tw_stride: usize,
        scratch: &mut [C64],
    ) {
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let p = factors[0];
        let m = n / p;
        for r in 0..p {
            self.recurse(
                input,
                offset + r * stride,
                stride * p,
                m,
                &mut out[r * m..(r + 1) * m],
                &factors[1..],
                tw_stride * p,
                scratch,
            );
        }
        // X[k + m q] = Σ_r W_n^{r k} Y_r[k] W_p^{r q}
        let tw = |t: usize| self.twiddles[(t % n) * tw_stride];
        let mut column = vec![C64::new(0.0, 0.0); p];
        for k in 0..m {
            for (r, c) in column.iter_mut().enumerate() {
                *c = out[r * m + k] * tw(r * k);
            }
            for q in 0..p {
                let mut acc = column[0];
                for (r, c) in column.iter().enumerate().skip(1) {
                    acc += c * tw(m * ((r * q) % p));
                }
                scratch[k + m * q] = acc;
            }
        }
        out.copy_from_slice(&scratch[..n]);
    }
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut f = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            f.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        f.push(n);
    }
    f
}

/// Reusable transform for one grid.
#[derive(Debug, Clone)]
pub struct Dft {
    axes: Vec<usize>,
    plans: Vec<AxisPlan>,
    scale: f64,
}

impl Dft {
    pub fn new(grid: &GridSpec) -> Self {
        let axes = grid.axes().to_vec();
        let plans = axes.iter().map(|&n| AxisPlan::new(n)).collect();
        Dft {
            scale: 1.0 / (grid.len() as f64).sqrt(),
            axes,
            plans,
        }
    }

    fn len(&self) -> usize {
        self.axes.iter().product()
    }

    fn check(&self, data: &[C64]) -> Result<()> {
        if data.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: data.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, data: &[C64]) -> Result<Vec<C64>> {
        self.check(data)?;
        let mut out = data.to_vec();
        self.forward_unscaled(&mut out);
        out.iter_mut().for_each(|z| *z *= self.scale);
        Ok(out)
    }

    pub fn inverse(&self, data: &[C64]) -> Result<Vec<C64>> {
        self.check(data)?;
        let mut out: Vec<C64> = data.iter().map(|z| z.conj()).collect();
        self.forward_unscaled(&mut out);
        out.iter_mut().for_each(|z| *z = z.conj() * self.scale);
        Ok(out)
    }

    fn forward_unscaled(&self, data: &mut [C64]) {
        let d = self.axes.len();
        let mut line = Vec::new();
        for j in 0..d {
            let n = self.axes[j];
            let inner: usize = self.axes[j + 1..].iter().product();
            let outer: usize = self.axes[..j].iter().product();
            line.resize(n, C64::new(0.0, 0.0));
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * n * inner + i;
                    for (t, v) in line.iter_mut().enumerate() {
                        *v = data[base + t * inner];
                    }
                    self.plans[j].forward(&mut line);
                    for (t, v) in line.iter().enumerate() {
                        data[base + t * inner] = *v;
                    }
                }
            }
        }
    }
}

/// Unitary forward DFT of one signal on `grid`.
pub fn unitary_dft(signal: &[C64], grid: &GridSpec) -> Result<Vec<C64>> {
    Dft::new(grid).forward(signal)
}

pub fn inverse_dft(spectrum: &[C64], grid: &GridSpec) -> Result<Vec<C64>> {
    Dft::new(grid).inverse(spectrum)
}

/// Direct `O(N²)` evaluation of the unitary multi-dimensional DFT.
pub fn naive_dft(signal: &[C64], grid: &GridSpec) -> Result<Vec<C64>> {
    let n = grid.len();
    if signal.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: signal.len(),
        });
    }
    let axes = grid.axes();
    let scale = 1.0 / (n as f64).sqrt();
    let positions: Vec<Vec<usize>> = (0..n).map(|x| unflatten(x, axes)).collect();
    Ok((0..n)
        .map(|k| {
            let freq = &positions[k];
            let mut acc = C64::new(0.0, 0.0);
            for (x, pos) in positions.iter().enumerate() {
                // phase as a fraction of a turn, reduced per axis
                let turns: f64 = pos
                    .iter()
                    .zip(freq)
                    .zip(axes)
                    .map(|((a, b), &len)| ((a * b) % len) as f64 / len as f64)
                    .sum();
                let (s, c) = (-2.0 * PI * turns).sin_cos();
                acc += signal[x] * C64::new(c, s);
            }
            acc * scale
        })
        .collect())
}
