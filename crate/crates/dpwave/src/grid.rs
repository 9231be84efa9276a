//! Sampled domains: symmetric line grids for profile and shooting work,
//! periodic grids for evolution and matrix discretizations.

use crate::error::{DpError, Result};

/// Uniform grid `ξᵢ = -L + i·h` on `[-L, L]` with an odd number of points,
/// so the midpoint index carries `ξ = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricGrid {
    half_width: f64,
    n: usize,
}

impl SymmetricGrid {
    /// Builds a grid with `n` odd and `L > 0`.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(DpError::Validation(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(DpError::Validation(format!(
                "grid size must be odd and at least 3, got {n}"
            )));
        }
        Ok(SymmetricGrid { half_width, n })
    }

    /// Half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Sample count `n` (odd).
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: grids carry at least 3 points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h = 2L/(n-1)`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    /// Index of the exact midpoint `ξ = 0`.
    pub fn mid(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Coordinate of sample `i`, with the midpoint pinned to exactly 0 and
    /// mirror symmetry `ξ(n-1-i) = -ξ(i)` enforced bitwise.
    pub fn xi(&self, i: usize) -> f64 {
        let mid = self.mid();
        if i == mid {
            0.0
        } else if i < mid {
            -((mid - i) as f64) * self.spacing()
        } else {
            ((i - mid) as f64) * self.spacing()
        }
    }

    /// All coordinates in order.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.xi(i)).collect()
    }
}

/// Real field sampled on a [`SymmetricGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    grid: SymmetricGrid,
    samples: Vec<f64>,
}

impl LineField {
    /// Wraps samples; lengths must match and all values must be finite.
    pub fn new(grid: SymmetricGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(DpError::Validation(format!(
                "field has {} samples for a {}-point grid",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(DpError::Validation("field contains non-finite samples".into()));
        }
        Ok(LineField { grid, samples })
    }

    /// Builds a field by evaluating `f` on every grid point.
    pub fn from_fn(grid: SymmetricGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.xi(i))).collect();
        LineField::new(grid, samples)
    }

    /// Underlying grid.
    pub fn grid(&self) -> SymmetricGrid {
        self.grid
    }

    /// Sample slice.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mutable sample slice (grid stays fixed).
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    /// Largest boundary magnitude `max(|f(-L)|, |f(L)|)`; the decay
    /// witness line-domain convolutions require.
    pub fn boundary_magnitude(&self) -> f64 {
        self.samples[0]
            .abs()
            .max(self.samples[self.samples.len() - 1].abs())
    }

    /// Trapezoid integral over `[-L, L]`; superalgebraically accurate for
    /// smooth fields with decayed tails.
    pub fn integral(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.samples.len();
        let interior: f64 = self.samples[1..n - 1].iter().sum();
        h * (interior + 0.5 * (self.samples[0] + self.samples[n - 1]))
    }

    /// Trapezoid inner product `⟨f, g⟩ = ∫ f g dξ`.
    pub fn dot(&self, other: &LineField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let h = self.grid.spacing();
        let n = self.samples.len();
        let mut acc = 0.5 * (self.samples[0] * other.samples[0]
            + self.samples[n - 1] * other.samples[n - 1]);
        for i in 1..n - 1 {
            acc += self.samples[i] * other.samples[i];
        }
        h * acc
    }

    /// L² grid norm `√⟨f, f⟩`.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Sup norm over samples.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Real field on a uniform periodic grid `x_j = -P/2 + j·P/n`,
/// `j = 0..n`, with `n` even so the Nyquist mode is well-defined.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    period: f64,
    samples: Vec<f64>,
}

impl PeriodicField {
    /// Wraps samples; `n` must be even (≥ 4) and values finite.
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(DpError::Validation(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let n = samples.len();
        if n < 4 || n % 2 != 0 {
            return Err(DpError::Validation(format!(
                "periodic sample count must be even and at least 4, got {n}"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(DpError::Validation(
                "periodic field contains non-finite samples".into(),
            ));
        }
        Ok(PeriodicField { period, samples })
    }

    /// Builds a field by evaluating `f` at every node.
    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..n)
            .map(|j| f(-period / 2.0 + period * j as f64 / n as f64))
            .collect();
        PeriodicField::new(period, samples)
    }

    /// Domain length `P`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Sample count.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// False by construction (`n ≥ 4`).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `P/n`.
    pub fn spacing(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    /// Node coordinate `x_j`.
    pub fn x(&self, j: usize) -> f64 {
        -self.period / 2.0 + self.period * j as f64 / self.samples.len() as f64
    }

    /// Sample slice.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mutable sample slice.
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    /// Rectangle-rule integral (exact for trigonometric polynomials below
    /// the Nyquist mode).
    pub fn integral(&self) -> f64 {
        self.spacing() * self.samples.iter().sum::<f64>()
    }

    /// Inner product `⟨f, g⟩ = ∫ f g dx` by the rectangle rule.
    pub fn dot(&self, other: &PeriodicField) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.spacing()
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    /// L² norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Sup norm over samples.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}
