//! Limits of slowly converging sequences: Aitken's delta-squared process and
//! a Cauchy-gap tracker used by every radius-to-one extrapolation.

use num_complex::Complex64;

/// Aitken delta-squared extrapolation of three consecutive terms.
///
/// Falls back to `x2` when the differences do not look geometric (tiny
/// second difference, or a correction far larger than the last step).
pub fn aitken(x0: Complex64, x1: Complex64, x2: Complex64) -> Complex64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let dd = d2 - d1;
    if dd.norm() <= 1e-300 || !dd.is_finite() {
        return x2;
    }
    let corr = d2 * d2 / dd;
    if !corr.is_finite() || corr.norm() > 20.0 * d2.norm() {
        return x2;
    }
    x2 - corr
}

/// Tracks a vector-valued sequence x_m -> x_inf, its componentwise Aitken
/// extrapolates and the Cauchy gap between successive extrapolates.
#[derive(Clone, Debug, Default)]
pub struct LimitTracker {
    raw: Vec<Vec<Complex64>>,
    extrapolated: Vec<Vec<Complex64>>,
}

impl LimitTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add the next term; returns the current best estimate.
    pub fn push(&mut self, x: &[Complex64]) -> Vec<Complex64> {
        self.raw.push(x.to_vec());
        let n = self.raw.len();
        let est = if n >= 3 {
            (0..x.len())
                .map(|i| aitken(self.raw[n - 3][i], self.raw[n - 2][i], self.raw[n - 1][i]))
                .collect()
        } else {
            x.to_vec()
        };
        self.extrapolated.push(est.clone());
        est
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn best(&self) -> Option<&[Complex64]> {
        self.extrapolated.last().map(|v| v.as_slice())
    }

    pub fn last_raw(&self) -> Option<&[Complex64]> {
        self.raw.last().map(|v| v.as_slice())
    }

    /// Max-norm distance between the last two extrapolates (infinite until
    /// three raw terms are available, so that Aitken has actually been used).
    pub fn gap(&self) -> f64 {
        let n = self.extrapolated.len();
        if n < 4 {
            return f64::INFINITY;
        }
        self.extrapolated[n - 1]
            .iter()
            .zip(&self.extrapolated[n - 2])
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Gap relative to the size of the current estimate.
    pub fn relative_gap(&self) -> f64 {
        let scale = self
            .best()
            .map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .unwrap_or(1.0);
        if scale > 0.0 {
            self.gap() / scale
        } else {
            self.gap()
        }
    }
}
