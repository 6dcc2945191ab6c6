//! Spread, pseudo spread, and their growth dimensions at single scales and
//! over scale grids.
//!
//! For a point `x` with distance row `d(x, .)` the per-point quantity is
//! `psi_x(t) = n / sum_y exp(-t d(x,y))`, and `phi_x(t)` is its analytic
//! t-derivative. Averaging over a subset `S` gives the pseudo spread and,
//! via the instantaneous-growth ratio `t * mean(phi) / mean(psi)`, the
//! pseudo spread dimension. With `S = X` these reduce exactly to the spread
//! and spread dimension of the whole space.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, PartialDistanceMatrix};

/// Ordered list of scale values `t >= 0` to evaluate profiles at.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    values: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("scale grid must be nonempty".into()));
        }
        if values.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument("scales must be finite and >= 0".into()));
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument("scales must be strictly increasing".into()));
            }
        }
        Ok(Self { values })
    }

    /// `steps` evenly spaced values covering `[min, max]` inclusive.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be >= 1".into()));
        }
        if steps == 1 {
            return Self::new(vec![min]);
        }
        if max <= min {
            return Err(Error::InvalidArgument("max must exceed min".into()));
        }
        let h = (max - min) / (steps - 1) as f64;
        let values = (0..steps).map(|i| min + h * i as f64).collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Constant step size, if the grid is (numerically) uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.values.len() < 2 {
            return None;
        }
        let h = (self.values[self.values.len() - 1] - self.values[0]) / (self.values.len() - 1) as f64;
        let ok = self
            .values
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0));
        ok.then_some(h)
    }
}

/// The multiset of `psi_x(t)` values over a subset, at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSample {
    pub values: Vec<f64>,
    pub t: f64,
    pub n: usize,
    pub k: usize,
}

/// The multiset of `phi_x(t)` values over a subset, at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSample {
    pub values: Vec<f64>,
    pub t: f64,
    pub n: usize,
    pub k: usize,
}

/// Per-scale pseudo spread and pseudo spread dimension over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadProfile {
    pub grid: ScaleGrid,
    pub spread_values: Vec<f64>,
    pub dimension_values: Vec<f64>,
}

/// One left-to-right pass over a distance row: returns
/// `(sum_j exp(-t d_j), sum_j d_j exp(-t d_j))`.
///
/// Accumulation order is index order; every caller shares this pass so that
/// single-scale calls and grid sweeps agree bitwise.
#[inline]
fn weight_sums(row: &[f64], t: f64) -> (f64, f64) {
    let mut sum_w = 0.0;
    let mut sum_dw = 0.0;
    for &d in row {
        let w = (-t * d).exp();
        sum_w += w;
        sum_dw += d * w;
    }
    (sum_w, sum_dw)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `psi_x(t) = n / sum_y exp(-t d(x,y))`; always in `[1, n]` because the
/// self-term contributes `exp(0) = 1` to the denominator.
pub fn psi(row: &[f64], t: f64) -> f64 {
    let (sum_w, _) = weight_sums(row, t);
    row.len() as f64 / sum_w
}

/// `phi_x(t) = d/dt psi_x(t) = n * sum_z d(x,z) exp(-t d(x,z)) / (sum_y exp(-t d(x,y)))^2`.
pub fn phi(row: &[f64], t: f64) -> f64 {
    let (sum_w, sum_dw) = weight_sums(row, t);
    row.len() as f64 * sum_dw / (sum_w * sum_w)
}

/// Both values from a single shared pass over the row.
#[inline]
pub fn psi_phi(row: &[f64], t: f64) -> (f64, f64) {
    let (sum_w, sum_dw) = weight_sums(row, t);
    let n = row.len() as f64;
    (n / sum_w, n * sum_dw / (sum_w * sum_w))
}

pub fn psi_sample(pdm: &PartialDistanceMatrix, t: f64) -> PsiSample {
    let values: Vec<f64> = pdm
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| psi(row, t))
        .collect();
    PsiSample {
        values,
        t,
        n: pdm.n(),
        k: pdm.k(),
    }
}

pub fn phi_sample(pdm: &PartialDistanceMatrix, t: f64) -> PhiSample {
    let values: Vec<f64> = pdm
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| phi(row, t))
        .collect();
    PhiSample {
        values,
        t,
        n: pdm.n(),
        k: pdm.k(),
    }
}

/// Arithmetic mean of the psi sample; equals the spread when `S = X`.
pub fn pseudo_spread(pdm: &PartialDistanceMatrix, t: f64) -> f64 {
    mean(&psi_sample(pdm, t).values)
}

/// Spread of the whole space at scale `t`, evaluated as the mean of
/// `psi_x(t)` over all points (identical arithmetic to the `S = X` pseudo
/// spread, and exactly 1 at `t = 0`).
pub fn spread(dm: &DistanceMatrix, t: f64) -> f64 {
    let psis: Vec<f64> = (0..dm.n())
        .into_par_iter()
        .map(|i| psi(dm.row(i), t))
        .collect();
    mean(&psis)
}

/// `t * mean(phi) / mean(psi)`; defined as exactly 0 at `t = 0`.
pub fn pseudo_spread_dimension(pdm: &PartialDistanceMatrix, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let pairs: Vec<(f64, f64)> = pdm
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| psi_phi(row, t))
        .collect();
    dimension_from_pairs(&pairs, t)
}

/// Spread dimension of the whole space; same arithmetic path as
/// [`pseudo_spread_dimension`] with `S = X`, without materialising a copy of
/// the matrix.
pub fn spread_dimension(dm: &DistanceMatrix, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let pairs: Vec<(f64, f64)> = (0..dm.n())
        .into_par_iter()
        .map(|i| psi_phi(dm.row(i), t))
        .collect();
    dimension_from_pairs(&pairs, t)
}

/// Row-order means of psi and phi, combined into `t * phibar / psibar`.
pub(crate) fn dimension_from_pairs(pairs: &[(f64, f64)], t: f64) -> f64 {
    let mut sum_psi = 0.0;
    let mut sum_phi = 0.0;
    for &(p, q) in pairs {
        sum_psi += p;
        sum_phi += q;
    }
    let k = pairs.len() as f64;
    t * (sum_phi / k) / (sum_psi / k)
}

/// Evaluate pseudo spread and pseudo spread dimension at every grid scale.
///
/// Per-scale values are identical to the corresponding single-scale calls.
pub fn sweep_profile(pdm: &PartialDistanceMatrix, grid: &ScaleGrid) -> SpreadProfile {
    let rows: Vec<&[f64]> = pdm.rows().collect();
    let per_t: Vec<(f64, f64)> = grid
        .values()
        .par_iter()
        .map(|&t| {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|row| psi_phi(row, t)).collect();
            let psibar = mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let dim = if t == 0.0 {
                0.0
            } else {
                dimension_from_pairs(&pairs, t)
            };
            (psibar, dim)
        })
        .collect();
    SpreadProfile {
        grid: grid.clone(),
        spread_values: per_t.iter().map(|p| p.0).collect(),
        dimension_values: per_t.iter().map(|p| p.1).collect(),
    }
}
