//! Delta-method error propagation for the pseudo spread dimension.
//!
//! The estimator is the ratio `t * mean(phi) / mean(psi)`. Its variance is
//! propagated from the population variances and covariance of the phi and
//! psi samples; the standard error divides by `sqrt(|S|)` and the 95%
//! confidence interval uses `z = 1.96`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spread::{PhiSample, PsiSample};

/// Which propagation-of-errors formula to use for the ratio variance.
///
/// The validated default carries a single `-Cov/(AB)` cross term; the
/// conventional first-order delta method for a ratio carries `-2 Cov/(AB)`.
/// Both are exposed so coverage experiments can be run under either.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorFormula {
    #[default]
    SingleCov,
    DoubleCov,
}

impl ErrorFormula {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorFormula::SingleCov => "single-cov",
            ErrorFormula::DoubleCov => "double-cov",
        }
    }
}

/// Population variance: mean squared deviation from the mean (divisor `n`,
/// no Bessel correction).
pub fn population_variance(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("variance of empty sample".into()));
    }
    let m = sample.iter().sum::<f64>() / sample.len() as f64;
    let ss = sample.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    Ok(ss / sample.len() as f64)
}

/// Population covariance of paired samples (divisor `n`).
pub fn population_covariance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "covariance needs equal nonempty lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    let sp = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>();
    Ok(sp / a.len() as f64)
}

/// First-order variance of the ratio `A/B` of sample means.
///
/// Evaluated in the expanded form
/// `var_a/B^2 + (A^2/B^4) var_b - c (A/B^3) cov` (with `c` = 1 or 2 by
/// [`ErrorFormula`]), which is algebraically identical to the factored
/// `A^2/B^2 (...)` expression but stays well-defined at `A = 0`.
pub fn ratio_variance(
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov_ab: f64,
    formula: ErrorFormula,
) -> Result<f64> {
    if mean_b == 0.0 {
        return Err(Error::Domain("ratio variance with zero denominator mean".into()));
    }
    let b2 = mean_b * mean_b;
    let cov_factor = match formula {
        ErrorFormula::SingleCov => 1.0,
        ErrorFormula::DoubleCov => 2.0,
    };
    Ok(var_a / b2 + (mean_a * mean_a / b2) * var_b / b2
        - cov_factor * (mean_a / mean_b) * cov_ab / b2)
}

/// Result of propagating sample noise into the dimension estimate at one
/// scale. `clamped` flags a negative propagated variance truncated to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionVariance {
    pub value: f64,
    pub clamped: bool,
}

/// Variance of the pseudo spread dimension at scale `t`:
/// `t^2 * ratio_variance(mean(phi), mean(psi), Var(phi), Var(psi), Cov)`,
/// clamped below at zero.
pub fn dimension_variance(
    psi: &PsiSample,
    phi: &PhiSample,
    formula: ErrorFormula,
) -> Result<DimensionVariance> {
    if psi.t != phi.t || psi.k != phi.k || psi.n != phi.n {
        return Err(Error::InvalidArgument(
            "psi and phi samples must share scale and subset".into(),
        ));
    }
    let t = psi.t;
    let mean_psi = psi.values.iter().sum::<f64>() / psi.values.len() as f64;
    let mean_phi = phi.values.iter().sum::<f64>() / phi.values.len() as f64;
    let var_psi = population_variance(&psi.values)?;
    let var_phi = population_variance(&phi.values)?;
    let cov = population_covariance(&phi.values, &psi.values)?;
    let raw = t * t * ratio_variance(mean_phi, mean_psi, var_phi, var_psi, cov, formula)?;
    if raw < 0.0 {
        Ok(DimensionVariance {
            value: 0.0,
            clamped: true,
        })
    } else {
        Ok(DimensionVariance {
            value: raw,
            clamped: false,
        })
    }
}

/// Point estimate with standard error and confidence bounds at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimateAtScale {
    pub t: f64,
    pub estimate: f64,
    pub variance: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
}

/// `se = sqrt(variance) / sqrt(k)`, bounds `estimate -+ z * se`.
pub fn confidence_interval(
    t: f64,
    estimate: f64,
    variance: f64,
    k: usize,
    z: f64,
) -> Result<DimensionEstimateAtScale> {
    if k == 0 {
        return Err(Error::InvalidArgument("subset size must be >= 1".into()));
    }
    if variance < 0.0 {
        return Err(Error::InvalidArgument("variance must be >= 0".into()));
    }
    let se = variance.sqrt() / (k as f64).sqrt();
    Ok(DimensionEstimateAtScale {
        t,
        estimate,
        variance,
        se,
        ci_low: estimate - z * se,
        ci_high: estimate + z * se,
        z,
    })
}
