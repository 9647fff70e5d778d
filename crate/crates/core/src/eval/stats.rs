//! Descriptive statistics over rating scores.

use super::EvalError;
use crate::Scalar;

/// Summary statistics with both population and sample flavors; the sample
/// flavor is absent for a single observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats<F> {
    pub n: usize,
    pub mean: F,
    pub variance_population: F,
    pub variance_sample: Option<F>,
    pub sd_population: F,
    pub sd_sample: Option<F>,
    pub min: F,
    pub max: F,
}

/// Computes descriptive statistics. NaN values are rejected.
pub fn descriptive_stats<F: Scalar>(values: &[F]) -> Result<DescriptiveStats<F>, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(EvalError::InvalidValue("NaN score".into()));
    }
    let n = values.len();
    let n_f = F::from_usize(n).expect("usize fits in scalar");
    let mean = values.iter().copied().fold(F::zero(), |a, b| a + b) / n_f;
    let sum_sq = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .fold(F::zero(), |a, b| a + b);
    let variance_population = sum_sq / n_f;
    let variance_sample = if n >= 2 {
        Some(sum_sq / (n_f - F::one()))
    } else {
        None
    };
    let mut min = values[0];
    let mut max = values[0];
    for &v in &values[1..] {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    Ok(DescriptiveStats {
        n,
        mean,
        variance_population,
        variance_sample,
        sd_population: variance_population.sqrt(),
        sd_sample: variance_sample.map(|v| v.sqrt()),
        min,
        max,
    })
}
