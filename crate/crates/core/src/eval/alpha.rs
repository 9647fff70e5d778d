//! Krippendorff's alpha.
//!
//! The coefficient is `alpha = 1 - D_o / D_e`, the observed disagreement
//! among pairable scores corrected by the disagreement expected by chance.
//! It handles any number of raters and missing cells; items with fewer than
//! two scores contribute nothing. Three difference functions are provided:
//!
//! * nominal:  0 when equal, 1 otherwise
//! * interval: squared difference of the values
//! * ordinal:  squared sum of the marginal frequencies of the ranks lying
//!   between the two values, minus half the endpoints' frequencies
//!
//! Values of alpha below 0.667 are conventionally deemed not reliable, and
//! results carry that verdict. When every pairable score is identical the
//! expected disagreement is zero and alpha is undefined; this is reported as
//! [`EvalError::DegenerateData`] rather than as perfect agreement.

use super::{EvalError, RatingMatrix};
use crate::Scalar;
use std::cmp::Ordering;

/// Conventional reliability cut-off for alpha.
pub const RELIABILITY_THRESHOLD: f64 = 0.667;

/// Difference function used to weigh disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nominal,
    Ordinal,
    Interval,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Metric::Nominal => "nominal",
            Metric::Ordinal => "ordinal",
            Metric::Interval => "interval",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nominal" => Ok(Metric::Nominal),
            "ordinal" => Ok(Metric::Ordinal),
            "interval" => Ok(Metric::Interval),
            other => Err(format!("unknown metric {other:?} (expected nominal, ordinal or interval)")),
        }
    }
}

/// The agreement coefficient together with its disagreement terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementResult<F> {
    pub alpha: F,
    pub observed_disagreement: F,
    pub expected_disagreement: F,
    pub metric: Metric,
    /// Number of pairable scores (scores in items rated at least twice).
    pub n_pairable: usize,
    /// `alpha >= 0.667`
    pub reliable: bool,
}

/// Value-pair coincidence counts over all pairable scores.
///
/// Symmetric; the total mass equals the number of pairable scores. Items
/// with fewer than two scores are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMatrix<F> {
    /// Sorted distinct score values observed in pairable items.
    values: Vec<F>,
    /// `counts[c][k]`, indexed by positions in `values`.
    counts: Vec<Vec<F>>,
    n_pairable: usize,
}

impl<F: Scalar> CoincidenceMatrix<F> {
    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn n_pairable(&self) -> usize {
        self.n_pairable
    }

    fn index_of(&self, value: F) -> Option<usize> {
        self.values
            .binary_search_by(|v| cmp_scalar(*v, value))
            .ok()
    }

    /// Coincidence count for a pair of values; zero for unseen values.
    pub fn count(&self, a: F, b: F) -> F {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => F::zero(),
        }
    }

    /// Marginal mass of one value.
    pub fn marginal(&self, value: F) -> F {
        match self.index_of(value) {
            Some(i) => self.counts[i].iter().copied().fold(F::zero(), |a, b| a + b),
            None => F::zero(),
        }
    }

    /// Total mass, which equals the number of pairable scores.
    pub fn total(&self) -> F {
        self.counts
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(F::zero(), |a, b| a + b)
    }
}

fn cmp_scalar<F: Scalar>(a: F, b: F) -> Ordering {
    a.partial_cmp(&b).expect("scores are never NaN")
}

/// Builds the coincidence matrix from per-item score lists. Each item with
/// `m` scores contributes every ordered pair of its scores from distinct
/// slots with weight `1/(m-1)`.
fn coincidence_from_values<F: Scalar>(items: &[Vec<F>]) -> Result<CoincidenceMatrix<F>, EvalError> {
    let pairable: Vec<&Vec<F>> = items.iter().filter(|scores| scores.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(EvalError::NothingPairable);
    }
    for scores in &pairable {
        if scores.iter().any(|v| v.is_nan()) {
            return Err(EvalError::InvalidValue("NaN score".into()));
        }
    }

    let mut values: Vec<F> = pairable.iter().flat_map(|s| s.iter().copied()).collect();
    values.sort_by(|a, b| cmp_scalar(*a, *b));
    values.dedup_by(|a, b| cmp_scalar(*a, *b) == Ordering::Equal);

    let size = values.len();
    let mut counts = vec![vec![F::zero(); size]; size];
    let mut n_pairable = 0usize;
    for scores in pairable {
        let m = scores.len();
        n_pairable += m;
        let weight = F::one() / F::from_usize(m - 1).expect("m >= 2");
        // per-category occurrence counts within this item
        let mut occurrence = vec![0usize; size];
        for &v in scores {
            let i = values
                .binary_search_by(|x| cmp_scalar(*x, v))
                .expect("value was collected above");
            occurrence[i] += 1;
        }
        for c in 0..size {
            if occurrence[c] == 0 {
                continue;
            }
            for k in 0..size {
                if occurrence[k] == 0 {
                    continue;
                }
                let pairs = if c == k {
                    occurrence[c] * (occurrence[c] - 1)
                } else {
                    occurrence[c] * occurrence[k]
                };
                if pairs > 0 {
                    counts[c][k] =
                        counts[c][k] + F::from_usize(pairs).expect("count fits") * weight;
                }
            }
        }
    }
    Ok(CoincidenceMatrix {
        values,
        counts,
        n_pairable,
    })
}

/// Builds the coincidence matrix of a rating matrix.
pub fn coincidence_matrix<F: Scalar>(m: &RatingMatrix) -> Result<CoincidenceMatrix<F>, EvalError> {
    coincidence_from_values(&score_table(m))
}

fn score_table<F: Scalar>(m: &RatingMatrix) -> Vec<Vec<F>> {
    (0..m.n_items())
        .map(|item| {
            m.item_scores(item)
                .into_iter()
                .map(|s| F::from_u8(s).expect("scores fit in any float"))
                .collect()
        })
        .collect()
}

fn delta_squared<F: Scalar>(metric: Metric, cm: &CoincidenceMatrix<F>, c: usize, k: usize) -> F {
    if c == k {
        return F::zero();
    }
    match metric {
        Metric::Nominal => F::one(),
        Metric::Interval => {
            let d = cm.values[c] - cm.values[k];
            d * d
        }
        Metric::Ordinal => {
            let (lo, hi) = if c < k { (c, k) } else { (k, c) };
            let between: F = (lo..=hi)
                .map(|g| cm.marginal(cm.values[g]))
                .fold(F::zero(), |a, b| a + b);
            let two = F::one() + F::one();
            let endpoints = (cm.marginal(cm.values[lo]) + cm.marginal(cm.values[hi])) / two;
            let d = between - endpoints;
            d * d
        }
    }
}

fn alpha_from_coincidence<F: Scalar>(
    cm: &CoincidenceMatrix<F>,
    metric: Metric,
) -> Result<AgreementResult<F>, EvalError> {
    let n = cm.total();
    let size = cm.values.len();
    let marginals: Vec<F> = (0..size)
        .map(|c| cm.counts[c].iter().copied().fold(F::zero(), |a, b| a + b))
        .collect();

    let mut observed_sum = F::zero();
    let mut expected_sum = F::zero();
    for c in 0..size {
        for k in 0..size {
            let d2 = delta_squared(metric, cm, c, k);
            observed_sum = observed_sum + cm.counts[c][k] * d2;
            expected_sum = expected_sum + marginals[c] * marginals[k] * d2;
        }
    }
    let observed = observed_sum / n;
    let expected = expected_sum / (n * (n - F::one()));
    if expected <= F::zero() {
        return Err(EvalError::DegenerateData);
    }
    let alpha = F::one() - observed / expected;
    Ok(AgreementResult {
        alpha,
        observed_disagreement: observed,
        expected_disagreement: expected,
        metric,
        n_pairable: cm.n_pairable(),
        reliable: alpha >= F::from_f64(RELIABILITY_THRESHOLD).expect("threshold fits"),
    })
}

/// Alpha over raw per-item score lists. This is the engine behind
/// [`krippendorff_alpha`]; it accepts arbitrary real scores, which also
/// makes scale-transformation properties directly testable.
pub fn alpha_from_values<F: Scalar>(
    items: &[Vec<F>],
    metric: Metric,
) -> Result<AgreementResult<F>, EvalError> {
    alpha_from_coincidence(&coincidence_from_values(items)?, metric)
}

/// Krippendorff's alpha of a rating matrix under the given metric.
pub fn krippendorff_alpha<F: Scalar>(
    m: &RatingMatrix,
    metric: Metric,
) -> Result<AgreementResult<F>, EvalError> {
    alpha_from_values(&score_table(m), metric)
}
