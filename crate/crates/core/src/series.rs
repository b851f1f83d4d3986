//! Balanced alternating series: a positive term rule a_k and a negative term
//! rule b_k with Σa_k = −Σb_k enforced at construction, so the interleaved
//! partial sums S(n) = Σ_{k≤n}(a_k + b_k) converge to 0.

use serde::Serialize;

use crate::compensated::CompensatedSum;
use crate::error::{CoreError, Result};
use crate::table::FunctionTable;

/// Relative tolerance for the analytic balance Σa_k + Σb_k = 0.
pub const BALANCE_RELATIVE_TOL: f64 = 1e-12;

/// Direct-summation cutoff for the ζ tail expansion.
const ZETA_DIRECT_TERMS: u64 = 20_000;

/// ζ(p) for p > 1: direct summation of the first 20 000 terms plus the
/// Euler–Maclaurin tail through the N^{−p−5} correction, which leaves an
/// error far below 1e-15 relative for every p > 1.
pub fn zeta(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(CoreError::invalid(format!(
            "zeta is summed only for exponent > 1, got {p}"
        )));
    }
    let head: f64 = (1..=ZETA_DIRECT_TERMS)
        .map(|k| (k as f64).powf(-p))
        .collect::<CompensatedSum>()
        .value();
    let n = ZETA_DIRECT_TERMS as f64;
    let tail = n.powf(1.0 - p) / (p - 1.0) - 0.5 * n.powf(-p)
        + p / 12.0 * n.powf(-p - 1.0)
        - p * (p + 1.0) * (p + 2.0) / 720.0 * n.powf(-p - 3.0)
        + p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) / 30240.0 * n.powf(-p - 5.0);
    Ok(head + tail)
}

/// One side of the series: a closed-form rule for the k-th term, k ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TermRule {
    /// scale · ratio^k with 0 < ratio < 1.
    Geometric { ratio: f64, scale: f64 },
    /// scale · k^{−exponent} with exponent > 1.
    PSeries { exponent: f64, scale: f64 },
}

impl TermRule {
    fn validate(&self) -> Result<()> {
        match *self {
            TermRule::Geometric { ratio, scale } => {
                if !(ratio.is_finite() && ratio > 0.0 && ratio < 1.0) {
                    return Err(CoreError::invalid(format!(
                        "geometric ratio must lie in (0, 1), got {ratio}"
                    )));
                }
                if !scale.is_finite() || scale == 0.0 {
                    return Err(CoreError::invalid("term scale must be finite and nonzero"));
                }
            }
            TermRule::PSeries { exponent, scale } => {
                if !exponent.is_finite() || exponent <= 1.0 {
                    return Err(CoreError::invalid(format!(
                        "p-series exponent must exceed 1, got {exponent}"
                    )));
                }
                if !scale.is_finite() || scale == 0.0 {
                    return Err(CoreError::invalid("term scale must be finite and nonzero"));
                }
            }
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        match *self {
            TermRule::Geometric { scale, .. } | TermRule::PSeries { scale, .. } => scale,
        }
    }

    /// The k-th term, k ≥ 1.
    pub fn term(&self, k: u64) -> f64 {
        match *self {
            TermRule::Geometric { ratio, scale } => scale * ratio.powi(k as i32),
            TermRule::PSeries { exponent, scale } => scale * (k as f64).powf(-exponent),
        }
    }

    /// Σ_{k≤n} of the rule: geometric in closed form, p-series by direct
    /// compensated summation (its reference evaluation).
    pub fn partial_sum(&self, n: u64) -> f64 {
        match *self {
            TermRule::Geometric { ratio, scale } => {
                scale * ratio * (1.0 - ratio.powi(n as i32)) / (1.0 - ratio)
            }
            TermRule::PSeries { .. } => (1..=n)
                .map(|k| self.term(k))
                .collect::<CompensatedSum>()
                .value(),
        }
    }

    /// The analytic sum Σ_{k≥1}.
    pub fn total(&self) -> Result<f64> {
        match *self {
            TermRule::Geometric { ratio, scale } => Ok(scale * ratio / (1.0 - ratio)),
            TermRule::PSeries { exponent, scale } => Ok(scale * zeta(exponent)?),
        }
    }
}

/// A balanced pair of term rules: every a_k > 0, every b_k < 0, and the
/// analytic sums cancel, so Σ(a_k + b_k) = 0 holds by construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesSpec {
    positive: TermRule,
    negative: TermRule,
    /// A = Σa_k; the negative side sums to −A.
    positive_sum: f64,
}

impl SeriesSpec {
    pub fn new(positive: TermRule, negative: TermRule) -> Result<SeriesSpec> {
        positive.validate()?;
        negative.validate()?;
        if positive.scale() <= 0.0 {
            return Err(CoreError::invalid("the positive rule needs scale > 0"));
        }
        if negative.scale() >= 0.0 {
            return Err(CoreError::invalid("the negative rule needs scale < 0"));
        }
        let a = positive.total()?;
        let b = negative.total()?;
        if (a + b).abs() > BALANCE_RELATIVE_TOL * a {
            return Err(CoreError::invalid(format!(
                "series sums do not cancel: Σa = {a:.17e}, Σb = {b:.17e}"
            )));
        }
        Ok(SeriesSpec {
            positive,
            negative,
            positive_sum: a,
        })
    }

    pub fn positive(&self) -> TermRule {
        self.positive
    }

    pub fn negative(&self) -> TermRule {
        self.negative
    }

    /// The exact analytic value A = Σa_k = −Σb_k.
    pub fn positive_sum(&self) -> f64 {
        self.positive_sum
    }

    /// f(k) = a_k + b_k.
    pub fn term(&self, k: u64) -> f64 {
        self.positive.term(k) + self.negative.term(k)
    }

    /// S(n) = Σ_{k≤n}(a_k + b_k) from the per-rule partial sums.
    pub fn partial_sum_closed_form(&self, n: u64) -> f64 {
        self.positive.partial_sum(n) + self.negative.partial_sum(n)
    }
}

/// Tabulate f(k) = a_k + b_k for k = 1..n as an external-kind table, ready
/// for the summatory, distribution, and standardized-sum machinery.
pub fn alternating_series_table(spec: &SeriesSpec, n: u64) -> Result<FunctionTable> {
    if n == 0 {
        return Err(CoreError::invalid("series table needs n ≥ 1"));
    }
    let values: Vec<f64> = (1..=n).map(|k| spec.term(k)).collect();
    FunctionTable::external(values)
}
