//! Empirical value distributions, cataloged limit step laws, and the
//! Kolmogorov–Smirnov distance between them.
//!
//! CDF convention everywhere: right-continuous P(f ≤ y). The KS sup is
//! evaluated at every jump point of both laws, from both sides, so the
//! ≤-vs-< convention cannot change the metric.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::kind::FunctionKind;
use crate::normal::standard_normal_cdf;
use crate::table::{FunctionTable, TableValues};

/// Slack for "masses sum to one" checks on constructed distributions.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Exact value counts over a sample: sorted distinct support with integer
/// multiplicities. Frequencies are count/n, so they sum to 1 exactly.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalDistribution {
    support: Vec<f64>,
    counts: Vec<u64>,
    sample_size: u64,
}

impl EmpiricalDistribution {
    fn from_sorted_counts(support: Vec<f64>, counts: Vec<u64>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        let sample_size = counts.iter().sum();
        debug_assert!(sample_size > 0);
        EmpiricalDistribution {
            support,
            counts,
            sample_size,
        }
    }

    /// Count exact distinct values of a finite sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::invalid("empirical distribution needs samples"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("samples must be finite"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut support = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for &v in &sorted {
            if support.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                support.push(v);
                counts.push(1);
            }
        }
        Ok(Self::from_sorted_counts(support, counts))
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// count/n per support point.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.sample_size as f64)
            .collect()
    }

    pub fn frequency_of(&self, value: f64) -> f64 {
        match self.support.binary_search_by(|p| p.total_cmp(&value)) {
            Ok(i) => self.counts[i] as f64 / self.sample_size as f64,
            Err(_) => 0.0,
        }
    }

    /// The same law as a step CDF. Cumulative levels are exact integer
    /// prefix counts divided by n once, so the final level is exactly 1.
    pub fn to_step(&self) -> StepDistribution {
        let mut cumulative = Vec::with_capacity(self.counts.len());
        let mut acc = 0u64;
        for &c in &self.counts {
            acc += c;
            cumulative.push(acc as f64 / self.sample_size as f64);
        }
        StepDistribution {
            points: self.support.clone(),
            cumulative,
        }
    }
}

/// Exact distinct-value distribution of f(1..n) for integer-valued kinds;
/// real-valued kinds are binned (Freedman–Diaconis width by default).
pub fn empirical_value_distribution(
    table: &FunctionTable,
    n: u64,
) -> Result<EmpiricalDistribution> {
    empirical_value_distribution_binned(table, n, None)
}

/// As [`empirical_value_distribution`], with an explicit bin width for
/// real-valued kinds (ignored for integer kinds, which are always exact).
pub fn empirical_value_distribution_binned(
    table: &FunctionTable,
    n: u64,
    bin_width: Option<f64>,
) -> Result<EmpiricalDistribution> {
    if n == 0 {
        return Err(CoreError::invalid("distribution needs n ≥ 1"));
    }
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    let n_us = n as usize;
    match table.values() {
        TableValues::Int8(v) => Ok(int_counts(v[..n_us].iter().map(|&x| x as i64))),
        TableValues::Int32(v) => Ok(int_counts(v[..n_us].iter().map(|&x| x as i64))),
        TableValues::Float64(v) => binned_counts(&v[..n_us], bin_width),
    }
}

fn int_counts(values: impl Iterator<Item = i64>) -> EmpiricalDistribution {
    let mut map = std::collections::BTreeMap::<i64, u64>::new();
    for v in values {
        *map.entry(v).or_insert(0) += 1;
    }
    let support: Vec<f64> = map.keys().map(|&v| v as f64).collect();
    let counts: Vec<u64> = map.values().copied().collect();
    EmpiricalDistribution::from_sorted_counts(support, counts)
}

/// Interpolated quantile of an already sorted slice.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn binned_counts(values: &[f64], bin_width: Option<f64>) -> Result<EmpiricalDistribution> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::invalid("samples must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = *sorted.last().unwrap();
    if min == max {
        return Ok(EmpiricalDistribution::from_sorted_counts(
            vec![min],
            vec![values.len() as u64],
        ));
    }

    let width = match bin_width {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => {
            return Err(CoreError::invalid(format!(
                "bin width must be positive and finite, got {w}"
            )))
        }
        None => {
            // Freedman–Diaconis: 2·IQR·n^{-1/3}, with a span-based fallback
            // when the quartiles coincide.
            let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);
            let fd = 2.0 * iqr / (values.len() as f64).cbrt();
            if fd > 0.0 {
                fd
            } else {
                (max - min) / (values.len() as f64).sqrt().ceil()
            }
        }
    };
    // Keep the bin count sane even for adversarial widths.
    let width = width.max((max - min) / 1e6);

    let mut map = std::collections::BTreeMap::<u64, u64>::new();
    for &v in values {
        let idx = (((v - min) / width).floor() as u64).min(1_000_000);
        *map.entry(idx).or_insert(0) += 1;
    }
    let support: Vec<f64> = map
        .keys()
        .map(|&i| min + (i as f64 + 0.5) * width)
        .collect();
    let counts: Vec<u64> = map.values().copied().collect();
    Ok(EmpiricalDistribution::from_sorted_counts(support, counts))
}

/// A piecewise-constant CDF: jump points with cumulative levels ending at 1.
#[derive(Debug, Clone, Serialize)]
pub struct StepDistribution {
    points: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepDistribution {
    /// Build from jump points and masses; masses must be nonnegative and
    /// sum to 1 within 1e-12 (the final level is then snapped to exactly 1).
    pub fn new(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(CoreError::invalid(
                "step distribution needs matching nonempty points and masses",
            ));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::invalid(
                "jump points must be strictly increasing",
            ));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(CoreError::invalid("masses must be nonnegative and finite"));
        }
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0f64;
        for &m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        let total = *cumulative.last().unwrap();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(CoreError::invalid(format!(
                "masses sum to {total}, not 1"
            )));
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(StepDistribution { points, cumulative })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn masses(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cumulative.len());
        let mut prev = 0.0;
        for &c in &self.cumulative {
            out.push(c - prev);
            prev = c;
        }
        out
    }

    /// P(X ≤ y), right-continuous.
    pub fn cdf(&self, y: f64) -> f64 {
        // Number of points ≤ y.
        let idx = self.points.partition_point(|&p| p <= y);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// P(X < y), the left limit at y.
    pub fn cdf_left(&self, y: f64) -> f64 {
        let idx = self.points.partition_point(|&p| p < y);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        self.points
            .iter()
            .zip(self.masses())
            .map(|(&p, m)| p * m)
            .sum()
    }
}

/// The cataloged limit law for a kind's empirical value distribution.
pub fn limit_step_distribution(kind: FunctionKind) -> Result<StepDistribution> {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    match kind {
        FunctionKind::Moebius => StepDistribution::new(
            vec![-1.0, 0.0, 1.0],
            vec![3.0 / pi2, 1.0 - 6.0 / pi2, 3.0 / pi2],
        ),
        FunctionKind::Liouville => StepDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]),
        FunctionKind::PrimeIndicator => StepDistribution::new(vec![0.0], vec![1.0]),
        FunctionKind::SquarefreeIndicator => {
            StepDistribution::new(vec![0.0, 1.0], vec![1.0 - 6.0 / pi2, 6.0 / pi2])
        }
        other => Err(CoreError::NotInCatalog(format!(
            "no cataloged limit distribution for kind {other}"
        ))),
    }
}

/// Reference law for [`ks_distance`].
#[derive(Debug, Clone, Copy)]
pub enum ReferenceCdf<'a> {
    Step(&'a StepDistribution),
    StandardNormal,
}

impl ReferenceCdf<'_> {
    fn cdf(&self, y: f64) -> f64 {
        match self {
            ReferenceCdf::Step(s) => s.cdf(y),
            ReferenceCdf::StandardNormal => standard_normal_cdf(y),
        }
    }

    fn cdf_left(&self, y: f64) -> f64 {
        match self {
            ReferenceCdf::Step(s) => s.cdf_left(y),
            // Continuous law: the left limit is the value itself.
            ReferenceCdf::StandardNormal => standard_normal_cdf(y),
        }
    }

    fn jump_points(&self) -> &[f64] {
        match self {
            ReferenceCdf::Step(s) => s.points(),
            ReferenceCdf::StandardNormal => &[],
        }
    }
}

/// sup_y |F_a(y) − F_b(y)| for two step CDFs, evaluated at every jump
/// point of either law from both sides.
pub fn ks_between_steps(a: &StepDistribution, b: &StepDistribution) -> f64 {
    let mut sup = 0.0f64;
    for &y in a.points().iter().chain(b.points()) {
        sup = sup.max((a.cdf(y) - b.cdf(y)).abs());
        sup = sup.max((a.cdf_left(y) - b.cdf_left(y)).abs());
    }
    sup
}

/// Kolmogorov–Smirnov distance between an empirical law and a reference.
pub fn ks_distance(emp: &EmpiricalDistribution, reference: ReferenceCdf<'_>) -> f64 {
    let step = emp.to_step();
    let mut sup = 0.0f64;
    for &y in step.points().iter().chain(reference.jump_points()) {
        sup = sup.max((step.cdf(y) - reference.cdf(y)).abs());
        sup = sup.max((step.cdf_left(y) - reference.cdf_left(y)).abs());
    }
    sup
}
