//! The pairwise-independence statistic Δ(n) and its decay classification.
//!
//! For the first n table values, let S = Σf and T = Σf². The mean ordered
//! pairwise product is P(n) = (S² − T)/(n(n−1)), the product of means is
//! Q(n) = (S² − T)/n², and Δ(n) = P(n) − Q(n) = (S² − T)/(n²(n−1)).
//!
//! Integer-valued kinds accumulate S and T exactly in 128-bit integers, so
//! P, Q, and the closed-form Δ are each a single correctly rounded rational.
//! Catastrophic cancellation lives entirely in P − Q (the two are equal to
//! relative order 1/n), which is why the closed form is carried as its own
//! column and used for the exponent fits.

use serde::Serialize;

use crate::compensated::CompensatedSum;
use crate::error::{CoreError, Result};
use crate::fit::{fit_log_decay, PowerLawFit};
use crate::kind::FunctionKind;
use crate::table::{FunctionTable, TableValues};

/// Largest n the quadratic double-loop reference path accepts.
pub const BRUTEFORCE_MAX_N: u64 = 2000;

/// Decay-slope band edges for the descriptive verdict.
pub const SLOPE_STRICTLY_FASTER_THAN_INVERSE_N: f64 = -1.05;
pub const SLOPE_ORDER_INVERSE_N: f64 = -0.85;
pub const SLOPE_VANISHING: f64 = -0.05;

/// Growth-exponent ceilings: S(n) counted as O(n) below the first,
/// as o(n^{3/2}) below the second.
pub const GROWTH_LINEAR_MAX: f64 = 1.05;
pub const GROWTH_SUBCRITICAL_MAX: f64 = 1.45;

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// num/den reduced to lowest terms, then one f64 division. With small
/// reduced parts the result is the correctly rounded rational (e.g. the
/// constant-1 table's Δ(n) reduces to 1/n and converts to fl(1/n) exactly).
fn ratio_f64(num: i128, den: i128) -> f64 {
    debug_assert!(den > 0);
    if num == 0 {
        return 0.0;
    }
    let g = gcd_i128(num, den);
    (num / g) as f64 / (den / g) as f64
}

/// Running power sums over the first n cells.
enum Accum {
    Int { s1: i128, s2: i128 },
    Real { s1: CompensatedSum, s2: CompensatedSum },
}

impl Accum {
    fn new(values: &TableValues) -> Self {
        match values {
            TableValues::Int8(_) | TableValues::Int32(_) => Accum::Int { s1: 0, s2: 0 },
            TableValues::Float64(_) => Accum::Real {
                s1: CompensatedSum::new(),
                s2: CompensatedSum::new(),
            },
        }
    }

    fn push(&mut self, values: &TableValues, idx: usize) {
        match self {
            Accum::Int { s1, s2 } => {
                let v = values.get_i64(idx).expect("integer accumulator") as i128;
                *s1 += v;
                *s2 += v * v;
            }
            Accum::Real { s1, s2 } => {
                let v = values.get_f64(idx);
                s1.add(v);
                s2.add(v * v);
            }
        }
    }

    fn sum_f64(&self) -> f64 {
        match self {
            Accum::Int { s1, .. } => *s1 as f64,
            Accum::Real { s1, .. } => s1.value(),
        }
    }

    /// P(n) = (S² − T)/(n(n−1)).
    fn mean_pair_product(&self, n: u64) -> f64 {
        let n = n as i128;
        match self {
            Accum::Int { s1, s2 } => ratio_f64(s1 * s1 - s2, n * (n - 1)),
            Accum::Real { s1, s2 } => {
                let s = s1.value();
                (s * s - s2.value()) / (n as f64 * (n as f64 - 1.0))
            }
        }
    }

    /// Q(n) = (S² − T)/n².
    fn product_of_means(&self, n: u64) -> f64 {
        let n = n as i128;
        match self {
            Accum::Int { s1, s2 } => ratio_f64(s1 * s1 - s2, n * n),
            Accum::Real { s1, s2 } => {
                let s = s1.value();
                (s * s - s2.value()) / (n as f64 * n as f64)
            }
        }
    }

    /// Δ(n) = (S² − T)/(n²(n−1)), evaluated in one (integer kinds) or three
    /// (real kinds) rounded operations — never as the difference P − Q.
    fn delta_closed_form(&self, n: u64) -> f64 {
        let n = n as i128;
        match self {
            Accum::Int { s1, s2 } => ratio_f64(s1 * s1 - s2, n * n * (n - 1)),
            Accum::Real { s1, s2 } => {
                let s = s1.value();
                let nf = n as f64;
                // Bracketed so an integer-valued numerator that equals
                // n(n−1) cancels exactly before the final division.
                ((s * s - s2.value()) / (nf * (nf - 1.0))) / nf
            }
        }
    }
}

fn accum_prefix(table: &FunctionTable, n: u64) -> Result<Accum> {
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    let values = table.values();
    let mut acc = Accum::new(values);
    for idx in 0..n as usize {
        acc.push(values, idx);
    }
    Ok(acc)
}

/// Mean of f(i)f(j) over ordered pairs i ≠ j ≤ n, via the one-pass
/// identity Σ_{i≠j} f(i)f(j) = (Σf)² − Σf².
pub fn mean_pair_product(table: &FunctionTable, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(CoreError::invalid(
            "pair mean needs n ≥ 2 (denominator n(n−1))",
        ));
    }
    Ok(accum_prefix(table, n)?.mean_pair_product(n))
}

/// ((Σf)² − Σf²)/n², the product-of-means analogue of the pair mean.
pub fn product_of_means(table: &FunctionTable, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(CoreError::invalid("product of means needs n ≥ 1"));
    }
    Ok(accum_prefix(table, n)?.product_of_means(n))
}

/// Δ(n) by the closed form (S² − T)/(n²(n−1)).
pub fn independence_delta(table: &FunctionTable, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(CoreError::invalid("Δ(n) needs n ≥ 2"));
    }
    Ok(accum_prefix(table, n)?.delta_closed_form(n))
}

/// O(n²) reference: the literal double loop over ordered pairs i ≠ j.
/// Exact integer pair sums for integer kinds, so it must agree with
/// [`mean_pair_product`] bit-for-bit there; real kinds agree to 1e-12.
pub fn mean_pair_product_bruteforce(table: &FunctionTable, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(CoreError::invalid(
            "pair mean needs n ≥ 2 (denominator n(n−1))",
        ));
    }
    if n > BRUTEFORCE_MAX_N {
        return Err(CoreError::invalid(format!(
            "double-loop path is capped at n ≤ {BRUTEFORCE_MAX_N}, got {n}"
        )));
    }
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    let values = table.values();
    let n_us = n as usize;
    match values {
        TableValues::Int8(_) | TableValues::Int32(_) => {
            let cells: Vec<i128> = (0..n_us)
                .map(|i| values.get_i64(i).unwrap() as i128)
                .collect();
            let mut pair_sum: i128 = 0;
            for i in 0..n_us {
                for j in 0..n_us {
                    if i != j {
                        pair_sum += cells[i] * cells[j];
                    }
                }
            }
            let n = n as i128;
            Ok(ratio_f64(pair_sum, n * (n - 1)))
        }
        TableValues::Float64(v) => {
            let mut pair_sum = CompensatedSum::new();
            for i in 0..n_us {
                for j in 0..n_us {
                    if i != j {
                        pair_sum.add(v[i] * v[j]);
                    }
                }
            }
            Ok(pair_sum.value() / (n as f64 * (n as f64 - 1.0)))
        }
    }
}

/// One grid row of the Δ report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaPoint {
    pub n: u64,
    pub mean_pair_product: f64,
    pub product_of_means: f64,
    /// Stored difference of the two columns above (suffers ~n·ε relative
    /// cancellation at large n; kept because it is the literal definition).
    pub delta: f64,
    /// (S² − T)/(n²(n−1)) in one rounding chain; used for fits.
    pub delta_closed_form: f64,
    /// |Δ(n)| / (S(n)²/n³), the ratio diagnostic against the squared-sum
    /// scale; `None` when S(n) = 0.
    pub ratio_to_s2_over_n3: Option<f64>,
}

/// Δ at every grid checkpoint in a single streaming pass.
pub fn delta_grid(table: &FunctionTable, grid: &[u64]) -> Result<Vec<DeltaPoint>> {
    if grid.is_empty() {
        return Err(CoreError::invalid("grid must be nonempty"));
    }
    if grid[0] < 2 {
        return Err(CoreError::invalid("Δ(n) needs n ≥ 2"));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(CoreError::invalid("grid must be strictly increasing"));
        }
    }
    let max = *grid.last().unwrap();
    if max > table.limit() {
        return Err(CoreError::OutOfRange {
            k: max,
            limit: table.limit(),
        });
    }

    let values = table.values();
    let mut acc = Accum::new(values);
    let mut points = Vec::with_capacity(grid.len());
    let mut next = 0usize;
    for idx in 0..max as usize {
        acc.push(values, idx);
        let n = idx as u64 + 1;
        if n == grid[next] {
            let p = acc.mean_pair_product(n);
            let q = acc.product_of_means(n);
            let delta_closed = acc.delta_closed_form(n);
            let s = acc.sum_f64();
            let ratio = if s == 0.0 {
                None
            } else {
                let nf = n as f64;
                Some(delta_closed.abs() / (s * s / (nf * nf * nf)))
            };
            points.push(DeltaPoint {
                n,
                mean_pair_product: p,
                product_of_means: q,
                delta: p - q,
                delta_closed_form: delta_closed,
                ratio_to_s2_over_n3: ratio,
            });
            next += 1;
            if next == grid.len() {
                break;
            }
        }
    }
    Ok(points)
}

/// Least-squares slope of log|Δ| vs log n; Δ = 0 points are dropped and
/// counted. Errors when fewer than 3 usable points remain.
pub fn decay_exponent(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    for pair in points.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(CoreError::invalid(
                "decay grid must have strictly increasing n",
            ));
        }
    }
    fit_log_decay(points)
}

/// The paper-table verdict classes for Δ's decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayVerdict {
    #[serde(rename = "decays-like-1/n-or-faster")]
    DecaysLikeInverseNOrFaster,
    #[serde(rename = "bounded-by-C/n")]
    BoundedByCOverN,
    #[serde(rename = "vanishing")]
    Vanishing,
    #[serde(rename = "non-vanishing")]
    NonVanishing,
}

impl std::fmt::Display for DecayVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecayVerdict::DecaysLikeInverseNOrFaster => "decays-like-1/n-or-faster",
            DecayVerdict::BoundedByCOverN => "bounded-by-C/n",
            DecayVerdict::Vanishing => "vanishing",
            DecayVerdict::NonVanishing => "non-vanishing",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: DecayVerdict,
    /// Which decay guarantee the kind's traits put it under.
    pub expectation: String,
    /// Measured slope satisfies the expectation.
    pub pass: bool,
}

/// Map a measured decay slope to the descriptive verdict band.
pub fn verdict_for_slope(slope: f64) -> DecayVerdict {
    if slope <= SLOPE_STRICTLY_FASTER_THAN_INVERSE_N {
        DecayVerdict::DecaysLikeInverseNOrFaster
    } else if slope <= SLOPE_ORDER_INVERSE_N {
        DecayVerdict::BoundedByCOverN
    } else if slope <= SLOPE_VANISHING {
        DecayVerdict::Vanishing
    } else {
        DecayVerdict::NonVanishing
    }
}

/// Classify a measured Δ decay against what the summand traits promise:
/// bounded summands or same-sign summands with S(n) = O(n) ⇒ Δ = O(1/n);
/// S(n) = o(n^{3/2}) ⇒ Δ → 0; otherwise no guarantee applies.
pub fn classify(
    bounded: bool,
    same_sign: bool,
    growth_exponent: f64,
    slope: f64,
) -> Classification {
    let verdict = verdict_for_slope(slope);
    let (expectation, pass) = if bounded {
        (
            "bounded summands: Δ(n) = O(1/n), fitted slope ≤ -0.85".to_string(),
            slope <= SLOPE_ORDER_INVERSE_N,
        )
    } else if same_sign && growth_exponent <= GROWTH_LINEAR_MAX {
        (
            "same-sign summands with S(n) = O(n): Δ(n) = O(1/n), fitted slope ≤ -0.85".to_string(),
            slope <= SLOPE_ORDER_INVERSE_N,
        )
    } else if growth_exponent < GROWTH_SUBCRITICAL_MAX {
        (
            "S(n) = o(n^1.5): Δ(n) vanishes, fitted slope ≤ -0.05".to_string(),
            slope <= SLOPE_VANISHING,
        )
    } else {
        (
            "no decay guarantee applies (S grows at or above n^1.5)".to_string(),
            true,
        )
    };
    Classification {
        verdict,
        expectation,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub kind: FunctionKind,
    pub grid: Vec<u64>,
    pub mean_pair_product: Vec<f64>,
    pub product_of_means: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_closed_form: Vec<f64>,
    pub ratio_to_s2_over_n3: Vec<Option<f64>>,
    pub slope: f64,
    pub stderr: f64,
    pub fit_points_used: usize,
    pub fit_points_dropped: usize,
    /// Fitted exponent of |S(n)| + 1 (the +1 survives zero crossings).
    pub growth_exponent: f64,
    pub verdict: DecayVerdict,
    pub expectation: String,
    pub pass: bool,
    /// The mathematical claim this report measures, in plain language.
    pub claim: String,
}

/// Full Δ analysis over a checkpoint grid: per-point statistics, decay and
/// growth fits, and the classification verdict.
pub fn independence_report(table: &FunctionTable, grid: &[u64]) -> Result<IndependenceReport> {
    let points = delta_grid(table, grid)?;

    let decay_pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.n as f64, p.delta_closed_form))
        .collect();
    let fit = decay_exponent(&decay_pts)?;

    // Growth of the plain summatory to pick the applicable guarantee.
    let values = table.values();
    let mut acc = Accum::new(values);
    let mut growth_pts = Vec::with_capacity(grid.len());
    let mut next = 0usize;
    for idx in 0..*grid.last().unwrap() as usize {
        acc.push(values, idx);
        if idx as u64 + 1 == grid[next] {
            growth_pts.push((grid[next] as f64, acc.sum_f64().abs() + 1.0));
            next += 1;
            if next == grid.len() {
                break;
            }
        }
    }
    let growth = fit_log_decay(&growth_pts)?;

    let kind = table.kind();
    let class = classify(kind.bounded(), kind.same_sign(), growth.slope, fit.slope);

    Ok(IndependenceReport {
        kind,
        grid: grid.to_vec(),
        mean_pair_product: points.iter().map(|p| p.mean_pair_product).collect(),
        product_of_means: points.iter().map(|p| p.product_of_means).collect(),
        delta: points.iter().map(|p| p.delta).collect(),
        delta_closed_form: points.iter().map(|p| p.delta_closed_form).collect(),
        ratio_to_s2_over_n3: points.iter().map(|p| p.ratio_to_s2_over_n3).collect(),
        slope: fit.slope,
        stderr: fit.slope_stderr,
        fit_points_used: fit.points_used,
        fit_points_dropped: fit.points_dropped,
        growth_exponent: growth.slope,
        verdict: class.verdict,
        expectation: class.expectation,
        pass: class.pass,
        claim: "the average of f(i)f(j) over ordered pairs i≠j of indices up to n approaches \
                the product of the separate averages; Δ(n) is their gap and equals \
                ((Σf)²−Σf²)·(1/(n(n−1))−1/n²), whose decay exponent is fitted and classified"
            .to_string(),
    })
}
