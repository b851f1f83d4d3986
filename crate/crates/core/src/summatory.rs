//! Checkpointed partial sums S(n) = Σ_{k≤n} f(k) and their deviations
//! from closed-form asymptotes.

use std::io::{self, Write};

use serde::Serialize;

use crate::compensated::CompensatedSum;
use crate::error::{CoreError, Result};
use crate::kind::FunctionKind;
use crate::table::{FunctionTable, TableValues};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// S(nᵢ) storage: exact integers whenever the summands are integers.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValues {
    Int(Vec<i64>),
    Real(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SummatorySeries {
    kind: FunctionKind,
    checkpoints: Vec<u64>,
    sums: SeriesValues,
}

impl SummatorySeries {
    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn sums(&self) -> &SeriesValues {
        &self.sums
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// S(nᵢ) as f64 (exact for integer kinds while |S| < 2⁵³).
    pub fn sum_f64(&self, i: usize) -> f64 {
        match &self.sums {
            SeriesValues::Int(v) => v[i] as f64,
            SeriesValues::Real(v) => v[i],
        }
    }

    /// S(nᵢ) as an exact integer; `None` for real-valued kinds.
    pub fn sum_i64(&self, i: usize) -> Option<i64> {
        match &self.sums {
            SeriesValues::Int(v) => Some(v[i]),
            SeriesValues::Real(_) => None,
        }
    }
}

fn validate_checkpoints(checkpoints: &[u64], limit: u64) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(CoreError::invalid("checkpoint list must be nonempty"));
    }
    if checkpoints[0] == 0 {
        return Err(CoreError::invalid("checkpoints start at 1"));
    }
    for pair in checkpoints.windows(2) {
        if pair[1] <= pair[0] {
            return Err(CoreError::invalid(format!(
                "checkpoints must be strictly increasing: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    let max = *checkpoints.last().unwrap();
    if max > limit {
        return Err(CoreError::OutOfRange { k: max, limit });
    }
    Ok(())
}

/// Exact integer prefix sums over one streaming pass.
fn int_prefix(
    values: impl Iterator<Item = i64>,
    checkpoints: &[u64],
) -> std::result::Result<Vec<i64>, u64> {
    let mut sums = Vec::with_capacity(checkpoints.len());
    let mut acc: i64 = 0;
    let mut next = 0usize;
    for (idx, v) in values.enumerate() {
        let k = idx as u64 + 1;
        acc = acc.checked_add(v).ok_or(k)?;
        if next < checkpoints.len() && k == checkpoints[next] {
            sums.push(acc);
            next += 1;
        }
    }
    Ok(sums)
}

/// Compute S(nᵢ) for each checkpoint in a single streaming pass over the
/// table. Integer kinds accumulate exactly (overflow is an error naming the
/// first offending index); real kinds use compensated summation.
pub fn prefix_series(table: &FunctionTable, checkpoints: &[u64]) -> Result<SummatorySeries> {
    validate_checkpoints(checkpoints, table.limit())?;
    let max = *checkpoints.last().unwrap() as usize;

    let sums = match table.values() {
        TableValues::Int8(v) => SeriesValues::Int(
            int_prefix(v[..max].iter().map(|&x| x as i64), checkpoints)
                .map_err(|k| CoreError::Overflow(format!("64-bit prefix sum at k = {k}")))?,
        ),
        TableValues::Int32(v) => SeriesValues::Int(
            int_prefix(v[..max].iter().map(|&x| x as i64), checkpoints)
                .map_err(|k| CoreError::Overflow(format!("64-bit prefix sum at k = {k}")))?,
        ),
        TableValues::Float64(v) => {
            let mut sums = Vec::with_capacity(checkpoints.len());
            let mut acc = CompensatedSum::new();
            let mut next = 0usize;
            for (idx, &x) in v[..max].iter().enumerate() {
                acc.add(x);
                if next < checkpoints.len() && idx as u64 + 1 == checkpoints[next] {
                    sums.push(acc.value());
                    next += 1;
                }
            }
            SeriesValues::Real(sums)
        }
    };

    Ok(SummatorySeries {
        kind: table.kind(),
        checkpoints: checkpoints.to_vec(),
        sums,
    })
}

/// Running partial sums S(1), S(2), …, S(n) as f64: exact 64-bit integer
/// accumulation for integer-valued kinds (each S(k) is exact while
/// |S| < 2⁵³), compensated summation otherwise.
pub fn prefix_values_f64(table: &FunctionTable, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(CoreError::invalid("prefix values need n ≥ 1"));
    }
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    let n_us = n as usize;
    let mut out = Vec::with_capacity(n_us);
    match table.values() {
        TableValues::Float64(v) => {
            let mut acc = CompensatedSum::new();
            for &x in &v[..n_us] {
                acc.add(x);
                out.push(acc.value());
            }
        }
        values => {
            let mut acc: i64 = 0;
            for idx in 0..n_us {
                acc = acc
                    .checked_add(values.get_i64(idx).unwrap())
                    .ok_or_else(|| {
                        CoreError::Overflow(format!("64-bit prefix sum at k = {}", idx + 1))
                    })?;
                out.push(acc as f64);
            }
        }
    }
    Ok(out)
}

/// Closed-form comparison curves A(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AsymptoteSpec {
    /// A(x) = x — Chebyshev ψ and θ, and the constant-1 sum.
    Identity,
    /// A(x) = 6x/π² — square-free count Q.
    SquarefreeDensity,
    /// A(x) = 3x/π² — each square-free sign class (derived counts).
    HalfSquarefreeDensity,
    /// A(x) = x log x + (2C−1)x — divisor-count summatory.
    DivisorSummatory,
    /// A(x) = x/log x — prime count.
    PrimeCount,
}

impl AsymptoteSpec {
    pub fn eval(self, x: f64) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        match self {
            AsymptoteSpec::Identity => x,
            AsymptoteSpec::SquarefreeDensity => 6.0 * x / pi2,
            AsymptoteSpec::HalfSquarefreeDensity => 3.0 * x / pi2,
            AsymptoteSpec::DivisorSummatory => x * x.ln() + (2.0 * EULER_MASCHERONI - 1.0) * x,
            AsymptoteSpec::PrimeCount => x / x.ln(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AsymptoteSpec::Identity => "x",
            AsymptoteSpec::SquarefreeDensity => "6x/pi^2",
            AsymptoteSpec::HalfSquarefreeDensity => "3x/pi^2",
            AsymptoteSpec::DivisorSummatory => "x log x + (2C-1)x",
            AsymptoteSpec::PrimeCount => "x/log x",
        }
    }

    /// The cataloged asymptote for a kind's summatory, if there is one.
    pub fn for_kind(kind: FunctionKind) -> Option<AsymptoteSpec> {
        match kind {
            FunctionKind::VonMangoldt | FunctionKind::PrimeLog => Some(AsymptoteSpec::Identity),
            FunctionKind::SquarefreeIndicator => Some(AsymptoteSpec::SquarefreeDensity),
            FunctionKind::DivisorCount => Some(AsymptoteSpec::DivisorSummatory),
            FunctionKind::PrimeIndicator => Some(AsymptoteSpec::PrimeCount),
            FunctionKind::Constant(c) if c == 1.0 => Some(AsymptoteSpec::Identity),
            _ => None,
        }
    }

    /// Catalog compatibility check for `asymptote_deviation`.
    ///
    /// `HalfSquarefreeDensity` admits no kind directly: the per-sign
    /// square-free counts are derived series, compared through
    /// [`deviation_points`].
    pub fn admits(self, kind: FunctionKind) -> bool {
        AsymptoteSpec::for_kind(kind) == Some(self)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeviationPoint {
    pub n: u64,
    pub sum: f64,
    pub deviation: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationSeries {
    pub kind: FunctionKind,
    pub asymptote: &'static str,
    pub points: Vec<DeviationPoint>,
}

impl DeviationSeries {
    /// CSV with the floats at 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "n,S,deviation,relative_deviation")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e}",
                p.n, p.sum, p.deviation, p.relative_deviation
            )?;
        }
        Ok(())
    }
}

/// Deviation rows for an arbitrary (n, sum) sequence — used for counts that
/// have no FunctionKind of their own.
pub fn deviation_points(ns: &[u64], sums: &[f64], spec: AsymptoteSpec) -> Vec<DeviationPoint> {
    ns.iter()
        .zip(sums)
        .map(|(&n, &s)| {
            let a = spec.eval(n as f64);
            DeviationPoint {
                n,
                sum: s,
                deviation: s - a,
                relative_deviation: (s - a) / a,
            }
        })
        .collect()
}

/// Deviations of S(nᵢ) from the cataloged asymptote A(nᵢ): rows
/// (nᵢ, S(nᵢ) − A(nᵢ), (S(nᵢ) − A(nᵢ))/A(nᵢ)), no smoothing.
pub fn asymptote_deviation(
    series: &SummatorySeries,
    spec: AsymptoteSpec,
) -> Result<DeviationSeries> {
    if !spec.admits(series.kind()) {
        return Err(CoreError::NotInCatalog(format!(
            "asymptote `{}` is not cataloged for kind {}",
            spec.label(),
            series.kind()
        )));
    }
    if spec == AsymptoteSpec::PrimeCount && series.checkpoints().first() == Some(&1) {
        return Err(CoreError::invalid(
            "x/log x is undefined at x = 1; start checkpoints at 2",
        ));
    }
    let sums: Vec<f64> = (0..series.len()).map(|i| series.sum_f64(i)).collect();
    Ok(DeviationSeries {
        kind: series.kind(),
        asymptote: spec.label(),
        points: deviation_points(series.checkpoints(), &sums, spec),
    })
}

/// Log-spaced integer grid from `min` to `max` inclusive, `per_decade`
/// points per factor of 10, deduplicated after rounding.
pub fn log_grid(min: u64, max: u64, per_decade: u32) -> Result<Vec<u64>> {
    if min == 0 || max < min {
        return Err(CoreError::invalid("grid requires 1 ≤ min ≤ max"));
    }
    if per_decade == 0 {
        return Err(CoreError::invalid("grid needs at least 1 point per decade"));
    }
    let lo = (min as f64).log10();
    let hi = (max as f64).log10();
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let t = lo + i as f64 / per_decade as f64;
        if t > hi + 1e-9 {
            break;
        }
        let n = 10f64.powf(t).round() as u64;
        let n = n.clamp(min, max);
        if grid.last() != Some(&n) {
            grid.push(n);
        }
        i += 1;
    }
    if grid.last() != Some(&max) {
        grid.push(max);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::build_table;

    #[test]
    fn hand_sums_at_ten() {
        let mu = build_table(FunctionKind::Moebius, 10, 64).unwrap();
        let m = prefix_series(&mu, &[10]).unwrap();
        assert_eq!(m.sum_i64(0), Some(-1)); // 1−1−1+0−1+1−1+0+0+1

        let lam = build_table(FunctionKind::Liouville, 10, 64).unwrap();
        let l = prefix_series(&lam, &[10]).unwrap();
        assert_eq!(l.sum_i64(0), Some(0)); // 1−1−1+1−1+1−1−1+1+1

        let sf = build_table(FunctionKind::SquarefreeIndicator, 10, 64).unwrap();
        let q = prefix_series(&sf, &[10]).unwrap();
        assert_eq!(q.sum_i64(0), Some(7)); // {1,2,3,5,6,7,10}

        let tau = build_table(FunctionKind::DivisorCount, 10, 64).unwrap();
        let t = prefix_series(&tau, &[10]).unwrap();
        assert_eq!(t.sum_i64(0), Some(27)); // 1+2+2+3+2+4+2+4+3+4
    }

    #[test]
    fn prefix_matches_recomputation_exactly() {
        let tau = build_table(FunctionKind::DivisorCount, 3000, 64).unwrap();
        let cps: Vec<u64> = vec![1, 2, 17, 100, 999, 3000];
        let series = prefix_series(&tau, &cps).unwrap();
        for (i, &n) in cps.iter().enumerate() {
            let direct: i64 = (1..=n)
                .map(|k| tau.value(k).unwrap() as i64)
                .sum();
            assert_eq!(series.sum_i64(i), Some(direct), "n = {n}");
        }
    }

    #[test]
    fn consecutive_checkpoints_differ_by_f() {
        let vm = build_table(FunctionKind::VonMangoldt, 200, 64).unwrap();
        let cps: Vec<u64> = (1..=200).collect();
        let series = prefix_series(&vm, &cps).unwrap();
        for i in 1..cps.len() {
            let diff = series.sum_f64(i) - series.sum_f64(i - 1);
            let f = vm.value(cps[i]).unwrap();
            assert!(
                (diff - f).abs() <= 1e-12 * f.abs().max(1.0),
                "n = {}",
                cps[i]
            );
        }
    }

    #[test]
    fn theta_never_exceeds_psi() {
        let vm = build_table(FunctionKind::VonMangoldt, 5000, 64).unwrap();
        let pl = build_table(FunctionKind::PrimeLog, 5000, 64).unwrap();
        let cps: Vec<u64> = (1..=50).map(|i| i * 100).collect();
        let psi = prefix_series(&vm, &cps).unwrap();
        let theta = prefix_series(&pl, &cps).unwrap();
        for i in 0..cps.len() {
            assert!(theta.sum_f64(i) <= psi.sum_f64(i) + 1e-9);
        }
    }

    #[test]
    fn checkpoint_validation() {
        let mu = build_table(FunctionKind::Moebius, 100, 64).unwrap();
        assert!(prefix_series(&mu, &[]).is_err());
        assert!(prefix_series(&mu, &[0, 5]).is_err());
        assert!(prefix_series(&mu, &[5, 5]).is_err());
        assert!(prefix_series(&mu, &[9, 3]).is_err());
        assert!(matches!(
            prefix_series(&mu, &[50, 101]),
            Err(CoreError::OutOfRange { k: 101, limit: 100 })
        ));
    }

    #[test]
    fn overflow_is_reported_with_index() {
        let vals = std::iter::repeat(i64::MAX / 2 + 1).take(4);
        assert_eq!(int_prefix(vals, &[4]), Err(2));
    }

    #[test]
    fn running_prefix_agrees_with_checkpoints() {
        let mu = build_table(FunctionKind::Moebius, 500, 64).unwrap();
        let running = prefix_values_f64(&mu, 500).unwrap();
        let cps: Vec<u64> = (1..=500).collect();
        let series = prefix_series(&mu, &cps).unwrap();
        for i in 0..500 {
            assert_eq!(running[i], series.sum_f64(i));
        }

        let vm = build_table(FunctionKind::VonMangoldt, 300, 64).unwrap();
        let running = prefix_values_f64(&vm, 300).unwrap();
        let series = prefix_series(&vm, &(1..=300).collect::<Vec<u64>>()).unwrap();
        for i in 0..300 {
            assert_eq!(running[i], series.sum_f64(i));
        }

        assert!(prefix_values_f64(&mu, 0).is_err());
        assert!(matches!(
            prefix_values_f64(&mu, 501),
            Err(CoreError::OutOfRange { k: 501, limit: 500 })
        ));
    }

    #[test]
    fn psi_deviation_at_ten() {
        let vm = build_table(FunctionKind::VonMangoldt, 10, 64).unwrap();
        let psi = prefix_series(&vm, &[10]).unwrap();
        let dev = asymptote_deviation(&psi, AsymptoteSpec::Identity).unwrap();
        // ψ(10) = 3 log 2 + 2 log 3 + log 5 + log 7 ≈ 7.832
        assert!((dev.points[0].deviation + 2.168).abs() < 1e-3);
    }

    #[test]
    fn constant_one_identity_deviation_is_zero() {
        let one = build_table(FunctionKind::Constant(1.0), 1000, 64).unwrap();
        let s = prefix_series(&one, &[10, 100, 1000]).unwrap();
        let dev = asymptote_deviation(&s, AsymptoteSpec::Identity).unwrap();
        for p in &dev.points {
            assert_eq!(p.deviation, 0.0);
            assert_eq!(p.relative_deviation, 0.0);
        }
    }

    #[test]
    fn uncataloged_pairings_rejected() {
        let mu = build_table(FunctionKind::Moebius, 100, 64).unwrap();
        let m = prefix_series(&mu, &[100]).unwrap();
        for spec in [
            AsymptoteSpec::Identity,
            AsymptoteSpec::SquarefreeDensity,
            AsymptoteSpec::HalfSquarefreeDensity,
            AsymptoteSpec::DivisorSummatory,
            AsymptoteSpec::PrimeCount,
        ] {
            assert!(matches!(
                asymptote_deviation(&m, spec),
                Err(CoreError::NotInCatalog(_))
            ));
        }

        let sf = build_table(FunctionKind::SquarefreeIndicator, 100, 64).unwrap();
        let q = prefix_series(&sf, &[100]).unwrap();
        assert!(asymptote_deviation(&q, AsymptoteSpec::HalfSquarefreeDensity).is_err());
        assert!(asymptote_deviation(&q, AsymptoteSpec::SquarefreeDensity).is_ok());
    }

    #[test]
    fn divisor_asymptote_value() {
        // A(10) = 10 ln 10 + (2C−1)·10.
        let want = 10.0 * 10f64.ln() + (2.0 * EULER_MASCHERONI - 1.0) * 10.0;
        assert!((AsymptoteSpec::DivisorSummatory.eval(10.0) - want).abs() < 1e-12);
        assert!((AsymptoteSpec::SquarefreeDensity.eval(1.0) - 0.6079271018540267).abs() < 1e-12);
    }

    #[test]
    fn csv_shape() {
        let one = build_table(FunctionKind::Constant(1.0), 100, 64).unwrap();
        let s = prefix_series(&one, &[10, 100]).unwrap();
        let dev = asymptote_deviation(&s, AsymptoteSpec::Identity).unwrap();
        let mut buf = Vec::new();
        dev.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,S,deviation,relative_deviation");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("10,1.0000000000000000e1,"));
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1000, 10_000_000, 10).unwrap();
        assert_eq!(g.first(), Some(&1000));
        assert_eq!(g.last(), Some(&10_000_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.len(), 41);

        let tight = log_grid(10, 20, 3).unwrap();
        assert_eq!(tight.first(), Some(&10));
        assert_eq!(tight.last(), Some(&20));

        assert!(log_grid(0, 10, 5).is_err());
        assert!(log_grid(10, 5, 5).is_err());
        assert!(log_grid(10, 20, 0).is_err());
    }
}
