//! The eight experiment drivers behind `sumfunc run`.
//!
//! Each driver acquires its table (cache-backed for sieveable kinds,
//! synthesized for seeded or series tables), computes one family of
//! statistics, writes CSV + JSON results through the run recorder, and
//! returns whether its declared expectations held. Every JSON result carries
//! a `claim` field stating, in plain language, exactly what was measured and
//! what bound it was held to.

use std::io::Write as _;
use std::time::Instant;

use serde_json::json;
use sumfunc_core::{
    alternating_series_table, asymptote_deviation, clt_report, deviation_points,
    empirical_charfun, empirical_value_distribution, independence_report, ks_distance,
    limit_step_distribution, mean_decay_exponent, moment, prefix_series, prefix_values_f64,
    product_charfun_compare, rademacher_table, standardized_partial_sums, taylor_check,
    write_standardized_csv, AsymptoteSpec, CltVerdict, CoreError, DeviationPoint, FunctionKind,
    FunctionTable, Result, SeriesSpec, StandardizedSums,
};

use crate::cache::load_or_build;
use crate::config::ExperimentConfig;
use crate::manifest::{float_cell, RunRecorder};

/// Empirical-vs-limit-law KS bound; calibrated for samples of 10^6 or more.
pub const DISTRIBUTION_KS_BOUND: f64 = 2e-3;
/// Order-2 remainder bound for ±1/0-valued summands on |t| ≤ 0.3.
pub const TAYLOR_REMAINDER_BOUND: f64 = 2e-3;
/// Looser remainder bound used by the charfun experiment's sanity check.
pub const CHARFUN_REMAINDER_BOUND: f64 = 1e-2;
/// |φ| may exceed 1 only by accumulated rounding.
pub const CHARFUN_MODULUS_SLACK: f64 = 1e-12;
/// Closed-form vs measured partial sums of the balanced series.
pub const ALTERNATING_MATCH_TOL: f64 = 1e-12;
/// Fitted decay of |S(n)/n| expected for square-root-scale fluctuations.
pub const MERTENS_SLOPE_BAND: (f64, f64) = (-0.75, -0.25);

/// Dispatch one experiment run end to end and write its manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<bool> {
    let mut rec = RunRecorder::new(&cfg.out_dir)?;
    let pass = match cfg.experiment.as_str() {
        "independence" => independence(cfg, &mut rec)?,
        "density" => density(cfg, &mut rec)?,
        "distribution" => distribution(cfg, &mut rec)?,
        "charfun" => charfun(cfg, &mut rec)?,
        "taylor" => taylor(cfg, &mut rec)?,
        "clt" => clt(cfg, &mut rec)?,
        "alternating" => alternating(cfg, &mut rec)?,
        "mertens-gap" => mertens_gap(cfg, &mut rec)?,
        other => {
            return Err(CoreError::invalid(format!(
                "unknown experiment `{other}` (valid: {})",
                crate::config::VALID_EXPERIMENTS.join(", ")
            )))
        }
    };
    let manifest = rec.finish(&cfg.echo, &cfg.experiment, pass)?;
    println!("manifest: {}", manifest.display());
    println!("result: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn sieved_table(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<FunctionTable> {
    let kind = cfg
        .kind
        .ok_or_else(|| CoreError::invalid("this experiment needs a sieveable kind"))?;
    let (table, source, secs) = load_or_build(&cfg.cache_dir, kind, cfg.limit, cfg.segment)?;
    rec.record_stage(&format!("acquire-table:{}", source.as_str()), secs);
    Ok(table)
}

fn values_up_to(table: &FunctionTable, n: u64) -> Result<Vec<f64>> {
    if n == 0 || n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    Ok((0..n as usize).map(|i| table.values().get_f64(i)).collect())
}

fn moments_up_to(table: &FunctionTable, n: u64, order: u32) -> Result<(Vec<f64>, bool)> {
    let mut values = Vec::with_capacity(order as usize);
    let mut fallback = false;
    for j in 1..=order {
        let m = moment(table, n, j)?;
        fallback |= m.floating_fallback;
        values.push(m.value);
    }
    Ok((values, fallback))
}

fn independence(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");
    let report = independence_report(&table, &cfg.grid)?;

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    writeln!(
        csv,
        "n,mean_pair_product,product_of_means,delta,delta_closed_form,ratio_to_s2_over_n3"
    )?;
    for i in 0..report.grid.len() {
        let ratio = report.ratio_to_s2_over_n3[i]
            .map(float_cell)
            .unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            report.grid[i],
            float_cell(report.mean_pair_product[i]),
            float_cell(report.product_of_means[i]),
            float_cell(report.delta[i]),
            float_cell(report.delta_closed_form[i]),
            ratio
        )?;
    }
    rec.write_bytes("independence.csv", &csv)?;
    rec.write_json("independence.json", &report)?;

    println!(
        "independence: kind={} checkpoints={} slope={:.4} verdict={} expectation-held={}",
        cfg.kind_label,
        report.grid.len(),
        report.slope,
        report.verdict,
        report.pass
    );
    Ok(report.pass)
}

/// Final-point relative-deviation bound per summand; calibrated for
/// limits of 10^4 and above (the prime count gets the crude x/log x bar).
fn density_tolerance(kind: FunctionKind) -> f64 {
    match kind {
        FunctionKind::SquarefreeIndicator | FunctionKind::DivisorCount => 1e-3,
        FunctionKind::VonMangoldt | FunctionKind::PrimeLog => 5e-3,
        FunctionKind::PrimeIndicator => 0.2,
        FunctionKind::Constant(_) => 1e-12,
        _ => 5e-3,
    }
}

struct DensitySeries {
    label: String,
    asymptote: &'static str,
    tolerance: f64,
    points: Vec<DeviationPoint>,
}

fn density(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let kind = cfg
        .kind
        .ok_or_else(|| CoreError::invalid("density needs a sieveable kind"))?;
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");

    let mut series_out: Vec<DensitySeries> = Vec::new();
    if kind == FunctionKind::Moebius {
        // Per-sign counts derived from the table: each square-free sign
        // class carries half the square-free density.
        let values = table.values();
        let (mut plus, mut minus) = (0u64, 0u64);
        let mut plus_counts = Vec::with_capacity(cfg.grid.len());
        let mut minus_counts = Vec::with_capacity(cfg.grid.len());
        let mut next = 0usize;
        for idx in 0..*cfg.grid.last().unwrap() as usize {
            match values.get_i64(idx) {
                Some(1) => plus += 1,
                Some(-1) => minus += 1,
                _ => {}
            }
            if idx as u64 + 1 == cfg.grid[next] {
                plus_counts.push(plus as f64);
                minus_counts.push(minus as f64);
                next += 1;
                if next == cfg.grid.len() {
                    break;
                }
            }
        }
        let spec = AsymptoteSpec::HalfSquarefreeDensity;
        for (label, counts) in [("moebius-plus", plus_counts), ("moebius-minus", minus_counts)] {
            series_out.push(DensitySeries {
                label: label.to_string(),
                asymptote: spec.label(),
                tolerance: density_tolerance(kind),
                points: deviation_points(&cfg.grid, &counts, spec),
            });
        }
    } else {
        let spec = AsymptoteSpec::for_kind(kind).ok_or_else(|| {
            CoreError::NotInCatalog(format!(
                "no density asymptote cataloged for kind {}; valid density kinds: \
                 squarefree, divisor-count, von-mangoldt, prime-log, prime, constant:1, moebius",
                kind
            ))
        })?;
        let sums = prefix_series(&table, &cfg.grid)?;
        let dev = asymptote_deviation(&sums, spec)?;
        series_out.push(DensitySeries {
            label: kind.slug().replace(':', "-"),
            asymptote: dev.asymptote,
            tolerance: density_tolerance(kind),
            points: dev.points,
        });
    }

    rec.stage("write-outputs");
    let mut pass = true;
    let mut summaries = Vec::new();
    for s in &series_out {
        let mut csv = Vec::new();
        writeln!(csv, "n,S,deviation,relative_deviation")?;
        for p in &s.points {
            writeln!(
                csv,
                "{},{},{},{}",
                p.n,
                float_cell(p.sum),
                float_cell(p.deviation),
                float_cell(p.relative_deviation)
            )?;
        }
        rec.write_bytes(&format!("density_{}.csv", s.label), &csv)?;

        let final_point = s.points.last().expect("grid is nonempty");
        let ok = final_point.relative_deviation.abs() <= s.tolerance;
        pass &= ok;
        println!(
            "density: series={} asymptote={} final-n={} relative-deviation={:.3e} bound={:.0e} held={}",
            s.label, s.asymptote, final_point.n, final_point.relative_deviation, s.tolerance, ok
        );
        summaries.push(json!({
            "label": s.label,
            "asymptote": s.asymptote,
            "tolerance": s.tolerance,
            "final": final_point,
            "pass": ok,
        }));
    }

    rec.write_json(
        "density.json",
        &json!({
            "kind": cfg.kind_label,
            "limit": cfg.limit,
            "series": summaries,
            "pass": pass,
            "claim": format!(
                "the summatory of `{}` tracks its comparison curve: at every checkpoint the \
                 deviation S(n) - A(n) is reported exactly, and the run passes when the final \
                 relative deviation is within {:.0e} (bounds are calibrated for limits of 1e4 \
                 and above; the prime count is held to the crude x/log x curve)",
                cfg.kind_label,
                density_tolerance(kind)
            ),
        }),
    )?;
    Ok(pass)
}

fn distribution(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");
    let dist = empirical_value_distribution(&table, cfg.n)?;
    let (ks, law_mean) = match limit_step_distribution(table.kind()) {
        Ok(law) => (
            Some(ks_distance(&dist, sumfunc_core::ReferenceCdf::Step(&law))),
            Some(law.mean()),
        ),
        Err(CoreError::NotInCatalog(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let empirical_mean = moment(&table, cfg.n, 1)?.value;

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    writeln!(csv, "value,count,frequency")?;
    let freqs = dist.frequencies();
    for i in 0..dist.support().len() {
        writeln!(
            csv,
            "{},{},{}",
            float_cell(dist.support()[i]),
            dist.counts()[i],
            float_cell(freqs[i])
        )?;
    }
    rec.write_bytes("distribution.csv", &csv)?;

    let pass = ks.map_or(true, |d| d <= DISTRIBUTION_KS_BOUND);
    rec.write_json(
        "distribution.json",
        &json!({
            "kind": cfg.kind_label,
            "n": cfg.n,
            "distinct_values": dist.support().len(),
            "empirical_mean": empirical_mean,
            "limit_law_mean": law_mean,
            "ks_to_limit_law": ks,
            "ks_bound": ks.map(|_| DISTRIBUTION_KS_BOUND),
            "pass": pass,
            "claim": format!(
                "the empirical law of `{}` over 1..n is tabulated exactly; when a limit law is \
                 cataloged for the kind, the run passes iff the KS distance to it is within \
                 {DISTRIBUTION_KS_BOUND:e} (calibrated for n of 1e6 and above); kinds without a \
                 cataloged law are measured without a bound",
                cfg.kind_label
            ),
        }),
    )?;

    match ks {
        Some(d) => println!(
            "distribution: kind={} n={} distinct={} ks={:.3e} bound={:.0e} held={}",
            cfg.kind_label,
            cfg.n,
            dist.support().len(),
            d,
            DISTRIBUTION_KS_BOUND,
            pass
        ),
        None => println!(
            "distribution: kind={} n={} distinct={} (no cataloged limit law; measurement only)",
            cfg.kind_label,
            cfg.n,
            dist.support().len()
        ),
    }
    Ok(pass)
}

fn charfun(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");
    let values = values_up_to(&table, cfg.n)?;
    let samples = empirical_charfun(&values, &cfg.t_grid)?;
    let (moments, floating_fallback) = moments_up_to(&table, cfg.n, cfg.order)?;
    let remainder = taylor_check(&samples, &moments, cfg.order)?;
    let compare = product_charfun_compare(&table, cfg.n, &cfg.t_grid)?;

    let unit_at_zero = samples
        .t_grid
        .iter()
        .zip(&samples.values)
        .filter(|(&t, _)| t == 0.0)
        .all(|(_, v)| v.re == 1.0 && v.im == 0.0);
    let max_modulus = samples
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    let modulus_ok = max_modulus <= 1.0 + CHARFUN_MODULUS_SLACK;
    let remainder_ok = remainder.max_abs_remainder <= CHARFUN_REMAINDER_BOUND;
    let pass = unit_at_zero && modulus_ok && remainder_ok;

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    remainder.write_csv(&mut csv)?;
    rec.write_bytes("charfun.csv", &csv)?;

    let mut prod_csv = Vec::new();
    writeln!(
        prod_csv,
        "t,lhs_re,lhs_im,rhs_re,rhs_im,discrepancy,t_times_mean_gap"
    )?;
    for p in &compare.points {
        writeln!(
            prod_csv,
            "{},{},{},{},{},{},{}",
            float_cell(p.t),
            float_cell(p.lhs_re),
            float_cell(p.lhs_im),
            float_cell(p.rhs_re),
            float_cell(p.rhs_im),
            float_cell(p.discrepancy),
            p.t_times_mean_gap.map(float_cell).unwrap_or_default()
        )?;
    }
    rec.write_bytes("charfun_product.csv", &prod_csv)?;

    rec.write_json(
        "charfun.json",
        &json!({
            "kind": cfg.kind_label,
            "n": cfg.n,
            "order": cfg.order,
            "moments": moments,
            "moments_used_floating_fallback": floating_fallback,
            "unit_at_zero": unit_at_zero,
            "max_modulus": max_modulus,
            "max_abs_remainder": remainder.max_abs_remainder,
            "max_remainder_ratio": remainder.max_ratio,
            "product_comparison": {
                "max_discrepancy": compare.max_discrepancy,
                "mean_gap": compare.mean_gap,
            },
            "pass": pass,
            "claim": format!(
                "φ(t) = (1/n) Σ_k≤n e^(i t f(k)) for `{}`: φ(0) must equal 1 exactly, |φ| may \
                 exceed 1 only by rounding ({CHARFUN_MODULUS_SLACK:e}), and the order-{} \
                 expansion remainder must stay within {CHARFUN_REMAINDER_BOUND:e} on the grid; \
                 the product comparison |(1/n) Σ e^(i t S(k)) - φ(t)^n| is a measurement, not a \
                 bound — the two genuinely differ for dependent summands",
                cfg.kind_label, cfg.order
            ),
        }),
    )?;

    println!(
        "charfun: kind={} n={} unit-at-zero={} max|phi|={:.12} max-remainder={:.3e} held={}",
        cfg.kind_label, cfg.n, unit_at_zero, max_modulus, remainder.max_abs_remainder, pass
    );
    Ok(pass)
}

fn taylor(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");
    let values = values_up_to(&table, cfg.n)?;
    let (moments, floating_fallback) = moments_up_to(&table, cfg.n, cfg.order)?;

    let mut levels = Vec::new();
    let mut base_csv = Vec::new();
    for (i, scale) in [1.0f64, 0.1, 0.01].iter().enumerate() {
        let grid: Vec<f64> = cfg.t_grid.iter().map(|t| t * scale).collect();
        let samples = empirical_charfun(&values, &grid)?;
        let report = taylor_check(&samples, &moments, cfg.order)?;
        if i == 0 {
            report.write_csv(&mut base_csv)?;
        }
        let max_t = grid.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        levels.push((max_t, report.max_abs_remainder, report.max_ratio));
    }

    let bound_ok = levels[0].1 <= TAYLOR_REMAINDER_BOUND;
    let shrink_ok = levels[1].2 < levels[0].2 && levels[2].2 < levels[1].2;
    let pass = bound_ok && shrink_ok;

    rec.stage("write-outputs");
    rec.write_bytes("taylor.csv", &base_csv)?;
    rec.write_json(
        "taylor.json",
        &json!({
            "kind": cfg.kind_label,
            "n": cfg.n,
            "order": cfg.order,
            "moments": moments,
            "moments_used_floating_fallback": floating_fallback,
            "levels": levels
                .iter()
                .map(|&(max_t, max_abs, max_ratio)| json!({
                    "max_abs_t": max_t,
                    "max_abs_remainder": max_abs,
                    "max_ratio": max_ratio,
                }))
                .collect::<Vec<_>>(),
            "remainder_bound": TAYLOR_REMAINDER_BOUND,
            "remainder_bound_held": bound_ok,
            "ratio_shrinks_with_grid": shrink_ok,
            "pass": pass,
            "claim": format!(
                "the order-{} expansion of the empirical characteristic function of `{}` built \
                 from its exact moments must satisfy max|r(t)| ≤ {TAYLOR_REMAINDER_BOUND:e} on \
                 the base grid (calibrated for ±1/0-valued summands, |t| ≤ 0.3, n ≥ 1e5), and \
                 max|r(t)|/|t|^order must strictly decrease as the grid is shrunk by 10x and \
                 100x — the signature of a genuine o(|t|^order) remainder",
                cfg.order, cfg.kind_label
            ),
        }),
    )?;

    println!(
        "taylor: kind={} n={} order={} max-remainder={:.3e} ratios={:.3e}>{:.3e}>{:.3e} held={}",
        cfg.kind_label, cfg.n, cfg.order, levels[0].1, levels[0].2, levels[1].2, levels[2].2, pass
    );
    Ok(pass)
}

fn clt(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = match cfg.kind {
        None => {
            let start = Instant::now();
            let t = rademacher_table(cfg.limit, cfg.seed)?;
            rec.record_stage("acquire-table:synthesized", start.elapsed().as_secs_f64());
            t
        }
        Some(_) => sieved_table(cfg, rec)?,
    };
    rec.stage("analysis");
    let report = clt_report(&table, &cfg.grid, cfg.variant, cfg.window)?;
    let final_entry = report.entries.last().expect("grid is nonempty");

    let expected = match cfg.kind {
        None => Some(CltVerdict::ConsistentWithNormal),
        Some(FunctionKind::Constant(_)) => Some(CltVerdict::Degenerate),
        Some(_) => None,
    };
    let pass = expected.map_or(true, |e| final_entry.verdict == e);

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    match standardized_partial_sums(&table, *cfg.grid.last().unwrap(), cfg.variant)? {
        StandardizedSums::Sums { z, .. } => write_standardized_csv(&z, &mut csv)?,
        StandardizedSums::Degenerate { .. } => writeln!(csv, "k,z")?,
    }
    rec.write_bytes("clt.csv", &csv)?;

    let note = match (expected, pass) {
        (Some(CltVerdict::ConsistentWithNormal), false) => Some(
            "an i.i.d. ±1 sample is the textbook normal-limit input, yet a single standardized \
             path keeps O(1) fluctuations: the trailing window of one trajectory does not \
             estimate the ensemble law, so its KS distance to the normal stays large. The \
             failure is reported as measured."
                .to_string(),
        ),
        _ => None,
    };

    rec.write_json(
        "clt.json",
        &json!({
            "report": report,
            "expected_verdict": expected,
            "measured_verdict": final_entry.verdict,
            "trailing_ks": final_entry.window.ks_to_normal,
            "note": note,
            "pass": pass,
        }),
    )?;

    println!(
        "clt: kind={} variant={} n={} verdict={} trailing-ks={:.4} expected={} held={}",
        cfg.kind_label,
        cfg.variant,
        final_entry.n,
        final_entry.verdict,
        final_entry.window.ks_to_normal,
        expected.map_or("none".to_string(), |e| e.to_string()),
        pass
    );
    Ok(pass)
}

fn alternating(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    if cfg.n < 100 {
        return Err(CoreError::invalid("alternating experiment needs n >= 100"));
    }
    let spec = SeriesSpec::new(cfg.rule_a, cfg.rule_b)?;
    rec.stage("synthesize-table");
    let table = alternating_series_table(&spec, cfg.n)?;

    rec.stage("analysis");
    let sums = prefix_values_f64(&table, cfg.n)?;
    let measured_s2 = sums[1];
    let closed_s2 = spec.partial_sum_closed_form(2);
    let balance_ok = (measured_s2 - closed_s2).abs() <= ALTERNATING_MATCH_TOL;
    let s10 = sums[9];
    let sn = *sums.last().unwrap();
    let trend_ok = sn.abs() < s10.abs();

    let clt_rep = clt_report(&table, &[cfg.n], cfg.variant, cfg.window)?;
    let entry = clt_rep.entries.last().unwrap();
    let degenerate_ok = entry.degenerate;
    let pass = balance_ok && trend_ok && degenerate_ok;

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    writeln!(csv, "k,f,S")?;
    for (i, &s) in sums.iter().enumerate() {
        writeln!(
            csv,
            "{},{},{}",
            i + 1,
            float_cell(table.values().get_f64(i)),
            float_cell(s)
        )?;
    }
    rec.write_bytes("alternating.csv", &csv)?;

    rec.write_json(
        "alternating.json",
        &json!({
            "positive_rule": spec.positive(),
            "negative_rule": spec.negative(),
            "positive_total": spec.positive_sum(),
            "n": cfg.n,
            "measured_s2": measured_s2,
            "closed_form_s2": closed_s2,
            "balance_tolerance": ALTERNATING_MATCH_TOL,
            "s10_abs": s10.abs(),
            "sn_abs": sn.abs(),
            "window": entry.window,
            "degenerate": entry.degenerate,
            "pass": pass,
            "construction_note": "the construction forces S(n) → 0 while individual terms stay \
                nonzero, so the standardized partial sums concentrate at a point mass rather \
                than spreading toward a nondegenerate normal law; the degeneracy flag records \
                that tension instead of resolving it",
            "claim": format!(
                "two opposite-sign absolutely convergent term rules with totals canceling to \
                 {:e} are interleaved; S(2) must match the closed form within \
                 {ALTERNATING_MATCH_TOL:e}, |S(n)| must fall below |S(10)|, and the trailing \
                 window of the standardized sums must be flagged degenerate",
                sumfunc_core::series::BALANCE_RELATIVE_TOL
            ),
        }),
    )?;

    println!(
        "alternating: n={} |S(2)-closed|={:.3e} |S(10)|={:.3e} |S(n)|={:.3e} degenerate={} held={}",
        cfg.n,
        (measured_s2 - closed_s2).abs(),
        s10.abs(),
        sn.abs(),
        entry.degenerate,
        pass
    );
    Ok(pass)
}

fn mertens_gap(cfg: &ExperimentConfig, rec: &mut RunRecorder) -> Result<bool> {
    let table = sieved_table(cfg, rec)?;
    rec.stage("analysis");
    let (reference, reference_source) = match limit_step_distribution(table.kind()) {
        Ok(law) => (law.mean(), "cataloged-limit-law"),
        Err(CoreError::NotInCatalog(_)) => {
            let series = prefix_series(&table, &cfg.grid)?;
            let i = series.len() - 1;
            (
                series.sum_f64(i) / series.checkpoints()[i] as f64,
                "final-sample-mean",
            )
        }
        Err(e) => return Err(e),
    };
    let report = mean_decay_exponent(&table, &cfg.grid, reference)?;
    let in_band =
        report.fit.slope > MERTENS_SLOPE_BAND.0 && report.fit.slope < MERTENS_SLOPE_BAND.1;
    let pass = in_band && !report.satisfied;

    rec.stage("write-outputs");
    let mut csv = Vec::new();
    writeln!(csv, "n,running_mean,gap")?;
    for p in &report.points {
        writeln!(
            csv,
            "{},{},{}",
            p.n,
            float_cell(p.running_mean),
            float_cell(p.gap)
        )?;
    }
    rec.write_bytes("mertens_gap.csv", &csv)?;

    rec.write_json(
        "mertens_gap.json",
        &json!({
            "kind": cfg.kind_label,
            "reference_source": reference_source,
            "report": report,
            "slope_band": MERTENS_SLOPE_BAND,
            "slope_in_band": in_band,
            "pass": pass,
            "claim": format!(
                "|S(n)/n - m| for `{}` (m from the {reference_source}) is fitted to a power of \
                 n; square-root-scale fluctuations of the summatory put the slope inside \
                 ({}, {}), which violates the 1/n mean-decay a nondegenerate normal limit for \
                 the standardized sums would require — the run passes when the violation is \
                 observed and stated in the verdict",
                cfg.kind_label, MERTENS_SLOPE_BAND.0, MERTENS_SLOPE_BAND.1
            ),
        }),
    )?;

    println!(
        "mertens-gap: kind={} slope={:.4} band=({},{}) in-band={} verdict=\"{}\" held={}",
        cfg.kind_label,
        report.fit.slope,
        MERTENS_SLOPE_BAND.0,
        MERTENS_SLOPE_BAND.1,
        in_band,
        report.verdict,
        pass
    );
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config_text, ExperimentConfig};
    use std::path::Path;

    fn run_with(experiment: &str, config_text: &str, out: &Path) -> (bool, serde_json::Value) {
        let map = parse_config_text(config_text).unwrap();
        let cfg = ExperimentConfig::resolve(experiment, map, Some(out.to_path_buf())).unwrap();
        let pass = run_experiment(&cfg).unwrap();
        let json_name = format!("{}.json", experiment.replace('-', "_"));
        let text = std::fs::read_to_string(out.join(json_name)).unwrap();
        (pass, serde_json::from_str(&text).unwrap())
    }

    #[test]
    fn independence_run_writes_report_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with(
            "independence",
            "limit = 20000\ngrid = log:100:20000:5",
            dir.path(),
        );
        assert!(pass);
        assert_eq!(json["kind"], "moebius");
        assert!(json["claim"].as_str().unwrap().len() > 40);
        let csv = std::fs::read_to_string(dir.path().join("independence.csv")).unwrap();
        assert!(csv.starts_with("n,mean_pair_product"));
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("run_manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["pass"], true);
        assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn density_squarefree_holds_its_bound() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("density", "limit = 100000", dir.path());
        assert!(pass);
        assert_eq!(json["series"][0]["asymptote"], "6x/pi^2");
        assert!(dir.path().join("density_squarefree.csv").exists());
    }

    #[test]
    fn density_moebius_emits_both_sign_classes() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("density", "kind = moebius\nlimit = 100000", dir.path());
        assert!(pass);
        assert_eq!(json["series"].as_array().unwrap().len(), 2);
        assert!(dir.path().join("density_moebius-plus.csv").exists());
        assert!(dir.path().join("density_moebius-minus.csv").exists());
    }

    #[test]
    fn density_rejects_uncataloged_kind() {
        let dir = tempfile::tempdir().unwrap();
        let map = parse_config_text("kind = liouville\nlimit = 1000").unwrap();
        let cfg =
            ExperimentConfig::resolve("density", map, Some(dir.path().to_path_buf())).unwrap();
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err, CoreError::NotInCatalog(_)), "{err}");
    }

    #[test]
    fn distribution_with_and_without_limit_law() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("distribution", "limit = 100000", dir.path());
        assert!(pass);
        assert!(json["ks_to_limit_law"].as_f64().unwrap() < 2e-3);

        let dir2 = tempfile::tempdir().unwrap();
        let (pass2, json2) = run_with(
            "distribution",
            "kind = divisor-count\nlimit = 50000",
            dir2.path(),
        );
        assert!(pass2);
        assert!(json2["ks_to_limit_law"].is_null());
    }

    #[test]
    fn charfun_checks_hold_for_liouville() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("charfun", "limit = 50000", dir.path());
        assert!(pass);
        assert_eq!(json["unit_at_zero"], true);
        assert!(json["max_abs_remainder"].as_f64().unwrap() < 1e-2);
        assert!(dir.path().join("charfun_product.csv").exists());
    }

    #[test]
    fn taylor_ratio_shrinks_across_nested_grids() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("taylor", "limit = 100000", dir.path());
        assert!(pass, "{json}");
        let levels = json["levels"].as_array().unwrap();
        assert_eq!(levels.len(), 3);
        let r0 = levels[0]["max_ratio"].as_f64().unwrap();
        let r2 = levels[2]["max_ratio"].as_f64().unwrap();
        assert!(r2 < r0);
    }

    #[test]
    fn clt_constant_kind_is_degenerate_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("clt", "kind = constant:2\nlimit = 5000", dir.path());
        assert!(pass);
        assert_eq!(json["measured_verdict"], "degenerate");
        let csv = std::fs::read_to_string(dir.path().join("clt.csv")).unwrap();
        assert_eq!(csv, "k,z\n");
    }

    #[test]
    fn clt_rademacher_declares_the_normal_expectation() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("clt", "limit = 20000\nseed = 5", dir.path());
        assert_eq!(json["expected_verdict"], "consistent-with-normal");
        let consistent = json["measured_verdict"] == "consistent-with-normal";
        assert_eq!(pass, consistent);
        if !pass {
            assert!(json["note"].as_str().unwrap().contains("reported as measured"));
        }
    }

    #[test]
    fn alternating_canonical_run_passes() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with("alternating", "n = 2000", dir.path());
        assert!(pass, "{json}");
        assert_eq!(json["degenerate"], true);
        assert!(json["construction_note"]
            .as_str()
            .unwrap()
            .contains("point mass"));
        let sn = json["sn_abs"].as_f64().unwrap();
        let s10 = json["s10_abs"].as_f64().unwrap();
        assert!(sn < s10);
    }

    #[test]
    fn mertens_gap_slope_sits_in_the_square_root_band() {
        let dir = tempfile::tempdir().unwrap();
        let (pass, json) = run_with(
            "mertens-gap",
            "limit = 1000000\ngrid = log:1000:1000000:10",
            dir.path(),
        );
        assert!(pass, "{json}");
        assert_eq!(json["reference_source"], "cataloged-limit-law");
        let slope = json["report"]["fit"]["slope"].as_f64().unwrap();
        assert!(slope > -0.75 && slope < -0.25, "slope {slope}");
        assert!(json["report"]["verdict"].as_str().unwrap().contains("fails"));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let run_into = |sub: &str| {
            let out = dir.path().join(sub);
            let map =
                parse_config_text("limit = 20000\ngrid = log:100:20000:5\nseed = 11").unwrap();
            let cfg = ExperimentConfig::resolve("independence", map, Some(out.clone())).unwrap();
            run_experiment(&cfg).unwrap();
            (
                std::fs::read(out.join("independence.json")).unwrap(),
                std::fs::read(out.join("independence.csv")).unwrap(),
            )
        };
        let first = run_into("a");
        let second = run_into("b");
        assert_eq!(first.0, second.0);
        assert_eq!(first.1, second.1);
    }
}
