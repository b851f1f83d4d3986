//! Acceptance gate: one test per numbered criterion, each printing a single
//! `criterion NN: PASS/FAIL` line (visible with `--nocapture`, and always on
//! failure) before asserting. Expectations that the measurements genuinely
//! refuse are asserted as stated and allowed to fail loudly rather than be
//! weakened.

use std::sync::LazyLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumfunc::config::{parse_config_text, ExperimentConfig};
use sumfunc::experiments::run_experiment;
use sumfunc::linear_t_grid;
use sumfunc_core::{
    alternating_series_table, build_table, clt_report, decay_exponent, delta_grid,
    empirical_charfun, empirical_value_distribution, encode_table, independence_delta,
    ks_distance, limit_step_distribution, log_grid, mean_decay_exponent, mean_pair_product,
    mean_pair_product_bruteforce, moment, normality_report, prefix_series, product_of_means,
    rademacher_table, read_table, standard_normal_cdf, taylor_check, verify_table, write_table,
    CltVerdict, EmpiricalDistribution, FunctionKind, FunctionTable, NormalizationVariant,
    ReferenceCdf, SeriesSpec, TermRule, DEFAULT_SEGMENT_SIZE, KS_NORMAL_BOUND,
};

const TEN_MILLION: u64 = 10_000_000;

fn sieve(kind: FunctionKind) -> FunctionTable {
    build_table(kind, TEN_MILLION, DEFAULT_SEGMENT_SIZE).expect("sieve to 1e7")
}

static MU7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::Moebius));
static LAM7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::Liouville));
static TAU7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::DivisorCount));
static SF7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::SquarefreeIndicator));
static PRIME7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::PrimeIndicator));
static VM7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::VonMangoldt));
static PLOG7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::PrimeLog));
static ONE7: LazyLock<FunctionTable> = LazyLock::new(|| sieve(FunctionKind::Constant(1.0)));

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:02}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion:02} failed: {detail}");
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).abs();
    d == 0.0 || d <= tol * a.abs().max(b.abs())
}

#[test]
fn criterion_01_sieves_match_the_factorization_oracle() {
    let start = Instant::now();
    let tables: [&FunctionTable; 8] = [
        &MU7, &LAM7, &SF7, &PRIME7, &TAU7, &VM7, &PLOG7, &ONE7,
    ];
    let mut mismatches = 0usize;
    for table in tables {
        let rep = verify_table(table, 100_000, 10_000, 17).expect("oracle verification");
        mismatches += rep.mismatches.len();
    }
    report(
        1,
        mismatches == 0,
        &format!(
            "8 kinds, exhaustive k <= 1e5 plus 1e4 sampled k <= 1e7 each, {mismatches} mismatches, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_pair_mean_identity_matches_the_double_loop() {
    let kinds = [
        FunctionKind::Moebius,
        FunctionKind::Liouville,
        FunctionKind::DivisorCount,
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for kind in kinds {
        let table = build_table(kind, 2000, DEFAULT_SEGMENT_SIZE).unwrap();
        for n in [10u64, 100, 500, 2000] {
            let brute = mean_pair_product_bruteforce(&table, n).unwrap();
            let fast = mean_pair_product(&table, n).unwrap();
            ok &= rel_close(brute, fast, 1e-12);
            worst = worst.max((brute - fast).abs() / brute.abs().max(fast.abs()).max(1e-300));

            let stored = fast - product_of_means(&table, n).unwrap();
            let closed = independence_delta(&table, n).unwrap();
            ok &= rel_close(stored, closed, 1e-12);
        }
    }
    report(
        2,
        ok,
        &format!("mu/lambda/tau at n in {{10,100,500,2000}}, worst relative gap {worst:.2e}"),
    );
}

#[test]
fn criterion_03_delta_decay_exponent_is_minus_two() {
    let grid = log_grid(1000, TEN_MILLION, 10).unwrap();
    let mut detail = String::new();
    let mut ok = true;
    for (name, table) in [("mu", &*MU7), ("lambda", &*LAM7)] {
        let points = delta_grid(table, &grid).unwrap();
        let pts: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (p.n as f64, p.delta_closed_form))
            .collect();
        let fit = decay_exponent(&pts).unwrap();
        ok &= (fit.slope + 2.0).abs() <= 0.15;
        detail.push_str(&format!("{name} slope {:.4}; ", fit.slope));
    }
    report(3, ok, &format!("{detail}target -2.0 +/- 0.15"));
}

#[test]
fn criterion_04_constant_one_delta_is_exactly_one_over_n() {
    let grid = log_grid(1000, TEN_MILLION, 10).unwrap();
    let points = delta_grid(&ONE7, &grid).unwrap();
    let exact = points
        .iter()
        .all(|p| p.delta_closed_form == 1.0 / (p.n as f64));
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.n as f64, p.delta_closed_form))
        .collect();
    let fit = decay_exponent(&pts).unwrap();
    let slope_ok = (fit.slope + 1.0).abs() <= 1e-9;
    report(
        4,
        exact && slope_ok,
        &format!(
            "delta == 1/n bitwise on all {} checkpoints: {exact}; slope {:.12}",
            points.len(),
            fit.slope
        ),
    );
}

#[test]
fn criterion_05_divisor_count_delta_vanishes_slowly() {
    let points = delta_grid(&TAU7, &[100, 10_000, TEN_MILLION]).unwrap();
    let d2 = points[0].delta_closed_form.abs();
    let d4 = points[1].delta_closed_form.abs();
    let d7 = points[2].delta_closed_form.abs();
    let ok = d7 < d4 && d4 < d2 && d7 < 1e-3;
    report(
        5,
        ok,
        &format!("|delta|: 1e2 -> {d2:.3e}, 1e4 -> {d4:.3e}, 1e7 -> {d7:.3e} (final bound 1e-3)"),
    );
}

#[test]
fn criterion_06_densities_hold_at_ten_million() {
    let nf = TEN_MILLION as f64;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let three_over = 3.0 / pi2;
    let six_over = 6.0 / pi2;

    let q = prefix_series(&SF7, &[TEN_MILLION]).unwrap().sum_f64(0);
    let q_dev = (q / nf - six_over).abs();

    let mu_dist = empirical_value_distribution(&MU7, TEN_MILLION).unwrap();
    let mu_devs = [
        (mu_dist.frequency_of(1.0) - three_over).abs(),
        (mu_dist.frequency_of(0.0) - (1.0 - six_over)).abs(),
        (mu_dist.frequency_of(-1.0) - three_over).abs(),
    ];

    let lam_dist = empirical_value_distribution(&LAM7, TEN_MILLION).unwrap();
    let lam_devs = [
        (lam_dist.frequency_of(1.0) - 0.5).abs(),
        (lam_dist.frequency_of(-1.0) - 0.5).abs(),
    ];

    let psi = prefix_series(&VM7, &[TEN_MILLION]).unwrap().sum_f64(0);
    let theta = prefix_series(&PLOG7, &[TEN_MILLION]).unwrap().sum_f64(0);
    let psi_dev = (psi / nf - 1.0).abs();
    let theta_dev = (theta / nf - 1.0).abs();

    let ok = q_dev < 1e-3
        && mu_devs.iter().all(|&d| d < 1e-3)
        && lam_devs.iter().all(|&d| d < 1e-3)
        && psi_dev < 5e-3
        && theta_dev < 5e-3;
    report(
        6,
        ok,
        &format!(
            "Q/N gap {q_dev:.2e}; mu freq gaps {:.2e}/{:.2e}/{:.2e}; lambda gaps {:.2e}/{:.2e}; psi/N gap {psi_dev:.2e}; theta/N gap {theta_dev:.2e}",
            mu_devs[0], mu_devs[1], mu_devs[2], lam_devs[0], lam_devs[1]
        ),
    );
}

#[test]
fn criterion_07_value_laws_converge_in_ks() {
    let mut detail = String::new();
    let mut ok = true;
    for (name, table) in [("mu", &*MU7), ("lambda", &*LAM7)] {
        let dist = empirical_value_distribution(table, TEN_MILLION).unwrap();
        let law = limit_step_distribution(table.kind()).unwrap();
        let ks = ks_distance(&dist, ReferenceCdf::Step(&law));
        ok &= ks <= 1e-3;
        detail.push_str(&format!("{name} KS {ks:.3e}; "));
    }
    report(7, ok, &format!("{detail}bound 1e-3"));
}

#[test]
fn criterion_08_order_two_expansion_remainder() {
    let n = 1_000_000u64;
    let values: Vec<f64> = (0..n as usize)
        .map(|i| LAM7.values().get_f64(i))
        .collect();
    let moments = [
        moment(&LAM7, n, 1).unwrap().value,
        moment(&LAM7, n, 2).unwrap().value,
    ];

    let base = linear_t_grid(-0.3, 0.3, 61).unwrap();
    let samples = empirical_charfun(&values, &base).unwrap();
    let base_report = taylor_check(&samples, &moments, 2).unwrap();
    let bound_ok = base_report.max_abs_remainder <= 2e-3;

    let mut ratios = Vec::new();
    for upper in [0.1f64, 0.03, 0.01] {
        let grid = linear_t_grid(1e-3, upper, 25).unwrap();
        let s = empirical_charfun(&values, &grid).unwrap();
        ratios.push(taylor_check(&s, &moments, 2).unwrap().max_ratio);
    }
    let shrink_ok = ratios[1] < ratios[0] && ratios[2] < ratios[1];

    report(
        8,
        bound_ok && shrink_ok,
        &format!(
            "lambda at 1e6: max|r| {:.3e} (bound 2e-3); ratios {:.3e} > {:.3e} > {:.3e}",
            base_report.max_abs_remainder, ratios[0], ratios[1], ratios[2]
        ),
    );
}

/// Independent O(m^2) KS against the standard normal: for every sample point,
/// count <= and < by full scans and take both one-sided gaps.
fn brute_force_ks_normal(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mut sup = 0.0f64;
    for &y in values {
        let le = values.iter().filter(|&&x| x <= y).count() as f64 / m;
        let lt = values.iter().filter(|&&x| x < y).count() as f64 / m;
        let phi = standard_normal_cdf(y);
        sup = sup.max((le - phi).abs()).max((lt - phi).abs());
    }
    sup
}

#[test]
fn criterion_09_ks_matches_quadratic_bruteforce_bitwise() {
    let mut exact = true;
    let mut biggest = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let m = rng.gen_range(2..=500usize);
        biggest = biggest.max(m);
        // Dyadic lattice values make ties common and comparisons exact;
        // adding 0.0 normalizes any -0.0 from rounding.
        let values: Vec<f64> = (0..m)
            .map(|_| (rng.gen_range(-3.0f64..3.0) * 8.0).round() / 8.0 + 0.0)
            .collect();

        let brute = brute_force_ks_normal(&values);
        let emp = EmpiricalDistribution::from_values(&values).unwrap();
        let fast = ks_distance(&emp, ReferenceCdf::StandardNormal);
        let windowed = normality_report(&values, 1.0).unwrap().ks_to_normal;
        exact &= fast == brute && windowed == brute;
    }
    report(
        9,
        exact,
        &format!("100 seeded discrete samples (sizes up to {biggest}), bitwise equality"),
    );
}

#[test]
fn criterion_10_clt_sanity_on_iid_input() {
    let const_report = clt_report(&ONE7, &[1_000_000], NormalizationVariant::A, 0.5).unwrap();
    let degenerate_ok = const_report.entries[0].verdict == CltVerdict::Degenerate;

    let iid = rademacher_table(1_000_000, 42).unwrap();
    let iid_report = clt_report(&iid, &[1_000_000], NormalizationVariant::A, 0.5).unwrap();
    let ks = iid_report.entries[0].window.ks_to_normal;
    let ks_ok = ks <= KS_NORMAL_BOUND;

    report(
        10,
        degenerate_ok && ks_ok,
        &format!(
            "constant table degenerate: {degenerate_ok}; seeded +/-1 trailing-window KS {ks:.4} vs bound {KS_NORMAL_BOUND} — a single standardized path keeps O(1) fluctuations, so its window does not estimate the ensemble law"
        ),
    );
}

#[test]
fn criterion_11_moebius_mean_decays_on_the_square_root_scale() {
    let grid = log_grid(1000, TEN_MILLION, 10).unwrap();
    let rep = mean_decay_exponent(&MU7, &grid, 0.0).unwrap();
    let in_band = rep.fit.slope > -0.75 && rep.fit.slope < -0.25;
    let states_failure = !rep.satisfied && rep.verdict.contains("fails");
    report(
        11,
        in_band && states_failure,
        &format!(
            "slope {:.4} in (-0.75, -0.25): {in_band}; verdict states the 1/n requirement fails: {states_failure}",
            rep.fit.slope
        ),
    );
}

#[test]
fn criterion_12_balanced_series_is_exact_and_degenerate() {
    let spec = SeriesSpec::new(
        TermRule::Geometric {
            ratio: 0.5,
            scale: 1.0,
        },
        TermRule::Geometric {
            ratio: 1.0 / 3.0,
            scale: -2.0,
        },
    )
    .unwrap();
    let table = alternating_series_table(&spec, 10_000).unwrap();
    let s2 = table.value(1).unwrap() + table.value(2).unwrap();
    let s2_ok = (s2 - (-5.0 / 36.0)).abs() <= 1e-15;

    let rep = clt_report(&table, &[10_000], NormalizationVariant::A, 0.5).unwrap();
    let degenerate_ok = rep.entries[0].degenerate;

    // The experiment driver must state the tension between the forced
    // concentration at 0 and any nondegenerate normality expectation.
    let dir = tempfile::tempdir().unwrap();
    let map = parse_config_text("n = 10000\n").unwrap();
    let cfg =
        ExperimentConfig::resolve("alternating", map, Some(dir.path().to_path_buf())).unwrap();
    let run_pass = run_experiment(&cfg).unwrap();
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("alternating.json")).unwrap(),
    )
    .unwrap();
    let note = json["construction_note"].as_str().unwrap_or_default();
    let note_ok = note.contains("point mass") && note.contains("tension");

    report(
        12,
        s2_ok && degenerate_ok && run_pass && note_ok,
        &format!(
            "S(2) gap {:.2e} (bound 1e-15); degenerate at n=1e4: {degenerate_ok}; driver run pass: {run_pass}; tension stated: {note_ok}",
            (s2 - (-5.0 / 36.0)).abs()
        ),
    );
}

#[test]
fn criterion_13_cache_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("moebius-10000000.safl");

    let encoded = encode_table(&MU7);
    write_table(&MU7, &path).unwrap();
    let on_disk = std::fs::read(&path).unwrap();
    let bytes_ok = on_disk == encoded;

    let loaded = read_table(&path).unwrap();
    let table_ok = loaded == *MU7;
    let reencoded_ok = encode_table(&loaded) == encoded;

    // Flip one payload byte (header is 16 bytes; the checksum trails).
    let mut corrupt = on_disk.clone();
    let idx = 16 + 5_000_003usize;
    corrupt[idx] ^= 0x01;
    std::fs::write(&path, &corrupt).unwrap();
    let err = read_table(&path).unwrap_err();
    let integrity_ok = err.is_integrity();

    report(
        13,
        bytes_ok && table_ok && reencoded_ok && integrity_ok,
        &format!(
            "1e7 mu table: file == encoding: {bytes_ok}; decoded equals source: {table_ok}; re-encoding identical: {reencoded_ok}; flipped payload byte -> integrity error: {integrity_ok}"
        ),
    );
}

#[test]
fn criterion_14_thread_budget_never_changes_result_bytes() {
    let bin = env!("CARGO_BIN_EXE_sumfunc");
    let dir = tempfile::tempdir().unwrap();
    let mut all_ok = true;
    let mut detail = String::new();

    for (experiment, config_text) in [
        (
            "independence",
            "limit = 200000\ngrid = log:100:200000:8\nseed = 7\n",
        ),
        ("charfun", "limit = 100000\nseed = 7\n"),
    ] {
        let exp_dir = dir.path().join(experiment);
        std::fs::create_dir_all(&exp_dir).unwrap();
        let cache = exp_dir.join("cache");
        let config_path = exp_dir.join("run.conf");
        std::fs::write(
            &config_path,
            format!("{config_text}cache = {}\n", cache.display()),
        )
        .unwrap();

        let run_once = |out_name: &str, threads: &str| {
            // A fresh cache per run makes the sieve itself repeat under the
            // new thread budget.
            let _ = std::fs::remove_dir_all(&cache);
            let out_dir = exp_dir.join(out_name);
            let output = std::process::Command::new(bin)
                .args([
                    "run",
                    "--experiment",
                    experiment,
                    "--config",
                    config_path.to_str().unwrap(),
                    "--out",
                    out_dir.to_str().unwrap(),
                ])
                .env("SUMFUNC_THREADS", threads)
                .output()
                .expect("spawn sumfunc");
            assert_eq!(
                output.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&output.stderr)
            );
            out_dir
        };

        let a = run_once("threads-1", "1");
        let b = run_once("threads-4", "4");

        let files = |d: &std::path::Path| {
            let mut names: Vec<String> = std::fs::read_dir(d)
                .unwrap()
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .filter(|n| n != "run_manifest.json")
                .collect();
            names.sort();
            names
        };
        let names_a = files(&a);
        let names_b = files(&b);
        let mut identical = names_a == names_b && !names_a.is_empty();
        if identical {
            for name in &names_a {
                identical &= std::fs::read(a.join(name)).unwrap()
                    == std::fs::read(b.join(name)).unwrap();
            }
        }
        all_ok &= identical;
        detail.push_str(&format!(
            "{experiment}: {} result files byte-identical across SUMFUNC_THREADS=1/4: {identical}; ",
            names_a.len()
        ));
    }
    report(14, all_ok, detail.trim_end_matches("; "));
}
