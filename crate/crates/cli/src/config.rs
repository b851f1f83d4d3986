//! Flat `key = value` experiment configuration with `#` comments.
//! Command-line flags override file values; unknown keys are usage errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sumfunc_core::{log_grid, CoreError, FunctionKind, NormalizationVariant, Result, TermRule};

pub const VALID_EXPERIMENTS: [&str; 8] = [
    "independence",
    "density",
    "distribution",
    "charfun",
    "taylor",
    "clt",
    "alternating",
    "mertens-gap",
];

const VALID_KEYS: [&str; 15] = [
    "kind",
    "limit",
    "segment",
    "grid",
    "t_grid",
    "n",
    "seed",
    "window",
    "variant",
    "order",
    "cache",
    "out",
    "threads",
    "rule_a",
    "rule_b",
];

/// Parse `key = value` lines. `#` starts a comment, blank lines are skipped,
/// duplicate keys and unknown keys are rejected (they are always typos).
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CoreError::invalid(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !VALID_KEYS.contains(&key.as_str()) {
            return Err(CoreError::invalid(format!(
                "unknown config key `{key}` (valid: {})",
                VALID_KEYS.join(", ")
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CoreError::invalid(format!("duplicate config key `{key}`")));
        }
    }
    Ok(map)
}

/// Fully resolved run settings: defaults applied, grids expanded.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// `None` means the synthetic seeded ±1 kind (clt experiment only).
    pub kind: Option<FunctionKind>,
    pub kind_label: String,
    pub limit: u64,
    pub segment: u64,
    pub grid: Vec<u64>,
    pub t_grid: Vec<f64>,
    pub n: u64,
    pub seed: u64,
    pub window: f64,
    pub variant: NormalizationVariant,
    pub order: u32,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub threads: Option<usize>,
    pub rule_a: TermRule,
    pub rule_b: TermRule,
    /// The effective settings, echoed into the manifest.
    pub echo: BTreeMap<String, String>,
}

fn parse_u64(map: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| CoreError::invalid(format!("config key `{key}`: `{v}` is not an integer"))),
    }
}

fn parse_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| CoreError::invalid(format!("config key `{key}`: `{v}` is not a number"))),
    }
}

/// `log:<min>:<max>:<per_decade>` or `list:<n1>,<n2>,…`.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<u64>> {
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CoreError::invalid(format!(
                "grid spec `{spec}`: expected log:<min>:<max>:<per_decade>"
            )));
        }
        let min = parts[0]
            .parse::<u64>()
            .map_err(|_| CoreError::invalid(format!("grid spec `{spec}`: bad min")))?;
        let max = parts[1]
            .parse::<u64>()
            .map_err(|_| CoreError::invalid(format!("grid spec `{spec}`: bad max")))?;
        let pd = parts[2]
            .parse::<u32>()
            .map_err(|_| CoreError::invalid(format!("grid spec `{spec}`: bad per-decade count")))?;
        log_grid(min, max, pd)
    } else if let Some(rest) = spec.strip_prefix("list:") {
        let mut grid = Vec::new();
        for item in rest.split(',') {
            let n = item
                .trim()
                .parse::<u64>()
                .map_err(|_| CoreError::invalid(format!("grid spec `{spec}`: bad entry `{item}`")))?;
            grid.push(n);
        }
        if grid.is_empty() {
            return Err(CoreError::invalid("grid list must be nonempty"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::invalid("grid list must be strictly increasing"));
        }
        Ok(grid)
    } else {
        Err(CoreError::invalid(format!(
            "grid spec `{spec}`: expected log:… or list:…"
        )))
    }
}

/// `lin:<lo>:<hi>:<count>` (inclusive endpoints) or `list:<t1>,<t2>,…`.
pub fn parse_t_grid_spec(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("lin:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CoreError::invalid(format!(
                "t grid spec `{spec}`: expected lin:<lo>:<hi>:<count>"
            )));
        }
        let lo = parts[0]
            .parse::<f64>()
            .map_err(|_| CoreError::invalid(format!("t grid spec `{spec}`: bad lower bound")))?;
        let hi = parts[1]
            .parse::<f64>()
            .map_err(|_| CoreError::invalid(format!("t grid spec `{spec}`: bad upper bound")))?;
        let count = parts[2]
            .parse::<usize>()
            .map_err(|_| CoreError::invalid(format!("t grid spec `{spec}`: bad count")))?;
        linear_t_grid(lo, hi, count)
    } else if let Some(rest) = spec.strip_prefix("list:") {
        let mut grid = Vec::new();
        for item in rest.split(',') {
            let t = item
                .trim()
                .parse::<f64>()
                .map_err(|_| CoreError::invalid(format!("t grid spec `{spec}`: bad entry `{item}`")))?;
            if !t.is_finite() {
                return Err(CoreError::invalid("t grid entries must be finite"));
            }
            grid.push(t);
        }
        if grid.is_empty() {
            return Err(CoreError::invalid("t grid list must be nonempty"));
        }
        Ok(grid)
    } else {
        Err(CoreError::invalid(format!(
            "t grid spec `{spec}`: expected lin:… or list:…"
        )))
    }
}

/// Inclusive linear grid; symmetric bounds place 0.0 exactly on the grid.
pub fn linear_t_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(CoreError::invalid("t grid needs finite lo ≤ hi"));
    }
    if count == 0 {
        return Err(CoreError::invalid("t grid needs at least one point"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let span = hi - lo;
    Ok((0..count)
        .map(|i| lo + span * (i as f64 / (count - 1) as f64))
        .collect())
}

impl ExperimentConfig {
    /// Resolve the experiment settings from the parsed file plus overrides.
    pub fn resolve(
        experiment: &str,
        map: BTreeMap<String, String>,
        out_override: Option<PathBuf>,
    ) -> Result<ExperimentConfig> {
        if !VALID_EXPERIMENTS.contains(&experiment) {
            return Err(CoreError::invalid(format!(
                "unknown experiment `{experiment}` (valid: {})",
                VALID_EXPERIMENTS.join(", ")
            )));
        }

        let limit = parse_u64(&map, "limit", 1_000_000)?;
        let segment = parse_u64(&map, "segment", sumfunc_core::DEFAULT_SEGMENT_SIZE)?;
        // The alternating experiment writes a per-k table; keep its default
        // sample size small enough to read.
        let default_n = match experiment {
            "alternating" => limit.min(10_000),
            _ => limit,
        };
        let n = parse_u64(&map, "n", default_n)?;
        let seed = parse_u64(&map, "seed", 42)?;
        let window = parse_f64(&map, "window", 0.5)?;
        let order = u32::try_from(parse_u64(&map, "order", 2)?)
            .map_err(|_| CoreError::invalid("config key `order`: too large"))?;

        let variant = match map.get("variant") {
            None => NormalizationVariant::A,
            Some(v) => v.parse::<NormalizationVariant>()?,
        };

        let default_kind = match experiment {
            "independence" | "distribution" | "mertens-gap" => "moebius",
            "density" => "squarefree",
            "charfun" | "taylor" => "liouville",
            "clt" => "rademacher",
            // The alternating experiment constructs its own table.
            _ => "external",
        };
        let kind_label = map
            .get("kind")
            .cloned()
            .unwrap_or_else(|| default_kind.to_string());
        let kind = match kind_label.as_str() {
            "rademacher" => {
                if experiment != "clt" {
                    return Err(CoreError::invalid(
                        "kind `rademacher` is only meaningful for the clt experiment",
                    ));
                }
                None
            }
            other => Some(other.parse::<FunctionKind>()?),
        };
        if kind == Some(FunctionKind::External) && experiment != "alternating" {
            return Err(CoreError::invalid(
                "kind `external` has no table source; pick a sieveable kind",
            ));
        }

        let grid = match map.get("grid") {
            Some(spec) => parse_grid_spec(spec)?,
            None => match experiment {
                "clt" => vec![n],
                _ => log_grid(1000.min(limit).max(2), limit, 10)?,
            },
        };
        if *grid.last().unwrap() > limit {
            return Err(CoreError::invalid(format!(
                "grid reaches {} but limit is {limit}",
                grid.last().unwrap()
            )));
        }

        let t_grid = match map.get("t_grid") {
            Some(spec) => parse_t_grid_spec(spec)?,
            None => linear_t_grid(-0.3, 0.3, 61)?,
        };

        let rule_a = match map.get("rule_a") {
            Some(spec) => parse_term_rule(spec)?,
            None => TermRule::Geometric {
                ratio: 0.5,
                scale: 1.0,
            },
        };
        let rule_b = match map.get("rule_b") {
            Some(spec) => parse_term_rule(spec)?,
            None => TermRule::Geometric {
                ratio: 1.0 / 3.0,
                scale: -2.0,
            },
        };

        let out_dir = out_override.unwrap_or_else(|| {
            PathBuf::from(map.get("out").cloned().unwrap_or_else(|| "sumfunc-out".into()))
        });
        let cache_dir = match map.get("cache") {
            Some(dir) => PathBuf::from(dir),
            None => out_dir.join("cache"),
        };

        let threads = match map.get("threads") {
            None => None,
            Some(v) => Some(v.parse::<usize>().map_err(|_| {
                CoreError::invalid(format!("config key `threads`: `{v}` is not an integer"))
            })?),
        };

        let mut echo = map;
        echo.insert("experiment".into(), experiment.to_string());
        echo.insert("kind".into(), kind_label.clone());
        echo.insert("limit".into(), limit.to_string());
        echo.insert("segment".into(), segment.to_string());
        echo.insert("n".into(), n.to_string());
        echo.insert("seed".into(), seed.to_string());
        echo.insert("out".into(), out_dir.display().to_string());
        echo.insert("cache".into(), cache_dir.display().to_string());
        echo.entry("grid".to_string()).or_insert_with(|| {
            let items: Vec<String> = grid.iter().map(|n| n.to_string()).collect();
            format!("list:{}", items.join(","))
        });

        Ok(ExperimentConfig {
            experiment: experiment.to_string(),
            kind,
            kind_label,
            limit,
            segment,
            grid,
            t_grid,
            n,
            seed,
            window,
            variant,
            order,
            out_dir,
            cache_dir,
            threads,
            rule_a,
            rule_b,
            echo,
        })
    }
}

/// `geometric:<ratio>:<scale>` or `p-series:<exponent>:<scale>`.
pub fn parse_term_rule(spec: &str) -> Result<TermRule> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CoreError::invalid(format!(
            "term rule `{spec}`: expected geometric:<ratio>:<scale> or p-series:<exponent>:<scale>"
        )));
    }
    let first = parts[1]
        .parse::<f64>()
        .map_err(|_| CoreError::invalid(format!("term rule `{spec}`: bad parameter")))?;
    let scale = parts[2]
        .parse::<f64>()
        .map_err(|_| CoreError::invalid(format!("term rule `{spec}`: bad scale")))?;
    match parts[0] {
        "geometric" => Ok(TermRule::Geometric {
            ratio: first,
            scale,
        }),
        "p-series" => Ok(TermRule::PSeries {
            exponent: first,
            scale,
        }),
        other => Err(CoreError::invalid(format!(
            "term rule `{spec}`: unknown rule `{other}` (valid: geometric, p-series)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let text = "\
# run settings
kind = liouville   # the summand
limit = 50000

seed=7
";
        let map = parse_config_text(text).unwrap();
        assert_eq!(map.get("kind").unwrap(), "liouville");
        assert_eq!(map.get("limit").unwrap(), "50000");
        assert_eq!(map.get("seed").unwrap(), "7");
        assert_eq!(map.len(), 3);
    }

    #[test]
    fn config_text_rejections() {
        assert!(parse_config_text("kind liouville").is_err());
        assert!(parse_config_text("species = moebius").is_err());
        assert!(parse_config_text("kind = a\nkind = b").is_err());
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid_spec("list:10,20,30").unwrap(), vec![10, 20, 30]);
        let g = parse_grid_spec("log:1000:1000000:10").unwrap();
        assert_eq!(g.first(), Some(&1000));
        assert_eq!(g.last(), Some(&1_000_000));
        assert!(parse_grid_spec("list:30,20").is_err());
        assert!(parse_grid_spec("log:10:5:3").is_err());
        assert!(parse_grid_spec("geom:1:2").is_err());
    }

    #[test]
    fn t_grids_hit_zero_exactly() {
        let g = parse_t_grid_spec("lin:-0.3:0.3:61").unwrap();
        assert_eq!(g.len(), 61);
        assert_eq!(g[30], 0.0);
        assert_eq!(g[0], -0.3);
        assert_eq!(g[60], 0.3);
        assert_eq!(parse_t_grid_spec("lin:1:1:1").unwrap(), vec![1.0]);
        assert!(parse_t_grid_spec("lin:1:0:5").is_err());
        assert!(parse_t_grid_spec("list:0.1,inf").is_err());
    }

    #[test]
    fn resolve_applies_defaults_and_overrides() {
        let map = parse_config_text("limit = 5000\nseed = 9").unwrap();
        let cfg =
            ExperimentConfig::resolve("independence", map, Some(PathBuf::from("outdir"))).unwrap();
        assert_eq!(cfg.kind, Some(FunctionKind::Moebius));
        assert_eq!(cfg.limit, 5000);
        assert_eq!(cfg.n, 5000);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.out_dir, PathBuf::from("outdir"));
        assert_eq!(cfg.cache_dir, PathBuf::from("outdir").join("cache"));
        assert_eq!(*cfg.grid.last().unwrap(), 5000);
        assert_eq!(cfg.echo.get("experiment").unwrap(), "independence");
    }

    #[test]
    fn resolve_rejects_bad_settings() {
        let err = ExperimentConfig::resolve("frobnicate", BTreeMap::new(), None);
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("mertens-gap"), "{msg}");

        let map = parse_config_text("kind = rademacher").unwrap();
        assert!(ExperimentConfig::resolve("independence", map, None).is_err());

        let map = parse_config_text("grid = list:10,2000\nlimit = 1000").unwrap();
        assert!(ExperimentConfig::resolve("independence", map, None).is_err());
    }

    #[test]
    fn term_rules_parse() {
        assert_eq!(
            parse_term_rule("geometric:0.5:1.0").unwrap(),
            TermRule::Geometric {
                ratio: 0.5,
                scale: 1.0
            }
        );
        assert_eq!(
            parse_term_rule("p-series:2.0:-1.5").unwrap(),
            TermRule::PSeries {
                exponent: 2.0,
                scale: -1.5
            }
        );
        assert!(parse_term_rule("geometric:0.5").is_err());
        assert!(parse_term_rule("harmonic:1:1").is_err());
    }
}
