//! Exact tables of arithmetic functions and the statistics built on them:
//! summatory series with asymptote deviations, the pairwise-independence
//! statistic Δ(n), empirical value distributions and characteristic
//! functions, and central-limit diagnostics for standardized partial sums.

pub mod charfun;
pub mod clt;
pub mod codec;
pub mod compensated;
pub mod distribution;
pub mod error;
pub mod fit;
pub mod independence;
pub mod kind;
pub mod normal;
pub mod oracle;
pub mod series;
pub mod sieve;
pub mod summatory;
pub mod table;

pub use charfun::{
    empirical_charfun, moment, product_charfun_compare, taylor_check, CharFunSamples,
    ComparisonPoint, ComparisonReport, Moment, RemainderPoint, RemainderReport,
};
pub use clt::{
    clt_report, mean_decay_exponent, normality_report, rademacher_table,
    standardized_partial_sums, write_standardized_csv, CltEntry, CltReport, CltVerdict,
    MeanDecayReport, MeanGapPoint, NormalityReport, NormalizationVariant, StandardizedSums,
    DEGENERACY_STD_THRESHOLD, KS_NORMAL_BOUND, REQUIRED_MEAN_DECAY_SLOPE,
};
pub use codec::{checksum, decode_table, encode_table, read_table, write_table};
pub use compensated::CompensatedSum;
pub use distribution::{
    empirical_value_distribution, empirical_value_distribution_binned, ks_distance,
    limit_step_distribution, EmpiricalDistribution, ReferenceCdf, StepDistribution,
};
pub use error::{CoreError, Result};
pub use fit::{fit_log_decay, PowerLawFit};
pub use independence::{
    classify, decay_exponent, delta_grid, independence_delta, independence_report,
    mean_pair_product, mean_pair_product_bruteforce, product_of_means, Classification,
    DecayVerdict, DeltaPoint, IndependenceReport, BRUTEFORCE_MAX_N,
};
pub use kind::{CellEncoding, FunctionKind};
pub use normal::standard_normal_cdf;
pub use oracle::{oracle_value, trial_factorize};
pub use series::{alternating_series_table, zeta, SeriesSpec, TermRule};
pub use sieve::{
    build_table, build_table_with_budget, memory_estimate, DEFAULT_MEMORY_BUDGET,
    DEFAULT_SEGMENT_SIZE,
};
pub use summatory::{
    asymptote_deviation, deviation_points, log_grid, prefix_series, prefix_values_f64,
    AsymptoteSpec, DeviationPoint, DeviationSeries, SeriesValues, SummatorySeries,
    EULER_MASCHERONI,
};
pub use table::{
    verify_table, BuildMeta, FunctionTable, Mismatch, TableValues, VerificationReport,
    REAL_MATCH_RELATIVE_TOL,
};
