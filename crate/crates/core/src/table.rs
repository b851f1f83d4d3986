//! Immutable value tables and oracle-backed verification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::kind::{CellEncoding, FunctionKind};
use crate::oracle::oracle_value;

/// Tolerance for real-valued cells when compared against the oracle
/// (relative to max(|expected|, 1)).
pub const REAL_MATCH_RELATIVE_TOL: f64 = 1e-12;

/// Cell storage; the variant is fixed by the kind's encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum TableValues {
    Int8(Vec<i8>),
    Int32(Vec<i32>),
    Float64(Vec<f64>),
}

impl TableValues {
    pub fn len(&self) -> usize {
        match self {
            TableValues::Int8(v) => v.len(),
            TableValues::Int32(v) => v.len(),
            TableValues::Float64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoding(&self) -> CellEncoding {
        match self {
            TableValues::Int8(_) => CellEncoding::Int8,
            TableValues::Int32(_) => CellEncoding::Int32,
            TableValues::Float64(_) => CellEncoding::Float64,
        }
    }

    /// Cell at 0-based index as f64 (exact for the integer variants).
    #[inline]
    pub fn get_f64(&self, idx: usize) -> f64 {
        match self {
            TableValues::Int8(v) => v[idx] as f64,
            TableValues::Int32(v) => v[idx] as f64,
            TableValues::Float64(v) => v[idx],
        }
    }

    /// Cell at 0-based index as an integer; `None` for real storage.
    #[inline]
    pub fn get_i64(&self, idx: usize) -> Option<i64> {
        match self {
            TableValues::Int8(v) => Some(v[idx] as i64),
            TableValues::Int32(v) => Some(v[idx] as i64),
            TableValues::Float64(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BuildMeta {
    pub segment_size: u64,
    pub build_seconds: f64,
}

/// f(1..=limit) for one kind. Indexed from 1; immutable once built.
#[derive(Debug, Clone)]
pub struct FunctionTable {
    kind: FunctionKind,
    values: TableValues,
    build_meta: Option<BuildMeta>,
}

impl PartialEq for FunctionTable {
    /// Cell-for-cell identity; build metadata is not part of table identity.
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.values == other.values
    }
}

impl FunctionTable {
    pub fn from_parts(
        kind: FunctionKind,
        values: TableValues,
        build_meta: Option<BuildMeta>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::invalid("table must cover at least k = 1"));
        }
        if values.encoding() != kind.encoding() {
            return Err(CoreError::invalid(format!(
                "cell storage {:?} does not match kind {kind}",
                values.encoding()
            )));
        }
        Ok(FunctionTable {
            kind,
            values,
            build_meta,
        })
    }

    /// Wrap caller-supplied values (synthetic and series-derived tables).
    pub fn external(values: Vec<f64>) -> Result<Self> {
        Self::from_parts(FunctionKind::External, TableValues::Float64(values), None)
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn build_meta(&self) -> Option<&BuildMeta> {
        self.build_meta.as_ref()
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    /// f(k), 1-indexed.
    pub fn value(&self, k: u64) -> Result<f64> {
        if k == 0 || k > self.limit() {
            return Err(CoreError::OutOfRange {
                k,
                limit: self.limit(),
            });
        }
        Ok(self.values.get_f64((k - 1) as usize))
    }

    /// All values in index order, as f64.
    pub fn iter_f64(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.values.get_f64(i))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub k: u64,
    pub expected: f64,
    pub got: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub kind: FunctionKind,
    pub limit: u64,
    pub checked_exhaustive: u64,
    pub checked_sampled: u64,
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn cell_matches(kind: FunctionKind, expected: f64, got: f64) -> bool {
    if kind.integer_valued() {
        expected == got
    } else {
        (got - expected).abs() <= REAL_MATCH_RELATIVE_TOL * expected.abs().max(1.0)
    }
}

/// Compare a table against the trial-division oracle: exhaustively for
/// k ≤ up_to, then on `sample_count` seeded-random k in (up_to, limit].
/// Failures are collected in the report, never raised.
pub fn verify_table(
    table: &FunctionTable,
    up_to: u64,
    sample_count: u64,
    seed: u64,
) -> Result<VerificationReport> {
    if table.kind() == FunctionKind::External {
        return Err(CoreError::invalid(
            "external tables have no oracle to verify against",
        ));
    }
    if up_to > table.limit() {
        return Err(CoreError::invalid(format!(
            "verification bound {up_to} exceeds table limit {}",
            table.limit()
        )));
    }
    let mut mismatches = Vec::new();
    let check = |k: u64, mismatches: &mut Vec<Mismatch>| -> Result<()> {
        let expected = oracle_value(table.kind(), k)?;
        let got = table.value(k)?;
        if !cell_matches(table.kind(), expected, got) {
            mismatches.push(Mismatch { k, expected, got });
        }
        Ok(())
    };

    for k in 1..=up_to {
        check(k, &mut mismatches)?;
    }

    let mut sampled = 0;
    if up_to < table.limit() && sample_count > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..sample_count {
            let k = rng.gen_range(up_to + 1..=table.limit());
            check(k, &mut mismatches)?;
            sampled += 1;
        }
    }

    Ok(VerificationReport {
        kind: table.kind(),
        limit: table.limit(),
        checked_exhaustive: up_to,
        checked_sampled: sampled,
        mismatches,
    })
}
