//! Segmented factorization sieve.
//!
//! One driver serves every built-in kind: each segment keeps the numbers
//! `lo..=hi` in a scratch vector, divides out every base prime (primes up
//! to √limit), and feeds the resulting (prime, exponent) events into a
//! per-kind fold. Whatever is left in a cell after all base primes is
//! either 1 or a single prime factor of first degree — a number ≤ hi
//! cannot contain two primes > √hi.
//!
//! Cells are pure functions of their index, so segment boundaries and the
//! degree of parallelism cannot change the output.

use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::kind::FunctionKind;
use crate::table::{BuildMeta, FunctionTable, TableValues};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;

/// Upper bound on the bytes `build_table` may allocate (table plus one
/// segment of scratch per worker).
pub const DEFAULT_MEMORY_BUDGET: u64 = 6 << 30;

/// Per-kind fold over the factorization events of one cell.
///
/// `absorb` is called exactly once per distinct prime factor of k, in
/// increasing prime order, with `e` its full multiplicity; `finish` then
/// maps the folded state and the index to the stored cell. k = 1 receives
/// no events.
trait SegmentRule: Sync {
    type State: Copy + Send + Sync;
    type Cell: Copy + Default + Send + Sync;
    fn init(&self) -> Self::State;
    fn absorb(&self, state: &mut Self::State, p: u64, e: u32);
    fn finish(&self, state: Self::State, k: u64) -> Self::Cell;
}

struct MoebiusRule;
impl SegmentRule for MoebiusRule {
    type State = i8;
    type Cell = i8;
    fn init(&self) -> i8 {
        1
    }
    fn absorb(&self, state: &mut i8, _p: u64, e: u32) {
        // Zero is sticky: one squared prime kills the cell.
        if e > 1 {
            *state = 0;
        } else {
            *state = -*state;
        }
    }
    fn finish(&self, state: i8, _k: u64) -> i8 {
        state
    }
}

struct LiouvilleRule;
impl SegmentRule for LiouvilleRule {
    type State = u32;
    type Cell = i8;
    fn init(&self) -> u32 {
        0
    }
    fn absorb(&self, omega: &mut u32, _p: u64, e: u32) {
        *omega += e;
    }
    fn finish(&self, omega: u32, _k: u64) -> i8 {
        if omega % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

struct SquarefreeRule;
impl SegmentRule for SquarefreeRule {
    type State = bool;
    type Cell = i8;
    fn init(&self) -> bool {
        true
    }
    fn absorb(&self, squarefree: &mut bool, _p: u64, e: u32) {
        if e > 1 {
            *squarefree = false;
        }
    }
    fn finish(&self, squarefree: bool, _k: u64) -> i8 {
        squarefree as i8
    }
}

struct PrimeIndicatorRule;
impl SegmentRule for PrimeIndicatorRule {
    type State = u32;
    type Cell = i8;
    fn init(&self) -> u32 {
        0
    }
    fn absorb(&self, omega: &mut u32, _p: u64, e: u32) {
        *omega += e;
    }
    fn finish(&self, omega: u32, _k: u64) -> i8 {
        (omega == 1) as i8
    }
}

struct DivisorCountRule;
impl SegmentRule for DivisorCountRule {
    type State = i32;
    type Cell = i32;
    fn init(&self) -> i32 {
        1
    }
    fn absorb(&self, tau: &mut i32, _p: u64, e: u32) {
        *tau *= (e + 1) as i32;
    }
    fn finish(&self, tau: i32, _k: u64) -> i32 {
        tau
    }
}

struct VonMangoldtRule;
impl SegmentRule for VonMangoldtRule {
    /// (first prime seen, number of distinct primes)
    type State = (u64, u32);
    type Cell = f64;
    fn init(&self) -> (u64, u32) {
        (0, 0)
    }
    fn absorb(&self, state: &mut (u64, u32), p: u64, _e: u32) {
        if state.1 == 0 {
            state.0 = p;
        }
        state.1 += 1;
    }
    fn finish(&self, (first_p, distinct): (u64, u32), _k: u64) -> f64 {
        if distinct == 1 {
            (first_p as f64).ln()
        } else {
            0.0
        }
    }
}

struct PrimeLogRule;
impl SegmentRule for PrimeLogRule {
    type State = u32;
    type Cell = f64;
    fn init(&self) -> u32 {
        0
    }
    fn absorb(&self, omega: &mut u32, _p: u64, e: u32) {
        *omega += e;
    }
    fn finish(&self, omega: u32, k: u64) -> f64 {
        if omega == 1 {
            (k as f64).ln()
        } else {
            0.0
        }
    }
}

/// Primes ≤ `bound` by a plain bit-less Eratosthenes sieve.
pub(crate) fn base_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        primes.push(p as u64);
        let mut m = p * p;
        while m <= n {
            composite[m] = true;
            m += p;
        }
    }
    primes
}

/// Factor every k in `lo..lo + cells.len()` and fold each factorization
/// into a cell value.
fn sieve_chunk<R: SegmentRule>(rule: &R, primes: &[u64], lo: u64, cells: &mut [R::Cell]) {
    let len = cells.len() as u64;
    let hi = lo + len - 1;
    let mut remaining: Vec<u64> = (lo..=hi).collect();
    let mut states: Vec<R::State> = vec![rule.init(); cells.len()];

    for &p in primes {
        if p.saturating_mul(p) > hi {
            // Anything this prime (or a larger one) still divides shows up
            // once in the leftover pass below.
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let idx = (m - lo) as usize;
            let mut e = 0u32;
            while remaining[idx] % p == 0 {
                remaining[idx] /= p;
                e += 1;
            }
            rule.absorb(&mut states[idx], p, e);
            m += p;
        }
    }

    for idx in 0..cells.len() {
        if remaining[idx] > 1 {
            rule.absorb(&mut states[idx], remaining[idx], 1);
        }
        cells[idx] = rule.finish(states[idx], lo + idx as u64);
    }
}

fn fill<R: SegmentRule>(rule: R, limit: u64, segment_size: u64) -> Vec<R::Cell> {
    let primes = base_primes(limit.isqrt());
    let mut cells = vec![R::Cell::default(); limit as usize];
    cells
        .par_chunks_mut(segment_size as usize)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let lo = 1 + chunk_idx as u64 * segment_size;
            sieve_chunk(&rule, &primes, lo, chunk);
        });
    cells
}

/// Bytes `build_table` needs: the table itself plus one factorization
/// scratch vector (u64 per cell) for a segment.
pub fn memory_estimate(kind: FunctionKind, limit: u64, segment_size: u64) -> u64 {
    let scratch = segment_size.min(limit).saturating_mul(8 + 8);
    limit
        .saturating_mul(kind.encoding().cell_bytes())
        .saturating_add(scratch)
}

/// Tabulate `kind` over 1..=limit.
pub fn build_table(kind: FunctionKind, limit: u64, segment_size: u64) -> Result<FunctionTable> {
    build_table_with_budget(kind, limit, segment_size, DEFAULT_MEMORY_BUDGET)
}

pub fn build_table_with_budget(
    kind: FunctionKind,
    limit: u64,
    segment_size: u64,
    budget: u64,
) -> Result<FunctionTable> {
    if limit == 0 {
        return Err(CoreError::invalid("table limit must be at least 1"));
    }
    if segment_size < 64 {
        return Err(CoreError::invalid("segment size must be at least 64"));
    }
    if kind == FunctionKind::External {
        return Err(CoreError::invalid(
            "external tables are supplied, not sieved; use FunctionTable::external",
        ));
    }
    let required = memory_estimate(kind, limit, segment_size);
    if required > budget {
        return Err(CoreError::ResourceLimit { required, budget });
    }

    let start = std::time::Instant::now();
    let values = match kind {
        FunctionKind::Moebius => TableValues::Int8(fill(MoebiusRule, limit, segment_size)),
        FunctionKind::Liouville => TableValues::Int8(fill(LiouvilleRule, limit, segment_size)),
        FunctionKind::SquarefreeIndicator => {
            TableValues::Int8(fill(SquarefreeRule, limit, segment_size))
        }
        FunctionKind::PrimeIndicator => {
            TableValues::Int8(fill(PrimeIndicatorRule, limit, segment_size))
        }
        FunctionKind::DivisorCount => {
            TableValues::Int32(fill(DivisorCountRule, limit, segment_size))
        }
        FunctionKind::VonMangoldt => {
            TableValues::Float64(fill(VonMangoldtRule, limit, segment_size))
        }
        FunctionKind::PrimeLog => TableValues::Float64(fill(PrimeLogRule, limit, segment_size)),
        FunctionKind::Constant(c) => TableValues::Float64(vec![c; limit as usize]),
        FunctionKind::External => unreachable!(),
    };
    let meta = BuildMeta {
        segment_size,
        build_seconds: start.elapsed().as_secs_f64(),
    };
    FunctionTable::from_parts(kind, values, Some(meta))
}
