//! Trial-division reference evaluator.
//!
//! Deliberately shares no code with the sieve: every value is recomputed
//! from scratch by dividing out primes, so the two implementations can
//! cross-check each other.

use crate::error::{CoreError, Result};
use crate::kind::FunctionKind;

/// Prime factorization of `k` by trial division, as (prime, exponent) pairs
/// in increasing prime order. `trial_factorize(1)` is empty.
pub fn trial_factorize(k: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut rest = k;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0u32;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut rest);
    let mut p = 3u64;
    while p.saturating_mul(p) <= rest {
        push(p, &mut rest);
        p += 2;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    factors
}

/// Evaluate `kind` at `k` independently of any table.
pub fn oracle_value(kind: FunctionKind, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(CoreError::invalid("oracle domain starts at k = 1"));
    }
    if kind == FunctionKind::External {
        return Err(CoreError::invalid(
            "external tables have no closed-form oracle",
        ));
    }
    let factors = trial_factorize(k);
    let distinct = factors.len() as u32;
    let omega: u32 = factors.iter().map(|&(_, e)| e).sum();
    let squarefree = factors.iter().all(|&(_, e)| e == 1);
    let is_prime = distinct == 1 && omega == 1;

    Ok(match kind {
        FunctionKind::Moebius => {
            if !squarefree {
                0.0
            } else if distinct % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        FunctionKind::Liouville => {
            if omega % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        FunctionKind::SquarefreeIndicator => {
            if squarefree {
                1.0
            } else {
                0.0
            }
        }
        FunctionKind::PrimeIndicator => {
            if is_prime {
                1.0
            } else {
                0.0
            }
        }
        FunctionKind::DivisorCount => factors
            .iter()
            .map(|&(_, e)| (e + 1) as f64)
            .product::<f64>(),
        FunctionKind::VonMangoldt => {
            if distinct == 1 {
                (factors[0].0 as f64).ln()
            } else {
                0.0
            }
        }
        FunctionKind::PrimeLog => {
            if is_prime {
                (k as f64).ln()
            } else {
                0.0
            }
        }
        FunctionKind::Constant(c) => c,
        FunctionKind::External => unreachable!(),
    })
}
