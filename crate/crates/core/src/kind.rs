//! Catalog of the arithmetic functions the sieve can tabulate.
//!
//! Each kind fixes a value type (how cells are stored), sign/boundedness
//! traits consumed by the classifiers, and a stable identifier used by the
//! on-disk codec and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::CoreError;

/// Storage width of one table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellEncoding {
    /// Signed byte; values in a small finite set (μ, λ, indicators).
    Int8,
    /// 32-bit integer; unbounded but slowly growing counts (τ).
    Int32,
    /// IEEE double (Λ, log-valued and synthetic tables).
    Float64,
}

impl CellEncoding {
    pub fn cell_bytes(self) -> u64 {
        match self {
            CellEncoding::Int8 => 1,
            CellEncoding::Int32 => 4,
            CellEncoding::Float64 => 8,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            CellEncoding::Int8 => 0x01,
            CellEncoding::Int32 => 0x04,
            CellEncoding::Float64 => 0x08,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0x01 => Some(CellEncoding::Int8),
            0x04 => Some(CellEncoding::Int32),
            0x08 => Some(CellEncoding::Float64),
            _ => None,
        }
    }
}

/// An arithmetic function the table builder knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionKind {
    /// μ(k): ±1 on square-free k by parity of the prime-factor count, else 0.
    Moebius,
    /// λ(k) = (−1)^Ω(k) with Ω counting prime factors with multiplicity.
    Liouville,
    /// μ²(k): 1 on square-free k, else 0.
    SquarefreeIndicator,
    /// 1 on primes, 0 elsewhere (including k = 1).
    PrimeIndicator,
    /// τ(k): number of divisors.
    DivisorCount,
    /// Λ(k) = log p when k = p^e, else 0.
    VonMangoldt,
    /// log k on primes, 0 elsewhere; summatory is Chebyshev θ.
    PrimeLog,
    /// f ≡ c.
    Constant(f64),
    /// Caller-supplied values (synthetic tables); no sieve or oracle backing.
    External,
}

impl FunctionKind {
    pub const BUILTIN: [FunctionKind; 7] = [
        FunctionKind::Moebius,
        FunctionKind::Liouville,
        FunctionKind::SquarefreeIndicator,
        FunctionKind::PrimeIndicator,
        FunctionKind::DivisorCount,
        FunctionKind::VonMangoldt,
        FunctionKind::PrimeLog,
    ];

    pub fn encoding(self) -> CellEncoding {
        match self {
            FunctionKind::Moebius
            | FunctionKind::Liouville
            | FunctionKind::SquarefreeIndicator
            | FunctionKind::PrimeIndicator => CellEncoding::Int8,
            FunctionKind::DivisorCount => CellEncoding::Int32,
            FunctionKind::VonMangoldt
            | FunctionKind::PrimeLog
            | FunctionKind::Constant(_)
            | FunctionKind::External => CellEncoding::Float64,
        }
    }

    /// True when |f(k)| is bounded by a constant independent of k.
    pub fn bounded(self) -> bool {
        match self {
            FunctionKind::Moebius
            | FunctionKind::Liouville
            | FunctionKind::SquarefreeIndicator
            | FunctionKind::PrimeIndicator
            | FunctionKind::Constant(_) => true,
            FunctionKind::DivisorCount
            | FunctionKind::VonMangoldt
            | FunctionKind::PrimeLog
            | FunctionKind::External => false,
        }
    }

    /// True when f(k) never changes sign (f ≥ 0 everywhere, or f ≤ 0).
    pub fn same_sign(self) -> bool {
        match self {
            FunctionKind::SquarefreeIndicator
            | FunctionKind::PrimeIndicator
            | FunctionKind::DivisorCount
            | FunctionKind::VonMangoldt
            | FunctionKind::PrimeLog => true,
            FunctionKind::Constant(_) => true,
            FunctionKind::Moebius | FunctionKind::Liouville | FunctionKind::External => false,
        }
    }

    /// True when every value is an integer representable exactly.
    pub fn integer_valued(self) -> bool {
        matches!(self.encoding(), CellEncoding::Int8 | CellEncoding::Int32)
    }

    /// Stable identifier used by the on-disk format.
    pub fn kind_id(self) -> u16 {
        match self {
            FunctionKind::Moebius => 1,
            FunctionKind::Liouville => 2,
            FunctionKind::SquarefreeIndicator => 3,
            FunctionKind::PrimeIndicator => 4,
            FunctionKind::DivisorCount => 5,
            FunctionKind::VonMangoldt => 6,
            FunctionKind::PrimeLog => 7,
            FunctionKind::Constant(_) => 8,
            FunctionKind::External => 255,
        }
    }

    pub(crate) fn from_kind_id(id: u16, constant: f64) -> Option<Self> {
        match id {
            1 => Some(FunctionKind::Moebius),
            2 => Some(FunctionKind::Liouville),
            3 => Some(FunctionKind::SquarefreeIndicator),
            4 => Some(FunctionKind::PrimeIndicator),
            5 => Some(FunctionKind::DivisorCount),
            6 => Some(FunctionKind::VonMangoldt),
            7 => Some(FunctionKind::PrimeLog),
            8 => Some(FunctionKind::Constant(constant)),
            255 => Some(FunctionKind::External),
            _ => None,
        }
    }

    /// CLI/file-name slug. `Constant(c)` renders as `constant:<c>`.
    pub fn slug(self) -> String {
        match self {
            FunctionKind::Moebius => "moebius".into(),
            FunctionKind::Liouville => "liouville".into(),
            FunctionKind::SquarefreeIndicator => "squarefree".into(),
            FunctionKind::PrimeIndicator => "prime".into(),
            FunctionKind::DivisorCount => "divisor-count".into(),
            FunctionKind::VonMangoldt => "von-mangoldt".into(),
            FunctionKind::PrimeLog => "prime-log".into(),
            FunctionKind::Constant(c) => format!("constant:{c}"),
            FunctionKind::External => "external".into(),
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

impl FromStr for FunctionKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moebius" => Ok(FunctionKind::Moebius),
            "liouville" => Ok(FunctionKind::Liouville),
            "squarefree" => Ok(FunctionKind::SquarefreeIndicator),
            "prime" => Ok(FunctionKind::PrimeIndicator),
            "divisor-count" => Ok(FunctionKind::DivisorCount),
            "von-mangoldt" => Ok(FunctionKind::VonMangoldt),
            "prime-log" => Ok(FunctionKind::PrimeLog),
            "external" => Ok(FunctionKind::External),
            other => {
                if let Some(c) = other.strip_prefix("constant:") {
                    let c: f64 = c.parse().map_err(|_| {
                        CoreError::invalid(format!("bad constant value in kind `{other}`"))
                    })?;
                    if !c.is_finite() {
                        return Err(CoreError::invalid("constant kind requires a finite value"));
                    }
                    Ok(FunctionKind::Constant(c))
                } else {
                    Err(CoreError::NotInCatalog(format!(
                        "unknown function kind `{other}` (expected one of: moebius, liouville, \
                         squarefree, prime, divisor-count, von-mangoldt, prime-log, constant:<c>, \
                         external)"
                    )))
                }
            }
        }
    }
}

impl Serialize for FunctionKind {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.slug())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slug_round_trip() {
        for kind in FunctionKind::BUILTIN {
            assert_eq!(kind.slug().parse::<FunctionKind>().unwrap(), kind);
        }
        assert_eq!(
            "constant:1".parse::<FunctionKind>().unwrap(),
            FunctionKind::Constant(1.0)
        );
        assert_eq!(
            "constant:-2.5".parse::<FunctionKind>().unwrap(),
            FunctionKind::Constant(-2.5)
        );
        assert_eq!(
            "external".parse::<FunctionKind>().unwrap(),
            FunctionKind::External
        );
    }

    #[test]
    fn unknown_slug_rejected() {
        assert!(matches!(
            "mobius".parse::<FunctionKind>(),
            Err(CoreError::NotInCatalog(_))
        ));
        assert!("constant:nan".parse::<FunctionKind>().is_err());
    }

    #[test]
    fn kind_ids_distinct() {
        let mut ids: Vec<u16> = FunctionKind::BUILTIN.iter().map(|k| k.kind_id()).collect();
        ids.push(FunctionKind::Constant(0.0).kind_id());
        ids.push(FunctionKind::External.kind_id());
        let mut dedup = ids.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(ids.len(), dedup.len());
        for kind in FunctionKind::BUILTIN {
            assert_eq!(
                FunctionKind::from_kind_id(kind.kind_id(), 0.0).unwrap(),
                kind
            );
        }
    }

    #[test]
    fn trait_table() {
        use FunctionKind::*;
        assert!(Moebius.bounded() && !Moebius.same_sign());
        assert!(Liouville.bounded() && !Liouville.same_sign());
        assert!(SquarefreeIndicator.bounded() && SquarefreeIndicator.same_sign());
        assert!(PrimeIndicator.bounded() && PrimeIndicator.same_sign());
        assert!(!DivisorCount.bounded() && DivisorCount.same_sign());
        assert!(!VonMangoldt.bounded() && VonMangoldt.same_sign());
        assert!(!PrimeLog.bounded() && PrimeLog.same_sign());
        assert!(Constant(3.0).bounded() && Constant(3.0).same_sign());
        assert!(Moebius.integer_valued() && DivisorCount.integer_valued());
        assert!(!VonMangoldt.integer_valued());
    }
}
