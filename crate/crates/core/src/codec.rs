//! Binary table format.
//!
//! Layout: magic `SAFL`, version byte 0x01, little-endian header
//! (kind id u16, limit u64, cell-encoding tag u8), the raw little-endian
//! cell payload, then an 8-byte FNV-1a-64 checksum of the payload.
//! Anything that does not parse bit-for-bit is rejected as an integrity
//! failure — a reader never returns partial data.

use std::fs;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::kind::{CellEncoding, FunctionKind};
use crate::table::{FunctionTable, TableValues};

const MAGIC: &[u8; 4] = b"SAFL";
const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 4 + 1 + 2 + 8 + 1;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Checksum used for both the table payload and experiment output files.
pub fn checksum(bytes: &[u8]) -> u64 {
    fnv1a64(bytes)
}

fn payload_bytes(values: &TableValues) -> Vec<u8> {
    match values {
        TableValues::Int8(v) => v.iter().map(|&x| x as u8).collect(),
        TableValues::Int32(v) => {
            let mut out = Vec::with_capacity(v.len() * 4);
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
            out
        }
        TableValues::Float64(v) => {
            let mut out = Vec::with_capacity(v.len() * 8);
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
            out
        }
    }
}

pub fn encode_table(table: &FunctionTable) -> Vec<u8> {
    let payload = payload_bytes(table.values());
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&table.kind().kind_id().to_le_bytes());
    out.extend_from_slice(&table.limit().to_le_bytes());
    out.push(table.kind().encoding().tag());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    out
}

fn integrity(origin: &Path, detail: impl Into<String>) -> CoreError {
    CoreError::Integrity {
        path: origin.to_path_buf(),
        detail: detail.into(),
    }
}

/// Decode a table; `origin` names the source in integrity errors.
pub fn decode_table(bytes: &[u8], origin: &Path) -> Result<FunctionTable> {
    if bytes.len() < HEADER_LEN + 8 {
        return Err(integrity(origin, "file shorter than header plus checksum"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(integrity(origin, "bad magic bytes"));
    }
    if bytes[4] != VERSION {
        return Err(integrity(
            origin,
            format!("unsupported format version {:#04x}", bytes[4]),
        ));
    }
    let kind_id = u16::from_le_bytes([bytes[5], bytes[6]]);
    let limit = u64::from_le_bytes(bytes[7..15].try_into().unwrap());
    let encoding = CellEncoding::from_tag(bytes[15])
        .ok_or_else(|| integrity(origin, format!("unknown cell encoding {:#04x}", bytes[15])))?;
    if limit == 0 {
        return Err(integrity(origin, "zero-length table"));
    }

    let cell = encoding.cell_bytes() as usize;
    let expected_payload = (limit as usize)
        .checked_mul(cell)
        .ok_or_else(|| integrity(origin, "payload size overflows"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected_payload + 8 {
        return Err(integrity(
            origin,
            format!(
                "payload truncated: header promises {} cells ({} bytes), file carries {}",
                limit,
                expected_payload,
                body.len().saturating_sub(8)
            ),
        ));
    }
    let (payload, tail) = body.split_at(expected_payload);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let computed = fnv1a64(payload);
    if stored != computed {
        return Err(integrity(
            origin,
            format!("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}"),
        ));
    }

    let values = match encoding {
        CellEncoding::Int8 => TableValues::Int8(payload.iter().map(|&b| b as i8).collect()),
        CellEncoding::Int32 => TableValues::Int32(
            payload
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        CellEncoding::Float64 => TableValues::Float64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };

    // Constant tables recover c from the stored cells.
    let constant = if kind_id == 8 {
        values.get_f64(0)
    } else {
        0.0
    };
    let kind = FunctionKind::from_kind_id(kind_id, constant)
        .ok_or_else(|| integrity(origin, format!("unknown kind id {kind_id}")))?;
    if kind.encoding() != encoding {
        return Err(integrity(
            origin,
            format!("cell encoding {encoding:?} does not match kind {kind}"),
        ));
    }
    FunctionTable::from_parts(kind, values, None)
        .map_err(|e| integrity(origin, format!("malformed table: {e}")))
}

/// Write atomically: temp file in the same directory, then rename.
pub fn write_table(table: &FunctionTable, path: &Path) -> Result<()> {
    let bytes = encode_table(table);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<FunctionTable> {
    let bytes = fs::read(path)?;
    decode_table(&bytes, path)
}
