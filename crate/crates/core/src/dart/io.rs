//! Descriptor dumps.
//!
//! Binary layout (little-endian): `b"DART"`, `n_rings: u32`, `n_wedges: u32`,
//! `count: u64`, then `count` rows of `n_rings * n_wedges` `f32` values.

use std::fmt::Write as _;

use super::{DartDescriptor, DartError};

const MAGIC: &[u8; 4] = b"DART";

/// Raw descriptor rows as stored in a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorDump {
    pub n_rings: usize,
    pub n_wedges: usize,
    pub rows: Vec<Vec<f32>>,
}

impl DescriptorDump {
    pub fn dim(&self) -> usize {
        self.n_rings * self.n_wedges
    }

    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect()
    }
}

pub fn write_dump<'a, I>(n_rings: usize, n_wedges: usize, rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut body = Vec::new();
    let mut count = 0u64;
    for row in rows {
        assert_eq!(row.len(), n_rings * n_wedges);
        for &v in row {
            body.extend_from_slice(&(v as f32).to_le_bytes());
        }
        count += 1;
    }
    let mut out = Vec::with_capacity(20 + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n_rings as u32).to_le_bytes());
    out.extend_from_slice(&(n_wedges as u32).to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&body);
    out
}

pub fn read_dump(bytes: &[u8]) -> Result<DescriptorDump, DartError> {
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(DartError::Format("missing DART header".into()));
    }
    let n_rings = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n_wedges = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let dim = n_rings * n_wedges;
    let body = &bytes[20..];
    if dim == 0 || body.len() != count * dim * 4 {
        return Err(DartError::Format(format!(
            "expected {count} rows of {dim} floats, found {} bytes",
            body.len()
        )));
    }
    let rows = body
        .chunks_exact(dim * 4)
        .map(|row| {
            row.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok(DescriptorDump {
        n_rings,
        n_wedges,
        rows,
    })
}

/// `x,y,t,p,v0,...` per descriptor, with a header line.
pub fn write_csv(descriptors: &[DartDescriptor]) -> String {
    let mut out = String::new();
    let dim = descriptors.first().map_or(0, |d| d.values().len());
    out.push_str("x,y,t,p");
    for i in 0..dim {
        let _ = write!(out, ",v{i}");
    }
    out.push('\n');
    for d in descriptors {
        let c = d.center();
        let _ = write!(out, "{},{},{},{}", c.x, c.y, c.t, c.p as u8);
        for v in d.values() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
