//! Codebook files.
//!
//! Layout (little-endian): `b"DCBK"`, `K: u32`, `d: u32`, `K * d` `f32`
//! centroids, then an optional forest trailer `b"KDFS"`, `n_trees: u32`,
//! `max_checks: u32`, `seed: u64`. The forest itself is rebuilt from the
//! stored centroids and seed on load.

use super::{Codebook, EncodingError, ForestParams, KdForest};

const MAGIC: &[u8; 4] = b"DCBK";
const FOREST_MAGIC: &[u8; 4] = b"KDFS";

pub fn write_codebook(codebook: &Codebook, forest: Option<&ForestParams>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + codebook.as_flat().len() * 4 + 20);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(codebook.k() as u32).to_le_bytes());
    out.extend_from_slice(&(codebook.dim() as u32).to_le_bytes());
    for &v in codebook.as_flat() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    if let Some(p) = forest {
        out.extend_from_slice(FOREST_MAGIC);
        out.extend_from_slice(&(p.n_trees as u32).to_le_bytes());
        out.extend_from_slice(&(p.max_checks as u32).to_le_bytes());
        out.extend_from_slice(&p.seed.to_le_bytes());
    }
    out
}

/// Codebook plus the rebuilt forest when the file carries one.
pub fn read_codebook(bytes: &[u8]) -> Result<(Codebook, Option<KdForest>), EncodingError> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(EncodingError::Format("missing DCBK header".into()));
    }
    let k = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body_len = k
        .checked_mul(d)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| EncodingError::Format("header sizes overflow".into()))?;
    let rest = &bytes[12..];
    if rest.len() < body_len {
        return Err(EncodingError::Format(format!(
            "expected {body_len} centroid bytes, found {}",
            rest.len()
        )));
    }
    let centroids = rest[..body_len]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let codebook = Codebook::new(d, centroids).map_err(|e| EncodingError::Format(e.to_string()))?;
    let trailer = &rest[body_len..];
    let forest = match trailer.len() {
        0 => None,
        20 if &trailer[..4] == FOREST_MAGIC => {
            let params = ForestParams {
                n_trees: u32::from_le_bytes(trailer[4..8].try_into().unwrap()) as usize,
                max_checks: u32::from_le_bytes(trailer[8..12].try_into().unwrap()) as usize,
                seed: u64::from_le_bytes(trailer[12..20].try_into().unwrap()),
            };
            Some(KdForest::build(&codebook, params))
        }
        n => {
            return Err(EncodingError::Format(format!(
                "unexpected {n}-byte trailer"
            )))
        }
    };
    Ok((codebook, forest))
}
