//! Model files.
//!
//! Binary SVM (little-endian): `b"DSVM"`, `dim: u32`, then `f64` fields
//! `b`, `lambda`, `final_step`, `score_sum`, a `u64` score count, and `dim`
//! `f64` weights. One-vs-rest files are `b"DMCL"`, `n: u32`, then per class
//! a `u32` label, a `u64` byte length and an embedded SVM record.

use super::{ClassifyError, MulticlassModel, SvmModel};

const SVM_MAGIC: &[u8; 4] = b"DSVM";
const MULTI_MAGIC: &[u8; 4] = b"DMCL";

pub fn write_svm(model: &SvmModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 40 + 8 * model.w.len());
    out.extend_from_slice(SVM_MAGIC);
    out.extend_from_slice(&(model.w.len() as u32).to_le_bytes());
    for v in [model.b, model.lambda, model.final_step, model.score_sum] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&model.score_count.to_le_bytes());
    for &w in &model.w {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassifyError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ClassifyError::Format("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ClassifyError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ClassifyError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ClassifyError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn magic(&mut self, m: &[u8; 4]) -> Result<(), ClassifyError> {
        if self.take(4)? != m {
            return Err(ClassifyError::Format(format!(
                "missing {} header",
                String::from_utf8_lossy(m)
            )));
        }
        Ok(())
    }
}

fn read_svm_from(r: &mut Reader) -> Result<SvmModel, ClassifyError> {
    r.magic(SVM_MAGIC)?;
    let dim = r.u32()? as usize;
    let b = r.f64()?;
    let lambda = r.f64()?;
    let final_step = r.f64()?;
    let score_sum = r.f64()?;
    let score_count = r.u64()?;
    let w = r
        .take(
            dim.checked_mul(8)
                .ok_or_else(|| ClassifyError::Format("size overflow".into()))?,
        )?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>();
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(ClassifyError::Format("non-finite weights".into()));
    }
    Ok(SvmModel {
        w,
        b,
        lambda,
        final_step,
        score_sum,
        score_count,
    })
}

pub fn read_svm(bytes: &[u8]) -> Result<SvmModel, ClassifyError> {
    let mut r = Reader { bytes, pos: 0 };
    let m = read_svm_from(&mut r)?;
    if r.pos != bytes.len() {
        return Err(ClassifyError::Format("trailing bytes".into()));
    }
    Ok(m)
}

pub fn write_multiclass(model: &MulticlassModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MULTI_MAGIC);
    out.extend_from_slice(&(model.labels().len() as u32).to_le_bytes());
    for (label, m) in model.labels().iter().zip(model.models()) {
        let body = write_svm(m);
        out.extend_from_slice(&label.to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&body);
    }
    out
}

pub fn read_multiclass(bytes: &[u8]) -> Result<MulticlassModel, ClassifyError> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(MULTI_MAGIC)?;
    let n = r.u32()? as usize;
    let mut pairs = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let label = r.u32()?;
        let len = r.u64()? as usize;
        let start = r.pos;
        let m = read_svm_from(&mut r)?;
        if r.pos - start != len {
            return Err(ClassifyError::Format("record length mismatch".into()));
        }
        pairs.push((label, m));
    }
    if r.pos != bytes.len() {
        return Err(ClassifyError::Format("trailing bytes".into()));
    }
    MulticlassModel::new(pairs)
}
