use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ClassifyError, MulticlassModel, SparseVector};
use crate::dart::{DartEngine, GridParams, LogPolarGrid, DEFAULT_FIFO_CAPACITY};
use crate::encoding::{
    kernel_map_sparse, quantize, Codebook, KdForest, KernelMapParams, SpmAccumulator, SpmParams,
};
use crate::events::{Event, EventStream, Timestamp};
use crate::filter::{cascade, FilterParams};

/// Everything between a raw stream and a kernel-mapped vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderConfig {
    pub grid: GridParams,
    pub filter: FilterParams,
    pub fifo_capacity: usize,
    pub spm: SpmParams,
    pub kernel: KernelMapParams,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            grid: GridParams::default(),
            filter: FilterParams::default(),
            fifo_capacity: DEFAULT_FIFO_CAPACITY,
            spm: SpmParams::default(),
            kernel: KernelMapParams::default(),
        }
    }
}

/// Descriptors of every `stride`-th event surviving the filters.
pub fn collect_descriptors(
    stream: &EventStream,
    grid: &Arc<LogPolarGrid>,
    filter: FilterParams,
    fifo_capacity: usize,
    stride: usize,
) -> Result<Vec<Vec<f64>>, ClassifyError> {
    let filtered = cascade(stream, filter);
    let mut engine = DartEngine::new(grid.clone(), stream.width(), stream.height(), fifo_capacity)?;
    let mut buf = vec![0.0; grid.dim()];
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(filtered.len() / stride + 1);
    for (i, e) in filtered.events().iter().enumerate() {
        engine.push(e);
        if i % stride == 0 {
            engine.describe_into(e.x, e.y, &mut buf);
            out.push(buf.clone());
        }
    }
    Ok(out)
}

/// Filtered events of one stream with their codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStream {
    pub width: u16,
    pub height: u16,
    /// Timestamp of the first raw event; prefixes are measured from here.
    pub origin: Timestamp,
    pub words: Vec<(Event, usize)>,
}

/// Trained encoding artifacts applied to streams.
#[derive(Debug, Clone)]
pub struct Encoder {
    config: EncoderConfig,
    grid: Arc<LogPolarGrid>,
    codebook: Codebook,
    forest: Option<KdForest>,
}

impl Encoder {
    pub fn new(
        config: EncoderConfig,
        codebook: Codebook,
        forest: Option<KdForest>,
    ) -> Result<Self, ClassifyError> {
        config.spm.validate()?;
        config.kernel.validate()?;
        let grid = Arc::new(LogPolarGrid::new(config.grid)?);
        if codebook.dim() != grid.dim() {
            return Err(ClassifyError::Shape {
                expected: grid.dim(),
                found: codebook.dim(),
            });
        }
        Ok(Self {
            config,
            grid,
            codebook,
            forest,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn grid(&self) -> &Arc<LogPolarGrid> {
        &self.grid
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// Length of the kernel-mapped vectors this encoder produces.
    pub fn output_dim(&self) -> usize {
        self.config
            .kernel
            .output_dim(self.config.spm.n_cells() * self.codebook.k())
    }

    /// Filter, describe and quantize every event.
    pub fn quantize_stream(&self, stream: &EventStream) -> Result<EncodedStream, ClassifyError> {
        let filtered = cascade(stream, self.config.filter);
        let mut engine = DartEngine::new(
            self.grid.clone(),
            stream.width(),
            stream.height(),
            self.config.fifo_capacity,
        )?;
        let mut buf = vec![0.0; self.grid.dim()];
        let words = filtered
            .events()
            .iter()
            .map(|e| {
                engine.push(e);
                engine.describe_into(e.x, e.y, &mut buf);
                (*e, quantize(&buf, &self.codebook, self.forest.as_ref()))
            })
            .collect();
        Ok(EncodedStream {
            width: stream.width(),
            height: stream.height(),
            origin: stream.first_t().unwrap_or(0),
            words,
        })
    }

    /// Pyramid-pools the words of events with `t < origin + prefix_us`
    /// (all events when `None`) and kernel-maps the result.
    pub fn pool(
        &self,
        encoded: &EncodedStream,
        prefix_us: Option<Timestamp>,
    ) -> Result<SparseVector, ClassifyError> {
        let end = prefix_us.map(|d| encoded.origin.saturating_add(d));
        let mut acc = SpmAccumulator::new(
            self.config.spm.clone(),
            encoded.width,
            encoded.height,
            self.codebook.k(),
        )?;
        for (e, w) in &encoded.words {
            if end.is_some_and(|end| e.t >= end) {
                break;
            }
            acc.add(e.x, e.y, *w);
        }
        if acc.count() == 0 {
            return Err(ClassifyError::NoEvidence);
        }
        let spm = acc.vector();
        let nonzero: Vec<(usize, f64)> = spm
            .values
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, v)| v != 0.0)
            .collect();
        let mapped = kernel_map_sparse(&nonzero, &self.config.kernel)?;
        Ok(SparseVector::from_sorted(self.output_dim(), mapped))
    }

    pub fn encode(&self, stream: &EventStream) -> Result<SparseVector, ClassifyError> {
        self.pool(&self.quantize_stream(stream)?, None)
    }

    pub fn classify(
        &self,
        stream: &EventStream,
        model: &MulticlassModel,
    ) -> Result<u32, ClassifyError> {
        model.predict(&self.encode(stream)?)
    }

    /// Labels for growing prefixes of one stream; `None` where the prefix
    /// holds no filtered events.
    pub fn classify_prefixes(
        &self,
        stream: &EventStream,
        model: &MulticlassModel,
        prefixes_us: &[Timestamp],
    ) -> Result<Vec<Option<u32>>, ClassifyError> {
        let encoded = self.quantize_stream(stream)?;
        prefixes_us
            .iter()
            .map(|&d| match self.pool(&encoded, Some(d)) {
                Ok(x) => model.predict(&x).map(Some),
                Err(ClassifyError::NoEvidence) => Ok(None),
                Err(e) => Err(e),
            })
            .collect()
    }
}
