//! Long-term object tracking: one-shot training from an initialization
//! window, a local event-driven tracker, and a global detector that takes
//! over whenever the tracker loses the object.

mod bootstrap;
mod detector;
mod tracker;

pub use bootstrap::{bootstrap_train, BootstrapConfig, OneShotModel, MIN_INIT_DESCRIPTORS};
pub use detector::{
    dilate_cross, largest_component, DetectDecision, DetectorConfig, DetectorModel, DetectorState,
};
pub use tracker::{TrackDecision, TrackerConfig, TrackerState};

pub(crate) use bootstrap::histogram_feature;

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::dart::{DartEngine, DartError, GridParams, LogPolarGrid, DEFAULT_FIFO_CAPACITY};
use crate::encoding::{EncodingError, KernelMapParams};
use crate::events::{BoundingBox, EventStream, Timestamp};
use crate::filter::{cascade, FilterParams};

#[derive(Debug, Error, PartialEq)]
pub enum ElotError {
    #[error("initialization window has {roi} object and {background} background descriptors")]
    InsufficientInit { roi: usize, background: usize },
    #[error("binary matrix has no set pixel")]
    NoComponent,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Dart(#[from] DartError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElotConfig {
    pub grid: GridParams,
    pub fifo_capacity: usize,
    /// Runs the noise filters before tracking. Off by default: background
    /// activity is what lets an abandoned box score low and be declared lost.
    pub apply_filter: bool,
    pub filter: FilterParams,
    /// Length of the initialization window from the first event.
    pub init_window_us: Timestamp,
    /// Per-class cap on initialization descriptors, taken at a uniform stride.
    pub max_init_descriptors: usize,
    pub kernel: KernelMapParams,
    pub bootstrap: BootstrapConfig,
    pub tracker: TrackerConfig,
    pub detector: DetectorConfig,
}

impl Default for ElotConfig {
    fn default() -> Self {
        Self {
            grid: GridParams::default(),
            fifo_capacity: DEFAULT_FIFO_CAPACITY,
            apply_filter: false,
            filter: FilterParams::default(),
            init_window_us: 300_000,
            max_init_descriptors: 2000,
            kernel: KernelMapParams::default(),
            bootstrap: BootstrapConfig::default(),
            tracker: TrackerConfig::default(),
            detector: DetectorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackMode {
    Init,
    Tracked,
    Failback,
    Lost,
    Detected,
}

impl TrackMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackMode::Init => "init",
            TrackMode::Tracked => "tracked",
            TrackMode::Failback => "failback",
            TrackMode::Lost => "lost",
            TrackMode::Detected => "detected",
        }
    }

    /// Whether a result in this mode asserts the object is at its box.
    pub fn is_prediction(&self) -> bool {
        !matches!(self, TrackMode::Lost)
    }
}

impl fmt::Display for TrackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "init" => TrackMode::Init,
            "tracked" => TrackMode::Tracked,
            "failback" => TrackMode::Failback,
            "lost" => TrackMode::Lost,
            "detected" => TrackMode::Detected,
            other => return Err(format!("unknown track mode '{other}'")),
        })
    }
}

/// One tracker or detector decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackResult {
    pub t_us: Timestamp,
    pub mode: TrackMode,
    pub bbox: BoundingBox,
    /// SVM score; `None` for initialization and detection results.
    pub score: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ElotOutput {
    pub results: Vec<TrackResult>,
    pub model: OneShotModel,
    pub detector_activations: usize,
}

/// Trains on the initialization window, then replays the stream from its
/// first event through the tracker, switching to the detector whenever the
/// object is lost and back once it is found.
pub fn elot_run(
    stream: &EventStream,
    roi0: BoundingBox,
    cfg: &ElotConfig,
) -> Result<ElotOutput, ElotError> {
    cfg.tracker.validate()?;
    if !(cfg.detector.tau_d > 0.0 && cfg.detector.tau_d <= 1.0) {
        return Err(ElotError::Config(format!(
            "tau_d must lie in (0, 1], got {}",
            cfg.detector.tau_d
        )));
    }
    let (w, h) = (stream.width(), stream.height());
    if roi0.x_max >= w || roi0.y_max >= h {
        return Err(ElotError::Config("initial box outside the sensor".into()));
    }
    let filtered;
    let stream = if cfg.apply_filter {
        filtered = cascade(stream, cfg.filter);
        &filtered
    } else {
        stream
    };
    let grid = Arc::new(LogPolarGrid::new(cfg.grid)?);
    let t0 = stream.first_t().unwrap_or(0);

    let mut roi_desc = Vec::new();
    let mut bg_desc = Vec::new();
    {
        let mut engine = DartEngine::new(grid.clone(), w, h, cfg.fifo_capacity)?;
        let mut buf = vec![0.0; grid.dim()];
        let window = stream.slice(t0, t0.saturating_add(cfg.init_window_us));
        for e in window.events() {
            engine.push(e);
            engine.describe_into(e.x, e.y, &mut buf);
            if roi0.contains(e.x, e.y) {
                roi_desc.push(buf.clone());
            } else {
                bg_desc.push(buf.clone());
            }
        }
    }
    let cap = cfg.max_init_descriptors.max(MIN_INIT_DESCRIPTORS);
    let roi_desc = stride_cap(roi_desc, cap);
    let bg_desc = stride_cap(bg_desc, cap);
    let mut model = bootstrap_train(
        &roi_desc,
        &bg_desc,
        cfg.grid.n_wedges,
        &cfg.bootstrap,
        &cfg.kernel,
    )?;

    let mut svm = model.svm.clone();
    let k = model.codebook.k();
    let mut engine = DartEngine::new(grid.clone(), w, h, cfg.fifo_capacity)?;
    let mut buf = vec![0.0; grid.dim()];
    let mut tracker = TrackerState::new(roi0, cfg.tracker, w, h, k)?;
    let mut detector: Option<DetectorState> = None;
    let mut last_area = roi0.area();
    let mut activations = 0;
    let mut results = vec![TrackResult {
        t_us: t0,
        mode: TrackMode::Init,
        bbox: roi0,
        score: None,
    }];

    for e in stream.events() {
        engine.push(e);
        match detector.as_mut() {
            None => {
                if !tracker.contains(e.x, e.y) {
                    continue;
                }
                engine.describe_into(e.x, e.y, &mut buf);
                let word = model.forest.nearest(&model.codebook, &buf);
                let (mode, bbox, score) =
                    match tracker.observe(e.x, e.y, word, &mut svm, &cfg.kernel)? {
                        TrackDecision::Outside | TrackDecision::Accumulating => continue,
                        TrackDecision::Updated { bbox, score } => (TrackMode::Tracked, bbox, score),
                        TrackDecision::Failback { bbox, score, .. } => {
                            (TrackMode::Failback, bbox, score)
                        }
                        TrackDecision::Lost { bbox, score } => {
                            last_area = bbox.area();
                            detector = Some(DetectorState::new(w, h, &cfg.detector));
                            activations += 1;
                            (TrackMode::Lost, bbox, score)
                        }
                    };
                results.push(TrackResult {
                    t_us: e.t,
                    mode,
                    bbox,
                    score: Some(score),
                });
            }
            Some(det) => {
                engine.describe_into(e.x, e.y, &mut buf);
                let word = model.forest.nearest(&model.codebook, &buf);
                if let DetectDecision::Found(bbox) =
                    det.observe(e.x, e.y, word, &model.detector, last_area)
                {
                    detector = None;
                    tracker.reinitialize(bbox);
                    results.push(TrackResult {
                        t_us: e.t,
                        mode: TrackMode::Detected,
                        bbox,
                        score: None,
                    });
                }
            }
        }
    }
    model.svm = svm;
    Ok(ElotOutput {
        results,
        model,
        detector_activations: activations,
    })
}

fn stride_cap(v: Vec<Vec<f64>>, cap: usize) -> Vec<Vec<f64>> {
    if v.len() <= cap {
        return v;
    }
    let n = v.len();
    (0..cap).map(|i| v[i * n / cap].clone()).collect()
}

/// `t_decision_us,mode,x_min,y_min,x_max,y_max,score` with a header line;
/// the score column is empty where no score applies.
pub fn write_track_csv(results: &[TrackResult]) -> String {
    let mut out = String::from("t_decision_us,mode,x_min,y_min,x_max,y_max,score\n");
    for r in results {
        let b = r.bbox;
        let _ = write!(
            out,
            "{},{},{},{},{},{},",
            r.t_us, r.mode, b.x_min, b.y_min, b.x_max, b.y_max
        );
        if let Some(s) = r.score {
            let _ = write!(out, "{s}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_track_csv(text: &str) -> Result<Vec<TrackResult>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if n == 0 && line.starts_with("t_decision_us") || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("line {}: expected 7 fields", n + 1));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<u16>()
                .map_err(|e| format!("line {}: {e}", n + 1))
        };
        let bbox = BoundingBox::new(num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?)
            .ok_or_else(|| format!("line {}: inverted box", n + 1))?;
        let score = match f[6].trim() {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|e| format!("line {}: {e}", n + 1))?,
            ),
        };
        out.push(TrackResult {
            t_us: f[0]
                .trim()
                .parse()
                .map_err(|e| format!("line {}: {e}", n + 1))?,
            mode: f[1].trim().parse()?,
            bbox,
            score,
        });
    }
    Ok(out)
}
