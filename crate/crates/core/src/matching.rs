//! Descriptor correspondence between two time slices with the
//! nearest/second-nearest distance ratio test.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dart::{DartEngine, DartError, LogPolarGrid};
use crate::encoding::{dist2, Codebook, EncodingError, ForestParams, KdForest};
use crate::events::{EventStream, Timestamp};
use crate::filter::{cascade, FilterParams};

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("second set needs at least two descriptors, has {0}")]
    InsufficientCandidates(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("descriptor dimension {found} differs from {expected}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Dart(#[from] DartError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub x: u16,
    pub y: u16,
    pub t: Timestamp,
    pub descriptor: Vec<f64>,
}

/// Descriptors of one time slice, all of one dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSet {
    features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new(features: Vec<Feature>) -> Result<Self, MatchError> {
        if let Some(first) = features.first() {
            let d = first.descriptor.len();
            if let Some(f) = features.iter().find(|f| f.descriptor.len() != d) {
                return Err(MatchError::Dimension {
                    expected: d,
                    found: f.descriptor.len(),
                });
            }
        }
        Ok(Self { features })
    }

    /// Every `stride`-th event with `t0 <= t < t1`, described with a memory
    /// warmed by all earlier events. Filters run first when given.
    pub fn from_stream(
        stream: &EventStream,
        grid: &Arc<LogPolarGrid>,
        fifo_capacity: usize,
        filter: Option<FilterParams>,
        t0: Timestamp,
        t1: Timestamp,
        stride: usize,
    ) -> Result<Self, MatchError> {
        if t1 <= t0 || stride == 0 {
            return Err(MatchError::Config(
                "need t0 < t1 and a positive stride".into(),
            ));
        }
        let filtered;
        let stream = match filter {
            Some(p) => {
                filtered = cascade(stream, p);
                &filtered
            }
            None => stream,
        };
        let mut engine =
            DartEngine::new(grid.clone(), stream.width(), stream.height(), fifo_capacity)?;
        let mut buf = vec![0.0; grid.dim()];
        let mut features = Vec::new();
        let mut seen = 0usize;
        for e in stream.events() {
            if e.t >= t1 {
                break;
            }
            engine.push(e);
            if e.t < t0 {
                continue;
            }
            if seen.is_multiple_of(stride) {
                engine.describe_into(e.x, e.y, &mut buf);
                features.push(Feature {
                    x: e.x,
                    y: e.y,
                    t: e.t,
                    descriptor: buf.clone(),
                });
            }
            seen += 1;
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.features.first().map(|f| f.descriptor.len())
    }
}

/// Approximate search structure over the second set.
#[derive(Debug, Clone)]
pub struct MatchIndex {
    points: Codebook,
    forest: KdForest,
}

impl MatchIndex {
    pub fn build(b: &FeatureSet, params: ForestParams) -> Result<Self, MatchError> {
        if b.len() < 2 {
            return Err(MatchError::InsufficientCandidates(b.len()));
        }
        let rows: Vec<Vec<f64>> = b.features.iter().map(|f| f.descriptor.clone()).collect();
        let points = Codebook::from_rows(&rows)?;
        let forest = KdForest::build(&points, params);
        Ok(Self { points, forest })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchParams {
    /// Matches need `d1 / d2` strictly below this.
    pub ratio: f64,
    /// Also require the B feature's nearest A feature to be the query.
    pub mutual: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            ratio: 0.6,
            mutual: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub index_a: usize,
    pub index_b: usize,
    /// Euclidean distance to the nearest B descriptor.
    pub distance_first: f64,
    pub distance_second: f64,
}

impl MatchPair {
    pub fn ratio(&self) -> f64 {
        self.distance_first / self.distance_second
    }
}

/// Two nearest indices by squared distance, lowest index first on ties.
fn two_nearest(x: &[f64], set: &FeatureSet) -> [(usize, f64); 2] {
    let mut best = [(usize::MAX, f64::INFINITY); 2];
    for (j, f) in set.features.iter().enumerate() {
        let d = dist2(x, &f.descriptor);
        if d < best[0].1 {
            best[1] = best[0];
            best[0] = (j, d);
        } else if d < best[1].1 {
            best[1] = (j, d);
        }
    }
    best
}

/// For every feature of `a`, its nearest and second-nearest features in
/// `b`; the pair is kept when the distance ratio is below the threshold.
/// A zero second distance is ambiguous and never kept.
pub fn match_sets(
    a: &FeatureSet,
    b: &FeatureSet,
    params: &MatchParams,
    index: Option<&MatchIndex>,
) -> Result<Vec<MatchPair>, MatchError> {
    if !(params.ratio > 0.0 && params.ratio <= 1.0) {
        return Err(MatchError::Config(format!(
            "ratio must lie in (0, 1], got {}",
            params.ratio
        )));
    }
    if b.len() < 2 {
        return Err(MatchError::InsufficientCandidates(b.len()));
    }
    let d = b.dim().expect("non-empty");
    if let Some(found) = a.dim().filter(|&x| x != d) {
        return Err(MatchError::Dimension { expected: d, found });
    }
    if let Some(ix) = index {
        if ix.points.k() != b.len() {
            return Err(MatchError::Config("index was built for another set".into()));
        }
    }
    let mut out = Vec::new();
    for (i, f) in a.features.iter().enumerate() {
        let [(j1, d1), (_, d2)] = match index {
            None => two_nearest(&f.descriptor, b),
            Some(ix) => {
                let nn = ix.forest.knn(&ix.points, &f.descriptor, 2);
                if nn.len() < 2 {
                    continue;
                }
                [nn[0], nn[1]]
            }
        };
        if d2 == 0.0 {
            continue;
        }
        let (d1, d2) = (d1.sqrt(), d2.sqrt());
        if d1 / d2 >= params.ratio {
            continue;
        }
        if params.mutual {
            let [(back, _), _] = two_nearest(&b.features[j1].descriptor, a);
            if back != i {
                continue;
            }
        }
        out.push(MatchPair {
            index_a: i,
            index_b: j1,
            distance_first: d1,
            distance_second: d2,
        });
    }
    Ok(out)
}

/// `xa,ya,ta,xb,yb,tb,ratio` with a header line.
pub fn write_match_csv(a: &FeatureSet, b: &FeatureSet, pairs: &[MatchPair]) -> String {
    let mut out = String::from("xa,ya,ta,xb,yb,tb,ratio\n");
    for p in pairs {
        let fa = &a.features[p.index_a];
        let fb = &b.features[p.index_b];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fa.x,
            fa.y,
            fa.t,
            fb.x,
            fb.y,
            fb.t,
            p.ratio()
        );
    }
    out
}
