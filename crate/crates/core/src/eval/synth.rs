use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::events::{
    AnnotatedInterval, AnnotationTrack, BoundingBox, Event, EventStream, Source, Timestamp,
    DEFAULT_INTERVAL_US,
};

/// Pose of the shape at one instant; poses between keyframes are linearly
/// interpolated and visibility holds until the next keyframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyframe {
    pub t_us: Timestamp,
    pub x: f64,
    pub y: f64,
    /// Rotation in radians, counter-clockwise in the `(x, y)` pixel frame.
    #[serde(default)]
    pub angle: f64,
    #[serde(default = "visible_default")]
    pub visible: bool,
}

fn visible_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSceneConfig {
    pub width: u16,
    pub height: u16,
    /// Closed polygon in shape coordinates, centred near the origin.
    pub shape: Vec<[f64; 2]>,
    pub keyframes: Vec<Keyframe>,
    /// Expected edge events per pixel of outline length per millisecond.
    pub edge_rate: f64,
    /// Expected background events per millisecond over the whole sensor.
    pub noise_rate: f64,
    pub duration_us: Timestamp,
    pub interval_us: Timestamp,
}

impl Default for SyntheticSceneConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 96,
            shape: vec![
                [-10.0, -8.0],
                [10.0, -8.0],
                [10.0, 8.0],
                [0.0, 12.0],
                [-10.0, 8.0],
            ],
            keyframes: vec![Keyframe {
                t_us: 0,
                x: 64.0,
                y: 48.0,
                angle: 0.0,
                visible: true,
            }],
            edge_rate: 0.5,
            noise_rate: 0.0,
            duration_us: 1_000_000,
            interval_us: DEFAULT_INTERVAL_US,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pose {
    x: f64,
    y: f64,
    angle: f64,
    visible: bool,
}

impl SyntheticSceneConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.width == 0 || self.height == 0 {
            return Err(EvalError::Config("empty sensor".into()));
        }
        if self.shape.len() < 3 || self.shape.iter().flatten().any(|v| !v.is_finite()) {
            return Err(EvalError::Config(
                "shape needs at least three finite vertices".into(),
            ));
        }
        if self.perimeter() <= 0.0 {
            return Err(EvalError::Config("shape outline has zero length".into()));
        }
        if self.keyframes.is_empty() {
            return Err(EvalError::Config("trajectory needs a keyframe".into()));
        }
        if self.keyframes.windows(2).any(|w| w[1].t_us <= w[0].t_us) {
            return Err(EvalError::Config("keyframe times must increase".into()));
        }
        if self
            .keyframes
            .iter()
            .any(|k| !(k.x.is_finite() && k.y.is_finite() && k.angle.is_finite()))
        {
            return Err(EvalError::Config("non-finite keyframe".into()));
        }
        if !(self.edge_rate >= 0.0
            && self.noise_rate >= 0.0
            && self.edge_rate.is_finite()
            && self.noise_rate.is_finite())
        {
            return Err(EvalError::Config(
                "rates must be finite and non-negative".into(),
            ));
        }
        if self.interval_us == 0 {
            return Err(EvalError::Config("interval must be positive".into()));
        }
        Ok(())
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.shape.len();
        (0..n).map(move |i| (self.shape[i], self.shape[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges()
            .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
            .sum()
    }

    fn pose(&self, t: f64) -> Pose {
        let kf = &self.keyframes;
        let i = kf.partition_point(|k| (k.t_us as f64) <= t);
        let at = |k: &Keyframe| Pose {
            x: k.x,
            y: k.y,
            angle: k.angle,
            visible: k.visible,
        };
        if i == 0 {
            return at(&kf[0]);
        }
        if i == kf.len() {
            return at(&kf[kf.len() - 1]);
        }
        let (a, b) = (&kf[i - 1], &kf[i]);
        let u = (t - a.t_us as f64) / (b.t_us - a.t_us) as f64;
        Pose {
            x: a.x + u * (b.x - a.x),
            y: a.y + u * (b.y - a.y),
            angle: a.angle + u * (b.angle - a.angle),
            visible: a.visible,
        }
    }

    /// Pixel the shape point `p` lands on under `pose`, if on the sensor.
    fn project(&self, p: [f64; 2], pose: &Pose) -> Option<(u16, u16)> {
        let (s, c) = pose.angle.sin_cos();
        let x = (pose.x + c * p[0] - s * p[1] + 0.5).floor();
        let y = (pose.y + s * p[0] + c * p[1] + 0.5).floor();
        (x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64)
            .then_some((x as u16, y as u16))
    }

    /// Box of the visible outline at time `t`, clipped to the sensor.
    pub fn ground_truth_box(&self, t: f64) -> Option<BoundingBox> {
        let pose = self.pose(t);
        if !pose.visible {
            return None;
        }
        let (s, c) = pose.angle.sin_cos();
        let pts: Vec<(f64, f64)> = self
            .shape
            .iter()
            .map(|p| {
                (
                    (pose.x + c * p[0] - s * p[1] + 0.5).floor(),
                    (pose.y + s * p[0] + c * p[1] + 0.5).floor(),
                )
            })
            .collect();
        let x0 = pts
            .iter()
            .map(|p| p.0)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let y0 = pts
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let x1 = pts
            .iter()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max)
            .min(self.width as f64 - 1.0);
        let y1 = pts
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max)
            .min(self.height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        BoundingBox::new(x0 as u16, y0 as u16, x1 as u16, y1 as u16)
    }
}

/// Generated events with their ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub stream: EventStream,
    pub track: AnnotationTrack,
    /// Shape-frame point behind each event; `None` for background noise.
    pub correspondence: Vec<Option<[f64; 2]>>,
}

/// Outline events arrive as a Poisson process of rate `edge_rate` per
/// pixel of outline length at uniformly drawn outline positions; background
/// events form an independent Poisson process at uniform pixels.
pub fn synth_generate(cfg: &SyntheticSceneConfig, seed: u64) -> Result<SyntheticScene, EvalError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let duration = cfg.duration_us as f64;

    let edges: Vec<([f64; 2], [f64; 2], f64)> = cfg
        .edges()
        .map(|(a, b)| (a, b, (b[0] - a[0]).hypot(b[1] - a[1])))
        .collect();
    let perimeter: f64 = edges.iter().map(|e| e.2).sum();
    let edge_lambda = cfg.edge_rate * perimeter / 1000.0;
    let noise_lambda = cfg.noise_rate / 1000.0;

    let mut edge_events = Vec::new();
    if edge_lambda > 0.0 {
        let mut t = 0.0;
        loop {
            t += -(1.0 - rng.gen::<f64>()).ln() / edge_lambda;
            if t >= duration {
                break;
            }
            let mut s = rng.gen::<f64>() * perimeter;
            let p = rng.gen::<bool>();
            let mut point = edges[edges.len() - 1].1;
            for &(a, b, len) in &edges {
                if s < len {
                    let u = s / len;
                    point = [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
                    break;
                }
                s -= len;
            }
            let pose = cfg.pose(t);
            if !pose.visible {
                continue;
            }
            if let Some((x, y)) = cfg.project(point, &pose) {
                edge_events.push((Event::new(x, y, t.floor() as Timestamp, p), Some(point)));
            }
        }
    }
    let mut noise_events = Vec::new();
    if noise_lambda > 0.0 {
        let mut t = 0.0;
        loop {
            t += -(1.0 - noise_rng.gen::<f64>()).ln() / noise_lambda;
            if t >= duration {
                break;
            }
            let x = noise_rng.gen_range(0..cfg.width);
            let y = noise_rng.gen_range(0..cfg.height);
            let p = noise_rng.gen::<bool>();
            noise_events.push((Event::new(x, y, t.floor() as Timestamp, p), None));
        }
    }

    let mut merged = Vec::with_capacity(edge_events.len() + noise_events.len());
    let (mut i, mut j) = (0, 0);
    while i < edge_events.len() || j < noise_events.len() {
        let take_edge = j == noise_events.len()
            || (i < edge_events.len() && edge_events[i].0.t <= noise_events[j].0.t);
        if take_edge {
            merged.push(edge_events[i]);
            i += 1;
        } else {
            merged.push(noise_events[j]);
            j += 1;
        }
    }
    let (events, correspondence): (Vec<Event>, Vec<Option<[f64; 2]>>) = merged.into_iter().unzip();
    let stream = EventStream::new(events, cfg.width, cfg.height, Source::Synthetic)
        .map_err(|e| EvalError::Config(e.to_string()))?;

    let mut intervals = Vec::new();
    let mut start = 0;
    while start < cfg.duration_us {
        let end = (start + cfg.interval_us).min(cfg.duration_us);
        let mid = 0.5 * (start + end) as f64;
        intervals.push(AnnotatedInterval {
            start,
            end,
            bbox: cfg.ground_truth_box(mid),
        });
        start = end;
    }
    let track = AnnotationTrack::new(intervals).expect("disjoint by construction");
    Ok(SyntheticScene {
        stream,
        track,
        correspondence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_scene_without_noise() {
        let cfg = SyntheticSceneConfig {
            duration_us: 50_000,
            ..SyntheticSceneConfig::default()
        };
        let s = synth_generate(&cfg, 1).unwrap();
        assert!(!s.stream.is_empty());
        let b0 = s.track.intervals()[0].bbox.unwrap();
        assert!(s.track.intervals().iter().all(|iv| iv.bbox == Some(b0)));
        assert!(s.stream.events().iter().all(|e| b0.contains(e.x, e.y)));
        assert!(s.correspondence.iter().all(|c| c.is_some()));
        assert_eq!(b0, BoundingBox::new(54, 40, 74, 60).unwrap());
    }

    #[test]
    fn same_seed_same_stream() {
        let cfg = SyntheticSceneConfig {
            noise_rate: 5.0,
            duration_us: 30_000,
            ..SyntheticSceneConfig::default()
        };
        assert_eq!(
            synth_generate(&cfg, 9).unwrap(),
            synth_generate(&cfg, 9).unwrap()
        );
        assert_ne!(
            synth_generate(&cfg, 9).unwrap().stream,
            synth_generate(&cfg, 10).unwrap().stream
        );
    }

    #[test]
    fn degenerate_shapes_rejected() {
        let mut cfg = SyntheticSceneConfig::default();
        cfg.shape = vec![[0.0, 0.0], [1.0, 1.0]];
        assert!(synth_generate(&cfg, 0).is_err());
        cfg.shape = vec![[0.0, 0.0]; 4];
        assert!(synth_generate(&cfg, 0).is_err());
    }

    #[test]
    fn invisible_segments_emit_only_noise() {
        let cfg = SyntheticSceneConfig {
            keyframes: vec![Keyframe {
                t_us: 0,
                x: 64.0,
                y: 48.0,
                angle: 0.0,
                visible: false,
            }],
            noise_rate: 1.0,
            duration_us: 20_000,
            ..SyntheticSceneConfig::default()
        };
        let s = synth_generate(&cfg, 3).unwrap();
        assert!(s.correspondence.iter().all(|c| c.is_none()));
        assert!(s.track.intervals().iter().all(|iv| iv.bbox.is_none()));
    }
}
