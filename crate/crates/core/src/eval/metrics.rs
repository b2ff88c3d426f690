use std::fmt::Write as _;

use super::EvalError;
use crate::elot::TrackResult;
use crate::events::{AnnotationTrack, BoundingBox, Event, EventStream, Timestamp};

/// IoU at or above which an interval counts as an overlap success.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

/// Event-count overlap of one annotation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// `tp / (tp + fp + fn)`, zero when no event falls in either box.
    pub iou: f64,
    /// Distance between box centres in pixels, when both boxes exist.
    pub center_error_px: Option<f64>,
    /// Centre distance divided by the ground-truth box diagonal.
    pub center_error_norm: Option<f64>,
}

impl IntervalMetrics {
    pub fn success(&self, threshold: f64) -> bool {
        self.iou >= threshold
    }
}

/// `None` when neither a prediction nor ground truth exists.
pub fn iou_interval(
    pred: Option<BoundingBox>,
    gt: Option<BoundingBox>,
    events: &[Event],
) -> Option<IntervalMetrics> {
    if pred.is_none() && gt.is_none() {
        return None;
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for e in events {
        let in_p = pred.is_some_and(|b| b.contains(e.x, e.y));
        let in_g = gt.is_some_and(|b| b.contains(e.x, e.y));
        match (in_p, in_g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = tp + fp + fn_;
    let iou = if denom == 0 {
        0.0
    } else {
        tp as f64 / denom as f64
    };
    let (center_error_px, center_error_norm) = match (pred, gt) {
        (Some(p), Some(g)) => {
            let (px, py) = p.center();
            let (gx, gy) = g.center();
            let d = (px - gx).hypot(py - gy);
            (Some(d), Some(d / g.diagonal()))
        }
        _ => (None, None),
    };
    Some(IntervalMetrics {
        tp,
        fp,
        fn_,
        iou,
        center_error_px,
        center_error_norm,
    })
}

/// Fraction of ground-truth intervals whose IoU reaches `threshold`.
pub fn os_metric(ious: &[f64], threshold: f64) -> Result<f64, EvalError> {
    if ious.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    Ok(ious.iter().filter(|&&v| v >= threshold).count() as f64 / ious.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleSummary {
    /// Mean centre error over successes, in ground-truth diagonals.
    pub normalized: f64,
    pub pixels: f64,
    pub successes: usize,
}

/// Centre location error over the `(prediction, ground truth)` pairs of
/// successful intervals.
pub fn cle_metric(pairs: &[(BoundingBox, BoundingBox)]) -> Result<CleSummary, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::NoSuccesses);
    }
    let (mut norm, mut px) = (0.0, 0.0);
    for (p, g) in pairs {
        let (ax, ay) = p.center();
        let (bx, by) = g.center();
        let d = (ax - bx).hypot(ay - by);
        px += d;
        norm += d / g.diagonal();
    }
    let n = pairs.len() as f64;
    Ok(CleSummary {
        normalized: norm / n,
        pixels: px / n,
        successes: pairs.len(),
    })
}

/// Prediction in force at the end of each interval: the box of the latest
/// result decided before the interval closes, or nothing when that result
/// declared the object lost or no result exists yet.
pub fn predictions_per_interval(
    results: &[TrackResult],
    track: &AnnotationTrack,
) -> Vec<Option<BoundingBox>> {
    let mut sorted: Vec<&TrackResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.t_us);
    let mut j = 0;
    let mut current: Option<&TrackResult> = None;
    track
        .intervals()
        .iter()
        .map(|iv| {
            while j < sorted.len() && sorted[j].t_us < iv.end {
                current = Some(sorted[j]);
                j += 1;
            }
            current.filter(|r| r.mode.is_prediction()).map(|r| r.bbox)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRecord {
    pub start: Timestamp,
    pub end: Timestamp,
    pub pred: Option<BoundingBox>,
    pub gt: Option<BoundingBox>,
    pub metrics: IntervalMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackEvaluation {
    pub intervals: Vec<IntervalRecord>,
    pub threshold: f64,
    pub os: f64,
    /// Mean IoU over intervals with ground truth.
    pub mean_iou: f64,
    pub cle: Option<CleSummary>,
}

impl TrackEvaluation {
    /// `start,end,tp,fp,fn,iou,cle_px,cle_norm` per scored interval.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start_us,end_us,tp,fp,fn,iou,cle_px,cle_norm\n");
        for r in &self.intervals {
            let m = &r.metrics;
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.start,
                r.end,
                m.tp,
                m.fp,
                m.fn_,
                m.iou,
                opt(m.center_error_px),
                opt(m.center_error_norm)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let (cn, cp) = self
            .cle
            .map(|c| (format!("{:.4}", c.normalized), format!("{:.3}", c.pixels)))
            .unwrap_or(("n/a".into(), "n/a".into()));
        format!(
            "OS {:.4}  CLE_norm {cn}  CLE_px {cp}  IoU {:.4}  ({} intervals with ground truth)",
            self.os,
            self.mean_iou,
            self.intervals.iter().filter(|r| r.gt.is_some()).count()
        )
    }
}

/// Scores tracker output against an annotation track using the events of
/// each interval.
pub fn evaluate_track(
    stream: &EventStream,
    track: &AnnotationTrack,
    results: &[TrackResult],
    threshold: f64,
) -> Result<TrackEvaluation, EvalError> {
    let preds = predictions_per_interval(results, track);
    let mut intervals = Vec::new();
    let mut ious = Vec::new();
    let mut successes = Vec::new();
    for (iv, pred) in track.intervals().iter().zip(preds) {
        let range = stream.slice_range(iv.start, iv.end);
        let Some(m) = iou_interval(pred, iv.bbox, &stream.events()[range]) else {
            continue;
        };
        if let Some(gt) = iv.bbox {
            ious.push(m.iou);
            if let (true, Some(p)) = (m.success(threshold), pred) {
                successes.push((p, gt));
            }
        }
        intervals.push(IntervalRecord {
            start: iv.start,
            end: iv.end,
            pred,
            gt: iv.bbox,
            metrics: m,
        });
    }
    let os = os_metric(&ious, threshold)?;
    Ok(TrackEvaluation {
        intervals,
        threshold,
        os,
        mean_iou: ious.iter().sum::<f64>() / ious.len() as f64,
        cle: cle_metric(&successes).ok(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accuracy {
    /// Sorted union of true and predicted labels.
    pub labels: Vec<u32>,
    /// Rows are true labels, columns predicted labels.
    pub confusion: Vec<Vec<u64>>,
    pub overall: f64,
    /// Mean of per-class accuracies over classes that occur as true labels.
    pub class_averaged: f64,
}

pub fn accuracy(predicted: &[u32], truth: &[u32]) -> Result<Accuracy, EvalError> {
    assert_eq!(predicted.len(), truth.len(), "one prediction per sample");
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut labels: Vec<u32> = predicted.iter().chain(truth).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let pos = |l: u32| labels.binary_search(&l).expect("label listed");
    let n = labels.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[pos(t)][pos(p)] += 1;
    }
    let correct: u64 = (0..n).map(|i| confusion[i][i]).sum();
    let overall = correct as f64 / truth.len() as f64;
    let mut per_class = Vec::new();
    for (i, row) in confusion.iter().enumerate() {
        let total: u64 = row.iter().sum();
        if total > 0 {
            per_class.push(row[i] as f64 / total as f64);
        }
    }
    let class_averaged = per_class.iter().sum::<f64>() / per_class.len() as f64;
    Ok(Accuracy {
        labels,
        confusion,
        overall,
        class_averaged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elot::TrackMode;
    use crate::events::AnnotatedInterval;

    fn bb(a: u16, b: u16, c: u16, d: u16) -> BoundingBox {
        BoundingBox::new(a, b, c, d).unwrap()
    }

    #[test]
    fn iou_examples() {
        let g = bb(0, 0, 9, 9);
        let ev: Vec<Event> = (0..5).map(|i| Event::new(i, i, 0, false)).collect();
        assert_eq!(iou_interval(Some(g), Some(g), &ev).unwrap().iou, 1.0);

        let far = bb(20, 20, 29, 29);
        let ev2 = vec![Event::new(1, 1, 0, false), Event::new(25, 25, 0, false)];
        assert_eq!(iou_interval(Some(far), Some(g), &ev2).unwrap().iou, 0.0);

        // six shared, two prediction-only, two ground-truth-only
        let pred = bb(0, 0, 9, 9);
        let gt = bb(2, 0, 11, 9);
        let mut ev3: Vec<Event> = (0..6).map(|i| Event::new(5, i, 0, false)).collect();
        ev3.extend([Event::new(0, 0, 0, false), Event::new(1, 1, 0, false)]);
        ev3.extend([Event::new(10, 0, 0, false), Event::new(11, 1, 0, false)]);
        let m = iou_interval(Some(pred), Some(gt), &ev3).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (6, 2, 2));
        assert!((m.iou - 0.6).abs() < 1e-15);

        assert!(iou_interval(None, None, &ev).is_none());
        let fp_only = iou_interval(Some(g), None, &ev).unwrap();
        assert_eq!((fp_only.fp, fp_only.iou), (5, 0.0));
    }

    #[test]
    fn os_examples() {
        assert_eq!(os_metric(&[1.0, 1.0], 0.5).unwrap(), 1.0);
        assert_eq!(os_metric(&[0.6, 0.4], 0.5).unwrap(), 0.5);
        assert_eq!(os_metric(&[], 0.5), Err(EvalError::NoGroundTruth));
    }

    #[test]
    fn cle_examples() {
        let g = bb(0, 0, 9, 9);
        assert_eq!(cle_metric(&[(g, g)]).unwrap().normalized, 0.0);
        // 3x4 box has diagonal 5; centres differ by (1.5, 2)
        let gt = bb(0, 0, 2, 3);
        let half = cle_metric(&[(bb(1, 2, 4, 5), gt)]).unwrap();
        assert!((half.pixels - 2.5).abs() < 1e-12);
        assert!((half.normalized - 0.5).abs() < 1e-12);
        assert_eq!(cle_metric(&[]), Err(EvalError::NoSuccesses));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap().overall, 1.0);
        let a = accuracy(&[0, 1, 1, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!((a.overall, a.class_averaged), (0.5, 0.5));
        assert_eq!(a.confusion, vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn lost_result_clears_prediction() {
        let track = AnnotationTrack::new(vec![
            AnnotatedInterval {
                start: 0,
                end: 10,
                bbox: None,
            },
            AnnotatedInterval {
                start: 10,
                end: 20,
                bbox: None,
            },
            AnnotatedInterval {
                start: 20,
                end: 30,
                bbox: None,
            },
        ])
        .unwrap();
        let r = |t, mode| TrackResult {
            t_us: t,
            mode,
            bbox: bb(0, 0, 1, 1),
            score: None,
        };
        let res = [
            r(0, TrackMode::Init),
            r(15, TrackMode::Lost),
            r(30, TrackMode::Detected),
        ];
        assert_eq!(
            predictions_per_interval(&res, &track),
            vec![Some(bb(0, 0, 1, 1)), None, None]
        );
    }
}
