use serde::{Deserialize, Serialize};

use super::ElotError;
use crate::events::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Fraction of the sensor's pixel count that detector hits must exceed
    /// before a candidate is extracted.
    pub tau_d: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { tau_d: 0.25 }
    }
}

/// Codewords whose clusters are dominated by object descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    words: Vec<bool>,
    tau: f64,
}

impl DetectorModel {
    /// Marks cluster `i` when its ROI share `n_i1 / n_i` is strictly above `tau`.
    pub fn from_assignments(roi_words: &[usize], bg_words: &[usize], k: usize, tau: f64) -> Self {
        let mut roi = vec![0usize; k];
        let mut all = vec![0usize; k];
        for &w in roi_words {
            roi[w] += 1;
            all[w] += 1;
        }
        for &w in bg_words {
            all[w] += 1;
        }
        let words = roi
            .iter()
            .zip(&all)
            .map(|(&r, &n)| n > 0 && r as f64 / n as f64 > tau)
            .collect();
        Self { words, tau }
    }

    pub fn from_words(k: usize, indices: &[usize], tau: f64) -> Self {
        let mut words = vec![false; k];
        for &i in indices {
            words[i] = true;
        }
        Self { words, tau }
    }

    pub fn contains(&self, word: usize) -> bool {
        self.words.get(word).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.words.len()).filter(|&i| self.words[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.words.iter().filter(|&&w| w).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectDecision {
    /// The event's word is not a detector word.
    Ignored,
    Accumulating,
    /// Candidate not smaller than the last tracked box; `tau_c` was raised.
    Retry {
        tau_c: u32,
    },
    /// No pixel passed the confidence threshold; `tau_c` was lowered.
    Empty {
        tau_c: u32,
    },
    Found(BoundingBox),
}

/// Global hit matrices for one detection episode.
#[derive(Debug, Clone)]
pub struct DetectorState {
    width: u16,
    height: u16,
    tau_d: f64,
    hits: Vec<u32>,
    mask: Vec<bool>,
    tau_c: u32,
    count: u64,
}

impl DetectorState {
    pub fn new(width: u16, height: u16, cfg: &DetectorConfig) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            tau_d: cfg.tau_d,
            hits: vec![0; n],
            mask: vec![false; n],
            tau_c: 1,
            count: 0,
        }
    }

    pub fn tau_c(&self) -> u32 {
        self.tau_c
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn reset(&mut self) {
        self.hits.iter_mut().for_each(|v| *v = 0);
        self.mask.iter_mut().for_each(|v| *v = false);
        self.count = 0;
    }

    /// Consumes one quantized event. `last_area` is the pixel area of the
    /// last tracked box.
    pub fn observe(
        &mut self,
        x: u16,
        y: u16,
        word: usize,
        model: &DetectorModel,
        last_area: u64,
    ) -> DetectDecision {
        if x >= self.width || y >= self.height || !model.contains(word) {
            return DetectDecision::Ignored;
        }
        let i = y as usize * self.width as usize + x as usize;
        self.hits[i] += 1;
        self.count += 1;
        if self.hits[i] > self.tau_c {
            self.mask[i] = true;
        }
        let trigger = self.tau_d * self.width as f64 * self.height as f64;
        if (self.count as f64) <= trigger {
            return DetectDecision::Accumulating;
        }
        let dilated = dilate_cross(&self.mask, self.width, self.height);
        let decision = match largest_component(&dilated, self.width, self.height) {
            Ok(b) if b.area() < last_area => DetectDecision::Found(b),
            Ok(_) => {
                self.tau_c += 1;
                DetectDecision::Retry { tau_c: self.tau_c }
            }
            Err(_) => {
                self.tau_c = self.tau_c.saturating_sub(1).max(1);
                DetectDecision::Empty { tau_c: self.tau_c }
            }
        };
        self.reset();
        decision
    }
}

/// Binary dilation by the 4-neighbour cross.
pub fn dilate_cross(mask: &[bool], width: u16, height: u16) -> Vec<bool> {
    let (w, h) = (width as usize, height as usize);
    assert_eq!(mask.len(), w * h);
    let mut out = mask.to_vec();
    for y in 0..h {
        for x in 0..w {
            if !mask[y * w + x] {
                continue;
            }
            if x > 0 {
                out[y * w + x - 1] = true;
            }
            if x + 1 < w {
                out[y * w + x + 1] = true;
            }
            if y > 0 {
                out[(y - 1) * w + x] = true;
            }
            if y + 1 < h {
                out[(y + 1) * w + x] = true;
            }
        }
    }
    out
}

/// Bounding box of the 4-connected component with the most pixels; on ties
/// the component reached first in row-major order wins.
pub fn largest_component(mask: &[bool], width: u16, height: u16) -> Result<BoundingBox, ElotError> {
    let (w, h) = (width as usize, height as usize);
    assert_eq!(mask.len(), w * h);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut best: Option<(usize, BoundingBox)> = None;
    for start in 0..w * h {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = (p % w, p / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |q: usize| {
                if mask[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        if best.as_ref().is_none_or(|(s, _)| size > *s) {
            let b = BoundingBox::new(x0 as u16, y0 as u16, x1 as u16, y1 as u16)
                .expect("ordered corners");
            best = Some((size, b));
        }
    }
    best.map(|(_, b)| b).ok_or(ElotError::NoComponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_dilates_to_cross() {
        let mut m = vec![false; 25];
        m[2 * 5 + 2] = true;
        let d = dilate_cross(&m, 5, 5);
        assert_eq!(d.iter().filter(|&&v| v).count(), 5);
        assert_eq!(
            largest_component(&d, 5, 5).unwrap(),
            BoundingBox::new(1, 1, 3, 3).unwrap()
        );
    }

    #[test]
    fn diagonals_are_separate() {
        let mut m = vec![false; 9];
        m[0] = true;
        m[4] = true;
        assert_eq!(
            largest_component(&m, 3, 3).unwrap(),
            BoundingBox::new(0, 0, 0, 0).unwrap()
        );
    }

    #[test]
    fn full_and_empty() {
        assert_eq!(
            largest_component(&[true; 12], 4, 3).unwrap(),
            BoundingBox::new(0, 0, 3, 2).unwrap()
        );
        assert!(matches!(
            largest_component(&[false; 4], 2, 2),
            Err(ElotError::NoComponent)
        ));
    }

    #[test]
    fn purity_threshold_is_strict() {
        // cluster 0: 20 of 20 ROI; cluster 1: 19 of 20 ROI
        let roi: Vec<usize> = std::iter::repeat_n(0, 20)
            .chain(std::iter::repeat_n(1, 19))
            .collect();
        let bg = vec![1usize];
        let d = DetectorModel::from_assignments(&roi, &bg, 3, 0.95);
        assert!(d.contains(0));
        assert!(!d.contains(1));
        assert!(!d.contains(2));
    }

    #[test]
    fn non_detector_words_never_count() {
        let model = DetectorModel::from_words(4, &[2], 0.95);
        let mut s = DetectorState::new(8, 8, &DetectorConfig { tau_d: 0.01 });
        for i in 0..100 {
            assert_eq!(s.observe(i % 8, 3, 1, &model, 10), DetectDecision::Ignored);
        }
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn retry_raises_threshold() {
        let model = DetectorModel::from_words(1, &[0], 0.95);
        let mut s = DetectorState::new(4, 4, &DetectorConfig { tau_d: 0.5 });
        let mut last = DetectDecision::Accumulating;
        for i in 0..9u16 {
            last = s.observe(i % 4, (i / 2) % 4, 0, &model, 1);
        }
        // only (0, 0) was hit twice; its dilated box covers 4 pixels
        assert_eq!(last, DetectDecision::Retry { tau_c: 2 });
        assert_eq!(s.count(), 0);
    }
}
