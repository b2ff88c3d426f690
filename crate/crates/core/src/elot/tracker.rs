use serde::{Deserialize, Serialize};

use super::{histogram_feature, ElotError};
use crate::classify::SvmModel;
use crate::encoding::KernelMapParams;
use crate::events::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    /// A decision is taken once in-box events exceed this fraction of the
    /// previous box's pixel area.
    pub e_r: f64,
    pub pad_x: u16,
    pub pad_y: u16,
    /// Consecutive below-mean scores tolerated before the object is lost.
    pub tau_h: u32,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            e_r: 0.05,
            pad_x: 1,
            pad_y: 1,
            tau_h: 10,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ElotError> {
        if !(self.e_r > 0.0 && self.e_r <= 1.0) {
            return Err(ElotError::Config(format!(
                "e_r must lie in (0, 1], got {}",
                self.e_r
            )));
        }
        if self.pad_x == 0 || self.pad_y == 0 || self.tau_h == 0 {
            return Err(ElotError::Config(
                "padding and tau_h must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackDecision {
    /// The event fell outside the padded search box.
    Outside,
    Accumulating,
    Updated {
        bbox: BoundingBox,
        score: f64,
    },
    /// Below-mean score: the previous box is kept.
    Failback {
        bbox: BoundingBox,
        score: f64,
        fail: u32,
    },
    Lost {
        bbox: BoundingBox,
        score: f64,
    },
}

/// Per-step accumulation of the local tracker.
#[derive(Debug, Clone)]
pub struct TrackerState {
    cfg: TrackerConfig,
    width: u16,
    height: u16,
    bbox: BoundingBox,
    search: BoundingBox,
    hist: Vec<u32>,
    members: Option<BoundingBox>,
    count: u32,
    fail: u32,
    /// Index of the next decision, starting at 1.
    step: u64,
    lost: bool,
}

impl TrackerState {
    pub fn new(
        bbox: BoundingBox,
        cfg: TrackerConfig,
        width: u16,
        height: u16,
        k: usize,
    ) -> Result<Self, ElotError> {
        cfg.validate()?;
        if bbox.x_max >= width || bbox.y_max >= height {
            return Err(ElotError::Config("initial box outside the sensor".into()));
        }
        Ok(Self {
            cfg,
            width,
            height,
            bbox,
            search: bbox.padded(cfg.pad_x, cfg.pad_y, width, height),
            hist: vec![0; k],
            members: None,
            count: 0,
            fail: 0,
            step: 1,
            lost: false,
        })
    }

    /// Restarts at `bbox` with a fresh accumulator; the decision index and
    /// therefore the auto-accept of the first step are not reset.
    pub fn reinitialize(&mut self, bbox: BoundingBox) {
        self.bbox = bbox;
        self.clear_step();
        self.fail = 0;
        self.lost = false;
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn search_box(&self) -> BoundingBox {
        self.search
    }

    pub fn fail(&self) -> u32 {
        self.fail
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn is_lost(&self) -> bool {
        self.lost
    }

    pub fn contains(&self, x: u16, y: u16) -> bool {
        self.search.contains(x, y)
    }

    fn clear_step(&mut self) {
        self.hist.iter_mut().for_each(|c| *c = 0);
        self.members = None;
        self.count = 0;
        self.search = self
            .bbox
            .padded(self.cfg.pad_x, self.cfg.pad_y, self.width, self.height);
    }

    /// Feeds one quantized event. The SVM's recorded scores are the running
    /// history of every decision; accepted steps also update it online.
    pub fn observe(
        &mut self,
        x: u16,
        y: u16,
        word: usize,
        svm: &mut SvmModel,
        kernel: &KernelMapParams,
    ) -> Result<TrackDecision, ElotError> {
        if self.lost {
            return Err(ElotError::Config(
                "tracker is lost; reinitialize first".into(),
            ));
        }
        if x >= self.width || y >= self.height || !self.search.contains(x, y) {
            return Ok(TrackDecision::Outside);
        }
        self.hist[word] += 1;
        self.count += 1;
        self.members = Some(match self.members {
            None => BoundingBox::new(x, y, x, y).expect("point box"),
            Some(b) => BoundingBox::new(
                b.x_min.min(x),
                b.y_min.min(y),
                b.x_max.max(x),
                b.y_max.max(y),
            )
            .expect("grown box"),
        });
        if (self.count as f64) <= self.cfg.e_r * self.bbox.area() as f64 {
            return Ok(TrackDecision::Accumulating);
        }

        let feature = histogram_feature(&self.hist, self.count, kernel)?;
        let score = svm.score(&feature)?;
        let below = svm.score_mean().is_some_and(|m| score < m);
        // every decision enters the running mean, failbacks included
        svm.record_score(score);
        let decision = if self.step > 1 && below {
            self.fail += 1;
            if self.fail > self.cfg.tau_h {
                self.lost = true;
                TrackDecision::Lost {
                    bbox: self.bbox,
                    score,
                }
            } else {
                TrackDecision::Failback {
                    bbox: self.bbox,
                    score,
                    fail: self.fail,
                }
            }
        } else {
            self.fail = 0;
            let rate = svm.online_rate();
            svm.update_online(&feature, 1, rate)?;
            // the member box is tight, so padding rows and columns without
            // events are already excluded
            self.bbox = self.members.expect("at least one member");
            TrackDecision::Updated {
                bbox: self.bbox,
                score,
            }
        };
        self.step += 1;
        self.clear_step();
        Ok(decision)
    }
}
