//! Hardware-noise suppression: a per-pixel refractory filter followed by an
//! 8-connected nearest-neighbour support filter.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Event, EventStream, Timestamp};

const NEVER: Timestamp = Timestamp::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("event at t={t} arrived after t={last}")]
    OrderViolation { t: Timestamp, last: Timestamp },
    #[error("event ({x}, {y}) outside the {width}x{height} filter state")]
    OutOfBounds {
        x: u16,
        y: u16,
        width: u16,
        height: u16,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterParams {
    /// Same-pixel events closer than or equal to this are dropped.
    pub theta_ref_us: Timestamp,
    /// Events need a neighbour strictly closer than this in time.
    /// `u64::MAX` disables the time limit.
    pub theta_noise_us: Timestamp,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            theta_ref_us: 1_000,
            theta_noise_us: 5_000,
        }
    }
}

/// Per-pixel timestamp memory for one stream.
#[derive(Debug, Clone)]
pub struct FilterState {
    width: u16,
    height: u16,
    params: FilterParams,
    /// Last refractory-passed event per pixel.
    last_passed: Vec<Timestamp>,
    /// Last event presented to the noise stage per pixel.
    last_seen: Vec<Timestamp>,
    ref_clock: Timestamp,
    noise_clock: Timestamp,
}

impl FilterState {
    pub fn new(width: u16, height: u16, params: FilterParams) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            params,
            last_passed: vec![NEVER; n],
            last_seen: vec![NEVER; n],
            ref_clock: 0,
            noise_clock: 0,
        }
    }

    pub fn params(&self) -> FilterParams {
        self.params
    }

    fn index(&self, e: &Event) -> Result<usize, FilterError> {
        if e.x >= self.width || e.y >= self.height {
            return Err(FilterError::OutOfBounds {
                x: e.x,
                y: e.y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(e.y as usize * self.width as usize + e.x as usize)
    }

    /// Keeps `e` unless its pixel passed an event within `theta_ref_us`.
    pub fn refractory_pass(&mut self, e: &Event) -> Result<bool, FilterError> {
        if e.t < self.ref_clock {
            return Err(FilterError::OrderViolation {
                t: e.t,
                last: self.ref_clock,
            });
        }
        self.ref_clock = e.t;
        let i = self.index(e)?;
        let prev = self.last_passed[i];
        let pass = prev == NEVER || e.t - prev > self.params.theta_ref_us;
        if pass {
            self.last_passed[i] = e.t;
        }
        Ok(pass)
    }

    /// Keeps `e` if one of its eight neighbours (not its own pixel) saw an
    /// event less than `theta_noise_us` ago. Every presented event is
    /// recorded as potential support for later ones.
    pub fn noise_pass(&mut self, e: &Event) -> Result<bool, FilterError> {
        if e.t < self.noise_clock {
            return Err(FilterError::OrderViolation {
                t: e.t,
                last: self.noise_clock,
            });
        }
        self.noise_clock = e.t;
        let i = self.index(e)?;
        let w = self.width as i32;
        let h = self.height as i32;
        let (x, y) = (e.x as i32, e.y as i32);
        let mut pass = false;
        'outer: for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let prev = self.last_seen[(ny * w + nx) as usize];
                if prev != NEVER && e.t - prev < self.params.theta_noise_us {
                    pass = true;
                    break 'outer;
                }
            }
        }
        self.last_seen[i] = e.t;
        Ok(pass)
    }

    /// Refractory stage then noise stage; the noise stage only ever sees
    /// refractory survivors.
    pub fn cascade_pass(&mut self, e: &Event) -> Result<bool, FilterError> {
        Ok(self.refractory_pass(e)? && self.noise_pass(e)?)
    }
}

/// Filters a whole stream. Output is an order-preserving subsequence.
pub fn cascade(stream: &EventStream, params: FilterParams) -> EventStream {
    let mut state = FilterState::new(stream.width(), stream.height(), params);
    let kept = stream
        .events()
        .iter()
        .filter(|e| {
            state
                .cascade_pass(e)
                .expect("validated streams are ordered and in bounds")
        })
        .copied()
        .collect();
    stream.with_events_unchecked(kept)
}

/// Refractory stage alone over a stream.
pub fn refractory(stream: &EventStream, theta_ref_us: Timestamp) -> EventStream {
    let params = FilterParams {
        theta_ref_us,
        ..FilterParams::default()
    };
    let mut state = FilterState::new(stream.width(), stream.height(), params);
    let kept = stream
        .events()
        .iter()
        .filter(|e| state.refractory_pass(e).expect("validated stream"))
        .copied()
        .collect();
    stream.with_events_unchecked(kept)
}
