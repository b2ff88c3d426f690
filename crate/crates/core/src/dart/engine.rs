use std::collections::VecDeque;
use std::sync::Arc;

use super::{DartDescriptor, DartError, LogPolarGrid};
use crate::events::Event;

/// Default FIFO length, a few thousand events for the 7x12 grid.
pub const DEFAULT_FIFO_CAPACITY: usize = 3000;

/// FIFO event memory plus its per-pixel count matrix.
///
/// The count matrix always equals the multiset of FIFO positions, so a
/// descriptor can be computed by scanning the table window over the matrix
/// instead of walking the queue.
#[derive(Debug, Clone)]
pub struct DartEngine {
    grid: Arc<LogPolarGrid>,
    width: u16,
    height: u16,
    capacity: usize,
    fifo: VecDeque<(u16, u16)>,
    count: Vec<u32>,
    /// Flat index offset of each LUT entry, for the interior fast path.
    flat: Vec<isize>,
    reach: u16,
}

impl DartEngine {
    pub fn new(
        grid: Arc<LogPolarGrid>,
        width: u16,
        height: u16,
        capacity: usize,
    ) -> Result<Self, DartError> {
        if capacity == 0 {
            return Err(DartError::Config("FIFO capacity must be positive".into()));
        }
        if width == 0 || height == 0 {
            return Err(DartError::Config("empty sensor".into()));
        }
        let flat = grid
            .lut()
            .iter()
            .map(|e| e.dy as isize * width as isize + e.dx as isize)
            .collect();
        let reach = grid.params().r_max.floor() as u16;
        Ok(Self {
            grid,
            width,
            height,
            capacity,
            fifo: VecDeque::with_capacity(capacity),
            count: vec![0; width as usize * height as usize],
            flat,
            reach,
        })
    }

    pub fn grid(&self) -> &Arc<LogPolarGrid> {
        &self.grid
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn count_at(&self, x: u16, y: u16) -> u32 {
        self.count[y as usize * self.width as usize + x as usize]
    }

    pub fn fifo(&self) -> impl Iterator<Item = (u16, u16)> + '_ {
        self.fifo.iter().copied()
    }

    pub fn clear(&mut self) {
        self.fifo.clear();
        self.count.iter_mut().for_each(|c| *c = 0);
    }

    /// Appends an event location, evicting the oldest when full.
    pub fn push(&mut self, e: &Event) {
        debug_assert!(e.x < self.width && e.y < self.height);
        if self.fifo.len() == self.capacity {
            let (ox, oy) = self.fifo.pop_front().expect("full FIFO");
            self.count[oy as usize * self.width as usize + ox as usize] -= 1;
        }
        self.fifo.push_back((e.x, e.y));
        self.count[e.y as usize * self.width as usize + e.x as usize] += 1;
    }

    /// Writes the normalized descriptor centred at `(x, y)` into `out` and
    /// returns the un-normalized total. Events at the centre pixel itself
    /// are not counted.
    pub fn describe_into(&self, x: u16, y: u16, out: &mut [f64]) -> f64 {
        assert_eq!(out.len(), self.grid.dim());
        out.iter_mut().for_each(|v| *v = 0.0);
        let lut = self.grid.lut();
        let r = self.reach;
        let interior = x >= r && y >= r && x + r < self.width && y + r < self.height;
        let center = y as isize * self.width as isize + x as isize;
        if interior {
            for (entry, &off) in lut.iter().zip(&self.flat) {
                let c = self.count[(center + off) as usize];
                if c != 0 {
                    let c = c as f64;
                    for bw in entry.weights.iter() {
                        out[bw.bin] += c * bw.weight;
                    }
                }
            }
        } else {
            let (w, h) = (self.width as i32, self.height as i32);
            for entry in lut {
                let px = x as i32 + entry.dx as i32;
                let py = y as i32 + entry.dy as i32;
                if px < 0 || py < 0 || px >= w || py >= h {
                    continue;
                }
                let c = self.count[(py * w + px) as usize];
                if c != 0 {
                    let c = c as f64;
                    for bw in entry.weights.iter() {
                        out[bw.bin] += c * bw.weight;
                    }
                }
            }
        }
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|v| *v /= total);
        }
        total
    }

    /// Descriptor of `e` from the current memory; `e` is expected to have
    /// been pushed already.
    pub fn extract(&self, e: &Event) -> DartDescriptor {
        let mut values = vec![0.0; self.grid.dim()];
        self.describe_into(e.x, e.y, &mut values);
        DartDescriptor::new(values, self.grid.n_wedges(), *e)
    }

    /// Pushes `e` and returns its descriptor.
    pub fn process(&mut self, e: &Event) -> DartDescriptor {
        self.push(e);
        self.extract(e)
    }
}
