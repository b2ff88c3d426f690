use super::DartError;
use crate::events::Event;

/// Normalized ring-major log-polar histogram attached to one event.
#[derive(Debug, Clone, PartialEq)]
pub struct DartDescriptor {
    values: Vec<f64>,
    n_wedges: usize,
    center: Event,
}

impl DartDescriptor {
    pub fn new(values: Vec<f64>, n_wedges: usize, center: Event) -> Self {
        debug_assert!(n_wedges > 0 && values.len().is_multiple_of(n_wedges));
        Self {
            values,
            n_wedges,
            center,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn center(&self) -> &Event {
        &self.center
    }

    pub fn n_wedges(&self) -> usize {
        self.n_wedges
    }

    pub fn n_rings(&self) -> usize {
        self.values.len() / self.n_wedges
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Rotates every ring's wedge vector by `shift` positions
    /// counter-clockwise: wedge `j` moves to `j + shift`.
    pub fn circular_shift(&self, shift: usize) -> Result<Self, DartError> {
        if shift >= self.n_wedges {
            return Err(DartError::Config(format!(
                "shift {shift} outside [0, {})",
                self.n_wedges
            )));
        }
        Ok(Self {
            values: circular_shift_values(&self.values, self.n_wedges, shift),
            n_wedges: self.n_wedges,
            center: self.center,
        })
    }
}

/// Ring-wise wedge rotation on a raw ring-major vector; `shift` is taken
/// modulo `n_wedges`.
pub fn circular_shift_values(values: &[f64], n_wedges: usize, shift: usize) -> Vec<f64> {
    let shift = shift % n_wedges;
    let mut out = vec![0.0; values.len()];
    for (ring_in, ring_out) in values.chunks(n_wedges).zip(out.chunks_mut(n_wedges)) {
        for (j, &v) in ring_in.iter().enumerate() {
            ring_out[(j + shift) % n_wedges] = v;
        }
    }
    out
}
