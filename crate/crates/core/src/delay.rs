//! History buffer serving agent positions `t_d` seconds in the past.
//!
//! Lookup uses the snapshot nearest to `now - t_d` (lag of `round(t_d/dt)`
//! steps). Until the buffer fills, the oldest snapshot is returned, so agents
//! attract toward initial positions during warm-up. Respawns do not rewrite
//! history; stale pre-collision positions flush out naturally.

use std::collections::VecDeque;

use crate::vec2::Vec2;

#[derive(Debug, Clone)]
pub struct DelayBuffer {
    /// Snapshots ordered oldest to newest, at most `lag + 1` of them.
    snapshots: VecDeque<Vec<Vec2>>,
    /// Whole-step delay: round(t_d / dt).
    lag: usize,
    /// Storage recycled from evicted snapshots.
    spare: Vec<Vec<Vec2>>,
}

impl DelayBuffer {
    /// `dt` must be positive; `t_d` nonnegative.
    pub fn new(t_d: f64, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        assert!(t_d >= 0.0, "t_d must be nonnegative");
        let lag = (t_d / dt).round() as usize;
        DelayBuffer {
            snapshots: VecDeque::with_capacity(lag + 1),
            lag,
            spare: Vec::new(),
        }
    }

    pub fn lag_steps(&self) -> usize {
        self.lag
    }

    /// Steps of history the buffer retains, including the current snapshot.
    pub fn capacity_steps(&self) -> usize {
        self.lag + 1
    }

    /// Record the current positions and return the delayed snapshot.
    pub fn record_and_query(&mut self, current: &[Vec2]) -> &[Vec2] {
        let mut slot = if self.snapshots.len() == self.capacity_steps() {
            let mut old = self.snapshots.pop_front().expect("nonempty");
            old.clear();
            old
        } else {
            self.spare.pop().unwrap_or_default()
        };
        slot.extend_from_slice(current);
        self.snapshots.push_back(slot);
        // delayed snapshot is `lag` pushes back, clamped to the oldest
        let newest = self.snapshots.len() - 1;
        let idx = newest.saturating_sub(self.lag);
        &self.snapshots[idx]
    }
}
