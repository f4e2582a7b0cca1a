//! Host implementations of the core execution hooks.

use equistress_core::pipeline::{Clock, Mapper};
use rayon::prelude::*;
use std::time::Instant;

/// Maps over the current rayon pool, keeping results in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Mapper for Rayon {
    fn map<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Seconds elapsed since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
