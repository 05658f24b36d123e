use crate::error::{Error, Result};

/// Output sampling grid plus the integrator step cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    /// Largest step the integrator may take (s); further capped by the
    /// Hamiltonian's frequency bound.
    pub max_step: f64,
}

/// Steps per period of the fastest frequency.
pub(crate) const STEPS_PER_PERIOD: f64 = 40.0;
const MAX_TOTAL_STEPS: usize = 2_000_000_000;

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize, max_step: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidArgument(format!("time grid needs t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if n_samples < 2 {
            return Err(Error::InvalidArgument("time grid needs at least 2 samples".into()));
        }
        if !(max_step > 0.0) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        Ok(Self { t_start, t_end, n_samples, max_step })
    }

    /// Grid whose step is limited only by the Hamiltonian.
    pub fn uniform(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        Self::new(t_start, t_end, n_samples, f64::INFINITY)
    }

    pub fn with_max_step(self, max_step: f64) -> Result<Self> {
        Self::new(self.t_start, self.t_end, self.n_samples, max_step)
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let last = self.n_samples - 1;
        (0..self.n_samples)
            .map(|i| if i == last { self.t_end } else { self.t_start + span * (i as f64 / last as f64) })
            .collect()
    }
}

/// One integration interval `[start, end]` split into `substeps` equal steps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Interval {
    pub start: f64,
    pub end: f64,
    pub substeps: usize,
    /// Index of the output sample at `end`, if any.
    pub sample: Option<usize>,
}

impl Interval {
    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.substeps as f64
    }
}

const SNAP_ULPS: f64 = 64.0;

/// Splits the grid at every sample time and breakpoint, then subdivides
/// each piece so no step exceeds `cap`.
pub(crate) fn plan(grid: &TimeGrid, breakpoints: &[f64], cap: f64) -> Result<Vec<Interval>> {
    let cap = cap.min(grid.max_step);
    if !(cap > 0.0) {
        return Err(Error::StepUnderflow(format!("step cap {cap:e} is not positive")));
    }
    let times = grid.times();
    let mut events: Vec<(f64, Option<usize>)> = times.iter().enumerate().map(|(i, &t)| (t, Some(i))).collect();
    for &b in breakpoints {
        if b > grid.t_start && b < grid.t_end {
            events.push((b, None));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
    // Edges within rounding distance of a sample (or of each other) would
    // leave sliver intervals; they collapse onto the earlier event, samples first.
    let scale = grid.t_start.abs().max(grid.t_end.abs());
    let mut merged: Vec<(f64, Option<usize>)> = Vec::with_capacity(events.len());
    for e in events {
        match merged.last_mut() {
            Some(last) if e.0 - last.0 <= SNAP_ULPS * f64::EPSILON * scale => {
                if last.1.is_none() {
                    *last = e;
                }
            }
            _ => merged.push(e),
        }
    }
    let events = merged;
    let mut out = Vec::with_capacity(events.len());
    let mut total = 0usize;
    for pair in events.windows(2) {
        let (start, end) = (pair[0].0, pair[1].0);
        let len = end - start;
        let substeps = if cap.is_finite() { ((len / cap).ceil() as usize).max(1) } else { 1 };
        total = total.saturating_add(substeps);
        if total > MAX_TOTAL_STEPS || len / substeps as f64 <= start.abs().max(end.abs()) * f64::EPSILON * 4.0 {
            return Err(Error::StepUnderflow(format!(
                "grid needs more than {MAX_TOTAL_STEPS} steps or a step below time resolution"
            )));
        }
        out.push(Interval { start, end, substeps, sample: pair[1].1 });
    }
    Ok(out)
}

/// `1/(40 f_max)` with `f_max = bound/2π`.
pub(crate) fn frequency_cap(angular_bound: f64) -> f64 {
    if angular_bound > 0.0 {
        std::f64::consts::TAU / (STEPS_PER_PERIOD * angular_bound)
    } else {
        f64::INFINITY
    }
}
