use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::protocols::{SpectrumMap, SweepVariable};

/// Spectroscopy line positions: for each flux detuning ε (rad/s), the
/// observed peak frequencies (Hz), positive and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPeaks {
    observations: Vec<(f64, Vec<f64>)>,
}

impl SpectrumPeaks {
    pub fn new(observations: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        for (eps, peaks) in &observations {
            if !eps.is_finite() {
                return Err(Error::InvalidArgument("ε must be finite".into()));
            }
            if peaks.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                return Err(Error::InvalidArgument(format!("peaks at ε = {eps:e} must be positive and finite")));
            }
            if peaks.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidArgument(format!("peaks at ε = {eps:e} are not sorted")));
            }
        }
        Ok(Self { observations })
    }

    /// Exact dressed-branch positions of the model at each ε.
    pub fn from_model(g: f64, delta: f64, omega_r: f64, epsilons: &[f64]) -> Result<Self> {
        let obs = epsilons
            .iter()
            .map(|&e| {
                let (lo, hi) = dressed_branches(g, delta, omega_r, e);
                (e, vec![lo / TAU, hi / TAU])
            })
            .collect();
        Self::new(obs)
    }

    /// Local maxima of each column of an ε × probe-frequency map that reach
    /// `rel_threshold` of the column maximum, refined by a parabola through
    /// the three samples around each maximum.
    pub fn from_map(map: &SpectrumMap, rel_threshold: f64) -> Result<Self> {
        if map.x_variable != SweepVariable::Epsilon || map.y_variable != SweepVariable::ProbeFrequency {
            return Err(Error::InvalidArgument("peak picking needs an ε × probe-frequency map".into()));
        }
        let y = &map.y_axis;
        let step = y[1] - y[0];
        let mut obs = Vec::with_capacity(map.x_axis.len());
        for (ix, &eps) in map.x_axis.iter().enumerate() {
            let col = map.column(ix);
            let top = col.iter().copied().fold(0.0, f64::max);
            let mut peaks = Vec::new();
            for k in 1..col.len() - 1 {
                if col[k] > col[k - 1] && col[k] >= col[k + 1] && col[k] >= rel_threshold * top && top > 0.0 {
                    let (a, b, c) = (col[k - 1], col[k], col[k + 1]);
                    let denom = a - 2.0 * b + c;
                    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
                    peaks.push((y[k] + shift * step) / TAU);
                }
            }
            obs.push((eps, peaks));
        }
        Self::new(obs)
    }

    pub fn observations(&self) -> &[(f64, Vec<f64>)] {
        &self.observations
    }

    /// Total number of peaks.
    pub fn len(&self) -> usize {
        self.observations.iter().map(|(_, p)| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Lower and upper dressed branches (rad/s):
/// `(ωq + ωr)/2 ∓ √(((ωq − ωr)/2)² + g²)` with `ωq = √(Δ² + ε²)`.
pub fn dressed_branches(g: f64, delta: f64, omega_r: f64, epsilon: f64) -> (f64, f64) {
    let wq = delta.hypot(epsilon);
    let r = (0.5 * (wq - omega_r)).hypot(g);
    let mean = 0.5 * (wq + omega_r);
    (mean - r, mean + r)
}

/// Result of an anti-crossing fit; frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticrossingFit {
    /// `|g|`; the data only fix its magnitude.
    pub g: f64,
    pub delta: f64,
    pub omega_r: f64,
    /// RMS residual (Hz).
    pub residual: f64,
    pub iterations: usize,
    /// Smallest `g` the fit can distinguish from a plain crossing (rad/s):
    /// three RMS residuals, and never below 1e-9 of `ωr`.
    pub resolution_floor: f64,
    /// `g` exceeds the resolution floor.
    pub resolved: bool,
    /// Peaks assigned to the (lower, upper) branch.
    pub branch_counts: (usize, usize),
}

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE: f64 = 1e-10;
const MIN_OBSERVATIONS: usize = 6;

/// Internal units are MHz; ε and peaks are converted once.
struct Problem {
    eps: Vec<f64>,
    freq: Vec<f64>,
}

/// Branch model value and its gradient in `(g, Δ, ωr)` for one point.
fn branch_eval(p: &[f64; 3], eps: f64, upper: bool) -> (f64, [f64; 3]) {
    let [g, delta, wr] = *p;
    let wq = delta.hypot(eps).max(f64::MIN_POSITIVE);
    let d = 0.5 * (wq - wr);
    let r = d.hypot(g).max(1e-300);
    let s = if upper { 1.0 } else { -1.0 };
    let value = 0.5 * (wq + wr) + s * r;
    let dwq = delta / wq;
    let grad = [s * g / r, dwq * (0.5 + s * 0.5 * d / r), 0.5 - s * 0.5 * d / r];
    (value, grad)
}

impl Problem {
    /// Residuals `y − model` with each peak on its nearer branch, and the
    /// matching Jacobian of the model.
    fn linearize(&self, p: &[f64; 3]) -> (DVector<f64>, DMatrix<f64>, (usize, usize)) {
        let n = self.freq.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 3);
        let mut counts = (0, 0);
        for k in 0..n {
            let lo = branch_eval(p, self.eps[k], false);
            let hi = branch_eval(p, self.eps[k], true);
            let y = self.freq[k];
            let (v, grad) = if (y - lo.0).abs() <= (y - hi.0).abs() {
                counts.0 += 1;
                lo
            } else {
                counts.1 += 1;
                hi
            };
            r[k] = y - v;
            for c in 0..3 {
                j[(k, c)] = grad[c];
            }
        }
        (r, j, counts)
    }

    fn cost(&self, p: &[f64; 3]) -> f64 {
        self.eps
            .iter()
            .zip(&self.freq)
            .map(|(&e, &y)| {
                let a = y - branch_eval(p, e, false).0;
                let b = y - branch_eval(p, e, true).0;
                (a * a).min(b * b)
            })
            .sum()
    }
}

/// Fits the dressed-branch model to the peaks, seeding `ωr` from the
/// median peak.
pub fn fit_anticrossing(peaks: &SpectrumPeaks) -> Result<AnticrossingFit> {
    let mut all: Vec<f64> = peaks.observations.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::InsufficientData("no peaks".into()));
    }
    all.sort_by(f64::total_cmp);
    fit_anticrossing_seeded(peaks, TAU * all[all.len() / 2])
}

/// Grid search over `g/2π ∈ {1, …, 30} MHz` and `Δ − ωr ∈ ±50 MHz` around
/// `resonator_seed` (rad/s), then Gauss–Newton with step halving on
/// `(g, Δ, ωr)`.
pub fn fit_anticrossing_seeded(peaks: &SpectrumPeaks, resonator_seed: f64) -> Result<AnticrossingFit> {
    let n = peaks.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!("{n} peaks, need at least {MIN_OBSERVATIONS}")));
    }
    if !(resonator_seed > 0.0 && resonator_seed.is_finite()) {
        return Err(Error::InvalidArgument("resonator seed must be positive".into()));
    }
    let to_mhz = 1e-6 / TAU;
    let mut problem = Problem { eps: Vec::with_capacity(n), freq: Vec::with_capacity(n) };
    for (e, ps) in &peaks.observations {
        for f in ps {
            problem.eps.push(e * to_mhz);
            problem.freq.push(f * 1e-6);
        }
    }

    let wr0 = resonator_seed * to_mhz;
    let mut p = [1.0, wr0, wr0];
    let mut best = f64::INFINITY;
    for g in 1..=30 {
        for off in -10..=10 {
            let trial = [g as f64, wr0 + 5.0 * off as f64, wr0];
            let c = problem.cost(&trial);
            if c < best {
                best = c;
                p = trial;
            }
        }
    }
    let (_, _, counts) = problem.linearize(&p);
    if counts.0 < 2 || counts.1 < 2 {
        return Err(Error::InsufficientData(format!(
            "peaks cover the branches {}/{}, need two on each",
            counts.0, counts.1
        )));
    }

    let mut cost = problem.cost(&p);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (r, j, _) = problem.linearize(&p);
        let svd = j.svd(true, true);
        let tol = 1e-14 * svd.singular_values.max();
        let step = svd.solve(&r, tol).map_err(|e| Error::Numerical(e.to_string()))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = [p[0] + scale * step[0], p[1] + scale * step[1], p[2] + scale * step[2]];
            let c = problem.cost(&trial);
            if c <= cost {
                accepted = Some((trial, c));
                break;
            }
            scale *= 0.5;
        }
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let moved = scale * step.norm();
        match accepted {
            Some((trial, c)) => {
                p = trial;
                cost = c;
            }
            // No descent along the Gauss–Newton direction: at a minimum.
            None => {
                converged = true;
                break;
            }
        }
        if moved <= STEP_TOLERANCE * norm {
            converged = true;
            break;
        }
    }
    let rms_hz = (cost / n as f64).sqrt() * 1e6;
    if !converged {
        return Err(Error::NoConvergence { iterations, best_residual: rms_hz });
    }

    let (_, _, branch_counts) = problem.linearize(&p);
    let from_mhz = TAU * 1e6;
    let g = p[0].abs() * from_mhz;
    let omega_r = p[2] * from_mhz;
    let resolution_floor = TAU * (3.0 * rms_hz).max(1e-9 * omega_r / TAU);
    Ok(AnticrossingFit {
        g,
        delta: p[1] * from_mhz,
        omega_r,
        residual: rms_hz,
        iterations,
        resolution_floor,
        resolved: g > resolution_floor,
        branch_counts,
    })
}
