use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 16;
const MIN_SNR: f64 = 3.0;
const PAD: usize = 8;
/// Polynomial degree removed before the transform.
const DETREND_DEGREE: usize = 2;

/// Dominant oscillation frequency (Hz) of a uniformly sampled trace.
///
/// Removes a quadratic trend, applies a Hann window, and picks the largest
/// local maximum of the DFT magnitude at two or more cycles per window.
/// The peak is refined on an 8× zero-padded transform with 3-point
/// parabolic interpolation. Returns `None` when the peak is less than three
/// times the median spectral magnitude, when the trace has no oscillation,
/// or when the input is too short or not uniformly sampled.
pub fn extract_frequency(trace: &[f64], times: &[f64]) -> Option<f64> {
    extract_frequency_below(trace, times, f64::INFINITY)
}

/// [`extract_frequency`] restricted to peaks below `max_frequency` (Hz).
pub fn extract_frequency_below(trace: &[f64], times: &[f64], max_frequency: f64) -> Option<f64> {
    let n = trace.len();
    if n < MIN_SAMPLES || times.len() != n || trace.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return None;
    }
    let residual = detrend(trace, DETREND_DEGREE)?;
    let scale = trace.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if residual.iter().fold(0.0_f64, |m, v| m.max(v.abs())) <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    let windowed: Vec<f64> =
        residual.iter().enumerate().map(|(k, v)| v * 0.5 * (1.0 - (TAU * k as f64 / n as f64).cos())).collect();

    let mags = magnitudes(&windowed, n);
    let k_lo = 2;
    let nyquist = n / 2;
    let k_hi = ((max_frequency * n as f64 * dt).floor().min((nyquist - 1) as f64)) as usize;
    if k_hi < k_lo + 2 {
        return None;
    }
    let band = &mags[k_lo..=k_hi];
    let mut peak = None;
    for k in k_lo..=k_hi {
        if mags[k] >= mags[k - 1] && mags[k] >= mags[k + 1] && peak.is_none_or(|p: usize| mags[k] > mags[p]) {
            peak = Some(k);
        }
    }
    let k = peak?;
    let mut sorted = band.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if mags[k] < MIN_SNR * median || mags[k] == 0.0 {
        return None;
    }

    let padded = magnitudes(&windowed, n * PAD);
    let centre = k * PAD;
    let (lo, hi) = (centre.saturating_sub(PAD).max(1), (centre + PAD).min(padded.len() - 2));
    let mut best = centre;
    for j in lo..=hi {
        if padded[j] > padded[best] {
            best = j;
        }
    }
    let (a, b, c) = (padded[best - 1], padded[best], padded[best + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    Some((best as f64 + shift) / ((n * PAD) as f64 * dt))
}

/// DFT magnitudes `|X_k|`, `k = 0..=len/2`, of `x` zero-padded to `len`.
fn magnitudes(x: &[f64], len: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf[..=len / 2].iter().map(|z| z.norm()).collect()
}

/// Residual after a least-squares polynomial fit in index space.
fn detrend(y: &[f64], degree: usize) -> Option<Vec<f64>> {
    let n = y.len();
    let x = |k: usize| 2.0 * k as f64 / (n - 1) as f64 - 1.0;
    let a = DMatrix::from_fn(n, degree + 1, |r, c| x(r).powi(c as i32));
    let coef = a.clone().svd(true, true).solve(&DVector::from_column_slice(y), 1e-14).ok()?;
    let fit = a * coef;
    Some(y.iter().zip(fit.iter()).map(|(v, f)| v - f).collect())
}

/// Least-squares fit of `y = e^{−κτ}(A cos(2πfτ + φ) + c)`, `τ = t − t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedCosineFit {
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// κ (1/s).
    pub decay: f64,
    pub phase: f64,
    pub offset: f64,
    /// Time origin `t0` (s).
    pub origin: f64,
    pub rms_residual: f64,
}

impl DampedCosineFit {
    pub fn eval(&self, t: f64) -> f64 {
        let tau = t - self.origin;
        (-self.decay * tau).exp() * (self.amplitude * (TAU * self.frequency * tau + self.phase).cos() + self.offset)
    }
}

/// Fits a damped cosine with offset, seeded at `seed_frequency` (Hz).
///
/// Linear parameters are solved exactly for a grid of trial decay rates,
/// then all five parameters are polished by Levenberg–Marquardt.
pub fn fit_damped_cosine(times: &[f64], y: &[f64], seed_frequency: f64) -> Result<DampedCosineFit> {
    let n = y.len();
    if n < 8 || times.len() != n {
        return Err(Error::InsufficientData(format!("damped-cosine fit needs >= 8 matched samples, got {n}")));
    }
    if !(seed_frequency > 0.0 && seed_frequency.is_finite()) {
        return Err(Error::InvalidArgument("seed frequency must be positive".into()));
    }
    let t0 = times[0];
    let tau: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let span = tau[n - 1];
    let omega0 = TAU * seed_frequency;

    // p = [a1, a2, c, ω, κ] with y = e^{−κτ}(a1 cos ωτ + a2 sin ωτ + c).
    let mut best: Option<(Vec<f64>, f64)> = None;
    for kappa in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0].map(|m| m / span) {
        if let Some(lin) = linear_part(&tau, y, omega0, kappa) {
            let p = vec![lin[0], lin[1], lin[2], omega0, kappa];
            let cost = cost(&tau, y, &p);
            if best.as_ref().is_none_or(|b| cost < b.1) {
                best = Some((p, cost));
            }
        }
    }
    let (mut p, mut c) = best.ok_or_else(|| Error::Numerical("damped-cosine seed is singular".into()))?;
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let (jtj, jtr) = normal_equations(&tau, y, &p);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for i in 0..5 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(v, s)| v + s).collect();
            let tc = cost(&tau, y, &trial);
            if tc.is_finite() && tc <= c {
                let done = c - tc <= 1e-15 * c.max(1e-300);
                p = trial;
                c = tc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("damped-cosine fit diverged".into()));
    }
    let (a1, a2) = (p[0], p[1]);
    let (mut omega, mut phase) = (p[3], (-a2).atan2(a1));
    if omega < 0.0 {
        omega = -omega;
        phase = -phase;
    }
    Ok(DampedCosineFit {
        amplitude: a1.hypot(a2),
        frequency: omega / TAU,
        decay: p[4],
        phase,
        offset: p[2],
        origin: t0,
        rms_residual: (c / n as f64).sqrt(),
    })
}

fn model(tau: f64, p: &[f64]) -> f64 {
    let (s, co) = (p[3] * tau).sin_cos();
    (-p[4] * tau).exp() * (p[0] * co + p[1] * s + p[2])
}

fn cost(tau: &[f64], y: &[f64], p: &[f64]) -> f64 {
    tau.iter().zip(y).map(|(&t, &v)| (v - model(t, p)).powi(2)).sum()
}

fn linear_part(tau: &[f64], y: &[f64], omega: f64, kappa: f64) -> Option<Vec<f64>> {
    let a = DMatrix::from_fn(tau.len(), 3, |r, c| {
        let e = (-kappa * tau[r]).exp();
        match c {
            0 => e * (omega * tau[r]).cos(),
            1 => e * (omega * tau[r]).sin(),
            _ => e,
        }
    });
    let sol = a.svd(true, true).solve(&DVector::from_column_slice(y), 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

fn normal_equations(tau: &[f64], y: &[f64], p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let mut jtj = DMatrix::zeros(5, 5);
    let mut jtr = DVector::zeros(5);
    for (&t, &v) in tau.iter().zip(y) {
        let e = (-p[4] * t).exp();
        let (s, co) = (p[3] * t).sin_cos();
        let inner = p[0] * co + p[1] * s + p[2];
        let j = [e * co, e * s, e, e * t * (-p[0] * s + p[1] * co), -t * e * inner];
        let r = v - e * inner;
        for a in 0..5 {
            jtr[a] += j[a] * r;
            for b in 0..5 {
                jtj[(a, b)] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}
