//! Bessel functions of the first kind, orders 0 and 1.
//!
//! The power series is used up to |x| = 12, where cancellation still leaves
//! ~1e-12 absolute accuracy. Beyond that the Hankel asymptotic expansion,
//! truncated at its smallest term, is accurate to better than 1e-11.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;

/// First positive zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel_j0 of non-finite {x}")));
    }
    let ax = x.abs();
    Ok(if ax <= SERIES_LIMIT { series(0, ax) } else { hankel(0, ax) })
}

pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel_j1 of non-finite {x}")));
    }
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(1, ax) } else { hankel(1, ax) };
    Ok(if x < 0.0 { -v } else { v })
}

/// `Σ_k (−1)^k (x/2)^{2k+ν} / (k! (k+ν)!)` for ν ∈ {0, 1}.
fn series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= -q / (k * (k + order as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J_ν(x) ≈ √(2/πx) (P cos χ − Q sin χ)`, `χ = x − νπ/2 − π/4`.
fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 0..100usize {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k/x^k contributes to P for even k, Q for odd k, alternating in pairs.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let chi = x - order as f64 * PI / 2.0 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
