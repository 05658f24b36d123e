use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Direction of a map that is strictly monotone over its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Bias-line voltage as a cubic in the qubit gap,
/// `V(x) = c3 x³ + c2 x² + c1 x + c0` with `x = Δ/2π` in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicMap {
    coefficients: [f64; 4],
    domain: (f64, f64),
    monotonicity: Option<Monotonicity>,
}

/// Coefficients `(c3, c2, c1, c0)` of the measured flux-qubit bias map.
pub const REFERENCE_COEFFICIENTS: [f64; 4] = [0.2287, -2.758, 11.14, -15.27];

/// Gap range (GHz) over which the reference map was calibrated.
pub const REFERENCE_DOMAIN: (f64, f64) = (2.0, 5.0);

const INVERSION_TOLERANCE: f64 = 1e-12;

impl CubicMap {
    /// `coefficients` are `(c3, c2, c1, c0)`; `domain` is in GHz.
    pub fn new(coefficients: [f64; 4], domain: (f64, f64)) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("cubic coefficients must be finite".into()));
        }
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("invalid domain [{lo}, {hi}]")));
        }
        let monotonicity = monotonicity(coefficients, domain);
        Ok(Self { coefficients, domain, monotonicity })
    }

    pub fn reference() -> Self {
        Self::new(REFERENCE_COEFFICIENTS, REFERENCE_DOMAIN).expect("reference map is valid")
    }

    pub fn with_domain(self, lo: f64, hi: f64) -> Result<Self> {
        Self::new(self.coefficients, (lo, hi))
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.coefficients
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `None` when the derivative changes sign inside the domain.
    pub fn monotonicity(&self) -> Option<Monotonicity> {
        self.monotonicity
    }

    /// Horner evaluation with no domain check.
    pub fn eval_raw(&self, x: f64) -> f64 {
        let [c3, c2, c1, c0] = self.coefficients;
        ((c3 * x + c2) * x + c1) * x + c0
    }

    /// Voltage for gap `x` (GHz) inside the domain.
    pub fn valpha(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { value: x, lo, hi });
        }
        Ok(self.eval_raw(x))
    }

    /// Voltages at the two domain ends, in increasing order.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.eval_raw(self.domain.0), self.eval_raw(self.domain.1));
        (a.min(b), a.max(b))
    }

    /// Gap (GHz) producing voltage `v`, by bisection to 1e-12 GHz.
    pub fn invert(&self, v: f64) -> Result<f64> {
        let dir = self
            .monotonicity
            .ok_or_else(|| Error::InvalidArgument("map is not monotone over its domain".into()))?;
        let (vlo, vhi) = self.range();
        if !(v >= vlo && v <= vhi) {
            return Err(Error::OutOfDomain { value: v, lo: vlo, hi: vhi });
        }
        let (mut lo, mut hi) = self.domain;
        let increasing = dir == Monotonicity::Increasing;
        while hi - lo > INVERSION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.eval_raw(mid) < v) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Sign of `V'(x) = 3c3 x² + 2c2 x + c1` over the domain, if constant.
fn monotonicity([c3, c2, c1, _]: [f64; 4], (lo, hi): (f64, f64)) -> Option<Monotonicity> {
    let d = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let mut probes = vec![lo, hi];
    // Extremum of the derivative, where it is closest to changing sign.
    if c3 != 0.0 {
        let x = -c2 / (3.0 * c3);
        if x > lo && x < hi {
            probes.push(x);
        }
    }
    if probes.iter().all(|&x| d(x) > 0.0) {
        Some(Monotonicity::Increasing)
    } else if probes.iter().all(|&x| d(x) < 0.0) {
        Some(Monotonicity::Decreasing)
    } else {
        None
    }
}

pub fn valpha(x: f64, map: &CubicMap) -> Result<f64> {
    map.valpha(x)
}

#[derive(Debug, Clone)]
pub struct CubicFit {
    /// Fitted map with the domain spanned by the data.
    pub map: CubicMap,
    /// `y − V(x)` per input point.
    pub residuals: Vec<f64>,
}

impl CubicFit {
    pub fn rms_residual(&self) -> f64 {
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

/// Least-squares cubic through `(x, y)` points via a QR solve of the
/// Vandermonde system.
pub fn fit_cubic(points: &[(f64, f64)]) -> Result<CubicFit> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("fit points must be finite".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 4 {
        return Err(Error::RankDeficient(format!("{} distinct x values, need 4", xs.len())));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    // Centre and scale x so the columns stay well conditioned.
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let a = DMatrix::from_fn(points.len(), 4, |i, j| ((points[i].0 - mid) / half).powi(3 - j as i32));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let qr = a.qr();
    let r = qr.r();
    let scale = r.diagonal().abs().max();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::RankDeficient("Vandermonde system is numerically singular".into()));
    }
    let qtb = qr.q().transpose() * &b;
    let u = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
    // Back to powers of x: p(x) = Σ u_k s^k with s = (x − mid)/half.
    let scaled = [u[3], u[2], u[1], u[0]];
    let mut coeffs = [0.0; 4];
    let (inv, shift) = (1.0 / half, -mid / half);
    // Expand Σ_k scaled[k] (inv·x + shift)^k by repeated multiplication.
    let mut power = [1.0, 0.0, 0.0, 0.0];
    for (k, &s) in scaled.iter().enumerate() {
        for d in 0..4 {
            coeffs[d] += s * power[d];
        }
        if k < 3 {
            let mut next = [0.0; 4];
            for d in 0..3 {
                next[d + 1] += power[d] * inv;
                next[d] += power[d] * shift;
            }
            next[3] += power[3] * shift;
            power = next;
        }
    }
    let map = CubicMap::new([coeffs[3], coeffs[2], coeffs[1], coeffs[0]], (lo, hi))?;
    let residuals = points.iter().map(|&(x, y)| y - map.eval_raw(x)).collect();
    Ok(CubicFit { map, residuals })
}

/// Gap tuning curve `(V, Δ/2π)` for a voltage sweep.
#[derive(Debug, Clone)]
pub struct GapCurve {
    /// `(volts, GHz)` pairs in sweep order.
    pub points: Vec<(f64, f64)>,
    /// Voltage at which the gap equals the resonator frequency, when the
    /// sweep brackets it.
    pub resonator_crossing: Option<f64>,
}

/// Inverts the map at each sweep voltage and marks where the gap crosses
/// `resonator_ghz`.
pub fn gap_tuning_curve(map: &CubicMap, voltages: &[f64], resonator_ghz: f64) -> Result<GapCurve> {
    let points = voltages.iter().map(|&v| Ok((v, map.invert(v)?))).collect::<Result<Vec<_>>>()?;
    let crossing = points
        .windows(2)
        .any(|w| (w[0].1 - resonator_ghz) * (w[1].1 - resonator_ghz) <= 0.0);
    let resonator_crossing = if crossing { Some(map.valpha(resonator_ghz)?) } else { None };
    Ok(GapCurve { points, resonator_crossing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let m = CubicMap::reference();
        assert_eq!(m.eval_raw(0.0), -15.27);
        assert!((m.eval_raw(1.0) - (0.2287 - 2.758 + 11.14 - 15.27)).abs() < 1e-12);
        assert!((m.valpha(2.417).unwrap() - -1.2274).abs() < 1e-4);
        assert!(matches!(m.valpha(0.0), Err(Error::OutOfDomain { .. })));
        assert_eq!(m.monotonicity(), Some(Monotonicity::Increasing));
    }

    #[test]
    fn detects_non_monotone_maps() {
        let m = CubicMap::new([1.0, 0.0, -3.0, 0.0], (-2.0, 2.0)).unwrap();
        assert_eq!(m.monotonicity(), None);
        assert!(m.invert(0.0).is_err());
        let m = CubicMap::new([-1.0, 0.0, -1.0, 0.0], (-2.0, 2.0)).unwrap();
        assert_eq!(m.monotonicity(), Some(Monotonicity::Decreasing));
        assert!((m.invert(m.eval_raw(0.7)).unwrap() - 0.7).abs() < 1e-11);
    }

    #[test]
    fn exact_cubics_are_recovered() {
        let pts: Vec<_> = (0..9).map(|k| 1.0 + 0.5 * k as f64).map(|x| (x, x * x * x)).collect();
        let fit = fit_cubic(&pts).unwrap();
        let c = fit.map.coefficients();
        for (got, want) in c.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-9, "{c:?}");
        }
        assert!(fit.rms_residual() < 1e-9);
        let four = fit_cubic(&[(0.0, 1.0), (1.0, -2.0), (2.0, 5.0), (4.0, 0.5)]).unwrap();
        assert!(four.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let pts = [(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0), (3.0, 5.0)];
        assert!(matches!(fit_cubic(&pts), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn tuning_curve_marks_resonator_crossing() {
        let m = CubicMap::reference();
        let volts: Vec<f64> = (0..=20).map(|k| m.valpha(2.0 + 0.15 * k as f64).unwrap()).collect();
        let curve = gap_tuning_curve(&m, &volts, 2.417).unwrap();
        assert!(curve.points.windows(2).all(|w| w[1].1 > w[0].1));
        let v = curve.resonator_crossing.unwrap();
        assert!((m.invert(v).unwrap() - 2.417).abs() < 1e-9);
        let short = gap_tuning_curve(&m, &volts[10..], 2.417).unwrap();
        assert_eq!(short.resonator_crossing, None);
        assert!(gap_tuning_curve(&m, &[100.0], 2.417).is_err());
    }
}
