use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Qubit bias ε (rad/s).
    Epsilon,
    /// Probe frequency (rad/s).
    ProbeFrequency,
    /// Drive amplitude λz (rad/s).
    LambdaZ,
    /// Time (s).
    Time,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::ProbeFrequency => "probe_frequency",
            SweepVariable::LambdaZ => "lambda_z",
            SweepVariable::Time => "time",
        }
    }

    /// True for quantities stored as angular frequencies.
    pub fn is_angular(self) -> bool {
        self != SweepVariable::Time
    }
}

/// Evenly spaced sweep, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidArgument(format!("{} sweep needs at least 2 points", variable.name())));
        }
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(Error::InvalidArgument(format!(
                "{} sweep needs stop > start, got [{start}, {stop}]",
                variable.name()
            )));
        }
        Ok(Self { variable, start, stop, n_points })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|i| if i == last { self.stop } else { self.start + (self.stop - self.start) * (i as f64 / last as f64) })
            .collect()
    }

    pub(crate) fn expect(&self, variable: SweepVariable) -> Result<()> {
        if self.variable == variable {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("expected a {} sweep, got {}", variable.name(), self.variable.name())))
        }
    }
}

/// A curve drawn over a map, one value per x point.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub name: String,
    pub values: Vec<f64>,
}

/// Population map `P[x][y]` with its axes and overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    pub x_variable: SweepVariable,
    pub x_axis: Vec<f64>,
    pub y_variable: SweepVariable,
    pub y_axis: Vec<f64>,
    /// Row-major with x outer: `population[ix * y_axis.len() + iy]`.
    pub population: Vec<f64>,
    pub overlays: Vec<Overlay>,
}

impl SpectrumMap {
    pub(crate) fn from_columns(
        x_variable: SweepVariable,
        x_axis: Vec<f64>,
        y_variable: SweepVariable,
        y_axis: Vec<f64>,
        columns: Vec<Vec<f64>>,
        overlays: Vec<Overlay>,
    ) -> Result<Self> {
        if columns.len() != x_axis.len() || columns.iter().any(|c| c.len() != y_axis.len()) {
            return Err(Error::Shape("map columns do not match the axes".into()));
        }
        let population: Vec<f64> = columns.into_iter().flatten().collect();
        if let Some(bad) = population.iter().find(|p| !(-1e-8..=1.0 + 1e-8).contains(*p)) {
            return Err(Error::Numerical(format!("population {bad} outside [0, 1]")));
        }
        Ok(Self { x_variable, x_axis, y_variable, y_axis, population, overlays })
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.population[ix * self.y_axis.len() + iy]
    }

    pub fn column(&self, ix: usize) -> &[f64] {
        let n = self.y_axis.len();
        &self.population[ix * n..(ix + 1) * n]
    }

    pub fn overlay(&self, name: &str) -> Option<&Overlay> {
        self.overlays.iter().find(|o| o.name == name)
    }
}
