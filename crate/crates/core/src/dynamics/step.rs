//! Fourth-order commutator-free exponential stepping.
//!
//! One step of length `h` from `t` applies
//! `exp(−ih(α₁H₁ + α₂H₂)) · exp(−ih(α₂H₁ + α₁H₂))` with `H₁, H₂` sampled at
//! the two Gauss–Legendre nodes `t + (½ ∓ √3/6)h`.

use super::frame::Frame;
use super::Hamiltonian;
use crate::linalg::{apply_propagator, ActionWork, ComplexMatrix, C64};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE_1: f64 = 0.5 - SQRT3 / 6.0;
const NODE_2: f64 = 0.5 + SQRT3 / 6.0;
const ALPHA_1: f64 = (3.0 - 2.0 * SQRT3) / 12.0;
const ALPHA_2: f64 = (3.0 + 2.0 * SQRT3) / 12.0;

/// What the stepper integrates: the lab-frame `H(t)` or `V_I(t)` in a
/// [`Frame`].
pub(crate) enum Generator<'a> {
    Lab(&'a dyn Hamiltonian),
    Frame(&'a Frame),
}

impl Generator<'_> {
    pub fn fill(&self, t: f64, out: &mut ComplexMatrix) {
        match self {
            Generator::Lab(h) => h.fill_at(t, out),
            Generator::Frame(f) => f.fill_coupling(t, out),
        }
    }
}

pub(crate) struct Stepper {
    h1: ComplexMatrix,
    h2: ComplexMatrix,
    combo: ComplexMatrix,
    work: ActionWork,
}

impl Stepper {
    pub fn new(dim: usize) -> Self {
        Self {
            h1: ComplexMatrix::zeros(dim, dim),
            h2: ComplexMatrix::zeros(dim, dim),
            combo: ComplexMatrix::zeros(dim, dim),
            work: ActionWork::default(),
        }
    }

    fn sample(&mut self, generator: &Generator, t: f64, h: f64) {
        generator.fill(t + NODE_1 * h, &mut self.h1);
        generator.fill(t + NODE_2 * h, &mut self.h2);
    }

    fn combine(&mut self, w1: f64, w2: f64) {
        let (a, b) = (self.h1.data(), self.h2.data());
        for ((o, x), y) in self.combo.data_mut().iter_mut().zip(a).zip(b) {
            *o = x * w1 + y * w2;
        }
    }

    /// Advances each vector in `states` by one step.
    pub fn advance(&mut self, generator: &Generator, t: f64, h: f64, states: &mut [&mut [C64]]) {
        self.sample(generator, t, h);
        self.combine(ALPHA_2, ALPHA_1);
        for psi in states.iter_mut() {
            apply_propagator(&self.combo, h, psi, &mut self.work);
        }
        self.combine(ALPHA_1, ALPHA_2);
        for psi in states.iter_mut() {
            apply_propagator(&self.combo, h, psi, &mut self.work);
        }
    }
}
