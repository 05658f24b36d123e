use crate::linalg::{ComplexMatrix, C64};
use crate::model::DriveProfile;

#[derive(Debug, Clone, Copy)]
struct Entry {
    row: usize,
    col: usize,
    value: C64,
    /// `d_row − d_col`
    static_rate: f64,
    /// `z_row − z_col`
    drive_weight: f64,
}

/// Interaction picture of `H(t) = D + c(t)·Z + V`, with `D` and `Z`
/// diagonal and `V` the static off-diagonal part.
///
/// The frame phases `Φ_i(t) = D_ii·t + Z_ii·∫₀ᵗ c` are exact, so only
/// `V_I(t) = e^{iΦ} V e^{−iΦ}` has to be integrated numerically. Its norm
/// is set by the couplings rather than the level energies.
#[derive(Debug, Clone)]
pub struct Frame {
    diagonal: Vec<f64>,
    drive_diagonal: Vec<f64>,
    profile: DriveProfile,
    entries: Vec<Entry>,
}

impl Frame {
    /// `h` supplies `D` (its diagonal, real part) and `V` (everything else).
    pub fn new(h: &ComplexMatrix, drive_diagonal: Vec<f64>, profile: DriveProfile) -> Self {
        let n = h.rows();
        assert_eq!(drive_diagonal.len(), n, "drive diagonal length");
        let diagonal: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        let mut entries = Vec::new();
        for row in 0..n {
            for col in 0..n {
                let value = h[(row, col)];
                if row != col && value != C64::new(0.0, 0.0) {
                    entries.push(Entry {
                        row,
                        col,
                        value,
                        static_rate: diagonal[row] - diagonal[col],
                        drive_weight: drive_diagonal[row] - drive_diagonal[col],
                    });
                }
            }
        }
        Self { diagonal, drive_diagonal, profile, entries }
    }

    /// Frequency scale (rad/s) of the frame generator: the fastest phase
    /// rate any coupling entry reaches plus the largest row sum of `|V|`.
    pub fn max_rate(&self) -> f64 {
        let lz = self.profile.max_amplitude_and_frequency().0;
        let phase = self.entries.iter().fold(0.0, |m: f64, e| m.max(e.static_rate.abs() + e.drive_weight.abs() * lz));
        let mut rows = vec![0.0; self.dim()];
        for e in &self.entries {
            rows[e.row] += e.value.norm();
        }
        phase + rows.iter().fold(0.0, |m: f64, &r| m.max(r))
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Writes `V_I(t)` into `out`.
    pub(crate) fn fill_coupling(&self, t: f64, out: &mut ComplexMatrix) {
        let n = self.dim();
        let c = self.profile.integral(t);
        let data = out.data_mut();
        data.fill(C64::new(0.0, 0.0));
        for e in &self.entries {
            let phase = e.static_rate * t + e.drive_weight * c;
            data[e.row * n + e.col] = e.value * C64::from_polar(1.0, phase);
        }
    }

    /// `e^{i·sign·(Φ_i(t) − Φ_j(t))}`, the factor taking entry `(i, j)` of
    /// an operator into (`sign = 1`) or out of (`sign = −1`) the frame.
    pub(crate) fn entry_phase(&self, i: usize, j: usize, t: f64, integral: f64, sign: f64) -> C64 {
        let phase = (self.diagonal[i] - self.diagonal[j]) * t
            + (self.drive_diagonal[i] - self.drive_diagonal[j]) * integral;
        C64::from_polar(1.0, sign * phase)
    }

    pub(crate) fn integral(&self, t: f64) -> f64 {
        self.profile.integral(t)
    }

    /// `ψ ← e^{i·sign·Φ(t)} ψ`.
    pub(crate) fn rotate_ket(&self, t: f64, psi: &mut [C64], sign: f64) {
        let c = self.profile.integral(t);
        for (i, v) in psi.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, sign * (self.diagonal[i] * t + self.drive_diagonal[i] * c));
        }
    }

    /// `ρ ← e^{i·sign·Φ(t)} ρ e^{−i·sign·Φ(t)}`.
    pub(crate) fn rotate_density(&self, t: f64, rho: &mut [C64], sign: f64) {
        let n = self.dim();
        let c = self.profile.integral(t);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    rho[i * n + j] *= self.entry_phase(i, j, t, c, sign);
                }
            }
        }
    }
}
