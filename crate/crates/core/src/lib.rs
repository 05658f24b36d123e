//! Simulation and calibration toolkit for a flux qubit coupled to a
//! resonator whose coupling is switched by a longitudinal drive.
//!
//! A drive `λz cos(ωz t)` on the qubit's σz renormalizes the exchange
//! coupling to `g·J0(2λz/ωz)`, so choosing `2λz/ωz` at the first zero of
//! `J0` turns the qubit–resonator interaction off. The crate builds the
//! Hamiltonians, integrates unitary and Lindblad dynamics, measures the
//! Floquet gap, runs the spectroscopy and switching protocols, and maps
//! target frequencies to bias-line voltages.
//!
//! All internal frequencies are angular (rad/s); [`units`] converts from
//! ordinary Hz at the boundary.
//!
//! ```
//! use qswitch::model::DeviceModel;
//! use qswitch::units::mhz;
//!
//! let device = DeviceModel::reference_device();
//! assert!((device.g() - mhz(9.14)).abs() < 1.0);
//! ```

pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod protocols;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/hilbert-space.md")]
    mod hilbert_space {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/floquet.md")]
    mod floquet {}
    #[doc = include_str!("../../../book/src/dissipation.md")]
    mod dissipation {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
}
