//! Simulation of quantum addressing and entanglement routing in networks of
//! Bell pairs.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevec`] sparse pure states over mixed-radix registers,
//! * [`topology`] Bell-pair graphs and deterministic spanning trees,
//! * [`addressing`] address and request states, device selection and
//!   controlled task execution,
//! * [`routing`] local, simplified, distributed and unified routing states,
//!   coherent Bell-pair selection and multi-hop teleportation,
//! * [`equivalence`] address-driven versus task-state-driven execution,
//! * [`scenarios`] figure fixtures and the overlay application.
//!
//! All state code is generic over the [`Real`] scalar; the aliases below fix
//! it to `f64`, which is what the tolerances of the test-suite assume.

pub mod addressing;
pub mod equivalence;
pub mod error;
pub mod routing;
pub mod scalar;
pub mod scenarios;
pub mod statevec;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex amplitude in double precision.
pub type Amplitude = num_complex::Complex<f64>;
/// Sparse state in double precision.
pub type State = statevec::SparseState<f64>;
/// Sparse state in single precision.
pub type StateF32 = statevec::SparseState<f32>;
/// Gate in double precision.
pub type Gate = statevec::GateSpec<f64>;
