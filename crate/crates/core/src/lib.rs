//! Compute-optimal shape scaling toolkit.
//!
//! Fits the joint shape/compute scaling law to sweep measurements, derives
//! per-dimension scaling exponents and closed-form optimal shapes, plans
//! star and grid sweeps, scales a seed architecture to any compute budget,
//! and validates the closed forms against a synthetic ground-truth oracle.
//!
//! Compute is measured in GFLOPs everywhere. All operations are pure and
//! deterministic; stochastic ones (simulation, fitting) take explicit seeds.

pub mod cost;
pub mod error;
pub mod fit;
pub mod io;
pub mod law;
pub mod oracle;
pub mod par;
pub mod scaler;
pub mod shape;
pub mod sweeps;

pub use error::{Error, Result};
pub use shape::{Shape, ShapeDim};
