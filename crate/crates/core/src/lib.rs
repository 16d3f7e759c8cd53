//! Allen–Cahn equation with nonlinear anisotropic diffusion on the periodic
//! unit torus, together with its sharp-interface limit.
//!
//! * [`model`]: bistable reaction, diffusivity tensor, structural checks and
//!   the direction-dependent functions `a_e`, `A_e`, `W_e`.
//! * [`profile`]: the standing wave `U_0(z; e)` and the linearized problem
//!   around it.
//! * [`mobility`]: `lambda(e)` and the mobility tensor `mu(e)` of the limit
//!   flow, with a tangential-ellipticity certificate.
//! * [`acsolver`]: explicit finite-difference solver for the phase-field
//!   equation and level-set extraction.
//! * [`flow`]: front tracking and level-set solvers for the limit flow,
//!   signed distance and Hausdorff metrics.
//! * [`harness`]: reaction-ODE checks and the generation and propagation
//!   experiments.

pub mod error;
pub mod poly;
pub mod quadrature;
pub mod spline;
pub mod model;
pub mod profile;
pub mod mobility;
pub mod acsolver;
pub mod shape;
pub mod flow;
pub mod harness;

pub use error::{Error, Result};
