//! Simulation, stability certification and robust gain tuning for saturated
//! discrete-time PID loops on robotic joints.
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: first-order (Euler and exact ZOH) and second-order actuator
//!   plants, sensor noise/quantization and input delay.
//! - [`controller`]: discrete P/PI/PID with clamping, a filtered derivative
//!   and back-calculation anti-windup.
//! - [`metrics`]: step-response and tracking metrics over sampled trajectories.
//! - [`stability`]: Jury tests for the P and PI loops, region grids and a
//!   delay-aware robust screen.
//! - [`robustness`]: the closed-loop runner, randomized model families and the
//!   penalized median objective.
//! - [`tuner`]: hybrid-certified Bayesian optimisation with a Gaussian-process
//!   surrogate, plus an unconstrained random-search baseline.

pub mod controller;
pub mod error;
pub mod metrics;
pub mod robustness;
pub mod rng;
pub mod sim;
pub mod stability;
pub mod tuner;

pub use error::{Error, Result};
