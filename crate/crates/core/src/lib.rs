//! Linear-time kernel MMD two-sample testing with its high-dimensional
//! power theory and a Monte Carlo harness.
//!
//! The crate has four layers:
//!
//! * [`model`] — the generative model: i.i.d. coordinate laws with exact
//!   central moments, mean shifts, random rotations, seeded sampling.
//! * [`kernel`] / [`stat`] — kernels, bandwidth rules (including the median
//!   heuristic), the h kernel, the O(n) MMD² statistic with its studentized
//!   test, the quadratic MMD²_u, the CQ statistic, and permutation
//!   calibration.
//! * [`theory`] — closed forms: population MMD² and variance, the power
//!   formula and its SNR corollaries, CQ power rates, Berry-Esseen and τ₄
//!   bounds, the Taylor-expansion integrals, and the independent oracles
//!   (exact Gaussian identities, adaptive quadrature, Monte Carlo).
//! * [`sim`] — the Monte Carlo harness: rejection-rate estimation, power
//!   sweeps with presets, Berry-Esseen ratio curves, MMD²/√V scaling
//!   curves, and QQ exports — all bit-reproducible from a master seed.
//!
//! `examples/` has one runnable program per capability; the `mmdhd` binary
//! wraps everything in a small CLI.

pub mod cli;
pub mod error;
pub mod kernel;
pub mod model;
pub mod normal;
pub mod quadrature;
pub mod seed;
pub mod sim;
pub mod stat;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{BandwidthRule, KernelFamily, KernelSpec};
pub use model::{central_moments, random_rotation, sample_pair, CoordinateLaw, ModelSpec, Rotation};
pub use stat::{linear_test, TestOutcome};
pub use theory::{power_prediction, PowerPrediction, TheoryInputs};
