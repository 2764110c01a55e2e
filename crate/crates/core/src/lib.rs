//! Link-level simulator for an RSMA LEO-satellite downlink relayed by a
//! UAV-mounted beyond-diagonal active RIS, exposed as a constrained MDP.
//!
//! The crate is organised bottom-up:
//!
//! - [`units`] — dB/dBm conversions.
//! - [`bessel`] — first-kind Bessel functions needed by the satellite
//!   antenna pattern.
//! - [`linalg`] — small dense complex vectors/matrices.
//! - [`config`] — scenario parameters (geometry, radio, power models).
//! - [`channel`] — Rician fading channel generation with imperfect CSI.
//! - [`bdris`] — group-connected BD active RIS matrices and their
//!   feasibility projection.
//! - [`rsma`] — rate-splitting SINRs, rates and the energy-efficiency
//!   objective.
//! - [`power`] — satellite / RIS / UAV power accounting.
//! - [`env`] — the constrained MDP (observation encoding, action decoding,
//!   penalty reward, step/reset lifecycle).
//! - [`seeding`] — deterministic substream derivation from a master seed.

pub mod bdris;
pub mod bessel;
pub mod channel;
pub mod config;
pub mod env;
pub mod error;
pub mod linalg;
pub mod power;
pub mod rsma;
pub mod seeding;
pub mod units;

pub use config::{HoverParams, LinkGainScale, RicianK, RisMode, ScenarioConfig, UserLayout};
pub use env::{EnvConfig, Environment, Observation, RsmaEnv, StepOutcome, Transition, ViolationVector};
pub use error::CoreError;
