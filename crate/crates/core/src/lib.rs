//! Force/displacement-driven hole search for peg-in-hole insertion into
//! chamfered holes in brittle, high-friction walls.
//!
//! The peg never slides on the surface: every search step detaches it,
//! moves it by a fixed lattice step and presses it toward the wall again.
//! A small Q-network chooses the next step from the measured forces,
//! moments and the peg displacement toward the wall.
//!
//! Modules:
//! - [`environment`]: simulated wall, contact response, episode lifecycle, reward.
//! - [`neuralnet`]: feed-forward Q-network, exact backprop, Adam, guided backprop, checkpoints.
//! - [`agent`]: Boltzmann exploration, replay buffer, TD training step.
//! - [`strategies`]: spiral and moment-feedback baselines plus the DQN policy.
//! - [`harness`]: training and evaluation protocols, reports, saliency.

pub mod agent;
pub mod environment;
pub mod error;
pub mod harness;
pub mod neuralnet;
pub mod parallel;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
