//! A single-intersection traffic signal control laboratory.
//!
//! The crate bundles a deterministic 1-second-tick microscopic simulator, an RL
//! environment wrapper with MDP and SMDP stepping, a from-scratch DQN learner,
//! rule-based reference controllers (fixed-time, random, SOTL-1.0/2.0) and the
//! experiment harness driving training, evaluation and Q-value sweeps.
//!
//! Module map:
//! - [`traffic`]: intersection topology, phase enumeration, vehicle flows
//! - [`sim`]: vehicle kinematics, signal/yellow dynamics, lane metrics
//! - [`env`]: state encodings, queue-length reward, action decoding, stepping
//! - [`agent`]: Q-network, Adam, replay memory, DQN updates, checkpoints
//! - [`baselines`]: fixed-time, random and SOTL controllers
//! - [`harness`]: configuration, training loop, comparisons, sweeps

pub mod agent;
pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
