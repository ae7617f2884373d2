//! Time-dependent goals for a simulated robotic theremin player.
//!
//! The crate is organised bottom-up:
//!
//! * [`dsp`] synthesizes theremin tones, adds pink noise at a target SNR and
//!   turns 50 ms frames into magnitude spectra (CQT, STFT, mel-scaled STFT).
//! * [`kinematics`] holds the analytic robots: a 1-DOF cart and a 6-DOF arm.
//! * [`env`] is the theremin environment with its 200-step episodes and a goal
//!   note that changes every 25 steps.
//! * [`neuralnet`] is a small dense-network engine with exact backprop and Adam.
//! * [`agent`] is the goal-conditioned DDPG agent with hindsight relabeling over
//!   goal timelines.
//! * [`harness`] runs experiments, aggregates seeds and writes CSV/WAV output.

pub mod agent;
pub mod dsp;
pub mod env;
mod error;
pub mod harness;
pub mod kinematics;
pub mod neuralnet;

pub use error::{Error, Result};
