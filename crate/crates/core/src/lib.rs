//! Online reward-weighting adaptation for constrained policy search.
//!
//! The crate is `no_std` (with `alloc`) and holds every numerical piece of the
//! laboratory:
//!
//! * [`reward`]: reward channels, confidence-adjusted penalty estimates, the
//!   ROGER gain rule and the baseline weighting schemes (fixed penalty,
//!   quadratic/logarithmic CBF, PDO, CRPO, OL-AUX).
//! * [`learner`]: Gaussian parameter-space exploration and the AGOL update.
//! * [`env`]: the reward-landscape bandit and the cart-tilt proxy.
//! * [`trial`]: the episode loop coupling exploration data back into the
//!   gain adaptation.
//! * [`analysis`]: statistics and the property checkers run over trial logs.
//!
//! File formats, configuration documents and the command line live in the
//! `roger-lab` companion crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod env;
mod error;
pub mod learner;
pub mod log;
pub mod reward;
pub mod rng;
pub mod trial;

pub use error::{Error, Result};
