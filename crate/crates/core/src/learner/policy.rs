use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

/// Mean parameters, per-parameter exploration scales and the current sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub theta: Vec<f64>,
    pub sigma_theta: Vec<f64>,
    pub theta_explored: Vec<f64>,
}

impl PolicyState {
    pub fn new(theta: Vec<f64>, sigma_init: f64) -> Self {
        let n = theta.len();
        Self {
            theta_explored: theta.clone(),
            theta,
            sigma_theta: vec![sigma_init; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Redraws `theta_explored ~ N(theta, sigma_theta²)` element-wise.
    pub fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for ((x, mu), s) in self
            .theta_explored
            .iter_mut()
            .zip(&self.theta)
            .zip(&self.sigma_theta)
        {
            let z: f64 = rng.sample(StandardNormal);
            *x = mu + s * z;
        }
    }
}
