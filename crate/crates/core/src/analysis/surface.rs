use alloc::vec::Vec;

use crate::error::{check_arity, config, Result};
use crate::reward::{roger_gains, ConstraintSpec, PenaltyEstimate};

/// Gains at one point of the two-constraint adaptation surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    /// `r̃₁/τ₁`
    pub u1: f64,
    /// `r̃₂/τ₂`
    pub u2: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// ROGER gains on a `resolution × resolution` grid of normalized penalty
/// estimates over `[0, 1]²`, `u1` varying slowest.
pub fn surface_grid(resolution: usize, spec: &ConstraintSpec) -> Result<Vec<SurfacePoint>> {
    check_arity(2, spec.len())?;
    if resolution < 2 {
        return Err(config("surface resolution must be >= 2"));
    }
    let step = 1.0 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let (u1, u2) = (i as f64 * step, j as f64 * step);
            let est = PenaltyEstimate::from_values(alloc::vec![u1 * spec.tau[0], u2 * spec.tau[1]]);
            let g = roger_gains(&est, spec)?;
            out.push(SurfacePoint {
                u1,
                u2,
                lambda0: g.lambda0,
                lambda1: g.lambda[0],
                lambda2: g.lambda[1],
            });
        }
    }
    Ok(out)
}
