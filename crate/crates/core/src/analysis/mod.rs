//! Statistics and property checks over trial logs.

mod checks;
mod special;
mod stats;
mod surface;

pub use checks::{
    check_learning_inequality, check_lyapunov_boundary, check_reward_identity, primary_range,
    Checkpoint, LearningInequality, LyapunovReport, LyapunovVerdict,
};
pub use special::{normal_cdf, regularized_incomplete_beta, student_t_two_sided};
pub use stats::{
    kde_tail_probability, mean, percentile, sample_std, silverman_bandwidth, two_proportion_test,
    welch_t_test, TTest, ZTest,
};
pub use surface::{surface_grid, SurfacePoint};
