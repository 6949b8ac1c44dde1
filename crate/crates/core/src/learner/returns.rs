use alloc::vec::Vec;

use super::buffer::TrajectoryBuffer;
use crate::error::{Error, Result};
use crate::reward::estimate_mean_std;

/// Lower bound on the return standard deviation used for normalization.
pub const RETURN_STD_FLOOR: f64 = 1e-8;

/// Returns of one channel over the whole buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnStats {
    /// Per-sample returns, in buffer order (oldest episode first).
    pub g: Vec<f64>,
    pub g_bar: f64,
    pub g_std: f64,
}

impl ReturnStats {
    fn from_returns(g: Vec<f64>) -> Self {
        let (g_bar, std) = estimate_mean_std(&g);
        Self {
            g,
            g_bar,
            g_std: std.max(RETURN_STD_FLOOR),
        }
    }

    /// Normalized advantage `(Gᵢ − Ḡ)/σ_G` of sample `i`.
    pub fn advantage(&self, i: usize) -> f64 {
        (self.g[i] - self.g_bar) / self.g_std
    }
}

/// Windowed mean of `values` over `[t, t + horizon)`, truncated at the end.
pub(crate) fn horizon_means(values: &[f64], horizon: usize) -> impl Iterator<Item = f64> + '_ {
    (0..values.len()).map(move |t| {
        let end = (t + horizon).min(values.len());
        values[t..end].iter().sum::<f64>() / (end - t) as f64
    })
}

/// Per-channel horizon returns (primary first, then each penalty).
pub fn channel_returns(buffer: &TrajectoryBuffer, horizon: usize) -> Result<Vec<ReturnStats>> {
    let first = buffer
        .episodes()
        .find(|e| !e.is_empty())
        .ok_or(Error::EmptyWindow)?;
    let channels = 1 + first.samples[0].penalties.len();
    let total = buffer.sample_count();

    let mut returns: Vec<Vec<f64>> = (0..channels).map(|_| Vec::with_capacity(total)).collect();
    let mut column = Vec::new();
    for episode in buffer.episodes() {
        for (c, out) in returns.iter_mut().enumerate() {
            column.clear();
            column.extend(episode.samples.iter().map(|s| {
                if c == 0 {
                    s.primary
                } else {
                    s.penalties[c - 1]
                }
            }));
            out.extend(horizon_means(&column, horizon.max(1)));
        }
    }
    Ok(returns.into_iter().map(ReturnStats::from_returns).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::Episode;
    use crate::reward::ChannelSample;
    use alloc::vec;

    fn buffer_of(primary: &[&[f64]]) -> TrajectoryBuffer {
        let mut b = TrajectoryBuffer::new(primary.len());
        for rewards in primary {
            let mut e = Episode::new(vec![0.0]);
            for (t, r) in rewards.iter().enumerate() {
                e.push(ChannelSample::new(*r, vec![0.0], t), vec![0.0], vec![1.0]);
            }
            b.push(e);
        }
        b
    }

    // Direct loop over the window, independent of the iterator above.
    fn windowed_mean(values: &[f64], t: usize, h: usize) -> f64 {
        let mut sum = 0.0;
        let mut count = 0;
        let mut k = t;
        while k < values.len() && k < t + h {
            sum += values[k];
            count += 1;
            k += 1;
        }
        sum / count as f64
    }

    #[test]
    fn constant_signal() {
        let b = buffer_of(&[&[1.0; 30], &[1.0; 30]]);
        let stats = channel_returns(&b, 20).unwrap();
        assert!(stats[0].g.iter().all(|g| *g == 1.0));
        assert_eq!(stats[0].g_std, RETURN_STD_FLOOR);
        assert_eq!(stats[1].advantage(3), 0.0);
    }

    #[test]
    fn step_signal_over_horizon() {
        let mut r = vec![1.0; 20];
        r.extend(vec![0.0; 50]);
        let stats = channel_returns(&buffer_of(&[&r]), 20).unwrap();
        assert_eq!(stats[0].g[0], windowed_mean(&r, 0, 20));
        assert_eq!(stats[0].g[0], 1.0);
        assert_eq!(stats[0].g[20], 0.0);
        for t in 0..r.len() {
            assert!((stats[0].g[t] - windowed_mean(&r, t, 20)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_horizon_is_instantaneous() {
        let r = [0.5, -1.0, 2.0];
        let stats = channel_returns(&buffer_of(&[&r]), 1).unwrap();
        assert_eq!(stats[0].g, r.to_vec());
    }

    #[test]
    fn normalized_advantages_are_standardized() {
        let r: Vec<f64> = (0..70).map(|t| ((t * 37) % 11) as f64 * 0.3).collect();
        let stats = channel_returns(&buffer_of(&[&r, &r[5..]]), 20).unwrap();
        let s = &stats[0];
        let adv: Vec<f64> = (0..s.g.len()).map(|i| s.advantage(i)).collect();
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / adv.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-6);
    }
}
