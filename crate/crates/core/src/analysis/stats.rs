use alloc::format;
use alloc::vec::Vec;

use super::special::{normal_cdf, student_t_two_sided};
use crate::error::{config, Error, Result};

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation (divides by `n − 1`).
pub fn sample_std(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (samples.len() as f64 - 1.0))
}

/// Silverman's rule `1.06·σ̂·n^(−1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    1.06 * sample_std(samples) * libm::pow(samples.len() as f64, -0.2)
}

/// Upper-tail mass above `threshold` of a Gaussian KDE with Silverman
/// bandwidth, `(1/n) Σ (1 − Φ((threshold − xᵢ)/h))`.
///
/// Falls back to the empirical fraction `#{xᵢ > threshold}/n` when there are
/// fewer than two samples or no spread.
pub fn kde_tail_probability(samples: &[f64], threshold: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let empirical =
        || samples.iter().filter(|x| **x > threshold).count() as f64 / samples.len() as f64;
    if samples.len() < 2 {
        return empirical();
    }
    let h = silverman_bandwidth(samples);
    if !(h > 0.0 && h.is_finite()) {
        return empirical();
    }
    let tail: f64 = samples
        .iter()
        .map(|x| normal_cdf((x - threshold) / h))
        .sum();
    (tail / samples.len() as f64).clamp(0.0, 1.0)
}

/// Linear-interpolation quantile over the sorted samples at rank
/// `q/100·(n − 1)`.
pub fn percentile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if !(q > 0.0 && q < 100.0) {
        return Err(config(format!("percentile must lie in (0, 100), got {q}")));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = libm::floor(rank) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
}

/// Pooled two-sided two-proportion z-test. A pooled proportion of 0 or 1
/// carries no evidence of a difference and yields `p = 1`.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<ZTest> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(config(format!(
            "invalid proportions {k1}/{n1} vs {k2}/{n2}"
        )));
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(ZTest { z: 0.0, p: 1.0 });
    }
    let se = libm::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64));
    let z = (p1 - p2) / se;
    Ok(ZTest {
        z,
        p: libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2).min(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

impl TTest {
    /// One-sided p-value for `mean(a) > mean(b)`.
    pub fn p_greater(&self) -> f64 {
        if self.t >= 0.0 {
            0.5 * self.p_two_sided
        } else {
            1.0 - 0.5 * self.p_two_sided
        }
    }
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs two samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (sa, sb) = (sample_std(a), sample_std(b));
    let (va, vb) = (sa * sa / na, sb * sb / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if ma == mb {
            0.0
        } else {
            (ma - mb).signum() * f64::INFINITY
        };
        return Ok(TTest {
            t,
            df: na + nb - 2.0,
            p_two_sided: if ma == mb { 1.0 } else { 0.0 },
        });
    }
    let t = (ma - mb) / libm::sqrt(se2);
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TTest {
        t,
        df,
        p_two_sided: student_t_two_sided(t, df),
    })
}
