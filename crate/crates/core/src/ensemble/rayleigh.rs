//! Goodness of fit of the reference-point intensity to the exponential
//! (Rayleigh speckle) law implied by circular Gaussian amplitudes.

use serde::Serialize;

use super::SpeckleEnsemble;
use crate::error::{domain, Result};

pub const MIN_RAYLEIGH_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighReport {
    pub samples: usize,
    /// Kolmogorov-Smirnov distance to the exponential CDF with mean `mean_t`.
    pub ks_statistic: f64,
    pub p_value: f64,
    pub significance: f64,
    pub passed: bool,
    /// Maximum-likelihood exponential mean, i.e. the sample mean of `T`.
    pub fitted_mean: f64,
    pub fitted_mean_stderr: f64,
}

/// Asymptotic Kolmogorov tail probability `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn rayleigh_check(ens: &SpeckleEnsemble, significance: f64) -> Result<RayleighReport> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(domain(format!("significance must lie in (0, 1), got {significance}")));
    }
    ens.require(MIN_RAYLEIGH_SAMPLES)?;
    let q = ens.mean_t();
    let mut t: Vec<f64> = (0..ens.realizations()).map(|r| ens.transmission(r, 0)).collect();
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    t.sort_by(f64::total_cmp);
    let d = t
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = -(-v / q).exp_m1();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (hi - cdf).max(cdf - lo)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    let p_value = kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
    Ok(RayleighReport {
        samples: t.len(),
        ks_statistic: d,
        p_value,
        significance,
        passed: p_value >= significance,
        fitted_mean: mean,
        fitted_mean_stderr: (var / n).sqrt(),
    })
}
