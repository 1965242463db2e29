//! Monte Carlo estimate of the noise frequency correlation
//! `C(x_k) = <v_0 v_k> / (<v_0> <v_k>) - 1`, where `v` is the photon-number
//! variance of the transmitted light in one disorder realization.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{SpeckleEnsemble, MIN_REALIZATIONS};
use crate::curve::{CorrelationCurve, CurvePoint};
use crate::error::{domain, Error, Result};
use crate::photon::{
    transmitted_variance_classical, transmitted_variance_quantum, ChannelTransmission, CountLaw,
    QuantumState, StateKind,
};
use crate::rng::{domain as stream, stream_rng};

pub const DEFAULT_BOOTSTRAP: usize = 200;

/// What fluctuates in the input beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum NoiseSource {
    /// Quantum noise of the given input state.
    Quantum(QuantumState),
    /// Classical (technical) noise with variance `noise_scale <n>^2 T^2`.
    Classical { mean_photons: f64, noise_scale: f64 },
}

impl NoiseSource {
    pub fn classical() -> Self {
        NoiseSource::Classical {
            mean_photons: 1.0,
            noise_scale: 1.0,
        }
    }

    fn label(&self) -> String {
        match self {
            NoiseSource::Quantum(s) => format!("{}(F={})", s.kind().name(), s.fano()),
            NoiseSource::Classical { .. } => "classical".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EstimationMode {
    /// Per-realization variance from the closed-form loss law.
    AnalyticVariance,
    /// Per-realization unbiased sample variance of `shots` drawn photon counts.
    Counting { shots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCorrelationEstimate {
    pub curve: CorrelationCurve,
    pub mode: EstimationMode,
    pub source: NoiseSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_per_realization: Option<usize>,
    /// Number of sampled transmissions above 1 that were clamped.
    pub clamped: usize,
}

/// Ratio-of-means estimator with bootstrap standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimator {
    pub source: NoiseSource,
    pub mode: EstimationMode,
    pub bootstrap_resamples: usize,
    /// Seeds the count draws and the bootstrap resampling.
    pub seed: u64,
}

impl NoiseEstimator {
    pub fn new(source: NoiseSource, mode: EstimationMode, seed: u64) -> Self {
        Self {
            source,
            mode,
            bootstrap_resamples: DEFAULT_BOOTSTRAP,
            seed,
        }
    }

    pub fn with_bootstrap(mut self, resamples: usize) -> Self {
        self.bootstrap_resamples = resamples;
        self
    }

    fn check(&self) -> Result<()> {
        if self.bootstrap_resamples < 2 {
            return Err(domain("at least 2 bootstrap resamples are required"));
        }
        if let NoiseSource::Classical {
            mean_photons,
            noise_scale,
        } = self.source
        {
            if !(mean_photons > 0.0 && mean_photons.is_finite()) {
                return Err(domain("classical noise needs a positive mean photon number"));
            }
            if !(noise_scale > 0.0 && noise_scale.is_finite()) {
                return Err(domain("classical noise scale must be positive"));
            }
        }
        if let EstimationMode::Counting { shots } = self.mode {
            if shots < 2 {
                return Err(domain("counting mode needs at least 2 shots per realization"));
            }
            match self.source {
                NoiseSource::Classical { .. } => {
                    return Err(Error::UnsupportedSampling("classical-noise"));
                }
                NoiseSource::Quantum(s) if s.kind() == StateKind::Custom => {
                    return Err(Error::UnsupportedSampling("custom"));
                }
                NoiseSource::Quantum(s) if s.mean_photons() == 0.0 => {
                    return Err(domain("counting mode needs a non-vacuum input state"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Per-realization variances `v[r * K + k]` and the number of clamped transmissions.
    fn variances(&self, ens: &SpeckleEnsemble) -> Result<(Vec<f64>, usize)> {
        let k_count = ens.grid().len();
        let rows: Vec<Result<(Vec<f64>, usize)>> = (0..ens.realizations())
            .into_par_iter()
            .map(|r| {
                let mut clamped = 0;
                let mut rng = stream_rng(self.seed, stream::COUNTING, r as u64);
                let mut out = Vec::with_capacity(k_count);
                for &t in ens.row(r) {
                    let mut tv = t.norm_sqr();
                    if tv > 1.0 {
                        tv = 1.0;
                        clamped += 1;
                    }
                    let trans = ChannelTransmission::new(tv)?;
                    let v = match (self.source, self.mode) {
                        (NoiseSource::Quantum(s), EstimationMode::AnalyticVariance) => {
                            transmitted_variance_quantum(&s, trans)
                        }
                        (
                            NoiseSource::Classical {
                                mean_photons,
                                noise_scale,
                            },
                            _,
                        ) => transmitted_variance_classical(mean_photons, trans, noise_scale)?,
                        (NoiseSource::Quantum(s), EstimationMode::Counting { shots }) => {
                            sample_variance(&CountLaw::new(&s, trans)?, shots, &mut rng)
                        }
                    };
                    out.push(v);
                }
                Ok((out, clamped))
            })
            .collect();
        let mut v = Vec::with_capacity(ens.realizations() * k_count);
        let mut clamped = 0;
        for row in rows {
            let (values, c) = row?;
            v.extend(values);
            clamped += c;
        }
        Ok((v, clamped))
    }

    pub fn estimate(&self, ens: &SpeckleEnsemble) -> Result<NoiseCorrelationEstimate> {
        self.check()?;
        ens.require(MIN_REALIZATIONS)?;
        let k_count = ens.grid().len();
        let r_count = ens.realizations();
        let (v, clamped) = self.variances(ens)?;

        let point = ratio_estimate(&v, k_count, 0..r_count)?;
        let replicates: Vec<Vec<f64>> = (0..self.bootstrap_resamples)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(self.seed, stream::BOOTSTRAP, b as u64);
                let picks = (0..r_count).map(move |_| rng.random_range(0..r_count));
                ratio_estimate(&v, k_count, picks)
            })
            .collect::<Result<_>>()?;
        let nb = replicates.len() as f64;
        let points = ens
            .grid()
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let mean = replicates.iter().map(|c| c[k]).sum::<f64>() / nb;
                let var = replicates.iter().map(|c| (c[k] - mean).powi(2)).sum::<f64>() / (nb - 1.0);
                CurvePoint {
                    x: x - ens.grid()[0],
                    value: point[k],
                    stderr: Some(var.sqrt()),
                }
            })
            .collect();
        let label = match self.mode {
            EstimationMode::AnalyticVariance => format!("{} analytic", self.source.label()),
            EstimationMode::Counting { shots } => format!("{} counting({shots})", self.source.label()),
        };
        Ok(NoiseCorrelationEstimate {
            curve: CorrelationCurve::new(label, points)?,
            mode: self.mode,
            source: self.source,
            shots_per_realization: match self.mode {
                EstimationMode::Counting { shots } => Some(shots),
                EstimationMode::AnalyticVariance => None,
            },
            clamped,
        })
    }
}

fn sample_variance<R: Rng>(law: &CountLaw, shots: usize, rng: &mut R) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..shots {
        let c = law.draw(rng) as f64;
        let d = c - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (c - mean);
    }
    m2 / (shots - 1) as f64
}

/// `n sum(v0 vk) / (sum v0 sum vk) - 1` over the selected realizations, summed in order.
fn ratio_estimate(v: &[f64], k_count: usize, picks: impl Iterator<Item = usize>) -> Result<Vec<f64>> {
    let mut cross = vec![0.0; k_count];
    let mut sums = vec![0.0; k_count];
    let mut n = 0usize;
    for r in picks {
        let row = &v[r * k_count..(r + 1) * k_count];
        let v0 = row[0];
        for k in 0..k_count {
            cross[k] += v0 * row[k];
            sums[k] += row[k];
        }
        n += 1;
    }
    if sums.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Estimation("mean variance vanishes on the grid".into()));
    }
    Ok((0..k_count)
        .map(|k| n as f64 * cross[k] / (sums[0] * sums[k]) - 1.0)
        .collect())
}
