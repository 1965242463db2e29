//! Photon-number statistics of single-mode input states and their propagation
//! through a lossy channel with intensity transmission `T`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Fock,
    Coherent,
    Thermal,
    Custom,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Fock => "fock",
            StateKind::Coherent => "coherent",
            StateKind::Thermal => "thermal",
            StateKind::Custom => "custom",
        }
    }
}

/// Input state characterized by its mean photon number and Fano factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumState {
    mean_photons: f64,
    fano: f64,
    kind: StateKind,
}

fn check_mean(mean: f64) -> Result<()> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(domain(format!("mean photon number must be finite and >= 0, got {mean}")));
    }
    Ok(())
}

impl QuantumState {
    /// Number state with exactly `n` photons (Fano factor 0).
    pub fn fock(n: u64) -> Self {
        Self {
            mean_photons: n as f64,
            fano: 0.0,
            kind: StateKind::Fock,
        }
    }

    /// Coherent state, Poissonian (Fano factor 1).
    pub fn coherent(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(Self {
            mean_photons: mean,
            fano: 1.0,
            kind: StateKind::Coherent,
        })
    }

    /// Single-mode thermal state, Bose-Einstein distributed (Fano factor `1 + mean`).
    pub fn thermal(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(Self {
            mean_photons: mean,
            fano: 1.0 + mean,
            kind: StateKind::Thermal,
        })
    }

    pub fn custom(mean: f64, fano: f64) -> Result<Self> {
        check_mean(mean)?;
        if !fano.is_finite() || fano < 0.0 {
            return Err(domain(format!("Fano factor must be finite and >= 0, got {fano}")));
        }
        Ok(Self {
            mean_photons: mean,
            fano,
            kind: StateKind::Custom,
        })
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn fano(&self) -> f64 {
        self.fano
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }
}

/// Intensity transmission coefficient of one channel pair, `0 <= T <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ChannelTransmission(f64);

impl ChannelTransmission {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!("transmission must lie in [0, 1], got {t}")));
        }
        Ok(Self(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Variance of the transmitted photon number, `<n> T + <n> (F - 1) T^2`.
pub fn transmitted_variance_quantum(state: &QuantumState, trans: ChannelTransmission) -> f64 {
    let t = trans.value();
    let n = state.mean_photons;
    n * t + n * (state.fano - 1.0) * t * t
}

/// Variance under dominating classical (technical) noise, `c <n>^2 T^2`.
/// `noise_scale` is the free proportionality constant `c`.
pub fn transmitted_variance_classical(
    mean_photons: f64,
    trans: ChannelTransmission,
    noise_scale: f64,
) -> Result<f64> {
    check_mean(mean_photons)?;
    if !noise_scale.is_finite() || noise_scale <= 0.0 {
        return Err(domain(format!("noise scale must be positive, got {noise_scale}")));
    }
    let nt = mean_photons * trans.value();
    Ok(noise_scale * nt * nt)
}

/// Exact count law of a state after loss.
#[derive(Debug, Clone, Copy)]
pub enum CountLaw {
    Binomial(Binomial),
    Poisson(Poisson<f64>),
    BoseEinstein(Geometric),
    /// Zero mean: every draw is 0.
    Vacuum,
}

impl CountLaw {
    /// Fock -> binomial(n, T); coherent -> Poisson(n T); thermal -> geometric with mean n T.
    pub fn new(state: &QuantumState, trans: ChannelTransmission) -> Result<Self> {
        let t = trans.value();
        let mean = state.mean_photons * t;
        if mean == 0.0 {
            return match state.kind {
                StateKind::Custom => Err(Error::UnsupportedSampling("custom")),
                _ => Ok(CountLaw::Vacuum),
            };
        }
        match state.kind {
            StateKind::Fock => Binomial::new(state.mean_photons as u64, t)
                .map(CountLaw::Binomial)
                .map_err(|e| domain(e.to_string())),
            StateKind::Coherent => Poisson::new(mean)
                .map(CountLaw::Poisson)
                .map_err(|e| domain(e.to_string())),
            StateKind::Thermal => Geometric::new(1.0 / (1.0 + mean))
                .map(CountLaw::BoseEinstein)
                .map_err(|e| domain(e.to_string())),
            StateKind::Custom => Err(Error::UnsupportedSampling("custom")),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            CountLaw::Binomial(d) => d.sample(rng),
            CountLaw::Poisson(d) => d.sample(rng) as u64,
            CountLaw::BoseEinstein(d) => d.sample(rng),
            CountLaw::Vacuum => 0,
        }
    }
}

/// Draws `shots` photon counts of `state` after transmission through `trans`.
pub fn sample_transmitted_counts<R: Rng + ?Sized>(
    state: &QuantumState,
    trans: ChannelTransmission,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(domain("at least one shot is required"));
    }
    let law = CountLaw::new(state, trans)?;
    Ok((0..shots).map(|_| law.draw(rng)).collect())
}

/// Sample mean, variance and Fano factor of a count record, with delta-method
/// standard errors built from the third and fourth central moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountSummary {
    pub shots: usize,
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
    pub mean_stderr: f64,
    pub variance_stderr: f64,
    pub fano_stderr: f64,
}

pub fn summarize_counts(counts: &[u64]) -> Result<CountSummary> {
    let n = counts.len();
    if n < 2 {
        return Err(Error::Estimation(format!("need at least 2 counts, got {n}")));
    }
    let nf = n as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &c in counts {
        let d = c as f64 - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let (mu2, mu3, mu4) = (m2 / nf, m3 / nf, m4 / nf);
    let var_mean = mu2 / nf;
    let var_var = ((mu4 - mu2 * mu2) / nf).max(0.0);
    let cov = mu3 / nf;
    let (fano, fano_stderr) = if mean > 0.0 {
        let fano = variance / mean;
        let var_fano = var_var / (mean * mean) + variance * variance * var_mean / mean.powi(4)
            - 2.0 * variance * cov / mean.powi(3);
        (fano, var_fano.max(0.0).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CountSummary {
        shots: n,
        mean,
        variance,
        fano,
        mean_stderr: var_mean.sqrt(),
        variance_stderr: var_var.sqrt(),
        fano_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn t(v: f64) -> ChannelTransmission {
        ChannelTransmission::new(v).unwrap()
    }

    #[test]
    fn quantum_variance_examples() {
        let coherent = QuantumState::coherent(10.0).unwrap();
        assert!((transmitted_variance_quantum(&coherent, t(0.3)) - 3.0).abs() < 1e-14);
        // binomial n T (1 - T)
        let fock = QuantumState::fock(10);
        assert!((transmitted_variance_quantum(&fock, t(0.3)) - 10.0 * 0.3 * 0.7).abs() < 1e-14);
        // geometric after loss: m + m^2 with m = n T
        let thermal = QuantumState::thermal(10.0).unwrap();
        assert!((transmitted_variance_quantum(&thermal, t(0.3)) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn fock_variance_ratio_is_one_minus_t() {
        for n in [1u64, 3, 10, 1000] {
            for tv in [0.0, 0.1, 0.5, 0.9, 1.0] {
                let v = transmitted_variance_quantum(&QuantumState::fock(n), t(tv));
                if tv > 0.0 {
                    assert!((v / (n as f64 * tv) - (1.0 - tv)).abs() < 1e-15);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn classical_variance_examples() {
        assert!((transmitted_variance_classical(10.0, t(0.3), 1.0).unwrap() - 9.0).abs() < 1e-13);
        assert_eq!(transmitted_variance_classical(10.0, t(0.0), 1.0).unwrap(), 0.0);
        let one = transmitted_variance_classical(7.0, t(0.2), 1.0).unwrap();
        let two = transmitted_variance_classical(7.0, t(0.2), 2.0).unwrap();
        assert_eq!(two, 2.0 * one);
        assert!(transmitted_variance_classical(7.0, t(0.2), 0.0).is_err());
    }

    #[test]
    fn state_constructors() {
        assert_eq!(QuantumState::fock(4).fano(), 0.0);
        assert_eq!(QuantumState::coherent(2.5).unwrap().fano(), 1.0);
        assert_eq!(QuantumState::thermal(1.0).unwrap().fano(), 2.0);
        assert!(QuantumState::coherent(-1.0).is_err());
        assert!(QuantumState::custom(1.0, -0.5).is_err());
        assert!(ChannelTransmission::new(1.0001).is_err());
        assert!(ChannelTransmission::new(f64::NAN).is_err());
    }

    #[test]
    fn custom_states_cannot_be_sampled() {
        let s = QuantumState::custom(3.0, 0.5).unwrap();
        let mut rng = stream_rng(1, 0, 0);
        assert_eq!(
            sample_transmitted_counts(&s, t(0.5), 10, &mut rng),
            Err(Error::UnsupportedSampling("custom"))
        );
    }

    #[test]
    fn samplers_match_loss_moments() {
        let cases = [
            (QuantumState::fock(10), 0.5, 5.0, 2.5),
            (QuantumState::coherent(4.0).unwrap(), 0.25, 1.0, 1.0),
            (QuantumState::thermal(1.0).unwrap(), 1.0, 1.0, 2.0),
        ];
        for (i, (state, tv, mean, var)) in cases.into_iter().enumerate() {
            let mut rng = stream_rng(11, 3, i as u64);
            let counts = sample_transmitted_counts(&state, t(tv), 200_000, &mut rng).unwrap();
            let s = summarize_counts(&counts).unwrap();
            assert!((s.mean - mean).abs() < 5.0 * s.mean_stderr, "{state:?}: {s:?}");
            assert!((s.variance - var).abs() < 5.0 * s.variance_stderr, "{state:?}: {s:?}");
        }
    }

    #[test]
    fn vacuum_counts_are_zero() {
        let mut rng = stream_rng(1, 0, 0);
        let counts = sample_transmitted_counts(&QuantumState::thermal(3.0).unwrap(), t(0.0), 5, &mut rng);
        assert_eq!(counts.unwrap(), vec![0; 5]);
    }
}
