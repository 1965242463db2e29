//! Monte Carlo ensembles of frequency-correlated circular Gaussian
//! transmission amplitudes.

mod covariance;
mod moments;
mod noise;
mod rayleigh;
mod text;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytics::check_mean_transmission;
use crate::error::{domain, Result};
use crate::rng::{domain as stream, stream_rng};

pub use covariance::{
    build_field_covariance, factorize, field_kernel, CovarianceFactor, FieldCovariance,
    CLIP_TOLERANCE, JITTER,
};
pub use moments::{estimate_moments, MomentRecord, MomentReport};
pub use noise::{
    EstimationMode, NoiseCorrelationEstimate, NoiseEstimator, NoiseSource, DEFAULT_BOOTSTRAP,
};
pub use rayleigh::{rayleigh_check, RayleighReport};
pub use text::{parse_ensemble_csv, write_ensemble_csv};

/// Smallest ensemble accepted by the estimators.
pub const MIN_REALIZATIONS: usize = 100;

/// `R` realizations of the complex amplitude on a grid of `K` offsets, stored
/// row-major (one row per realization).
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleEnsemble {
    amplitudes: Vec<Complex64>,
    grid: Vec<f64>,
    mean_t: f64,
    seed: u64,
    realizations: usize,
}

impl SpeckleEnsemble {
    /// Samples `realizations` amplitude vectors with covariance `cov`.
    ///
    /// Realization `r` draws its normals from the stream `(seed, r)`, so the
    /// result does not depend on how rayon schedules the work.
    pub fn generate(cov: &FieldCovariance, realizations: usize, seed: u64) -> Result<Self> {
        if realizations == 0 {
            return Err(domain("at least one realization is required"));
        }
        let factor = factorize(cov)?;
        let k = cov.grid().len();
        let n = factor.distinct();
        let lower = factor.lower();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); realizations * k];
        amplitudes
            .par_chunks_mut(k)
            .enumerate()
            .for_each_init(
                || (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]),
                |(z, t), (r, row)| {
                    let mut rng = stream_rng(seed, stream::ENSEMBLE, r as u64);
                    for zi in z.iter_mut() {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        *zi = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                    }
                    for i in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..=i {
                            acc += lower[(i, j)] * z[j];
                        }
                        t[i] = acc;
                    }
                    for (g, slot) in row.iter_mut().enumerate() {
                        *slot = t[factor.row_of(g)];
                    }
                },
            );
        Ok(Self {
            amplitudes,
            grid: cov.grid().to_vec(),
            mean_t: cov.mean_t(),
            seed,
            realizations,
        })
    }

    /// Convenience: diffusive-slab covariance on `grid` followed by [`Self::generate`].
    pub fn diffusive(grid: &[f64], mean_t: f64, realizations: usize, seed: u64) -> Result<Self> {
        Self::generate(&build_field_covariance(grid, mean_t)?, realizations, seed)
    }

    /// Assembles an ensemble from existing amplitudes (row-major, `R x K`).
    pub fn from_parts(
        amplitudes: Vec<Complex64>,
        grid: Vec<f64>,
        mean_t: f64,
        seed: u64,
    ) -> Result<Self> {
        check_mean_transmission(mean_t)?;
        if grid.is_empty() {
            return Err(domain("frequency grid is empty"));
        }
        if grid.iter().any(|x| !x.is_finite() || *x < 0.0) || grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(domain("grid offsets must be finite, non-negative and non-decreasing"));
        }
        if amplitudes.is_empty() || amplitudes.len() % grid.len() != 0 {
            return Err(domain(format!(
                "{} amplitudes do not fill whole rows of {} grid points",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(domain("amplitudes must be finite"));
        }
        let realizations = amplitudes.len() / grid.len();
        Ok(Self {
            amplitudes,
            grid,
            mean_t,
            seed,
            realizations,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn mean_t(&self) -> f64 {
        self.mean_t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        let k = self.grid.len();
        &self.amplitudes[r * k..(r + 1) * k]
    }

    pub fn amplitude(&self, r: usize, k: usize) -> Complex64 {
        self.amplitudes[r * self.grid.len() + k]
    }

    /// Intensity transmission `|t|^2` of realization `r` at grid point `k`.
    pub fn transmission(&self, r: usize, k: usize) -> f64 {
        self.amplitude(r, k).norm_sqr()
    }

    /// Keeps the first `realizations` rows.
    pub fn truncated(&self, realizations: usize) -> Self {
        let r = realizations.min(self.realizations);
        Self {
            amplitudes: self.amplitudes[..r * self.grid.len()].to_vec(),
            grid: self.grid.clone(),
            mean_t: self.mean_t,
            seed: self.seed,
            realizations: r,
        }
    }

    pub(crate) fn require(&self, min: usize) -> Result<()> {
        if self.realizations < min {
            return Err(crate::error::Error::Estimation(format!(
                "{} realizations is too few; at least {min} are required",
                self.realizations
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_intensity_is_exponential_second_moment() {
        let ens = SpeckleEnsemble::diffusive(&[0.0], 0.01, 100_000, 5).unwrap();
        let q = ens.mean_t();
        let n = ens.realizations() as f64;
        let t2: Vec<f64> = (0..ens.realizations()).map(|r| (ens.transmission(r, 0) / q).powi(2)).collect();
        let mean = t2.iter().sum::<f64>() / n;
        let sd = (t2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 2.0).abs() < 5.0 * sd / n.sqrt(), "<T^2>/q^2 = {mean}");
    }

    #[test]
    fn coincident_points_draw_identical_amplitudes() {
        let ens = SpeckleEnsemble::diffusive(&[0.0, 2.0, 2.0], 0.1, 50, 9).unwrap();
        for r in 0..50 {
            assert_eq!(ens.amplitude(r, 1), ens.amplitude(r, 2));
        }
    }

    #[test]
    fn distant_points_decorrelate() {
        let ens = SpeckleEnsemble::diffusive(&[0.0, 1e4], 0.01, 100_000, 3).unwrap();
        let n = ens.realizations() as f64;
        let c: Complex64 = (0..ens.realizations())
            .map(|r| ens.amplitude(r, 0).conj() * ens.amplitude(r, 1))
            .sum::<Complex64>()
            / n;
        let ratio = c.norm_sqr() / (ens.mean_t() * ens.mean_t());
        // |mean| of R unit-variance products is ~ 1/sqrt(R)
        assert!(ratio < 1e-3, "{ratio}");
    }

    #[test]
    fn generation_is_reproducible() {
        let a = SpeckleEnsemble::diffusive(&[0.0, 0.5, 3.0], 0.2, 1000, 77).unwrap();
        let b = SpeckleEnsemble::diffusive(&[0.0, 0.5, 3.0], 0.2, 1000, 77).unwrap();
        assert_eq!(a, b);
        let c = SpeckleEnsemble::diffusive(&[0.0, 0.5, 3.0], 0.2, 1000, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn worker_count_does_not_change_amplitudes() {
        let grid = [0.0, 0.1, 1.0, 10.0];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| SpeckleEnsemble::diffusive(&grid, 0.01, 5000, 1).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn from_parts_validates_shape() {
        let z = Complex64::new(0.1, 0.0);
        assert!(SpeckleEnsemble::from_parts(vec![z; 6], vec![0.0, 1.0], 0.1, 0).is_ok());
        assert!(SpeckleEnsemble::from_parts(vec![z; 5], vec![0.0, 1.0], 0.1, 0).is_err());
        assert!(SpeckleEnsemble::from_parts(vec![z; 4], vec![1.0, 0.0], 0.1, 0).is_err());
        assert!(SpeckleEnsemble::from_parts(vec![], vec![0.0], 0.1, 0).is_err());
    }
}
