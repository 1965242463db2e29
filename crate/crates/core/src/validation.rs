//! End-to-end validation campaign: Monte Carlo estimates against every closed
//! form, with a z-score and pass/fail for each comparison.

use serde::Serialize;

use crate::analytics::{
    classical_noise_correlation, quantum_noise_correlation, shot_noise_correlation, NormalizedOffset,
};
use crate::ensemble::{
    build_field_covariance, estimate_moments, factorize, rayleigh_check, EstimationMode,
    MomentReport, NoiseEstimator, NoiseSource, RayleighReport, SpeckleEnsemble, DEFAULT_BOOTSTRAP,
};
use crate::error::{domain, Error, Result};
use crate::photon::{sample_transmitted_counts, summarize_counts, ChannelTransmission, QuantumState};
use crate::rng::{domain as stream, stream_rng};

/// |z| bound for moment, sampler and Rayleigh-mean checks.
pub const MOMENT_Z: f64 = 5.0;
/// |z| bound for pointwise correlation-curve checks and the negative control.
pub const CURVE_Z: f64 = 3.0;
pub const RAYLEIGH_SIGNIFICANCE: f64 = 0.01;
/// Photon number used for counting-mode input states.
pub const COUNTING_PHOTONS: f64 = 1000.0;
pub const SAMPLER_TRANSMISSIONS: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationConfig {
    /// Offsets; the first one is the reference frequency.
    pub grid: Vec<f64>,
    pub mean_t: f64,
    pub realizations: usize,
    pub seed: u64,
    pub shots: usize,
    /// Realizations used by the (expensive) counting-mode comparison.
    pub counting_realizations: usize,
    pub sampler_shots: usize,
    pub bootstrap_resamples: usize,
}

impl ValidationConfig {
    pub fn new(grid: Vec<f64>, seed: u64) -> Self {
        Self {
            grid,
            mean_t: 0.01,
            realizations: 100_000,
            seed,
            shots: 1000,
            counting_realizations: 2000,
            sampler_shots: 1_000_000,
            bootstrap_resamples: DEFAULT_BOOTSTRAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: f64,
    pub z: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(
        suite: &'static str,
        name: impl Into<String>,
        offset: Option<f64>,
        estimate: f64,
        stderr: f64,
        expected: f64,
        threshold: f64,
    ) -> Self {
        let z = (estimate - expected) / stderr;
        Self {
            suite,
            name: name.into(),
            offset,
            estimate,
            stderr,
            expected,
            z,
            threshold,
            passed: z.abs() <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub passed: bool,
    pub failed_checks: usize,
    pub covariance_regularized: bool,
    pub clipped_eigenvalues: usize,
    pub clamped_transmissions: usize,
    pub rayleigh: RayleighReport,
    pub moments: MomentReport,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn suite(&self, suite: &str) -> impl Iterator<Item = &Check> + '_ {
        let suite = suite.to_string();
        self.checks.iter().filter(move |c| c.suite == suite)
    }
}

fn curve_checks(
    checks: &mut Vec<Check>,
    suite: &'static str,
    estimate: &crate::ensemble::NoiseCorrelationEstimate,
    theory: impl Fn(NormalizedOffset) -> Result<f64>,
) -> Result<()> {
    for p in estimate.curve.points() {
        let expected = theory(NormalizedOffset::new(p.x)?)?;
        checks.push(Check::new(
            suite,
            estimate.curve.label(),
            Some(p.x),
            p.value,
            p.stderr.unwrap_or(f64::NAN),
            expected,
            CURVE_Z,
        ));
    }
    Ok(())
}

/// Runs every Monte Carlo suite. Parallel sections run on the current rayon
/// pool; the report is identical for any pool size.
pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport> {
    if config.realizations < crate::ensemble::MIN_REALIZATIONS.max(1000) {
        return Err(Error::Estimation(format!(
            "{} realizations is too few; validation needs at least 1000",
            config.realizations
        )));
    }
    if config.grid.first() != Some(&0.0) {
        return Err(domain("validation grid must start at the reference offset 0"));
    }
    if config.shots < 2 || config.sampler_shots < 2 {
        return Err(domain("shot counts must be at least 2"));
    }
    let cov = build_field_covariance(&config.grid, config.mean_t)?;
    let factor = factorize(&cov)?;
    let ens = SpeckleEnsemble::generate(&cov, config.realizations, config.seed)?;
    let q = config.mean_t;
    let mut checks = Vec::new();

    let moments = estimate_moments(&ens)?;
    for r in &moments.records {
        checks.push(Check::new("moments", r.name.clone(), r.offset, r.empirical, r.stderr, r.theory, MOMENT_Z));
    }

    let rayleigh = rayleigh_check(&ens, RAYLEIGH_SIGNIFICANCE)?;
    checks.push(Check::new(
        "rayleigh",
        "fitted mean T",
        None,
        rayleigh.fitted_mean,
        rayleigh.fitted_mean_stderr,
        q,
        MOMENT_Z,
    ));

    // Gaussian ensembles carry no mesoscopic correction to <T T'>.
    for r in moments.records.iter().filter(|r| r.name == "TT'/q^2") {
        checks.push(Check::new(
            "negative_control",
            "TT'/q^2 - gaussian",
            r.offset,
            r.empirical - r.theory,
            r.stderr,
            0.0,
            CURVE_Z,
        ));
    }

    let seed = config.seed;
    let analytic = |source| {
        NoiseEstimator::new(source, EstimationMode::AnalyticVariance, seed)
            .with_bootstrap(config.bootstrap_resamples)
            .estimate(&ens)
    };
    let mut clamped = 0;

    let coherent = QuantumState::coherent(COUNTING_PHOTONS)?;
    let sn = analytic(NoiseSource::Quantum(coherent))?;
    curve_checks(&mut checks, "shot_noise", &sn, |x| Ok(shot_noise_correlation(x)))?;
    clamped += sn.clamped;

    let cn = analytic(NoiseSource::classical())?;
    curve_checks(&mut checks, "classical_noise", &cn, |x| Ok(classical_noise_correlation(x)))?;

    for state in [QuantumState::thermal(1.0)?, QuantumState::fock(COUNTING_PHOTONS as u64)] {
        let est = analytic(NoiseSource::Quantum(state))?;
        curve_checks(&mut checks, "quantum_noise", &est, |x| {
            quantum_noise_correlation(x, state.fano(), q)
        })?;
    }

    // Counting mode against the analytic variance on the same realizations.
    let sub = ens.truncated(config.counting_realizations.max(crate::ensemble::MIN_REALIZATIONS));
    let source = NoiseSource::Quantum(coherent);
    let counted = NoiseEstimator::new(source, EstimationMode::Counting { shots: config.shots }, seed)
        .with_bootstrap(config.bootstrap_resamples)
        .estimate(&sub)?;
    let reference = NoiseEstimator::new(source, EstimationMode::AnalyticVariance, seed)
        .with_bootstrap(config.bootstrap_resamples)
        .estimate(&sub)?;
    for (c, a) in counted.curve.points().iter().zip(reference.curve.points()) {
        let (sc, sa) = (c.stderr.unwrap_or(f64::NAN), a.stderr.unwrap_or(f64::NAN));
        checks.push(Check::new(
            "counting",
            counted.curve.label(),
            Some(c.x),
            c.value,
            (sc * sc + sa * sa).sqrt(),
            a.value,
            CURVE_Z,
        ));
    }

    // Photon-count samplers against the loss-transformed Fano factor 1 + (F - 1) T.
    let states = [
        QuantumState::fock(10),
        QuantumState::coherent(10.0)?,
        QuantumState::thermal(1.0)?,
    ];
    let mut case = 0u64;
    for state in states {
        for t in SAMPLER_TRANSMISSIONS {
            let mut rng = stream_rng(seed, stream::SAMPLER, case);
            case += 1;
            let counts = sample_transmitted_counts(&state, ChannelTransmission::new(t)?, config.sampler_shots, &mut rng)?;
            let s = summarize_counts(&counts)?;
            checks.push(Check::new(
                "photon_statistics",
                format!("{} n={} T={t} fano", state.kind().name(), state.mean_photons()),
                None,
                s.fano,
                s.fano_stderr,
                1.0 + (state.fano() - 1.0) * t,
                MOMENT_Z,
            ));
        }
    }

    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(ValidationReport {
        config: config.clone(),
        passed: failed == 0 && rayleigh.passed,
        failed_checks: failed,
        covariance_regularized: factor.regularized(),
        clipped_eigenvalues: factor.clipped_eigenvalues(),
        clamped_transmissions: clamped,
        rayleigh,
        moments,
        checks,
    })
}
