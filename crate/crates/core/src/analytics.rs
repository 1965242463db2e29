//! Closed-form frequency correlation functions for light transmitted through
//! a diffusive slab.
//!
//! Every function takes the frequency offset already normalized by the
//! diffusion frequency `omega_d = D / (2 L^2)`, see [`NormalizedOffset`].
//! The two kernels are
//!
//! ```text
//! f(x) = x / (cosh(sqrt x) - cos(sqrt x))
//! g(x) = (sinh(sqrt x) - sin(sqrt x)) / (x (cosh(sqrt x) - cos(sqrt x)))
//! ```
//!
//! `f` is the decay of the Gaussian intensity correlation and `g` the shape of
//! the lowest-order non-Gaussian (mesoscopic) correction.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Below this offset both kernels are evaluated from their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Above this value of `sqrt x` the hyperbolic terms are evaluated in
/// exponentially scaled form to avoid overflow.
const LARGE_ROOT: f64 = 20.0;

/// Slab geometry in the diffusive regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionGeometry {
    thickness: f64,
    mean_free_path: f64,
    diffusion: f64,
}

impl DiffusionGeometry {
    /// `thickness` is the slab thickness L, `mean_free_path` the transport mean
    /// free path, `diffusion` the diffusion constant D.
    pub fn new(thickness: f64, mean_free_path: f64, diffusion: f64) -> Result<Self> {
        for (name, v) in [
            ("thickness", thickness),
            ("mean free path", mean_free_path),
            ("diffusion constant", diffusion),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if mean_free_path > thickness {
            return Err(domain(format!(
                "mean free path {mean_free_path} exceeds slab thickness {thickness}; not in the multiple-scattering regime"
            )));
        }
        Ok(Self {
            thickness,
            mean_free_path,
            diffusion,
        })
    }

    /// Geometry fixed only by the ratio L/ell, with ell = D = 1.
    pub fn from_ratio(thickness_over_mfp: f64) -> Result<Self> {
        Self::new(thickness_over_mfp, 1.0, 1.0)
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn mean_free_path(&self) -> f64 {
        self.mean_free_path
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// `D / (2 L^2)`.
    pub fn omega_d(&self) -> f64 {
        self.diffusion / (2.0 * self.thickness * self.thickness)
    }

    pub fn thickness_over_mfp(&self) -> f64 {
        self.thickness / self.mean_free_path
    }

    /// Prefactor `3 L^2 / (2 ell^2)` of the mesoscopic correction.
    pub fn mesoscopic_prefactor(&self) -> f64 {
        let r = self.thickness_over_mfp();
        1.5 * r * r
    }

    /// Normalizes an angular frequency offset by `omega_d`.
    pub fn normalize(&self, delta_omega: f64) -> Result<NormalizedOffset> {
        NormalizedOffset::new(delta_omega / self.omega_d())
    }
}

/// Dimensionless frequency offset `x = delta_omega / omega_d`, finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct NormalizedOffset(f64);

impl NormalizedOffset {
    pub const ZERO: Self = Self(0.0);

    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(domain(format!(
                "normalized offset must be finite and non-negative, got {x}"
            )));
        }
        Ok(Self(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NormalizedOffset {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        Self::new(x)
    }
}

/// `cosh y - cos y` without cancellation: `2 (sinh^2(y/2) + sin^2(y/2))`.
fn cosh_minus_cos(y: f64) -> f64 {
    let h = 0.5 * y;
    let (a, b) = (h.sinh(), h.sin());
    2.0 * (a * a + b * b)
}

/// `sinh y - sin y`; the power series `2 sum y^(4m+3) / (4m+3)!` is summed for y < 1.
fn sinh_minus_sin(y: f64) -> f64 {
    if y >= 1.0 {
        return y.sinh() - y.sin();
    }
    let y4 = y * y * y * y;
    let mut term = y * y * y / 3.0;
    let mut sum = 0.0;
    let mut m = 0.0;
    while term > f64::EPSILON * 1e-2 * sum || sum == 0.0 {
        sum += term;
        term *= y4 / ((4.0 * m + 4.0) * (4.0 * m + 5.0) * (4.0 * m + 6.0) * (4.0 * m + 7.0));
        m += 1.0;
        if term == 0.0 {
            break;
        }
    }
    sum
}

fn decay_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 / (1.0 + x2 / 360.0 + x2 * x2 / 1_814_400.0)
}

fn mesoscopic_series(x: f64) -> f64 {
    let x2 = x * x;
    let num = 1.0 + x2 / 840.0 + x2 * x2 / 6_652_800.0;
    let den = 1.0 + x2 / 360.0 + x2 * x2 / 1_814_400.0;
    num / (den * 3.0 * x.sqrt())
}

fn decay_direct(x: f64) -> f64 {
    let y = x.sqrt();
    if y > LARGE_ROOT {
        let e = (-y).exp();
        2.0 * x * e / (1.0 + e * e - 2.0 * y.cos() * e)
    } else {
        x / cosh_minus_cos(y)
    }
}

fn mesoscopic_direct(x: f64) -> f64 {
    let y = x.sqrt();
    if y > LARGE_ROOT {
        let e = (-y).exp();
        (1.0 - e * e - 2.0 * y.sin() * e) / ((1.0 + e * e - 2.0 * y.cos() * e) * x)
    } else {
        sinh_minus_sin(y) / (cosh_minus_cos(y) * x)
    }
}

/// Frequency decay `f(x)` of the Gaussian intensity correlation. `f(0) = 1`.
pub fn frequency_decay(x: NormalizedOffset) -> f64 {
    let x = x.value();
    if x == 0.0 {
        1.0
    } else if x < SERIES_THRESHOLD {
        decay_series(x)
    } else {
        decay_direct(x)
    }
}

/// Mesoscopic correction kernel `g(x)`. Diverges like `1 / (3 sqrt x)` at small x,
/// so `x = 0` is rejected.
pub fn mesoscopic_decay(x: NormalizedOffset) -> Result<f64> {
    let x = x.value();
    if x == 0.0 {
        return Err(Error::Divergence(x));
    }
    Ok(if x < SERIES_THRESHOLD {
        mesoscopic_series(x)
    } else {
        mesoscopic_direct(x)
    })
}

/// Shot-noise (coherent light) correlation. Identical to `f`.
pub fn shot_noise_correlation(x: NormalizedOffset) -> f64 {
    frequency_decay(x)
}

/// Classical-noise correlation `f^2 + 4 f`.
pub fn classical_noise_correlation(x: NormalizedOffset) -> f64 {
    let f = shot_noise_correlation(x);
    f * f + 4.0 * f
}

pub(crate) fn check_mean_transmission(mean_t: f64) -> Result<()> {
    if !mean_t.is_finite() || mean_t <= 0.0 || mean_t > 1.0 {
        return Err(domain(format!("mean transmission must lie in (0, 1], got {mean_t}")));
    }
    Ok(())
}

fn check_fano(fano: f64) -> Result<()> {
    if !fano.is_finite() || fano < 0.0 {
        return Err(domain(format!("Fano factor must be finite and non-negative, got {fano}")));
    }
    Ok(())
}

/// Noise correlation for an input state with Fano factor `fano`, with the
/// circular-Gaussian moments of `T` inserted into the ratio of ensemble averaged
/// variance products. With `F = fano - 1`, `q = mean_t`:
///
/// ```text
/// [(1+f) + 4Fq(1+2f) + 4F^2 q^2 (1+4f+f^2)] / (1+2Fq)^2 - 1
/// ```
pub fn quantum_noise_correlation(x: NormalizedOffset, fano: f64, mean_t: f64) -> Result<f64> {
    check_fano(fano)?;
    check_mean_transmission(mean_t)?;
    let excess = fano - 1.0;
    let norm = 1.0 + 2.0 * excess * mean_t;
    if norm.abs() < 1e-12 {
        return Err(Error::SingularParameter(format!(
            "1 + 2 (F - 1) q vanishes for F = {fano}, q = {mean_t}"
        )));
    }
    let f = frequency_decay(x);
    let fq = excess * mean_t;
    let num = (1.0 + f) + 4.0 * fq * (1.0 + 2.0 * f) + 4.0 * fq * fq * (1.0 + 4.0 * f + f * f);
    Ok(num / (norm * norm) - 1.0)
}

/// First-order expansion of the noise correlation in the mean transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionTerms {
    /// Leading term, the shot-noise correlation `f`.
    pub leading: f64,
    /// First-order term: mesoscopic `(3L^2/2ell^2) g q` plus the quantum `4 (F-1) f q`.
    pub second_order: f64,
}

impl ExpansionTerms {
    pub fn total(&self) -> f64 {
        self.leading + self.second_order
    }
}

/// Splits the noise correlation into `C_I = f` and
/// `C_II = (3L^2/2ell^2) g q + 4 (F-1) f q`.
pub fn expansion_terms(
    x: NormalizedOffset,
    fano: f64,
    mean_t: f64,
    geometry: &DiffusionGeometry,
) -> Result<ExpansionTerms> {
    check_fano(fano)?;
    check_mean_transmission(mean_t)?;
    let g = mesoscopic_decay(x)?;
    let f = frequency_decay(x);
    let classical = geometry.mesoscopic_prefactor() * g * mean_t;
    let quantum = 4.0 * (fano - 1.0) * f * mean_t;
    Ok(ExpansionTerms {
        leading: f,
        second_order: classical + quantum,
    })
}

/// The purely classical (state independent) part of `C_II`.
pub fn mesoscopic_term(x: NormalizedOffset, mean_t: f64, geometry: &DiffusionGeometry) -> Result<f64> {
    check_mean_transmission(mean_t)?;
    Ok(geometry.mesoscopic_prefactor() * mesoscopic_decay(x)? * mean_t)
}

/// `<T T'>` including the lowest-order non-Gaussian correction:
/// `q^2 (1 + f) + (3L^2/2ell^2) g q^3`.
pub fn mesoscopic_pair_moment(
    x: NormalizedOffset,
    mean_t: f64,
    geometry: &DiffusionGeometry,
) -> Result<f64> {
    check_mean_transmission(mean_t)?;
    let g = mesoscopic_decay(x)?;
    let f = frequency_decay(x);
    let q2 = mean_t * mean_t;
    Ok(q2 * (1.0 + f) + geometry.mesoscopic_prefactor() * g * q2 * mean_t)
}
