//! Empirical intensity moments checked against the complex Gaussian moment
//! theorem.

use num_complex::Complex64;
use serde::Serialize;

use super::{SpeckleEnsemble, MIN_REALIZATIONS};
use crate::analytics::{frequency_decay, NormalizedOffset};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRecord {
    pub name: String,
    /// Offset of the partner frequency from the reference point, for pair moments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    pub empirical: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z: f64,
}

impl MomentRecord {
    fn new(name: &str, offset: Option<f64>, empirical: f64, stderr: f64, theory: f64) -> Self {
        Self {
            name: name.to_string(),
            offset,
            empirical,
            stderr,
            theory,
            z: (empirical - theory) / stderr,
        }
    }
}

/// All moments are normalized by the matching power of the target mean
/// transmission, so theory values are pure numbers (`<T^3>/q^3 = 6`, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub realizations: usize,
    pub records: Vec<MomentRecord>,
}

impl MomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.records.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str, offset: Option<f64>) -> Option<&MomentRecord> {
        self.records.iter().find(|r| r.name == name && r.offset == offset)
    }
}

/// Running mean and variance of a stream, summed in input order.
#[derive(Default, Clone, Copy)]
struct Accumulator {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        ((self.sum_sq - self.n * m * m) / (self.n - 1.0)).max(0.0)
    }

    /// Standard error of the mean; the delete-one jackknife gives the same value.
    fn stderr(&self) -> f64 {
        (self.variance() / self.n).sqrt()
    }
}

/// Computes `<T^n>` at the reference offset and, for every other grid point,
/// `<T T'>`, `<T^2 T'>`, `<T^2 T'^2>` and `|<t* t'>|^2`, each against the
/// Gaussian prediction.
pub fn estimate_moments(ens: &SpeckleEnsemble) -> Result<MomentReport> {
    ens.require(MIN_REALIZATIONS)?;
    let q = ens.mean_t();
    let r_count = ens.realizations();
    let k_count = ens.grid().len();

    let mut single = [Accumulator::default(); 4];
    let mut pair = vec![[Accumulator::default(); 3]; k_count];
    let mut field = vec![(Accumulator::default(), Accumulator::default(), 0.0f64); k_count];
    for r in 0..r_count {
        let row = ens.row(r);
        let t0 = row[0].norm_sqr() / q;
        let mut p = t0;
        for acc in single.iter_mut() {
            acc.push(p);
            p *= t0;
        }
        for k in 1..k_count {
            let tk = row[k].norm_sqr() / q;
            pair[k][0].push(t0 * tk);
            pair[k][1].push(t0 * t0 * tk);
            pair[k][2].push(t0 * t0 * tk * tk);
            let c: Complex64 = row[0].conj() * row[k] / q;
            field[k].0.push(c.re);
            field[k].1.push(c.im);
            field[k].2 += c.re * c.im;
        }
    }

    let mut records = Vec::new();
    let factorial = [1.0, 2.0, 6.0, 24.0];
    let names = ["T/q", "T^2/q^2", "T^3/q^3", "T^4/q^4"];
    for (i, acc) in single.iter().enumerate() {
        records.push(MomentRecord::new(names[i], None, acc.mean(), acc.stderr(), factorial[i]));
    }
    let x0 = ens.grid()[0];
    for k in 1..k_count {
        let offset = ens.grid()[k] - x0;
        let f = frequency_decay(NormalizedOffset::new(offset)?);
        let [tt, t2t, t2t2] = &pair[k];
        let at = Some(offset);
        records.push(MomentRecord::new("TT'/q^2", at, tt.mean(), tt.stderr(), 1.0 + f));
        records.push(MomentRecord::new("T^2T'/q^3", at, t2t.mean(), t2t.stderr(), 2.0 * (1.0 + 2.0 * f)));
        records.push(MomentRecord::new(
            "T^2T'^2/q^4",
            at,
            t2t2.mean(),
            t2t2.stderr(),
            4.0 * (1.0 + 4.0 * f + f * f),
        ));
        // |m|^2 with m the mean of t0* tk / q; delta-method error from the
        // sample covariance of (Re, Im).
        let (re, im, cross) = &field[k];
        let (mr, mi) = (re.mean(), im.mean());
        let n = re.n;
        let cov = (cross - n * mr * mi) / (n - 1.0);
        let var = 4.0 * (mr * mr * re.variance() + mi * mi * im.variance() + 2.0 * mr * mi * cov) / n;
        records.push(MomentRecord::new("|t*t'|^2/q^2", at, mr * mr + mi * mi, var.max(0.0).sqrt(), f));
    }
    Ok(MomentReport {
        realizations: r_count,
        records,
    })
}
