//! Frequency covariance of the complex transmission amplitude and its
//! triangular factorization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::analytics::check_mean_transmission;
use crate::error::{domain, Error, Result};

/// Relative tolerance for round-off level negative eigenvalues.
pub const CLIP_TOLERANCE: f64 = 1e-10;
/// Relative diagonal jitter added after clipping.
pub const JITTER: f64 = 1e-12;

/// Field correlation `h(x) = s / sinh(s)` with `s = (1 - i) sqrt(x) / 2`, the
/// normalized `<t*(w) t(w + dw)>` of a diffusive slab. `|h(x)|^2 = f(x)`.
pub fn field_kernel(x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let a = 0.5 * x.sqrt();
    let s = Complex64::new(a, -a);
    if a > 20.0 {
        // s / sinh s = 2 s e^{-s} / (1 - e^{-2s})
        let e = (-s).exp();
        2.0 * s * e / (1.0 - e * e)
    } else {
        s / s.sinh()
    }
}

/// `h` continued to negative offsets by Hermitian symmetry.
fn signed_kernel(d: f64) -> Complex64 {
    if d >= 0.0 {
        field_kernel(d)
    } else {
        field_kernel(-d).conj()
    }
}

/// Covariance `E[t_j t_k^*]` of the amplitudes on a frequency grid.
#[derive(Debug, Clone)]
pub struct FieldCovariance {
    grid: Vec<f64>,
    mean_t: f64,
    matrix: DMatrix<Complex64>,
}

/// Builds the covariance `C_jk = q h(x_k - x_j)^*`, which gives
/// `E[t_j^* t_k] = q h(x_k - x_j)`. The diagonal is exactly `q`.
pub fn build_field_covariance(grid: &[f64], mean_t: f64) -> Result<FieldCovariance> {
    check_mean_transmission(mean_t)?;
    if grid.is_empty() {
        return Err(domain("frequency grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(domain(format!("grid offset {x} is not finite and non-negative")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("grid offsets must be non-decreasing"));
    }
    let k = grid.len();
    let matrix = DMatrix::from_fn(k, k, |j, l| mean_t * signed_kernel(grid[j] - grid[l]));
    Ok(FieldCovariance {
        grid: grid.to_vec(),
        mean_t,
        matrix,
    })
}

impl FieldCovariance {
    /// Wraps an arbitrary covariance matrix over `grid`, for kernels other than
    /// the diffusive one. Hermiticity is checked at factorization.
    pub fn from_matrix(grid: &[f64], mean_t: f64, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_mean_transmission(mean_t)?;
        if matrix.nrows() != grid.len() || matrix.ncols() != grid.len() {
            return Err(domain(format!(
                "covariance is {}x{}, grid has {} points",
                matrix.nrows(),
                matrix.ncols(),
                grid.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] >= w[0])) || grid.iter().any(|x| !x.is_finite()) {
            return Err(domain("grid offsets must be finite and non-decreasing"));
        }
        Ok(Self {
            grid: grid.to_vec(),
            mean_t,
            matrix,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn mean_t(&self) -> f64 {
        self.mean_t
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        (0..m.nrows()).all(|j| (0..=j).all(|l| (m[(j, l)] - m[(l, j)].conj()).norm() <= tol))
    }
}

/// Lower-triangular factor `L` with `L L^H` equal to the covariance restricted
/// to the distinct grid offsets.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    lower: DMatrix<Complex64>,
    /// Grid index -> row of `lower`. Coincident offsets share a row.
    rows: Vec<usize>,
    clipped: usize,
    regularized: bool,
}

impl CovarianceFactor {
    pub fn lower(&self) -> &DMatrix<Complex64> {
        &self.lower
    }

    pub fn row_of(&self, grid_index: usize) -> usize {
        self.rows[grid_index]
    }

    pub fn grid_len(&self) -> usize {
        self.rows.len()
    }

    pub fn distinct(&self) -> usize {
        self.lower.nrows()
    }

    /// Number of eigenvalues clipped to zero before factorizing.
    pub fn clipped_eigenvalues(&self) -> usize {
        self.clipped
    }

    /// Whether the eigenvalue clipping and jitter path was needed.
    pub fn regularized(&self) -> bool {
        self.regularized
    }
}

/// Complex Cholesky; fails if any pivot is not above `min_pivot`.
fn cholesky(a: &DMatrix<Complex64>, min_pivot: f64) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if !(d > min_pivot) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Factorizes the covariance for sampling.
///
/// A plain Cholesky is tried first. When a pivot falls to the jitter level the
/// matrix is treated as numerically indefinite: eigenvalues in
/// `[-1e-10 q, 0)` are clipped to zero, `1e-12 q` is added to the diagonal and
/// the factorization is repeated. Eigenvalues below `-1e-10 q` mean the kernel
/// is not a valid covariance on this grid.
pub fn factorize(cov: &FieldCovariance) -> Result<CovarianceFactor> {
    let q = cov.mean_t;
    if !cov.is_hermitian(1e-12 * q) {
        return Err(domain("covariance matrix is not Hermitian"));
    }
    let mut distinct: Vec<usize> = Vec::new();
    let mut rows = Vec::with_capacity(cov.grid.len());
    for (k, &x) in cov.grid.iter().enumerate() {
        match distinct.last() {
            Some(&last) if cov.grid[last] == x => {}
            _ => distinct.push(k),
        }
        rows.push(distinct.len() - 1);
    }
    let n = distinct.len();
    let reduced = DMatrix::from_fn(n, n, |i, j| cov.matrix[(distinct[i], distinct[j])]);

    let jitter = JITTER * q;
    if let Some(lower) = cholesky(&reduced, jitter) {
        return Ok(CovarianceFactor {
            lower,
            rows,
            clipped: 0,
            regularized: false,
        });
    }

    let tolerance = CLIP_TOLERANCE * q;
    let eig = SymmetricEigen::new(reduced);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -tolerance {
        return Err(Error::CovarianceModel {
            min_eigenvalue,
            tolerance,
        });
    }
    let clipped = eig.eigenvalues.iter().filter(|&&e| e < 0.0).count();
    let lambda = eig.eigenvalues.map(|e| Complex64::new(e.max(0.0), 0.0));
    let v = &eig.eigenvectors;
    let mut rebuilt = v * DMatrix::from_diagonal(&lambda) * v.adjoint();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)].conj());
            rebuilt[(i, j)] = avg;
            rebuilt[(j, i)] = avg.conj();
        }
        rebuilt[(i, i)] = Complex64::new(rebuilt[(i, i)].re + jitter, 0.0);
    }
    let lower = cholesky(&rebuilt, 0.0).ok_or(Error::CovarianceModel {
        min_eigenvalue,
        tolerance,
    })?;
    Ok(CovarianceFactor {
        lower,
        rows,
        clipped,
        regularized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{frequency_decay, NormalizedOffset};

    #[test]
    fn kernel_modulus_reproduces_decay() {
        let mut x = 1e-8;
        while x < 1e6 {
            let h = field_kernel(x);
            let f = frequency_decay(NormalizedOffset::new(x).unwrap());
            assert!((h.norm_sqr() - f).abs() <= 1e-12, "x = {x}");
            x *= 1.37;
        }
        assert!((field_kernel(16.0).norm_sqr() - 0.572_207_663_697_875_9).abs() < 1e-13);
        assert!((field_kernel(1.0).norm_sqr() - 0.997_229_368_777_822_3).abs() < 1e-13);
        assert_eq!(field_kernel(0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn covariance_structure() {
        let cov = build_field_covariance(&[0.0, 0.5, 4.0, 16.0], 0.01).unwrap();
        assert!(cov.is_hermitian(0.0));
        for k in 0..4 {
            assert_eq!(cov.matrix()[(k, k)], Complex64::new(0.01, 0.0));
        }
        let c = cov.matrix()[(0, 3)].conj();
        assert!((c - 0.01 * field_kernel(16.0)).norm() < 1e-18);
    }

    #[test]
    fn covariance_rejects_bad_grids() {
        assert!(build_field_covariance(&[], 0.1).is_err());
        assert!(build_field_covariance(&[0.0, f64::NAN], 0.1).is_err());
        assert!(build_field_covariance(&[1.0, 0.5], 0.1).is_err());
        assert!(build_field_covariance(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn factor_reproduces_covariance() {
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let cov = build_field_covariance(&grid, 0.01).unwrap();
        let fac = factorize(&cov).unwrap();
        let l = fac.lower();
        let diff = l * l.adjoint() - cov.matrix();
        assert!(diff.iter().all(|d| d.norm() < 1e-12 * 0.01 * 10.0));
    }

    #[test]
    fn clustered_grid_needs_regularization() {
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * 1e-3).collect();
        let cov = build_field_covariance(&grid, 0.5).unwrap();
        let fac = factorize(&cov).unwrap();
        assert!(fac.regularized());
        let l = fac.lower();
        let diff = l * l.adjoint() - cov.matrix();
        assert!(diff.iter().all(|d| d.norm() < 1e-10));
    }

    #[test]
    fn indefinite_matrix_is_a_model_error() {
        let mut m = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        m[(0, 0)] = Complex64::new(0.1, 0.0);
        m[(1, 1)] = Complex64::new(0.1, 0.0);
        m[(0, 1)] = Complex64::new(0.0, 0.2);
        m[(1, 0)] = Complex64::new(0.0, -0.2);
        let cov = FieldCovariance::from_matrix(&[0.0, 1.0], 0.1, m.clone()).unwrap();
        assert!(matches!(factorize(&cov), Err(Error::CovarianceModel { .. })));
        m[(1, 0)] = Complex64::new(0.0, 0.2);
        let cov = FieldCovariance::from_matrix(&[0.0, 1.0], 0.1, m).unwrap();
        assert!(matches!(factorize(&cov), Err(Error::Domain(_))));
    }

    #[test]
    fn coincident_points_share_a_row() {
        let cov = build_field_covariance(&[0.0, 1.0, 1.0, 2.0], 0.1).unwrap();
        let fac = factorize(&cov).unwrap();
        assert_eq!(fac.distinct(), 3);
        assert_eq!(fac.row_of(1), fac.row_of(2));
    }
}
