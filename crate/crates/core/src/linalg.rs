//! Complex matrix kernel for covariance handling.
//!
//! Covariance matrices here are Hermitian positive-semidefinite `m x m`
//! complex matrices `B` (units of power). A factor is any complex matrix `C`
//! with `C C* = B`; it turns the standard complex Wiener process into the
//! `B`-process. The canonical factor is the lower-triangular Cholesky one,
//! with a zero-pivot path for semidefinite `B`, but user-supplied factors are
//! accepted as long as they verify.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance (times the largest entry modulus) for the Hermitian
/// symmetry check.
pub const HERMITIAN_REL_TOL: f64 = 1e-12;

/// Relative tolerance (times `Tr B`) for PSD pivots and factor residuals.
pub const FACTOR_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square: {rows} rows but row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("matrix must have at least one row")]
    Empty,
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not Hermitian: max |b_ij - conj(b_ji)| = {max_asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },
    #[error("matrix is not positive semidefinite: pivot {pivot:.3e} at index {index} below -{tolerance:.3e}")]
    NotPsd {
        pivot: f64,
        index: usize,
        tolerance: f64,
    },
    #[error("covariance trace must be positive, got {trace:.3e}")]
    ZeroTrace { trace: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Validated Hermitian positive-semidefinite covariance matrix with
/// positive trace. Entries are stored row-major, exactly as supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Total average power `Tr B` (diagonal entries are real for a
    /// validated matrix).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|j| self.entry(j, j).re).sum()
    }

    /// Average power `b_jj` delivered to channel `j`.
    pub fn channel_power(&self, channel: usize) -> f64 {
        self.entry(channel, channel).re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.channel_power(j)).collect()
    }

    /// Largest asymmetry `max |b_ij - conj(b_ji)|` of the stored entries.
    pub fn hermitian_residual(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let asym = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                max = max.max(asym);
            }
        }
        max
    }
}

/// Complex matrix `C` with `C C* = B` (units of sqrt(power)).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl FactorMatrix {
    /// Builds a factor from a square grid of finite entries. No relation to
    /// any covariance is checked here; see [`verify_factor`].
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let entries = flatten_square(rows)?;
        Ok(Self {
            dim: rows.len(),
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `y += C x`, the scaling step that turns a standard increment into a
    /// `B`-process increment.
    #[inline]
    pub fn mul_vec_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let row = &self.entries[i * self.dim..(i + 1) * self.dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, xi) in row.iter().zip(x) {
                acc += c * xi;
            }
            y[i] += acc;
        }
    }

    /// Matrix product `self * rhs`. Used to build members `C U` of the
    /// factor class of a covariance.
    pub fn multiply(&self, rhs: &FactorMatrix) -> Result<FactorMatrix, LinalgError> {
        if self.dim != rhs.dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let m = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for k in 0..m {
                let a = self.entry(i, k);
                for j in 0..m {
                    entries[i * m + j] += a * rhs.entry(k, j);
                }
            }
        }
        Ok(FactorMatrix { dim: m, entries })
    }

    /// `C C*` as a raw grid; the covariance this factor generates.
    pub fn gram(&self) -> Vec<Complex64> {
        let m = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += self.entry(i, k) * self.entry(j, k).conj();
                }
                out[i * m + j] = acc;
            }
        }
        out
    }
}

/// Entrywise real/imaginary split `C = K1 + i K2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFactorPair {
    dim: usize,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl RealFactorPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reassembles `K1 + i K2`; exact, since the split copies the floats.
    pub fn recombine(&self) -> FactorMatrix {
        let entries = self
            .k1
            .iter()
            .zip(&self.k2)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        FactorMatrix {
            dim: self.dim,
            entries,
        }
    }
}

/// Outcome of checking `C C* = B` entrywise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorCheck {
    pub ok: bool,
    pub max_residual: f64,
    pub tolerance: f64,
}

fn flatten_square(rows: &[Vec<Complex64>]) -> Result<Vec<Complex64>, LinalgError> {
    if rows.is_empty() {
        return Err(LinalgError::Empty);
    }
    let m = rows.len();
    let mut entries = Vec::with_capacity(m * m);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(LinalgError::NotSquare {
                rows: m,
                row: i,
                cols: row.len(),
            });
        }
        entries.extend_from_slice(row);
    }
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(entries)
}

/// Validates a raw grid as a covariance matrix: square, finite, Hermitian
/// within [`HERMITIAN_REL_TOL`], positive trace, and positive semidefinite.
///
/// Non-Hermitian input is rejected, never symmetrized: silent repair would
/// mask configuration errors.
pub fn validate_covariance(raw: &[Vec<Complex64>]) -> Result<CovarianceMatrix, LinalgError> {
    let entries = flatten_square(raw)?;
    let dim = raw.len();

    let max_abs = entries.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let herm_tol = HERMITIAN_REL_TOL * max_abs;
    let mut max_asym = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let asym = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
            max_asym = max_asym.max(asym);
        }
    }
    if max_asym > herm_tol {
        return Err(LinalgError::NotHermitian {
            max_asymmetry: max_asym,
            tolerance: herm_tol,
        });
    }

    let trace: f64 = (0..dim).map(|j| entries[j * dim + j].re).sum();
    if trace <= 0.0 {
        return Err(LinalgError::ZeroTrace { trace });
    }

    let b = CovarianceMatrix { dim, entries };
    // PSD test by factorization probe: a Hermitian matrix is PSD iff the
    // semidefinite Cholesky runs to completion with no pivot below -eps.
    cholesky_factor(&b)?;
    Ok(b)
}

/// Lower-triangular `C` with `C C* = B`, using the canonical complex
/// Cholesky factorization. Semidefinite matrices take the zero-pivot path:
/// a pivot within `FACTOR_REL_TOL * Tr B` of zero zeroes its whole column,
/// which is exact for PSD input up to the same tolerance.
pub fn cholesky_factor(b: &CovarianceMatrix) -> Result<FactorMatrix, LinalgError> {
    let m = b.dim;
    let trace = b.trace();
    let pivot_tol = FACTOR_REL_TOL * trace;
    // For a PSD matrix, a zero diagonal in the Schur complement forces the
    // rest of its column to zero; 2x2 minors bound the residual entries by
    // sqrt(pivot_tol * trace).
    let column_tol = (pivot_tol * trace).sqrt();

    let mut l = vec![Complex64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let mut d = b.entry(j, j).re;
        for k in 0..j {
            d -= l[j * m + k].norm_sqr();
        }
        if d < -pivot_tol {
            return Err(LinalgError::NotPsd {
                pivot: d,
                index: j,
                tolerance: pivot_tol,
            });
        }
        if d <= pivot_tol {
            // Rank-deficient direction: the column must vanish too, or the
            // matrix has a negative 2x2 minor.
            for i in (j + 1)..m {
                let mut s = b.entry(i, j);
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k].conj();
                }
                if s.norm() > column_tol {
                    return Err(LinalgError::NotPsd {
                        pivot: d,
                        index: j,
                        tolerance: pivot_tol,
                    });
                }
            }
            continue;
        }
        let diag = d.sqrt();
        l[j * m + j] = Complex64::new(diag, 0.0);
        for i in (j + 1)..m {
            let mut s = b.entry(i, j);
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k].conj();
            }
            l[i * m + j] = s / diag;
        }
    }
    Ok(FactorMatrix {
        dim: m,
        entries: l,
    })
}

/// Checks `C C* = B` entrywise against `FACTOR_REL_TOL * Tr B`, reporting
/// the largest residual either way.
pub fn verify_factor(c: &FactorMatrix, b: &CovarianceMatrix) -> Result<FactorCheck, LinalgError> {
    if c.dim != b.dim {
        return Err(LinalgError::DimensionMismatch {
            left: c.dim,
            right: b.dim,
        });
    }
    let gram = c.gram();
    let mut max_residual = 0.0f64;
    for (g, want) in gram.iter().zip(&b.entries) {
        max_residual = max_residual.max((g - want).norm());
    }
    let tolerance = FACTOR_REL_TOL * b.trace();
    Ok(FactorCheck {
        ok: max_residual <= tolerance,
        max_residual,
        tolerance,
    })
}

/// Splits `C = K1 + i K2` into its real and imaginary parts, the matrices
/// that drive the two real Wiener components in the real representation of
/// the scaled process.
pub fn real_decomposition(c: &FactorMatrix) -> RealFactorPair {
    RealFactorPair {
        dim: c.dim,
        k1: c.entries.iter().map(|z| z.re).collect(),
        k2: c.entries.iter().map(|z| z.im).collect(),
    }
}
