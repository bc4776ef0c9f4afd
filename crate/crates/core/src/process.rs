//! Discretized trajectories of the standard complex Wiener process and its
//! factor-scaled covariance process.
//!
//! One step of size `dt` adds, per component, `(g1 + i g2) * sqrt(dt/2)`
//! with independent standard real Gaussians `g1`, `g2`, so each component of
//! the standard increment has `E|xi|^2 = dt` and distinct components are
//! independent. Gaussian increments are exact for a driftless
//! constant-coefficient process: there is no step-size truncation error in
//! the field itself, only threshold detection carries discretization bias.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::FactorMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ProcessError {
    #[error("step size must be positive and finite, got {dt}")]
    NonPositiveStep { dt: f64 },
    #[error("process dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: state has {state} components, factor is {factor}x{factor}")]
    DimensionMismatch { state: usize, factor: usize },
    #[error("duration must be positive and finite, got {time}")]
    NonPositiveTime { time: f64 },
    #[error("at least one sample is required")]
    NoSamples,
}

/// Deterministic random stream: identical `(seed, stream_id)` produces an
/// identical sequence on every platform. Independent trajectories get
/// independent stream ids off one seed, which is what makes parallel runs
/// reproducible regardless of worker count.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One component of the standard complex increment over `dt`.
    #[inline]
    pub fn standard_complex(&mut self, dt: f64) -> Complex64 {
        let scale = (dt * 0.5).sqrt();
        Complex64::new(
            self.standard_normal() * scale,
            self.standard_normal() * scale,
        )
    }
}

/// Step size and dimension of a discretized run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub dim: usize,
}

impl StepParams {
    pub fn new(dt: f64, dim: usize) -> Result<Self, ProcessError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ProcessError::NonPositiveStep { dt });
        }
        if dim == 0 {
            return Err(ProcessError::ZeroDimension);
        }
        Ok(Self { dt, dim })
    }
}

/// Current value of the in-detector field, `phi(step_index * dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub phi: Vec<Complex64>,
    pub step_index: u64,
}

impl FieldState {
    pub fn zero(dim: usize) -> Self {
        Self {
            phi: vec![Complex64::new(0.0, 0.0); dim],
            step_index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    /// Energy `|phi_j|^2` currently delivered to channel `j`.
    #[inline]
    pub fn energy(&self, channel: usize) -> f64 {
        self.phi[channel].norm_sqr()
    }

    pub fn total_energy(&self) -> f64 {
        self.phi.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Draws one increment of the standard complex Wiener process over `dt`:
/// independent components with `E|xi_j|^2 = dt`.
pub fn standard_complex_increment(
    rng: &mut RngStream,
    dim: usize,
    dt: f64,
) -> Result<Vec<Complex64>, ProcessError> {
    let params = StepParams::new(dt, dim)?;
    Ok((0..params.dim).map(|_| rng.standard_complex(dt)).collect())
}

/// Advances the field one step: `phi += C xi` with a fresh standard
/// increment `xi`, then bumps the step index.
///
/// The increment components are consumed in index order, so this is
/// draw-for-draw identical to scaling [`standard_complex_increment`] by the
/// factor, without allocating.
#[inline]
pub fn advance(
    state: &mut FieldState,
    factor: &FactorMatrix,
    rng: &mut RngStream,
    dt: f64,
) -> Result<(), ProcessError> {
    let m = state.phi.len();
    if m != factor.dim() {
        return Err(ProcessError::DimensionMismatch {
            state: m,
            factor: factor.dim(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ProcessError::NonPositiveStep { dt });
    }
    let entries = factor.entries();
    for j in 0..m {
        let xi = rng.standard_complex(dt);
        for i in 0..m {
            state.phi[i] += entries[i * m + j] * xi;
        }
    }
    state.step_index += 1;
    Ok(())
}

/// Monte Carlo estimate of the field covariance at a fixed time.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub dim: usize,
    /// Row-major estimate of `E[phi_i conj(phi_j)]` at the requested time.
    pub entries: Vec<Complex64>,
    /// `||estimate - time * C C*||_F / ||time * C C*||_F`.
    pub frobenius_rel_error: f64,
}

const COVARIANCE_BLOCK: usize = 8192;

/// Estimates `E[phi_i(s) conj(phi_j(s))]` over independent trajectories and
/// reports the Frobenius-relative deviation from `s * C C*`.
///
/// Trajectory `k` runs on stream `k`, and block partial sums are reduced in
/// a fixed order, so the estimate is reproducible for any thread count.
pub fn empirical_covariance(
    factor: &FactorMatrix,
    n_samples: usize,
    time: f64,
    steps_per_sample: usize,
    seed: u64,
) -> Result<CovarianceEstimate, ProcessError> {
    if n_samples == 0 {
        return Err(ProcessError::NoSamples);
    }
    if !(time > 0.0) || !time.is_finite() {
        return Err(ProcessError::NonPositiveTime { time });
    }
    let steps = steps_per_sample.max(1);
    let dt = time / steps as f64;
    let m = factor.dim();

    let n_blocks = n_samples.div_ceil(COVARIANCE_BLOCK);
    let partials: Vec<Vec<Complex64>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * COVARIANCE_BLOCK;
            let end = (start + COVARIANCE_BLOCK).min(n_samples);
            let mut acc = vec![Complex64::new(0.0, 0.0); m * m];
            let mut state = FieldState::zero(m);
            for k in start..end {
                let mut rng = RngStream::new(seed, k as u64);
                state.phi.fill(Complex64::new(0.0, 0.0));
                state.step_index = 0;
                for _ in 0..steps {
                    advance(&mut state, factor, &mut rng, dt).expect("validated step");
                }
                for i in 0..m {
                    for j in 0..m {
                        acc[i * m + j] += state.phi[i] * state.phi[j].conj();
                    }
                }
            }
            acc
        })
        .collect();

    let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
    for partial in &partials {
        for (e, p) in entries.iter_mut().zip(partial) {
            *e += p;
        }
    }
    let inv_n = 1.0 / n_samples as f64;
    for e in &mut entries {
        *e *= inv_n;
    }

    let reference = factor.gram();
    let mut diff_sq = 0.0f64;
    let mut ref_sq = 0.0f64;
    for (e, r) in entries.iter().zip(&reference) {
        let scaled = r * time;
        diff_sq += (e - scaled).norm_sqr();
        ref_sq += scaled.norm_sqr();
    }
    Ok(CovarianceEstimate {
        dim: m,
        entries,
        frobenius_rel_error: (diff_sq / ref_sq).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_matrices::{c, cov2, factor2};
    use crate::linalg::{cholesky_factor, validate_covariance};

    fn identity_factor(dim: usize) -> FactorMatrix {
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                    .collect()
            })
            .collect();
        FactorMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        let mut other = RngStream::new(42, 8);
        let xs: Vec<f64> = (0..64).map(|_| a.standard_normal()).collect();
        let ys: Vec<f64> = (0..64).map(|_| b.standard_normal()).collect();
        let zs: Vec<f64> = (0..64).map(|_| other.standard_normal()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn increment_rejects_bad_step() {
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(
            standard_complex_increment(&mut rng, 2, 0.0),
            Err(ProcessError::NonPositiveStep { .. })
        ));
        assert!(matches!(
            standard_complex_increment(&mut rng, 2, -1.0),
            Err(ProcessError::NonPositiveStep { .. })
        ));
        assert!(matches!(
            standard_complex_increment(&mut rng, 0, 0.1),
            Err(ProcessError::ZeroDimension)
        ));
    }

    #[test]
    fn increment_moments_match_unit_power() {
        // E|xi|^2 = dt = 1, split evenly between the real and imaginary
        // parts. Sample errors scale as 1/sqrt(n); 0.005 is 5 sigma.
        let n = 1_000_000usize;
        let mut rng = RngStream::new(2024, 0);
        let mut sum_sq = 0.0;
        let mut sum_re_sq = 0.0;
        let mut sum_im_sq = 0.0;
        for _ in 0..n {
            let xi = rng.standard_complex(1.0);
            sum_sq += xi.norm_sqr();
            sum_re_sq += xi.re * xi.re;
            sum_im_sq += xi.im * xi.im;
        }
        let inv = 1.0 / n as f64;
        assert!((sum_sq * inv - 1.0).abs() < 0.005, "got {}", sum_sq * inv);
        assert!((sum_re_sq * inv - 0.5).abs() < 0.005);
        assert!((sum_im_sq * inv - 0.5).abs() < 0.005);
    }

    #[test]
    fn increment_components_are_uncorrelated() {
        let n = 1_000_000usize;
        let mut rng = RngStream::new(7, 0);
        let mut cross = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let xi = standard_complex_increment(&mut rng, 2, 1.0).unwrap();
            cross += xi[0] * xi[1].conj();
        }
        cross /= n as f64;
        // E xi_0 conj(xi_1) = 0; one-sigma of the estimate is ~1/sqrt(n).
        assert!(cross.norm() < 0.005, "cross moment {}", cross);
    }

    #[test]
    fn advance_with_zero_factor_leaves_field_unchanged() {
        let zero = FactorMatrix::from_rows(&vec![
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let mut state = FieldState::zero(2);
        state.phi[0] = c(1.0, -2.0);
        let before = state.phi.clone();
        let mut rng = RngStream::new(3, 0);
        advance(&mut state, &zero, &mut rng, 0.1).unwrap();
        assert_eq!(state.phi, before);
        assert_eq!(state.step_index, 1);
    }

    #[test]
    fn advance_matches_explicit_increment_scaling() {
        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        let mut state = FieldState::zero(2);
        let mut rng = RngStream::new(11, 4);
        let mut rng_clone = rng.clone();
        advance(&mut state, &f, &mut rng, 1e-3).unwrap();

        let xi = standard_complex_increment(&mut rng_clone, 2, 1e-3).unwrap();
        let mut expect = vec![c(0.0, 0.0); 2];
        f.mul_vec_add(&xi, &mut expect);
        assert_eq!(state.phi, expect);
    }

    #[test]
    fn advance_rejects_dimension_mismatch() {
        let f = identity_factor(3);
        let mut state = FieldState::zero(2);
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            advance(&mut state, &f, &mut rng, 0.1),
            Err(ProcessError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_factor_energy_grows_linearly() {
        // E ||phi||^2 after n steps of dt is n*dt*m; 10^5 trajectories put
        // the relative one-sigma at ~0.2%.
        let f = identity_factor(2);
        let n_traj = 100_000usize;
        let steps = 10usize;
        let dt = 0.05;
        let mut total = 0.0;
        for k in 0..n_traj {
            let mut rng = RngStream::new(99, k as u64);
            let mut state = FieldState::zero(2);
            for _ in 0..steps {
                advance(&mut state, &f, &mut rng, dt).unwrap();
            }
            total += state.total_energy();
        }
        let mean = total / n_traj as f64;
        let expect = steps as f64 * dt * 2.0;
        assert!(
            (mean / expect - 1.0).abs() < 0.01,
            "mean {mean} vs expected {expect}"
        );
    }

    #[test]
    fn empirical_covariance_identity_and_reference() {
        let id = identity_factor(2);
        let est = empirical_covariance(&id, 1_000_000, 1.0, 4, 5).unwrap();
        assert!(est.frobenius_rel_error < 0.02, "{}", est.frobenius_rel_error);

        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        let est = empirical_covariance(&f, 1_000_000, 1.0, 4, 6).unwrap();
        assert!(est.frobenius_rel_error < 0.02, "{}", est.frobenius_rel_error);
    }

    #[test]
    fn empirical_covariance_rejects_empty_sampling() {
        let id = identity_factor(1);
        assert!(matches!(
            empirical_covariance(&id, 0, 1.0, 1, 0),
            Err(ProcessError::NoSamples)
        ));
    }

    #[test]
    fn covariance_scales_linearly_in_time() {
        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        let est_1 = empirical_covariance(&f, 200_000, 1.0, 2, 17).unwrap();
        let est_2 = empirical_covariance(&f, 200_000, 2.0, 2, 18).unwrap();
        let tr_1: f64 = (0..2).map(|j| est_1.entries[j * 2 + j].re).sum();
        let tr_2: f64 = (0..2).map(|j| est_2.entries[j * 2 + j].re).sum();
        assert!(
            (tr_2 / tr_1 - 2.0).abs() < 0.04,
            "trace ratio {}",
            tr_2 / tr_1
        );
        // Power additivity: empirical trace tracks s * Tr B.
        assert!((tr_1 / b.trace() - 1.0).abs() < 0.02);
        assert!((tr_2 / (2.0 * b.trace()) - 1.0).abs() < 0.02);
    }

    #[test]
    fn field_mean_is_zero_within_clt_bounds() {
        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        let n = 100_000usize;
        let s = 1.0;
        let mut mean = vec![c(0.0, 0.0); 2];
        for k in 0..n {
            let mut rng = RngStream::new(31, k as u64);
            let mut state = FieldState::zero(2);
            advance(&mut state, &f, &mut rng, s).unwrap();
            for (m, p) in mean.iter_mut().zip(&state.phi) {
                *m += p;
            }
        }
        for (j, m) in mean.iter_mut().enumerate() {
            *m /= n as f64;
            let sigma = (b.channel_power(j) * s / n as f64).sqrt();
            assert!(m.norm() <= 5.0 * sigma, "channel {j} mean {m}");
        }
    }

    #[test]
    fn same_stream_reproduces_trajectory_exactly() {
        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        let run = |seed, stream| {
            let mut rng = RngStream::new(seed, stream);
            let mut state = FieldState::zero(2);
            for _ in 0..1000 {
                advance(&mut state, &f, &mut rng, 1e-3).unwrap();
            }
            state
        };
        assert_eq!(run(5, 9), run(5, 9));
        assert_ne!(run(5, 9), run(5, 10));
    }

    #[test]
    fn factor_class_members_share_the_covariance() {
        // C' = C U for unitary U: both estimates must sit near s*B, hence
        // near each other, within CLT bounds.
        let b = validate_covariance(&cov2()).unwrap();
        let f = cholesky_factor(&b).unwrap();
        // A fixed unitary: [[0, 1], [-i, 0]] times a phase.
        let u = FactorMatrix::from_rows(&vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let fu = f.multiply(&u).unwrap();
        let est_c = empirical_covariance(&f, 200_000, 1.0, 2, 77).unwrap();
        let est_cu = empirical_covariance(&fu, 200_000, 1.0, 2, 78).unwrap();
        assert!(est_c.frobenius_rel_error < 0.03);
        assert!(est_cu.frobenius_rel_error < 0.03);
    }

    #[test]
    fn step_params_validation() {
        assert!(StepParams::new(1e-3, 2).is_ok());
        assert!(matches!(
            StepParams::new(0.0, 2),
            Err(ProcessError::NonPositiveStep { .. })
        ));
        assert!(matches!(
            StepParams::new(f64::NAN, 2),
            Err(ProcessError::NonPositiveStep { .. })
        ));
        assert!(matches!(
            StepParams::new(1.0, 0),
            Err(ProcessError::ZeroDimension)
        ));
    }
}
