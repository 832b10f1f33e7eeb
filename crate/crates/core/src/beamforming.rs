//! Single-stream transmit/receive beamforming and satellite interference
//! nulling.
//!
//! The terrestrial link picks the dominant singular pair of `H`. Nulling keeps
//! the receive vector `w_r` and chooses the transmit vector maximizing
//!
//! ```text
//! |w_rᴴ H w|² − λ |wᴴ h_sat|²        over unit w,
//! ```
//!
//! whose solution is the top eigenvector of `a aᴴ − λ h_sat h_satᴴ` with
//! `a = Hᴴ w_r`. The robust variant replaces `h_sat h_satᴴ` by the sample
//! covariance of LOS satellite channels drawn around the estimated satellite
//! direction.
//!
//! Both penalty matrices are low rank, and every eigenvector with non-zero
//! eigenvalue lies in the span of `a` and the penalty vectors. The solvers
//! therefore project onto an orthonormal basis of that span and run the dense
//! Hermitian eigen-solver there. This is exact, cheap, and keeps full relative
//! accuracy for very large `λ`, where the operator is strongly indefinite and
//! its top eigenvalue is tiny compared to its norm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::ArraySpec;
use crate::channel::{los_satellite_channel, perturb_direction, AngularErrorModel};
use crate::error::{Result, SimError};
use crate::geometry::{Direction, EarthSatGeometry};
use crate::linalg::{jacobi_eigen, orthonormal_basis, ComplexMatrix, ComplexVector, LowRankHermitian, C64};

/// Relative residual required of an eigenpair.
pub const EIG_TOL: f64 = 1e-12;
/// Cap on eigen-solver sweeps.
pub const EIG_MAX_ITER: usize = 10_000;
/// Relative asymmetry above which an input is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default number of perturbed directions in the robust covariance.
pub const DEFAULT_ROBUST_SAMPLES: usize = 64;

/// Basis truncation for the plain nulling span (two vectors).
const NULLING_BASIS_TOL: f64 = 1e-14;
/// Basis truncation for the robust covariance span; dropped directions carry
/// less than 1e-10 of a sample's amplitude.
const ROBUST_BASIS_TOL: f64 = 1e-10;
/// Denominator floor below which the gain loss is undefined.
const RHO_DENOMINATOR_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Unit norm, canonical phase.
    pub vector: ComplexVector,
    pub value: f64,
    /// `‖M v − μ v‖ / ‖M‖_F`
    pub residual: f64,
}

/// Eigenpair of the algebraically largest eigenvalue of a Hermitian matrix.
///
/// Inputs within [`HERMITIAN_TOL`] of Hermitian are symmetrized; the matrix
/// may be indefinite. For a repeated top eigenvalue any unit vector of the
/// eigenspace may be returned (the choice is deterministic).
pub fn dominant_eigpair(m: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<EigenPair> {
    if !m.is_square() || m.rows() == 0 {
        return Err(SimError::Dimension(format!(
            "dominant eigenpair of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let asym = m.hermitian_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(SimError::NotHermitian { asymmetry: asym });
    }
    let herm = m.hermitian_part();
    let eig = jacobi_eigen(&herm, max_iter)?;

    // ties resolved towards the lowest index
    let mut best = 0;
    for (i, v) in eig.values.iter().enumerate() {
        if *v > eig.values[best] {
            best = i;
        }
    }
    let value = eig.values[best];
    let vector = eig.vectors.column(best).canonical();

    let norm = herm.frobenius_norm();
    let mut r = herm.mul_vec(&vector);
    r.axpy(C64::new(-value, 0.0), &vector);
    let residual = if norm > 0.0 { r.norm() / norm } else { 0.0 };
    if residual > tol {
        return Err(SimError::NonConvergence {
            iterations: eig.sweeps,
            residual,
        });
    }
    Ok(EigenPair {
        vector,
        value,
        residual,
    })
}

/// [`dominant_eigpair`] for an operator given as a sum of rank-one terms,
/// solved on the span of the term vectors.
pub fn dominant_eigpair_low_rank(
    op: &LowRankHermitian,
    basis_tol: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    let n = op.dim();
    if n == 0 {
        return Err(SimError::Dimension("empty operator".into()));
    }
    let basis = orthonormal_basis(op.terms().iter().map(|(_, u)| u), basis_tol);
    if basis.is_empty() {
        // zero operator: every vector is an eigenvector with eigenvalue 0
        return Ok(EigenPair {
            vector: ComplexVector::basis(n, 0),
            value: 0.0,
            residual: 0.0,
        });
    }
    let reduced = op.project(&basis);
    let top = dominant_eigpair(&reduced, tol, max_iter)?;

    if top.value < 0.0 && basis.len() < n {
        // The operator vanishes on the orthogonal complement of its span,
        // so eigenvalue 0 beats everything inside the span.
        let complement = (0..n)
            .map(|i| ComplexVector::basis(n, i))
            .find_map(|e| {
                let mut r = e;
                for _ in 0..2 {
                    for q in &basis {
                        let c = q.dot(&r);
                        r.axpy(-c, q);
                    }
                }
                (r.norm() > 1e-6).then(|| r.normalized()).flatten()
            })
            .ok_or_else(|| SimError::Dimension("no orthogonal complement found".into()))?;
        return Ok(EigenPair {
            vector: complement.canonical(),
            value: 0.0,
            residual: 0.0,
        });
    }

    let mut v = ComplexVector::zeros(n);
    for (q, y) in basis.iter().zip(top.vector.iter()) {
        v.axpy(*y, q);
    }
    let v = v
        .normalized()
        .ok_or_else(|| SimError::Dimension("degenerate eigenvector".into()))?
        .canonical();
    Ok(EigenPair {
        vector: v,
        value: top.value,
        residual: top.residual,
    })
}

/// Transmit/receive pair of the terrestrial link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformerPair {
    pub w_t: ComplexVector,
    pub w_r: ComplexVector,
    /// `|w_rᴴ H w_t|²`
    pub gain_linear: f64,
}

/// Dominant left/right singular vectors of `H`.
///
/// Works on the smaller of the two Gram matrices and recovers the other side
/// by a matched filter.
pub fn svd_beamformers(h: &ComplexMatrix) -> Result<BeamformerPair> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(SimError::Dimension("empty channel matrix".into()));
    }
    if h.frobenius_norm() == 0.0 {
        return Err(SimError::ZeroMatrix);
    }
    let (w_r, w_t) = if h.rows() <= h.cols() {
        let top = dominant_eigpair(&h.gram_rows(), EIG_TOL, EIG_MAX_ITER)?;
        let w_r = top.vector;
        let w_t = h.adjoint_mul_vec(&w_r).normalized().ok_or(SimError::ZeroMatrix)?.canonical();
        (w_r, w_t)
    } else {
        let top = dominant_eigpair(&h.gram_cols(), EIG_TOL, EIG_MAX_ITER)?;
        let w_t = top.vector;
        let w_r = h.mul_vec(&w_t).normalized().ok_or(SimError::ZeroMatrix)?.canonical();
        (w_r, w_t)
    };
    let gain_linear = link_gain(h, &w_r, &w_t);
    Ok(BeamformerPair { w_t, w_r, gain_linear })
}

/// `|w_rᴴ H w_t|²`
pub fn link_gain(h: &ComplexMatrix, w_r: &ComplexVector, w_t: &ComplexVector) -> f64 {
    w_r.dot(&h.mul_vec(w_t)).norm_sqr()
}

/// Matched-filter transmit vector `Hᴴ w_r / ‖Hᴴ w_r‖`, the optimum for a
/// fixed receive vector.
pub fn conditional_optimum(h: &ComplexMatrix, w_r: &ComplexVector) -> Result<ComplexVector> {
    Ok(h.adjoint_mul_vec(w_r)
        .normalized()
        .ok_or(SimError::ZeroMatrix)?
        .canonical())
}

/// Outcome of a regularized transmit beamformer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullingResult {
    pub lambda_reg: f64,
    pub w_t_lambda: ComplexVector,
    /// `|w_t_λᴴ h_sat|²` against the channel it was evaluated on.
    pub interference_linear: f64,
    pub rho_db: f64,
}

impl NullingResult {
    /// Re-evaluates the interference against another satellite channel, e.g.
    /// the true one when the beamformer was designed from an estimate.
    pub fn evaluated_on(mut self, h_true: &ComplexVector) -> Self {
        self.interference_linear = self.w_t_lambda.dot(h_true).norm_sqr();
        self
    }
}

/// Value of the regularized objective `|w_rᴴ H w|² − λ |wᴴ h_sat|²`.
pub fn nulling_objective(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    h_sat: &ComplexVector,
    lambda_reg: f64,
    w: &ComplexVector,
) -> f64 {
    link_gain(h, w_r, w) - lambda_reg * w.dot(h_sat).norm_sqr()
}

fn check_nulling_inputs(h: &ComplexMatrix, w_r: &ComplexVector, lambda_reg: f64) -> Result<()> {
    if w_r.len() != h.rows() {
        return Err(SimError::Dimension(format!(
            "receive vector of length {} for a channel with {} rows",
            w_r.len(),
            h.rows()
        )));
    }
    if !(lambda_reg >= 0.0) || !lambda_reg.is_finite() {
        return Err(SimError::Domain(format!("regularization weight {lambda_reg} must be finite and >= 0")));
    }
    Ok(())
}

fn solve_regularized(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    penalty: impl IntoIterator<Item = (f64, ComplexVector)>,
    lambda_reg: f64,
    basis_tol: f64,
) -> Result<(ComplexVector, ComplexVector)> {
    let a = h.adjoint_mul_vec(w_r);
    let mut op = LowRankHermitian::new(h.cols());
    op.push(1.0, a.clone())?;
    for (w, g) in penalty {
        op.push(-lambda_reg * w, g)?;
    }
    let top = dominant_eigpair_low_rank(&op, basis_tol, EIG_TOL, EIG_MAX_ITER)?;
    Ok((top.vector, a))
}

/// Regularized interference-nulling transmit vector for a known satellite
/// channel `h_sat`.
pub fn nulling_beamformer(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    h_sat: &ComplexVector,
    lambda_reg: f64,
) -> Result<NullingResult> {
    check_nulling_inputs(h, w_r, lambda_reg)?;
    if h_sat.len() != h.cols() {
        return Err(SimError::Dimension(format!(
            "satellite channel of length {} for {} transmit antennas",
            h_sat.len(),
            h.cols()
        )));
    }
    let (w, _) = solve_regularized(h, w_r, [(1.0, h_sat.clone())], lambda_reg, NULLING_BASIS_TOL)?;
    let w_opt = conditional_optimum(h, w_r)?;
    let rho_db = gain_loss_rho(h, w_r, &w_opt, &w)?;
    Ok(NullingResult {
        lambda_reg,
        interference_linear: w.dot(h_sat).norm_sqr(),
        w_t_lambda: w,
        rho_db,
    })
}

/// Sample covariance of LOS satellite channels around an estimated direction.
#[derive(Debug, Clone)]
pub struct RobustCovariance {
    samples: Vec<ComplexVector>,
}

impl RobustCovariance {
    /// Draws `n_samples` directions from `perturb_direction(sat_dir_est, err)`
    /// and stores the LOS channel from `tx` towards each.
    #[allow(clippy::too_many_arguments)]
    pub fn sample<R: Rng + ?Sized>(
        tx: &ArraySpec,
        sat_dir_est: &Direction,
        err: &AngularErrorModel,
        geom: &EarthSatGeometry,
        freq_hz: f64,
        n_samples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(SimError::Domain("robust covariance needs at least one sample".into()));
        }
        let samples = (0..n_samples)
            .map(|_| {
                let d = perturb_direction(sat_dir_est, err, rng);
                los_satellite_channel(tx, &d, geom.sat_altitude_m, geom.earth_radius_m, freq_hz)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { samples })
    }

    pub fn from_samples(samples: Vec<ComplexVector>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SimError::EmptyInput("robust covariance samples"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[ComplexVector] {
        &self.samples
    }

    /// `(1/M) Σ h_m h_mᴴ` as a dense matrix.
    pub fn dense(&self) -> ComplexMatrix {
        let n = self.samples[0].len();
        let w = C64::new(1.0 / self.samples.len() as f64, 0.0);
        let mut c = ComplexMatrix::zeros(n, n);
        for s in &self.samples {
            c.add_outer(w, s, s);
        }
        c
    }

    /// `wᴴ C w`
    pub fn expected_interference(&self, w: &ComplexVector) -> f64 {
        self.samples.iter().map(|s| s.dot(w).norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Robust nulling against a precomputed covariance. The stored interference
/// is the expected interference under the covariance; use
/// [`NullingResult::evaluated_on`] for a specific channel.
pub fn robust_nulling_with_covariance(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    cov: &RobustCovariance,
    lambda_reg: f64,
) -> Result<NullingResult> {
    check_nulling_inputs(h, w_r, lambda_reg)?;
    if cov.samples[0].len() != h.cols() {
        return Err(SimError::Dimension("covariance size does not match transmit antennas".into()));
    }
    let m = cov.samples.len() as f64;
    let penalty = cov.samples.iter().map(|s| (1.0 / m, s.clone()));
    let (w, _) = solve_regularized(h, w_r, penalty, lambda_reg, ROBUST_BASIS_TOL)?;
    let w_opt = conditional_optimum(h, w_r)?;
    let rho_db = gain_loss_rho(h, w_r, &w_opt, &w)?;
    Ok(NullingResult {
        lambda_reg,
        interference_linear: cov.expected_interference(&w),
        w_t_lambda: w,
        rho_db,
    })
}

/// Nulling that averages the penalty over the angular error distribution of
/// the satellite direction estimate. Interference is reported against
/// `h_true`.
#[allow(clippy::too_many_arguments)]
pub fn robust_nulling_beamformer<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    sat_dir_est: &Direction,
    err: &AngularErrorModel,
    tx: &ArraySpec,
    geom: &EarthSatGeometry,
    freq_hz: f64,
    lambda_reg: f64,
    n_samples: usize,
    h_true: &ComplexVector,
    rng: &mut R,
) -> Result<NullingResult> {
    let cov = RobustCovariance::sample(tx, sat_dir_est, err, geom, freq_hz, n_samples, rng)?;
    Ok(robust_nulling_with_covariance(h, w_r, &cov, lambda_reg)?.evaluated_on(h_true))
}

/// Terrestrial SNR loss in dB from replacing `w_t_opt` by `w_t_lambda`.
pub fn gain_loss_rho(
    h: &ComplexMatrix,
    w_r: &ComplexVector,
    w_t_opt: &ComplexVector,
    w_t_lambda: &ComplexVector,
) -> Result<f64> {
    let num = link_gain(h, w_r, w_t_opt);
    let den = link_gain(h, w_r, w_t_lambda);
    if den < RHO_DENOMINATOR_FLOOR {
        return Err(SimError::DegenerateNull { gain: den });
    }
    Ok(10.0 * (num / den).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexVector {
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                c(re * scale, im * scale)
            })
            .collect()
    }

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, cols: usize, scale: f64) -> ComplexMatrix {
        let v = rand_vec(rng, r * cols, scale);
        ComplexMatrix::from_row_major(r, cols, v.into_inner()).unwrap()
    }

    fn diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn diagonal_top_eigenpair() {
        let e = dominant_eigpair(&diag(&[3.0, 1.0, -2.0]), EIG_TOL, EIG_MAX_ITER).unwrap();
        assert_eq!(e.value, 3.0);
        assert!((e.vector[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_dominant_magnitude_is_not_picked() {
        // largest |eigenvalue| is -5; largest eigenvalue is 1
        let e = dominant_eigpair(&diag(&[-5.0, 1.0]), EIG_TOL, EIG_MAX_ITER).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn identity_tie_returns_valid_eigenpair() {
        let e = dominant_eigpair(&ComplexMatrix::identity(4), EIG_TOL, EIG_MAX_ITER).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
        assert!((e.vector.norm() - 1.0).abs() < 1e-15);
        assert!(e.residual < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            dominant_eigpair(&m, EIG_TOL, EIG_MAX_ITER),
            Err(SimError::NotHermitian { .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let mut m = diag(&[2.0, 1.0]);
        m[(0, 1)] = c(1e-13, 0.0);
        assert!(dominant_eigpair(&m, EIG_TOL, EIG_MAX_ITER).is_ok());
    }

    #[test]
    fn rank_one_channel_singular_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_vec(&mut rng, 3, 1.0);
        let b = rand_vec(&mut rng, 5, 1.0);
        let h = ComplexMatrix::outer(&a, &b, c(1.0, 0.0));
        let bf = svd_beamformers(&h).unwrap();
        let expect = a.norm_sqr() * b.norm_sqr();
        assert!((bf.gain_linear - expect).abs() < 1e-12 * expect);
        assert!(bf.w_r.dot(&a).norm() / a.norm() > 1.0 - 1e-12);
        assert!(bf.w_t.dot(&b).norm() / b.norm() > 1.0 - 1e-12);
    }

    #[test]
    fn identity_channel_unit_gain() {
        let bf = svd_beamformers(&ComplexMatrix::identity(3)).unwrap();
        assert!((bf.gain_linear - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_channel_rejected() {
        assert!(matches!(svd_beamformers(&ComplexMatrix::zeros(2, 2)), Err(SimError::ZeroMatrix)));
    }

    #[test]
    fn svd_gain_dominates_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = rand_mat(&mut rng, 2, 64, 1.0);
        let bf = svd_beamformers(&h).unwrap();
        assert!((bf.w_t.norm() - 1.0).abs() < 1e-12 && (bf.w_r.norm() - 1.0).abs() < 1e-12);
        for _ in 0..1000 {
            let u = rand_vec(&mut rng, 2, 1.0).normalized().unwrap();
            let v = rand_vec(&mut rng, 64, 1.0).normalized().unwrap();
            assert!(bf.gain_linear >= link_gain(&h, &u, &v));
        }
    }

    #[test]
    fn tall_channel_uses_column_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = rand_mat(&mut rng, 64, 2, 1.0);
        let wide = svd_beamformers(&h.adjoint()).unwrap();
        let tall = svd_beamformers(&h).unwrap();
        assert!((wide.gain_linear - tall.gain_linear).abs() < 1e-10 * tall.gain_linear);
    }

    #[test]
    fn lambda_zero_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = rand_mat(&mut rng, 2, 16, 1.0);
        let hs = rand_vec(&mut rng, 16, 1.0);
        let bf = svd_beamformers(&h).unwrap();
        let r = nulling_beamformer(&h, &bf.w_r, &hs, 0.0).unwrap();
        let opt = conditional_optimum(&h, &bf.w_r).unwrap();
        assert!(r.w_t_lambda.dot(&opt).norm() > 1.0 - 1e-9);
        assert!(r.rho_db.abs() < 1e-9);
    }

    #[test]
    fn orthogonal_satellite_channel_costs_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = rand_mat(&mut rng, 2, 8, 1.0);
        let bf = svd_beamformers(&h).unwrap();
        let a = h.adjoint_mul_vec(&bf.w_r);
        let mut hs = rand_vec(&mut rng, 8, 1.0);
        let proj = a.dot(&hs) / a.norm_sqr();
        hs.axpy(-proj, &a);
        for lambda in [1.0, 1e6, 1e12] {
            let r = nulling_beamformer(&h, &bf.w_r, &hs, lambda).unwrap();
            assert!(r.interference_linear < 1e-18, "{}", r.interference_linear);
            assert!(r.rho_db < 1e-9);
        }
    }

    #[test]
    fn parallel_penalty_falls_back_to_complement() {
        // h_sat parallel to Hᴴ w_r with a huge weight: the span is strictly
        // negative, so the optimum leaves the span entirely.
        let h = ComplexMatrix::from_row_major(1, 3, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w_r = ComplexVector::new(vec![c(1.0, 0.0)]);
        let hs = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let top = solve_regularized(&h, &w_r, [(1.0, hs)], 10.0, NULLING_BASIS_TOL).unwrap().0;
        assert!(top[0].norm() < 1e-15);
        assert!(matches!(
            nulling_beamformer(&h, &w_r, &ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]), 10.0),
            Err(SimError::DegenerateNull { .. })
        ));
    }

    #[test]
    fn nulling_rejects_bad_inputs() {
        let h = ComplexMatrix::identity(2);
        let w = ComplexVector::basis(2, 0);
        assert!(nulling_beamformer(&h, &w, &ComplexVector::zeros(3), 1.0).is_err());
        assert!(nulling_beamformer(&h, &w, &ComplexVector::zeros(2), -1.0).is_err());
        assert!(nulling_beamformer(&h, &ComplexVector::zeros(3), &ComplexVector::zeros(2), 1.0).is_err());
    }

    #[test]
    fn rho_identities() {
        let h = ComplexMatrix::identity(2);
        let w_r = ComplexVector::basis(2, 0);
        let opt = ComplexVector::basis(2, 0);
        assert_eq!(gain_loss_rho(&h, &w_r, &opt, &opt).unwrap(), 0.0);
        let half = ComplexVector::new(vec![c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
        let rho = gain_loss_rho(&h, &w_r, &opt, &half).unwrap();
        assert!((rho - 3.0103).abs() < 1e-4);
        assert!(gain_loss_rho(&h, &w_r, &opt, &ComplexVector::basis(2, 1)).is_err());
    }

    #[test]
    fn single_sample_covariance_matches_plain_nulling() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = rand_mat(&mut rng, 2, 16, 1e-4);
        let hs = rand_vec(&mut rng, 16, 1e-7);
        let bf = svd_beamformers(&h).unwrap();
        let cov = RobustCovariance::from_samples(vec![hs.clone()]).unwrap();
        for lambda in [1e4, 1e8, 1e10] {
            let a = nulling_beamformer(&h, &bf.w_r, &hs, lambda).unwrap();
            let b = robust_nulling_with_covariance(&h, &bf.w_r, &cov, lambda).unwrap();
            assert!(a.w_t_lambda.dot(&b.w_t_lambda).norm() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn low_rank_solver_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut op = LowRankHermitian::new(6);
            op.push(2.0, rand_vec(&mut rng, 6, 1.0)).unwrap();
            op.push(-0.7, rand_vec(&mut rng, 6, 1.0)).unwrap();
            op.push(0.4, rand_vec(&mut rng, 6, 1.0)).unwrap();
            let lr = dominant_eigpair_low_rank(&op, 1e-14, EIG_TOL, EIG_MAX_ITER).unwrap();
            let dense = dominant_eigpair(&op.dense(), EIG_TOL, EIG_MAX_ITER).unwrap();
            assert!((lr.value - dense.value).abs() < 1e-12 * dense.value.abs().max(1.0));
            assert!(lr.vector.dot(&dense.vector).norm() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn outputs_are_bitwise_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = rand_mat(&mut rng, 2, 64, 1e-5);
        let hs = rand_vec(&mut rng, 64, 1e-8);
        let bf = svd_beamformers(&h).unwrap();
        let a = nulling_beamformer(&h, &bf.w_r, &hs, 1e8).unwrap();
        let b = nulling_beamformer(&h, &bf.w_r, &hs, 1e8).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
