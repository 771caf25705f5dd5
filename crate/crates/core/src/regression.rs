//! Ridge regression with λ2 = (1/k)‖M_{\k}‖²_F, statistical risk and the
//! risk comparison between a matrix and its DRLS column subset.
//!
//! Noise follows y = y* + σ²ξ with ξ standard normal, so the noise standard
//! deviation per coordinate is σ² and the closed-form variance term scales
//! with σ⁴. Monte Carlo and closed form use the same convention.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drls::SelectionResult;
use crate::error::{invalid, DrlsError, Result};
use crate::guarantees::{Coverage, Guarantee, GuaranteeReport, ALPHA, TOLERANCE};
use crate::matrix::{svd, DenseMatrix, SvdFactors};

/// β = 2α(−1 + 2α + 3α²)/(1 − α)² ≈ 61.3.
pub const BETA: f64 =
    2.0 * ALPHA * (-1.0 + 2.0 * ALPHA + 3.0 * ALPHA * ALPHA) / ((1.0 - ALPHA) * (1.0 - ALPHA));

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel {
    pub design: DenseMatrix,
    pub k: usize,
    pub lambda2: f64,
    pub coefficients: Vec<f64>,
}

impl RidgeModel {
    /// ŷ = M x̂.
    pub fn predictions(&self) -> Vec<f64> {
        let x = DVector::from_column_slice(&self.coefficients);
        (self.design.as_nalgebra() * x).as_slice().to_vec()
    }

    /// ‖(MᵀM + λ2 I)x̂ − Mᵀy‖ / max(‖Mᵀy‖, ‖MᵀM + λ2 I‖·‖x̂‖).
    pub fn normal_equation_residual(&self, y: &[f64]) -> f64 {
        let m = self.design.as_nalgebra();
        let d = m.ncols();
        let lhs = m.transpose() * m + DMatrix::identity(d, d) * self.lambda2;
        let x = DVector::from_column_slice(&self.coefficients);
        let rhs = m.transpose() * DVector::from_column_slice(y);
        let scale = rhs.norm().max(lhs.norm() * x.norm());
        if scale == 0.0 {
            0.0
        } else {
            (&lhs * &x - &rhs).norm() / scale
        }
    }
}

fn regularizer(f: &SvdFactors, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(f.tail_sq_saturating(k) / k as f64)
}

/// x̂ = (MᵀM + λ2 I)⁻¹Mᵀy, solved as V(Σ² + λ2 I)⁻¹ΣUᵀy.
pub fn ridge_fit(design: &DenseMatrix, y: &[f64], k: usize) -> Result<RidgeModel> {
    if y.len() != design.rows() {
        return Err(invalid(format!(
            "response has length {} but design has {} rows",
            y.len(),
            design.rows()
        )));
    }
    let f = svd(design)?;
    let lambda2 = regularizer(&f, k)?;
    if lambda2 == 0.0 && f.numerical_rank < design.cols() {
        return Err(DrlsError::SingularSystem(format!(
            "regularizer is zero and the design has rank {} < {} columns",
            f.numerical_rank,
            design.cols()
        )));
    }
    let r = f.numerical_rank;
    let uty = f.u.columns(0, r).transpose() * DVector::from_column_slice(y);
    let scaled = DVector::from_iterator(
        r,
        f.significant()
            .iter()
            .zip(uty.iter())
            .map(|(s, c)| s / (s * s + lambda2) * c),
    );
    let x = f.v.columns(0, r) * scaled;
    Ok(RidgeModel {
        design: design.clone(),
        k,
        lambda2,
        coefficients: x.as_slice().to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiskMethod {
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskReport {
    pub bias_sq: f64,
    pub variance: f64,
    pub risk: f64,
    pub method: RiskMethod,
    pub trials: Option<usize>,
    pub std_error: Option<f64>,
}

/// The hat map y ↦ ŷ = U diag(σ²/(σ² + λ2)) Uᵀ y.
struct HatOperator {
    basis: DMatrix<f64>,
    shrink: Vec<f64>,
}

impl HatOperator {
    fn new(m: &DenseMatrix, k: usize) -> Result<Self> {
        let f = svd(m)?;
        let lambda2 = regularizer(&f, k)?;
        let shrink = f
            .significant()
            .iter()
            .map(|s| s * s / (s * s + lambda2))
            .collect();
        Ok(Self {
            basis: f.u.columns(0, f.numerical_rank).into_owned(),
            shrink,
        })
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut coords = self.basis.transpose() * v;
        for (c, h) in coords.iter_mut().zip(&self.shrink) {
            *c *= h;
        }
        &self.basis * coords
    }

    fn shrink_sq_sum(&self) -> f64 {
        self.shrink.iter().map(|h| h * h).sum()
    }
}

fn check_sigma_sq(sigma_sq: f64) -> Result<()> {
    if !(sigma_sq >= 0.0 && sigma_sq.is_finite()) {
        return Err(invalid(format!("sigma_sq must be a nonnegative real, got {sigma_sq}")));
    }
    Ok(())
}

fn noiseless_response(a: &DenseMatrix, x_star: &[f64]) -> Result<DVector<f64>> {
    if x_star.len() != a.cols() {
        return Err(invalid(format!(
            "x_star has length {} but the matrix has {} columns",
            x_star.len(),
            a.cols()
        )));
    }
    Ok(a.as_nalgebra() * DVector::from_column_slice(x_star))
}

fn closed_form(hat: &HatOperator, y_star: &DVector<f64>, sigma_sq: f64) -> RiskReport {
    let n = y_star.len() as f64;
    let bias_sq = (y_star - hat.apply(y_star)).norm_squared() / n;
    let variance = sigma_sq.powi(2) * hat.shrink_sq_sum() / n;
    RiskReport {
        bias_sq,
        variance,
        risk: bias_sq + variance,
        method: RiskMethod::ClosedForm,
        trials: None,
        std_error: None,
    }
}

/// Exact bias² = (1/n)‖y* − ŷ(y*)‖² and variance = (σ⁴/n)·Σ_l (σ_l²/(σ_l² + λ2))².
pub fn risk_closed_form(a: &DenseMatrix, x_star: &[f64], sigma_sq: f64, k: usize) -> Result<RiskReport> {
    response_risk_closed_form(a, noiseless_response(a, x_star)?.as_slice(), sigma_sq, k)
}

/// [`risk_closed_form`] for an arbitrary noiseless response y*, which need
/// not lie in the column space of `m`.
pub fn response_risk_closed_form(m: &DenseMatrix, y_star: &[f64], sigma_sq: f64, k: usize) -> Result<RiskReport> {
    check_sigma_sq(sigma_sq)?;
    let y_star = response_vector(m, y_star)?;
    Ok(closed_form(&HatOperator::new(m, k)?, &y_star, sigma_sq))
}

fn response_vector(m: &DenseMatrix, y_star: &[f64]) -> Result<DVector<f64>> {
    if y_star.len() != m.rows() {
        return Err(invalid(format!(
            "response has length {} but the matrix has {} rows",
            y_star.len(),
            m.rows()
        )));
    }
    Ok(DVector::from_column_slice(y_star))
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn standard_normal(len: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| StandardNormal.sample(rng)))
}

/// Average of (1/n)‖ŷ(y* + σ²ξ) − y*‖² over independent draws of ξ.
///
/// `bias_sq` is the exact noiseless part, `variance` the Monte Carlo mean of
/// the noise part alone, and `risk` the Monte Carlo mean of the total loss.
/// Trial t draws from its own ChaCha stream t, so results do not depend on
/// evaluation order.
pub fn risk_monte_carlo(
    a: &DenseMatrix,
    x_star: &[f64],
    sigma_sq: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskReport> {
    let y_star = noiseless_response(a, x_star)?;
    response_risk_monte_carlo(a, y_star.as_slice(), sigma_sq, k, trials, seed)
}

/// [`risk_monte_carlo`] for an arbitrary noiseless response y*.
pub fn response_risk_monte_carlo(
    m: &DenseMatrix,
    y_star: &[f64],
    sigma_sq: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskReport> {
    check_sigma_sq(sigma_sq)?;
    if trials < 100 {
        return Err(invalid(format!("at least 100 trials are required, got {trials}")));
    }
    let y_star = response_vector(m, y_star)?;
    let hat = HatOperator::new(m, k)?;
    let n = y_star.len();
    let bias_vec = hat.apply(&y_star) - &y_star;
    let bias_sq = bias_vec.norm_squared() / n as f64;

    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut noise_mean = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let noise = hat.apply(&(standard_normal(n, &mut rng) * sigma_sq));
        let loss = (&bias_vec + &noise).norm_squared() / n as f64;
        let count = (t + 1) as f64;
        let delta = loss - mean;
        mean += delta / count;
        m2 += delta * (loss - mean);
        noise_mean += (noise.norm_squared() / n as f64 - noise_mean) / count;
    }
    let sample_var = m2 / (trials - 1) as f64;
    Ok(RiskReport {
        bias_sq,
        variance: noise_mean,
        risk: mean,
        method: RiskMethod::MonteCarlo,
        trials: Some(trials),
        std_error: Some((sample_var / trials as f64).sqrt()),
    })
}

/// y = A x* + σ²ξ, deterministic per seed.
pub fn simulate_linear(a: &DenseMatrix, x_star: &[f64], sigma_sq: f64, seed: u64) -> Result<Vec<f64>> {
    check_sigma_sq(sigma_sq)?;
    let y_star = noiseless_response(a, x_star)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = y_star + standard_normal(a.rows(), &mut rng) * sigma_sq;
    Ok(y.as_slice().to_vec())
}

/// R(ŷ_C) ≤ (1 + βε)·R(ŷ_A), with C regressed under its own λ2 against the
/// same y* = A x*. Also requires variance(C) ≤ variance(A)/(1 − (α+1)ε)².
/// Proved for ε < 1/(2α).
pub fn check_risk_bound(
    a: &DenseMatrix,
    sel: &SelectionResult,
    x_star: &[f64],
    sigma_sq: f64,
) -> Result<GuaranteeReport> {
    check_sigma_sq(sigma_sq)?;
    if sel.c.rows() != a.rows() {
        return Err(invalid("selection does not match the matrix"));
    }
    let y_star = noiseless_response(a, x_star)?;
    let risk_a = closed_form(&HatOperator::new(a, sel.k)?, &y_star, sigma_sq);
    let risk_c = closed_form(&HatOperator::new(&sel.c, sel.k)?, &y_star, sigma_sq);
    let ratio = risk_ratio(risk_c.risk, risk_a.risk);
    let bound = 1.0 + BETA * sel.epsilon;
    let shrink = 1.0 - (ALPHA + 1.0) * sel.epsilon;
    let variance_factor = if shrink > 0.0 { 1.0 / (shrink * shrink) } else { f64::INFINITY };
    let variance_ratio = risk_ratio(risk_c.variance, risk_a.variance);
    let margin = (bound - ratio).min(variance_factor - variance_ratio);
    let in_range = sel.epsilon < 1.0 / (2.0 * ALPHA);
    let mut report = GuaranteeReport {
        guarantee: Guarantee::Risk,
        lhs_value: ratio,
        bound_value: bound,
        margin,
        passed: margin >= -TOLERANCE,
        tolerance: TOLERANCE,
        coverage: if in_range { Coverage::InRange } else { Coverage::OutOfTheoremRange },
        details: Vec::new(),
    };
    for (key, value) in [
        ("sigma_sq", sigma_sq),
        ("risk_a", risk_a.risk),
        ("risk_c", risk_c.risk),
        ("ratio", ratio),
        ("bias_sq_a", risk_a.bias_sq),
        ("bias_sq_c", risk_c.bias_sq),
        ("variance_a", risk_a.variance),
        ("variance_c", risk_c.variance),
        ("variance_ratio", variance_ratio),
        ("variance_factor", variance_factor),
    ] {
        report.details.push((key.to_string(), value));
    }
    Ok(report)
}

fn risk_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn elastic_net_scale(a: &DenseMatrix, k: usize) -> Result<f64> {
    let f = svd(a)?;
    let tail = f.tail_sq_saturating(k);
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if tail <= 0.0 {
        return Err(DrlsError::DegenerateInput(
            "the rank-k tail is zero so the elastic-net bound is undefined".into(),
        ));
    }
    let top = f.singular_values.first().copied().unwrap_or(0.0);
    let k2 = (k * k) as f64;
    Ok(4.0 * a.cols() as f64 * top * top * k2 / (tail * tail))
}

/// risk_a + λ1²·4d‖A‖₂² / ((1/k²)‖A_{\k}‖⁴_F).
pub fn elastic_net_risk_bound(a: &DenseMatrix, k: usize, lambda1: f64, risk_a: f64) -> Result<f64> {
    if !(risk_a >= 0.0) || !lambda1.is_finite() || lambda1 < 0.0 {
        return Err(invalid("risk_a and lambda1 must be nonnegative"));
    }
    Ok(risk_a + lambda1 * lambda1 * elastic_net_scale(a, k)?)
}

/// The λ1² that makes the elastic-net bound equal (1 + βε)·risk_a:
/// (βε/k²)·‖A_{\k}‖⁴_F·risk_a / (4d‖A‖₂²).
pub fn comparable_lambda1_sq(a: &DenseMatrix, k: usize, epsilon: f64, risk_a: f64) -> Result<f64> {
    if !(risk_a >= 0.0) || !(epsilon > 0.0) {
        return Err(invalid("risk_a must be nonnegative and epsilon positive"));
    }
    Ok(BETA * epsilon * risk_a / elastic_net_scale(a, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drls::drls_select;
    use crate::matrix::gaussian_matrix;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_nalgebra(gaussian_matrix(rows, cols, &mut rng)).unwrap()
    }

    fn gaussian_vec(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        standard_normal(len, &mut rng).as_slice().to_vec()
    }

    #[test]
    fn beta_value() {
        let a = 2.0 * (2.0 + 2f64.sqrt());
        let b = 2.0 * a * (-1.0 + 2.0 * a + 3.0 * a * a) / (1.0 - a).powi(2);
        assert_eq!(BETA, b);
        assert!((BETA - 61.33).abs() < 0.01);
    }

    #[test]
    fn identity_design_returns_response() {
        let y = [1.0, -2.0, 3.5];
        let m = ridge_fit(&DenseMatrix::identity(3), &y, 3).unwrap();
        assert_eq!(m.lambda2, 0.0);
        for (x, t) in m.coefficients.iter().zip(y) {
            assert!((x - t).abs() < 1e-14);
        }
        let zero = ridge_fit(&random(5, 8, 1), &[0.0; 5], 2).unwrap();
        assert!(zero.coefficients.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn svd_route_matches_normal_equations() {
        let a = random(20, 50, 2);
        let y = gaussian_vec(20, 3);
        let m = ridge_fit(&a, &y, 3).unwrap();
        let raw = a.as_nalgebra();
        let lhs = raw.transpose() * raw + DMatrix::identity(50, 50) * m.lambda2;
        let rhs = raw.transpose() * DVector::from_column_slice(&y);
        let x = lhs.cholesky().unwrap().solve(&rhs);
        let diff = (x - DVector::from_column_slice(&m.coefficients)).norm();
        assert!(diff <= 1e-9 * DVector::from_column_slice(&m.coefficients).norm());
        assert!(m.normal_equation_residual(&y) < 1e-12);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = DenseMatrix::from_diagonal(&[1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            ridge_fit(&a, &[1.0, 1.0, 1.0], 2),
            Err(DrlsError::SingularSystem(_))
        ));
        assert!(ridge_fit(&a, &[1.0, 1.0], 2).is_err());
    }

    #[test]
    fn noiseless_risk_is_direct_bias() {
        let a = random(12, 25, 4);
        let x_star = gaussian_vec(25, 5);
        assert_eq!(risk_closed_form(&a, &[0.0; 25], 0.0, 3).unwrap().risk, 0.0);
        let closed = risk_closed_form(&a, &x_star, 0.0, 3).unwrap();
        let y_star = simulate_linear(&a, &x_star, 0.0, 0).unwrap();
        let fit = ridge_fit(&a, &y_star, 3).unwrap();
        let direct: f64 = fit
            .predictions()
            .iter()
            .zip(&y_star)
            .map(|(p, t)| (p - t).powi(2))
            .sum::<f64>()
            / 12.0;
        assert!((closed.risk - direct).abs() <= 1e-10 * direct.max(1e-300));
        assert_eq!(closed.variance, 0.0);
        let mc = risk_monte_carlo(&a, &x_star, 0.0, 3, 100, 1).unwrap();
        assert_eq!(mc.std_error, Some(0.0));
        assert!((mc.risk - closed.risk).abs() <= 1e-12 * closed.risk);
    }

    #[test]
    fn closed_form_matches_monte_carlo() {
        let a = random(15, 30, 6);
        let x_star = gaussian_vec(30, 7);
        let closed = risk_closed_form(&a, &x_star, 1.0, 3).unwrap();
        assert!((closed.risk - closed.bias_sq - closed.variance).abs() < 1e-12);
        let mc = risk_monte_carlo(&a, &x_star, 1.0, 3, 20000, 8).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.risk - closed.risk).abs() <= 3.0 * se, "{mc:?} vs {closed:?}");
    }

    #[test]
    fn simulated_noise_has_sigma_sq_scale() {
        let n = 40000;
        let a = DenseMatrix::zeros(n, 1);
        let y = simulate_linear(&a, &[0.0], 3.0, 11).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.1);
        assert!((var / 9.0 - 1.0).abs() < 0.05, "{var}");
        assert_eq!(y, simulate_linear(&a, &[0.0], 3.0, 11).unwrap());
    }

    #[test]
    fn full_selection_has_unit_ratio() {
        let a = random(10, 20, 9);
        let sel = drls_select(&a, 2, 1e-9).unwrap();
        let report = check_risk_bound(&a, &sel, &gaussian_vec(20, 1), 1.0).unwrap();
        assert!((report.lhs_value - 1.0).abs() < 1e-10);
        assert!(report.passed);
        assert_eq!(report.coverage, Coverage::InRange);
    }

    #[test]
    fn elastic_net_bound_substitution() {
        let a = random(10, 20, 10);
        assert_eq!(elastic_net_risk_bound(&a, 3, 0.0, 0.7).unwrap(), 0.7);
        let one = elastic_net_risk_bound(&a, 3, 0.1, 0.0).unwrap();
        let two = elastic_net_risk_bound(&a, 3, 0.2, 0.0).unwrap();
        assert!((two / one - 4.0).abs() < 1e-12);
        let lam_sq = comparable_lambda1_sq(&a, 3, 0.05, 0.7).unwrap();
        let bound = elastic_net_risk_bound(&a, 3, lam_sq.sqrt(), 0.7).unwrap();
        assert!((bound - (1.0 + BETA * 0.05) * 0.7).abs() < 1e-12);
        assert!(matches!(
            elastic_net_risk_bound(&DenseMatrix::identity(3), 3, 0.1, 1.0),
            Err(DrlsError::DegenerateInput(_))
        ));
    }
}
