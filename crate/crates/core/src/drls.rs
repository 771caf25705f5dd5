//! Deterministic ridge leverage score column selection and the power-law
//! column-count machinery.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::leverage::{ridge_leverage_scores_from, sorted_order, LeverageScores};
use crate::matrix::{svd, DenseMatrix};

/// Scores within this distance of the threshold count as tied with it.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    /// Selected column indices in the order they were taken (descending score).
    pub theta: Vec<usize>,
    /// d×|Θ| binary matrix with S[theta[j], j] = 1.
    pub selection: DenseMatrix,
    /// A·S.
    pub c: DenseMatrix,
    /// Score of the last column taken, padding included.
    pub threshold: f64,
    /// Σ_{i∉Θ} τ̄_i.
    pub residual: f64,
    pub epsilon: f64,
    pub k: usize,
    pub tie_at_threshold: bool,
    /// |Θ| when the stopping rule fired, before padding up to k.
    pub stopped_at: usize,
    pub scores: LeverageScores,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn padded(&self) -> bool {
        self.stopped_at < self.theta.len()
    }
}

/// The threshold scan on a bare score vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSelection {
    pub theta: Vec<usize>,
    pub threshold: f64,
    pub residual: f64,
    pub tie_at_threshold: bool,
    pub stopped_at: usize,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Takes columns in descending score order (ties by ascending index) until
/// the kept mass strictly exceeds total − ε, then pads to at least k columns.
pub fn select_from_scores(scores: &[f64], k: usize, epsilon: f64) -> Result<ScoreSelection> {
    check_epsilon(epsilon)?;
    if k == 0 || k > scores.len() {
        return Err(invalid(format!(
            "k must lie in 1..={}, got {k}",
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(invalid("scores must be finite and nonnegative"));
    }
    let total: f64 = scores.iter().sum();
    let order = sorted_order(scores);

    let mut kept = 0.0;
    let mut taken = 0;
    for &i in &order {
        kept += scores[i];
        taken += 1;
        if kept > total - epsilon {
            break;
        }
    }
    let stopped_at = taken;
    let taken = taken.max(k);

    let theta: Vec<usize> = order[..taken].to_vec();
    let threshold = scores[theta[taken - 1]];
    // Sum the excluded scores smallest first.
    let residual = order[taken..].iter().rev().map(|&i| scores[i]).sum();
    let tie_at_threshold = order[taken..]
        .iter()
        .any(|&i| (scores[i] - threshold).abs() <= TIE_TOLERANCE);
    Ok(ScoreSelection {
        theta,
        threshold,
        residual,
        tie_at_threshold,
        stopped_at,
    })
}

pub fn drls_select(a: &DenseMatrix, k: usize, epsilon: f64) -> Result<SelectionResult> {
    check_epsilon(epsilon)?;
    let scores = ridge_leverage_scores_from(&svd(a)?, k)?;
    drls_select_with_scores(a, scores, epsilon)
}

/// Selection from precomputed ridge scores of `a`.
pub fn drls_select_with_scores(
    a: &DenseMatrix,
    scores: LeverageScores,
    epsilon: f64,
) -> Result<SelectionResult> {
    if scores.len() != a.cols() {
        return Err(invalid("score vector length differs from column count"));
    }
    let k = scores
        .k
        .ok_or_else(|| invalid("selection needs scores computed for a rank k"))?;
    let picked = select_from_scores(&scores.scores, k, epsilon)?;
    let mut s = DMatrix::zeros(a.cols(), picked.theta.len());
    for (j, &i) in picked.theta.iter().enumerate() {
        s[(i, j)] = 1.0;
    }
    Ok(SelectionResult {
        c: a.select_columns(&picked.theta),
        selection: DenseMatrix::wrap(s),
        threshold: picked.threshold,
        residual: picked.residual,
        epsilon,
        k,
        tie_at_threshold: picked.tie_at_threshold,
        stopped_at: picked.stopped_at,
        theta: picked.theta,
        scores,
    })
}

/// ε̃ after keeping the top m columns, for m = 0..=d. Non-increasing in m.
pub fn columns_vs_error(scores: &[f64]) -> Vec<f64> {
    let order = sorted_order(scores);
    let mut remaining = vec![0.0; scores.len() + 1];
    for m in (0..scores.len()).rev() {
        remaining[m] = remaining[m + 1] + scores[order[m]];
    }
    remaining
}

/// Upper bound on |Θ| when ridge scores decay as index^(−a):
/// ⌈max((4k/ε)^(1/a) − 1, (4k/((a−1)ε))^(1/(a−1)) − 1, k)⌉.
pub fn theorem5_bound(k: usize, epsilon: f64, decay_power: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(decay_power > 1.0) || !decay_power.is_finite() {
        return Err(invalid(format!(
            "decay power must exceed 1, got {decay_power}"
        )));
    }
    let kf = k as f64;
    let a = decay_power;
    let first = (4.0 * kf / epsilon).powf(1.0 / a) - 1.0;
    let second = (4.0 * kf / ((a - 1.0) * epsilon)).powf(1.0 / (a - 1.0)) - 1.0;
    let bound = first.max(second).max(kf);
    if bound >= usize::MAX as f64 {
        return Ok(usize::MAX);
    }
    // Absorb rounding in the powers so exact integers are not bumped up.
    Ok((bound - 1e-9).ceil().max(kf) as usize)
}

/// Least-squares fit of log(score) = log(b) − a·log(index).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    /// a, the negated log-log slope.
    pub decay_power: f64,
    /// b, the fitted score at index 1.
    pub scale: f64,
    /// 1-based sorted indices used in the fit.
    pub fit_range: RangeInclusive<usize>,
    /// Euclidean norm of the log-space residuals.
    pub residual_norm: f64,
}

impl PowerLawFit {
    /// Power-law column-count bounds need a > 1.
    pub fn bound_applicable(&self) -> bool {
        self.decay_power > 1.0
    }

    pub fn predict(&self, index: usize) -> f64 {
        self.scale * (index as f64).powf(-self.decay_power)
    }
}

/// Fits sorted (descending) values over a 1-based inclusive index range.
pub fn fit_power_law_sorted(sorted: &[f64], fit_range: RangeInclusive<usize>) -> Result<PowerLawFit> {
    let (lo, hi) = (*fit_range.start(), *fit_range.end());
    if lo == 0 || hi > sorted.len() || hi < lo + 1 {
        return Err(invalid(format!(
            "fit range {lo}..={hi} must hold at least two indices within 1..={}",
            sorted.len()
        )));
    }
    let window = &sorted[lo - 1..hi];
    if window.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid("scores must be sorted descending over the fit range"));
    }
    if window.iter().any(|&s| !(s > 0.0)) {
        return Err(invalid("power-law fit needs strictly positive scores"));
    }
    let xs: Vec<f64> = (lo..=hi).map(|i| (i as f64).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|s| s.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(PowerLawFit {
        decay_power: -slope,
        scale: intercept.exp(),
        fit_range,
        residual_norm,
    })
}

/// Sorts the scores descending, then fits over `fit_range`.
pub fn fit_power_law(scores: &LeverageScores, fit_range: RangeInclusive<usize>) -> Result<PowerLawFit> {
    fit_power_law_sorted(&scores.sorted_desc(), fit_range)
}
