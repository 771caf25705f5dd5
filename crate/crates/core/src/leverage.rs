//! Ridge, rank-k subspace and classical leverage scores.
//!
//! All three kinds are computed from one SVD. With A = UΣVᵀ and
//! λ = (1/k)‖A − A_k‖_F², the ridge score of column i is
//!
//! ```text
//! τ̄_i = Σ_l σ_l² / (σ_l² + λ) · V_il²
//! ```
//!
//! which is algebraically a_iᵀ(AAᵀ + λI)⁺a_i. Only singular values above the
//! rank cutoff contribute, so λ = 0 reproduces the classical scores exactly.

use crate::error::{invalid, DrlsError, Result};
use crate::matrix::{svd, DenseMatrix, SvdFactors};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreKind {
    Ridge,
    Subspace,
    Classical,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Ridge => "ridge",
            ScoreKind::Subspace => "subspace",
            ScoreKind::Classical => "classical",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeverageScores {
    pub kind: ScoreKind,
    /// Rank parameter; `None` for classical scores.
    pub k: Option<usize>,
    /// Regularizer λ; `Some` only for ridge scores.
    pub lambda2: Option<f64>,
    pub scores: Vec<f64>,
    /// Σ scores, the total leverage mass t̄.
    pub total: f64,
}

impl LeverageScores {
    fn new(kind: ScoreKind, k: Option<usize>, lambda2: Option<f64>, scores: Vec<f64>) -> Self {
        let total = scores.iter().sum();
        Self {
            kind,
            k,
            lambda2,
            scores,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores sorted descending, ties by ascending column index.
    pub fn sorted_desc(&self) -> Vec<f64> {
        sorted_order(&self.scores)
            .into_iter()
            .map(|i| self.scores[i])
            .collect()
    }
}

/// Column order by descending score, ties broken by ascending index.
pub(crate) fn sorted_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order
}

fn check_k(f: &SvdFactors, k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if f.numerical_rank < k {
        return Err(DrlsError::Rank {
            requested: k,
            available: f.numerical_rank,
        });
    }
    Ok(())
}

/// Per-singular-direction ridge weights σ_l²/(σ_l² + λ) for l < rank.
pub fn ridge_weights(f: &SvdFactors, lambda2: f64) -> Vec<f64> {
    f.significant()
        .iter()
        .map(|s| {
            let s2 = s * s;
            s2 / (s2 + lambda2)
        })
        .collect()
}

fn weighted_row_norms(f: &SvdFactors, weights: &[f64]) -> Vec<f64> {
    (0..f.cols())
        .map(|i| {
            let score: f64 = weights
                .iter()
                .enumerate()
                .map(|(l, w)| w * f.v[(i, l)] * f.v[(i, l)])
                .sum();
            score.clamp(0.0, 1.0)
        })
        .collect()
}

pub fn ridge_leverage_scores(a: &DenseMatrix, k: usize) -> Result<LeverageScores> {
    ridge_leverage_scores_from(&svd(a)?, k)
}

pub fn ridge_leverage_scores_from(f: &SvdFactors, k: usize) -> Result<LeverageScores> {
    check_k(f, k)?;
    let lambda2 = f.ridge_regularizer(k);
    let scores = weighted_row_norms(f, &ridge_weights(f, lambda2));
    Ok(LeverageScores::new(ScoreKind::Ridge, Some(k), Some(lambda2), scores))
}

pub fn subspace_leverage_scores(a: &DenseMatrix, k: usize) -> Result<LeverageScores> {
    subspace_leverage_scores_from(&svd(a)?, k)
}

/// a_iᵀ(A_kA_kᵀ)⁺a_i, i.e. the squared row norms of V_k.
pub fn subspace_leverage_scores_from(f: &SvdFactors, k: usize) -> Result<LeverageScores> {
    check_k(f, k)?;
    let scores = weighted_row_norms(f, &vec![1.0; k]);
    Ok(LeverageScores::new(ScoreKind::Subspace, Some(k), None, scores))
}

pub fn classical_leverage_scores(a: &DenseMatrix) -> Result<LeverageScores> {
    classical_leverage_scores_from(&svd(a)?)
}

pub fn classical_leverage_scores_from(f: &SvdFactors) -> Result<LeverageScores> {
    if f.numerical_rank == 0 {
        return Err(DrlsError::Rank {
            requested: 1,
            available: 0,
        });
    }
    let scores = weighted_row_norms(f, &vec![1.0; f.numerical_rank]);
    Ok(LeverageScores::new(ScoreKind::Classical, None, None, scores))
}

/// Ridge mass split into the top-k directions and the rest. Each half is at
/// most k, which is where t̄ ≤ 2k comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreSumSplit {
    pub head: f64,
    pub tail: f64,
    pub lambda2: f64,
}

impl ScoreSumSplit {
    pub fn total(&self) -> f64 {
        self.head + self.tail
    }
}

pub fn score_sum_split(f: &SvdFactors, k: usize) -> Result<ScoreSumSplit> {
    check_k(f, k)?;
    let lambda2 = f.ridge_regularizer(k);
    let w = ridge_weights(f, lambda2);
    let head = w.iter().take(k).sum();
    let tail = w.iter().skip(k).sum();
    Ok(ScoreSumSplit { head, tail, lambda2 })
}
