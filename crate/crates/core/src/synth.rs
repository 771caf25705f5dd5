//! Seeded synthetic matrices: prescribed singular spectra, and prescribed
//! ridge leverage profiles.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, DrlsError, Result};
use crate::leverage::ridge_leverage_scores;
use crate::matrix::{haar_frame, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumProfile {
    /// σ_i = i^(−a)
    PowerLaw(f64),
    /// σ_i = exp(−rate·(i − 1))
    Exponential(f64),
    /// σ_i = 1
    Flat,
}

impl SpectrumProfile {
    pub fn values(&self, r: usize) -> Vec<f64> {
        (1..=r)
            .map(|i| match *self {
                SpectrumProfile::PowerLaw(a) => (i as f64).powf(-a),
                SpectrumProfile::Exponential(rate) => (-rate * (i - 1) as f64).exp(),
                SpectrumProfile::Flat => 1.0,
            })
            .collect()
    }
}

impl fmt::Display for SpectrumProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumProfile::PowerLaw(a) => write!(f, "power-law:{a}"),
            SpectrumProfile::Exponential(r) => write!(f, "exponential:{r}"),
            SpectrumProfile::Flat => write!(f, "flat"),
        }
    }
}

impl FromStr for SpectrumProfile {
    type Err = DrlsError;

    /// `power-law:<a>`, `exponential:<rate>` or `flat`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let number = |default: f64| -> Result<f64> {
            let v = match param {
                Some(p) => p
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad spectrum parameter {p:?}")))?,
                None => default,
            };
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(invalid(format!("spectrum parameter must be positive, got {v}")))
            }
        };
        match name {
            "power-law" | "powerlaw" => Ok(SpectrumProfile::PowerLaw(number(1.0)?)),
            "exponential" | "exp" => Ok(SpectrumProfile::Exponential(number(0.3)?)),
            "flat" => Ok(SpectrumProfile::Flat),
            other => Err(invalid(format!("unknown spectrum profile {other:?}"))),
        }
    }
}

/// A = U·diag(σ)·Vᵀ with Haar-random U (n×r), V (d×r), r = min(n, d).
pub fn random_with_spectrum(n: usize, d: usize, profile: SpectrumProfile, seed: u64) -> Result<DenseMatrix> {
    if n == 0 || d == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    let r = n.min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_frame(n, r, &mut rng);
    let v = haar_frame(d, r, &mut rng);
    let s = DMatrix::from_diagonal(&DVector::from_vec(profile.values(r)));
    DenseMatrix::from_nalgebra(u * s * v.transpose())
}

/// How a power-law leverage matrix was built.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawDesign {
    pub decay_power: f64,
    pub k: usize,
    /// Score of the top column; target i-th score is top·i^(−a).
    pub top_score: f64,
    /// Target scores, column i holds `target[i]`.
    pub target: Vec<f64>,
    pub singular_values: Vec<f64>,
    /// Largest |achieved − target| / target over all columns.
    pub max_relative_error: f64,
}

/// Builds an n×d matrix whose rank-k ridge leverage scores are exactly
/// top·i^(−a) for column i (1-based), already in descending order.
///
/// Ridge scores never exceed 1 and always sum to at least k, so no such
/// matrix exists when Σ_{i≤d} i^(−a) < k; that case is reported as
/// [`DrlsError::Infeasible`].
pub fn power_law_ridge_matrix(n: usize, d: usize, k: usize, decay_power: f64, seed: u64) -> Result<(DenseMatrix, PowerLawDesign)> {
    if k == 0 || n <= k || d <= k {
        return Err(invalid(format!(
            "need n > k and d > k (n={n}, d={d}, k={k})"
        )));
    }
    if !(decay_power > 0.0) {
        return Err(invalid("decay power must be positive"));
    }
    let harmonic: f64 = (1..=d).map(|i| (i as f64).powf(-decay_power)).sum();
    if harmonic < k as f64 {
        return Err(DrlsError::Infeasible(format!(
            "sum of i^-{decay_power} over {d} columns is {harmonic:.4} < k = {k}; \
             ridge scores are at most 1 and sum to at least k"
        )));
    }
    let (top, weights) = choose_weights(n.min(d), d, k, decay_power).ok_or_else(|| {
        DrlsError::Infeasible(format!(
            "no spectrum of rank <= {} majorizes the power-law profile (a={decay_power}, k={k})",
            n.min(d)
        ))
    })?;
    let target: Vec<f64> = (1..=d).map(|i| top * (i as f64).powf(-decay_power)).collect();

    let v = diagonal_with_spectrum(&weights, &target)?;
    let r = weights.len();
    // λ = 1: σ_l² = w_l/(1 − w_l) makes the tail sum exactly k.
    let raw: Vec<f64> = weights.iter().map(|w| (w / (1.0 - w)).sqrt()).collect();
    let singular_values: Vec<f64> = raw.iter().map(|s| s / raw[0]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_frame(n, r, &mut rng);
    let s = DMatrix::from_diagonal(&DVector::from_column_slice(&singular_values));
    let a = DenseMatrix::from_nalgebra(u * s * v.transpose())?;

    let achieved = ridge_leverage_scores(&a, k)?;
    let max_relative_error = achieved
        .scores
        .iter()
        .zip(&target)
        .map(|(x, t)| (x - t).abs() / t)
        .fold(0.0, f64::max);
    if max_relative_error > 0.02 {
        return Err(DrlsError::Numerical(format!(
            "constructed scores deviate from the power law by {max_relative_error:.3e}"
        )));
    }
    Ok((
        a,
        PowerLawDesign {
            decay_power,
            k,
            top_score: top,
            target,
            singular_values,
            max_relative_error,
        },
    ))
}

/// Picks ridge weights w_l = σ_l²/(σ_l² + λ): k head values and m equal tail
/// values u = k/(m + k), so Σ_tail w/(1 − w) = k. Returns the top score and
/// the weights when they majorize the target profile.
fn choose_weights(max_rank: usize, d: usize, k: usize, a: f64) -> Option<(f64, Vec<f64>)> {
    let kf = k as f64;
    for m in (1..=max_rank - k).rev() {
        let u = kf / (m as f64 + kf);
        for &top in &[0.99, 0.97, 0.95, 0.9, 0.85, 0.8, 0.7, 0.6, 0.5] {
            let target: Vec<f64> = (1..=d).map(|i| top * (i as f64).powf(-a)).collect();
            let total: f64 = target.iter().sum();
            let surplus = total - m as f64 * u - kf * u;
            if surplus < 0.0 {
                continue;
            }
            let head_mass: f64 = target[..k].iter().sum();
            let mut w: Vec<f64> = target[..k]
                .iter()
                .map(|t| u + surplus * t / head_mass)
                .collect();
            if w[0] >= 0.999 {
                continue;
            }
            w.extend(std::iter::repeat(u).take(m));
            let mut pw = 0.0;
            let mut pt = 0.0;
            let majorizes = w.iter().zip(&target).all(|(wi, ti)| {
                pw += wi;
                pt += ti;
                pw >= pt - 1e-12
            });
            if majorizes {
                return Some((top, w));
            }
        }
    }
    None
}

/// Returns V (d×r, orthonormal columns) with diag(V·diag(w)·Vᵀ) = target.
///
/// Starts from diag(w, 0, …, 0) and applies plane rotations, each one pinning
/// the largest unassigned target onto a diagonal entry that straddles it.
fn diagonal_with_spectrum(w: &[f64], target: &[f64]) -> Result<DMatrix<f64>> {
    let r = w.len();
    let d = target.len();
    // Columns of q are the coordinates of each diagonal position in the eigenbasis.
    let mut q = DMatrix::<f64>::zeros(r, d);
    for l in 0..r {
        q[(l, l)] = 1.0;
    }
    let diag_at = |q: &DMatrix<f64>, p: usize| -> f64 { (0..r).map(|l| w[l] * q[(l, p)] * q[(l, p)]).sum() };
    let mut delta: Vec<f64> = (0..d).map(|p| diag_at(&q, p)).collect();
    let mut free: Vec<usize> = (0..d).collect();
    let mut slot_of_target = vec![0usize; d];

    let mut sorted_targets: Vec<usize> = (0..d).collect();
    sorted_targets.sort_by(|&i, &j| target[j].total_cmp(&target[i]).then(i.cmp(&j)));

    for &ti in &sorted_targets {
        let tau = target[ti];
        if free.len() == 1 {
            slot_of_target[ti] = free[0];
            break;
        }
        let above = free
            .iter()
            .copied()
            .filter(|&p| delta[p] >= tau)
            .min_by(|&x, &y| delta[x].total_cmp(&delta[y]));
        let below = free
            .iter()
            .copied()
            .filter(|&p| delta[p] < tau)
            .max_by(|&x, &y| delta[x].total_cmp(&delta[y]));
        let (p, o) = match (above, below) {
            (Some(p), _) if (delta[p] - tau).abs() <= 1e-15 => {
                slot_of_target[ti] = p;
                free.retain(|&x| x != p);
                continue;
            }
            (Some(p), Some(o)) => (p, o),
            _ => {
                return Err(DrlsError::Infeasible(
                    "spectrum does not majorize the requested diagonal".into(),
                ))
            }
        };
        let a = delta[p];
        let c = delta[o];
        let b: f64 = (0..r).map(|l| w[l] * q[(l, p)] * q[(l, o)]).sum();
        let mid = 0.5 * (a + c);
        let half = 0.5 * (a - c);
        let radius = half.hypot(b);
        let phi = b.atan2(half);
        let theta = 0.5 * (phi + ((tau - mid) / radius).clamp(-1.0, 1.0).acos());
        let (sin, cos) = theta.sin_cos();
        for l in 0..r {
            let (x, y) = (q[(l, p)], q[(l, o)]);
            q[(l, p)] = cos * x + sin * y;
            q[(l, o)] = -sin * x + cos * y;
        }
        delta[p] = diag_at(&q, p);
        delta[o] = diag_at(&q, o);
        slot_of_target[ti] = p;
        free.retain(|&x| x != p);
    }

    let mut v = DMatrix::zeros(d, r);
    for (i, &slot) in slot_of_target.iter().enumerate() {
        for l in 0..r {
            v[(i, l)] = q[(l, slot)];
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::svd;

    #[test]
    fn spectrum_is_realized() {
        let a = random_with_spectrum(6, 9, SpectrumProfile::PowerLaw(2.0), 5).unwrap();
        let f = svd(&a).unwrap();
        for (s, e) in f.singular_values.iter().zip(SpectrumProfile::PowerLaw(2.0).values(6)) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("flat".parse::<SpectrumProfile>().unwrap(), SpectrumProfile::Flat);
        assert_eq!(
            "power-law:1.5".parse::<SpectrumProfile>().unwrap(),
            SpectrumProfile::PowerLaw(1.5)
        );
        assert_eq!(
            "exponential:0.5".parse::<SpectrumProfile>().unwrap(),
            SpectrumProfile::Exponential(0.5)
        );
        assert!("power-law:-1".parse::<SpectrumProfile>().is_err());
        assert!("zigzag".parse::<SpectrumProfile>().is_err());
    }

    #[test]
    fn schur_horn_rotation_hits_targets() {
        let w = [0.9, 0.6, 0.3];
        let target = [0.5, 0.4, 0.35, 0.3, 0.25];
        let v = diagonal_with_spectrum(&w, &target).unwrap();
        let vtv = v.transpose() * &v;
        assert!((vtv - DMatrix::identity(3, 3)).amax() < 1e-12);
        for (i, t) in target.iter().enumerate() {
            let got: f64 = (0..3).map(|l| w[l] * v[(i, l)] * v[(i, l)]).sum();
            assert!((got - t).abs() < 1e-12, "{i}: {got} vs {t}");
        }
    }

    #[test]
    fn power_law_scores_are_exact() {
        let (a, design) = power_law_ridge_matrix(12, 400, 2, 1.5, 3).unwrap();
        assert_eq!(a.shape(), (12, 400));
        assert!(design.max_relative_error < 1e-8, "{}", design.max_relative_error);
    }

    #[test]
    fn steep_power_laws_are_infeasible() {
        assert!(matches!(
            power_law_ridge_matrix(12, 400, 2, 2.0, 3),
            Err(DrlsError::Infeasible(_))
        ));
        assert!(matches!(
            power_law_ridge_matrix(12, 400, 3, 1.5, 3),
            Err(DrlsError::Infeasible(_))
        ));
    }
}
