use drls_core::drls::{drls_select, select_from_scores};
use drls_core::guarantees::{check_spectral, check_two_sided};
use drls_core::leverage::{classical_leverage_scores, ridge_leverage_scores, score_sum_split};
use drls_core::matrix::{haar_projection, loewner_leq, rank_k_truncation, svd, tail_frobenius_sq};
use drls_core::regression::{check_risk_bound, ridge_fit, simulate_linear};
use drls_core::synth::{random_with_spectrum, SpectrumProfile};
use drls_core::DenseMatrix;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROFILES: [SpectrumProfile; 5] = [
    SpectrumProfile::PowerLaw(1.5),
    SpectrumProfile::PowerLaw(2.0),
    SpectrumProfile::PowerLaw(3.0),
    SpectrumProfile::Exponential(0.3),
    SpectrumProfile::Flat,
];

/// (matrix, k) with 1 ≤ k < rank.
fn instance() -> impl Strategy<Value = (DenseMatrix, usize)> {
    (3usize..12, 4usize..30, 0usize..5, any::<u64>(), any::<prop::sample::Index>()).prop_map(
        |(n, d, p, seed, ki)| {
            let a = random_with_spectrum(n, d, PROFILES[p], seed).unwrap();
            let k = 1 + ki.index(n.min(d) - 1);
            (a, k)
        },
    )
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(rand_distr::StandardNormal))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs((a, _k) in instance()) {
        let f = svd(&a).unwrap();
        let err = (f.reconstruct() - a.as_nalgebra()).norm();
        prop_assert!(err <= 1e-10 * (1.0 + a.frobenius_norm_sq().sqrt()));
    }

    #[test]
    fn eckart_young((a, k) in instance(), seed in any::<u64>()) {
        let f = svd(&a).unwrap();
        let best = rank_k_truncation(&f, k).unwrap();
        let best_err = (a.as_nalgebra() - best.as_nalgebra()).norm_squared();
        prop_assert!((best_err - tail_frobenius_sq(&f, k).unwrap()).abs() <= 1e-10 * (1.0 + best_err));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = gaussian(a.rows(), k, &mut rng) * gaussian(k, a.cols(), &mut rng);
        let q = gaussian(a.rows(), k, &mut rng).qr().q();
        let projected = &q * (q.transpose() * a.as_nalgebra());
        for other in [b, projected] {
            prop_assert!(best_err <= (a.as_nalgebra() - other).norm_squared() * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn loewner_reflexive_and_conjugation((a, k) in instance(), seed in any::<u64>()) {
        let sel = drls_select(&a, k, 0.2).unwrap();
        let f = DenseMatrix::from_nalgebra(sel.c.gram()).unwrap();
        let g = DenseMatrix::from_nalgebra(a.gram()).unwrap();
        prop_assert!(loewner_leq(&f, &f, 1e-8).unwrap().holds);
        prop_assert!(loewner_leq(&f, &g, 1e-8).unwrap().holds);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = gaussian(a.rows() + 2, a.rows(), &mut rng);
        let hf = &h * f.as_nalgebra() * h.transpose();
        let hg = &h * g.as_nalgebra() * h.transpose();
        let conj = loewner_leq(
            &DenseMatrix::from_nalgebra((&hf + hf.transpose()) * 0.5).unwrap(),
            &DenseMatrix::from_nalgebra((&hg + hg.transpose()) * 0.5).unwrap(),
            1e-8,
        ).unwrap();
        prop_assert!(conj.holds, "{conj:?}");
    }

    #[test]
    fn ridge_shrinks_classical((a, k) in instance()) {
        let ridge = ridge_leverage_scores(&a, k).unwrap();
        let classical = classical_leverage_scores(&a).unwrap();
        for (r, c) in ridge.scores.iter().zip(&classical.scores) {
            prop_assert!(*r <= c + 1e-10);
        }
    }

    #[test]
    fn score_sum_between_k_and_2k((a, k) in instance()) {
        let f = svd(&a).unwrap();
        let split = score_sum_split(&f, k).unwrap();
        let total = ridge_leverage_scores(&a, k).unwrap().total;
        let kf = k as f64;
        prop_assert!(total <= 2.0 * kf + 1e-8);
        prop_assert!(total >= kf - 1e-8);
        prop_assert!((split.total() - total).abs() <= 1e-10 * total);
        prop_assert!(split.head <= kf + 1e-12 && split.tail <= kf + 1e-8);
    }

    #[test]
    fn scale_invariance((a, k) in instance(), c in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64]) {
        let s = ridge_leverage_scores(&a, k).unwrap();
        let t = ridge_leverage_scores(&a.scaled(c), k).unwrap();
        for (x, y) in s.scores.iter().zip(&t.scores) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn permutation_equivariance((a, k) in instance(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..a.cols()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let s = ridge_leverage_scores(&a, k).unwrap();
        let t = ridge_leverage_scores(&a.select_columns(&perm), k).unwrap();
        for (j, &p) in perm.iter().enumerate() {
            prop_assert!((t.scores[j] - s.scores[p]).abs() <= 1e-10);
        }
        // Selection maps back to the same column set when no tie sits at the threshold.
        let sel = drls_select(&a, k, 0.2).unwrap();
        let sel_p = drls_select(&a.select_columns(&perm), k, 0.2).unwrap();
        if !sel.tie_at_threshold && !sel_p.tie_at_threshold && !sel.padded() {
            let mut back: Vec<usize> = sel_p.theta.iter().map(|&j| perm[j]).collect();
            back.sort_unstable();
            let mut orig = sel.theta.clone();
            orig.sort_unstable();
            prop_assert_eq!(back, orig);
        }
    }

    #[test]
    fn selection_is_deterministic((a, k) in instance(), eps in 0.01..0.9f64) {
        let s1 = drls_select(&a, k, eps).unwrap();
        let s2 = drls_select(&a.clone(), k, eps).unwrap();
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn stopping_rule_is_tight((a, k) in instance(), eps in 0.01..0.9f64) {
        let sel = drls_select(&a, k, eps).unwrap();
        let kept: f64 = sel.theta.iter().map(|&i| sel.scores.scores[i]).sum();
        prop_assert!((sel.residual - (sel.scores.total - kept)).abs() <= 1e-10);
        prop_assert!(sel.residual < eps);
        let unpadded = sel.stopped_at;
        if unpadded >= 1 && unpadded <= sel.theta.len() {
            let without_last: f64 = sel.theta[..unpadded - 1].iter().map(|&i| sel.scores.scores[i]).sum();
            prop_assert!(without_last <= sel.scores.total - eps + 1e-12);
        }
    }

    #[test]
    fn tolerance_monotonicity(scores in prop::collection::vec(0.0..1.0f64, 3..60), e1 in 0.01..0.9f64, e2 in 0.01..0.9f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = select_from_scores(&scores, 1, lo).unwrap();
        let b = select_from_scores(&scores, 1, hi).unwrap();
        prop_assert!(a.theta.len() >= b.theta.len());
        prop_assert_eq!(&a.theta[..b.theta.len()], &b.theta[..]);
    }

    #[test]
    fn spectral_and_two_sided_agree((a, k) in instance(), eps in 0.01..0.9f64) {
        let sel = drls_select(&a, k, eps).unwrap();
        let spectral = check_spectral(&a, &sel).unwrap();
        let two_sided = check_two_sided(&a, &sel.c, k, eps).unwrap();
        prop_assert!(spectral.passed, "{spectral:?}");
        prop_assert!(two_sided.passed, "{two_sided:?}");
    }

    #[test]
    fn ridge_fit_solves_normal_equations((a, k) in instance(), seed in any::<u64>()) {
        let x: Vec<f64> = (0..a.cols()).map(|i| ((i as f64) * 0.7 + seed as f64 % 5.0).sin()).collect();
        let y = simulate_linear(&a, &x, 0.5, seed).unwrap();
        let model = ridge_fit(&a, &y, k).unwrap();
        prop_assert!(model.normal_equation_residual(&y) <= 1e-8);
    }

    #[test]
    fn risk_bound_in_range((a, k) in instance(), seed in any::<u64>(), sigma_sq in prop::sample::select(vec![1e-3, 1.0, 1e3])) {
        let sel = drls_select(&a, k, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..a.cols()).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let report = check_risk_bound(&a, &sel, &x, sigma_sq).unwrap();
        prop_assert!(report.in_range());
        prop_assert!(report.passed, "{report:?}");
    }

    #[test]
    fn checkers_are_read_only((a, k) in instance()) {
        let sel = drls_select(&a, k, 0.1).unwrap();
        let (a0, sel0) = (a.clone(), sel.clone());
        let r1 = check_spectral(&a, &sel).unwrap();
        let r2 = check_spectral(&a, &sel).unwrap();
        prop_assert_eq!(r1, r2);
        prop_assert_eq!(a, a0);
        prop_assert_eq!(sel, sel0);
    }
}

#[test]
fn haar_mean_approaches_scaled_identity() {
    for n in [3usize, 5, 8] {
        for k in 1..n {
            let mut mean = DMatrix::zeros(n, n);
            for seed in 0..500u64 {
                let x = haar_projection(n, k, seed * 31 + k as u64).unwrap();
                assert!((x.as_nalgebra().trace() - k as f64).abs() <= 1e-12);
                mean += x.as_nalgebra();
            }
            mean /= 500.0;
            let target = DMatrix::<f64>::identity(n, n) * (k as f64 / n as f64);
            let dev = (mean - target).amax();
            assert!(dev <= 0.1, "n={n} k={k} max deviation {dev}");
        }
    }
}

#[test]
fn column_count_grows_linearly_in_k() {
    let a = random_with_spectrum(40, 300, SpectrumProfile::PowerLaw(2.0), 7).unwrap();
    let count = |k| drls_select(&a, k, 0.1).unwrap().len() as f64;
    let c0 = count(2) / 2.0;
    for k in [4usize, 8] {
        let m = count(k);
        assert!(m <= 1.5 * c0 * k as f64, "k={k}: {m} columns, c0={c0}");
    }
}
