//! Dense linear-algebra kernel.
//!
//! Everything here is real, dense and double precision. Decompositions are
//! delegated to `nalgebra`; this module fixes the conventions the rest of the
//! crate relies on: singular values sorted non-increasing, a scale-invariant
//! numerical-rank cutoff, and Loewner-order checks with a declared slack.

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, DrlsError, Result};

/// Real n×d matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    data: DMatrix<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("ragged rows"));
        }
        Self::from_row_major(n, d, rows.concat())
    }

    pub fn from_nalgebra(data: DMatrix<f64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            let (r, c) = (pos % data.nrows(), pos / data.nrows());
            return Err(invalid(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self { data })
    }

    /// Wraps a matrix produced by arithmetic on already-validated inputs.
    pub(crate) fn wrap(data: DMatrix<f64>) -> Self {
        debug_assert!(data.iter().all(|x| x.is_finite()));
        Self { data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.data.transpose().as_slice().to_vec()
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.data.transpose())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(invalid(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self::wrap(&self.data * &other.data))
    }

    /// A·Aᵀ, symmetrized so downstream eigensolvers see an exactly symmetric input.
    pub fn gram(&self) -> DMatrix<f64> {
        let g = &self.data * self.data.transpose();
        (&g + g.transpose()) * 0.5
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn spectral_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Columns in the order given; indices may repeat.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        Self::wrap(self.data.select_columns(indices))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::wrap(&self.data * factor)
    }

    /// Subtracts each column's mean.
    pub fn centered_columns(&self) -> Self {
        let mut out = self.data.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Self::wrap(out)
    }
}

/// Thin SVD, A = U·diag(σ)·Vᵀ, with p = min(rows, cols) triplets.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// n×p, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Non-increasing, length p.
    pub singular_values: Vec<f64>,
    /// d×p, orthonormal columns.
    pub v: DMatrix<f64>,
    pub numerical_rank: usize,
    pub rank_cutoff: f64,
}

impl SvdFactors {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    /// Singular values above the rank cutoff.
    pub fn significant(&self) -> &[f64] {
        &self.singular_values[..self.numerical_rank]
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.singular_values));
        &self.u * s * self.v.transpose()
    }

    /// Σ_{i>k} σ_i² over the numerically nonzero singular values; zero when k ≥ rank.
    pub(crate) fn tail_sq_saturating(&self, k: usize) -> f64 {
        self.significant().iter().skip(k).map(|s| s * s).sum()
    }

    /// (1/k)·‖M − M_k‖_F², the ridge regularizer paired with rank k.
    pub fn ridge_regularizer(&self, k: usize) -> f64 {
        self.tail_sq_saturating(k) / k as f64
    }
}

/// Thin SVD with singular values sorted non-increasing.
///
/// The numerical rank counts σ_i > max(rows, cols)·ε_mach·σ_max.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    svd_of(a.as_nalgebra())
}

pub(crate) fn svd_of(m: &DMatrix<f64>) -> Result<SvdFactors> {
    let (n, d) = m.shape();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite entries"));
    }
    let p = n.min(d);
    if p == 0 {
        return Ok(SvdFactors {
            u: DMatrix::zeros(n, 0),
            singular_values: Vec::new(),
            v: DMatrix::zeros(d, 0),
            numerical_rank: 0,
            rank_cutoff: 0.0,
        });
    }
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| DrlsError::Numerical("SVD did not converge".into()))?;
    let u_raw = dec.u.expect("u requested");
    let vt_raw = dec.v_t.expect("v_t requested");
    let s_raw = dec.singular_values;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(n, p);
    let mut v = DMatrix::zeros(d, p);
    let mut singular_values = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &vt_raw.row(src).transpose());
        singular_values.push(s_raw[src].max(0.0));
    }
    let smax = singular_values[0];
    let rank_cutoff = n.max(d) as f64 * f64::EPSILON * smax;
    let numerical_rank = singular_values
        .iter()
        .take_while(|&&s| s > rank_cutoff && s > 0.0)
        .count();
    Ok(SvdFactors {
        u,
        singular_values,
        v,
        numerical_rank,
        rank_cutoff,
    })
}

/// A_k = U_k Σ_k V_kᵀ.
pub fn rank_k_truncation(f: &SvdFactors, k: usize) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if k > f.numerical_rank {
        return Err(DrlsError::Rank {
            requested: k,
            available: f.numerical_rank,
        });
    }
    Ok(DenseMatrix::wrap(truncate(f, k)))
}

pub(crate) fn truncate(f: &SvdFactors, k: usize) -> DMatrix<f64> {
    let k = k.min(f.singular_values.len());
    let uk = f.u.columns(0, k);
    let vk = f.v.columns(0, k);
    let s = DMatrix::from_diagonal(&DVector::from_column_slice(&f.singular_values[..k]));
    uk * s * vk.transpose()
}

/// ‖A − A_k‖_F² = Σ_{i>k} σ_i².
pub fn tail_frobenius_sq(f: &SvdFactors, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let limit = f.rows().min(f.cols());
    if k > limit {
        return Err(DrlsError::Rank {
            requested: k,
            available: limit,
        });
    }
    Ok(f.tail_sq_saturating(k))
}

/// Moore–Penrose pseudoinverse V_r Σ_r⁻¹ U_rᵀ at the numerical rank r.
pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(a)?;
    Ok(DenseMatrix::wrap(pseudoinverse_from(&f)))
}

pub(crate) fn pseudoinverse_from(f: &SvdFactors) -> DMatrix<f64> {
    let r = f.numerical_rank;
    let mut vr = f.v.columns(0, r).into_owned();
    for (j, s) in f.significant().iter().enumerate() {
        vr.column_mut(j).scale_mut(1.0 / s);
    }
    vr * f.u.columns(0, r).transpose()
}

/// Outcome of a Loewner-order test f ⪯ g.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoewnerVerdict {
    pub holds: bool,
    /// λ_min(g − f); negative values witness a violation.
    pub min_eigenvalue: f64,
    /// max(‖f‖₂, ‖g‖₂, 1).
    pub scale: f64,
    /// Absolute slack used, tol·scale.
    pub tolerance: f64,
}

/// Tests f ⪯ g, i.e. λ_min(g − f) ≥ −tol·max(‖f‖₂, ‖g‖₂, 1).
pub fn loewner_leq(f: &DenseMatrix, g: &DenseMatrix, tol: f64) -> Result<LoewnerVerdict> {
    loewner_leq_raw(f.as_nalgebra(), g.as_nalgebra(), tol)
}

pub(crate) fn loewner_leq_raw(f: &DMatrix<f64>, g: &DMatrix<f64>, tol: f64) -> Result<LoewnerVerdict> {
    if !(tol >= 0.0) {
        return Err(invalid("tolerance must be nonnegative"));
    }
    if !f.is_square() || f.shape() != g.shape() {
        return Err(invalid(format!(
            "Loewner comparison needs equal square shapes, got {:?} and {:?}",
            f.shape(),
            g.shape()
        )));
    }
    let scale = symmetric_norm(f)?.max(symmetric_norm(g)?).max(1.0);
    let diff = g - f;
    let sym = (&diff + diff.transpose()) * 0.5;
    let min_eigenvalue = sym
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tolerance = tol * scale;
    Ok(LoewnerVerdict {
        holds: min_eigenvalue >= -tolerance,
        min_eigenvalue,
        scale,
        tolerance,
    })
}

/// Spectral norm of a symmetric matrix; rejects inputs that are not symmetric.
fn symmetric_norm(m: &DMatrix<f64>) -> Result<f64> {
    let magnitude = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * magnitude {
        return Err(invalid(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(sym
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs())))
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed n×n orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q multiplied by the signs of diag(R).
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// First k columns of a Haar orthogonal matrix.
pub fn haar_frame<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    haar_orthogonal(n, rng).columns(0, k).into_owned()
}

/// X = Q_k Q_kᵀ for Haar-random Q; deterministic in `seed`.
pub fn haar_projection(n: usize, k: usize, seed: u64) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(invalid("projection rank must be positive"));
    }
    if k > n {
        return Err(DrlsError::Rank {
            requested: k,
            available: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = haar_frame(n, k, &mut rng);
    Ok(DenseMatrix::wrap(&q * q.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::wrap(gaussian_matrix(rows, cols, &mut rng))
    }

    fn with_spectrum(n: usize, spectrum: &[f64], seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_orthogonal(n, &mut rng);
        let v = haar_orthogonal(n, &mut rng);
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(spectrum));
        DenseMatrix::wrap(u * s * v.transpose())
    }

    #[test]
    fn rejects_bad_shapes_and_non_finite() {
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_row_major(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![f64::INFINITY, 0.0]).is_err());
        let m = DenseMatrix::from_row_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn svd_identity_and_zero() {
        let f = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.singular_values, vec![1.0, 1.0, 1.0]);
        assert_eq!(f.numerical_rank, 3);

        let f = svd(&DenseMatrix::zeros(2, 4)).unwrap();
        assert_eq!(f.numerical_rank, 0);
        assert!(f.singular_values.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn svd_reconstructs_random_gaussian() {
        let a = random(5, 8, 7);
        let f = svd(&a).unwrap();
        let err = (f.reconstruct() - a.as_nalgebra()).norm() / a.as_nalgebra().norm();
        assert!(err < 1e-12, "relative reconstruction error {err}");
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let utu = f.u.transpose() * &f.u;
        let vtv = f.v.transpose() * &f.v;
        assert!((utu - DMatrix::identity(5, 5)).amax() < 1e-12);
        assert!((vtv - DMatrix::identity(5, 5)).amax() < 1e-12);
        assert_eq!(f.numerical_rank, 5);
    }

    #[test]
    fn truncation_of_diagonal() {
        let a = DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]).unwrap();
        let f = svd(&a).unwrap();
        let a2 = rank_k_truncation(&f, 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert!((a2.as_nalgebra() - expected).amax() < 1e-14);
        let full = rank_k_truncation(&f, 3).unwrap();
        assert!((full.as_nalgebra() - a.as_nalgebra()).amax() < 1e-14);
        assert!(matches!(
            rank_k_truncation(&f, 4),
            Err(DrlsError::Rank { requested: 4, available: 3 })
        ));
    }

    #[test]
    fn tail_of_constructed_spectrum() {
        let a = with_spectrum(6, &[5.0, 4.0, 3.0, 2.0, 1.0, 0.5], 11);
        let f = svd(&a).unwrap();
        let tail = tail_frobenius_sq(&f, 3).unwrap();
        assert!((tail - 5.25).abs() < 1e-12, "{tail}");
        let a3 = rank_k_truncation(&f, 3).unwrap();
        let resid = (a.as_nalgebra() - a3.as_nalgebra()).norm_squared();
        assert!((resid - 5.25).abs() < 1e-11);
        assert!((a.frobenius_norm_sq() - a3.frobenius_norm_sq() - tail).abs() < 1e-10);
        assert_eq!(tail_frobenius_sq(&f, 6).unwrap(), 0.0);
        assert!(tail_frobenius_sq(&f, 7).is_err());

        let z = svd(&DenseMatrix::zeros(3, 5)).unwrap();
        assert_eq!(tail_frobenius_sq(&z, 2).unwrap(), 0.0);
    }

    #[test]
    fn pseudoinverse_cases() {
        let p = pseudoinverse(&DenseMatrix::from_diagonal(&[2.0, 0.0]).unwrap()).unwrap();
        assert_eq!(p.to_row_major(), vec![0.5, 0.0, 0.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = DenseMatrix::wrap(haar_orthogonal(4, &mut rng));
        let qp = pseudoinverse(&q).unwrap();
        assert!((qp.as_nalgebra() - q.as_nalgebra().transpose()).amax() < 1e-12);

        let a = random(4, 7, 5);
        let ap = pseudoinverse(&a).unwrap();
        let (m, mp) = (a.as_nalgebra(), ap.as_nalgebra());
        let scale = m.norm();
        assert!((m * mp * m - m).norm() / scale < 1e-10);
        assert!((mp * m * mp - mp).norm() / mp.norm() < 1e-10);
        let amp = m * mp;
        let mpa = mp * m;
        assert!((&amp - amp.transpose()).amax() < 1e-10);
        assert!((&mpa - mpa.transpose()).amax() < 1e-10);
    }

    #[test]
    fn loewner_examples() {
        let i2 = DenseMatrix::identity(2);
        let two = i2.scaled(2.0);
        let v = loewner_leq(&i2, &two, 0.0).unwrap();
        assert!(v.holds);
        assert!((v.min_eigenvalue - 1.0).abs() < 1e-14);

        let f = DenseMatrix::from_diagonal(&[1.0, 3.0]).unwrap();
        let g = DenseMatrix::from_diagonal(&[2.0, 2.0]).unwrap();
        let v = loewner_leq(&f, &g, 1e-12).unwrap();
        assert!(!v.holds);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-14);

        let asym = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(loewner_leq(&asym, &i2, 1e-8).is_err());
        assert!(loewner_leq(&i2, &DenseMatrix::identity(3), 1e-8).is_err());
    }

    #[test]
    fn haar_projection_identities() {
        let x = haar_projection(3, 3, 99).unwrap();
        assert!((x.as_nalgebra() - DMatrix::identity(3, 3)).amax() < 1e-12);
        for k in 1..6 {
            let x = haar_projection(6, k, 1234 + k as u64).unwrap();
            let m = x.as_nalgebra();
            assert!((m * m - m).norm() < 1e-12);
            assert!((m.trace() - k as f64).abs() < 1e-12);
            assert!((m - m.transpose()).amax() < 1e-15);
        }
        let a = haar_projection(5, 2, 42).unwrap();
        let b = haar_projection(5, 2, 42).unwrap();
        assert_eq!(a.to_row_major(), b.to_row_major());
        assert!(haar_projection(3, 4, 0).is_err());
    }
}
