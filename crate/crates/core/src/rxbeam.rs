//! Receive-side evaluation: effective covariances, the MMSE baseband
//! combiner, the analog-combiner objective and end-to-end spectral efficiency.
//!
//! `log2 det(I + W^+ F W / noise)` depends on `W` only through its column
//! space: with `Q` an orthonormal basis of `range(W)` and `F = A A^H`, it
//! equals `log2 det(I + (Q^H A)^H (Q^H A) / noise)`. Every evaluation here goes
//! through that form, which stays finite and continuous for rank-deficient
//! combiners and keeps the solver inner loops small.

use std::fmt;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{
    column_basis, column_basis_real, ln_det_hermitian_pd, logdet2_eye_plus_gram, max_modulus, numerical_rank_real, pinv,
    real_cholesky, to_complex, ComplexMatrix, RealMatrix, DEFAULT_RANK_TOL,
};

/// Gram pivots below this fraction of the largest diagonal send the basis
/// computation through the SVD instead.
const GRAM_PIVOT_TOL: f64 = 1e-6;

/// Binary `N_r x N_RF` switch matrix, stored column-major (the `vec` order).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnalogCombiner {
    n_rx: usize,
    n_rf: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for AnalogCombiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalogCombiner({}x{}: ", self.n_rx, self.n_rf)?;
        for i in 0..self.n_rx {
            if i > 0 {
                f.write_str("/")?;
            }
            for j in 0..self.n_rf {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

impl AnalogCombiner {
    /// Builds a combiner from its vectorization without checking the rank.
    pub fn from_bits(n_rx: usize, n_rf: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), n_rx * n_rf, "bit vector length must be N_r * N_RF");
        AnalogCombiner { n_rx, n_rf, bits }
    }

    /// Builds a combiner and enforces `rank >= n_streams`.
    pub fn new(n_rx: usize, n_rf: usize, bits: Vec<bool>, n_streams: usize) -> Result<Self> {
        if bits.len() != n_rx * n_rf {
            return Err(Error::InvalidInput(format!(
                "expected {} bits, got {}",
                n_rx * n_rf,
                bits.len()
            )));
        }
        let w = AnalogCombiner { n_rx, n_rf, bits };
        let rank = w.rank();
        if rank < n_streams {
            return Err(Error::Infeasible(format!("rank {rank} < N_s = {n_streams}")));
        }
        Ok(w)
    }

    /// Row-major 0/1 literal, convenient in tests: `from_rows(&[&[1, 0], &[0, 1]])`.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let n_rx = rows.len();
        let n_rf = rows.first().map_or(0, |r| r.len());
        let mut bits = vec![false; n_rx * n_rf];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                bits[i + j * n_rx] = v != 0;
            }
        }
        AnalogCombiner { n_rx, n_rf, bits }
    }

    pub fn all_ones(n_rx: usize, n_rf: usize) -> Self {
        AnalogCombiner::from_bits(n_rx, n_rf, vec![true; n_rx * n_rf])
    }

    /// Column `j` is the unit vector `e_j`.
    pub fn identity_pattern(n_rx: usize, n_rf: usize) -> Self {
        let mut bits = vec![false; n_rx * n_rf];
        for j in 0..n_rf.min(n_rx) {
            bits[j + j * n_rx] = true;
        }
        AnalogCombiner::from_bits(n_rx, n_rf, bits)
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row + col * self.n_rx]
    }

    /// Copy with bit `idx` of the vectorization flipped.
    pub fn flipped(&self, idx: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[idx] = !bits[idx];
        AnalogCombiner {
            n_rx: self.n_rx,
            n_rf: self.n_rf,
            bits,
        }
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n_rx, self.n_rf, |i, j| if self.get(i, j) { 1.0 } else { 0.0 })
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        to_complex(&self.to_real())
    }

    pub fn rank(&self) -> usize {
        binary_rank(&self.to_real())
    }

    pub fn is_feasible(&self, n_streams: usize) -> bool {
        self.rank() >= n_streams
    }
}

/// Rank of a 0/1 matrix. Nonsingular integer Gram matrices have pivots far
/// above the Cholesky threshold, so the SVD only runs on rank-deficient input.
pub(crate) fn binary_rank(w: &RealMatrix) -> usize {
    let n = w.ncols();
    let mut g = gram(w);
    if real_cholesky(&mut g, n, GRAM_PIVOT_TOL) {
        n
    } else {
        numerical_rank_real(w, DEFAULT_RANK_TOL)
    }
}

fn gram(w: &RealMatrix) -> Vec<f64> {
    let n = w.ncols();
    let mut g = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            let v = w.column(i).dot(&w.column(j));
            g[i + j * n] = v;
            g[j + i * n] = v;
        }
    }
    g
}

/// Orthonormal basis of `range(W)` for real `W`.
pub(crate) fn range_basis(w: &RealMatrix) -> RealMatrix {
    let n = w.ncols();
    let mut l = gram(w);
    if !real_cholesky(&mut l, n, GRAM_PIVOT_TOL) {
        return column_basis_real(w, DEFAULT_RANK_TOL);
    }
    // Q = W L^{-T}: solve Q L^T = W row by row.
    let mut q = w.clone();
    for r in 0..w.nrows() {
        for j in 0..n {
            let mut acc = q[(r, j)];
            for p in 0..j {
                acc -= q[(r, p)] * l[j + p * n];
            }
            q[(r, j)] = acc / l[j + j * n];
        }
    }
    q
}

/// The per-subcarrier matrices `F_k = H_k F_k F_k^H H_k^H`, kept in factored
/// form `A_k A_k^H` with `A_k = H_k F_k`.
#[derive(Debug, Clone)]
pub struct EffectiveCovarianceSet {
    factors: Vec<ComplexMatrix>,
    n_rx: usize,
}

impl EffectiveCovarianceSet {
    pub fn from_factors(factors: Vec<ComplexMatrix>) -> Result<Self> {
        let n_rx = factors
            .first()
            .map(|a| a.nrows())
            .ok_or_else(|| Error::InvalidInput("need at least one subcarrier".into()))?;
        if factors.iter().any(|a| a.nrows() != n_rx) {
            return Err(Error::InvalidInput("factor row counts differ".into()));
        }
        Ok(EffectiveCovarianceSet { factors, n_rx })
    }

    /// Factors explicit Hermitian PSD matrices through their eigendecomposition.
    pub fn from_matrices(matrices: &[ComplexMatrix]) -> Result<Self> {
        let mut factors = Vec::with_capacity(matrices.len());
        for m in matrices {
            if !m.is_square() {
                return Err(Error::InvalidInput("covariance must be square".into()));
            }
            let norm = m.norm();
            let asymmetry = max_modulus(&(m - m.adjoint()));
            if asymmetry > 1e-9 * norm.max(1.0) {
                return Err(Error::NotHermitian { asymmetry });
            }
            let eig = SymmetricEigen::new((m + m.adjoint()).scale(0.5));
            let mut a = ComplexMatrix::zeros(m.nrows(), m.ncols());
            for (j, &l) in eig.eigenvalues.iter().enumerate() {
                if l < -1e-8 * norm {
                    return Err(Error::NotPsd { eigenvalue: l });
                }
                let s = Complex64::new(l.max(0.0).sqrt(), 0.0);
                a.set_column(j, &(eig.eigenvectors.column(j) * s));
            }
            factors.push(a);
        }
        Self::from_factors(factors)
    }

    pub fn n_subcarriers(&self) -> usize {
        self.factors.len()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn matrices(&self) -> Vec<ComplexMatrix> {
        self.factors.iter().map(|a| a * a.adjoint()).collect()
    }
}

pub fn effective_covariances(channels: &[ComplexMatrix], precoders: &[ComplexMatrix]) -> Result<EffectiveCovarianceSet> {
    if channels.len() != precoders.len() {
        return Err(Error::InvalidInput(format!(
            "{} channels but {} precoders",
            channels.len(),
            precoders.len()
        )));
    }
    let factors = channels
        .iter()
        .zip(precoders)
        .map(|(h, f)| {
            if h.ncols() != f.nrows() {
                return Err(Error::InvalidInput("channel/precoder dimensions disagree".into()));
            }
            Ok(h * f)
        })
        .collect::<Result<Vec<_>>>()?;
    EffectiveCovarianceSet::from_factors(factors)
}

/// Baseband combiner together with whether the pseudo-inverse fallback ran.
#[derive(Debug, Clone)]
pub struct DigitalCombiner {
    pub matrix: ComplexMatrix,
    pub pinv_fallback: bool,
}

/// MMSE baseband combiner `(J J^H + noise W^H W)^{-1} J` with `J = W^H H F`.
pub fn mmse_digital_combiner(
    w_rf: &ComplexMatrix,
    h: &ComplexMatrix,
    f: &ComplexMatrix,
    noise: f64,
) -> Result<DigitalCombiner> {
    if w_rf.nrows() != h.nrows() || h.ncols() != f.nrows() {
        return Err(Error::InvalidInput("combiner/channel/precoder dimensions disagree".into()));
    }
    let j = w_rf.adjoint() * h * f;
    let g = w_rf.adjoint() * w_rf;
    let x = &j * j.adjoint() + g.scale(noise);
    if crate::numkernel::numerical_rank(w_rf, DEFAULT_RANK_TOL)? == w_rf.ncols() {
        if let Some(chol) = x.clone().cholesky() {
            return Ok(DigitalCombiner {
                matrix: chol.solve(&j),
                pinv_fallback: false,
            });
        }
    }
    Ok(DigitalCombiner {
        matrix: pinv(&x, DEFAULT_RANK_TOL)? * j,
        pinv_fallback: true,
    })
}

fn check_noise(noise: f64) {
    assert!(noise > 0.0 && noise.is_finite(), "noise power must be positive");
}

/// `(1/K) sum_k log2 det(I + W^+ F_k W / noise)` for a real-valued `W`
/// (binary or relaxed to `[0, 1]`).
pub fn analog_objective(w: &RealMatrix, cov: &EffectiveCovarianceSet, noise: f64) -> f64 {
    check_noise(noise);
    assert_eq!(w.nrows(), cov.n_rx(), "combiner rows must equal N_r");
    let q = range_basis(w);
    objective_on_basis(&q, cov, noise)
}

pub fn combiner_objective(w: &AnalogCombiner, cov: &EffectiveCovarianceSet, noise: f64) -> f64 {
    analog_objective(&w.to_real(), cov, noise)
}

/// Mean log-det given an orthonormal real basis `Q` of the combiner range.
pub(crate) fn objective_on_basis(q: &RealMatrix, cov: &EffectiveCovarianceSet, noise: f64) -> f64 {
    let r = q.ncols();
    if r == 0 {
        return 0.0;
    }
    let inv_noise = 1.0 / noise;
    let mut c = Vec::new();
    let mut m = Vec::new();
    let mut total = 0.0;
    for a in cov.factors() {
        let (nr, ns) = a.shape();
        c.clear();
        c.resize(r * ns, Complex64::new(0.0, 0.0));
        // C = Q^T A, column-major r x ns
        for s in 0..ns {
            let a_col = a.column(s);
            for j in 0..r {
                let q_col = q.column(j);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..nr {
                    acc += a_col[i] * q_col[i];
                }
                c[j + s * r] = acc;
            }
        }
        // M = I + C^H C / noise, lower triangle
        m.clear();
        m.resize(ns * ns, Complex64::new(0.0, 0.0));
        for t in 0..ns {
            for s in t..ns {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..r {
                    acc += c[j + t * r] * c[j + s * r].conj();
                }
                m[s + t * ns] = acc * inv_noise;
            }
            m[t + t * ns] += 1.0;
        }
        total += ln_det_hermitian_pd(&mut m, ns).expect("I + PSD is positive definite");
    }
    total / (cov.n_subcarriers() as f64 * std::f64::consts::LN_2)
}

/// End-to-end `(1/K) sum_k log2 det(I + W_k^+ F_k W_k / noise)` with
/// `W_k = W_RF W_BB[k]`.
pub fn system_spectral_efficiency(
    w_rf: &ComplexMatrix,
    w_bb: &[ComplexMatrix],
    channels: &[ComplexMatrix],
    precoders: &[ComplexMatrix],
    noise: f64,
) -> f64 {
    check_noise(noise);
    let k = channels.len();
    assert!(k > 0 && w_bb.len() == k && precoders.len() == k, "per-subcarrier lists must match");
    let total: f64 = channels
        .iter()
        .zip(precoders)
        .zip(w_bb)
        .map(|((h, f), bb)| {
            let wk = w_rf * bb;
            if max_modulus(&wk) == 0.0 {
                return 0.0;
            }
            let q = column_basis(&wk, DEFAULT_RANK_TOL);
            logdet2_eye_plus_gram(&(q.adjoint() * (h * f)), 1.0 / noise)
        })
        .sum();
    total / k as f64
}

/// Designs the MMSE combiners for `w_rf` and evaluates the end-to-end SE.
pub fn mmse_spectral_efficiency(
    w_rf: &ComplexMatrix,
    channels: &[ComplexMatrix],
    precoders: &[ComplexMatrix],
    noise: f64,
) -> Result<(f64, Vec<DigitalCombiner>)> {
    let combiners = channels
        .iter()
        .zip(precoders)
        .map(|(h, f)| mmse_digital_combiner(w_rf, h, f, noise))
        .collect::<Result<Vec<_>>>()?;
    let bb: Vec<ComplexMatrix> = combiners.iter().map(|c| c.matrix.clone()).collect();
    let se = system_spectral_efficiency(w_rf, &bb, channels, precoders, noise);
    Ok((se, combiners))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelRealization, SystemConfig};
    use crate::numkernel::numerical_rank;
    use crate::txbeam::{dbf_spectral_efficiency, design_precoders};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag_cov(d: &[f64]) -> EffectiveCovarianceSet {
        let m = ComplexMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x))));
        EffectiveCovarianceSet::from_matrices(&[m]).unwrap()
    }

    /// Literal evaluation: explicit pseudo-inverse and a general determinant.
    fn objective_literal(w: &ComplexMatrix, mats: &[ComplexMatrix], noise: f64) -> f64 {
        let wp = pinv(w, DEFAULT_RANK_TOL).unwrap();
        let n = w.ncols();
        mats.iter()
            .map(|f| {
                let m = ComplexMatrix::identity(n, n) + (&wp * f * w).scale(1.0 / noise);
                m.determinant().re.log2()
            })
            .sum::<f64>()
            / mats.len() as f64
    }

    fn instance(seed: u64, cfg: &SystemConfig) -> (ChannelRealization, crate::txbeam::PrecoderSet, EffectiveCovarianceSet) {
        let real = ChannelRealization::generate(&mut ChaCha8Rng::seed_from_u64(seed), cfg);
        let pre = design_precoders(&real.subcarrier_channels, cfg).unwrap();
        let cov = effective_covariances(&real.subcarrier_channels, &pre.precoders).unwrap();
        (real, pre, cov)
    }

    fn cfg(n_rx: usize, n_rf: usize, ns: usize, k: usize) -> SystemConfig {
        SystemConfig {
            n_tx: 6,
            n_rx,
            n_rf,
            n_streams: ns,
            n_clusters: 4,
            ..SystemConfig::small_preset().with_subcarriers(k)
        }
    }

    #[test]
    fn combiner_layout_and_rank() {
        let w = AnalogCombiner::from_rows(&[&[1, 0], &[1, 1], &[0, 0]]);
        assert_eq!(w.bits(), &[true, true, false, false, true, false]);
        assert!(w.get(1, 1));
        assert_eq!(w.rank(), 2);
        assert_eq!(AnalogCombiner::all_ones(4, 2).rank(), 1);
        assert_eq!(AnalogCombiner::from_bits(3, 2, vec![false; 6]).rank(), 0);
        assert!(AnalogCombiner::new(4, 2, vec![true; 8], 2).is_err());
        assert!(AnalogCombiner::new(4, 2, vec![true; 8], 1).is_ok());
        assert_eq!(AnalogCombiner::identity_pattern(4, 3).rank(), 3);
    }

    #[test]
    fn effective_covariance_examples() {
        let cfg = cfg(4, 2, 1, 3);
        let (real, pre, cov) = instance(1, &cfg);
        for (k, m) in cov.matrices().iter().enumerate() {
            assert!(max_modulus(&(m - m.adjoint())) < 1e-9 * m.norm().max(1.0));
            assert!(numerical_rank(m, 1e-10).unwrap() <= 1);
            let hf = &real.subcarrier_channels[k] * &pre.precoders[k];
            assert_relative_eq!(m.trace().re, hf.norm_squared(), max_relative = 1e-12);
        }
        let zero = vec![ComplexMatrix::zeros(6, 1); 3];
        let cz = effective_covariances(&real.subcarrier_channels, &zero).unwrap();
        assert!(cz.matrices().iter().all(|m| max_modulus(&m) == 0.0));
    }

    #[test]
    fn from_matrices_rejects_non_psd() {
        let m = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-0.5)]));
        assert!(matches!(
            EffectiveCovarianceSet::from_matrices(&[m]),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn objective_hand_examples() {
        let cov = diag_cov(&[3.0, 1.0]);
        let w = AnalogCombiner::from_rows(&[&[1], &[0]]);
        assert_relative_eq!(combiner_objective(&w, &cov, 1.0), 2.0, epsilon = 1e-14);
        let w = AnalogCombiner::from_rows(&[&[1], &[1]]);
        assert_relative_eq!(combiner_objective(&w, &cov, 1.0), 3f64.log2(), epsilon = 1e-14);
        let w = AnalogCombiner::from_rows(&[&[0], &[1]]);
        assert_relative_eq!(combiner_objective(&w, &cov, 1.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn identity_combiner_gives_full_covariance_logdet() {
        let cfg = cfg(4, 4, 2, 5);
        let (_, _, cov) = instance(2, &cfg);
        let w = RealMatrix::identity(4, 4);
        let expected: f64 = cov
            .matrices()
            .iter()
            .map(|m| crate::numkernel::logdet2_eye_plus(m, 1.0).unwrap())
            .sum::<f64>()
            / 5.0;
        assert_relative_eq!(analog_objective(&w, &cov, 1.0), expected, max_relative = 1e-10);
    }

    #[test]
    fn objective_matches_literal_pinv_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..30 {
            let n_rx = rng.random_range(2..7);
            let n_rf = rng.random_range(1..=n_rx.min(3));
            let cfg = cfg(n_rx, n_rf, 1, 3);
            let (_, _, cov) = instance(trial, &cfg);
            let mats = cov.matrices();
            // binary, possibly rank deficient
            let bits: Vec<bool> = (0..n_rx * n_rf).map(|_| rng.random_bool(0.5)).collect();
            let w = AnalogCombiner::from_bits(n_rx, n_rf, bits);
            if w.rank() == 0 {
                continue;
            }
            let fast = combiner_objective(&w, &cov, 0.7);
            let slow = objective_literal(&w.to_complex(), &mats, 0.7);
            assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1.0), "{fast} vs {slow}");
            // relaxed
            let wr = RealMatrix::from_fn(n_rx, n_rf, |_, _| rng.random::<f64>());
            let fast = analog_objective(&wr, &cov, 0.7);
            let slow = objective_literal(&to_complex(&wr), &mats, 0.7);
            assert!((fast - slow).abs() <= 1e-8 * slow.abs().max(1.0), "{fast} vs {slow}");
        }
    }

    #[test]
    fn antenna_selection_matches_submatrix() {
        let cfg = cfg(5, 2, 2, 4);
        let (_, _, cov) = instance(8, &cfg);
        let w = AnalogCombiner::from_rows(&[&[0, 0], &[0, 1], &[0, 0], &[1, 0], &[0, 0]]);
        let expected: f64 = cov
            .matrices()
            .iter()
            .map(|m| {
                let sub = ComplexMatrix::from_fn(2, 2, |i, j| m[([3, 1][i], [3, 1][j])]);
                crate::numkernel::logdet2_eye_plus(&sub, 1.0).unwrap()
            })
            .sum::<f64>()
            / 4.0;
        assert_relative_eq!(combiner_objective(&w, &cov, 1.0), expected, max_relative = 1e-12);
    }

    #[test]
    fn objective_bounded_by_dbf() {
        let cfg = cfg(6, 2, 2, 6);
        for seed in 0..5 {
            let (real, pre, cov) = instance(seed, &cfg);
            let dbf = dbf_spectral_efficiency(&real.subcarrier_channels, &pre.precoders, 1.0);
            let w = AnalogCombiner::from_rows(&[&[1, 0], &[0, 1], &[1, 1], &[0, 0], &[1, 0], &[0, 1]]);
            assert!(combiner_objective(&w, &cov, 1.0) <= dbf + 1e-12);
        }
    }

    #[test]
    fn mmse_scalar_wiener_filter() {
        let w = ComplexMatrix::from_element(1, 1, c(1.0));
        let h = ComplexMatrix::from_element(1, 1, Complex64::new(0.3, -1.1));
        let f = ComplexMatrix::from_element(1, 1, Complex64::new(2.0, 0.5));
        let hf = h[(0, 0)] * f[(0, 0)];
        let out = mmse_digital_combiner(&w, &h, &f, 0.4).unwrap();
        let expected = hf / (hf.norm_sqr() + 0.4);
        assert!((out.matrix[(0, 0)] - expected).norm() < 1e-14);
        assert!(!out.pinv_fallback);

        let zero = ComplexMatrix::zeros(1, 1);
        let out = mmse_digital_combiner(&w, &zero, &f, 0.4).unwrap();
        assert_eq!(max_modulus(&out.matrix), 0.0);
    }

    #[test]
    fn mmse_flags_pinv_fallback_for_zero_column() {
        let cfg = cfg(4, 2, 1, 2);
        let (real, pre, cov) = instance(3, &cfg);
        let w = AnalogCombiner::from_rows(&[&[1, 0], &[1, 0], &[0, 0], &[1, 0]]);
        let (se, combs) = mmse_spectral_efficiency(&w.to_complex(), &real.subcarrier_channels, &pre.precoders, 1.0).unwrap();
        assert!(combs.iter().all(|c| c.pinv_fallback));
        assert_relative_eq!(se, combiner_objective(&w, &cov, 1.0), max_relative = 1e-8);
    }

    #[test]
    fn mmse_se_equals_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let n_rx = rng.random_range(2..9);
            let n_rf = rng.random_range(1..=n_rx.min(4));
            let ns = rng.random_range(1..=n_rf);
            let cfg = cfg(n_rx, n_rf, ns, 4);
            let (real, pre, cov) = instance(seed, &cfg);
            let w = loop {
                let bits: Vec<bool> = (0..n_rx * n_rf).map(|_| rng.random_bool(0.5)).collect();
                let w = AnalogCombiner::from_bits(n_rx, n_rf, bits);
                if w.is_feasible(ns) {
                    break w;
                }
            };
            let (se, _) = mmse_spectral_efficiency(&w.to_complex(), &real.subcarrier_channels, &pre.precoders, 1.0).unwrap();
            let f = combiner_objective(&w, &cov, 1.0);
            assert!((se - f).abs() <= 1e-8 * f.abs().max(1e-12), "{se} vs {f}");
        }
    }

    #[test]
    fn system_se_zero_baseband_is_zero() {
        let cfg = cfg(4, 2, 2, 3);
        let (real, pre, _) = instance(4, &cfg);
        let w = AnalogCombiner::identity_pattern(4, 2).to_complex();
        let bb = vec![ComplexMatrix::zeros(2, 2); 3];
        assert_eq!(system_spectral_efficiency(&w, &bb, &real.subcarrier_channels, &pre.precoders, 1.0), 0.0);
    }

    #[test]
    fn full_identity_hybrid_equals_digital() {
        let cfg = cfg(4, 4, 2, 5);
        let (real, pre, _) = instance(6, &cfg);
        let w = ComplexMatrix::identity(4, 4);
        let (se, _) = mmse_spectral_efficiency(&w, &real.subcarrier_channels, &pre.precoders, 1.0).unwrap();
        let dbf = dbf_spectral_efficiency(&real.subcarrier_channels, &pre.precoders, 1.0);
        assert_relative_eq!(se, dbf, max_relative = 1e-8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn objective_invariant_to_column_permutation(seed in 0u64..1000, shift in 1usize..3) {
                let cfg = cfg(5, 3, 2, 3);
                let (_, _, cov) = instance(seed, &cfg);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
                let w = RealMatrix::from_fn(5, 3, |_, _| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
                let perm = RealMatrix::from_fn(3, 3, |i, j| if (i + shift) % 3 == j { 1.0 } else { 0.0 });
                let a = analog_objective(&w, &cov, 1.0);
                let b = analog_objective(&(&w * perm), &cov, 1.0);
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }
    }
}
