//! Dense complex linear-algebra primitives.
//!
//! Decompositions are delegated to `nalgebra`; this module pins down the
//! conventions the rest of the crate relies on (descending singular values,
//! relative rank tolerances, log-determinants evaluated in the eigen or
//! Cholesky domain) and adds a few allocation-free kernels used in the
//! solver inner loops.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Relative singular-value cutoff used for ranks and pseudo-inverses.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-9;

/// Largest entry modulus, the complex analogue of `amax`.
pub fn max_modulus(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
const PSD_TOL: f64 = 1e-8;

/// Thin singular value decomposition `A = U diag(s) V^H`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.adjoint()
    }
}

fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// SVD with singular values sorted in descending order.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let dec = a.clone().svd(true, true);
    let u = dec.u.expect("U requested");
    let v_t = dec.v_t.expect("V^H requested");
    let s = dec.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let r = s.len();
    let mut us = ComplexMatrix::zeros(a.nrows(), r);
    let mut vs = ComplexMatrix::zeros(a.ncols(), r);
    let mut sorted = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v_t.row(src).adjoint());
        sorted.push(s[src]);
    }
    Ok(Svd {
        u: us,
        s: sorted,
        v: vs,
    })
}

fn cutoff(s: &[f64], tol: f64) -> f64 {
    tol * s.first().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudo-inverse; singular values at or below `tol * max(s)`
/// are treated as zero.
pub fn pinv(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if tol < 0.0 {
        return Err(Error::InvalidInput(format!("negative tolerance {tol}")));
    }
    let dec = svd(a)?;
    let cut = cutoff(&dec.s, tol);
    let mut out = ComplexMatrix::zeros(a.ncols(), a.nrows());
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj > cut && sj > 0.0 {
            let vj = dec.v.column(j);
            let uj = dec.u.column(j);
            out += (vj * uj.adjoint()).scale(1.0 / sj);
        }
    }
    Ok(out)
}

/// Number of singular values strictly above `tol * max(s)`.
pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> Result<usize> {
    let dec = svd(a)?;
    let cut = cutoff(&dec.s, tol);
    Ok(dec.s.iter().filter(|&&s| s > cut && s > 0.0).count())
}

/// Rank of a real matrix, same convention as [`numerical_rank`].
pub fn numerical_rank_real(a: &RealMatrix, tol: f64) -> usize {
    let s = a.clone().singular_values();
    let smax = s.iter().copied().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > tol * smax && v > 0.0).count()
}

/// `log2 det(I + scale * M)` for Hermitian positive semidefinite `M`.
pub fn logdet2_eye_plus(m: &ComplexMatrix, scale: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    ensure_finite(m)?;
    let norm = m.norm();
    let asymmetry = max_modulus(&(m - m.adjoint()));
    if asymmetry > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL * norm {
        return Err(Error::NotPsd {
            eigenvalue: min_eig,
        });
    }
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&l| (scale * l.max(0.0)).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2)
}

/// Natural log-determinant of a Hermitian positive definite matrix stored
/// column-major in `buf` (only the lower triangle is read). The buffer is
/// overwritten with the Cholesky factor. Returns `None` when a pivot is not
/// strictly positive.
pub(crate) fn ln_det_hermitian_pd(buf: &mut [Complex64], n: usize) -> Option<f64> {
    debug_assert_eq!(buf.len(), n * n);
    let mut ln_det = 0.0;
    for j in 0..n {
        let mut d = buf[j + j * n].re;
        for p in 0..j {
            d -= buf[j + p * n].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        buf[j + j * n] = Complex64::new(ljj, 0.0);
        ln_det += 2.0 * ljj.ln();
        for i in (j + 1)..n {
            let mut acc = buf[i + j * n];
            for p in 0..j {
                acc -= buf[i + p * n] * buf[j + p * n].conj();
            }
            buf[i + j * n] = acc / ljj;
        }
    }
    Some(ln_det)
}

/// In-place real Cholesky (lower, column-major). Fails when a pivot drops
/// below `rel_tol` times the largest diagonal entry.
pub(crate) fn real_cholesky(buf: &mut [f64], n: usize, rel_tol: f64) -> bool {
    let scale = (0..n).map(|i| buf[i + i * n]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return false;
    }
    for j in 0..n {
        let mut d = buf[j + j * n];
        for p in 0..j {
            d -= buf[j + p * n] * buf[j + p * n];
        }
        if !(d > rel_tol * scale) {
            return false;
        }
        let ljj = d.sqrt();
        buf[j + j * n] = ljj;
        for i in (j + 1)..n {
            let mut acc = buf[i + j * n];
            for p in 0..j {
                acc -= buf[i + p * n] * buf[j + p * n];
            }
            buf[i + j * n] = acc / ljj;
        }
    }
    true
}

/// Orthonormal basis for the column space of a real matrix, keeping
/// singular directions above `tol * max(s)`.
pub fn column_basis_real(w: &RealMatrix, tol: f64) -> RealMatrix {
    let dec = w.clone().svd(true, false);
    let u = dec.u.expect("U requested");
    let s = &dec.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len())
        .filter(|&j| s[j] > tol * smax && s[j] > 0.0)
        .collect();
    let mut q = RealMatrix::zeros(w.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &u.column(src));
    }
    q
}

/// Complex counterpart of [`column_basis_real`].
pub fn column_basis(w: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let dec = w.clone().svd(true, false);
    let u = dec.u.expect("U requested");
    let s = &dec.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len())
        .filter(|&j| s[j] > tol * smax && s[j] > 0.0)
        .collect();
    let mut q = ComplexMatrix::zeros(w.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &u.column(src));
    }
    q
}

/// `log2 det(I + scale * C^H C)`; PSD by construction so no checks are run.
pub(crate) fn logdet2_eye_plus_gram(c: &ComplexMatrix, scale: f64) -> f64 {
    let n = c.ncols();
    if n == 0 || c.nrows() == 0 {
        return 0.0;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in j..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..c.nrows() {
                acc += c[(r, i)] * c[(r, j)].conj();
            }
            buf[i + j * n] = acc * scale;
        }
        buf[j + j * n] += 1.0;
    }
    ln_det_hermitian_pd(&mut buf, n).expect("I + PSD is positive definite") / std::f64::consts::LN_2
}

pub fn to_complex(a: &RealMatrix) -> ComplexMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
