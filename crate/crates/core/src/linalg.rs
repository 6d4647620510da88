//! Dense Hermitian helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CVector = DVector<Complex64>;
pub(crate) type CMatrix = DMatrix<Complex64>;

/// `Σ_j w_j f_j f_j*` for nonnegative weights (all ones when `weights` is `None`).
///
/// Sparse inputs (canonical basis vectors and the like) accumulate outer
/// products over their nonzero coordinates only; dense inputs go through two
/// real matrix products on the split real and imaginary parts. The result is
/// Hermitian bit for bit: the upper triangle is mirrored.
pub(crate) fn weighted_gram(n: usize, vectors: &[CVector], weights: Option<&[f64]>) -> CMatrix {
    let weight = |j: usize| weights.map_or(1.0, |w| w[j]);
    let nnz: usize = vectors
        .iter()
        .map(|f| f.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count())
        .sum();
    let mut s = CMatrix::zeros(n, n);
    if nnz * 8 <= n * vectors.len() {
        let mut support = Vec::with_capacity(n);
        for (j, f) in vectors.iter().enumerate() {
            let w = weight(j);
            support.clear();
            support.extend((0..n).filter(|&i| f[i].re != 0.0 || f[i].im != 0.0));
            for &a in &support {
                for &b in &support {
                    if a <= b {
                        s[(a, b)] += f[a] * f[b].conj() * w;
                    }
                }
            }
        }
    } else {
        let count = vectors.len();
        let mut re = DMatrix::<f64>::zeros(n, count);
        let mut im = DMatrix::<f64>::zeros(n, count);
        let mut has_im = false;
        for (j, f) in vectors.iter().enumerate() {
            let w = weight(j).sqrt();
            for i in 0..n {
                re[(i, j)] = f[i].re * w;
                im[(i, j)] = f[i].im * w;
                has_im |= f[i].im != 0.0;
            }
        }
        let mut real = &re * re.transpose();
        let mut imag = DMatrix::<f64>::zeros(n, n);
        if has_im {
            real += &im * im.transpose();
            imag = &im * re.transpose() - &re * im.transpose();
        }
        for b in 0..n {
            for a in 0..=b {
                s[(a, b)] = Complex64::new(real[(a, b)], imag[(a, b)]);
            }
        }
    }
    for b in 0..n {
        s[(b, b)].im = 0.0;
        for a in 0..b {
            s[(b, a)] = s[(a, b)].conj();
        }
    }
    s
}

/// Eigenvalues of a Hermitian matrix, ascending. Diagonal input skips the solver.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    let diagonal = (0..n).all(|b| (0..n).all(|a| a == b || m[(a, b)] == Complex64::new(0.0, 0.0)));
    let mut eig: Vec<f64> = if diagonal {
        (0..n).map(|i| m[(i, i)].re).collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    if eig.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("eigensolver returned a non-finite value".into()));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `⟨u, v⟩ = Σ_i u_i conj(v_i)`.
pub(crate) fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}
