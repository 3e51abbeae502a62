//! Complex linear algebra helpers shared by the representation and operator
//! machinery: Hermitian eigendecomposition with deterministic orientation,
//! least-squares solvers, rank and span tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius distance to the adjoint.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

/// Largest entry modulus (max norm).
pub fn max_norm(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    hermiticity_defect(a) <= tol
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// ascending order with orthonormal eigenvector columns, each oriented so
/// that its first significant component is real positive.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let sym = (a + a.adjoint()).scale(0.5); // symmetrize away roundoff
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = se.eigenvectors.column(i).into_owned();
        vectors.set_column(k, &orient(&col));
    }
    (values, vectors)
}

/// Rephases a vector so its first component of significant magnitude is real
/// positive. Makes eigenbases reproducible across runs.
pub fn orient(v: &CVec) -> CVec {
    let mut phase = cr(1.0);
    for x in v.iter() {
        if x.norm() > 1e-8 {
            phase = x.conj() / x.norm();
            break;
        }
    }
    v.map(|x| x * phase)
}

/// Groups sorted eigenvalues into clusters within `tol`.
pub fn cluster_eigenvalues(values: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some((rep, idxs)) if (v - *rep).abs() <= tol => {
                idxs.push(i);
                // keep the representative at the running mean
                *rep = (*rep * (idxs.len() - 1) as f64 + v) / idxs.len() as f64;
            }
            _ => clusters.push((v, vec![i])),
        }
    }
    clusters
}

/// Numerical rank via eigenvalues of the Gram matrix `A† A`.
///
/// `tol` is a relative singular-value cutoff; the squared threshold is
/// floored above the eigensolver's noise level.
pub fn rank(a: &CMat, tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let gram = a.adjoint() * a;
    let (vals, _) = hermitian_eigen(&gram);
    let scale = vals.last().copied().unwrap_or(0.0).max(1e-300);
    let threshold = scale * (tol * tol).max(1e-13);
    vals.iter().filter(|&&v| v > threshold).count()
}

/// Does every column of `b` lie in the column span of `a`?
pub fn spans(a: &CMat, b: &CMat, tol: f64) -> bool {
    let ra = rank(a, tol);
    let mut aug = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    aug.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    aug.view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    rank(&aug, tol) == ra
}

/// Orthonormal basis of the column span (modified Gram-Schmidt with column
/// pivoting by residual norm).
pub fn orthonormal_span(a: &CMat, tol: f64) -> CMat {
    let n = a.nrows();
    let mut basis: Vec<CVec> = Vec::new();
    let mut cols: Vec<CVec> = (0..a.ncols()).map(|j| a.column(j).into_owned()).collect();
    loop {
        // residualize all remaining columns against the current basis
        for col in cols.iter_mut() {
            for b in &basis {
                let coef = b.dotc(col);
                *col -= b.scale(1.0) * coef;
            }
        }
        let best = cols
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm().partial_cmp(&y.1.norm()).unwrap());
        match best {
            Some((j, v)) if v.norm() > tol => {
                let u = orient(&v.unscale(v.norm()));
                basis.push(u);
                cols.swap_remove(j);
            }
            _ => break,
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Least-squares solve method. The two routes are algebraically independent
/// and are compared against each other in tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstsqMethod {
    /// Normal equations `A†A x = A†b`, solved through the eigen-pseudoinverse
    /// of the Gram matrix. Returns the minimum-norm solution.
    NormalEquations,
    /// Orthogonal factorization (SVD) of `A` itself.
    Svd,
}

/// Minimum-norm least-squares solution of `A x = b`.
/// Returns `(x, residual_norm)`.
pub fn lstsq(a: &CMat, b: &CVec, method: LstsqMethod, cutoff: f64) -> Result<(CVec, f64)> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "lstsq: {}x{} matrix vs rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let x = match method {
        LstsqMethod::NormalEquations => {
            let gram = a.adjoint() * a;
            let rhs = a.adjoint() * b;
            let (vals, vecs) = hermitian_eigen(&gram);
            let scale = vals.last().copied().unwrap_or(0.0).max(1e-300);
            // Gram eigenvalues carry eps-level noise relative to the scale;
            // directions below that are numerically null
            let threshold = scale * (cutoff * cutoff).max(1e-15);
            let mut x = CVec::zeros(a.ncols());
            for (k, &v) in vals.iter().enumerate() {
                if v > threshold {
                    let uk = vecs.column(k);
                    let coef = uk.dotc(&rhs) / cr(v);
                    x += uk.scale(1.0) * coef;
                }
            }
            x
        }
        LstsqMethod::Svd => {
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.max().max(cutoff);
            svd.solve(b, cutoff * smax)
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?
        }
    };
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}

/// Real least-squares built on the complex machinery (used for Hermitian-
/// parametrized systems where unknowns and equations are real).
pub fn lstsq_real(a: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> Result<(DVector<f64>, f64)> {
    let ac = a.map(cr);
    let bc = b.map(cr);
    let (x, res) = lstsq(&ac, &bc, LstsqMethod::NormalEquations, cutoff)?;
    Ok((x.map(|z| z.re), res))
}

/// Dimension of the nullspace of `A` (singular values below `tol`).
pub fn nullspace_dim(a: &CMat, tol: f64) -> usize {
    a.ncols() - rank(a, tol)
}
