//! Symmetric eigendecomposition by cyclic Jacobi sweeps, thin SVD built on
//! top of it, and the spectral helpers (PSD projection, pseudo-inverse
//! quadratic forms, nuclear and operator norms) used throughout the crate.

use crate::error::{Error, Result};
use crate::numerics::{vec_dot, vec_norm2, DenseMatrix, JACOBI_CAP};

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// Columns of `vectors` are the corresponding orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEig {
    /// Reassemble `Q diag(f(values)) Q^T`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.vectors.rows();
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            let q = self.vectors.column(k);
            for i in 0..n {
                if q[i] == 0.0 {
                    continue;
                }
                let c = flam * q[i];
                for j in 0..n {
                    out[(i, j)] += c * q[j];
                }
            }
        }
        out.symmetrize();
        out
    }
}

/// Cyclic Jacobi eigendecomposition. The input must be square, symmetric to
/// roundoff, and at most [`JACOBI_CAP`] on a side.
pub fn sym_eig(m: &DenseMatrix) -> Result<SymEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("sym_eig on {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n > JACOBI_CAP {
        return Err(Error::DimCapExceeded { dim: n, cap: JACOBI_CAP });
    }
    let scale = 1.0 + m.max_abs();
    if !m.is_symmetric(1e-8 * scale) {
        return Err(Error::NotSymmetric(format!("asymmetry above {:e}", 1e-8 * scale)));
    }

    let mut a = m.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let frob = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let stop = 1e-15 * frob;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SymEig { values, vectors })
}

/// Thin SVD, singular values descending. `u` is `rows x k` and `v` is
/// `cols x k` with `k = min(rows, cols)`, both with orthonormal columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values.iter().filter(|&&s| s > rel_tol * top).count()
    }
}

/// Thin SVD via eigendecomposition of the Gram matrix on the smaller
/// dimension, followed by re-orthonormalization of the recovered side.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    let (rows, cols) = a.shape();
    // Gram matrix on the column side.
    let gram = a.transpose().matmul(a)?;
    let eig = sym_eig(&gram)?;
    let mut singular_values: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    // Rank floor at sqrt(eps): the Gram matrix cannot resolve singular
    // values below it, and keeping them injects O(sqrt(eps)) noise.
    let floor = ((rows.max(cols) as f64) * f64::EPSILON).sqrt() * smax;
    for s in &mut singular_values {
        if *s <= floor {
            *s = 0.0;
        }
    }

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for (k, &s) in singular_values.iter().enumerate() {
        if s > 0.0 {
            let vk = eig.vectors.column(k);
            let mut uk = a.matvec(&vk);
            for x in &mut uk {
                *x /= s;
            }
            orthonormalize_against(&mut uk, &u_cols);
            u_cols.push(uk);
        } else {
            u_cols.push(complete_orthonormal(rows, &u_cols));
        }
    }

    let u = DenseMatrix::from_fn(rows, cols, |i, j| u_cols[j][i]);
    Ok(Svd { u, singular_values, v: eig.vectors })
}

fn orthonormalize_against(x: &mut Vec<f64>, basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = vec_dot(x, b);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
    let nrm = vec_norm2(x);
    if nrm > 0.0 {
        for xi in x.iter_mut() {
            *xi /= nrm;
        }
    }
}

/// Deterministic orthonormal completion: the coordinate direction with the
/// largest residual against the current basis, orthonormalized.
fn complete_orthonormal(dim: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        orthonormalize_against(&mut e, basis);
        let mut resid = vec![0.0; dim];
        resid[j] = 1.0;
        for b in basis {
            let c = b[j];
            for (r, bi) in resid.iter_mut().zip(b) {
                *r -= c * bi;
            }
        }
        let score = vec_norm2(&resid);
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, e));
        }
    }
    best.expect("dim > 0").1
}

pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd(a)?.singular_values.iter().sum())
}

pub fn operator_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd(a)?.singular_values.first().copied().unwrap_or(0.0))
}

/// Euclidean projection onto the PSD cone: eigenvalues clipped at zero.
pub fn psd_project(m: &DenseMatrix) -> Result<DenseMatrix> {
    psd_project_floor(m, 0.0)
}

/// Projection onto `{A : A >= floor * I}` in the Loewner order.
pub fn psd_project_floor(m: &DenseMatrix, floor: f64) -> Result<DenseMatrix> {
    let eig = sym_eig(m)?;
    if eig.values.iter().all(|&l| l >= floor) {
        let mut out = m.clone();
        out.symmetrize();
        return Ok(out);
    }
    Ok(eig.recompose_with(|l| l.max(floor)))
}

/// Quadratic form `d^T M^+ d` through the pseudo-inverse of a symmetric PSD
/// matrix, plus whether `d` lies in the numerical range of `M`.
pub fn pinv_quadratic(m: &DenseMatrix, d: &[f64]) -> Result<(f64, bool)> {
    let eig = sym_eig(m)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let tol = (m.rows() as f64) * f64::EPSILON.sqrt() * top.max(f64::MIN_POSITIVE);
    let mut value = 0.0;
    let mut proj = vec![0.0; d.len()];
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= tol {
            continue;
        }
        let q = eig.vectors.column(k);
        let c = vec_dot(&q, d);
        value += c * c / lam;
        for (p, qi) in proj.iter_mut().zip(&q) {
            *p += c * qi;
        }
    }
    let resid: Vec<f64> = d.iter().zip(&proj).map(|(a, b)| a - b).collect();
    let in_range = vec_norm2(&resid) <= 1e-7 * (1.0 + vec_norm2(d));
    Ok((value, in_range))
}
