//! Dense numerical kernels: matrices, symmetric eigendecomposition, SVD,
//! positive-semidefinite projections, seeded Gaussian sampling and the
//! plain-text matrix format used by the command line tools.
//!
//! Everything here is self-contained dense linear algebra sized for the
//! problem scales the rest of the crate works at (a few hundred rows at
//! most); dimensions are checked against [`DIM_CAP`] and eigendecompositions
//! against [`JACOBI_CAP`].

mod eigen;
mod io;
mod matrix;
mod rng;

pub use eigen::{
    nuclear_norm, operator_norm, pinv_quadratic, psd_project, psd_project_floor, sym_eig, svd,
    Svd, SymEig,
};
pub use io::{matrix_from_csv_str, matrix_to_csv_string, read_matrix_csv, write_matrix_csv};
pub use matrix::DenseMatrix;
pub use rng::RngState;

/// Hard cap on matrix dimensions accepted by constructors.
pub const DIM_CAP: usize = 512;

/// Hard cap on the side length of symmetric eigendecompositions.
pub const JACOBI_CAP: usize = 200;

pub fn vec_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_norm2(a: &[f64]) -> f64 {
    vec_dot(a, a).sqrt()
}

/// `l_p` norm for `p >= 1`, with `p = f64::INFINITY` meaning the max norm.
pub fn lp_norm(a: &[f64], p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
    if a.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }
    if p == 1.0 {
        return a.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return vec_norm2(a);
    }
    // Scale by the max to avoid overflow for large p.
    let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = a.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Holder conjugate exponent: `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    assert!(p >= 1.0);
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_norm_closed_forms() {
        let v = [3.0, -4.0];
        assert!((lp_norm(&v, 1.0) - 7.0).abs() < 1e-15);
        assert!((lp_norm(&v, 2.0) - 5.0).abs() < 1e-15);
        assert!((lp_norm(&v, f64::INFINITY) - 4.0).abs() < 1e-15);
        // p = 3 on (1, 2): (1 + 8)^(1/3).
        let w = [1.0, 2.0];
        assert!((lp_norm(&w, 3.0) - 9.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn conjugate_exponents_pair_up() {
        assert_eq!(conjugate_exponent(1.0), f64::INFINITY);
        assert_eq!(conjugate_exponent(f64::INFINITY), 1.0);
        assert!((conjugate_exponent(1.5) - 3.0).abs() < 1e-15);
        assert!((conjugate_exponent(2.0) - 2.0).abs() < 1e-15);
    }
}
