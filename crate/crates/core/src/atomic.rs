//! Atomic sets and their three core computations: gauge evaluation, polar
//! gauge evaluation, and linear maximization (support) over the set.
//!
//! A gauge is `gamma_C(x) = inf { l >= 0 : x in l*C }`, taken here with
//! respect to the convex hull of the set and the origin, so it is finite
//! exactly on the cone generated by the hull. The polar gauge is
//! `gamma_C°(y) = sup_{x in C} (x^T y)_+`, and the two satisfy
//! `x^T y <= gamma_C(x) * gamma_C°(y)` whenever both are finite.
//!
//! [`build_relaxation`] emits, for each set `U`, the semidefinite outer
//! approximation `C_U` of the lifted set `{u u^T : u in U}` used by the
//! relaxation and rounding machinery: a list of conic constraints on a
//! symmetric matrix whose rank-one feasible points are exactly the lifts of
//! atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    conjugate_exponent, lp_norm, sym_eig, vec_dot, vec_norm2, DenseMatrix, RngState,
};

/// A structured set of admissible factors.
///
/// All kinds contain the origin in their convex hull, so gauges below are
/// genuine gauges of `hull(U ∪ {0})`:
///
/// * `L2Ball`, `L1Ball`, `LinfBall`, `LpBall`: unit norm balls,
/// * `Simplex`: `{x >= 0, sum_i x_i <= 1}`,
/// * `Binary01`: binary vectors `{0,1}^n`, hull `[0,1]^n`,
/// * `SparseCoding`: the elastic-net style set whose gauge squared is
///   `nu*||x||_2^2 + (1-nu)*||x||_1^2`,
/// * `NonnegLpBall`: `l_p` ball intersected with the nonnegative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AtomicSet {
    L2Ball { dim: usize },
    L1Ball { dim: usize },
    LinfBall { dim: usize },
    LpBall { dim: usize, p: f64 },
    Simplex { dim: usize },
    Binary01 { dim: usize },
    SparseCoding { dim: usize, nu: f64 },
    NonnegLpBall { dim: usize, p: f64 },
}

impl AtomicSet {
    pub fn dim(&self) -> usize {
        match *self {
            AtomicSet::L2Ball { dim }
            | AtomicSet::L1Ball { dim }
            | AtomicSet::LinfBall { dim }
            | AtomicSet::LpBall { dim, .. }
            | AtomicSet::Simplex { dim }
            | AtomicSet::Binary01 { dim }
            | AtomicSet::SparseCoding { dim, .. }
            | AtomicSet::NonnegLpBall { dim, .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument("atomic set with dim 0".into()));
        }
        match *self {
            AtomicSet::LpBall { p, .. } | AtomicSet::NonnegLpBall { p, .. } => {
                if !(p >= 1.0) {
                    return Err(Error::InvalidArgument(format!("lp exponent p = {p} < 1")));
                }
            }
            AtomicSet::SparseCoding { nu, .. } => {
                if !(0.0..=1.0).contains(&nu) {
                    return Err(Error::InvalidArgument(format!("sparse coding nu = {nu}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Sets whose atoms live in the nonnegative orthant (gauge +inf outside).
    pub fn nonneg_domain(&self) -> bool {
        matches!(
            self,
            AtomicSet::Simplex { .. }
                | AtomicSet::Binary01 { .. }
                | AtomicSet::NonnegLpBall { .. }
        )
    }

    /// The norm exponent when this set is a (possibly one-sided) lp ball.
    pub fn lp_exponent(&self) -> Option<f64> {
        match *self {
            AtomicSet::L2Ball { .. } => Some(2.0),
            AtomicSet::L1Ball { .. } => Some(1.0),
            AtomicSet::LinfBall { .. } => Some(f64::INFINITY),
            AtomicSet::LpBall { p, .. } | AtomicSet::NonnegLpBall { p, .. } => Some(p),
            _ => None,
        }
    }
}

impl std::fmt::Display for AtomicSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            AtomicSet::L2Ball { dim } => write!(f, "l2-ball(n={dim})"),
            AtomicSet::L1Ball { dim } => write!(f, "l1-ball(n={dim})"),
            AtomicSet::LinfBall { dim } => write!(f, "linf-ball(n={dim})"),
            AtomicSet::LpBall { dim, p } => write!(f, "lp-ball(n={dim}, p={p})"),
            AtomicSet::Simplex { dim } => write!(f, "simplex(n={dim})"),
            AtomicSet::Binary01 { dim } => write!(f, "binary01(n={dim})"),
            AtomicSet::SparseCoding { dim, nu } => write!(f, "sparse-coding(n={dim}, nu={nu})"),
            AtomicSet::NonnegLpBall { dim, p } => write!(f, "nonneg-lp-ball(n={dim}, p={p})"),
        }
    }
}

/// A gauge evaluation: finite, or +inf when the argument lies outside the
/// cone generated by the set. Infinity is an explicit variant, never a
/// large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeValue {
    Finite(f64),
    Infinite,
}

impl GaugeValue {
    pub fn finite(v: f64) -> Self {
        debug_assert!(v >= 0.0 && v.is_finite());
        GaugeValue::Finite(v)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GaugeValue::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            GaugeValue::Finite(v) => Some(v),
            GaugeValue::Infinite => None,
        }
    }

    /// The value as f64, +inf for the infinite variant.
    pub fn to_f64(&self) -> f64 {
        match *self {
            GaugeValue::Finite(v) => v,
            GaugeValue::Infinite => f64::INFINITY,
        }
    }
}

fn check_dim(set: &AtomicSet, len: usize) -> Result<()> {
    if set.dim() != len {
        return Err(Error::DimensionMismatch(format!(
            "{set} applied to vector of length {len}"
        )));
    }
    Ok(())
}

fn all_nonneg(x: &[f64]) -> bool {
    x.iter().all(|&v| v >= 0.0)
}

/// Gauge of `hull(U ∪ {0})` at `x`.
pub fn gauge_eval(set: &AtomicSet, x: &[f64]) -> Result<GaugeValue> {
    check_dim(set, x.len())?;
    let g = match *set {
        AtomicSet::L2Ball { .. } => GaugeValue::finite(vec_norm2(x)),
        AtomicSet::L1Ball { .. } => GaugeValue::finite(lp_norm(x, 1.0)),
        AtomicSet::LinfBall { .. } => GaugeValue::finite(lp_norm(x, f64::INFINITY)),
        AtomicSet::LpBall { p, .. } => GaugeValue::finite(lp_norm(x, p)),
        AtomicSet::Simplex { .. } => {
            if all_nonneg(x) {
                GaugeValue::finite(x.iter().sum())
            } else {
                GaugeValue::Infinite
            }
        }
        AtomicSet::Binary01 { .. } => {
            if all_nonneg(x) {
                GaugeValue::finite(x.iter().fold(0.0f64, |m, &v| m.max(v)))
            } else {
                GaugeValue::Infinite
            }
        }
        AtomicSet::SparseCoding { nu, .. } => {
            let l2 = vec_norm2(x);
            let l1 = lp_norm(x, 1.0);
            GaugeValue::finite((nu * l2 * l2 + (1.0 - nu) * l1 * l1).sqrt())
        }
        AtomicSet::NonnegLpBall { p, .. } => {
            if all_nonneg(x) {
                GaugeValue::finite(lp_norm(x, p))
            } else {
                GaugeValue::Infinite
            }
        }
    };
    Ok(g)
}

/// Polar gauge `sup_{x in U} (x^T y)_+`.
pub fn polar_gauge_eval(set: &AtomicSet, y: &[f64]) -> Result<GaugeValue> {
    check_dim(set, y.len())?;
    let v = match *set {
        AtomicSet::L2Ball { .. } => vec_norm2(y),
        AtomicSet::L1Ball { .. } => lp_norm(y, f64::INFINITY),
        AtomicSet::LinfBall { .. } => lp_norm(y, 1.0),
        AtomicSet::LpBall { p, .. } => lp_norm(y, conjugate_exponent(p)),
        AtomicSet::Simplex { .. } => y.iter().fold(0.0f64, |m, &v| m.max(v)).max(0.0),
        AtomicSet::Binary01 { .. } => y.iter().map(|&v| v.max(0.0)).sum(),
        AtomicSet::SparseCoding { nu, .. } => sparse_coding_polar(y, nu).1,
        AtomicSet::NonnegLpBall { p, .. } => {
            let pos: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
            lp_norm(&pos, conjugate_exponent(p))
        }
    };
    Ok(GaugeValue::finite(v))
}

/// Maximizer of `x^T y` over the set together with the attained value.
#[derive(Debug, Clone)]
pub struct Support {
    pub atom: Vec<f64>,
    pub value: f64,
}

/// `argmax_{x in U} x^T y`. Coordinates that do not affect the maximum
/// (`y_i = 0` for box-like sets) are set to zero, so outputs are
/// deterministic; among tied coordinates of equal |y| the lowest index wins.
pub fn support_argmax(set: &AtomicSet, y: &[f64]) -> Result<Support> {
    check_dim(set, y.len())?;
    let n = y.len();
    let sup = match *set {
        AtomicSet::L2Ball { .. } => {
            let nrm = vec_norm2(y);
            if nrm == 0.0 {
                Support { atom: vec![0.0; n], value: 0.0 }
            } else {
                Support { atom: y.iter().map(|&v| v / nrm).collect(), value: nrm }
            }
        }
        AtomicSet::L1Ball { .. } => {
            let mut best = 0usize;
            for i in 1..n {
                if y[i].abs() > y[best].abs() {
                    best = i;
                }
            }
            let mut atom = vec![0.0; n];
            if y[best] != 0.0 {
                atom[best] = y[best].signum();
            }
            Support { atom, value: y[best].abs() }
        }
        AtomicSet::LinfBall { .. } => {
            let atom: Vec<f64> = y
                .iter()
                .map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
                .collect();
            Support { value: lp_norm(y, 1.0), atom }
        }
        AtomicSet::LpBall { p, .. } => lp_support(y, p, false),
        AtomicSet::Simplex { .. } => {
            let mut best = 0usize;
            for i in 1..n {
                if y[i] > y[best] {
                    best = i;
                }
            }
            let mut atom = vec![0.0; n];
            if y[best] > 0.0 {
                atom[best] = 1.0;
            }
            Support { atom, value: y[best].max(0.0) }
        }
        AtomicSet::Binary01 { .. } => {
            let atom: Vec<f64> = y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
            let value = y.iter().map(|&v| v.max(0.0)).sum();
            Support { atom, value }
        }
        AtomicSet::SparseCoding { nu, .. } => {
            let (atom, value) = sparse_coding_polar(y, nu);
            Support { atom, value }
        }
        AtomicSet::NonnegLpBall { p, .. } => {
            let pos: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
            lp_support(&pos, p, true)
        }
    };
    Ok(sup)
}

/// Support over the lp ball: `u_i = sign(y_i) (|y_i| / ||y||_q)^(q/p)`.
/// `one_sided` restricts to the nonnegative orthant (the input must already
/// be the positive part).
fn lp_support(y: &[f64], p: f64, one_sided: bool) -> Support {
    let n = y.len();
    if p == 1.0 {
        // Extreme point: signed (or plain) basis vector of the largest entry.
        let mut best = 0usize;
        for i in 1..n {
            if y[i].abs() > y[best].abs() {
                best = i;
            }
        }
        let mut atom = vec![0.0; n];
        if y[best] != 0.0 {
            atom[best] = if one_sided { 1.0 } else { y[best].signum() };
        }
        return Support { atom, value: y[best].abs() };
    }
    if p.is_infinite() {
        let atom: Vec<f64> = y
            .iter()
            .map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 && !one_sided { -1.0 } else { 0.0 })
            .collect();
        return Support { value: vec_dot(&atom, y), atom };
    }
    let q = conjugate_exponent(p);
    let qnorm = lp_norm(y, q);
    if qnorm == 0.0 {
        return Support { atom: vec![0.0; n], value: 0.0 };
    }
    let atom: Vec<f64> = y
        .iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                v.signum() * (v.abs() / qnorm).powf(q / p)
            }
        })
        .collect();
    Support { value: qnorm, atom }
}

/// Polar gauge and its maximizer for the sparse-coding set, through the
/// diagonal representation of the squared gauge: with weights `eta >= 0`,
/// `sum eta <= 1`,
///
///   gamma(x)^2 = inf_eta sum_i x_i^2 * (nu + (1-nu)/eta_i),
///
/// so the squared polar is `sup_eta sum_i y_i^2 * eta_i/(nu*eta_i + 1-nu)`,
/// a concave problem whose optimality condition is one-dimensional in the
/// multiplier of `sum eta <= 1`; that scalar is bisected to 1e-10 relative
/// tolerance.
fn sparse_coding_polar(y: &[f64], nu: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    if y.iter().all(|&v| v == 0.0) {
        return (vec![0.0; n], 0.0);
    }
    if nu >= 1.0 {
        let nrm = vec_norm2(y);
        return (y.iter().map(|&v| v / nrm).collect(), nrm);
    }
    if nu <= 0.0 {
        let s = lp_support(y, 1.0, false);
        return (s.atom, s.value);
    }

    // eta_i(mu) = max(0, (|y_i| sqrt((1-nu)/mu) - (1-nu)) / nu), decreasing
    // in mu; bisect sum_i eta_i(mu) = 1.
    let ymax = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let eta_sum = |mu: f64| -> f64 {
        let root = ((1.0 - nu) / mu).sqrt();
        y.iter()
            .map(|&v| ((v.abs() * root - (1.0 - nu)) / nu).max(0.0))
            .sum()
    };
    let mut hi = ymax * ymax / (1.0 - nu);
    let mut lo = hi * 1e-32;
    // Guard: grow the bracket if even the lower end has sum < 1 (possible
    // for very sparse y where a single eta should absorb all the mass).
    while eta_sum(lo) < 1.0 && lo > f64::MIN_POSITIVE {
        lo *= 1e-4;
    }
    for _ in 0..200 {
        if (hi - lo) <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if eta_sum(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let root = ((1.0 - nu) / mu).sqrt();
    let mut eta: Vec<f64> = y
        .iter()
        .map(|&v| ((v.abs() * root - (1.0 - nu)) / nu).max(0.0))
        .collect();
    let total: f64 = eta.iter().sum();
    if total > 0.0 {
        for e in &mut eta {
            *e /= total;
        }
    }
    let value = y
        .iter()
        .zip(&eta)
        .map(|(&v, &e)| v * v * e / (nu * e + 1.0 - nu))
        .sum::<f64>()
        .sqrt();

    // Maximizer: at the optimal weights the gauge agrees with the weighted
    // l2 norm, whose support point is zeta_i y_i / value.
    let mut atom: Vec<f64> = y
        .iter()
        .zip(&eta)
        .map(|(&v, &e)| {
            let zeta = e / (nu * e + 1.0 - nu);
            if value > 0.0 {
                zeta * v / value
            } else {
                0.0
            }
        })
        .collect();
    // The bisection is approximate; rescale so the atom is exactly feasible.
    let l2 = vec_norm2(&atom);
    let l1 = lp_norm(&atom, 1.0);
    let g = (nu * l2 * l2 + (1.0 - nu) * l1 * l1).sqrt();
    if g > 1.0 {
        for a in &mut atom {
            *a /= g;
        }
    }
    let attained = vec_dot(&atom, y);
    (atom, attained.max(0.0))
}

/// One conic constraint of a relaxation spec, over a symmetric matrix `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpecConstraint {
    /// `M >= 0` in the Loewner order.
    Psd,
    /// `tr M <= radius`.
    TraceBound { radius: f64 },
    /// Entrywise norm bound `||vec(M)||_p <= radius`.
    EntryNorm { p: f64, radius: f64 },
    /// `||diag(M)||_p <= radius`.
    DiagNorm { p: f64, radius: f64 },
    /// `M >= 0` elementwise.
    ElementwiseNonneg,
    /// `diag(M) <= upper` elementwise.
    DiagBox { upper: f64 },
    /// Schur lift `[[M, diag(M)], [diag(M)^T, 1]] >= 0`, i.e. `M >= m m^T`
    /// with `m = diag(M)`.
    SchurDiagLift,
    /// `nu * tr M + (1 - nu) * ||M||_1 <= radius`.
    MixedTraceL1 { nu: f64, radius: f64 },
}

/// The semidefinite outer approximation `C_U` of `{u u^T : u in U}` as a
/// list of conic constraints (one Table row per atomic set kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSpec {
    pub dim: usize,
    pub constraints: Vec<SpecConstraint>,
}

impl RelaxationSpec {
    /// Largest constraint violation of `m`; feasibility means `<= tol`.
    pub fn max_violation(&self, m: &DenseMatrix) -> Result<f64> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "spec dim {} vs matrix {}x{}",
                self.dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let v = match *c {
                SpecConstraint::Psd => {
                    let eig = sym_eig(m)?;
                    (-eig.values.last().copied().unwrap_or(0.0)).max(0.0)
                }
                SpecConstraint::TraceBound { radius } => (m.trace() - radius).max(0.0),
                SpecConstraint::EntryNorm { p, radius } => (lp_norm(m.data(), p) - radius).max(0.0),
                SpecConstraint::DiagNorm { p, radius } => {
                    (lp_norm(&m.diagonal(), p) - radius).max(0.0)
                }
                SpecConstraint::ElementwiseNonneg => {
                    m.data().iter().fold(0.0f64, |w, &x| w.max(-x))
                }
                SpecConstraint::DiagBox { upper } => {
                    m.diagonal().iter().fold(0.0f64, |w, &x| w.max(x - upper))
                }
                SpecConstraint::SchurDiagLift => {
                    let lift = schur_diag_lift(m);
                    let eig = sym_eig(&lift)?;
                    (-eig.values.last().copied().unwrap_or(0.0)).max(0.0)
                }
                SpecConstraint::MixedTraceL1 { nu, radius } => {
                    (nu * m.trace() + (1.0 - nu) * lp_norm(m.data(), 1.0) - radius).max(0.0)
                }
            };
            worst = worst.max(v);
        }
        Ok(worst)
    }

    pub fn is_feasible(&self, m: &DenseMatrix, tol: f64) -> Result<bool> {
        Ok(self.max_violation(m)? <= tol)
    }
}

/// `[[M, diag(M)], [diag(M)^T, 1]]`.
pub fn schur_diag_lift(m: &DenseMatrix) -> DenseMatrix {
    let n = m.rows();
    let mut lift = DenseMatrix::zeros(n + 1, n + 1);
    lift.set_block(0, 0, m);
    for i in 0..n {
        lift[(i, n)] = m[(i, i)];
        lift[(n, i)] = m[(i, i)];
    }
    lift[(n, n)] = 1.0;
    lift
}

/// The Table row of semidefinite constraints for a set `U`: a convex outer
/// approximation of `{u u^T : u in U}` whose rank-one points are exactly
/// those lifts.
pub fn build_relaxation(set: &AtomicSet) -> Result<RelaxationSpec> {
    set.validate()?;
    let dim = set.dim();
    let constraints = match *set {
        AtomicSet::L2Ball { .. } => vec![SpecConstraint::Psd, SpecConstraint::TraceBound { radius: 1.0 }],
        AtomicSet::L1Ball { .. } => vec![
            SpecConstraint::Psd,
            SpecConstraint::EntryNorm { p: 1.0, radius: 1.0 },
            SpecConstraint::TraceBound { radius: 1.0 },
        ],
        AtomicSet::LinfBall { .. } => vec![
            SpecConstraint::Psd,
            SpecConstraint::DiagNorm { p: f64::INFINITY, radius: 1.0 },
        ],
        AtomicSet::LpBall { p, .. } => lp_row(p),
        AtomicSet::Simplex { .. } => vec![
            SpecConstraint::Psd,
            SpecConstraint::EntryNorm { p: 1.0, radius: 1.0 },
            SpecConstraint::TraceBound { radius: 1.0 },
            SpecConstraint::ElementwiseNonneg,
        ],
        AtomicSet::Binary01 { .. } => vec![
            SpecConstraint::Psd,
            SpecConstraint::SchurDiagLift,
            SpecConstraint::ElementwiseNonneg,
            SpecConstraint::DiagBox { upper: 1.0 },
        ],
        AtomicSet::SparseCoding { nu, .. } => vec![
            SpecConstraint::Psd,
            SpecConstraint::MixedTraceL1 { nu, radius: 1.0 },
        ],
        AtomicSet::NonnegLpBall { p, .. } => {
            let mut row = lp_row(p);
            row.push(SpecConstraint::ElementwiseNonneg);
            row
        }
    };
    Ok(RelaxationSpec { dim, constraints })
}

fn lp_row(p: f64) -> Vec<SpecConstraint> {
    if p <= 2.0 {
        // For p = 2 the entrywise bound is redundant next to the trace
        // bound, so the canonical row is trace-only.
        if p == 2.0 {
            vec![SpecConstraint::Psd, SpecConstraint::TraceBound { radius: 1.0 }]
        } else {
            vec![
                SpecConstraint::Psd,
                SpecConstraint::EntryNorm { p, radius: 1.0 },
                SpecConstraint::TraceBound { radius: 1.0 },
            ]
        }
    } else {
        vec![SpecConstraint::Psd, SpecConstraint::DiagNorm { p: p / 2.0, radius: 1.0 }]
    }
}

/// Draw a random atom of the set: a binary vector for the 0/1 set, otherwise
/// a Gaussian (rectified onto the nonnegative domain where required) scaled
/// to unit gauge. Used by synthetic instance generators and tests.
pub fn sample_atom(set: &AtomicSet, rng: &mut RngState) -> Vec<f64> {
    let n = set.dim();
    match set {
        AtomicSet::Binary01 { .. } => {
            (0..n).map(|_| if rng.uniform() < 0.5 { 1.0 } else { 0.0 }).collect()
        }
        _ => {
            let mut w = rng.gaussian_vec(n);
            if set.nonneg_domain() {
                for x in &mut w {
                    *x = x.abs();
                }
            }
            let g = gauge_eval(set, &w).unwrap().to_f64();
            if g > 0.0 {
                for x in &mut w {
                    *x /= g;
                }
            }
            w
        }
    }
}
