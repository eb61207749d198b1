//! Semidefinite bounds on the factorization gauge and its polar, the
//! rounding schemes that turn relaxation witnesses into feasible atom
//! pairs, and the recovery of explicit factors from dual witnesses.
//!
//! The polar bound replaces rank-one lifts `u u^T`, `v v^T` by their
//! semidefinite surrogates `C_U`, `C_V` and maximizes the coupling
//! `tr(Y^T Z)` over stacked blocks `((M, Z), (Z^T, N)) >= 0`; when the
//! column side is the l2 ball this collapses to a single-block quadratic
//! maximization. The gauge bound is the mirrored perspective program with
//! the coupling block pinned to `X`, whose semidefinite multiplier yields
//! the dual pair `(Q, S)` certifying `||Q^{1/2} X S^{1/2}||_*` from below.

use crate::atomic::{build_relaxation, gauge_eval, support_argmax, AtomicSet, RelaxationSpec, SpecConstraint};
use crate::error::{Error, Result};
use crate::numerics::{nuclear_norm, psd_project, svd, sym_eig, DenseMatrix, RngState};
use crate::oracle::{sign_roundable, OracleResult, Strategy};
use crate::sdp::{solve_with, AdmmSettings, Bound, ConicProgram, Sense, SolveStatus};

/// Solver settings for the relaxations. Tighter than the solver defaults:
/// the sandwich bounds these programs feed are asserted to single-digit
/// multiples of 1e-6, so the conic solves must clear that comfortably.
/// The iteration cap is generous because degenerate instances enter a
/// long tail (still convergent) after the first few thousand iterations.
fn relaxation_settings() -> AdmmSettings {
    AdmmSettings { tolerance: 1e-9, max_iterations: 300_000, ..AdmmSettings::default() }
}

/// Upper bound on the polar gauge, with the semidefinite witnesses that
/// attain it.
#[derive(Clone, Debug)]
pub struct RelaxedPolarResult {
    pub value: f64,
    pub witness_m: DenseMatrix,
    pub witness_n: DenseMatrix,
    pub witness_z: DenseMatrix,
    pub status: SolveStatus,
}

impl RelaxedPolarResult {
    /// The witnesses assembled as `((M, Z), (Z^T, N))`. Positive
    /// semidefinite by construction up to roundoff.
    pub fn stacked_witness(&self) -> DenseMatrix {
        let n = self.witness_m.rows();
        let d = self.witness_n.rows();
        let mut t = DenseMatrix::zeros(n + d, n + d);
        t.set_block(0, 0, &self.witness_m);
        t.set_block(n, n, &self.witness_n);
        t.set_block(0, n, &self.witness_z);
        t.set_block(n, 0, &self.witness_z.transpose());
        t
    }
}

/// Lower bound on the gauge, with dual witnesses `(Q, S)` and the primal
/// blocks `(M, N)` of the perspective program.
#[derive(Clone, Debug)]
pub struct RelaxedGaugeResult {
    pub value: f64,
    pub witness_q: DenseMatrix,
    pub witness_s: DenseMatrix,
    pub recovered_m: DenseMatrix,
    pub recovered_n: DenseMatrix,
    pub status: SolveStatus,
}

impl RelaxedGaugeResult {
    /// The certified bound `||Q^{1/2} X S^{1/2}||_*` recomputed from the
    /// witnesses. Always a true lower bound on the gauge, independent of
    /// how well the conic solve converged.
    pub fn certified_value(&self, x: &DenseMatrix) -> Result<f64> {
        witness_pair_value(&self.witness_q, &self.witness_s, x)
    }
}

/// `||Q^{1/2} X S^{1/2}||_*` for symmetric PSD `Q`, `S`.
pub fn witness_pair_value(q: &DenseMatrix, s: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    if q.rows() != x.rows() || s.rows() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "witnesses are {}x{} and {}x{}, X is {}x{}",
            q.rows(),
            q.cols(),
            s.rows(),
            s.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let qh = sym_eig(q)?.recompose_with(|l| l.max(0.0).sqrt());
    let sh = sym_eig(s)?.recompose_with(|l| l.max(0.0).sqrt());
    nuclear_norm(&qh.matmul(x)?.matmul(&sh)?)
}

/// `max <C, M>` over `M` in the spec set, for symmetric PSD `C`. Trace-ball
/// and l1-ball rows have closed forms; everything else is a conic solve.
/// Returns the value, a maximizing `M`, and the solve status.
fn spec_max(spec: &RelaxationSpec, c: &DenseMatrix) -> Result<(f64, DenseMatrix, SolveStatus)> {
    if let Some((value, m)) = spec_max_closed(spec, c) {
        return Ok((value, m, SolveStatus::Solved));
    }
    let mut prog = ConicProgram::new(Sense::Maximize);
    let b = prog.add_block(spec.dim);
    prog.objective_trace(b, c)?;
    prog.apply_spec(b, 0, spec, Bound::Const(1.0))?;
    let sol = solve_with(&prog, &relaxation_settings())?;
    Ok((sol.objective, sol.block(b).clone(), sol.status))
}

/// Closed forms, both requiring `C >= 0` (true at every call site, where
/// `C` is a Gram matrix or has been projected onto the PSD cone):
/// over `{M >= 0, tr M <= 1}` the maximum is the top eigenvalue of `C`;
/// over `{M >= 0, ||M||_1 <= 1, tr M <= 1}` it is the largest diagonal
/// entry, since `<C, M> <= sum_ij |M_ij| sqrt(C_ii C_jj) <= max_i C_ii`,
/// attained at `M = e_i e_i^T` (which also survives an entrywise
/// nonnegativity constraint).
fn spec_max_closed(spec: &RelaxationSpec, c: &DenseMatrix) -> Option<(f64, DenseMatrix)> {
    let unit = |r: f64| (r - 1.0).abs() < 1e-12;
    let k = spec.dim;
    match spec.constraints.as_slice() {
        [SpecConstraint::Psd, SpecConstraint::TraceBound { radius }] if unit(*radius) => {
            let eig = sym_eig(c).ok()?;
            let lam = eig.values.first().copied().unwrap_or(0.0);
            if lam <= 0.0 {
                return Some((0.0, DenseMatrix::zeros(k, k)));
            }
            let top = eig.vectors.column(0);
            Some((lam, DenseMatrix::outer(&top, &top)))
        }
        [SpecConstraint::Psd, SpecConstraint::EntryNorm { p, radius: r1 }, SpecConstraint::TraceBound { radius: r2 }]
        | [SpecConstraint::Psd, SpecConstraint::EntryNorm { p, radius: r1 }, SpecConstraint::TraceBound { radius: r2 }, SpecConstraint::ElementwiseNonneg]
            if *p == 1.0 && unit(*r1) && unit(*r2) =>
        {
            let diag = c.diagonal();
            let (mut arg, mut best) = (0usize, 0.0f64);
            for (i, &v) in diag.iter().enumerate() {
                if v > best {
                    best = v;
                    arg = i;
                }
            }
            let mut m = DenseMatrix::zeros(k, k);
            if best > 0.0 {
                m[(arg, arg)] = 1.0;
            }
            Some((best.max(0.0), m))
        }
        _ => None,
    }
}

fn check_pair_dims(set_u: &AtomicSet, set_v: &AtomicSet, y: &DenseMatrix) -> Result<()> {
    if set_u.dim() != y.rows() || set_v.dim() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, sets are {} and {}",
            y.rows(),
            y.cols(),
            set_u.dim(),
            set_v.dim()
        )));
    }
    Ok(())
}

/// Semidefinite upper bound on the polar gauge of the bilinear pairing.
///
/// For `V` the l2 ball the program collapses to
/// `max { tr(Y^T M Y) : M in C_U }` and the bound is its square root; the
/// stacked witnesses are assembled from the maximizer as
/// `Z = M Y / s`, `N = Y^T M Y / s^2` with `s` the bound, which makes
/// `((M, Z), (Z^T, N))` positive semidefinite exactly. Otherwise the
/// stacked program is solved directly. A `MaxIter` status flags a partial
/// result whose value is the best iterate found.
pub fn relaxed_polar(
    set_u: &AtomicSet,
    set_v: &AtomicSet,
    y: &DenseMatrix,
) -> Result<RelaxedPolarResult> {
    check_pair_dims(set_u, set_v, y)?;
    let (n, d) = y.shape();
    let scale = y.frobenius_norm();
    if scale == 0.0 {
        return Ok(RelaxedPolarResult {
            value: 0.0,
            witness_m: DenseMatrix::zeros(n, n),
            witness_n: DenseMatrix::zeros(d, d),
            witness_z: DenseMatrix::zeros(n, d),
            status: SolveStatus::Solved,
        });
    }
    let ys = y.scaled(1.0 / scale);
    let spec_u = build_relaxation(set_u)?;

    if matches!(set_v, AtomicSet::L2Ball { .. }) {
        let gram = ys.matmul(&ys.transpose())?;
        let (obj, m_raw, status) = spec_max(&spec_u, &gram)?;
        let witness_m = psd_project(&m_raw)?;
        let s2 = witness_m.dot(&gram).max(0.0);
        let (witness_z, witness_n) = if s2 > 1e-24 {
            let z = witness_m.matmul(&ys)?.scaled(1.0 / s2.sqrt());
            let nw = ys.transpose().matmul(&witness_m)?.matmul(&ys)?.scaled(1.0 / s2);
            (z, nw)
        } else {
            (DenseMatrix::zeros(n, d), DenseMatrix::zeros(d, d))
        };
        return Ok(RelaxedPolarResult {
            value: scale * obj.max(0.0).sqrt(),
            witness_m,
            witness_n,
            witness_z,
            status,
        });
    }

    let spec_v = build_relaxation(set_v)?;
    let mut prog = ConicProgram::new(Sense::Maximize);
    let t = prog.add_block(n + d);
    prog.constrain_psd(t, 0, n + d);
    prog.apply_spec(t, 0, &spec_u, Bound::Const(1.0))?;
    prog.apply_spec(t, n, &spec_v, Bound::Const(1.0))?;
    // <((0, Ys/2), (Ys^T/2, 0)), T> = tr(Ys^T Z).
    for i in 0..n {
        for j in 0..d {
            let w = ys[(i, j)] / 2.0;
            prog.objective_coeff(t, i, n + j, w);
            prog.objective_coeff(t, n + j, i, w);
        }
    }
    let sol = solve_with(&prog, &relaxation_settings())?;
    let cleaned = psd_project(sol.block(t))?;
    Ok(RelaxedPolarResult {
        value: scale * sol.objective.max(0.0),
        witness_m: cleaned.block(0, 0, n, n),
        witness_n: cleaned.block(n, n, d, d),
        witness_z: cleaned.block(0, n, n, d),
        status: sol.status,
    })
}

/// Semidefinite lower bound on the gauge: the perspective program
/// `min (lam_U + lam_V)/2` over `((M, X), (X^T, N)) >= 0` with
/// `M in lam_U C_U`, `N in lam_V C_V`. The dual witnesses come from the
/// multiplier of the stacked PSD constraint, projected back onto the PSD
/// cone and radially rescaled to the boundary of the polar sets, so the
/// certified value they induce is a true lower bound regardless of solver
/// tolerance. An inconsistent program yields `+inf` with status
/// `Infeasible`.
pub fn relaxed_gauge(
    set_u: &AtomicSet,
    set_v: &AtomicSet,
    x: &DenseMatrix,
) -> Result<RelaxedGaugeResult> {
    check_pair_dims(set_u, set_v, x)?;
    let (n, d) = x.shape();
    let scale = x.frobenius_norm();
    if scale == 0.0 {
        return Ok(RelaxedGaugeResult {
            value: 0.0,
            witness_q: DenseMatrix::zeros(n, n),
            witness_s: DenseMatrix::zeros(d, d),
            recovered_m: DenseMatrix::zeros(n, n),
            recovered_n: DenseMatrix::zeros(d, d),
            status: SolveStatus::Solved,
        });
    }
    let xs = x.scaled(1.0 / scale);
    let spec_u = build_relaxation(set_u)?;
    let spec_v = build_relaxation(set_v)?;

    let mut prog = ConicProgram::new(Sense::Minimize);
    let t = prog.add_block(n + d);
    let lam_u = prog.add_scalar();
    let lam_v = prog.add_scalar();
    prog.objective_scalar(lam_u, 0.5);
    prog.objective_scalar(lam_v, 0.5);
    let psd_idx = prog.constrain_psd(t, 0, n + d);
    prog.pin_rect_sym(t, 0, n, &xs);
    prog.apply_spec(t, 0, &spec_u, Bound::Scalar { block: lam_u })?;
    prog.apply_spec(t, n, &spec_v, Bound::Scalar { block: lam_v })?;
    prog.constrain_scalar_nonneg(lam_u);
    prog.constrain_scalar_nonneg(lam_v);

    let sol = solve_with(&prog, &relaxation_settings())?;
    if sol.status == SolveStatus::Infeasible {
        return Ok(RelaxedGaugeResult {
            value: f64::INFINITY,
            witness_q: DenseMatrix::zeros(n, n),
            witness_s: DenseMatrix::zeros(d, d),
            recovered_m: DenseMatrix::zeros(n, n),
            recovered_n: DenseMatrix::zeros(d, d),
            status: SolveStatus::Infeasible,
        });
    }
    let tb = sol.block(t);
    let recovered_m = tb.block(0, 0, n, n).scaled(scale);
    let recovered_n = tb.block(n, n, d, d).scaled(scale);

    // The stacked PSD multiplier carries ((Q, .), (., S))/2 up to solver
    // noise; its overall sign is an internal convention, so take whichever
    // sign sits closer to the PSD cone before extracting the blocks.
    let mut lam = sol.dual_matrix(psd_idx).expect("stacked constraint is matrix-shaped");
    lam.symmetrize();
    let min_eig = |m: &DenseMatrix| {
        sym_eig(m)
            .map(|e| e.values.last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NEG_INFINITY)
    };
    if min_eig(&lam.scaled(-1.0)) > min_eig(&lam) {
        lam.scale(-1.0);
    }
    let witness_q = normalize_dual(&spec_u, &lam.block(0, 0, n, n).scaled(2.0))?;
    let witness_s = normalize_dual(&spec_v, &lam.block(n, n, d, d).scaled(2.0))?;

    Ok(RelaxedGaugeResult {
        value: scale * sol.objective,
        witness_q,
        witness_s,
        recovered_m,
        recovered_n,
        status: sol.status,
    })
}

/// Projects a raw dual block onto the PSD cone and rescales it radially to
/// the boundary of the polar set (`max_{M in C} <Q, M> = 1`), making the
/// certified value both valid and as large as the extracted direction
/// allows.
fn normalize_dual(spec: &RelaxationSpec, raw: &DenseMatrix) -> Result<DenseMatrix> {
    let mut q = psd_project(raw)?;
    let (sup, _, _) = spec_max(spec, &q)?;
    if sup > 1e-10 {
        q.scale(1.0 / sup);
        Ok(q)
    } else {
        Ok(DenseMatrix::zeros(q.rows(), q.cols()))
    }
}

/// Rounds a relaxation witness by sampling `u ~ N(0, M)`, mapping each draw
/// to an atom (thresholding for the 0/1 set, rectifying onto the orthant
/// for sets confined to it, then gauge normalization), and pairing it with
/// the best `v`. Returns the best pair seen; errors if every draw fell
/// outside the gauge's effective domain.
pub fn round_gaussian(
    m: &DenseMatrix,
    set_u: &AtomicSet,
    y: &DenseMatrix,
    set_v: &AtomicSet,
    rng: &mut RngState,
    samples: usize,
) -> Result<OracleResult> {
    check_pair_dims(set_u, set_v, y)?;
    let n = set_u.dim();
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, set dim is {n}",
            m.rows(),
            m.cols()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one rounding sample".into()));
    }
    let mut sym = m.clone();
    sym.symmetrize();
    let eig = sym_eig(&sym)?;
    let binary = matches!(set_u, AtomicSet::Binary01 { .. });
    let rectify = !binary && set_u.nonneg_domain();
    let mut best: Option<OracleResult> = None;
    for _ in 0..samples {
        let g = rng.gaussian_vec(n);
        // u = L g with L = V diag(sqrt(lam_+)).
        let mut u = vec![0.0f64; n];
        for (k, &lamk) in eig.values.iter().enumerate() {
            if lamk <= 0.0 {
                continue;
            }
            let c = lamk.sqrt() * g[k];
            for (ui, &qik) in u.iter_mut().zip(eig.vectors.column(k).iter()) {
                *ui += c * qik;
            }
        }
        if binary {
            u.iter_mut().for_each(|x| *x = if *x > 0.0 { 1.0 } else { 0.0 });
        } else if rectify {
            u.iter_mut().for_each(|x| *x = x.abs());
        }
        let gauge = gauge_eval(set_u, &u)?;
        let gv = gauge.to_f64();
        if !gauge.is_finite() || gv == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= gv);
        let sv = support_argmax(set_v, &y.tr_matvec(&u))?;
        let value = sv.value;
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(OracleResult {
                u,
                v: sv.atom,
                value,
                upper_bound: f64::INFINITY,
                strategy: Strategy::RelaxThenRound,
            });
        }
    }
    best.ok_or_else(|| {
        Error::DegenerateCovariance("every rounding draw had zero or infinite gauge".into())
    })
}

/// Sign rounding through the diagonal: `u = D^{1/2} sign(v)` with
/// `v ~ N(0, D^{-1/2} M D^{-1/2})`, `D = Diag(diag M)`, for sets whose
/// relaxation bounds the diagonal (lp balls with p >= 2 and the 0/1 set).
/// The 0/1 set goes through the (n+1)-dimensional +-1 lift
/// `y = (2u - 1, 1)` and de-homogenizes by `u_i = (y_i y_{n+1} + 1) / 2`.
/// Zero-diagonal coordinates are dropped.
pub fn round_sign_diag(
    m: &DenseMatrix,
    set_u: &AtomicSet,
    y: &DenseMatrix,
    set_v: &AtomicSet,
    rng: &mut RngState,
    samples: usize,
) -> Result<OracleResult> {
    check_pair_dims(set_u, set_v, y)?;
    let n = set_u.dim();
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, set dim is {n}",
            m.rows(),
            m.cols()
        )));
    }
    if !sign_roundable(set_u) {
        return Err(Error::InvalidArgument(format!(
            "sign rounding needs a diagonal-representation relaxation, not {set_u}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one rounding sample".into()));
    }

    if let AtomicSet::Binary01 { .. } = set_u {
        // Second moments of (2u - 1, 1) under the witness: the lift
        // ((M, diag M), (diag M^T, 1)) conjugated by ((2I, -1), (0, 1)).
        // Its diagonal is identically 1 because M_ii doubles as E[u_i].
        let dm = m.diagonal();
        let mut lift = DenseMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                lift[(i, j)] = 4.0 * m[(i, j)] - 2.0 * dm[i] - 2.0 * dm[j] + 1.0;
            }
            lift[(i, n)] = 2.0 * dm[i] - 1.0;
            lift[(n, i)] = 2.0 * dm[i] - 1.0;
        }
        lift[(n, n)] = 1.0;
        debug_assert!(
            lift.diagonal().iter().all(|&v| (v - 1.0).abs() < 1e-6),
            "lift correlation matrix must have unit diagonal"
        );
        let eig = sym_eig(&lift)?;
        let mut best: Option<OracleResult> = None;
        for _ in 0..samples {
            let g = rng.gaussian_vec(n + 1);
            let mut v = vec![0.0f64; n + 1];
            for (k, &lamk) in eig.values.iter().enumerate() {
                if lamk <= 0.0 {
                    continue;
                }
                let c = lamk.sqrt() * g[k];
                for (vi, &qik) in v.iter_mut().zip(eig.vectors.column(k).iter()) {
                    *vi += c * qik;
                }
            }
            let anchor = if v[n] >= 0.0 { 1.0 } else { -1.0 };
            let u: Vec<f64> =
                (0..n).map(|i| if v[i] * anchor >= 0.0 { 1.0 } else { 0.0 }).collect();
            consider_pair(&u, y, set_v, &mut best)?;
        }
        return Ok(best.unwrap_or_else(|| zero_pair(n, y.cols())));
    }

    let diag: Vec<f64> = m.diagonal().iter().map(|&v| v.max(0.0)).collect();
    let kept: Vec<usize> = (0..n).filter(|&i| diag[i] > 0.0).collect();
    if kept.is_empty() {
        return Ok(zero_pair(n, y.cols()));
    }
    let k = kept.len();
    let corr = DenseMatrix::from_fn(k, k, |a, b| {
        let (i, j) = (kept[a], kept[b]);
        m[(i, j)] / (diag[i] * diag[j]).sqrt()
    });
    let mut corr_sym = corr;
    corr_sym.symmetrize();
    let eig = sym_eig(&corr_sym)?;
    let mut best: Option<OracleResult> = None;
    for _ in 0..samples {
        let g = rng.gaussian_vec(k);
        let mut v = vec![0.0f64; k];
        for (kk, &lamk) in eig.values.iter().enumerate() {
            if lamk <= 0.0 {
                continue;
            }
            let c = lamk.sqrt() * g[kk];
            for (vi, &qik) in v.iter_mut().zip(eig.vectors.column(kk).iter()) {
                *vi += c * qik;
            }
        }
        let mut u = vec![0.0f64; n];
        for (a, &i) in kept.iter().enumerate() {
            u[i] = diag[i].sqrt() * if v[a] >= 0.0 { 1.0 } else { -1.0 };
        }
        // The diagonal bound of the relaxation already makes u feasible;
        // renormalize only to absorb roundoff.
        let gv = gauge_eval(set_u, &u)?.to_f64();
        if gv > 1.0 {
            u.iter_mut().for_each(|x| *x /= gv);
        }
        consider_pair(&u, y, set_v, &mut best)?;
    }
    Ok(best.unwrap_or_else(|| zero_pair(n, y.cols())))
}

fn zero_pair(n: usize, d: usize) -> OracleResult {
    OracleResult {
        u: vec![0.0; n],
        v: vec![0.0; d],
        value: 0.0,
        upper_bound: f64::INFINITY,
        strategy: Strategy::RelaxThenRound,
    }
}

fn consider_pair(
    u: &[f64],
    y: &DenseMatrix,
    set_v: &AtomicSet,
    best: &mut Option<OracleResult>,
) -> Result<()> {
    let sv = support_argmax(set_v, &y.tr_matvec(u))?;
    if best.as_ref().map_or(true, |b| sv.value > b.value) {
        *best = Some(OracleResult {
            u: u.to_vec(),
            v: sv.atom,
            value: sv.value,
            upper_bound: f64::INFINITY,
            strategy: Strategy::RelaxThenRound,
        });
    }
    Ok(())
}

/// Deterministic rounding for an l2 column side: `v` is the top eigenvector
/// of `Y^T M Y` (both signs tried), `u` the best atom against `Y v`. The
/// returned value satisfies `value^2 >= tr(Y^T M Y) / min(n, d)` whenever
/// the quadratic surrogate is exact on the chosen direction.
pub fn round_eigenvector(
    m: &DenseMatrix,
    set_u: &AtomicSet,
    set_v: &AtomicSet,
    y: &DenseMatrix,
) -> Result<OracleResult> {
    check_pair_dims(set_u, set_v, y)?;
    if !matches!(set_v, AtomicSet::L2Ball { .. }) {
        return Err(Error::InvalidArgument(
            "eigenvector rounding needs an l2 column side".into(),
        ));
    }
    let n = set_u.dim();
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, set dim is {n}",
            m.rows(),
            m.cols()
        )));
    }
    let mut b = y.transpose().matmul(m)?.matmul(y)?;
    b.symmetrize();
    let eig = sym_eig(&b)?;
    // A witness with no energy along Y singles out no direction.
    if eig.values.first().copied().unwrap_or(0.0) <= 0.0 {
        return Ok(zero_pair(n, y.cols()));
    }
    let v = eig.vectors.column(0);
    let mut best: Option<OracleResult> = None;
    for sign in [1.0, -1.0] {
        let vs: Vec<f64> = v.iter().map(|x| sign * x).collect();
        let su = support_argmax(set_u, &y.matvec(&vs))?;
        if best.as_ref().map_or(true, |b| su.value > b.value) {
            best = Some(OracleResult {
                u: su.atom,
                v: vs,
                value: su.value,
                upper_bound: f64::INFINITY,
                strategy: Strategy::RelaxThenRound,
            });
        }
    }
    let mut out = best.expect("two signs were tried");
    if out.value <= 0.0 {
        out = zero_pair(n, y.cols());
    }
    Ok(out)
}

/// Explicit factors recovered from dual witnesses: with `Q = A A^T`,
/// `S = B B^T` and the middle factorization `A^T X B = G diag(s) H^T`, the
/// columns of `U = (A A^T)^+ A G diag(s)^{1/2}` and
/// `V = (B B^T)^+ B H diag(s)^{1/2}` satisfy `U V^T = P_Q X P_S`, which is
/// `X` itself whenever `X` lives in the span of the witnesses.
#[derive(Clone, Debug)]
pub struct RecoveredFactors {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub scales: Vec<f64>,
}

impl RecoveredFactors {
    pub fn rank(&self) -> usize {
        self.scales.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.matmul(&self.v.transpose()).expect("factor shapes agree")
    }

    /// Total weight of the recovered decomposition.
    pub fn cost(&self) -> f64 {
        self.scales.iter().sum()
    }
}

/// Rank truncation threshold, relative to the top singular value.
const RANK_REL_TOL: f64 = 1e-9;

pub fn recover_factors(
    x: &DenseMatrix,
    q: &DenseMatrix,
    s: &DenseMatrix,
) -> Result<RecoveredFactors> {
    let (n, d) = x.shape();
    if q.shape() != (n, n) || s.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "witnesses are {}x{} and {}x{}, X is {n}x{d}",
            q.rows(),
            q.cols(),
            s.rows(),
            s.cols()
        )));
    }
    let empty = RecoveredFactors {
        u: DenseMatrix::zeros(n, 0),
        v: DenseMatrix::zeros(d, 0),
        scales: Vec::new(),
    };
    if x.max_abs() == 0.0 {
        return Ok(empty);
    }
    // Factor side bases: A = Uq lam^{1/2}, truncating singular values
    // (sqrt of eigenvalues) below the relative floor.
    let eq = sym_eig(q)?;
    let es = sym_eig(s)?;
    let keep = |values: &[f64]| -> Vec<usize> {
        let top = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0 && l.sqrt() > RANK_REL_TOL * top)
            .map(|(k, _)| k)
            .collect()
    };
    let ka = keep(&eq.values);
    let kb = keep(&es.values);
    if ka.is_empty() || kb.is_empty() {
        return Ok(empty);
    }
    // A^T X B, built column-by-column in the retained eigenbases.
    let mut mid = DenseMatrix::zeros(ka.len(), kb.len());
    for (a, &i) in ka.iter().enumerate() {
        let qa = eq.vectors.column(i);
        let wa = x.tr_matvec(&qa);
        for (b, &j) in kb.iter().enumerate() {
            let sb = es.vectors.column(j);
            mid[(a, b)] = eq.values[i].sqrt()
                * es.values[j].sqrt()
                * crate::numerics::vec_dot(&wa, &sb);
        }
    }
    let f = svd(&mid)?;
    let smax = f.singular_values.first().copied().unwrap_or(0.0);
    let rank = f.singular_values.iter().filter(|&&v| v > RANK_REL_TOL * smax && v > 0.0).count();
    if rank == 0 {
        return Ok(empty);
    }
    // U = Uq lam^{-1/2} G diag(s)^{1/2}, and mirrored for V.
    let mut u = DenseMatrix::zeros(n, rank);
    let mut v = DenseMatrix::zeros(d, rank);
    let mut scales = Vec::with_capacity(rank);
    for r in 0..rank {
        let sv = f.singular_values[r];
        scales.push(sv);
        let w = sv.sqrt();
        for (a, &i) in ka.iter().enumerate() {
            let coeff = w * f.u[(a, r)] / eq.values[i].sqrt();
            let qa = eq.vectors.column(i);
            for row in 0..n {
                u[(row, r)] += coeff * qa[row];
            }
        }
        for (b, &j) in kb.iter().enumerate() {
            let coeff = w * f.v[(b, r)] / es.values[j].sqrt();
            let sb = es.vectors.column(j);
            for row in 0..d {
                v[(row, r)] += coeff * sb[row];
            }
        }
    }
    Ok(RecoveredFactors { u, v, scales })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::operator_norm;
    use crate::oracle::polar_exact;

    const KAPPA_SIGN: f64 = std::f64::consts::FRAC_PI_2; // squared ratio

    fn l2(dim: usize) -> AtomicSet {
        AtomicSet::L2Ball { dim }
    }

    #[test]
    fn polar_l2_pair_is_operator_norm() {
        let mut rng = RngState::new(21);
        for _ in 0..5 {
            let y = rng.gaussian_matrix(4, 3);
            let r = relaxed_polar(&l2(4), &l2(3), &y).unwrap();
            let top = operator_norm(&y).unwrap();
            assert!((r.value - top).abs() < 1e-5 * (1.0 + top), "{} vs {top}", r.value);
            assert_eq!(r.status, SolveStatus::Solved);
        }
    }

    #[test]
    fn polar_binary_small_instance_in_ratio_band() {
        let y = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        let r = relaxed_polar(&AtomicSet::Binary01 { dim: 2 }, &l2(2), &y).unwrap();
        assert!(r.value >= 5.0 - 1e-6, "upper bound {} below exact 5", r.value);
        assert!(r.value <= 5.0 * KAPPA_SIGN.sqrt() + 1e-6, "{} above ratio band", r.value);
    }

    #[test]
    fn polar_zero_matrix() {
        let r = relaxed_polar(&l2(3), &l2(2), &DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.witness_m.shape(), (3, 3));
    }

    #[test]
    fn polar_witnesses_stack_psd() {
        let mut rng = RngState::new(22);
        let cases: Vec<(AtomicSet, AtomicSet)> = vec![
            (AtomicSet::Binary01 { dim: 4 }, l2(3)),
            (AtomicSet::LinfBall { dim: 4 }, l2(3)),
            (l2(4), AtomicSet::L1Ball { dim: 3 }),
            (AtomicSet::Simplex { dim: 4 }, AtomicSet::LinfBall { dim: 3 }),
        ];
        for (set_u, set_v) in &cases {
            let y = rng.gaussian_matrix(4, 3);
            let r = relaxed_polar(set_u, set_v, &y).unwrap();
            let eig = sym_eig(&r.stacked_witness()).unwrap();
            let min = eig.values.last().copied().unwrap();
            assert!(min >= -1e-8, "{set_u} x {set_v}: stacked witness has eigenvalue {min}");
        }
    }

    /// The stacked general-path program agrees with the single-block l2
    /// path on their common case.
    #[test]
    fn polar_stacked_path_consistent_with_l2_path() {
        let mut rng = RngState::new(23);
        let y = rng.gaussian_matrix(3, 3);
        let single = relaxed_polar(&AtomicSet::LinfBall { dim: 3 }, &l2(3), &y).unwrap();
        // Force the general path by swapping the sides of the transpose.
        let swapped = relaxed_polar(&l2(3), &AtomicSet::LinfBall { dim: 3 }, &y.transpose()).unwrap();
        assert!(
            (single.value - swapped.value).abs() < 2e-4 * (1.0 + single.value),
            "single-block {} vs stacked {}",
            single.value,
            swapped.value
        );
    }

    #[test]
    fn gauge_identity_is_nuclear_norm() {
        let r = relaxed_gauge(&l2(2), &l2(2), &DenseMatrix::identity(2)).unwrap();
        assert!(r.value <= 2.0 + 1e-6, "lower bound {} above nuclear norm", r.value);
        assert!((r.value - 2.0).abs() < 2e-4, "{} not close to 2", r.value);
    }

    #[test]
    fn gauge_l1_rows_closed_form() {
        let mut rng = RngState::new(24);
        let x = rng.gaussian_matrix(3, 2);
        let exact: f64 = (0..3).map(|i| crate::numerics::vec_norm2(x.row(i))).sum();
        let r = relaxed_gauge(&AtomicSet::L1Ball { dim: 3 }, &l2(2), &x).unwrap();
        assert!(r.value <= exact + 1e-6, "lower bound {} above exact {exact}", r.value);
        assert!(
            (r.value - exact).abs() < 1e-3 * (1.0 + exact),
            "surrogate is exact here: {} vs {exact}",
            r.value
        );
    }

    #[test]
    fn gauge_zero_matrix() {
        let r = relaxed_gauge(&l2(3), &l2(2), &DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn gauge_witnesses_are_feasible_duals() {
        let mut rng = RngState::new(25);
        let x = rng.gaussian_matrix(3, 3);
        let r = relaxed_gauge(&l2(3), &l2(3), &x).unwrap();
        // PSD and on the boundary of the polar: sup over the spec set <= 1.
        for (w, set) in [(&r.witness_q, l2(3)), (&r.witness_s, l2(3))] {
            let min = sym_eig(w).unwrap().values.last().copied().unwrap();
            assert!(min >= -1e-10, "witness indefinite: {min}");
            let spec = build_relaxation(&set).unwrap();
            let (sup, _, _) = spec_max(&spec, w).unwrap();
            assert!(sup <= 1.0 + 1e-8, "witness outside the polar: sup {sup}");
        }
        // The certified value they induce is a true lower bound on the
        // nuclear norm and close to the primal estimate.
        let cert = r.certified_value(&x).unwrap();
        let exact = nuclear_norm(&x).unwrap();
        assert!(cert <= exact + 1e-9, "certified {cert} above exact {exact}");
        assert!(cert >= r.value - 5e-3 * (1.0 + r.value), "certified {cert} far below {}", r.value);
    }

    #[test]
    fn rounding_gaussian_rank_one_recovers_atom() {
        let mut rng = RngState::new(26);
        let u0 = {
            let g = rng.gaussian_vec(4);
            let nrm = crate::numerics::vec_norm2(&g);
            g.into_iter().map(|x| x / nrm).collect::<Vec<_>>()
        };
        let m = DenseMatrix::outer(&u0, &u0);
        let y = rng.gaussian_matrix(4, 3);
        let r = round_gaussian(&m, &l2(4), &y, &l2(3), &mut rng, 8).unwrap();
        let align = crate::numerics::vec_dot(&r.u, &u0).abs();
        assert!((align - 1.0).abs() < 1e-9, "draws off the rank-one span: align {align}");
    }

    #[test]
    fn rounding_gaussian_binary_outputs_are_binary() {
        let mut rng = RngState::new(27);
        let y = rng.gaussian_matrix(5, 3);
        let r = relaxed_polar(&AtomicSet::Binary01 { dim: 5 }, &l2(3), &y).unwrap();
        let rounded =
            round_gaussian(&r.witness_m, &AtomicSet::Binary01 { dim: 5 }, &y, &l2(3), &mut rng, 50)
                .unwrap();
        assert!(rounded.u.iter().all(|&x| x == 0.0 || x == 1.0), "{:?}", rounded.u);
        assert!(rounded.value > 0.0);
    }

    #[test]
    fn rounding_gaussian_top_direction_hits_operator_norm() {
        let mut rng = RngState::new(28);
        let y = rng.gaussian_matrix(5, 4);
        let f = svd(&y).unwrap();
        let top = f.u.column(0);
        let m = DenseMatrix::outer(&top, &top);
        let r = round_gaussian(&m, &l2(5), &y, &l2(4), &mut rng, 100).unwrap();
        let opn = f.singular_values[0];
        assert!(r.value >= 0.99 * opn, "best of 100: {} vs operator norm {opn}", r.value);
    }

    #[test]
    fn rounding_gaussian_zero_covariance_is_degenerate() {
        let mut rng = RngState::new(29);
        let y = rng.gaussian_matrix(3, 2);
        let err = round_gaussian(
            &DenseMatrix::zeros(3, 3),
            &AtomicSet::Binary01 { dim: 3 },
            &y,
            &l2(2),
            &mut rng,
            10,
        );
        assert!(matches!(err, Err(Error::DegenerateCovariance(_))));
    }

    #[test]
    fn sign_rounding_identity_gives_sign_vectors() {
        let mut rng = RngState::new(30);
        let y = rng.gaussian_matrix(4, 3);
        let r = round_sign_diag(
            &DenseMatrix::identity(4),
            &AtomicSet::LinfBall { dim: 4 },
            &y,
            &l2(3),
            &mut rng,
            20,
        )
        .unwrap();
        assert!(r.u.iter().all(|&x| x == 1.0 || x == -1.0), "{:?}", r.u);
    }

    #[test]
    fn sign_rounding_binary_lift_reaches_ratio() {
        let y = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        let set_u = AtomicSet::Binary01 { dim: 2 };
        let relaxed = relaxed_polar(&set_u, &l2(2), &y).unwrap();
        let mut rng = RngState::new(31);
        let r = round_sign_diag(&relaxed.witness_m, &set_u, &y, &l2(2), &mut rng, 200).unwrap();
        assert!(r.u.iter().all(|&x| x == 0.0 || x == 1.0));
        assert!(
            r.value >= 5.0 / KAPPA_SIGN.sqrt(),
            "best of 200 is {}, expected at least 5/sqrt(pi/2)",
            r.value
        );
    }

    #[test]
    fn sign_rounding_scalar_binary_is_exact() {
        let y = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        let m = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let mut rng = RngState::new(32);
        let r =
            round_sign_diag(&m, &AtomicSet::Binary01 { dim: 1 }, &y, &l2(1), &mut rng, 5).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_rounding_recovers_rank_one_direction() {
        let mut rng = RngState::new(33);
        let a = rng.gaussian_vec(5);
        let b = rng.gaussian_vec(3);
        let y = DenseMatrix::outer(&a, &b);
        let m = DenseMatrix::identity(5).scaled(0.2);
        let r = round_eigenvector(&m, &l2(5), &l2(3), &y).unwrap();
        let bn = crate::numerics::vec_norm2(&b);
        let align = crate::numerics::vec_dot(&r.v, &b).abs() / bn;
        assert!((align - 1.0).abs() < 1e-9, "v misaligned with the rank-one factor: {align}");
    }

    #[test]
    fn eigenvector_rounding_meets_trace_guarantee() {
        let mut rng = RngState::new(34);
        let set_u = AtomicSet::Binary01 { dim: 6 };
        let y = rng.gaussian_matrix(6, 4);
        let relaxed = relaxed_polar(&set_u, &l2(4), &y).unwrap();
        let m = &relaxed.witness_m;
        let r = round_eigenvector(m, &set_u, &l2(4), &y).unwrap();
        let tr = y.transpose().matmul(m).unwrap().matmul(&y).unwrap().trace();
        assert!(
            r.value * r.value >= tr / 4.0 - 1e-8,
            "value^2 {} below tr/min(n,d) {}",
            r.value * r.value,
            tr / 4.0
        );
    }

    #[test]
    fn eigenvector_rounding_zero_witness() {
        let y = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = round_eigenvector(&DenseMatrix::zeros(2, 2), &l2(2), &l2(2), &y).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn recover_factors_diagonal_matrix() {
        let x = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let f = recover_factors(&x, &DenseMatrix::identity(2), &DenseMatrix::identity(2)).unwrap();
        assert!((f.reconstruct().sub(&x).frobenius_norm()) < 1e-10);
        assert!((f.cost() - 3.0).abs() < 1e-10, "sum of scales {}", f.cost());
    }

    #[test]
    fn recover_factors_zero_matrix() {
        let f = recover_factors(
            &DenseMatrix::zeros(3, 2),
            &DenseMatrix::identity(3),
            &DenseMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(f.reconstruct().shape(), (3, 2));
        assert_eq!(f.reconstruct().max_abs(), 0.0);
    }

    #[test]
    fn recover_factors_matches_nuclear_norm() {
        let mut rng = RngState::new(35);
        let x = rng.gaussian_matrix(4, 3);
        let f = recover_factors(&x, &DenseMatrix::identity(4), &DenseMatrix::identity(3)).unwrap();
        let rec_err = f.reconstruct().sub(&x).frobenius_norm();
        assert!(rec_err <= 1e-6 * x.frobenius_norm(), "reconstruction error {rec_err}");
        let exact = nuclear_norm(&x).unwrap();
        assert!((f.cost() - exact).abs() < 1e-5, "{} vs nuclear {exact}", f.cost());
    }

    /// Recovery through the full pipeline: gauge relaxation, dual
    /// witnesses, factors. The reconstruction must be exact whenever the
    /// witnesses are full rank, and the recovered cost tracks the bound.
    #[test]
    fn recover_factors_from_solved_witnesses() {
        let mut rng = RngState::new(36);
        let x = rng.gaussian_matrix(4, 3);
        let r = relaxed_gauge(&l2(4), &l2(3), &x).unwrap();
        let f = recover_factors(&x, &r.witness_q, &r.witness_s).unwrap();
        let rec_err = f.reconstruct().sub(&x).frobenius_norm();
        assert!(rec_err <= 1e-6 * x.frobenius_norm(), "reconstruction error {rec_err}");
        let exact = nuclear_norm(&x).unwrap();
        assert!(
            (f.cost() - exact).abs() < 2e-2 * (1.0 + exact),
            "recovered cost {} vs nuclear {exact}",
            f.cost()
        );
    }

    /// Two-sided sandwich against independent exact oracles, with the
    /// known approximation ratios.
    #[test]
    fn sandwich_polar_over_exact_oracles() {
        let mut rng = RngState::new(37);
        let cases: Vec<(AtomicSet, f64)> = vec![
            (AtomicSet::L1Ball { dim: 6 }, 1.0),
            (l2(6), 1.0),
            (AtomicSet::LinfBall { dim: 6 }, KAPPA_SIGN.sqrt()),
            (AtomicSet::Binary01 { dim: 6 }, KAPPA_SIGN.sqrt()),
        ];
        for (set_u, kappa) in &cases {
            for _ in 0..50 {
                let y = rng.gaussian_matrix(6, 4);
                let exact = polar_exact(set_u, &l2(4), &y).unwrap().value;
                let relaxed = relaxed_polar(set_u, &l2(4), &y).unwrap();
                assert_eq!(relaxed.status, SolveStatus::Solved, "{set_u}: solver fell short");
                assert!(
                    exact <= relaxed.value + 1e-6,
                    "{set_u}: exact {exact} above relaxed {}",
                    relaxed.value
                );
                assert!(
                    relaxed.value <= kappa * exact + 1e-6,
                    "{set_u}: relaxed {} above {kappa} * {exact}",
                    relaxed.value
                );
            }
        }
    }

    /// The gauge bound never exceeds the exact gauge where a closed form
    /// exists (nuclear norm, l1 rows).
    #[test]
    fn sandwich_gauge_below_exact() {
        let mut rng = RngState::new(38);
        for _ in 0..10 {
            let x = rng.gaussian_matrix(4, 3);
            let nuc = nuclear_norm(&x).unwrap();
            let r = relaxed_gauge(&l2(4), &l2(3), &x).unwrap();
            assert!(r.value <= nuc + 1e-6, "{} above nuclear norm {nuc}", r.value);

            let rows: f64 = (0..4).map(|i| crate::numerics::vec_norm2(x.row(i))).sum();
            let r1 = relaxed_gauge(&AtomicSet::L1Ball { dim: 4 }, &l2(3), &x).unwrap();
            assert!(r1.value <= rows + 1e-6, "{} above row-norm sum {rows}", r1.value);
        }
    }

    /// Pairing between the two relaxations: a feasible block for the gauge
    /// program rescales into a feasible block for the polar program, so
    /// `tr(X^T Y) <= gauge(X) * polar(Y)`.
    #[test]
    fn gauge_polar_pairing() {
        let mut rng = RngState::new(39);
        for (set_u, set_v) in [
            (l2(4), l2(3)),
            (AtomicSet::Binary01 { dim: 4 }, l2(3)),
            (AtomicSet::L1Ball { dim: 4 }, l2(3)),
        ] {
            for _ in 0..5 {
                let x = rng.gaussian_matrix(4, 3);
                let y = rng.gaussian_matrix(4, 3);
                let g = relaxed_gauge(&set_u, &set_v, &x).unwrap();
                let p = relaxed_polar(&set_u, &set_v, &y).unwrap();
                let pairing = x.dot(&y);
                let bound = g.value * p.value;
                let tol = 1e-6 * (1.0 + x.frobenius_norm() * y.frobenius_norm());
                assert!(
                    pairing <= bound + tol,
                    "{set_u}: tr(X^T Y) = {pairing} above {} * {}",
                    g.value,
                    p.value
                );
            }
        }
    }
}
