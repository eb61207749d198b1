//! A small conic solver for the semidefinite programs the relaxations
//! produce: symmetric matrix blocks (scalars are 1x1 blocks), a linear
//! objective, and constraints that are views into blocks restricted to
//! simple sets — the PSD cone, norm balls, half-spaces, boxes, pins, and
//! entrywise links between views.
//!
//! Solved by consensus ADMM: every constraint keeps a local copy of the
//! entries it watches, the x-update averages the copies, and each copy is
//! projected onto its set. This trades speed for total predictability of
//! the per-iteration cost, which is what we want at the problem sizes the
//! decompositions produce (blocks up to a few hundred rows).
//!
//! [`gauge_of_spec`] evaluates the gauge of a constraint list in closed
//! form, without invoking the iterative solver.

pub mod project;

mod admm;

pub use admm::{solve, solve_with, AdmmSettings};

use serde::Serialize;

use crate::atomic::{GaugeValue, RelaxationSpec, SpecConstraint};
use crate::error::{Error, Result};
use crate::numerics::{lp_norm, pinv_quadratic, sym_eig, DenseMatrix, DIM_CAP};

/// Direction of optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Right-hand side of a scaled constraint: a constant radius, or a scalar
/// block that the constraint is jointly projected with (a cone constraint).
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Bound {
    Const(f64),
    Scalar { block: usize },
}

/// The set a constraint restricts its view to.
#[derive(Clone, Debug, Serialize)]
pub enum ConstraintKind {
    /// View is a square matrix required to be positive semidefinite.
    PsdCone,
    /// `sum(view) <= bound`.
    SumLeq { bound: Bound },
    /// `||view||_p <= bound`.
    NormLeq { p: f64, bound: Bound },
    /// `nu * tr + (1 - nu) * l1 <= bound` on a square matrix view.
    MixedTraceL1Leq { nu: f64, bound: Bound },
    /// Every view entry `>= 0`.
    Nonneg,
    /// Every view entry `<= bound`.
    EntryLeq { bound: Bound },
    /// View entries pinned to constants.
    PinValues { values: Vec<f64> },
    /// View is `[a; b]` with both halves of length `len`, constrained
    /// entrywise equal.
    LinkEq { len: usize },
}

/// Indices (into the concatenated block storage) a constraint watches.
/// `mat` is the side length when the view is a row-major square matrix.
#[derive(Clone, Debug, Serialize)]
pub struct View {
    pub idx: Vec<usize>,
    pub mat: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub view: View,
}

/// A conic program over symmetric blocks.
///
/// Views are always symmetric index sets (square sub-blocks, diagonals, or
/// mirrored rectangles), so the consensus iteration preserves symmetry of
/// every block exactly.
#[derive(Clone, Debug, Serialize)]
pub struct ConicProgram {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
    sense: Sense,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl ConicProgram {
    pub fn new(sense: Sense) -> Self {
        ConicProgram {
            block_dims: Vec::new(),
            offsets: Vec::new(),
            total: 0,
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a symmetric `dim x dim` block and returns its id.
    pub fn add_block(&mut self, dim: usize) -> usize {
        assert!(dim >= 1 && dim <= DIM_CAP, "block dim {dim} out of range");
        self.block_dims.push(dim);
        self.offsets.push(self.total);
        self.total += dim * dim;
        self.objective.resize(self.total, 0.0);
        self.block_dims.len() - 1
    }

    /// Adds a scalar variable (a 1x1 block).
    pub fn add_scalar(&mut self) -> usize {
        self.add_block(1)
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn block_dim(&self, b: usize) -> usize {
        self.block_dims[b]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub(crate) fn total_len(&self) -> usize {
        self.total
    }

    pub(crate) fn objective_vec(&self) -> &[f64] {
        &self.objective
    }

    pub(crate) fn block_spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets.iter().copied().zip(self.block_dims.iter().copied())
    }

    /// Flat index of entry `(i, j)` of block `b`.
    pub fn entry_index(&self, b: usize, i: usize, j: usize) -> usize {
        let d = self.block_dims[b];
        assert!(i < d && j < d, "entry ({i},{j}) out of range for dim {d}");
        self.offsets[b] + i * d + j
    }

    /// Adds `c` to the objective coefficient of entry `(i, j)`.
    pub fn objective_coeff(&mut self, b: usize, i: usize, j: usize, c: f64) {
        let e = self.entry_index(b, i, j);
        self.objective[e] += c;
    }

    /// Adds `<C, block_b>` (entrywise inner product) to the objective.
    pub fn objective_trace(&mut self, b: usize, c: &DenseMatrix) -> Result<()> {
        let d = self.block_dims[b];
        if c.rows() != d || c.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "objective matrix is {}x{}, block is {d}x{d}",
                c.rows(),
                c.cols()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                self.objective_coeff(b, i, j, c[(i, j)]);
            }
        }
        Ok(())
    }

    /// Adds `w * s` to the objective for scalar block `s`.
    pub fn objective_scalar(&mut self, s: usize, w: f64) {
        self.objective_coeff(s, 0, 0, w);
    }

    /// Row-major view of the square sub-block at `(r0, r0)`.
    pub fn square_view(&self, b: usize, r0: usize, size: usize) -> View {
        let mut idx = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                idx.push(self.entry_index(b, r0 + i, r0 + j));
            }
        }
        View { idx, mat: Some(size) }
    }

    /// Diagonal entries of the square sub-block at `(r0, r0)`.
    pub fn diag_view(&self, b: usize, r0: usize, size: usize) -> View {
        let idx = (0..size).map(|i| self.entry_index(b, r0 + i, r0 + i)).collect();
        View { idx, mat: None }
    }

    fn scalar_view(&self, s: usize) -> View {
        assert_eq!(self.block_dims[s], 1, "block {s} is not a scalar");
        View { idx: vec![self.offsets[s]], mat: None }
    }

    fn push(&mut self, kind: ConstraintKind, view: View) -> usize {
        self.constraints.push(Constraint { kind, view });
        self.constraints.len() - 1
    }

    /// For a bound that is a scalar block, appends that scalar's index to
    /// the view so the constraint is projected jointly with it.
    fn with_bound(&self, mut view: View, bound: Bound) -> View {
        if let Bound::Scalar { block } = bound {
            view.idx.push(self.offsets[block]);
        }
        view
    }

    pub fn constrain_psd(&mut self, b: usize, r0: usize, size: usize) -> usize {
        let view = self.square_view(b, r0, size);
        self.push(ConstraintKind::PsdCone, view)
    }

    pub fn constrain_trace_leq(&mut self, b: usize, r0: usize, size: usize, bound: Bound) -> usize {
        let view = self.with_bound(self.diag_view(b, r0, size), bound);
        self.push(ConstraintKind::SumLeq { bound }, view)
    }

    pub fn constrain_entry_norm_leq(
        &mut self,
        b: usize,
        r0: usize,
        size: usize,
        p: f64,
        bound: Bound,
    ) -> usize {
        let view = self.with_bound(self.square_view(b, r0, size), bound);
        self.push(ConstraintKind::NormLeq { p, bound }, view)
    }

    pub fn constrain_diag_norm_leq(
        &mut self,
        b: usize,
        r0: usize,
        size: usize,
        p: f64,
        bound: Bound,
    ) -> usize {
        let view = self.with_bound(self.diag_view(b, r0, size), bound);
        self.push(ConstraintKind::NormLeq { p, bound }, view)
    }

    pub fn constrain_nonneg(&mut self, b: usize, r0: usize, size: usize) -> usize {
        let view = self.square_view(b, r0, size);
        self.push(ConstraintKind::Nonneg, view)
    }

    pub fn constrain_scalar_nonneg(&mut self, s: usize) -> usize {
        let view = self.scalar_view(s);
        self.push(ConstraintKind::Nonneg, view)
    }

    pub fn constrain_diag_leq(&mut self, b: usize, r0: usize, size: usize, bound: Bound) -> usize {
        let view = self.with_bound(self.diag_view(b, r0, size), bound);
        self.push(ConstraintKind::EntryLeq { bound }, view)
    }

    pub fn constrain_mixed_leq(
        &mut self,
        b: usize,
        r0: usize,
        size: usize,
        nu: f64,
        bound: Bound,
    ) -> usize {
        let view = self.with_bound(self.square_view(b, r0, size), bound);
        self.push(ConstraintKind::MixedTraceL1Leq { nu, bound }, view)
    }

    /// Pins a single entry (and its mirror when off-diagonal).
    pub fn pin_entry(&mut self, b: usize, i: usize, j: usize, value: f64) -> usize {
        if i == j {
            let view = View { idx: vec![self.entry_index(b, i, j)], mat: None };
            self.push(ConstraintKind::PinValues { values: vec![value] }, view)
        } else {
            let idx = vec![self.entry_index(b, i, j), self.entry_index(b, j, i)];
            let view = View { idx, mat: None };
            self.push(ConstraintKind::PinValues { values: vec![value, value] }, view)
        }
    }

    /// Pins the rectangular sub-block at `(r0, c0)` to `x`, together with
    /// its mirror at `(c0, r0)` pinned to `x^T`. The rectangle must not
    /// touch the diagonal.
    pub fn pin_rect_sym(&mut self, b: usize, r0: usize, c0: usize, x: &DenseMatrix) -> usize {
        let (h, w) = x.shape();
        assert!(r0 + h <= c0 || c0 + w <= r0, "pinned rectangle overlaps its mirror");
        let mut idx = Vec::with_capacity(2 * h * w);
        let mut values = Vec::with_capacity(2 * h * w);
        for i in 0..h {
            for j in 0..w {
                idx.push(self.entry_index(b, r0 + i, c0 + j));
                values.push(x[(i, j)]);
            }
        }
        for j in 0..w {
            for i in 0..h {
                idx.push(self.entry_index(b, c0 + j, r0 + i));
                values.push(x[(i, j)]);
            }
        }
        self.push(ConstraintKind::PinValues { values }, View { idx, mat: None })
    }

    /// Constrains two equally-sized views to be entrywise equal.
    pub fn link_views(&mut self, a: View, b: View) -> usize {
        assert_eq!(a.idx.len(), b.idx.len(), "linked views differ in length");
        let len = a.idx.len();
        let mut idx = a.idx;
        idx.extend_from_slice(&b.idx);
        self.push(ConstraintKind::LinkEq { len }, View { idx, mat: None })
    }

    /// Imposes `M in bound * C` on the square sub-block at `(r0, r0)` of
    /// block `b`, where `C` is the semidefinite set described by `spec`.
    /// Scalar bounds require every constraint radius in the spec to be 1
    /// (which is what [`crate::atomic::build_relaxation`] emits).
    pub fn apply_spec(
        &mut self,
        b: usize,
        r0: usize,
        spec: &RelaxationSpec,
        bound: Bound,
    ) -> Result<()> {
        let k = spec.dim;
        if r0 + k > self.block_dims[b] {
            return Err(Error::DimensionMismatch(format!(
                "spec of dim {k} at offset {r0} exceeds block dim {}",
                self.block_dims[b]
            )));
        }
        let scaled = |radius: f64| -> Result<Bound> {
            match bound {
                Bound::Const(c) => Ok(Bound::Const(c * radius)),
                Bound::Scalar { .. } => {
                    if (radius - 1.0).abs() > 1e-12 {
                        Err(Error::InvalidArgument(
                            "scalar-bounded spec constraints need unit radius".into(),
                        ))
                    } else {
                        Ok(bound)
                    }
                }
            }
        };
        for c in &spec.constraints {
            match *c {
                SpecConstraint::Psd => {
                    self.constrain_psd(b, r0, k);
                }
                SpecConstraint::TraceBound { radius } => {
                    let bd = scaled(radius)?;
                    self.constrain_trace_leq(b, r0, k, bd);
                }
                SpecConstraint::EntryNorm { p, radius } => {
                    let bd = scaled(radius)?;
                    self.constrain_entry_norm_leq(b, r0, k, p, bd);
                }
                SpecConstraint::DiagNorm { p, radius } => {
                    let bd = scaled(radius)?;
                    self.constrain_diag_norm_leq(b, r0, k, p, bd);
                }
                SpecConstraint::ElementwiseNonneg => {
                    self.constrain_nonneg(b, r0, k);
                }
                SpecConstraint::DiagBox { upper } => {
                    let bd = scaled(upper)?;
                    self.constrain_diag_leq(b, r0, k, bd);
                }
                SpecConstraint::MixedTraceL1 { nu, radius } => {
                    let bd = scaled(radius)?;
                    self.constrain_mixed_leq(b, r0, k, nu, bd);
                }
                SpecConstraint::SchurDiagLift => {
                    // Auxiliary block [[M, d], [d^T, t]] with d linked to
                    // diag(M) and t the membership scale: PSD of the lift is
                    // equivalent to t*M >= d d^T.
                    let lift = self.add_block(k + 1);
                    self.constrain_psd(lift, 0, k + 1);
                    let a = self.square_view(lift, 0, k);
                    let m = self.square_view(b, r0, k);
                    self.link_views(a, m);
                    let mut edge = Vec::with_capacity(2 * k);
                    let mut diag = Vec::with_capacity(2 * k);
                    for i in 0..k {
                        edge.push(self.entry_index(lift, i, k));
                        edge.push(self.entry_index(lift, k, i));
                        let e = self.entry_index(b, r0 + i, r0 + i);
                        diag.push(e);
                        diag.push(e);
                    }
                    self.link_views(
                        View { idx: edge, mat: None },
                        View { idx: diag, mat: None },
                    );
                    match bound {
                        Bound::Const(c) => {
                            self.pin_entry(lift, k, k, c);
                        }
                        Bound::Scalar { block } => {
                            let corner =
                                View { idx: vec![self.entry_index(lift, k, k)], mat: None };
                            let s = self.scalar_view(block);
                            self.link_views(corner, s);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes the program for offline inspection.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serialization cannot fail")
    }

    /// Entries referenced by no constraint must have zero objective
    /// coefficient, otherwise the program is unbounded by inspection.
    pub(crate) fn validate(&self) -> Result<Vec<f64>> {
        let mut count = vec![0.0f64; self.total];
        for c in &self.constraints {
            for &e in &c.view.idx {
                count[e] += 1.0;
            }
        }
        for (e, (&k, &obj)) in count.iter().zip(&self.objective).enumerate() {
            if k == 0.0 && obj != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "objective touches entry {e} that no constraint covers"
                )));
            }
        }
        Ok(count)
    }
}

/// Termination state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// Residuals below tolerance.
    Solved,
    /// Iteration budget exhausted; the iterate is the best found.
    MaxIter,
    /// The iteration diverged, which for these programs means the
    /// constraints are inconsistent.
    Infeasible,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSample {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
}

/// Solver output: block values, objective in the program's sense, final
/// residuals, and the (unscaled) constraint multipliers.
#[derive(Clone, Debug, Serialize)]
pub struct ConicSolution {
    pub blocks: Vec<DenseMatrix>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    duals: Vec<Vec<f64>>,
    dual_mats: Vec<Option<usize>>,
    trace: Vec<ResidualSample>,
}

impl ConicSolution {
    pub(crate) fn new(
        blocks: Vec<DenseMatrix>,
        objective: f64,
        primal_residual: f64,
        dual_residual: f64,
        iterations: usize,
        status: SolveStatus,
        duals: Vec<Vec<f64>>,
        dual_mats: Vec<Option<usize>>,
        trace: Vec<ResidualSample>,
    ) -> Self {
        ConicSolution {
            blocks,
            objective,
            primal_residual,
            dual_residual,
            iterations,
            status,
            duals,
            dual_mats,
            trace,
        }
    }

    pub fn block(&self, b: usize) -> &DenseMatrix {
        &self.blocks[b]
    }

    pub fn scalar(&self, b: usize) -> f64 {
        debug_assert_eq!(self.blocks[b].shape(), (1, 1));
        self.blocks[b][(0, 0)]
    }

    /// Multiplier of constraint `c`, in view coordinates.
    pub fn dual_view(&self, c: usize) -> &[f64] {
        &self.duals[c]
    }

    /// Multiplier of a matrix-shaped constraint, reshaped.
    pub fn dual_matrix(&self, c: usize) -> Option<DenseMatrix> {
        let size = self.dual_mats[c]?;
        let vals = &self.duals[c][..size * size];
        Some(DenseMatrix::from_flat(size, size, vals.to_vec()).expect("view shape is square"))
    }

    pub fn residual_trace(&self) -> &[ResidualSample] {
        &self.trace
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialization cannot fail")
    }
}

/// A dual bound assembled from the constraint multipliers.
///
/// For a maximization the multipliers certify `objective <= value` up to
/// the reported feasibility defects: `stationarity_gap` is the norm of the
/// unmet first-order condition linking multipliers to the objective vector,
/// and `cone_infeasibility` the distance of the multipliers from their
/// admissible cones. Both shrink with the solver tolerance.
#[derive(Clone, Copy, Debug)]
pub struct DualCertificate {
    pub value: f64,
    pub stationarity_gap: f64,
    pub cone_infeasibility: f64,
}

/// Support-function bound from the multipliers of `sol`.
pub fn dual_certificate(prog: &ConicProgram, sol: &ConicSolution) -> DualCertificate {
    let total = prog.total_len();
    let mut ety = vec![0.0f64; total];
    let mut value = 0.0;
    let mut cone_infeas = 0.0f64;
    for (c, cons) in prog.constraints().iter().enumerate() {
        let y = sol.dual_view(c);
        for (&e, &yv) in cons.view.idx.iter().zip(y) {
            ety[e] += yv;
        }
        let (contrib, infeas) = support_value(&cons.kind, &cons.view, y);
        value += contrib;
        cone_infeas += infeas;
    }
    let sign = match prog.sense() {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut gap = 0.0f64;
    for (e, &c) in prog.objective_vec().iter().enumerate() {
        let diff = ety[e] - sign * c;
        gap += diff * diff;
    }
    DualCertificate {
        value: sign * value,
        stationarity_gap: gap.sqrt(),
        cone_infeasibility: cone_infeas,
    }
}

/// Support function sigma_K(y) of a constraint set, paired with the
/// distance of `y` from the domain where sigma is finite. Cones contribute
/// zero value and the norm of the primal-cone part of `y` (Moreau).
fn support_value(kind: &ConstraintKind, view: &View, y: &[f64]) -> (f64, f64) {
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    match kind {
        ConstraintKind::PsdCone => {
            let size = view.mat.expect("psd view is matrix-shaped");
            let mut m = DenseMatrix::from_flat(size, size, y.to_vec())
                .expect("view shape is square");
            m.symmetrize();
            let eig = sym_eig(&m).expect("dual view is square");
            let pos: f64 = eig.values.iter().map(|&l| l.max(0.0).powi(2)).sum();
            (0.0, pos.sqrt())
        }
        ConstraintKind::SumLeq { bound } => match bound {
            Bound::Const(r) => {
                // sigma over {sum x <= r}: finite only on y = t*1, t >= 0.
                let k = y.len() as f64;
                let t = (y.iter().sum::<f64>() / k).max(0.0);
                let dist: f64 = norm2(&y.iter().map(|v| v - t).collect::<Vec<_>>());
                (r * t, dist)
            }
            Bound::Scalar { .. } => {
                // Cone {(x, s): sum x - s <= 0}; polar is the ray t(1,..,1,-1).
                let k = y.len() as f64;
                let t = ((y[..y.len() - 1].iter().sum::<f64>() - y[y.len() - 1]) / k).max(0.0);
                let mut resid = 0.0;
                for &v in &y[..y.len() - 1] {
                    resid += (v - t) * (v - t);
                }
                let last = y[y.len() - 1] + t;
                resid += last * last;
                (0.0, resid.sqrt())
            }
        },
        ConstraintKind::NormLeq { p, bound } => {
            let q = crate::numerics::conjugate_exponent(*p);
            match bound {
                Bound::Const(r) => (r * lp_norm(y, q), 0.0),
                Bound::Scalar { .. } => {
                    // Polar cone {(u, s): ||u||_q <= -s}.
                    let (u, s) = y.split_at(y.len() - 1);
                    let excess = (lp_norm(u, q) + s[0]).max(0.0);
                    (0.0, excess)
                }
            }
        }
        ConstraintKind::MixedTraceL1Leq { nu, bound } => {
            let size = view.mat.expect("mixed view is matrix-shaped");
            match bound {
                Bound::Const(r) => {
                    let polar = mixed_polar(y, size, *nu);
                    if polar.is_finite() {
                        (r * polar, 0.0)
                    } else {
                        (0.0, f64::INFINITY)
                    }
                }
                Bound::Scalar { .. } => {
                    let (u, s) = y.split_at(y.len() - 1);
                    let polar = mixed_polar(u, size, *nu);
                    (0.0, (polar + s[0]).max(0.0))
                }
            }
        }
        ConstraintKind::Nonneg => {
            // sigma over the nonnegative orthant: finite (0) iff y <= 0.
            let pos: f64 = y.iter().map(|v| v.max(0.0).powi(2)).sum();
            (0.0, pos.sqrt())
        }
        ConstraintKind::EntryLeq { bound } => match bound {
            Bound::Const(r) => {
                // {x <= r}: sigma = r * sum y for y >= 0.
                let mut neg = 0.0;
                let mut sum = 0.0;
                for &v in y {
                    if v < 0.0 {
                        neg += v * v;
                    } else {
                        sum += v;
                    }
                }
                (r * sum, neg.sqrt())
            }
            Bound::Scalar { .. } => {
                // Cone {(x, s): x_i <= s}. By Moreau the distance of y from
                // the polar is the norm of the projection onto the cone.
                let mut x: Vec<f64> = y[..y.len() - 1].to_vec();
                let mut s = y[y.len() - 1];
                project::shared_upper_bound(&mut x, &mut s);
                let mut n = s * s;
                for &v in &x {
                    n += v * v;
                }
                (0.0, n.sqrt())
            }
        },
        ConstraintKind::PinValues { values } => {
            (y.iter().zip(values).map(|(a, b)| a * b).sum(), 0.0)
        }
        ConstraintKind::LinkEq { len } => {
            // {(a, b): a = b}: sigma finite (0) iff y_a = -y_b.
            let mut dist = 0.0;
            for i in 0..*len {
                let s = y[i] + y[len + i];
                dist += s * s;
            }
            (0.0, dist.sqrt())
        }
    }
}

/// Support of the mixed-gauge unit ball `{M : nu tr M + (1-nu)||M||_1 <= 1}`
/// at `y`. The gauge is separable across entries, so the ball's vertices are
/// single-entry matrices and the support is a max over entries: cost 1 per
/// unit of positive diagonal, `1 - 2nu` per unit of negative diagonal
/// (a free direction once `nu >= 1/2`, making the support infinite whenever
/// that direction improves), and `1 - nu` per unit off-diagonal.
fn mixed_polar(y: &[f64], size: usize, nu: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..size {
        for j in 0..size {
            let v = y[i * size + j];
            if i == j {
                best = best.max(v);
                if v < 0.0 {
                    let neg_cost = 1.0 - 2.0 * nu;
                    if neg_cost > 0.0 {
                        best = best.max(-v / neg_cost);
                    } else {
                        return f64::INFINITY;
                    }
                }
            } else if v != 0.0 {
                if nu >= 1.0 {
                    return f64::INFINITY;
                }
                best = best.max(v.abs() / (1.0 - nu));
            }
        }
    }
    best
}

/// Gauge of the set described by `spec`, evaluated in closed form:
/// the smallest `t >= 0` with `m in t * C`, or `Infinite` when no scaling
/// ever contains `m` (outside the PSD cone, the nonnegative orthant, or
/// the range condition of the lift).
pub fn gauge_of_spec(spec: &RelaxationSpec, m: &DenseMatrix) -> Result<GaugeValue> {
    let k = spec.dim;
    if m.rows() != k || m.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, spec dim is {k}",
            m.rows(),
            m.cols()
        )));
    }
    let tol = 1e-8 * (1.0 + m.max_abs());
    let mut need = 0.0f64;
    for c in &spec.constraints {
        let this = match *c {
            SpecConstraint::Psd => {
                let eig = sym_eig(m)?;
                let min = eig.values.last().copied().unwrap_or(0.0);
                if min < -tol {
                    return Ok(GaugeValue::Infinite);
                }
                0.0
            }
            SpecConstraint::TraceBound { radius } => m.trace().max(0.0) / radius,
            SpecConstraint::EntryNorm { p, radius } => lp_norm(m.data(), p) / radius,
            SpecConstraint::DiagNorm { p, radius } => lp_norm(&m.diagonal(), p) / radius,
            SpecConstraint::ElementwiseNonneg => {
                let min = m.data().iter().fold(f64::INFINITY, |a, &b| a.min(b));
                if min < -tol {
                    return Ok(GaugeValue::Infinite);
                }
                0.0
            }
            SpecConstraint::DiagBox { upper } => {
                let dmax = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
                dmax / upper
            }
            SpecConstraint::SchurDiagLift => {
                let d = m.diagonal();
                let (val, in_range) = pinv_quadratic(m, &d)?;
                if !in_range {
                    return Ok(GaugeValue::Infinite);
                }
                val
            }
            SpecConstraint::MixedTraceL1 { nu, radius } => {
                (nu * m.trace() + (1.0 - nu) * lp_norm(m.data(), 1.0)) / radius
            }
        };
        need = need.max(this);
    }
    Ok(GaugeValue::Finite(need))
}
