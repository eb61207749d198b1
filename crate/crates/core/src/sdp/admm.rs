//! Consensus ADMM over constraint views.
//!
//! Splitting: `max <c, x>` subject to `E_j x = z_j`, `z_j in K_j`, where
//! `E_j` gathers the entries constraint `j` watches. The x-update is a
//! per-entry average of the copies (weighted by how many constraints watch
//! the entry), the z-update projects each copy, and the scaled duals `w_j`
//! accumulate the consensus error. Minimization is handled by negating the
//! objective.

use crate::error::Result;
use crate::numerics::{psd_project_floor, DenseMatrix};

use super::project;
use super::{
    Bound, ConicProgram, ConicSolution, Constraint, ConstraintKind, ResidualSample, Sense,
    SolveStatus,
};

#[derive(Clone, Debug)]
pub struct AdmmSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial penalty; adapted during the run.
    pub rho: f64,
    /// Relaxation coefficient applied to `E_j x` in the z/w updates.
    pub over_relaxation: f64,
    /// Residual-balancing cadence and parameters: when one residual
    /// exceeds `balance_threshold` times the other, scale rho by
    /// `balance_factor` toward balance.
    pub balance_every: usize,
    pub balance_factor: f64,
    pub balance_threshold: f64,
    /// Iterations without residual improvement before the PSD projections
    /// get a small negative eigenvalue floor to break degenerate stalls.
    pub stall_window: usize,
    pub eigenvalue_shift: f64,
    /// Cadence of residual-trace samples kept in the solution.
    pub trace_every: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            tolerance: 1e-7,
            max_iterations: 20_000,
            rho: 1.0,
            over_relaxation: 1.5,
            balance_every: 25,
            balance_factor: 2.0,
            balance_threshold: 10.0,
            stall_window: 1500,
            eigenvalue_shift: 1e-9,
            trace_every: 25,
        }
    }
}

/// Solves with default settings at the given tolerance and budget.
pub fn solve(prog: &ConicProgram, tolerance: f64, max_iterations: usize) -> Result<ConicSolution> {
    let settings = AdmmSettings { tolerance, max_iterations, ..AdmmSettings::default() };
    solve_with(prog, &settings)
}

pub fn solve_with(prog: &ConicProgram, settings: &AdmmSettings) -> Result<ConicSolution> {
    let count = prog.validate()?;
    let total = prog.total_len();
    let sign = match prog.sense() {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let c: Vec<f64> = prog.objective_vec().iter().map(|v| sign * v).collect();
    let cnorm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cons = prog.constraints();

    let mut x = vec![0.0f64; total];
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(cons.len());
    for con in cons {
        let mut z0 = vec![0.0f64; con.view.idx.len()];
        project_constraint(con, &mut z0, 0.0)?;
        z.push(z0);
    }
    let mut w: Vec<Vec<f64>> = cons.iter().map(|c| vec![0.0f64; c.view.idx.len()]).collect();

    let mut rho = settings.rho;
    let mut shift = 0.0f64;
    let mut best_resid = f64::INFINITY;
    let mut since_best = 0usize;
    let mut trace = Vec::new();
    let mut scatter = vec![0.0f64; total];
    let mut zbuf: Vec<f64> = Vec::new();
    let mut vhat: Vec<f64> = Vec::new();

    let mut status = SolveStatus::MaxIter;
    let mut iterations = settings.max_iterations;
    let mut r_pri = f64::INFINITY;
    let mut r_dua = f64::INFINITY;

    for it in 0..settings.max_iterations {
        // x-update: count-weighted average of copies plus the objective tilt.
        for e in 0..total {
            x[e] = c[e] / rho;
        }
        for (j, con) in cons.iter().enumerate() {
            for (pos, &e) in con.view.idx.iter().enumerate() {
                x[e] += z[j][pos] - w[j][pos];
            }
        }
        for e in 0..total {
            x[e] = if count[e] > 0.0 { x[e] / count[e] } else { 0.0 };
        }
        for (off, dim) in prog.block_spans() {
            symmetrize_span(&mut x[off..off + dim * dim], dim);
        }

        // z/w updates with over-relaxation, accumulating residual terms.
        let alpha = settings.over_relaxation;
        let mut pri2 = 0.0f64;
        let mut ex2 = 0.0f64;
        let mut z2 = 0.0f64;
        let mut w2 = 0.0f64;
        scatter.iter_mut().for_each(|v| *v = 0.0);
        for (j, con) in cons.iter().enumerate() {
            zbuf.clear();
            vhat.clear();
            for (pos, &e) in con.view.idx.iter().enumerate() {
                let v = alpha * x[e] + (1.0 - alpha) * z[j][pos];
                vhat.push(v);
                zbuf.push(v + w[j][pos]);
            }
            project_constraint(con, &mut zbuf, shift)?;
            for (pos, &e) in con.view.idx.iter().enumerate() {
                let znew = zbuf[pos];
                let zold = z[j][pos];
                scatter[e] += znew - zold;
                let wnew = w[j][pos] + vhat[pos] - znew;
                w[j][pos] = wnew;
                let pr = x[e] - znew;
                pri2 += pr * pr;
                ex2 += x[e] * x[e];
                z2 += znew * znew;
                w2 += wnew * wnew;
                z[j][pos] = znew;
            }
        }
        r_pri = pri2.sqrt();
        r_dua = rho * scatter.iter().map(|v| v * v).sum::<f64>().sqrt();

        let eps_pri = settings.tolerance * (1.0 + ex2.sqrt().max(z2.sqrt()));
        let eps_dua = settings.tolerance * (1.0 + rho * w2.sqrt());

        if it % settings.trace_every == 0 {
            trace.push(ResidualSample { iteration: it, primal: r_pri, dual: r_dua });
        }

        if r_pri <= eps_pri && r_dua <= eps_dua {
            status = SolveStatus::Solved;
            iterations = it + 1;
            break;
        }

        let xnorm = ex2.sqrt();
        if !r_pri.is_finite()
            || !r_dua.is_finite()
            || xnorm > 1e12 * (1.0 + cnorm)
            || w2.sqrt() > 1e12
        {
            status = SolveStatus::Infeasible;
            iterations = it + 1;
            break;
        }

        // Stall detection: no 2x improvement of the relative residual for a
        // long stretch means the projections are chattering on a degenerate
        // face; give the PSD cone a hair of slack.
        let rel = (r_pri / eps_pri).max(r_dua / eps_dua);
        if rel < 0.5 * best_resid {
            best_resid = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > settings.stall_window && shift == 0.0 {
                shift = settings.eigenvalue_shift;
                since_best = 0;
            }
        }

        if (it + 1) % settings.balance_every == 0 {
            let f = settings.balance_factor;
            if r_pri > settings.balance_threshold * r_dua && rho < 1e6 {
                rho *= f;
                for wj in &mut w {
                    wj.iter_mut().for_each(|v| *v /= f);
                }
            } else if r_dua > settings.balance_threshold * r_pri && rho > 1e-6 {
                rho /= f;
                for wj in &mut w {
                    wj.iter_mut().for_each(|v| *v *= f);
                }
            }
        }
    }

    trace.push(ResidualSample { iteration: iterations, primal: r_pri, dual: r_dua });

    let mut blocks = Vec::with_capacity(prog.num_blocks());
    for (off, dim) in prog.block_spans() {
        blocks.push(
            DenseMatrix::from_flat(dim, dim, x[off..off + dim * dim].to_vec())
                .expect("block span is square"),
        );
    }
    let objective: f64 =
        prog.objective_vec().iter().zip(&x).map(|(a, b)| a * b).sum();
    let duals: Vec<Vec<f64>> = w
        .iter()
        .map(|wj| wj.iter().map(|v| rho * v).collect())
        .collect();
    let dual_mats: Vec<Option<usize>> = cons.iter().map(|c| c.view.mat).collect();

    Ok(ConicSolution::new(
        blocks,
        objective,
        r_pri,
        r_dua,
        iterations,
        status,
        duals,
        dual_mats,
        trace,
    ))
}

fn symmetrize_span(span: &mut [f64], dim: usize) {
    if dim <= 1 {
        return;
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let m = 0.5 * (span[i * dim + j] + span[j * dim + i]);
            span[i * dim + j] = m;
            span[j * dim + i] = m;
        }
    }
}

/// Projects a copy vector onto its constraint set. `shift` relaxes PSD
/// projections to eigenvalues `>= -shift`.
fn project_constraint(con: &Constraint, buf: &mut [f64], shift: f64) -> Result<()> {
    match &con.kind {
        ConstraintKind::PsdCone => {
            let size = con.view.mat.expect("psd views are matrix-shaped");
            let mut m = DenseMatrix::from_flat(size, size, buf.to_vec())
                .expect("view shape is square");
            m.symmetrize();
            let p = psd_project_floor(&m, -shift)?;
            buf.copy_from_slice(p.data());
        }
        ConstraintKind::SumLeq { bound } => match bound {
            Bound::Const(r) => project::halfspace_sum(buf, *r),
            Bound::Scalar { .. } => {
                let (v, s) = split_last(buf);
                project::halfspace_sum_scalar(v, s);
            }
        },
        ConstraintKind::NormLeq { p, bound } => match bound {
            Bound::Const(r) => {
                project::norm_ball(buf, *p, *r);
            }
            Bound::Scalar { .. } => {
                let (v, s) = split_last(buf);
                project::norm_cone(v, s, *p);
            }
        },
        ConstraintKind::MixedTraceL1Leq { nu, bound } => {
            let size = con.view.mat.expect("mixed views are matrix-shaped");
            match bound {
                Bound::Const(r) => {
                    project::mixed_trace_l1_ball(buf, size, *nu, *r);
                }
                Bound::Scalar { .. } => {
                    let (v, s) = split_last(buf);
                    project::mixed_trace_l1_cone(v, s, size, *nu);
                }
            }
        }
        ConstraintKind::Nonneg => {
            for v in buf.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        ConstraintKind::EntryLeq { bound } => match bound {
            Bound::Const(r) => {
                for v in buf.iter_mut() {
                    if *v > *r {
                        *v = *r;
                    }
                }
            }
            Bound::Scalar { .. } => {
                let (v, s) = split_last(buf);
                project::shared_upper_bound(v, s);
            }
        },
        ConstraintKind::PinValues { values } => {
            buf.copy_from_slice(values);
        }
        ConstraintKind::LinkEq { len } => {
            for i in 0..*len {
                let m = 0.5 * (buf[i] + buf[len + i]);
                buf[i] = m;
                buf[len + i] = m;
            }
        }
    }
    Ok(())
}

fn split_last(buf: &mut [f64]) -> (&mut [f64], &mut f64) {
    let (v, s) = buf.split_at_mut(buf.len() - 1);
    (v, &mut s[0])
}
