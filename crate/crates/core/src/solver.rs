//! Newton iteration per implicit time step, the cyclic block-tridiagonal
//! direct solve behind it, and the outer time loop with monitors.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::anisotropy::{Anisotropy, Mobility};
use crate::assembly::{self, CyclicBlockSystem, SchemeOptions};
use crate::diagnostics::{self, TimeSeriesRecord};
use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::mesh::{self, NodalField, PeriodicGrid};

/// Newton iterates with an edge derivative shorter than this are rejected
/// outright; the scheme's theory requires `|x_rho| >= c0 > 0`.
const EDGE_GUARD: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Converged when the l2 norm of the residual vector drops below this.
    pub tol_residual: f64,
    /// Secondary stop: l2 norm of the Newton increment.
    pub tol_step: f64,
    pub max_iter: usize,
}

impl NewtonOptions {
    /// Defaults scaled to the grid: `tol_residual = 1e-12 sqrt(J)` keeps the
    /// nonlinear-solve error negligible against the discretization error.
    pub fn default_for(grid: PeriodicGrid) -> Self {
        NewtonOptions {
            tol_residual: 1e-12 * math::sqrt(grid.node_count() as f64),
            tol_step: 1e-12,
            max_iter: 20,
        }
    }
}

/// Outcome of one implicit Euler step.
#[derive(Clone, Copy, Debug)]
pub struct StepReport {
    pub newton_iters: usize,
    pub final_residual: f64,
    pub energy_big_phi_before: f64,
    pub energy_big_phi_after: f64,
    /// `(1/dt) (x_new - x_old)^T M_H (x_new - x_old)`, the dissipated energy
    /// of the discrete stability estimate.
    pub dissipation: f64,
}

/// Direct solve of a cyclic block-tridiagonal system by block Thomas
/// elimination on the leading `J-1` nodes with a bordered Schur complement
/// for the last node (the periodic corner).
pub fn solve_linear(sys: &CyclicBlockSystem) -> Result<Vec<f64>> {
    let n = sys.blocks;
    let d = sys.dim;
    let bs = d * d;
    assert!(n >= 2, "cyclic structure needs at least 2 blocks");
    let m = d + 1; // columns: d border columns + 1 rhs column
    let nt = n - 1; // rows handled by the Thomas sweep

    // singularity floor relative to the whole system, so a collapsed Schur
    // complement of a well-scaled singular system is caught
    let mut sys_scale = 0.0f64;
    for v in sys.sub.iter().chain(&sys.diag).chain(&sys.sup) {
        sys_scale = sys_scale.max(math::abs(*v));
    }
    let pivot_floor = 64.0 * f64::EPSILON * sys_scale;

    // per-row right-hand sides [U | r] as d x (d+1) blocks
    let mut rmat = vec![0.0; nt * d * m];
    for i in 0..nt {
        for r in 0..d {
            rmat[(i * d + r) * m + d] = sys.rhs[i * d + r];
        }
    }
    // border column: row 0's sub couples node n-1, row n-2's sup couples it
    for r in 0..d {
        for c in 0..d {
            rmat[r * m + c] += sys.sub_block(0)[r * d + c];
            rmat[((nt - 1) * d + r) * m + c] += sys.sup_block(nt - 1)[r * d + c];
        }
    }

    // forward elimination, storing W_i = Dhat_i^{-1} sup_i and
    // Z_i = Dhat_i^{-1} Rhat_i
    let mut w = vec![0.0; nt * bs];
    let mut z = vec![0.0; nt * d * m];
    let mut dhat = vec![0.0; bs];
    let mut piv = vec![0usize; d];
    let mut col = vec![0.0; d];
    dhat.copy_from_slice(sys.diag_block(0));
    let mut rhat = vec![0.0; d * m];
    rhat.copy_from_slice(&rmat[0..d * m]);
    for i in 0..nt {
        let mut lu = dhat.clone();
        lu_factor_or_singular(&mut lu, d, &mut piv, pivot_floor)?;
        // Z_i
        for c in 0..m {
            for r in 0..d {
                col[r] = rhat[r * m + c];
            }
            linalg::lu_solve(&lu, d, &piv, &mut col);
            for r in 0..d {
                z[(i * d + r) * m + c] = col[r];
            }
        }
        // W_i (only needed when a right neighbour exists inside the sweep)
        if i + 1 < nt {
            let sup = sys.sup_block(i);
            for c in 0..d {
                for r in 0..d {
                    col[r] = sup[r * d + c];
                }
                linalg::lu_solve(&lu, d, &piv, &mut col);
                for r in 0..d {
                    w[i * bs + r * d + c] = col[r];
                }
            }
            // Dhat_{i+1} = diag_{i+1} - sub_{i+1} W_i
            let sub = sys.sub_block(i + 1);
            let wi = &w[i * bs..(i + 1) * bs];
            for r in 0..d {
                for c in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += sub[r * d + k] * wi[k * d + c];
                    }
                    dhat[r * d + c] = sys.diag_block(i + 1)[r * d + c] - s;
                }
            }
            // Rhat_{i+1} = R_{i+1} - sub_{i+1} Z_i
            for r in 0..d {
                for c in 0..m {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += sub[r * d + k] * z[(i * d + k) * m + c];
                    }
                    rhat[r * m + c] = rmat[((i + 1) * d + r) * m + c] - s;
                }
            }
        }
    }

    // back substitution: X_i = Z_i - W_i X_{i+1}
    let mut x = vec![0.0; nt * d * m];
    let last = nt - 1;
    x[last * d * m..].copy_from_slice(&z[last * d * m..]);
    for i in (0..last).rev() {
        let (xi, xnext) = {
            let (a, b) = x.split_at_mut((i + 1) * d * m);
            (&mut a[i * d * m..], &b[0..d * m])
        };
        let wi = &w[i * bs..(i + 1) * bs];
        for r in 0..d {
            for c in 0..m {
                let mut s = 0.0;
                for k in 0..d {
                    s += wi[r * d + k] * xnext[k * m + c];
                }
                xi[r * m + c] = z[(i * d + r) * m + c] - s;
            }
        }
    }

    // Schur complement on the last node: row n-1 couples node n-2 (sub),
    // itself (diag), and node 0 (sup)
    let mut schur = vec![0.0; bs];
    schur.copy_from_slice(sys.diag_block(n - 1));
    let mut rhs_s = vec![0.0; d];
    rhs_s.copy_from_slice(&sys.rhs[(n - 1) * d..]);
    let corr = |schur: &mut [f64], rhs_s: &mut [f64], block: &[f64], node: usize, x: &[f64]| {
        for r in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += block[r * d + k] * x[(node * d + k) * m + c];
                }
                schur[r * d + c] -= s;
            }
            let mut s = 0.0;
            for k in 0..d {
                s += block[r * d + k] * x[(node * d + k) * m + d];
            }
            rhs_s[r] -= s;
        }
    };
    corr(&mut schur, &mut rhs_s, sys.sup_block(n - 1), 0, &x);
    corr(&mut schur, &mut rhs_s, sys.sub_block(n - 1), nt - 1, &x);

    lu_factor_or_singular(&mut schur, d, &mut piv, pivot_floor)?;
    linalg::lu_solve(&schur, d, &piv, &mut rhs_s);

    let mut sol = vec![0.0; n * d];
    sol[(n - 1) * d..].copy_from_slice(&rhs_s);
    for i in 0..nt {
        for r in 0..d {
            let mut s = x[(i * d + r) * m + d];
            for k in 0..d {
                s -= x[(i * d + r) * m + k] * rhs_s[k];
            }
            sol[i * d + r] = s;
        }
    }
    Ok(sol)
}

fn lu_factor_or_singular(a: &mut [f64], d: usize, piv: &mut [usize], floor: f64) -> Result<()> {
    linalg::lu_factor_with_floor(a, d, piv, floor).map_err(|_| Error::SingularSystem)
}

fn check_edges(x: &NodalField) -> Result<()> {
    let jn = x.grid().element_count();
    let mut p = vec![0.0; x.dim()];
    for e in 0..jn {
        x.edge_derivative_into(e, &mut p);
        if math::norm(&p) < EDGE_GUARD {
            return Err(Error::DegenerateVector);
        }
    }
    Ok(())
}

/// One implicit Euler step by Newton iteration with the frozen-`H` Jacobian;
/// the returned report carries the energies and the dissipation of the
/// discrete stability estimate.
pub fn solve_timestep(
    a: &Anisotropy,
    mob: &Mobility,
    opts: &SchemeOptions,
    newton: &NewtonOptions,
    x_old: &NodalField,
    t_new: f64,
) -> Result<(NodalField, StepReport)> {
    let grid = x_old.grid();
    let d = x_old.dim();
    let n = grid.node_count() * d;

    check_edges(x_old)?;
    let h_blocks = assembly::build_h_blocks(a, mob, x_old)?;
    let forcing = match &opts.forcing {
        Some(f) => Some(assembly::forcing_node_values(f, grid, d, t_new - opts.dt)?),
        None => None,
    };

    let energy_before = mesh::energy_big_phi(a, x_old)?;
    let mut x = x_old.clone();
    let mut r = vec![0.0; n];
    assembly::residual_with(a, opts.mass, opts.dt, &h_blocks, forcing.as_deref(), x_old, &x, &mut r)?;
    let mut rnorm = math::norm(&r);

    let mut iters = 0usize;
    if rnorm > newton.tol_residual {
        let mut sys = CyclicBlockSystem::zeros(grid.node_count(), d);
        let mut increases = 0usize;
        let mut converged = false;
        for iter in 1..=newton.max_iter {
            assembly::jacobian_with(a, opts.mass, opts.dt, &h_blocks, &x, &mut sys)?;
            for (dst, &src) in sys.rhs.iter_mut().zip(&r) {
                *dst = -src;
            }
            let delta = solve_linear(&sys)?;
            for (v, &dv) in x.values_mut().iter_mut().zip(&delta) {
                *v += dv;
            }
            check_edges(&x)?;
            assembly::residual_with(
                a,
                opts.mass,
                opts.dt,
                &h_blocks,
                forcing.as_deref(),
                x_old,
                &x,
                &mut r,
            )?;
            let rnorm_new = math::norm(&r);
            iters = iter;
            if rnorm_new <= newton.tol_residual || math::norm(&delta) <= newton.tol_step {
                rnorm = rnorm_new;
                converged = true;
                break;
            }
            if rnorm_new > rnorm {
                increases += 1;
                if increases >= 2 {
                    return Err(Error::NewtonDiverged { iters: iter, residual: rnorm_new });
                }
            } else {
                increases = 0;
            }
            rnorm = rnorm_new;
        }
        if !converged {
            return Err(Error::NewtonDiverged { iters, residual: rnorm });
        }
    }

    let mut v = vec![0.0; n];
    for (vi, (new, old)) in v.iter_mut().zip(x.values().iter().zip(x_old.values())) {
        *vi = new - old;
    }
    let dissipation =
        assembly::h_weighted_quadratic(&h_blocks, opts.mass, grid, d, &v) / opts.dt;
    let energy_after = mesh::energy_big_phi(a, &x)?;

    Ok((
        x,
        StepReport {
            newton_iters: iters,
            final_residual: rnorm,
            energy_big_phi_before: energy_before,
            energy_big_phi_after: energy_after,
            dissipation,
        },
    ))
}

/// Parameters of a full evolution run.
pub struct FlowParams {
    pub dt: f64,
    pub t_end: f64,
    pub mass: assembly::MassTreatment,
    /// `None` picks [`NewtonOptions::default_for`] the grid.
    pub newton: Option<NewtonOptions>,
    pub forcing: Option<ForcingSlot>,
    /// Emit a frame every this many steps (0 = no frames). The initial and
    /// final curves are always included when frames are on.
    pub frames_every: usize,
}

/// Forcing for `run_flow`; kept separate from [`SchemeOptions`] so params
/// stay constructible without an options dance.
pub type ForcingSlot = assembly::ForcingTerm;

/// Number of uniform steps covering `[0, t_end]`; errors unless `t_end` is an
/// integer multiple of `dt` to within 1e-9 relative.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidInput(String::from("need dt > 0 and T >= 0")));
    }
    let ratio = t_end / dt;
    let m = libm_round(ratio);
    if (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidInput(String::from(
            "T must be an integer multiple of dt",
        )));
    }
    Ok(m as usize)
}

#[inline]
fn libm_round(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.round()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::round(x)
    }
}

/// Run the time loop from `x0`, recording per-step monitors. `on_frame`
/// receives `(step, t, curve)` at the configured cadence and may return
/// `false` to abort the run.
pub fn run_flow(
    a: &Anisotropy,
    mob: &Mobility,
    params: &FlowParams,
    x0: NodalField,
    mut on_frame: impl FnMut(usize, f64, &NodalField) -> bool,
) -> Result<(NodalField, Vec<TimeSeriesRecord>)> {
    let steps = step_count(params.dt, params.t_end)?;
    let grid = x0.grid();
    let newton = params.newton.unwrap_or_else(|| NewtonOptions::default_for(grid));
    let mut opts = SchemeOptions::new(params.mass, params.dt)?;
    if let Some(f) = &params.forcing {
        opts = opts.with_forcing(f.clone());
    }

    let mut series = Vec::with_capacity(steps + 1);
    series.push(monitor_record(a, &x0, 0, 0.0, 0, 0.0)?);
    if params.frames_every > 0 && !on_frame(0, 0.0, &x0) {
        return Err(Error::Aborted { step: 0 });
    }

    let mut x = x0;
    for m in 1..=steps {
        let t_new = m as f64 * params.dt;
        let (x_next, report) = solve_timestep(a, mob, &opts, &newton, &x, t_new)
            .map_err(|e| Error::StepFailed { step: m, source: Box::new(e) })?;
        x = x_next;
        series.push(monitor_record(a, &x, m, t_new, report.newton_iters, report.final_residual)?);
        if params.frames_every > 0 && (m % params.frames_every == 0 || m == steps) {
            if !on_frame(m, t_new, &x) {
                return Err(Error::Aborted { step: m });
            }
        }
    }
    Ok((x, series))
}

fn monitor_record(
    a: &Anisotropy,
    x: &NodalField,
    step: usize,
    t: f64,
    newton_iters: usize,
    residual: f64,
) -> Result<TimeSeriesRecord> {
    Ok(TimeSeriesRecord {
        step,
        t,
        e_phi: mesh::energy_phi(a, x)?,
        e_big_phi: mesh::energy_big_phi(a, x)?,
        ratio: mesh::element_ratio(x)?,
        k_inf: diagnostics::k_infinity(x)?,
        newton_iters,
        residual,
    })
}
