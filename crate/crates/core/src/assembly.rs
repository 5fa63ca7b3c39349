//! Residual and Jacobian of the fully discrete scheme
//!
//! ```text
//! (1/dt) ∫ H(x_old_rho) (x_new - x_old) . eta  +  ∫ Phi'(x_new_rho) . eta_rho
//!     = ∫ pi_h[ f(t_old) . eta ]                 for all hats eta,
//! ```
//!
//! with `H` frozen at the old edge directions (the semi-implicitness is part
//! of the scheme itself). Both integrals on the left are exact: `H` and
//! `Phi'(x_rho)` are constant per element. The forcing term on the right uses
//! the interpolated (hence lumped) form and is evaluated at the old time
//! level, which is how the manufactured-solution correction is defined.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::anisotropy::{Anisotropy, Mobility};
use crate::error::{Error, Result};
use crate::flow_matrix::{self, HScratch};
use crate::mesh::{NodalField, PeriodicGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassTreatment {
    /// Element mass weights `(h/6)(2,1;1,2)` applied blockwise with the
    /// element matrix `H`.
    Consistent,
    /// Nodal weight `h` with the average of the two adjacent element `H`s.
    Lumped,
}

type ForcingFn = Arc<dyn Fn(f64, f64, &mut [f64]) -> Result<()> + Send + Sync>;
type ScaleFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Right-hand side `f(rho, t)`, evaluated at the nodes.
#[derive(Clone)]
pub struct ForcingTerm {
    imp: ForcingImpl,
}

#[derive(Clone)]
enum ForcingImpl {
    Pointwise(ForcingFn),
    /// For self-similar exact solutions `y = s(t) u(rho)`:
    /// `f(q_j, t) = s^2 s' a_j - s b_j` with precomputed nodal vectors
    /// `a_j = H(u') u` and `b_j = Phi''(u') u''`.
    SelfSimilarNodes {
        coef_a: Vec<f64>,
        coef_b: Vec<f64>,
        scale: ScaleFn,
        dim: usize,
    },
}

impl ForcingTerm {
    pub fn from_fn(
        f: impl Fn(f64, f64, &mut [f64]) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        ForcingTerm { imp: ForcingImpl::Pointwise(Arc::new(f)) }
    }

    pub(crate) fn self_similar_nodes(
        coef_a: Vec<f64>,
        coef_b: Vec<f64>,
        scale: ScaleFn,
        dim: usize,
    ) -> Self {
        ForcingTerm { imp: ForcingImpl::SelfSimilarNodes { coef_a, coef_b, scale, dim } }
    }

    /// Evaluate `f` at node `j` of `grid` and time `t`.
    pub fn eval_node(
        &self,
        grid: PeriodicGrid,
        j: usize,
        t: f64,
        out: &mut [f64],
    ) -> Result<()> {
        match &self.imp {
            ForcingImpl::Pointwise(f) => f(grid.node(j), t, out),
            ForcingImpl::SelfSimilarNodes { coef_a, coef_b, scale, dim } => {
                if coef_a.len() != grid.node_count() * dim {
                    return Err(Error::InvalidInput(String::from(
                        "self-similar forcing was precomputed for a different grid",
                    )));
                }
                let (s, ds) = scale(t);
                let c1 = s * s * ds;
                for i in 0..*dim {
                    out[i] = c1 * coef_a[j * dim + i] - s * coef_b[j * dim + i];
                }
                Ok(())
            }
        }
    }
}

/// Parameters of one implicit Euler step.
#[derive(Clone)]
pub struct SchemeOptions {
    pub mass: MassTreatment,
    pub dt: f64,
    pub forcing: Option<ForcingTerm>,
}

impl SchemeOptions {
    pub fn new(mass: MassTreatment, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(String::from("time step must be positive")));
        }
        Ok(SchemeOptions { mass, dt, forcing: None })
    }

    pub fn with_forcing(mut self, forcing: ForcingTerm) -> Self {
        self.forcing = Some(forcing);
        self
    }
}

/// Cyclic block-tridiagonal system: `J` diagonal blocks with sub/super
/// neighbours and periodic corner coupling (row 0 reaches node `J-1`, row
/// `J-1` reaches node 0). Blocks are row-major `d x d`, stored per block row.
#[derive(Clone, Debug)]
pub struct CyclicBlockSystem {
    pub blocks: usize,
    pub dim: usize,
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl CyclicBlockSystem {
    pub fn zeros(blocks: usize, dim: usize) -> Self {
        let b = blocks * dim * dim;
        CyclicBlockSystem {
            blocks,
            dim,
            sub: vec![0.0; b],
            diag: vec![0.0; b],
            sup: vec![0.0; b],
            rhs: vec![0.0; blocks * dim],
        }
    }

    #[inline]
    pub fn sub_block(&self, j: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.sub[j * s..(j + 1) * s]
    }

    #[inline]
    pub fn diag_block(&self, j: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.diag[j * s..(j + 1) * s]
    }

    #[inline]
    pub fn sup_block(&self, j: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.sup[j * s..(j + 1) * s]
    }

    /// Dense matrix-vector product, for oracles and residual checks.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (jn, d) = (self.blocks, self.dim);
        out.fill(0.0);
        for j in 0..jn {
            let prev = (j + jn - 1) % jn;
            let next = (j + 1) % jn;
            let row = &mut out[j * d..(j + 1) * d];
            block_mul_add(self.sub_block(j), &x[prev * d..(prev + 1) * d], d, row);
            block_mul_add(self.diag_block(j), &x[j * d..(j + 1) * d], d, row);
            block_mul_add(self.sup_block(j), &x[next * d..(next + 1) * d], d, row);
        }
    }
}

#[inline]
fn block_mul_add(b: &[f64], x: &[f64], d: usize, out: &mut [f64]) {
    for i in 0..d {
        let mut s = 0.0;
        for k in 0..d {
            s += b[i * d + k] * x[k];
        }
        out[i] += s;
    }
}

/// Element matrices `H(x_old_rho)`, frozen for the whole Newton solve of one
/// step; `J` row-major `d x d` blocks.
pub(crate) fn build_h_blocks(
    a: &Anisotropy,
    mob: &Mobility,
    x_old: &NodalField,
) -> Result<Vec<f64>> {
    let jn = x_old.grid().element_count();
    let d = x_old.dim();
    let mut blocks = vec![0.0; jn * d * d];
    let mut scratch = HScratch::new(d);
    let mut p = vec![0.0; d];
    for e in 0..jn {
        x_old.edge_derivative_into(e, &mut p);
        flow_matrix::h_into(a, mob, &p, &mut scratch, &mut blocks[e * d * d..(e + 1) * d * d])?;
    }
    Ok(blocks)
}

/// `out = M_H v` for the chosen mass treatment.
pub(crate) fn h_mass_apply(
    h_blocks: &[f64],
    mass: MassTreatment,
    grid: PeriodicGrid,
    d: usize,
    v: &[f64],
    out: &mut [f64],
) {
    let jn = grid.element_count();
    let h = grid.h();
    out.fill(0.0);
    let mut tmp = vec![0.0; d];
    for e in 0..jn {
        let l = (e + jn - 1) % jn;
        let r = e;
        let he = &h_blocks[e * d * d..(e + 1) * d * d];
        let vl = &v[l * d..(l + 1) * d];
        let vr = &v[r * d..(r + 1) * d];
        match mass {
            MassTreatment::Consistent => {
                // node l: (h/6)(2 v_l + v_r); node r: (h/6)(v_l + 2 v_r)
                for i in 0..d {
                    tmp[i] = 2.0 * vl[i] + vr[i];
                }
                let w = h / 6.0;
                for i in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += he[i * d + k] * tmp[k];
                    }
                    out[l * d + i] += w * s;
                }
                for i in 0..d {
                    tmp[i] = vl[i] + 2.0 * vr[i];
                }
                for i in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += he[i * d + k] * tmp[k];
                    }
                    out[r * d + i] += w * s;
                }
            }
            MassTreatment::Lumped => {
                let w = 0.5 * h;
                for i in 0..d {
                    let mut sl = 0.0;
                    let mut sr = 0.0;
                    for k in 0..d {
                        sl += he[i * d + k] * vl[k];
                        sr += he[i * d + k] * vr[k];
                    }
                    out[l * d + i] += w * sl;
                    out[r * d + i] += w * sr;
                }
            }
        }
    }
}

/// `v^T M_H v`, the dissipation quadratic form of the stability estimate.
pub(crate) fn h_weighted_quadratic(
    h_blocks: &[f64],
    mass: MassTreatment,
    grid: PeriodicGrid,
    d: usize,
    v: &[f64],
) -> f64 {
    let mut mv = vec![0.0; v.len()];
    h_mass_apply(h_blocks, mass, grid, d, v, &mut mv);
    crate::math::dot(&mv, v)
}

pub(crate) fn forcing_node_values(
    forcing: &ForcingTerm,
    grid: PeriodicGrid,
    d: usize,
    t: f64,
) -> Result<Vec<f64>> {
    let jn = grid.node_count();
    let mut vals = vec![0.0; jn * d];
    for j in 0..jn {
        forcing.eval_node(grid, j, t, &mut vals[j * d..(j + 1) * d])?;
    }
    Ok(vals)
}

/// Residual with precomputed `H` blocks and nodal forcing values.
pub(crate) fn residual_with(
    a: &Anisotropy,
    mass: MassTreatment,
    dt: f64,
    h_blocks: &[f64],
    forcing_nodes: Option<&[f64]>,
    x_old: &NodalField,
    x_new: &NodalField,
    out: &mut [f64],
) -> Result<()> {
    let grid = x_new.grid();
    let jn = grid.element_count();
    let d = x_new.dim();
    let h = grid.h();

    let mut v = vec![0.0; jn * d];
    for (vi, (new, old)) in v.iter_mut().zip(x_new.values().iter().zip(x_old.values())) {
        *vi = new - old;
    }
    h_mass_apply(h_blocks, mass, grid, d, &v, out);
    let inv_dt = 1.0 / dt;
    for o in out.iter_mut() {
        *o *= inv_dt;
    }

    let mut p = vec![0.0; d];
    let mut dphi = vec![0.0; d];
    for e in 0..jn {
        x_new.edge_derivative_into(e, &mut p);
        a.dbig_phi_into(&p, &mut dphi)?;
        if crate::math::norm(&p) <= crate::error::DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateVector);
        }
        let l = (e + jn - 1) % jn;
        for i in 0..d {
            out[e * d + i] += dphi[i];
            out[l * d + i] -= dphi[i];
        }
    }

    if let Some(f) = forcing_nodes {
        for (o, fi) in out.iter_mut().zip(f) {
            *o -= h * fi;
        }
    }
    Ok(())
}

/// Nonlinear residual of the scheme at `x_new`; zero characterizes the
/// solution of the step ending at `t_new`.
pub fn residual(
    a: &Anisotropy,
    mob: &Mobility,
    opts: &SchemeOptions,
    x_old: &NodalField,
    x_new: &NodalField,
    t_new: f64,
) -> Result<Vec<f64>> {
    let grid = x_new.grid();
    let d = x_new.dim();
    let h_blocks = build_h_blocks(a, mob, x_old)?;
    let forcing = match &opts.forcing {
        Some(f) => Some(forcing_node_values(f, grid, d, t_new - opts.dt)?),
        None => None,
    };
    let mut out = vec![0.0; grid.node_count() * d];
    residual_with(a, opts.mass, opts.dt, &h_blocks, forcing.as_deref(), x_old, x_new, &mut out)?;
    Ok(out)
}

/// Jacobian blocks with precomputed `H` blocks; the system's rhs is left
/// untouched.
pub(crate) fn jacobian_with(
    a: &Anisotropy,
    mass: MassTreatment,
    dt: f64,
    h_blocks: &[f64],
    x_new: &NodalField,
    sys: &mut CyclicBlockSystem,
) -> Result<()> {
    let grid = x_new.grid();
    let jn = grid.element_count();
    let d = x_new.dim();
    let h = grid.h();
    let bs = d * d;

    sys.sub.fill(0.0);
    sys.diag.fill(0.0);
    sys.sup.fill(0.0);

    let mut p = vec![0.0; d];
    let mut phipp = vec![0.0; bs];
    for e in 0..jn {
        x_new.edge_derivative_into(e, &mut p);
        a.d2big_phi_into(&p, &mut phipp)?;
        let he = &h_blocks[e * bs..(e + 1) * bs];
        let l = (e + jn - 1) % jn;
        // stiffness: element e couples nodes l and e
        for i in 0..bs {
            let k = phipp[i] / h;
            sys.diag[e * bs + i] += k;
            sys.diag[l * bs + i] += k;
            sys.sub[e * bs + i] -= k; // row e, column l
            sys.sup[l * bs + i] -= k; // row l, column e
        }
        // H-mass, frozen at x_old
        match mass {
            MassTreatment::Consistent => {
                let w = h / (6.0 * dt);
                for i in 0..bs {
                    sys.diag[e * bs + i] += 2.0 * w * he[i];
                    sys.diag[l * bs + i] += 2.0 * w * he[i];
                    sys.sub[e * bs + i] += w * he[i];
                    sys.sup[l * bs + i] += w * he[i];
                }
            }
            MassTreatment::Lumped => {
                let w = h / (2.0 * dt);
                for i in 0..bs {
                    sys.diag[e * bs + i] += w * he[i];
                    sys.diag[l * bs + i] += w * he[i];
                }
            }
        }
    }
    Ok(())
}

/// Exact Jacobian of [`residual`] with respect to the new nodal values.
pub fn jacobian(
    a: &Anisotropy,
    mob: &Mobility,
    opts: &SchemeOptions,
    x_old: &NodalField,
    x_new: &NodalField,
) -> Result<CyclicBlockSystem> {
    let h_blocks = build_h_blocks(a, mob, x_old)?;
    let mut sys = CyclicBlockSystem::zeros(x_new.grid().element_count(), x_new.dim());
    jacobian_with(a, opts.mass, opts.dt, &h_blocks, x_new, &mut sys)?;
    Ok(sys)
}

/// Forcing for a manufactured solution `y`:
/// `f = H(y_rho) y_t - Phi''(y_rho) y_rhorho`, evaluated pointwise from the
/// supplied closed-form derivatives.
pub fn forcing_from_exact(
    a: &Anisotropy,
    mob: &Mobility,
    y_rho: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static,
    y_t: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static,
    y_rhorho: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static,
) -> ForcingTerm {
    let a = a.clone();
    let mob = *mob;
    let d = a.dim();
    ForcingTerm::from_fn(move |rho, t, out| {
        let mut p = vec![0.0; d];
        let mut yt = vec![0.0; d];
        let mut ypp = vec![0.0; d];
        y_rho(rho, t, &mut p);
        y_t(rho, t, &mut yt);
        y_rhorho(rho, t, &mut ypp);
        let mut scratch = HScratch::new(d);
        let mut hmat = vec![0.0; d * d];
        flow_matrix::h_into(&a, &mob, &p, &mut scratch, &mut hmat)?;
        let mut phipp = vec![0.0; d * d];
        a.d2big_phi_into(&p, &mut phipp)?;
        for i in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += hmat[i * d + k] * yt[k] - phipp[i * d + k] * ypp[k];
            }
            out[i] = s;
        }
        Ok(())
    })
}
