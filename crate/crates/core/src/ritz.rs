//! Nonlinear Ritz-type projection `Q_h`: the unique piecewise-linear field
//! with
//!
//! ```text
//! ∫ Phi''(y_rho) (Q_h y - y)_rho . eta_rho  +  ∫ (Q_h y - y) . eta  =  0
//! ```
//!
//! for all hat tests `eta`. Used to initialize runs at high order and as the
//! accuracy oracle of the convergence studies. The `Phi''(y_rho)` coefficient
//! and the `y`-dependent right-hand side are integrated with the same
//! per-element Gauss rule.

use alloc::string::String;
use alloc::vec;

use crate::anisotropy::Anisotropy;
use crate::assembly::CyclicBlockSystem;
use crate::error::{Error, Result};
use crate::mesh::{NodalField, PeriodicGrid};
use crate::quadrature::GaussRule;
use crate::solver;

#[derive(Clone, Copy, Debug)]
pub struct RitzOptions {
    pub quad_points_per_element: usize,
}

impl Default for RitzOptions {
    /// Three Gauss points: exact for quadratics, which keeps the quadrature
    /// perturbation below the projection's own `O(h^2)` accuracy.
    fn default() -> Self {
        RitzOptions { quad_points_per_element: 3 }
    }
}

/// Assemble the defining system for `Q_h y`. Exposed within the crate so the
/// orthogonality test can reuse the exact discrete operator.
pub(crate) fn assemble_system(
    a: &Anisotropy,
    grid: PeriodicGrid,
    dim: usize,
    y: &impl Fn(f64, &mut [f64]),
    y_rho: &impl Fn(f64, &mut [f64]),
    opts: &RitzOptions,
) -> Result<CyclicBlockSystem> {
    if opts.quad_points_per_element < 2 {
        return Err(Error::InvalidInput(String::from(
            "ritz projection needs at least 2 quadrature points per element",
        )));
    }
    let rule = GaussRule::new(opts.quad_points_per_element);
    let jn = grid.element_count();
    let h = grid.h();
    let d = dim;
    let bs = d * d;

    let mut sys = CyclicBlockSystem::zeros(jn, d);
    let mut yv = vec![0.0; d];
    let mut yd = vec![0.0; d];
    let mut phipp = vec![0.0; bs];
    let mut g = vec![0.0; bs];
    let mut s_e = vec![0.0; d];

    for e in 0..jn {
        let l = (e + jn - 1) % jn;
        let start = grid.element_start(e);
        g.fill(0.0);
        s_e.fill(0.0);
        for (&xi, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let rho = start + xi * h;
            y_rho(rho, &mut yd);
            a.d2big_phi_into(&yd, &mut phipp)?;
            let w = wq * h;
            for i in 0..bs {
                g[i] += w * phipp[i];
            }
            // stiffness right-hand side ∫ Phi''(y_rho) y_rho over the element
            for i in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += phipp[i * d + k] * yd[k];
                }
                s_e[i] += w * s;
            }
            // mass right-hand side ∫ y . eta with hat values (1-xi, xi)
            y(rho, &mut yv);
            for i in 0..d {
                sys.rhs[l * d + i] += w * (1.0 - xi) * yv[i];
                sys.rhs[e * d + i] += w * xi * yv[i];
            }
        }
        let inv_h2 = 1.0 / (h * h);
        for i in 0..bs {
            let k = g[i] * inv_h2;
            sys.diag[e * bs + i] += k;
            sys.diag[l * bs + i] += k;
            sys.sub[e * bs + i] -= k;
            sys.sup[l * bs + i] -= k;
        }
        // consistent mass of the unknown (exact: both factors are linear)
        for i in 0..d {
            sys.diag[e * bs + i * d + i] += h / 3.0;
            sys.diag[l * bs + i * d + i] += h / 3.0;
            sys.sub[e * bs + i * d + i] += h / 6.0;
            sys.sup[l * bs + i * d + i] += h / 6.0;
        }
        // stiffness rhs: test slopes are -1/h at node l, +1/h at node e
        for i in 0..d {
            sys.rhs[e * d + i] += s_e[i] / h;
            sys.rhs[l * d + i] -= s_e[i] / h;
        }
    }
    Ok(sys)
}

/// Ritz-type projection of a smooth closed curve `y` (with derivative
/// `y_rho`, nonvanishing on `[0,1]`) onto the piecewise-linear space.
pub fn ritz_project(
    a: &Anisotropy,
    grid: PeriodicGrid,
    dim: usize,
    y: impl Fn(f64, &mut [f64]),
    y_rho: impl Fn(f64, &mut [f64]),
    opts: &RitzOptions,
) -> Result<NodalField> {
    let sys = assemble_system(a, grid, dim, &y, &y_rho, opts)?;
    let sol = solver::solve_linear(&sys)?;
    NodalField::from_values(grid, dim, sol)
}
