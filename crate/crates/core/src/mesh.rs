//! Uniform periodic grid on `[0,1]` and continuous piecewise-linear
//! vector-valued fields on it.
//!
//! Nodes are stored 0-indexed, `q_j = j/J` for `j = 0..J-1`, with `q_J`
//! identified with `q_0`. Element `j` spans `[q_{j-1 mod J}, q_j]`, so
//! element `0` is the wrap-around element between the last node and node 0;
//! its parameter interval is `[1 - h, 1]`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result, DEGENERACY_THRESHOLD};
use crate::math;
use crate::quadrature::GaussRule;

/// Uniform partition of the periodic interval `[0,1]` into `J >= 3` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodicGrid {
    elements: usize,
}

impl PeriodicGrid {
    pub fn new(elements: usize) -> Result<Self> {
        if elements < 3 {
            return Err(Error::InvalidInput(String::from(
                "a periodic grid needs at least 3 elements",
            )));
        }
        Ok(PeriodicGrid { elements })
    }

    #[inline]
    pub fn element_count(&self) -> usize {
        self.elements
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.elements
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.elements as f64
    }

    /// Parameter of node `j`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.elements as f64
    }

    /// Left endpoint of element `j`'s parameter interval (element 0 wraps and
    /// uses `[1-h, 1]`).
    #[inline]
    pub fn element_start(&self, j: usize) -> f64 {
        if j == 0 {
            1.0 - self.h()
        } else {
            (j - 1) as f64 * self.h()
        }
    }
}

/// A `d`-vector-valued continuous piecewise-linear function on a periodic
/// grid; node values stored flat, node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    grid: PeriodicGrid,
    dim: usize,
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(grid: PeriodicGrid, dim: usize) -> Self {
        NodalField { grid, dim, values: vec![0.0; grid.node_count() * dim] }
    }

    pub fn from_values(grid: PeriodicGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() * dim {
            return Err(Error::InvalidInput(String::from(
                "node value buffer length must be J * dim",
            )));
        }
        Ok(NodalField { grid, dim, values })
    }

    /// Standard interpolation at the nodes: `(pi_h f)(q_j) = f(q_j)`.
    pub fn interpolate(grid: PeriodicGrid, dim: usize, f: impl Fn(f64, &mut [f64])) -> Self {
        let mut field = NodalField::zeros(grid, dim);
        for j in 0..grid.node_count() {
            let rho = grid.node(j);
            let start = j * dim;
            f(rho, &mut field.values[start..start + dim]);
        }
        field
    }

    #[inline]
    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn node(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn node_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Constant derivative on element `j`: `(x_j - x_{j-1 mod J}) / h`.
    pub fn edge_derivative_into(&self, j: usize, out: &mut [f64]) {
        let jn = self.grid.node_count();
        let left = (j + jn - 1) % jn;
        let inv_h = jn as f64;
        let (l, r) = (self.node(left), self.node(j));
        for i in 0..self.dim {
            out[i] = (r[i] - l[i]) * inv_h;
        }
    }

    pub fn edge_derivative(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.edge_derivative_into(j, &mut out);
        out
    }

    /// Evaluate at parameter `rho` (periodically wrapped).
    pub fn eval_into(&self, rho: f64, out: &mut [f64]) {
        let jn = self.grid.node_count();
        let mut s = rho - libm_floor(rho);
        if s >= 1.0 {
            s = 0.0;
        }
        let t = s * jn as f64;
        let k = (t as usize).min(jn - 1);
        let xi = t - k as f64;
        let (l, r) = (self.node(k), self.node((k + 1) % jn));
        for i in 0..self.dim {
            out[i] = (1.0 - xi) * l[i] + xi * r[i];
        }
    }

    pub fn eval(&self, rho: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(rho, &mut out);
        out
    }

    pub fn translate(&mut self, c: &[f64]) {
        debug_assert_eq!(c.len(), self.dim);
        for chunk in self.values.chunks_mut(self.dim) {
            for (v, &ci) in chunk.iter_mut().zip(c) {
                *v += ci;
            }
        }
    }
}

#[inline]
fn libm_floor(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.floor()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::floor(x)
    }
}

/// Discrete energy `E_phi(x) = ∫ phi(x_rho) drho`; the integrand is constant
/// per element, so the sum `h * phi(edge)` is exact.
pub fn energy_phi(a: &Anisotropy, x: &NodalField) -> Result<f64> {
    energy_with(x, |p| a.phi(p))
}

/// Discrete energy `E_Phi(x) = ∫ Phi(x_rho) drho`, exact as above.
pub fn energy_big_phi(a: &Anisotropy, x: &NodalField) -> Result<f64> {
    energy_with(x, |p| {
        if math::norm(p) <= DEGENERACY_THRESHOLD {
            Err(Error::DegenerateVector)
        } else {
            a.big_phi(p)
        }
    })
}

fn energy_with(x: &NodalField, f: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    let jn = x.grid().element_count();
    let h = x.grid().h();
    let mut p = vec![0.0; x.dim()];
    let mut sum = 0.0;
    for j in 0..jn {
        x.edge_derivative_into(j, &mut p);
        sum += h * f(&p)?;
    }
    Ok(sum)
}

/// `L^2` and `H^1` distances between a nodal field and a smooth curve.
#[derive(Clone, Copy, Debug)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Full norm `(l2^2 + |.|_1^2)^(1/2)`.
    pub h1: f64,
    /// The `H^1` seminorm alone.
    pub h1_semi: f64,
}

/// Per-element Gauss quadrature (order `quad_points`) of `||x - y||_0` and
/// `|x - y|_1`; `y` and its derivative are evaluated pointwise.
pub fn error_norms(
    x: &NodalField,
    y: impl Fn(f64, &mut [f64]),
    y_rho: impl Fn(f64, &mut [f64]),
    quad_points: usize,
) -> ErrorNorms {
    let rule = GaussRule::new(quad_points);
    let jn = x.grid().element_count();
    let h = x.grid().h();
    let d = x.dim();
    let mut yv = vec![0.0; d];
    let mut yd = vec![0.0; d];
    let mut p = vec![0.0; d];
    let (mut l2_sq, mut semi_sq) = (0.0, 0.0);
    for j in 0..jn {
        let a = x.grid().element_start(j);
        let left = x.node((j + jn - 1) % jn).to_vec();
        let right = x.node(j).to_vec();
        x.edge_derivative_into(j, &mut p);
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let rho = a + xi * h;
            y(rho, &mut yv);
            y_rho(rho, &mut yd);
            let mut dv = 0.0;
            let mut dg = 0.0;
            for i in 0..d {
                let xv = (1.0 - xi) * left[i] + xi * right[i];
                dv += (xv - yv[i]) * (xv - yv[i]);
                dg += (p[i] - yd[i]) * (p[i] - yd[i]);
            }
            l2_sq += w * h * dv;
            semi_sq += w * h * dg;
        }
    }
    let l2 = math::sqrt(l2_sq);
    let h1_semi = math::sqrt(semi_sq);
    ErrorNorms { l2, h1: math::sqrt(l2_sq + semi_sq), h1_semi }
}

/// Ratio between the longest and shortest element of the polygon.
pub fn element_ratio(x: &NodalField) -> Result<f64> {
    let jn = x.grid().element_count();
    let h = x.grid().h();
    let mut p = vec![0.0; x.dim()];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..jn {
        x.edge_derivative_into(j, &mut p);
        let len = h * math::norm(&p);
        lo = lo.min(len);
        hi = hi.max(len);
    }
    if lo <= DEGENERACY_THRESHOLD * h {
        return Err(Error::DegenerateVector);
    }
    Ok(hi / lo)
}
