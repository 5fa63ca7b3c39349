//! The positive definite matrices `H(p)` that turn the geometric evolution
//! law into the strictly parabolic system `H(x_rho) x_t = [Phi'(x_rho)]_rho`.
//!
//! The inverse is the ansatz
//!
//! ```text
//! H^{-1}(p) = (1/alpha) (Id + t (x) w - w (x) t),      t = p/|p|,
//! alpha(p)  = m(p) |p| phi(p),
//! w(p)      = (|p|/phi(p)) phi'(p) - t,
//! ```
//!
//! and `H` itself is assembled from the closed form
//! `H = alpha [Id + (w (x) (t - w) - t (x) (w + |w|^2 t)) / (1 + |w|^2)]`
//! rather than by numeric inversion. `H^{-1}` is kept for tests and the
//! parabolicity check only.

use alloc::vec;
use alloc::vec::Vec;

use crate::anisotropy::{Anisotropy, Mobility};
use crate::error::{Error, Result};
use crate::linalg;
use crate::math;

/// Ingredients of `H(p)` at one direction `p`.
#[derive(Clone, Debug)]
pub struct FlowMatrixParts {
    /// Unit tangent `t = p/|p|`.
    pub tangent: Vec<f64>,
    /// Tangential correction `w`, orthogonal to `tangent`.
    pub w: Vec<f64>,
    /// Scaling `alpha = m |p| phi > 0`.
    pub alpha: f64,
    /// `H(p)`, row-major `d x d`.
    pub h: Vec<f64>,
    /// `H^{-1}(p)`, row-major `d x d`.
    pub h_inv: Vec<f64>,
}

/// Reusable buffers for [`h_into`]; one per assembly loop.
pub(crate) struct HScratch {
    t: Vec<f64>,
    w: Vec<f64>,
    g: Vec<f64>,
}

impl HScratch {
    pub fn new(dim: usize) -> Self {
        HScratch { t: vec![0.0; dim], w: vec![0.0; dim], g: vec![0.0; dim] }
    }
}

/// Write `H(p)` into `out` (row-major `d x d`) and return `alpha`.
pub(crate) fn h_into(
    a: &Anisotropy,
    mob: &Mobility,
    p: &[f64],
    scratch: &mut HScratch,
    out: &mut [f64],
) -> Result<f64> {
    let d = a.dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    let n = math::norm(p);
    let phi = a.phi(p)?;
    a.dphi_into(p, &mut scratch.g)?;
    let m = mob.eval(a, p)?;
    let alpha = m * (n * phi);
    let ratio = n / phi;
    for i in 0..d {
        scratch.t[i] = p[i] / n;
        scratch.w[i] = ratio * scratch.g[i] - scratch.t[i];
    }
    let w2 = math::dot(&scratch.w, &scratch.w);
    let denom = 1.0 + w2;
    for i in 0..d {
        for k in 0..d {
            let u_k = scratch.t[k] - scratch.w[k]; // (t - w)_k
            let v_k = scratch.w[k] + w2 * scratch.t[k]; // (w + |w|^2 t)_k
            let id = if i == k { 1.0 } else { 0.0 };
            out[i * d + k] = alpha * (id + (scratch.w[i] * u_k - scratch.t[i] * v_k) / denom);
        }
    }
    Ok(alpha)
}

/// Compute tangent, `w`, `alpha`, `H` and `H^{-1}` at `p != 0`.
pub fn compute_parts(a: &Anisotropy, mob: &Mobility, p: &[f64]) -> Result<FlowMatrixParts> {
    let d = a.dim();
    let mut scratch = HScratch::new(d);
    let mut h = vec![0.0; d * d];
    let alpha = h_into(a, mob, p, &mut scratch, &mut h)?;
    let mut h_inv = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let id = if i == k { 1.0 } else { 0.0 };
            h_inv[i * d + k] =
                (id + scratch.t[i] * scratch.w[k] - scratch.w[i] * scratch.t[k]) / alpha;
        }
    }
    Ok(FlowMatrixParts { tangent: scratch.t, w: scratch.w, alpha, h, h_inv })
}

/// Check strict parabolicity at `p`: all eigenvalues of `H^{-1}(p) Phi''(p)`
/// must have real part above `tol > 0`.
pub fn check_parabolicity(a: &Anisotropy, mob: &Mobility, p: &[f64], tol: f64) -> Result<bool> {
    let d = a.dim();
    let parts = compute_parts(a, mob, p)?;
    let phipp = a.d2big_phi(p)?;
    let mut symbol = vec![0.0; d * d];
    linalg::matmul(&parts.h_inv, &phipp, d, &mut symbol);
    let eigs = linalg::eigenvalues(&symbol, d)?;
    Ok(eigs.iter().all(|&(re, _)| re > tol))
}

/// `H(p)` for a planar anisotropy under the inverse-phi mobility, as a
/// row-major 2x2 matrix. For densities of the form `phi(p) = gamma(p_perp)`
/// this matches the normal-parameterization closed form used by planar
/// schemes; the comparison lives in the test suite.
pub fn reduce_2d(a: &Anisotropy, p: &[f64]) -> Result<[f64; 4]> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: a.dim() });
    }
    let parts = compute_parts(a, &Mobility::InversePhi, p)?;
    Ok([parts.h[0], parts.h[1], parts.h[2], parts.h[3]])
}
