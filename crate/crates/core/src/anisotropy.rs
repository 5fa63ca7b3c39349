//! Anisotropy densities `phi`, mobilities `m`, and the derived convex
//! function `Phi = phi^2 / 2`.
//!
//! A density is positive and 1-homogeneous away from the origin; its
//! derivatives satisfy the Euler identities `phi'(p).p = phi(p)` and
//! `phi''(p) p = 0`. `Phi`-level quantities are always derived from
//! `phi, phi', phi''` so that custom densities have a single source of truth:
//! `Phi' = phi phi'` and `Phi'' = phi' (x) phi' + phi phi''`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result, DEGENERACY_THRESHOLD};
use crate::math;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum AnisotropyKind {
    /// `phi(p) = |p|`.
    Isotropic,
    /// `phi(p) = sqrt(sum_i c_i p_i^2)` with positive coefficients.
    DiagonalQuadratic { coeffs: Vec<f64> },
    /// `phi(p) = |p| (1 + delta sin(k theta(p)))` in the plane. Strictly
    /// convex iff `|delta| < 1/(k^2 - 1)`; construction does not enforce
    /// this, [`validate`] reports it.
    SinModulated2d { k: u32, delta: f64 },
    /// Regularized l1 norm `sum_i sqrt((1 - delta^2) p_i^2 + delta^2 |p|^2)`,
    /// nearly crystalline for small `delta`.
    RegularizedL1 { delta: f64 },
    /// User-supplied `phi`, `phi'`, `phi''` (row-major Hessian).
    Custom {
        phi: ScalarFn,
        dphi: VectorFn,
        d2phi: VectorFn,
    },
}

impl fmt::Debug for AnisotropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnisotropyKind::Isotropic => write!(f, "Isotropic"),
            AnisotropyKind::DiagonalQuadratic { coeffs } => {
                write!(f, "DiagonalQuadratic({coeffs:?})")
            }
            AnisotropyKind::SinModulated2d { k, delta } => {
                write!(f, "SinModulated2d(k={k}, delta={delta})")
            }
            AnisotropyKind::RegularizedL1 { delta } => write!(f, "RegularizedL1(delta={delta})"),
            AnisotropyKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// An anisotropy density on `R^d`, immutable after construction.
#[derive(Clone, Debug)]
pub struct Anisotropy {
    kind: AnisotropyKind,
    dim: usize,
}

impl Anisotropy {
    pub fn isotropic(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Anisotropy { kind: AnisotropyKind::Isotropic, dim })
    }

    pub fn diagonal_quadratic(coeffs: Vec<f64>) -> Result<Self> {
        check_dim(coeffs.len())?;
        if coeffs.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidInput(String::from(
                "diagonal_quadratic coefficients must be positive",
            )));
        }
        let dim = coeffs.len();
        Ok(Anisotropy { kind: AnisotropyKind::DiagonalQuadratic { coeffs }, dim })
    }

    pub fn sin_modulated_2d(k: u32, delta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(String::from("sin modulation needs k >= 1")));
        }
        Ok(Anisotropy { kind: AnisotropyKind::SinModulated2d { k, delta }, dim: 2 })
    }

    pub fn regularized_l1(delta: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(delta > 0.0) || !(delta < 1.0) {
            return Err(Error::InvalidInput(String::from(
                "regularized_l1 needs 0 < delta < 1",
            )));
        }
        Ok(Anisotropy { kind: AnisotropyKind::RegularizedL1 { delta }, dim })
    }

    pub fn custom(dim: usize, phi: ScalarFn, dphi: VectorFn, d2phi: VectorFn) -> Result<Self> {
        check_dim(dim)?;
        Ok(Anisotropy { kind: AnisotropyKind::Custom { phi, dphi, d2phi }, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &AnisotropyKind {
        &self.kind
    }

    /// `phi(lambda p) = |lambda| phi(p)` holds for every builtin except sin
    /// modulation with odd `k`, which is only positively 1-homogeneous.
    /// Custom densities are assumed to satisfy the standing assumption.
    pub fn absolutely_homogeneous(&self) -> bool {
        match &self.kind {
            AnisotropyKind::SinModulated2d { k, .. } => k % 2 == 0,
            _ => true,
        }
    }

    fn check_p(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let n = math::norm(p);
        if n <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateVector);
        }
        Ok(n)
    }

    /// Density value `phi(p)`, `p != 0`.
    pub fn phi(&self, p: &[f64]) -> Result<f64> {
        let n = self.check_p(p)?;
        Ok(match &self.kind {
            AnisotropyKind::Isotropic => n,
            AnisotropyKind::DiagonalQuadratic { coeffs } => {
                let mut s = 0.0;
                for (pi, ci) in p.iter().zip(coeffs) {
                    s += ci * pi * pi;
                }
                math::sqrt(s)
            }
            AnisotropyKind::SinModulated2d { k, delta } => {
                let theta = math::atan2(p[1], p[0]);
                n * (1.0 + delta * math::sin(*k as f64 * theta))
            }
            AnisotropyKind::RegularizedL1 { delta } => {
                let (d2, n2) = (delta * delta, math::dot(p, p));
                let mut s = 0.0;
                for &pi in p {
                    s += math::sqrt((1.0 - d2) * pi * pi + d2 * n2);
                }
                s
            }
            AnisotropyKind::Custom { phi, .. } => phi(p),
        })
    }

    /// Gradient `phi'(p)` written into `out`.
    pub fn dphi_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.check_p(p)?;
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            AnisotropyKind::Isotropic => {
                for (o, &pi) in out.iter_mut().zip(p) {
                    *o = pi / n;
                }
            }
            AnisotropyKind::DiagonalQuadratic { coeffs } => {
                let v = self.phi(p)?;
                for ((o, &pi), ci) in out.iter_mut().zip(p).zip(coeffs) {
                    *o = ci * pi / v;
                }
            }
            AnisotropyKind::SinModulated2d { k, delta } => {
                let kf = *k as f64;
                let theta = math::atan2(p[1], p[0]);
                let g = 1.0 + delta * math::sin(kf * theta);
                let gp = delta * kf * math::cos(kf * theta);
                let (er0, er1) = (p[0] / n, p[1] / n);
                out[0] = g * er0 - gp * er1;
                out[1] = g * er1 + gp * er0;
            }
            AnisotropyKind::RegularizedL1 { delta } => {
                let (d2, n2) = (delta * delta, math::dot(p, p));
                out.fill(0.0);
                for i in 0..p.len() {
                    let si = math::sqrt((1.0 - d2) * p[i] * p[i] + d2 * n2);
                    for j in 0..p.len() {
                        let aij = d2 * p[j] + if i == j { (1.0 - d2) * p[i] } else { 0.0 };
                        out[j] += aij / si;
                    }
                }
            }
            AnisotropyKind::Custom { dphi, .. } => dphi(p, out),
        }
        Ok(())
    }

    pub fn dphi(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.dphi_into(p, &mut out)?;
        Ok(out)
    }

    /// Hessian `phi''(p)` written row-major into `out` (`dim * dim`).
    pub fn d2phi_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.check_p(p)?;
        let d = self.dim;
        debug_assert_eq!(out.len(), d * d);
        match &self.kind {
            AnisotropyKind::Isotropic => {
                for i in 0..d {
                    for j in 0..d {
                        let t = (p[i] / n) * (p[j] / n);
                        out[i * d + j] = (if i == j { 1.0 } else { 0.0 } - t) / n;
                    }
                }
            }
            AnisotropyKind::DiagonalQuadratic { coeffs } => {
                let v = self.phi(p)?;
                for i in 0..d {
                    for j in 0..d {
                        let gi = coeffs[i] * p[i] / v;
                        let gj = coeffs[j] * p[j] / v;
                        out[i * d + j] =
                            (if i == j { coeffs[i] } else { 0.0 }) / v - gi * gj / v;
                    }
                }
            }
            AnisotropyKind::SinModulated2d { k, delta } => {
                let kf = *k as f64;
                let theta = math::atan2(p[1], p[0]);
                let g = 1.0 + delta * math::sin(kf * theta);
                let gpp = -delta * kf * kf * math::sin(kf * theta);
                // Hessian of r*g(theta) is ((g + g'')/r) e_theta (x) e_theta
                let w = (g + gpp) / n;
                let (et0, et1) = (-p[1] / n, p[0] / n);
                out[0] = w * et0 * et0;
                out[1] = w * et0 * et1;
                out[2] = w * et1 * et0;
                out[3] = w * et1 * et1;
            }
            AnisotropyKind::RegularizedL1 { delta } => {
                let (d2, n2) = (delta * delta, math::dot(p, p));
                out.fill(0.0);
                let mut grad_i = vec![0.0; d];
                for i in 0..d {
                    let si = math::sqrt((1.0 - d2) * p[i] * p[i] + d2 * n2);
                    for j in 0..d {
                        grad_i[j] =
                            (d2 * p[j] + if i == j { (1.0 - d2) * p[i] } else { 0.0 }) / si;
                    }
                    for r in 0..d {
                        for c in 0..d {
                            let a_rc = d2 * (if r == c { 1.0 } else { 0.0 })
                                + if r == i && c == i { 1.0 - d2 } else { 0.0 };
                            out[r * d + c] += a_rc / si - grad_i[r] * grad_i[c] / si;
                        }
                    }
                }
            }
            AnisotropyKind::Custom { d2phi, .. } => d2phi(p, out),
        }
        Ok(())
    }

    pub fn d2phi(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim * self.dim];
        self.d2phi_into(p, &mut out)?;
        Ok(out)
    }

    /// `Phi(p) = phi(p)^2 / 2`, defined for all `p` with `Phi(0) = 0`.
    pub fn big_phi(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if math::norm(p) <= DEGENERACY_THRESHOLD {
            return Ok(0.0);
        }
        let v = self.phi(p)?;
        Ok(0.5 * v * v)
    }

    /// `Phi'(p) = phi(p) phi'(p)`, with `Phi'(0) = 0` (`Phi` is `C^1`).
    pub fn dbig_phi_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if math::norm(p) <= DEGENERACY_THRESHOLD {
            out.fill(0.0);
            return Ok(());
        }
        let v = self.phi(p)?;
        self.dphi_into(p, out)?;
        for o in out.iter_mut() {
            *o *= v;
        }
        Ok(())
    }

    pub fn dbig_phi(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.dbig_phi_into(p, &mut out)?;
        Ok(out)
    }

    /// `Phi''(p) = phi' (x) phi' + phi phi''`, row-major; requires `p != 0`.
    pub fn d2big_phi_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim;
        let v = self.phi(p)?;
        self.d2phi_into(p, out)?;
        let g = self.dphi(p)?;
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = g[i] * g[j] + v * out[i * d + j];
            }
        }
        Ok(())
    }

    pub fn d2big_phi(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim * self.dim];
        self.d2big_phi_into(p, &mut out)?;
        Ok(out)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidInput(String::from("ambient dimension must be >= 2")));
    }
    Ok(())
}

/// Mobility weight on tangent directions, extended 0-homogeneously.
///
/// `InversePhi` evaluates `1/phi(p/|p|) = |p|/phi(p)` against the anisotropy
/// passed at the call site (every operation that needs the mobility already
/// carries the density).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mobility {
    ConstantOne,
    InversePhi,
}

impl Mobility {
    pub fn eval(&self, a: &Anisotropy, p: &[f64]) -> Result<f64> {
        match self {
            Mobility::ConstantOne => {
                a.check_p(p)?;
                Ok(1.0)
            }
            Mobility::InversePhi => {
                let n = a.check_p(p)?;
                Ok(n / a.phi(p)?)
            }
        }
    }
}

/// Outcome of the Monte-Carlo structural check.
#[derive(Clone, Copy, Debug)]
pub struct ValidationReport {
    pub homogeneity_ok: bool,
    pub euler_ok: bool,
    pub hessian_kernel_ok: bool,
    pub strict_convexity_ok: bool,
    /// Worst relative homogeneity violation observed.
    pub max_homogeneity_err: f64,
    /// Worst relative Euler-identity violation observed.
    pub max_euler_err: f64,
    /// Worst relative `phi''(p) p` residual observed.
    pub max_kernel_err: f64,
    /// Smallest sampled `phi''(p) q . q` over unit tangent-orthogonal `q`.
    pub min_tangential_convexity: f64,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.homogeneity_ok && self.euler_ok && self.hessian_kernel_ok && self.strict_convexity_ok
    }
}

/// Monte-Carlo check of the structural invariants over `samples` random
/// directions. Uses a fixed seeded RNG so reports are reproducible. Odd-`k`
/// sin modulation is only positively 1-homogeneous, so lambda is drawn
/// positive for it and with both signs otherwise.
pub fn validate(a: &Anisotropy, samples: usize) -> ValidationReport {
    let mut rng = ChaCha12Rng::seed_from_u64(0x414e_4953_4f00_0001);
    let d = a.dim();
    let tol = 1e-10;
    let mut rep = ValidationReport {
        homogeneity_ok: true,
        euler_ok: true,
        hessian_kernel_ok: true,
        strict_convexity_ok: true,
        max_homogeneity_err: 0.0,
        max_euler_err: 0.0,
        max_kernel_err: 0.0,
        min_tangential_convexity: f64::INFINITY,
    };
    let mut hess = vec![0.0; d * d];
    let mut hp = vec![0.0; d];
    for _ in 0..samples.max(1) {
        let p = sampling::unit_vector(&mut rng, d);
        let phi = match a.phi(&p) {
            Ok(v) => v,
            Err(_) => continue,
        };

        let mut lambda = 0.1 + 9.9 * sampling::uniform(&mut rng);
        if a.absolutely_homogeneous() && sampling::uniform(&mut rng) < 0.5 {
            lambda = -lambda;
        }
        let ps: Vec<f64> = p.iter().map(|&x| lambda * x).collect();
        if let Ok(phis) = a.phi(&ps) {
            let err = math::abs(phis - math::abs(lambda) * phi) / phi;
            rep.max_homogeneity_err = rep.max_homogeneity_err.max(err);
            if err > tol {
                rep.homogeneity_ok = false;
            }
        }

        if let Ok(grad) = a.dphi(&p) {
            let err = math::abs(math::dot(&grad, &p) - phi) / phi;
            rep.max_euler_err = rep.max_euler_err.max(err);
            if err > tol {
                rep.euler_ok = false;
            }
        }

        if a.d2phi_into(&p, &mut hess).is_ok() {
            crate::linalg::matvec(&hess, &p, d, &mut hp);
            let scale = 1.0 + phi;
            let err = math::norm(&hp) / scale;
            rep.max_kernel_err = rep.max_kernel_err.max(err);
            if err > tol {
                rep.hessian_kernel_ok = false;
            }
            let q = sampling::unit_tangent_orthogonal(&mut rng, &p);
            crate::linalg::matvec(&hess, &q, d, &mut hp);
            let conv = math::dot(&hp, &q);
            rep.min_tangential_convexity = rep.min_tangential_convexity.min(conv);
            if conv <= 0.0 {
                rep.strict_convexity_ok = false;
            }
        }
    }
    rep
}

/// Seeded sampling helpers shared by the validators and the test suites.
pub mod sampling {
    use alloc::vec::Vec;
    use rand_core::RngCore;

    use crate::math;

    /// Uniform in `[0, 1)`.
    pub fn uniform(rng: &mut impl RngCore) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform direction on the unit sphere (rejection from the cube).
    pub fn unit_vector(rng: &mut impl RngCore, d: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| 2.0 * uniform(rng) - 1.0).collect();
            let n = math::norm(&v);
            if n > 1e-3 && n <= 1.0 {
                return v.iter().map(|&x| x / n).collect();
            }
        }
    }

    /// Random vector with norm in `[rmin, rmax]`.
    pub fn vector_in_annulus(rng: &mut impl RngCore, d: usize, rmin: f64, rmax: f64) -> Vec<f64> {
        let r = rmin + (rmax - rmin) * uniform(rng);
        unit_vector(rng, d).iter().map(|&x| r * x).collect()
    }

    /// Unit vector orthogonal to `p` (which must be nonzero).
    pub fn unit_tangent_orthogonal(rng: &mut impl RngCore, p: &[f64]) -> Vec<f64> {
        let np = math::norm(p);
        loop {
            let v = unit_vector(rng, p.len());
            let proj = math::dot(&v, p) / (np * np);
            let q: Vec<f64> = v.iter().zip(p).map(|(&vi, &pi)| vi - proj * pi).collect();
            let nq = math::norm(&q);
            if nq > 1e-3 {
                return q.iter().map(|&x| x / nq).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Anisotropy> {
        vec![
            Anisotropy::isotropic(2).unwrap(),
            Anisotropy::isotropic(3).unwrap(),
            Anisotropy::diagonal_quadratic(vec![0.25, 1.0]).unwrap(),
            Anisotropy::diagonal_quadratic(vec![0.25, 1.0, 1.0]).unwrap(),
            Anisotropy::diagonal_quadratic(vec![1.0, 0.25, 0.25]).unwrap(),
            Anisotropy::sin_modulated_2d(3, 0.124).unwrap(),
            Anisotropy::regularized_l1(0.01, 2).unwrap(),
            Anisotropy::regularized_l1(0.01, 3).unwrap(),
        ]
    }

    #[test]
    fn phi_pointwise_values() {
        let iso = Anisotropy::isotropic(3).unwrap();
        assert_eq!(iso.phi(&[3.0, 4.0, 0.0]).unwrap(), 5.0);

        let sin = Anisotropy::sin_modulated_2d(3, 0.124).unwrap();
        assert!((sin.phi(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);

        let l1 = Anisotropy::regularized_l1(0.01, 2).unwrap();
        assert!((l1.phi(&[1.0, 0.0]).unwrap() - 1.01).abs() < 1e-15);
    }

    #[test]
    fn dphi_pointwise_values() {
        let iso = Anisotropy::isotropic(2).unwrap();
        let g = iso.dphi(&[0.0, 2.0]).unwrap();
        assert_eq!(g, vec![0.0, 1.0]);

        // delta = 0.5
        let dq = Anisotropy::diagonal_quadratic(vec![0.25, 1.0, 1.0]).unwrap();
        let g = dq.dphi(&[1.0, 0.0, 0.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && g[1] == 0.0 && g[2] == 0.0);
    }

    #[test]
    fn d2phi_isotropic_plane() {
        let iso = Anisotropy::isotropic(2).unwrap();
        let h = iso.d2phi(&[1.0, 0.0]).unwrap();
        assert_eq!(h, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn euler_and_kernel_identities() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for a in builtins() {
            let d = a.dim();
            for _ in 0..200 {
                let p = sampling::vector_in_annulus(&mut rng, d, 0.3, 3.0);
                let phi = a.phi(&p).unwrap();
                let g = a.dphi(&p).unwrap();
                assert!(
                    (math::dot(&g, &p) - phi).abs() <= 1e-12 * phi,
                    "euler identity failed for {:?} at {p:?}",
                    a.kind()
                );
                let h = a.d2phi(&p).unwrap();
                let mut hp = vec![0.0; d];
                crate::linalg::matvec(&h, &p, d, &mut hp);
                assert!(
                    math::norm(&hp) <= 1e-10 * (1.0 + phi),
                    "hessian kernel failed for {:?} at {p:?}",
                    a.kind()
                );
            }
        }
    }

    #[test]
    fn big_phi_isotropic() {
        let iso = Anisotropy::isotropic(2).unwrap();
        assert_eq!(iso.big_phi(&[3.0, 4.0]).unwrap(), 12.5);
        let g = iso.dbig_phi(&[3.0, 4.0]).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] - 4.0).abs() < 1e-14);
        let h = iso.d2big_phi(&[3.0, 4.0]).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15 && h[1].abs() < 1e-15);
        assert!(h[2].abs() < 1e-15 && (h[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dbig_phi_at_origin_is_zero() {
        let dq = Anisotropy::diagonal_quadratic(vec![0.25, 1.0]).unwrap();
        assert_eq!(dq.dbig_phi(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(dq.big_phi(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(dq.d2big_phi(&[0.0, 0.0]), Err(Error::DegenerateVector)));
    }

    #[test]
    fn d2big_phi_positive_definite() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for a in builtins() {
            let d = a.dim();
            for _ in 0..100 {
                let p = sampling::vector_in_annulus(&mut rng, d, 0.5, 2.0);
                let h = a.d2big_phi(&p).unwrap();
                let ev = crate::linalg::sym_eigenvalues(&h, d);
                assert!(ev[0] > 0.0, "{:?}: min eig {} at {p:?}", a.kind(), ev[0]);
            }
        }
    }

    #[test]
    fn mobility_values() {
        let iso = Anisotropy::isotropic(2).unwrap();
        assert_eq!(Mobility::ConstantOne.eval(&iso, &[0.3, -0.7]).unwrap(), 1.0);
        assert!((Mobility::InversePhi.eval(&iso, &[0.0, 5.0]).unwrap() - 1.0).abs() < 1e-15);

        let dq = Anisotropy::diagonal_quadratic(vec![0.25, 1.0, 1.0]).unwrap();
        let m = Mobility::InversePhi.eval(&dq, &[2.0, 0.0, 0.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-14); // 1/delta with delta = 0.5
    }

    #[test]
    fn degenerate_vectors_error() {
        let iso = Anisotropy::isotropic(2).unwrap();
        assert!(matches!(iso.phi(&[0.0, 0.0]), Err(Error::DegenerateVector)));
        assert!(matches!(iso.dphi(&[1e-15, 0.0]), Err(Error::DegenerateVector)));
        assert!(matches!(iso.phi(&[1.0, 0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn validate_flags() {
        let iso = Anisotropy::isotropic(3).unwrap();
        assert!(validate(&iso, 2000).all_ok());

        // 0.124 < 1/(k^2-1) = 0.125: strictly convex
        let ok = Anisotropy::sin_modulated_2d(3, 0.124).unwrap();
        assert!(validate(&ok, 5000).all_ok());

        // 0.2 > 0.125: convexity must fail, the other flags stay true
        let bad = Anisotropy::sin_modulated_2d(3, 0.2).unwrap();
        let rep = validate(&bad, 5000);
        assert!(rep.homogeneity_ok && rep.euler_ok && rep.hessian_kernel_ok);
        assert!(!rep.strict_convexity_ok);

        // dense sweep oracle: 1 + delta (1 - k^2) sin(k theta) dips below zero
        let (k, delta) = (3.0f64, 0.2f64);
        let mut min_sweep = f64::INFINITY;
        for i in 0..20000 {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / 20000.0;
            min_sweep = min_sweep.min(1.0 + delta * (1.0 - k * k) * (k * theta).sin());
        }
        assert!(min_sweep < 0.0);
    }

    #[test]
    fn validate_is_reproducible() {
        let a = Anisotropy::regularized_l1(0.01, 3).unwrap();
        let r1 = validate(&a, 500);
        let r2 = validate(&a, 500);
        assert_eq!(r1.max_euler_err.to_bits(), r2.max_euler_err.to_bits());
        assert_eq!(r1.min_tangential_convexity.to_bits(), r2.min_tangential_convexity.to_bits());
    }
}
