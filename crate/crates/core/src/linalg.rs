//! Dense helpers for small `d x d` matrices (row-major slices).
//!
//! The ambient dimension is 2 or 3 in every benchmark, so everything here is
//! written for tiny matrices: LU with partial pivoting, cyclic-Jacobi
//! eigenvalues for symmetric matrices, and general (possibly complex)
//! eigenvalues via closed forms for `d <= 3` and characteristic-polynomial
//! root finding for larger `d`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// `out = a * b` for row-major `n x n` matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    debug_assert_eq!(out.len(), n * n);
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += a[i * n + j] * b[j * n + k];
            }
            out[i * n + k] = s;
        }
    }
}

/// `out = a * x` for a row-major `n x n` matrix.
pub fn matvec(a: &[f64], x: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += a[i * n + j] * x[j];
        }
        out[i] = s;
    }
}

/// LU factorization with partial pivoting, in place. `piv[k]` records the row
/// swapped into position `k`. Fails with [`Error::SingularSystem`] when a
/// pivot is zero relative to the matrix scale or below `pivot_floor` (callers
/// embedding this in a larger elimination pass the enclosing system's scale
/// so that an exactly-singular Schur complement of a well-scaled system is
/// caught).
pub fn lu_factor_with_floor(
    a: &mut [f64],
    n: usize,
    piv: &mut [usize],
    pivot_floor: f64,
) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(piv.len(), n);
    let mut scale = 0.0f64;
    for &v in a.iter() {
        scale = scale.max(math::abs(v));
    }
    let tol = (64.0 * f64::EPSILON * scale).max(pivot_floor);
    for k in 0..n {
        let mut p = k;
        let mut best = math::abs(a[k * n + k]);
        for i in (k + 1)..n {
            let v = math::abs(a[i * n + k]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= tol {
            return Err(Error::SingularSystem);
        }
        piv[k] = p;
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let inv = 1.0 / a[k * n + k];
        for i in (k + 1)..n {
            let m = a[i * n + k] * inv;
            a[i * n + k] = m;
            for j in (k + 1)..n {
                a[i * n + j] -= m * a[k * n + j];
            }
        }
    }
    Ok(())
}

#[cfg_attr(not(test), allow(dead_code))]
pub fn lu_factor(a: &mut [f64], n: usize, piv: &mut [usize]) -> Result<()> {
    lu_factor_with_floor(a, n, piv, 0.0)
}

/// Solve `L U x = b` in place, using factors and pivots from [`lu_factor`].
pub fn lu_solve(a: &[f64], n: usize, piv: &[usize], b: &mut [f64]) {
    for k in 0..n {
        b.swap(k, piv[k]);
        for i in (k + 1)..n {
            let m = a[i * n + k];
            b[i] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        for j in (k + 1)..n {
            let v = a[k * n + j] * b[j];
            b[k] -= v;
        }
        b[k] /= a[k * n + k];
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending).
/// Test oracle for definiteness checks.
#[cfg_attr(not(test), allow(dead_code))]
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let mut diag = 0.0f64;
        for i in 0..n {
            diag = diag.max(math::abs(m[i * n + i]));
        }
        if off <= (1e-15 * (diag + 1e-300)) * (1e-15 * (diag + 1e-300)) * (n * n) as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if math::abs(apq) < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues (re, im) of a general real matrix. Closed forms for
/// `n <= 3`; characteristic polynomial plus Durand-Kerner iteration above.
pub fn eigenvalues(a: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![(a[0], 0.0)]),
        2 => Ok(eig2(a)),
        3 => Ok(eig3(a)),
        _ => {
            let coeffs = char_poly(a, n);
            durand_kerner(&coeffs)
        }
    }
}

fn eig2(a: &[f64]) -> Vec<(f64, f64)> {
    let tr = a[0] + a[3];
    let det = a[0] * a[3] - a[1] * a[2];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = math::sqrt(disc);
        // stable: compute the larger-magnitude root first
        let r1 = 0.5 * (tr + if tr >= 0.0 { s } else { -s });
        let r2 = if r1 != 0.0 { det / r1 } else { 0.5 * (tr - s) };
        vec![(r1, 0.0), (r2, 0.0)]
    } else {
        let im = 0.5 * math::sqrt(-disc);
        vec![(0.5 * tr, im), (0.5 * tr, -im)]
    }
}

fn eig3(a: &[f64]) -> Vec<(f64, f64)> {
    // characteristic polynomial l^3 + c2 l^2 + c1 l + c0
    let tr = a[0] + a[4] + a[8];
    let m01 = a[0] * a[4] - a[1] * a[3];
    let m02 = a[0] * a[8] - a[2] * a[6];
    let m12 = a[4] * a[8] - a[5] * a[7];
    let det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
        + a[2] * (a[3] * a[7] - a[4] * a[6]);
    let c2 = -tr;
    let c1 = m01 + m02 + m12;
    let c0 = -det;
    // depressed cubic t^3 + p t + q with l = t - c2/3
    let shift = -c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    if disc > 0.0 {
        // one real root, one complex pair
        let s = math::sqrt(disc);
        let u = if q <= 0.0 {
            math::cbrt(-0.5 * q + s)
        } else {
            math::cbrt(-0.5 * q - s)
        };
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let t1 = u + v;
        let re = -0.5 * t1 + shift;
        let im = 0.5 * math::sqrt(3.0) * math::abs(u - v);
        vec![(t1 + shift, 0.0), (re, im), (re, -im)]
    } else if p == 0.0 && q == 0.0 {
        vec![(shift, 0.0); 3]
    } else {
        // three real roots (trigonometric form)
        let mag = 2.0 * math::sqrt(-p / 3.0);
        let arg = (3.0 * q / p) * math::sqrt(-3.0 / p) / 2.0;
        let arg = arg.clamp(-1.0, 1.0);
        let theta = math::acos(arg) / 3.0;
        let tau = 2.0 * core::f64::consts::PI / 3.0;
        (0..3)
            .map(|k| (mag * math::cos(theta - tau * k as f64) + shift, 0.0))
            .collect()
    }
}

/// Coefficients `c` of `det(lI - A) = l^n + c[n-1] l^(n-1) + ... + c[0]`,
/// by the Faddeev-LeVerrier recursion.
fn char_poly(a: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    let mut m = a.to_vec();
    let mut tmp = vec![0.0; n * n];
    let trace = |m: &[f64]| -> f64 { (0..n).map(|i| m[i * n + i]).sum() };
    c[n - 1] = -trace(&m);
    for k in 2..=n {
        for i in 0..n {
            m[i * n + i] += c[n - k + 1];
        }
        matmul(a, &m, n, &mut tmp);
        m.copy_from_slice(&tmp);
        c[n - k] = -trace(&m) / k as f64;
    }
    c
}

/// Durand-Kerner simultaneous root iteration for a monic polynomial with real
/// coefficients `c` (constant term first).
fn durand_kerner(c: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = c.len();
    let scale = 1.0 + c.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut r = (1.0, 0.0);
        for k in (0..n).rev() {
            r = cmul(r, z);
            r.0 += c[k];
        }
        r
    };
    let mut z: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut w = (1.0, 0.0);
    for _ in 0..n {
        w = cmul(w, (0.4, 0.9));
        z.push(w);
    }
    for _iter in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = (1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom = cmul(denom, csub(z[i], z[j]));
                }
            }
            let step = cdiv(eval(z[i]), denom)?;
            z[i] = csub(z[i], step);
            max_step = max_step.max(math::hypot(step.0, step.1));
        }
        if max_step <= 1e-14 * scale {
            // collapse conjugate-pair imaginary dust so real spectra test clean
            for v in z.iter_mut() {
                if math::abs(v.1) <= 1e-10 * scale {
                    v.1 = 0.0;
                }
            }
            return Ok(z);
        }
    }
    Err(Error::EigenFailure)
}

#[inline]
fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

#[inline]
fn csub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

#[inline]
fn cdiv(a: (f64, f64), b: (f64, f64)) -> Result<(f64, f64)> {
    let d = b.0 * b.0 + b.1 * b.1;
    if d == 0.0 {
        return Err(Error::EigenFailure);
    }
    Ok(((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_pairs(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        v.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        v
    }

    #[test]
    fn lu_solves_small_system() {
        let mut a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.0, 2.0, 0.0, 5.0];
        let mut piv = vec![0usize; 3];
        let a0 = a.clone();
        lu_factor(&mut a, 3, &mut piv).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        matvec(&a0, &x_true, 3, &mut b);
        lu_solve(&a, 3, &piv, &mut b);
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut piv = vec![0usize; 2];
        assert!(matches!(lu_factor(&mut a, 2, &mut piv), Err(Error::SingularSystem)));
    }

    #[test]
    fn jacobi_eigenvalues_match_known() {
        // diag(1, 3) rotated by 45 degrees
        let a = vec![2.0, -1.0, -1.0, 2.0];
        let ev = sym_eigenvalues(&a, 2);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig2_complex_pair() {
        // rotation by 90 degrees: eigenvalues +-i
        let a = vec![0.0, -1.0, 1.0, 0.0];
        let ev = sort_pairs(eigenvalues(&a, 2).unwrap());
        assert!((ev[0].0).abs() < 1e-14 && (ev[0].1 + 1.0).abs() < 1e-14);
        assert!((ev[1].0).abs() < 1e-14 && (ev[1].1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig3_real_spectrum() {
        // upper triangular: eigenvalues are the diagonal
        let a = vec![1.0, 5.0, -2.0, 0.0, 4.0, 1.0, 0.0, 0.0, -3.0];
        let ev = sort_pairs(eigenvalues(&a, 3).unwrap());
        let expect = [-3.0, 1.0, 4.0];
        for (got, want) in ev.iter().zip(expect) {
            assert!((got.0 - want).abs() < 1e-10, "{got:?} vs {want}");
            assert_eq!(got.1, 0.0);
        }
    }

    #[test]
    fn eig3_complex_pair() {
        // block diag: rotation in the xy-plane (eigs +-i) and 2 on the z-axis
        let a = vec![0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        let ev = sort_pairs(eigenvalues(&a, 3).unwrap());
        assert!((ev[0].0).abs() < 1e-12 && (ev[0].1 + 1.0).abs() < 1e-12);
        assert!((ev[1].0).abs() < 1e-12 && (ev[1].1 - 1.0).abs() < 1e-12);
        assert!((ev[2].0 - 2.0).abs() < 1e-12 && ev[2].1 == 0.0);
    }

    #[test]
    fn durand_kerner_matches_nalgebra() {
        use nalgebra::DMatrix;
        let n = 5;
        // fixed pseudo-random matrix
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        };
        let a: Vec<f64> = (0..n * n).map(|_| next() * 4.0).collect();
        let ours = sort_pairs(eigenvalues(&a, n).unwrap());
        let m = DMatrix::from_row_slice(n, n, &a);
        let theirs = m.complex_eigenvalues();
        let mut reference: Vec<(f64, f64)> = theirs.iter().map(|c| (c.re, c.im)).collect();
        // greedy nearest-neighbour matching (conjugate pairs may sort apart)
        for got in &ours {
            let (idx, dist) = reference
                .iter()
                .enumerate()
                .map(|(i, w)| (i, ((got.0 - w.0).powi(2) + (got.1 - w.1).powi(2)).sqrt()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(dist < 1e-8, "{got:?} unmatched (nearest {dist})");
            reference.swap_remove(idx);
        }
    }
}
