//! Cyclic block-tridiagonal solves against a dense LU oracle.

use aniflow_core::assembly::CyclicBlockSystem;
use aniflow_core::solver::solve_linear;
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn dense_of(sys: &CyclicBlockSystem) -> DMatrix<f64> {
    let (n, d) = (sys.blocks, sys.dim);
    let mut m = DMatrix::zeros(n * d, n * d);
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let next = (j + 1) % n;
        for r in 0..d {
            for c in 0..d {
                m[(j * d + r, prev * d + c)] += sys.sub_block(j)[r * d + c];
                m[(j * d + r, j * d + c)] += sys.diag_block(j)[r * d + c];
                m[(j * d + r, next * d + c)] += sys.sup_block(j)[r * d + c];
            }
        }
    }
    m
}

#[test]
fn random_well_conditioned_blocks_match_dense_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let (n, d) = (16usize, 3usize);
        let mut sys = CyclicBlockSystem::zeros(n, d);
        for v in sys.sub.iter_mut().chain(sys.sup.iter_mut()) {
            *v = uniform(&mut rng) - 0.5;
        }
        for j in 0..n {
            for r in 0..d {
                for c in 0..d {
                    let mut v = uniform(&mut rng) - 0.5;
                    if r == c {
                        v += 6.0; // block-diagonally dominant
                    }
                    sys.diag[(j * d + r) * d + c] = v;
                }
            }
        }
        for v in sys.rhs.iter_mut() {
            *v = 2.0 * uniform(&mut rng) - 1.0;
        }

        let ours = solve_linear(&sys).unwrap();

        let dense = dense_of(&sys);
        let rhs = DVector::from_column_slice(&sys.rhs);
        let oracle = dense.lu().solve(&rhs).expect("oracle solve");
        for i in 0..n * d {
            assert!(
                (ours[i] - oracle[i]).abs() < 1e-10,
                "trial {trial} entry {i}: {} vs {}",
                ours[i],
                oracle[i]
            );
        }

        // accuracy contract: residual below 1e-12 (1 + |rhs|)
        let mut back = vec![0.0; n * d];
        sys.apply(&ours, &mut back);
        let mut res = 0.0f64;
        let mut rnorm = 0.0f64;
        for i in 0..n * d {
            res += (back[i] - sys.rhs[i]).powi(2);
            rnorm += sys.rhs[i] * sys.rhs[i];
        }
        assert!(res.sqrt() <= 1e-12 * (1.0 + rnorm.sqrt()));
    }
}

#[test]
fn small_scheme_systems_match_dense_oracle() {
    // actual Jacobian systems from the scheme at J <= 8
    use aniflow_core::anisotropy::{Anisotropy, Mobility};
    use aniflow_core::assembly::{jacobian, MassTreatment, SchemeOptions};
    use aniflow_core::mesh::{NodalField, PeriodicGrid};
    use std::f64::consts::PI;

    let a = Anisotropy::diagonal_quadratic(vec![0.25, 1.0, 1.0]).unwrap();
    let mob = Mobility::InversePhi;
    let grid = PeriodicGrid::new(8).unwrap();
    let x = NodalField::interpolate(grid, 3, |rho, out| {
        out[0] = (2.0 * PI * rho).cos();
        out[1] = (2.0 * PI * rho).sin();
        out[2] = 0.4 * (4.0 * PI * rho).cos();
    });
    for mass in [MassTreatment::Consistent, MassTreatment::Lumped] {
        let opts = SchemeOptions::new(mass, 1e-3).unwrap();
        let mut sys = jacobian(&a, &mob, &opts, &x, &x).unwrap();
        for (i, v) in sys.rhs.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        let ours = solve_linear(&sys).unwrap();
        let dense = dense_of(&sys);
        let oracle = dense.lu().solve(&DVector::from_column_slice(&sys.rhs)).unwrap();
        for i in 0..ours.len() {
            assert!((ours[i] - oracle[i]).abs() < 1e-10 * (1.0 + oracle[i].abs()));
        }
    }
}
