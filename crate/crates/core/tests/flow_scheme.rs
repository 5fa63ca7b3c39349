//! End-to-end checks of the time stepper: exact shrinking circle, the
//! discrete energy estimate on benchmark curves, Newton behaviour, and the
//! manufactured forcing against a pure finite-difference route.

use aniflow_core::anisotropy::{Anisotropy, Mobility};
use aniflow_core::assembly::{MassTreatment, SchemeOptions};
use aniflow_core::diagnostics::ManufacturedProblem;
use aniflow_core::mesh::{NodalField, PeriodicGrid};
use aniflow_core::presets::CurvePreset;
use aniflow_core::solver::{run_flow, solve_timestep, FlowParams, NewtonOptions};
use std::f64::consts::PI;

fn circle_polygon(j: usize, r: f64) -> NodalField {
    let grid = PeriodicGrid::new(j).unwrap();
    NodalField::interpolate(grid, 2, |rho, out| {
        out[0] = r * (2.0 * PI * rho).cos();
        out[1] = r * (2.0 * PI * rho).sin();
    })
}

#[test]
fn shrinking_circle_tracks_exact_radius() {
    // isotropic flow from a regular 256-gon: r(t) = sqrt(1 - 2t)
    let a = Anisotropy::isotropic(2).unwrap();
    let mob = Mobility::ConstantOne;
    let x0 = circle_polygon(256, 1.0);
    let params = FlowParams {
        dt: 1e-4,
        t_end: 0.4,
        mass: MassTreatment::Consistent,
        newton: None,
        forcing: None,
        frames_every: 0,
    };
    let (xf, series) = run_flow(&a, &mob, &params, x0, |_, _, _| true).unwrap();
    let r_final = (xf.node(0)[0].powi(2) + xf.node(0)[1].powi(2)).sqrt();
    let exact = (1.0f64 - 0.8).sqrt();
    println!("final radius {r_final} vs exact {exact}");
    assert!((r_final - exact).abs() < 1e-3);
    // affine residual: every step converges in exactly one Newton iteration
    assert!(series.iter().skip(1).all(|r| r.newton_iters == 1));
}

fn dissipation_holds(series_curve: &NodalField, a: &Anisotropy, mob: &Mobility, dt: f64, steps: usize) {
    let grid = series_curve.grid();
    let newton = NewtonOptions::default_for(grid);
    for mass in [MassTreatment::Consistent, MassTreatment::Lumped] {
        let opts = SchemeOptions::new(mass, dt).unwrap();
        let mut x = series_curve.clone();
        let mut e_phi_prev = aniflow_core::mesh::energy_phi(a, &x).unwrap();
        for m in 1..=steps {
            let (x_next, rep) = solve_timestep(a, mob, &opts, &newton, &x, m as f64 * dt).unwrap();
            assert!(
                rep.energy_big_phi_after + rep.dissipation
                    <= rep.energy_big_phi_before + 1e-10 * (1.0 + rep.energy_big_phi_before),
                "stability estimate violated at step {m} ({mass:?})"
            );
            assert!(rep.dissipation >= 0.0);
            let e_phi = aniflow_core::mesh::energy_phi(a, &x_next).unwrap();
            assert!(e_phi <= e_phi_prev + 1e-10 * (1.0 + e_phi_prev), "E_phi grew at step {m}");
            e_phi_prev = e_phi;
            x = x_next;
        }
    }
}

#[test]
fn energy_estimate_on_benchmark_curves() {
    // trefoil under isotropic flow
    let grid = PeriodicGrid::new(128).unwrap();
    let trefoil = CurvePreset::trefoil().initial_field(grid).unwrap();
    let iso3 = Anisotropy::isotropic(3).unwrap();
    dissipation_holds(&trefoil, &iso3, &Mobility::ConstantOne, 1e-3, 40);

    // planar sin-modulated anisotropy from the equidistributed ellipse
    let ellipse = CurvePreset::ellipse_2d(1.0, 0.5).unwrap().initial_field(grid).unwrap();
    let sin3 = Anisotropy::sin_modulated_2d(3, 0.124).unwrap();
    dissipation_holds(&ellipse, &sin3, &Mobility::InversePhi, 1e-4, 40);
}

#[test]
fn halving_dt_does_not_increase_newton_iterations() {
    let grid = PeriodicGrid::new(64).unwrap();
    let cases: Vec<(NodalField, Anisotropy, Mobility, f64)> = vec![
        (
            CurvePreset::trefoil().initial_field(grid).unwrap(),
            Anisotropy::isotropic(3).unwrap(),
            Mobility::ConstantOne,
            1e-3,
        ),
        (
            CurvePreset::ellipse_2d(1.0, 0.5).unwrap().initial_field(grid).unwrap(),
            Anisotropy::sin_modulated_2d(3, 0.124).unwrap(),
            Mobility::InversePhi,
            1e-4,
        ),
        // dt large enough that the residual evaluation's roundoff floor
        // (which scales like eps/dt on this fast curve) stays below the
        // Newton tolerance for both dt and dt/2
        (
            CurvePreset::interlocked_rings().initial_field(grid).unwrap(),
            Anisotropy::diagonal_quadratic(vec![1.0, 0.25, 0.25]).unwrap(),
            Mobility::ConstantOne,
            2e-3,
        ),
    ];
    for (x0, a, mob, dt) in cases {
        let max_iters = |dt: f64| -> usize {
            let newton = NewtonOptions::default_for(grid);
            let opts = SchemeOptions::new(MassTreatment::Consistent, dt).unwrap();
            let mut x = x0.clone();
            let mut worst = 0;
            for m in 1..=20 {
                let (xn, rep) = solve_timestep(&a, &mob, &opts, &newton, &x, m as f64 * dt).unwrap();
                worst = worst.max(rep.newton_iters);
                x = xn;
            }
            worst
        };
        let coarse = max_iters(dt);
        let fine = max_iters(0.5 * dt);
        println!("dt {dt}: iters {coarse}, dt/2: {fine}");
        assert!(fine <= coarse, "halving dt increased Newton iterations");
    }
}

#[test]
fn manufactured_forcing_matches_finite_difference_route() {
    // forcing of the shrinking-ellipse solution against a route that uses
    // only evaluations of y (all derivatives by central differences)
    let delta = 0.5;
    let problem = ManufacturedProblem::shrinking_ellipse_3d(delta).unwrap();
    let a = Anisotropy::diagonal_quadratic(vec![delta * delta, 1.0, 1.0]).unwrap();
    let mob = Mobility::InversePhi;
    let forcing = problem.forcing_pointwise();

    let y = |rho: f64, t: f64, out: &mut [f64]| problem.exact(rho, t, out);
    let eps = 1e-5;
    let grid = PeriodicGrid::new(12).unwrap();
    let mut f = [0.0; 3];
    let mut any_nonzero = false;
    for j in 0..12 {
        let rho = grid.node(j);
        for &t in &[0.05, 0.2, 0.35] {
            let mut yp = [0.0; 3];
            let mut ym = [0.0; 3];
            // y_rho and y_t by central differences of y itself
            let mut y_rho = [0.0; 3];
            y(rho + eps, t, &mut yp);
            y(rho - eps, t, &mut ym);
            for i in 0..3 {
                y_rho[i] = (yp[i] - ym[i]) / (2.0 * eps);
            }
            let mut y_t = [0.0; 3];
            y(rho, t + eps, &mut yp);
            y(rho, t - eps, &mut ym);
            for i in 0..3 {
                y_t[i] = (yp[i] - ym[i]) / (2.0 * eps);
            }
            // [Phi'(y_rho)]_rho by central differences of Phi'(y_rho(.))
            let mut yrp = [0.0; 3];
            let mut yrm = [0.0; 3];
            let mut tmp_p = [0.0; 3];
            let mut tmp_m = [0.0; 3];
            y(rho + 2.0 * eps, t, &mut tmp_p);
            y(rho, t, &mut tmp_m);
            for i in 0..3 {
                yrp[i] = (tmp_p[i] - tmp_m[i]) / (2.0 * eps);
            }
            y(rho, t, &mut tmp_p);
            y(rho - 2.0 * eps, t, &mut tmp_m);
            for i in 0..3 {
                yrm[i] = (tmp_p[i] - tmp_m[i]) / (2.0 * eps);
            }
            let gp = a.dbig_phi(&yrp).unwrap();
            let gm = a.dbig_phi(&yrm).unwrap();
            let parts = aniflow_core::flow_matrix::compute_parts(&a, &mob, &y_rho).unwrap();
            forcing.eval_node(grid, j, t, &mut f).unwrap();
            for i in 0..3 {
                let mut hyt = 0.0;
                for k in 0..3 {
                    hyt += parts.h[i * 3 + k] * y_t[k];
                }
                let oracle = hyt - (gp[i] - gm[i]) / (2.0 * eps);
                assert!(
                    (oracle - f[i]).abs() < 1e-6 * (1.0 + f[i].abs()),
                    "rho {rho} t {t} i {i}: {oracle} vs {}",
                    f[i]
                );
            }
            if f.iter().any(|v| v.abs() > 1e-3) {
                any_nonzero = true;
            }
        }
    }
    assert!(any_nonzero, "ellipse forcing should not vanish identically");
}

#[test]
fn forced_step_residual_is_small_at_solution() {
    // x_new returned by the solver satisfies the public residual contract
    let problem = ManufacturedProblem::shrinking_ellipse_3d(0.5).unwrap();
    let grid = PeriodicGrid::new(32).unwrap();
    let x0 = problem.initialize(grid).unwrap();
    let dt = 1e-3;
    let opts = SchemeOptions::new(MassTreatment::Consistent, dt)
        .unwrap()
        .with_forcing(problem.forcing_for_grid(grid).unwrap().unwrap());
    let newton = NewtonOptions::default_for(grid);
    let (x1, rep) =
        solve_timestep(&problem.anisotropy, &problem.mobility, &opts, &newton, &x0, dt).unwrap();
    let r = aniflow_core::assembly::residual(
        &problem.anisotropy,
        &problem.mobility,
        &opts,
        &x0,
        &x1,
        dt,
    )
    .unwrap();
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(rnorm <= newton.tol_residual, "residual {rnorm} vs {}", newton.tol_residual);
    assert!(rep.final_residual <= newton.tol_residual);
}
