//! Convergence-order smoke tests on moderate grids; the full published-size
//! study runs in the acceptance suite.

use aniflow_core::assembly::MassTreatment;
use aniflow_core::diagnostics::{convergence_study, DtRule, ManufacturedProblem};

fn print_rows(rows: &[aniflow_core::diagnostics::ConvergenceRow]) {
    println!("    J        L2 err    EOC     H1 err    EOC");
    for r in rows {
        let fmt = |e: Option<f64>| e.map_or("  ---".to_string(), |v| format!("{v:5.2}"));
        println!(
            "{:5}   {:.4e}  {}   {:.4e}  {}",
            r.elements,
            r.l2_err,
            fmt(r.l2_eoc),
            r.h1_err,
            fmt(r.h1_eoc)
        );
    }
}

#[test]
fn ellipse_orders_with_dt_h2() {
    let problem = ManufacturedProblem::shrinking_ellipse_3d(0.5).unwrap();
    let rows = convergence_study(
        &problem,
        &[32, 64, 128],
        DtRule::DtEqH2,
        0.1125,
        MassTreatment::Consistent,
    )
    .unwrap();
    print_rows(&rows);
    let last = rows.last().unwrap();
    assert!((1.85..2.15).contains(&last.l2_eoc.unwrap()), "L2 EOC {:?}", last.l2_eoc);
    assert!((0.85..1.15).contains(&last.h1_eoc.unwrap()), "H1 EOC {:?}", last.h1_eoc);
}

#[test]
fn ellipse_orders_with_dt_h() {
    let problem = ManufacturedProblem::shrinking_ellipse_3d(0.5).unwrap();
    let rows = convergence_study(
        &problem,
        &[32, 64, 128, 256],
        DtRule::DtEqH,
        0.1125,
        MassTreatment::Consistent,
    )
    .unwrap();
    print_rows(&rows);
    // first-order regime: EOC climbs towards 1
    let eocs: Vec<f64> = rows.iter().skip(1).map(|r| r.l2_eoc.unwrap()).collect();
    assert!(eocs.windows(2).all(|w| w[1] >= w[0] - 0.02), "not increasing: {eocs:?}");
    assert!(*eocs.last().unwrap() > 0.8, "{eocs:?}");
}

#[test]
fn unforced_circle_shows_the_same_orders() {
    let problem = ManufacturedProblem::shrinking_circle().unwrap();
    let rows = convergence_study(
        &problem,
        &[32, 64, 128],
        DtRule::DtEqH2,
        0.1125,
        MassTreatment::Consistent,
    )
    .unwrap();
    print_rows(&rows);
    let last = rows.last().unwrap();
    assert!((1.85..2.15).contains(&last.l2_eoc.unwrap()));
    assert!((0.85..1.15).contains(&last.h1_eoc.unwrap()));
}

#[test]
fn lumped_mass_keeps_the_orders() {
    let problem = ManufacturedProblem::shrinking_ellipse_3d(0.5).unwrap();
    let rows = convergence_study(
        &problem,
        &[32, 64, 128],
        DtRule::DtEqH2,
        0.1125,
        MassTreatment::Lumped,
    )
    .unwrap();
    print_rows(&rows);
    let last = rows.last().unwrap();
    assert!((1.85..2.15).contains(&last.l2_eoc.unwrap()));
    assert!((0.85..1.15).contains(&last.h1_eoc.unwrap()));
}
