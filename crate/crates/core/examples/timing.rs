use aniflow_core::assembly::MassTreatment;
use aniflow_core::diagnostics::{convergence_level, DtRule, ManufacturedProblem};
use std::time::Instant;

fn main() {
    let problem = ManufacturedProblem::shrinking_ellipse_3d(0.5).unwrap();
    for j in [64usize, 128, 256, 512] {
        let t0 = Instant::now();
        let (l2, h1) = convergence_level(&problem, j, DtRule::DtEqH2, 0.45, MassTreatment::Consistent).unwrap();
        println!("J={j}: {:.1?}  l2={l2:.4e} h1={h1:.4e}", t0.elapsed());
    }
}
