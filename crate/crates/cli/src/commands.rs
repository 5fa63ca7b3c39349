//! Implementations of the `run`, `convergence` and `validate` subcommands.

use std::cell::RefCell;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aniflow_core::anisotropy::{self, sampling, Anisotropy, Mobility};
use aniflow_core::assembly::{forcing_from_exact, ForcingTerm, MassTreatment};
use aniflow_core::diagnostics::{eoc, ConvergenceRow, DtRule, ManufacturedProblem};
use aniflow_core::flow_matrix::check_parabolicity;
use aniflow_core::mesh::{NodalField, PeriodicGrid};
use aniflow_core::ritz::{ritz_project, RitzOptions};
use aniflow_core::solver::{run_flow, FlowParams};
use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::config::{
    parse_flow_config, parse_validate_config, CurveSpec, FlowConfig, ForcingSpec, InitSpec,
};
use crate::io;
use crate::CliError;

#[derive(Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub records: usize,
    pub final_e_phi: f64,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn manufactured_problem(spec: &ForcingSpec) -> Result<ManufacturedProblem, CliError> {
    match spec.manufactured.as_str() {
        "ellipse3d" => ManufacturedProblem::shrinking_ellipse_3d(spec.delta.unwrap_or(0.5))
            .map_err(|e| CliError::Config(format!("forcing: {e}"))),
        "circle" => ManufacturedProblem::shrinking_circle()
            .map_err(|e| CliError::Config(format!("forcing: {e}"))),
        other => Err(CliError::Config(format!(
            "unknown manufactured solution {other:?} (expected ellipse3d or circle)"
        ))),
    }
}

/// Forcing that makes the named exact solution solve the forced flow for the
/// configured anisotropy/mobility pair.
fn build_forcing(
    spec: &ForcingSpec,
    a: &Anisotropy,
    mob: &Mobility,
) -> Result<ForcingTerm, CliError> {
    let problem = manufactured_problem(spec)?;
    if problem.dim() != a.dim() {
        return Err(CliError::Config(format!(
            "manufactured solution is {}-dimensional but the anisotropy is {}-dimensional",
            problem.dim(),
            a.dim()
        )));
    }
    let (p1, p2, p3) = (problem.clone(), problem.clone(), problem);
    Ok(forcing_from_exact(
        a,
        mob,
        move |rho, t, out| p1.exact_rho(rho, t, out),
        move |rho, t, out| p2.exact_t(rho, t, out),
        move |rho, t, out| p3.exact_rho_rho(rho, t, out),
    ))
}

fn initial_curve(cfg: &FlowConfig, a: &Anisotropy, grid: PeriodicGrid) -> Result<NodalField, CliError> {
    if let CurveSpec::FromFile { path } = &cfg.curve {
        let field = io::read_frame(path)?;
        if field.dim() != a.dim() {
            return Err(CliError::Config(format!(
                "curve file is {}-dimensional but the anisotropy is {}-dimensional",
                field.dim(),
                a.dim()
            )));
        }
        if field.grid().element_count() != cfg.elements {
            return Err(CliError::Config(format!(
                "curve file has J = {} but the config says J = {}",
                field.grid().element_count(),
                cfg.elements
            )));
        }
        return Ok(field);
    }
    let preset = cfg.curve.build_preset()?.expect("non-file curve");
    if preset.dim() != a.dim() {
        return Err(CliError::Config(format!(
            "curve is {}-dimensional but the anisotropy is {}-dimensional",
            preset.dim(),
            a.dim()
        )));
    }
    let interpolated = preset.initial_field(grid)?;
    match cfg.init {
        InitSpec::Interpolate => Ok(interpolated),
        InitSpec::Ritz => {
            if !preset.is_smooth() {
                eprintln!(
                    "note: curve preset has corners; initializing by nodal interpolation instead of the Ritz projection"
                );
                return Ok(interpolated);
            }
            let y = |rho: f64, out: &mut [f64]| {
                preset.eval_into(rho, Some(0.0), out).expect("preset evaluation");
            };
            let y_rho = |rho: f64, out: &mut [f64]| {
                let d = preset
                    .derivative(rho, Some(0.0))
                    .expect("preset derivative")
                    .expect("smooth preset");
                out.copy_from_slice(&d);
            };
            ritz_project(a, grid, a.dim(), y, y_rho, &RitzOptions::default()).map_err(Into::into)
        }
    }
}

/// `aniflow run <config.json>`: execute one evolution and write the series
/// (and optionally frames) to disk.
pub fn cmd_run(config_path: &Path) -> Result<RunSummary, CliError> {
    let cfg = parse_flow_config(&read_to_string(config_path)?)?;
    let a = cfg.anisotropy.build()?;
    let mob = cfg.mobility.build();
    let grid = PeriodicGrid::new(cfg.elements)
        .map_err(|e| CliError::Config(format!("J: {e}")))?;
    let x0 = initial_curve(&cfg, &a, grid)?;

    let forcing = match &cfg.forcing {
        Some(spec) => Some(build_forcing(spec, &a, &mob)?),
        None => None,
    };
    let params = FlowParams {
        dt: cfg.dt,
        t_end: cfg.t_end,
        mass: cfg.mass_treatment.build(),
        newton: cfg.newton.as_ref().map(|n| n.build(grid)),
        forcing,
        frames_every: if cfg.outputs.frames_dir.is_some() { cfg.outputs.frames_every } else { 0 },
    };

    let sink_error: RefCell<Option<CliError>> = RefCell::new(None);
    let frames_dir = cfg.outputs.frames_dir.clone();
    let vtk = cfg.outputs.vtk;
    let on_frame = |step: usize, _t: f64, x: &NodalField| -> bool {
        let dir = frames_dir.as_ref().expect("frames dir present when frames are on");
        let res = io::write_frame(dir, step, x)
            .and_then(|()| if vtk { io::write_frame_vtk(dir, step, x) } else { Ok(()) });
        match res {
            Ok(()) => true,
            Err(e) => {
                *sink_error.borrow_mut() = Some(e);
                false
            }
        }
    };

    let result = run_flow(&a, &mob, &params, x0, on_frame);
    let (xf, series) = match result {
        Ok(v) => v,
        Err(aniflow_core::Error::Aborted { .. }) => {
            return Err(sink_error.into_inner().unwrap_or_else(|| {
                CliError::Io(String::from("frame sink aborted the run"))
            }));
        }
        Err(e) => return Err(e.into()),
    };
    let _ = xf;

    io::write_series(&cfg.outputs.series_path, &series)?;
    let last = series.last().expect("series has the t = 0 record");
    println!(
        "completed {} steps to T = {}; E_phi = {:.6e}, ratio = {:.3}, K_inf = {:.3e}",
        series.len() - 1,
        cfg.t_end,
        last.e_phi,
        last.ratio,
        last.k_inf
    );
    Ok(RunSummary { steps: series.len() - 1, records: series.len(), final_e_phi: last.e_phi })
}

pub struct ConvergenceArgs {
    pub preset: String,
    pub delta: f64,
    pub j_list: Vec<usize>,
    pub dt_rule: DtRule,
    pub t_end: f64,
    pub mass: MassTreatment,
    pub out: std::path::PathBuf,
}

/// `aniflow convergence`: run the manufactured-solution study over the `J`
/// list (levels run in parallel, capped by `ANIFLOW_THREADS`) and write the
/// table as CSV plus an aligned text table on stdout.
pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<Vec<ConvergenceRow>, CliError> {
    if args.j_list.is_empty() {
        return Err(CliError::Config(String::from("need at least one J level")));
    }
    if args.j_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(String::from("J levels must be strictly increasing")));
    }
    let problem = manufactured_problem(&ForcingSpec {
        manufactured: args.preset.clone(),
        delta: Some(args.delta),
    })?;

    let threads = std::env::var("ANIFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .min(args.j_list.len());

    let results: Mutex<Vec<Option<Result<(f64, f64), aniflow_core::Error>>>> =
        Mutex::new((0..args.j_list.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= args.j_list.len() {
                    break;
                }
                let r = aniflow_core::diagnostics::convergence_level(
                    &problem,
                    args.j_list[i],
                    args.dt_rule,
                    args.t_end,
                    args.mass,
                );
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(args.j_list.len());
    for (i, slot) in results.into_inner().unwrap().into_iter().enumerate() {
        let (l2, h1) = slot.expect("worker filled every slot").map_err(CliError::from)?;
        let (l2_eoc, h1_eoc) = match rows.last() {
            Some(prev) => {
                let hc = 1.0 / prev.elements as f64;
                let hf = 1.0 / args.j_list[i] as f64;
                (
                    Some(eoc(prev.l2_err, l2, hc, hf).map_err(CliError::from)?),
                    Some(eoc(prev.h1_err, h1, hc, hf).map_err(CliError::from)?),
                )
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow { elements: args.j_list[i], l2_err: l2, l2_eoc, h1_err: h1, h1_eoc });
    }

    io::write_convergence_csv(&args.out, &rows)?;
    print!("{}", io::format_convergence_table(&rows));
    if let Some(last) = rows.last() {
        if let (Some(l2), Some(h1)) = (last.l2_eoc, last.h1_eoc) {
            println!("EOC at the finest pair: L2 {l2:.2}, H1 {h1:.2}");
        }
    }
    Ok(rows)
}

/// `aniflow validate <anisotropy.json>`: structural report plus a sampled
/// parabolicity check for both mobilities. Returns whether everything held.
pub fn cmd_validate(spec_path: &Path) -> Result<bool, CliError> {
    let cfg = parse_validate_config(&read_to_string(spec_path)?)?;
    let a = cfg.anisotropy.build()?;
    let samples = cfg.samples.unwrap_or(10_000);
    let report = anisotropy::validate(&a, samples);
    println!("homogeneity_ok        {}   (max rel err {:.2e})", report.homogeneity_ok, report.max_homogeneity_err);
    println!("euler_ok              {}   (max rel err {:.2e})", report.euler_ok, report.max_euler_err);
    println!("hessian_kernel_ok     {}   (max rel err {:.2e})", report.hessian_kernel_ok, report.max_kernel_err);
    println!("strict_convexity_ok   {}   (min sampled {:.3e})", report.strict_convexity_ok, report.min_tangential_convexity);

    let mut rng = ChaCha12Rng::seed_from_u64(0x5041_5241_424f_4c49);
    let mut parabolic_ok = true;
    for mob in [Mobility::ConstantOne, Mobility::InversePhi] {
        let mut ok = true;
        for _ in 0..1000 {
            let p = sampling::vector_in_annulus(&mut rng, a.dim(), 0.2, 4.0);
            match check_parabolicity(&a, &mob, &p, 1e-10) {
                Ok(true) => {}
                Ok(false) => ok = false,
                Err(e) => return Err(e.into()),
            }
        }
        println!("parabolicity ({mob:?})  {ok}");
        parabolic_ok &= ok;
    }
    Ok(report.all_ok() && parabolic_ok)
}
