//! Convergence study, device simulation and projection check drivers.

use std::path::PathBuf;
use std::sync::Arc;

use crate::harness::config::{DtRule, ProblemKind, RunConfig};
use crate::harness::csv::{self, SeriesRow};
use crate::harness::vtk::{write_vtk_file, CellData};
use crate::manufactured::{
    eoc_table, l2_error_scalar, l2_error_vector, observed_orders, weighted_face_error, EocTable,
    ErrorReport, Example1, Example2,
};
use crate::mesh::Mesh;
use crate::projections::{
    hdg_project, hdg_projection_residual, l2_project_face, l2_project_scalar, l2_project_vector,
    CoefficientField,
};
use crate::timestepping::{CouplingConfig, Integrator, ProblemData, StepReport};
use crate::{Error, Point, Result};

/// Runs `f` on a dedicated pool of `threads` workers with sequential dense
/// and sparse kernels, so results only depend on the thread count.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Settings of one manufactured-solution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Run {
    pub n: usize,
    pub k: usize,
    pub dt: DtRule,
    pub t_final: f64,
    pub eps: f64,
    pub tau: f64,
    pub coupling: CouplingConfig,
}

impl Example1Run {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            dt: DtRule::Auto,
            t_final: 1.0,
            eps: 0.1,
            tau: 1.0,
            coupling: CouplingConfig::default(),
        }
    }
}

/// Final-time errors and the per-step logs of one run.
#[derive(Debug, Clone)]
pub struct Example1Outcome {
    pub report: ErrorReport,
    pub steps: Vec<StepReport>,
    pub u: CoefficientField,
}

pub fn run_example1(run: &Example1Run) -> Result<Example1Outcome> {
    let mesh = Arc::new(Example1::mesh(run.n)?);
    let h = mesh.h_max();
    let grid = crate::timestepping::TimeGrid::new(run.t_final, run.dt.resolve(h, run.k))?;
    let ex = Example1 { eps: run.eps };
    let mut integ = Integrator::new(
        mesh.clone(),
        run.k,
        run.tau,
        ex.problem(),
        grid,
        run.coupling,
    )?;
    let steps = integ.run(|_, _| Ok(()))?;
    let t = grid.t_final;
    let tr = integ.transport().expect("at least one step");
    let po = integ.potential().expect("at least one step");
    let report = ErrorReport {
        level: (run.n as f64).log2().round() as usize,
        h,
        err_u: l2_error_scalar(&mesh, &tr.u, |x| Example1::u(x, t)),
        err_phi: l2_error_scalar(&mesh, &po.phi, |x| Example1::phi(x, t)),
        err_q: l2_error_vector(&mesh, &tr.q, |x| Example1::q(x, t)),
        err_p: l2_error_vector(&mesh, &po.p, |x| Example1::p(x, t)),
    };
    Ok(Example1Outcome {
        report,
        steps,
        u: tr.u.clone(),
    })
}

/// Example 1 on every configured level.
pub fn convergence(cfg: &RunConfig) -> Result<EocTable> {
    let mut reports = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let run = Example1Run {
            n: 1 << level,
            k: cfg.k,
            dt: cfg.dt,
            t_final: cfg.t_final,
            eps: cfg.eps(),
            tau: cfg.tau,
            coupling: cfg.coupling(),
        };
        let out = run_example1(&run).inspect_err(|e| log::error!("level {level} failed: {e}"))?;
        log::info!(
            "level {level}: h = {:.4e}, errors u {:.4e} phi {:.4e} q {:.4e} p {:.4e}",
            out.report.h,
            out.report.err_u,
            out.report.err_phi,
            out.report.err_q,
            out.report.err_p
        );
        reports.push(out.report);
    }
    eoc_table(&reports)
}

/// Runs the study and writes `convergence_k{k}.csv` into the output directory.
pub fn run_convergence(cfg: &RunConfig) -> Result<(EocTable, PathBuf)> {
    let table = with_threads(cfg.threads, || convergence(cfg))??;
    std::fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("convergence_k{}.csv", cfg.k));
    csv::write_convergence(&table, std::fs::File::create(&path)?)?;
    Ok((table, path))
}

/// Minimum and maximum of a scalar field sampled at the vertices, edge
/// midpoints and centroid of every element.
pub fn field_range(field: &CoefficientField) -> (f64, f64) {
    let basis = crate::fem::TriangleBasis::new(field.degree());
    let pts: [Point; 7] = [
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.0],
        [0.5, 0.5],
        [0.0, 0.5],
        [1.0 / 3.0, 1.0 / 3.0],
    ];
    let tab = basis.tabulate(&pts);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut v = [0.0];
    for e in 0..field.num_elements() {
        for q in 0..pts.len() {
            field.eval_with(e, tab.values_at(q), &mut v);
            lo = lo.min(v[0]);
            hi = hi.max(v[0]);
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<PathBuf>,
    pub series_path: PathBuf,
}

fn problem_of(cfg: &RunConfig) -> Result<(Mesh, ProblemData)> {
    Ok(match cfg.problem {
        ProblemKind::Example1 => (
            Example1::mesh(cfg.n)?,
            Example1 { eps: cfg.eps() }.problem(),
        ),
        ProblemKind::Example2 => (
            Example2::mesh(cfg.n)?,
            Example2 { eps: cfg.eps() }.problem(),
        ),
    })
}

fn write_snapshot(
    cfg: &RunConfig,
    mesh: &Mesh,
    t: f64,
    u: &CoefficientField,
    pot: &crate::solver::PoissonSolution,
) -> Result<PathBuf> {
    let ne = mesh.num_elements();
    let um: Vec<f64> = (0..ne).map(|e| u.mean(e, 0)).collect();
    let fm: Vec<f64> = (0..ne).map(|e| pot.phi.mean(e, 0)).collect();
    let pm: Vec<Point> = (0..ne)
        .map(|e| [pot.p.mean(e, 0), pot.p.mean(e, 1)])
        .collect();
    let data = CellData {
        scalars: vec![("u", &um), ("phi", &fm)],
        vectors: vec![("p", &pm)],
    };
    let path = cfg.out.join(format!("snapshot_t{t:.4}.vtk"));
    write_vtk_file(mesh, &format!("ddhdg t={t}"), &data, &path)?;
    Ok(path)
}

/// Time integration with VTK snapshots and a `series.csv` of density bounds.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let (mesh, problem) = problem_of(cfg)?;
    let mesh = Arc::new(mesh);
    let grid = cfg.time_grid(cfg.n)?;
    let snap_steps: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|&t| grid.step_of(t).expect("validated"))
        .collect();
    with_threads(cfg.threads, || -> Result<SimulationOutput> {
        let mut integ =
            Integrator::new(mesh.clone(), cfg.k, cfg.tau, problem, grid, cfg.coupling())?;
        let mut snapshots = Vec::new();
        let (lo, hi) = field_range(&integ.state().u);
        let mut series = vec![SeriesRow {
            t: 0.0,
            min_u: lo,
            max_u: hi,
            gummel_iterations: 0,
        }];
        if snap_steps.contains(&0) {
            let pot = integ.potential_now()?;
            snapshots.push(write_snapshot(cfg, &mesh, 0.0, &integ.state().u, &pot)?);
        }
        integ.run(|it, rep| {
            let u = &it.state().u;
            let (lo, hi) = field_range(u);
            series.push(SeriesRow {
                t: rep.t,
                min_u: lo,
                max_u: hi,
                gummel_iterations: rep.gummel_iterations,
            });
            if snap_steps.contains(&it.state().step) {
                snapshots.push(write_snapshot(
                    cfg,
                    &mesh,
                    rep.t,
                    u,
                    it.potential().expect("step done"),
                )?);
            }
            Ok(())
        })?;
        let series_path = cfg.out.join("series.csv");
        csv::write_series(&series, std::fs::File::create(&series_path)?)?;
        Ok(SimulationOutput {
            series,
            snapshots,
            series_path,
        })
    })?
}

/// Observed orders of the L² and HDG projections of the Example 1 fields.
#[derive(Debug, Clone)]
pub struct ProjectionTable {
    pub names: Vec<&'static str>,
    /// Expected order of each projection.
    pub expected: Vec<f64>,
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    /// `errors[level][projection]`
    pub errors: Vec<Vec<f64>>,
    /// `rates[level][projection]`, `None` on the first level.
    pub rates: Vec<Vec<Option<f64>>>,
    /// Largest relative residual of the HDG projection equations.
    pub max_residual: f64,
}

impl ProjectionTable {
    pub fn final_rates(&self) -> Option<Vec<f64>> {
        self.rates.last()?.iter().copied().collect()
    }
}

pub fn project_check(cfg: &RunConfig) -> Result<ProjectionTable> {
    let k = cfg.k;
    let t = cfg.t_final;
    let names = vec![
        "pi_k_q",
        "pi_k1_u",
        "pi_face_u",
        "pi_v",
        "pi_w",
        "pi_v_k1",
        "pi_w_k1",
    ];
    let kf = k as f64;
    let expected = vec![
        kf + 1.0,
        kf + 2.0,
        kf + 1.0,
        kf + 1.0,
        kf + 1.0,
        kf + 2.0,
        kf + 2.0,
    ];
    let mut errors = Vec::new();
    let mut h = Vec::new();
    let mut max_residual = 0.0f64;
    for &level in &cfg.levels {
        let mesh = Example1::mesh(1 << level)?;
        h.push(mesh.h_max());
        let q = |x: Point| Example1::q(x, t);
        let u = |x: Point| Example1::u(x, t);
        let p = |x: Point| Example1::p(x, t);
        let phi = |x: Point| Example1::phi(x, t);
        let tau = vec![cfg.tau; mesh.num_faces()];
        let mut row = vec![
            l2_error_vector(&mesh, &l2_project_vector(&mesh, k, q), q),
            l2_error_scalar(&mesh, &l2_project_scalar(&mesh, k + 1, u), u),
            weighted_face_error(&mesh, &l2_project_face(&mesh, k, u), u),
        ];
        for m in [k, k + 1] {
            let (pv, pw) = hdg_project(&mesh, m, &tau, p, phi)?;
            max_residual =
                max_residual.max(hdg_projection_residual(&mesh, m, &tau, &p, &phi, &pv, &pw));
            row.push(l2_error_vector(&mesh, &pv, p));
            row.push(l2_error_scalar(&mesh, &pw, phi));
        }
        errors.push(row);
    }
    let mut rates = vec![vec![None; names.len()]; cfg.levels.len()];
    for c in 0..names.len() {
        let e: Vec<f64> = errors.iter().map(|r| r[c]).collect();
        for (i, r) in observed_orders(&h, &e)?.into_iter().enumerate() {
            rates[i + 1][c] = Some(r);
        }
    }
    Ok(ProjectionTable {
        names,
        expected,
        levels: cfg.levels.clone(),
        h,
        errors,
        rates,
        max_residual,
    })
}

/// Runs the projection check and writes `projection_k{k}.csv`.
pub fn run_project_check(cfg: &RunConfig) -> Result<(ProjectionTable, PathBuf)> {
    let table = with_threads(cfg.threads, || project_check(cfg))??;
    std::fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("projection_k{}.csv", cfg.k));
    let mut header = vec!["level", "h"];
    let cols: Vec<String> = table
        .names
        .iter()
        .flat_map(|n| [format!("err_{n}"), format!("rate_{n}")])
        .collect();
    header.extend(cols.iter().map(String::as_str));
    let rows: Vec<_> = table
        .levels
        .iter()
        .zip(&table.h)
        .zip(&table.errors)
        .map(|((&l, &h), e)| (l, h, e.clone()))
        .collect();
    csv::write_level_table(&header, &rows, &table.rates, std::fs::File::create(&path)?)?;
    Ok((table, path))
}
