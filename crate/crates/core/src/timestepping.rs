//! BDF time integration of the coupled system with a Gummel fixed point per
//! step: solve the potential with the current density guess, freeze the
//! drift, solve the transport step, repeat until the density settles.

use std::sync::Arc;

use crate::mesh::Mesh;
use crate::operators::Spaces;
use crate::projections::{l2_project_scalar, CoefficientField};
use crate::solver::{
    Boundary, BoundaryData, PoissonRhs, PoissonSolution, PoissonSolver, SpaceTimeFn, TransportRhs,
    TransportSolution, TransportSolver,
};
use crate::{Error, Point, Result};

/// Uniform time grid on `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Uses the smallest step count with `dt ≤ dt_max`, so `steps·dt = t_final`.
    pub fn new(t_final: f64, dt_max: f64) -> Result<Self> {
        if !(t_final > 0.0) || !(dt_max > 0.0) {
            return Err(Error::Config(format!(
                "need positive t_final and dt, got {t_final} and {dt_max}"
            )));
        }
        let steps = ((t_final / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = t_final / steps as f64;
        if (dt - dt_max).abs() > 1e-12 * dt_max {
            log::info!("dt {dt_max} adjusted to {dt} ({steps} steps to t = {t_final})");
        }
        Ok(Self { t_final, dt, steps })
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_final
        } else {
            step as f64 * self.dt
        }
    }

    /// Step index of `t`, if it lies on the grid.
    pub fn step_of(&self, t: f64) -> Option<usize> {
        let s = (t / self.dt).round();
        (s >= 0.0
            && s as usize <= self.steps
            && (s * self.dt - t).abs() <= 1e-9 * self.t_final.max(1.0))
        .then_some(s as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdfScheme {
    Bdf1,
    Bdf2,
}

/// Density history of the integrator.
#[derive(Debug, Clone)]
pub struct BdfState {
    pub t: f64,
    pub step: usize,
    pub u: CoefficientField,
    pub u_prev: Option<CoefficientField>,
}

impl BdfState {
    /// `u_h(0)`: element L² projection of `u0` into `P^{k+1}`.
    pub fn initialize(mesh: &Mesh, k: usize, u0: impl Fn(Point) -> f64 + Sync) -> Self {
        Self {
            t: 0.0,
            step: 0,
            u: l2_project_scalar(mesh, k + 1, u0),
            u_prev: None,
        }
    }

    pub fn scheme(&self) -> BdfScheme {
        if self.u_prev.is_some() {
            BdfScheme::Bdf2
        } else {
            BdfScheme::Bdf1
        }
    }

    /// Mass scale `α` and history `h` so that `u_t ≈ α u^{n+1} - h`.
    pub fn weights(&self, dt: f64) -> (f64, CoefficientField) {
        let mut h = self.u.clone();
        match &self.u_prev {
            None => {
                h.scale(1.0 / dt);
                (1.0 / dt, h)
            }
            Some(prev) => {
                h.scale(2.0 / dt);
                h.axpy(-0.5 / dt, prev);
                (1.5 / dt, h)
            }
        }
    }

    /// Initial Gummel guess: `2u^n - u^{n-1}`, or `u^n` on the first step.
    pub fn extrapolate(&self) -> CoefficientField {
        let mut g = self.u.clone();
        if let Some(prev) = &self.u_prev {
            g.scale(2.0);
            g.axpy(-1.0, prev);
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_iter: 50,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(format!("invalid coupling settings {self:?}")));
        }
        Ok(())
    }
}

/// Sources, initial density and boundary data of a coupled problem.
#[derive(Clone)]
pub struct ProblemData {
    pub eps: f64,
    pub f1: SpaceTimeFn,
    pub f2: SpaceTimeFn,
    pub u0: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub boundary: BoundaryData,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData")
            .field("eps", &self.eps)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

/// Outcome of one time step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub t: f64,
    pub scheme: BdfScheme,
    pub gummel_iterations: usize,
    /// `‖u*_{m+1} - u*_m‖` for every Gummel iteration.
    pub increments: Vec<f64>,
}

pub struct Integrator {
    mesh: Arc<Mesh>,
    spaces: Arc<Spaces>,
    problem: ProblemData,
    grid: TimeGrid,
    coupling: CouplingConfig,
    poisson: PoissonSolver,
    transport: TransportSolver,
    state: BdfState,
    transport_solution: Option<TransportSolution>,
    poisson_solution: Option<PoissonSolution>,
}

impl std::fmt::Debug for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrator")
            .field("grid", &self.grid)
            .field("t", &self.state.t)
            .finish_non_exhaustive()
    }
}

impl Integrator {
    pub fn new(
        mesh: Arc<Mesh>,
        k: usize,
        tau: f64,
        problem: ProblemData,
        grid: TimeGrid,
        coupling: CouplingConfig,
    ) -> Result<Self> {
        coupling.validate()?;
        let spaces = Arc::new(Spaces::new(k)?);
        let poisson = PoissonSolver::new(mesh.clone(), spaces.clone(), problem.eps, tau)?;
        let transport = TransportSolver::new(mesh.clone(), spaces.clone())?;
        let state = BdfState::initialize(&mesh, k, &*problem.u0);
        Ok(Self {
            mesh,
            spaces,
            problem,
            grid,
            coupling,
            poisson,
            transport,
            state,
            transport_solution: None,
            poisson_solution: None,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn spaces(&self) -> &Arc<Spaces> {
        &self.spaces
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn state(&self) -> &BdfState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.grid.steps
    }

    /// Density, flux and trace of the last completed step.
    pub fn transport(&self) -> Option<&TransportSolution> {
        self.transport_solution.as_ref()
    }

    /// Potential and field of the last completed step, consistent with the
    /// returned density.
    pub fn potential(&self) -> Option<&PoissonSolution> {
        self.poisson_solution.as_ref()
    }

    fn solve_potential(&mut self, u: &CoefficientField, t: f64) -> Result<PoissonSolution> {
        let f2 = self.problem.f2.clone();
        let g = self.problem.boundary.g_phi.clone();
        let f2t = move |x: Point| f2(x, t);
        let gt = move |x: Point| g(x, t);
        let nt = self
            .problem
            .boundary
            .neumann_phi
            .clone()
            .map(|n| move |x: Point| n(x, t));
        let rhs = PoissonRhs {
            f2: &f2t,
            u: Some(u),
            boundary: Boundary {
                dirichlet: &gt,
                neumann: nt.as_ref().map(|f| f as _),
            },
        };
        self.poisson.solve(&rhs)
    }

    /// Potential for the current density at the current time.
    pub fn potential_now(&mut self) -> Result<PoissonSolution> {
        let u = self.state.u.clone();
        self.solve_potential(&u, self.state.t)
    }

    pub fn step(&mut self) -> Result<StepReport> {
        if self.is_finished() {
            return Err(Error::Config("integrator already reached t_final".into()));
        }
        let dt = self.grid.dt;
        let t = self.grid.time(self.state.step + 1);
        let scheme = self.state.scheme();
        let (alpha, history) = self.state.weights(dt);
        let mut guess = self.state.extrapolate();

        let f1 = self.problem.f1.clone();
        let g = self.problem.boundary.g_u.clone();
        let f1t = move |x: Point| f1(x, t);
        let gt = move |x: Point| g(x, t);
        let nt = self
            .problem
            .boundary
            .neumann_u
            .clone()
            .map(|n| move |x: Point| n(x, t));
        let mut increments = Vec::new();
        let mut solution = None;
        for _ in 0..self.coupling.max_iter {
            let pot = self.solve_potential(&guess, t)?;
            let drift = self.poisson.drift(&pot);
            let rhs = TransportRhs {
                alpha,
                f1: &f1t,
                history: Some(&history),
                boundary: Boundary {
                    dirichlet: &gt,
                    neumann: nt.as_ref().map(|f| f as _),
                },
            };
            let sol = self.transport.solve(&drift, &rhs)?;
            let inc = sol.u.l2_distance(&guess, &self.mesh);
            let norm = sol.u.l2_norm(&self.mesh);
            increments.push(inc);
            guess = sol.u.clone();
            solution = Some(sol);
            if inc <= self.coupling.rtol * norm + self.coupling.atol {
                break;
            }
        }
        let last = *increments.last().unwrap_or(&f64::INFINITY);
        let sol = solution.expect("max_iter >= 1");
        if !(last <= self.coupling.rtol * sol.u.l2_norm(&self.mesh) + self.coupling.atol) {
            return Err(Error::CouplingDiverged {
                iterations: increments.len(),
                increment: last,
            });
        }
        log::debug!(
            "t = {t:.6}: {} Gummel iterations, last increment {last:e}",
            increments.len()
        );
        self.poisson_solution = Some(self.solve_potential(&sol.u, t)?);
        let prev = std::mem::replace(&mut self.state.u, sol.u.clone());
        self.state.u_prev = Some(prev);
        self.state.step += 1;
        self.state.t = t;
        self.transport_solution = Some(sol);
        Ok(StepReport {
            t,
            scheme,
            gummel_iterations: increments.len(),
            increments,
        })
    }

    /// Runs to `t_final`, calling `observe` after every step.
    pub fn run(
        &mut self,
        mut observe: impl FnMut(&Integrator, &StepReport) -> Result<()>,
    ) -> Result<Vec<StepReport>> {
        let mut reports = Vec::with_capacity(self.grid.steps);
        while !self.is_finished() {
            let r = self.step()?;
            observe(self, &r)?;
            reports.push(r);
        }
        Ok(reports)
    }
}
