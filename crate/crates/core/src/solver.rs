//! Global trace systems and the two statically condensed subproblem solvers.
//!
//! Dirichlet traces are eliminated: their coefficients are the face L²
//! projection of the boundary data and their columns move to the right-hand
//! side. Neumann faces keep their trace unknowns and contribute
//! `-⟨g_N, μ⟩` (times `ε` for the potential) to the trace rows, where `g_N`
//! is the prescribed outward value of `q̂·n` or `p̂·n`.

use std::sync::Arc;

use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::mesh::{BoundaryTag, Mesh};
use crate::operators::{
    condense, local_poisson_blocks, local_transport_blocks, recover_interior, CondensedBlock,
    DriftData, ElementContext, LocalSystem, Spaces,
};
use crate::projections::{project_on_face, CoefficientField, TraceField};
use crate::{Error, Point, Result};

/// A time-dependent scalar function of space.
pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// A scalar function of space, borrowed for one solve.
pub type ScalarFn<'a> = &'a (dyn Fn(Point) -> f64 + Sync);

/// Boundary data of both subproblems as functions of `(x, t)`.
#[derive(Clone)]
pub struct BoundaryData {
    pub g_u: SpaceTimeFn,
    pub g_phi: SpaceTimeFn,
    /// Outward `q̂·n` on Neumann faces; zero when absent.
    pub neumann_u: Option<SpaceTimeFn>,
    /// Outward `p̂·n` on Neumann faces; zero when absent.
    pub neumann_phi: Option<SpaceTimeFn>,
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryData")
            .field("neumann_u", &self.neumann_u.is_some())
            .field("neumann_phi", &self.neumann_phi.is_some())
            .finish_non_exhaustive()
    }
}

/// Boundary data frozen at one time level.
#[derive(Clone, Copy)]
pub struct Boundary<'a> {
    pub dirichlet: ScalarFn<'a>,
    pub neumann: Option<ScalarFn<'a>>,
}

/// Numbering of the unknown (non-Dirichlet) trace coefficients.
#[derive(Debug, Clone)]
pub struct DofMap {
    trace_dim: usize,
    offsets: Vec<Option<usize>>,
    n_active: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, trace_dim: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(mesh.num_faces());
        let mut next = 0;
        for (id, face) in mesh.faces.iter().enumerate() {
            match (face.is_boundary(), face.tag) {
                (true, BoundaryTag::Interior) => return Err(Error::MissingBoundaryTag(id)),
                (true, BoundaryTag::Dirichlet) => offsets.push(None),
                _ => {
                    offsets.push(Some(next));
                    next += trace_dim;
                }
            }
        }
        Ok(Self {
            trace_dim,
            offsets,
            n_active: next,
        })
    }

    pub fn trace_dim(&self) -> usize {
        self.trace_dim
    }

    pub fn n_active(&self) -> usize {
        self.n_active
    }

    /// First global dof of `face`, or `None` for a Dirichlet face.
    pub fn offset(&self, face: usize) -> Option<usize> {
        self.offsets[face]
    }

    /// Global dof of every local trace coefficient of `element`.
    pub fn local_to_global(&self, mesh: &Mesh, element: usize) -> Vec<Option<usize>> {
        let nt = self.trace_dim;
        let mut out = Vec::with_capacity(3 * nt);
        for &f in &mesh.element_faces[element] {
            for m in 0..nt {
                out.push(self.offsets[f].map(|o| o + m));
            }
        }
        out
    }
}

/// Assembled and factorized condensed trace matrix.
pub struct TraceSystem {
    dofs: DofMap,
    matrix: SparseColMat<usize, f64>,
    lu: Option<Lu<usize, f64>>,
    symbolic: Option<SymbolicLu<usize>>,
}

impl std::fmt::Debug for TraceSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceSystem")
            .field("dofs", &self.dofs.n_active)
            .finish_non_exhaustive()
    }
}

fn trace_error(dofs: usize, reason: impl std::fmt::Debug) -> Error {
    Error::SingularTrace {
        dofs,
        reason: format!("{reason:?}"),
    }
}

impl TraceSystem {
    /// Sums the element Schur complements into the global matrix. A symbolic
    /// factorization from an earlier system with the same pattern is reused.
    pub fn assemble(
        mesh: &Mesh,
        dofs: DofMap,
        blocks: &[CondensedBlock],
        symbolic: Option<SymbolicLu<usize>>,
    ) -> Result<Self> {
        let n = dofs.n_active;
        let mut triplets = Vec::new();
        for b in blocks {
            let map = dofs.local_to_global(mesh, b.element);
            for (i, gi) in map.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                for (j, gj) in map.iter().enumerate() {
                    if let Some(gj) = *gj {
                        triplets.push(Triplet::new(gi, gj, b.schur[(i, j)]));
                    }
                }
            }
        }
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| trace_error(n, e))?;
        if n == 0 {
            return Ok(Self {
                dofs,
                matrix,
                lu: None,
                symbolic: None,
            });
        }
        let symbolic = match symbolic {
            Some(s) => s,
            None => SymbolicLu::try_new(matrix.symbolic()).map_err(|e| trace_error(n, e))?,
        };
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), matrix.as_ref())
            .map_err(|e| trace_error(n, e))?;
        Ok(Self {
            dofs,
            matrix,
            lu: Some(lu),
            symbolic: Some(symbolic),
        })
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn matrix(&self) -> &SparseColMat<usize, f64> {
        &self.matrix
    }

    pub fn symbolic(&self) -> Option<&SymbolicLu<usize>> {
        self.symbolic.as_ref()
    }

    /// Condensed right-hand side with Dirichlet columns moved over.
    pub fn rhs(&self, mesh: &Mesh, blocks: &[CondensedBlock], dirichlet: &TraceField) -> Vec<f64> {
        let mut rhs = vec![0.0; self.dofs.n_active];
        let nt = self.dofs.trace_dim;
        for b in blocks {
            let map = self.dofs.local_to_global(mesh, b.element);
            let known = local_trace(mesh, b.element, dirichlet, nt);
            for (i, gi) in map.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                let mut v = b.reduced_load[i];
                for (j, gj) in map.iter().enumerate() {
                    if gj.is_none() {
                        v -= b.schur[(i, j)] * known[j];
                    }
                }
                rhs[gi] += v;
            }
        }
        rhs
    }

    /// Solves and applies one step of iterative refinement when the relative
    /// residual exceeds `1e-12`.
    pub fn solve(
        &self,
        mesh: &Mesh,
        blocks: &[CondensedBlock],
        dirichlet: &TraceField,
    ) -> Result<TraceField> {
        let n = self.dofs.n_active;
        let rhs = self.rhs(mesh, blocks, dirichlet);
        let mut x = vec![0.0; n];
        if let Some(lu) = &self.lu {
            x = self.apply_inverse(lu, &rhs);
            let norm = rhs
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            let mut r = self.residual(mesh, blocks, &x, &rhs);
            let mut rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm;
            if rel > 1e-12 {
                let dx = self.apply_inverse(lu, &r);
                x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
                r = self.residual(mesh, blocks, &x, &rhs);
                rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm;
                log::debug!("trace solve refined, relative residual {rel:e}");
            }
            if !rel.is_finite() || rel > 1e-6 {
                return Err(Error::SingularTrace {
                    dofs: n,
                    reason: format!("relative residual {rel:e}"),
                });
            }
        }
        let mut out = dirichlet.clone();
        for f in 0..mesh.num_faces() {
            if let Some(o) = self.dofs.offset(f) {
                out.face_mut(f)
                    .copy_from_slice(&x[o..o + self.dofs.trace_dim]);
            }
        }
        Ok(out)
    }

    fn apply_inverse(&self, lu: &Lu<usize, f64>, b: &[f64]) -> Vec<f64> {
        use faer::linalg::solvers::SolveCore;
        let mut m = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        lu.solve_in_place_with_conj(faer::Conj::No, m.as_mut());
        (0..b.len()).map(|i| m[(i, 0)]).collect()
    }

    /// `rhs - S x`, evaluated element by element from the Schur blocks.
    fn residual(&self, mesh: &Mesh, blocks: &[CondensedBlock], x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut r = rhs.to_vec();
        for b in blocks {
            let map = self.dofs.local_to_global(mesh, b.element);
            for (i, gi) in map.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                for (j, gj) in map.iter().enumerate() {
                    if let Some(gj) = *gj {
                        r[gi] -= b.schur[(i, j)] * x[gj];
                    }
                }
            }
        }
        r
    }
}

/// Trace coefficients of the three faces of `element`, concatenated.
pub fn local_trace(mesh: &Mesh, element: usize, trace: &TraceField, nt: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * nt);
    for &f in &mesh.element_faces[element] {
        out.extend_from_slice(&trace.face(f)[..nt]);
    }
    out
}

/// Face L² projection of Dirichlet data onto `P^degree` on Dirichlet faces;
/// all other faces are zero.
pub fn dirichlet_trace(mesh: &Mesh, degree: usize, g: ScalarFn<'_>) -> TraceField {
    let mut t = TraceField::zeros(mesh.num_faces(), degree);
    for (f, face) in mesh.faces.iter().enumerate() {
        if face.is_boundary() && face.tag == BoundaryTag::Dirichlet {
            t.face_mut(f)
                .copy_from_slice(&project_on_face(mesh, f, degree, g));
        }
    }
    t
}

/// Adds `-scale·⟨g_N, ψ_m⟩` to the trace rows of Neumann faces.
fn add_neumann_load(
    mesh: &Mesh,
    element: usize,
    nt: usize,
    scale: f64,
    g: ScalarFn<'_>,
    trace_load: &mut [f64],
) {
    for (j, &f) in mesh.element_faces[element].iter().enumerate() {
        let face = &mesh.faces[f];
        if face.is_boundary() && face.tag == BoundaryTag::Neumann {
            let c = project_on_face(mesh, f, nt - 1, g);
            let len = mesh.face_length(f);
            for m in 0..nt {
                trace_load[j * nt + m] -= scale * len * c[m];
            }
        }
    }
}

/// `(f, φ_i)_K` for the degree-`k+1` basis, plus `area · extra_i`.
fn volume_load(
    spaces: &Spaces,
    mesh: &Mesh,
    element: usize,
    f: Option<ScalarFn<'_>>,
    extra: Option<(&[f64], f64)>,
) -> Vec<f64> {
    let t = &spaces.tables;
    let n = spaces.n_scalar();
    let g = mesh.geometry(element);
    let mut load = vec![0.0; n];
    if let Some(f) = f {
        for (q, (&xi, &w)) in t
            .volume_rule
            .points
            .iter()
            .zip(&t.volume_rule.weights)
            .enumerate()
        {
            let val = w * g.abs_det() * f(g.map(xi));
            for (l, v) in load.iter_mut().zip(&t.volume.values_at(q)[..n]) {
                *l += val * v;
            }
        }
    }
    if let Some((c, a)) = extra {
        for (l, v) in load.iter_mut().zip(c) {
            *l += a * g.area * v;
        }
    }
    load
}

/// Discrete potential and field.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    /// `[P^{k+1}]²`
    pub p: CoefficientField,
    /// `P^{k+1}`
    pub phi: CoefficientField,
    /// `P^{k+1}(e)`
    pub phi_hat: TraceField,
}

/// Discrete density and flux.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// `[P^k]²`
    pub q: CoefficientField,
    /// `P^{k+1}`
    pub u: CoefficientField,
    /// `P^k(e)`
    pub u_hat: TraceField,
}

/// Data of one potential solve: `-εΔφ + u = f2`.
#[derive(Clone, Copy)]
pub struct PoissonRhs<'a> {
    pub f2: ScalarFn<'a>,
    /// Density coupling; `None` means `u ≡ 0`.
    pub u: Option<&'a CoefficientField>,
    pub boundary: Boundary<'a>,
}

/// Data of one transport solve: `αu - Δu - ∇·(u p) = f1 + history`.
#[derive(Clone, Copy)]
pub struct TransportRhs<'a> {
    pub alpha: f64,
    pub f1: ScalarFn<'a>,
    /// Coefficients in `P^{k+1}` added to the load as `(history, w)`.
    pub history: Option<&'a CoefficientField>,
    pub boundary: Boundary<'a>,
}

fn unpack(
    spaces: &Spaces,
    mesh: &Mesh,
    interiors: Vec<Vec<f64>>,
    n_vec: usize,
    vec_degree: usize,
) -> Result<(CoefficientField, CoefficientField)> {
    let ne = mesh.num_elements();
    let n = spaces.n_scalar();
    let mut v = CoefficientField::zeros(ne, vec_degree, 2);
    let mut s = CoefficientField::zeros(ne, spaces.k() + 1, 1);
    for (e, x) in interiors.into_iter().enumerate() {
        v.element_mut(e).copy_from_slice(&x[..2 * n_vec]);
        s.element_mut(e)
            .copy_from_slice(&x[2 * n_vec..2 * n_vec + n]);
    }
    Ok((v, s))
}

fn recover_all(
    mesh: &Mesh,
    blocks: &[CondensedBlock],
    trace: &TraceField,
    nt: usize,
) -> Result<Vec<Vec<f64>>> {
    blocks
        .par_iter()
        .map(|b| recover_interior(b, &local_trace(mesh, b.element, trace, nt)))
        .collect()
}

/// Potential solver. The condensed operator does not depend on the density,
/// so element blocks and the global factorization are computed once.
pub struct PoissonSolver {
    mesh: Arc<Mesh>,
    spaces: Arc<Spaces>,
    eps: f64,
    tau: f64,
    blocks: Vec<CondensedBlock>,
    system: TraceSystem,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("eps", &self.eps)
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}

impl PoissonSolver {
    pub fn new(mesh: Arc<Mesh>, spaces: Arc<Spaces>, eps: f64, tau: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        let n = spaces.n_scalar();
        let zero = vec![0.0; n];
        let blocks = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                condense(&local_poisson_blocks(
                    &spaces,
                    ElementContext::of(&mesh, e),
                    [tau; 3],
                    eps,
                    &zero,
                )?)
            })
            .collect::<Result<Vec<_>>>()?;
        let dofs = DofMap::new(&mesh, spaces.poisson_trace_dim())?;
        let system = TraceSystem::assemble(&mesh, dofs, &blocks, None)?;
        Ok(Self {
            mesh,
            spaces,
            eps,
            tau,
            blocks,
            system,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn system(&self) -> &TraceSystem {
        &self.system
    }

    fn loads(&self, e: usize, rhs: &PoissonRhs<'_>) -> (Vec<f64>, Vec<f64>) {
        let n = self.spaces.n_scalar();
        let nt = self.spaces.poisson_trace_dim();
        let w = volume_load(
            &self.spaces,
            &self.mesh,
            e,
            Some(rhs.f2),
            rhs.u.map(|u| (u.element(e), -1.0)),
        );
        let mut b_i = vec![0.0; 2 * n];
        b_i.extend(w);
        let mut b_l = vec![0.0; 3 * nt];
        if let Some(g) = rhs.boundary.neumann {
            add_neumann_load(&self.mesh, e, nt, self.eps, g, &mut b_l);
        }
        (b_i, b_l)
    }

    /// Uncondensed local system of `element` including its load.
    pub fn local_system(&self, element: usize, rhs: &PoissonRhs<'_>) -> Result<LocalSystem> {
        let n = self.spaces.n_scalar();
        let mut ls = local_poisson_blocks(
            &self.spaces,
            ElementContext::of(&self.mesh, element),
            [self.tau; 3],
            self.eps,
            &vec![0.0; n],
        )?;
        let (b_i, b_l) = self.loads(element, rhs);
        ls.load = b_i.into_iter().chain(b_l).collect();
        Ok(ls)
    }

    pub fn solve(&mut self, rhs: &PoissonRhs<'_>) -> Result<PoissonSolution> {
        let loads: Vec<_> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| self.loads(e, rhs))
            .collect();
        for (b, (b_i, b_l)) in self.blocks.iter_mut().zip(loads) {
            b.set_load(&b_i, &b_l);
        }
        let deg = self.spaces.k() + 1;
        let dirichlet = dirichlet_trace(&self.mesh, deg, rhs.boundary.dirichlet);
        let phi_hat = self.system.solve(&self.mesh, &self.blocks, &dirichlet)?;
        let interiors = recover_all(&self.mesh, &self.blocks, &phi_hat, deg + 1)?;
        let (p, phi) = unpack(
            &self.spaces,
            &self.mesh,
            interiors,
            self.spaces.n_scalar(),
            deg,
        )?;
        Ok(PoissonSolution { p, phi, phi_hat })
    }

    /// Drift data of every element for the transport step.
    pub fn drift(&self, sol: &PoissonSolution) -> Vec<DriftData> {
        (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                DriftData::from_poisson(
                    &self.spaces,
                    &self.mesh,
                    e,
                    &sol.p,
                    &sol.phi,
                    &sol.phi_hat,
                    self.tau,
                )
            })
            .collect()
    }
}

/// Density solver. Blocks depend on the drift and are rebuilt every solve;
/// the symbolic factorization of the global matrix is kept.
pub struct TransportSolver {
    mesh: Arc<Mesh>,
    spaces: Arc<Spaces>,
    dofs: DofMap,
    symbolic: Option<SymbolicLu<usize>>,
}

impl std::fmt::Debug for TransportSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportSolver")
            .field("dofs", &self.dofs.n_active)
            .finish_non_exhaustive()
    }
}

impl TransportSolver {
    pub fn new(mesh: Arc<Mesh>, spaces: Arc<Spaces>) -> Result<Self> {
        let dofs = DofMap::new(&mesh, spaces.transport_trace_dim())?;
        Ok(Self {
            mesh,
            spaces,
            dofs,
            symbolic: None,
        })
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    /// Uncondensed local system of `element` including its load.
    pub fn local_system(
        &self,
        element: usize,
        drift: &DriftData,
        rhs: &TransportRhs<'_>,
    ) -> Result<LocalSystem> {
        let nt = self.spaces.transport_trace_dim();
        let w = volume_load(
            &self.spaces,
            &self.mesh,
            element,
            Some(rhs.f1),
            rhs.history.map(|h| (h.element(element), 1.0)),
        );
        let mut ls = local_transport_blocks(
            &self.spaces,
            ElementContext::of(&self.mesh, element),
            drift,
            rhs.alpha,
            &w,
        )?;
        if let Some(g) = rhs.boundary.neumann {
            let ni = ls.n_interior;
            add_neumann_load(&self.mesh, element, nt, 1.0, g, &mut ls.load[ni..]);
        }
        Ok(ls)
    }

    /// One linear solve with the drift frozen. `drift` has one entry per element.
    pub fn solve(
        &mut self,
        drift: &[DriftData],
        rhs: &TransportRhs<'_>,
    ) -> Result<TransportSolution> {
        if drift.len() != self.mesh.num_elements() {
            return Err(Error::Dimension(format!(
                "{} drift entries for {} elements",
                drift.len(),
                self.mesh.num_elements()
            )));
        }
        let blocks = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| condense(&self.local_system(e, &drift[e], rhs)?))
            .collect::<Result<Vec<_>>>()?;
        let system =
            TraceSystem::assemble(&self.mesh, self.dofs.clone(), &blocks, self.symbolic.take())?;
        self.symbolic = system.symbolic().cloned();
        let k = self.spaces.k();
        let dirichlet = dirichlet_trace(&self.mesh, k, rhs.boundary.dirichlet);
        let u_hat = system.solve(&self.mesh, &blocks, &dirichlet)?;
        let interiors = recover_all(&self.mesh, &blocks, &u_hat, k + 1)?;
        let (q, u) = unpack(&self.spaces, &self.mesh, interiors, self.spaces.n_flux(), k)?;
        Ok(TransportSolution { q, u, u_hat })
    }
}

/// One-shot potential solve.
pub fn solve_poisson(
    mesh: Arc<Mesh>,
    spaces: Arc<Spaces>,
    eps: f64,
    tau: f64,
    rhs: &PoissonRhs<'_>,
) -> Result<PoissonSolution> {
    PoissonSolver::new(mesh, spaces, eps, tau)?.solve(rhs)
}

/// One-shot transport solve with zero drift.
pub fn solve_transport_step(
    mesh: Arc<Mesh>,
    spaces: Arc<Spaces>,
    rhs: &TransportRhs<'_>,
) -> Result<TransportSolution> {
    let drift = vec![DriftData::zero(&spaces); mesh.num_elements()];
    TransportSolver::new(mesh, spaces)?.solve(&drift, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_unit_square;

    #[test]
    fn dofmap_skips_dirichlet_faces() {
        let m = build_structured_unit_square(2).unwrap();
        let d = DofMap::new(&m, 2).unwrap();
        let interior = m.faces.iter().filter(|f| !f.is_boundary()).count();
        assert_eq!(d.n_active(), 2 * interior);
    }

    #[test]
    fn linear_potential_is_reproduced() {
        let mesh = Arc::new(build_structured_unit_square(2).unwrap());
        let spaces = Arc::new(Spaces::new(0).unwrap());
        let zero = |_: Point| 0.0;
        let g = |x: Point| x[0] + x[1];
        let rhs = PoissonRhs {
            f2: &zero,
            u: None,
            boundary: Boundary {
                dirichlet: &g,
                neumann: None,
            },
        };
        let sol = solve_poisson(mesh.clone(), spaces, 1.0, 1.0, &rhs).unwrap();
        for e in 0..mesh.num_elements() {
            let c = mesh.geometry(e).map([1.0 / 3.0, 1.0 / 3.0]);
            let v = sol.phi.eval(&mesh, e, c)[0];
            assert!((v - g(c)).abs() < 1e-12, "{v} vs {}", g(c));
            let p = sol.p.eval(&mesh, e, c);
            assert!((p[0] + 1.0).abs() < 1e-11 && (p[1] + 1.0).abs() < 1e-11);
        }
    }
}
