//! Element-local HDG operators and static condensation.
//!
//! Transport (density `u`, flux `q = -∇u`): `q ∈ [P^k]²`, `u ∈ P^{k+1}`,
//! `û ∈ P^k(e)`, with numerical flux `q̂·n = q·n + h_K^{-1}(Π_k u - û)` and the
//! drift term `(p u, ∇w) - ⟨p̂·n û, w⟩`.
//!
//! Poisson (potential `φ`, field `p = -∇φ`): `p ∈ [P^{k+1}]²`, `φ ∈ P^{k+1}`,
//! `φ̂ ∈ P^{k+1}(e)`, with `p̂·n = p·n + τ(φ - φ̂)`. The whole Poisson block is
//! scaled by `ε`, so the potential equation reads `ε∇·p + u = f2`.
//!
//! Local unknowns are ordered `(vector x, vector y, scalar, trace face 0,
//! trace face 1, trace face 2)`. Rows follow the same order with the test
//! functions `(r, w, μ)`. Trace modes use the global face parameter.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::{Mat, MatRef};

use crate::fem::{triangle_dim, ReferenceTables};
use crate::mesh::{ElementGeometry, Mesh};
use crate::projections::{reciprocal_pivot_ratio, CoefficientField, TraceField};
use crate::{Error, Result};

/// Discrete spaces and cached reference tables for a given `k`.
#[derive(Debug, Clone)]
pub struct Spaces {
    k: usize,
    pub tables: ReferenceTables,
}

impl Spaces {
    /// Tables carry the degree `k+1` element basis, the degree `k+1` trace
    /// basis (transport uses its first `k+1` modes) and rules of exactness
    /// `3k+4`, enough for the trilinear drift term.
    pub fn new(k: usize) -> Result<Self> {
        let exact = 3 * k + 4;
        Ok(Self {
            k,
            tables: ReferenceTables::new(k + 1, k + 1, exact, exact)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `dim P^k`, per component of `q`.
    pub fn n_flux(&self) -> usize {
        triangle_dim(self.k)
    }

    /// `dim P^{k+1}`: `u`, `φ` and each component of `p`.
    pub fn n_scalar(&self) -> usize {
        triangle_dim(self.k + 1)
    }

    pub fn transport_trace_dim(&self) -> usize {
        self.k + 1
    }

    pub fn poisson_trace_dim(&self) -> usize {
        self.k + 2
    }

    pub fn transport_interior_dim(&self) -> usize {
        2 * self.n_flux() + self.n_scalar()
    }

    pub fn poisson_interior_dim(&self) -> usize {
        3 * self.n_scalar()
    }
}

/// Dense local system split into interior (I) and trace (Λ) unknowns.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub element: usize,
    pub n_interior: usize,
    pub n_trace: usize,
    /// Full `(I + Λ) × (I + Λ)` matrix.
    pub matrix: Mat<f64>,
    /// Load for interior rows followed by trace rows.
    pub load: Vec<f64>,
}

impl LocalSystem {
    fn new(element: usize, n_interior: usize, n_trace: usize) -> Self {
        let n = n_interior + n_trace;
        Self {
            element,
            n_interior,
            n_trace,
            matrix: Mat::zeros(n, n),
            load: vec![0.0; n],
        }
    }

    pub fn size(&self) -> usize {
        self.n_interior + self.n_trace
    }

    pub fn a_ii(&self) -> MatRef<'_, f64> {
        self.matrix
            .as_ref()
            .submatrix(0, 0, self.n_interior, self.n_interior)
    }

    pub fn a_il(&self) -> MatRef<'_, f64> {
        self.matrix
            .as_ref()
            .submatrix(0, self.n_interior, self.n_interior, self.n_trace)
    }

    pub fn a_li(&self) -> MatRef<'_, f64> {
        self.matrix
            .as_ref()
            .submatrix(self.n_interior, 0, self.n_trace, self.n_interior)
    }

    pub fn a_ll(&self) -> MatRef<'_, f64> {
        self.matrix
            .as_ref()
            .submatrix(self.n_interior, self.n_interior, self.n_trace, self.n_trace)
    }

    pub fn b_i(&self) -> &[f64] {
        &self.load[..self.n_interior]
    }

    pub fn b_l(&self) -> &[f64] {
        &self.load[self.n_interior..]
    }
}

/// Per-element inputs shared by both local builders.
#[derive(Debug, Clone, Copy)]
pub struct ElementContext<'a> {
    pub element: usize,
    pub geometry: &'a ElementGeometry,
    pub aligned: [bool; 3],
}

impl<'a> ElementContext<'a> {
    pub fn of(mesh: &'a Mesh, element: usize) -> Self {
        Self {
            element,
            geometry: mesh.geometry(element),
            aligned: mesh.face_aligned[element],
        }
    }
}

/// Drift data entering the transport block on one element: `p` at the volume
/// quadrature points and `p̂·n` (outward for this element) at the face
/// quadrature points of each local face.
#[derive(Debug, Clone, Default)]
pub struct DriftData {
    pub p: Vec<[f64; 2]>,
    pub p_hat_normal: [Vec<f64>; 3],
}

impl DriftData {
    pub fn zero(spaces: &Spaces) -> Self {
        let nf = spaces.tables.face_rule.len();
        Self {
            p: vec![[0.0; 2]; spaces.tables.volume_rule.len()],
            p_hat_normal: [vec![0.0; nf], vec![0.0; nf], vec![0.0; nf]],
        }
    }

    /// Samples `p_field` and the Poisson numerical flux on one element.
    pub fn from_poisson(
        spaces: &Spaces,
        mesh: &Mesh,
        element: usize,
        p_field: &CoefficientField,
        phi_field: &CoefficientField,
        phi_hat: &TraceField,
        tau: f64,
    ) -> Self {
        let t = &spaces.tables;
        let n = spaces.n_scalar();
        let mut val = [0.0; 2];
        let p = (0..t.volume_rule.len())
            .map(|q| {
                p_field.eval_with(element, &t.volume.values_at(q)[..n], &mut val);
                val
            })
            .collect();
        let p_hat_normal = [0, 1, 2].map(|j| {
            evaluate_p_hat_normal(spaces, mesh, element, j, p_field, phi_field, phi_hat, tau)
        });
        Self { p, p_hat_normal }
    }

    /// Drift data scaled by `a`; used for linearity checks.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            p: self.p.iter().map(|v| [a * v[0], a * v[1]]).collect(),
            p_hat_normal: self
                .p_hat_normal
                .clone()
                .map(|v| v.into_iter().map(|x| a * x).collect()),
        }
    }
}

/// `p̂·n = p·n + τ(φ - φ̂)` at the face quadrature points of local face
/// `local_face`, with `n` the outward normal of `element`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_p_hat_normal(
    spaces: &Spaces,
    mesh: &Mesh,
    element: usize,
    local_face: usize,
    p_field: &CoefficientField,
    phi_field: &CoefficientField,
    phi_hat: &TraceField,
    tau: f64,
) -> Vec<f64> {
    let t = &spaces.tables;
    let g = mesh.geometry(element);
    let nrm = g.normals[local_face];
    let face = mesh.element_faces[element][local_face];
    let ftab = t.face(local_face, mesh.face_aligned[element][local_face]);
    let n = spaces.n_scalar();
    let nt = phi_hat.degree() + 1;
    let hat = phi_hat.face(face);
    let (mut pv, mut fv) = ([0.0; 2], [0.0; 1]);
    (0..t.face_rule.len())
        .map(|q| {
            let v = &ftab.values_at(q)[..n];
            p_field.eval_with(element, v, &mut pv);
            phi_field.eval_with(element, v, &mut fv);
            let psi = &t.trace.values_at(q)[..nt];
            let h: f64 = hat.iter().zip(psi).map(|(a, b)| a * b).sum();
            pv[0] * nrm[0] + pv[1] * nrm[1] + tau * (fv[0] - h)
        })
        .collect()
}

/// Transport block on one element.
///
/// Rows realize, for all test functions `(r, w, μ)`:
/// `(q,r) - (u,∇·r) + ⟨û, r·n⟩`,
/// `α(u,w) + (∇·q,w) + ⟨h⁻¹(Π u - û), Π w⟩ + (p u, ∇w) - ⟨p̂·n û, w⟩`,
/// `-⟨q·n + h⁻¹(Π u - û), μ⟩`.
/// `w_load` is the interior load on the `w` rows. The trace load is zero.
pub fn local_transport_blocks(
    spaces: &Spaces,
    ctx: ElementContext<'_>,
    drift: &DriftData,
    alpha: f64,
    w_load: &[f64],
) -> Result<LocalSystem> {
    let g = ctx.geometry;
    if !(g.abs_det() > 0.0) {
        return Err(Error::DegenerateElement {
            element: ctx.element,
            det: g.det,
        });
    }
    let t = &spaces.tables;
    let nq = spaces.n_flux();
    let nu = spaces.n_scalar();
    let nt = spaces.transport_trace_dim();
    let ni = 2 * nq + nu;
    let (qx, qy, uo) = (0, nq, 2 * nq);
    let mut ls = LocalSystem::new(ctx.element, ni, 3 * nt);
    let a = &mut ls.matrix;

    let mut grads = vec![[0.0; 2]; nu];
    for (q, &w) in t.volume_rule.weights.iter().enumerate() {
        let wq = w * g.abs_det();
        let v = &t.volume.values_at(q)[..nu];
        for (gp, gr) in grads.iter_mut().zip(t.volume.grads_at(q)) {
            *gp = g.physical_gradient(*gr);
        }
        let p = drift.p[q];
        for i in 0..nq {
            for j in 0..nq {
                let m = wq * v[i] * v[j];
                a[(qx + i, qx + j)] += m;
                a[(qy + i, qy + j)] += m;
            }
            for j in 0..nu {
                // -(u, ∇·r)
                a[(qx + i, uo + j)] -= wq * v[j] * grads[i][0];
                a[(qy + i, uo + j)] -= wq * v[j] * grads[i][1];
                // (∇·q, w)
                a[(uo + j, qx + i)] += wq * grads[i][0] * v[j];
                a[(uo + j, qy + i)] += wq * grads[i][1] * v[j];
            }
        }
        for i in 0..nu {
            let pg = p[0] * grads[i][0] + p[1] * grads[i][1];
            for j in 0..nu {
                a[(uo + i, uo + j)] += wq * (alpha * v[i] + pg) * v[j];
            }
        }
    }

    let h_inv = 1.0 / g.diameter;
    for f in 0..3 {
        let len = g.face_lengths[f];
        let nrm = g.normals[f];
        let ftab = t.face(f, ctx.aligned[f]);
        let to = ni + f * nt;
        // P[m][j] = ⟨φ_j, ψ_m⟩_e
        let mut proj = vec![0.0; nt * nu];
        for (q, &w) in t.face_rule.weights.iter().enumerate() {
            let wq = w * len;
            let v = &ftab.values_at(q)[..nu];
            let psi = &t.trace.values_at(q)[..nt];
            let pn = drift.p_hat_normal[f][q];
            for m in 0..nt {
                for i in 0..nu {
                    proj[m * nu + i] += wq * psi[m] * v[i];
                    // -⟨p̂·n û, w⟩
                    a[(uo + i, to + m)] -= wq * pn * psi[m] * v[i];
                }
                for i in 0..nq {
                    // ⟨û, r·n⟩ and -⟨q·n, μ⟩
                    let c = wq * psi[m] * v[i];
                    a[(qx + i, to + m)] += c * nrm[0];
                    a[(qy + i, to + m)] += c * nrm[1];
                    a[(to + m, qx + i)] -= c * nrm[0];
                    a[(to + m, qy + i)] -= c * nrm[1];
                }
            }
        }
        // ⟨Π u, Π w⟩ = Σ_m (P u)_m (P w)_m / |e| for the orthonormal face basis.
        for i in 0..nu {
            for j in 0..nu {
                let s: f64 = (0..nt).map(|m| proj[m * nu + i] * proj[m * nu + j]).sum();
                a[(uo + i, uo + j)] += h_inv * s / len;
            }
        }
        for m in 0..nt {
            for i in 0..nu {
                a[(uo + i, to + m)] -= h_inv * proj[m * nu + i];
                a[(to + m, uo + i)] -= h_inv * proj[m * nu + i];
            }
            a[(to + m, to + m)] += h_inv * len;
        }
    }
    if w_load.len() != nu {
        return Err(Error::Dimension(format!(
            "transport load has {} entries, expected {nu}",
            w_load.len()
        )));
    }
    ls.load[uo..uo + nu].copy_from_slice(w_load);
    Ok(ls)
}

/// Poisson block on one element, scaled by `ε`:
/// `ε[(p,r) - (φ,∇·r) + ⟨φ̂, r·n⟩ + (∇·p,w) - ⟨p·n,μ⟩ + ⟨τ(φ-φ̂), w-μ⟩]`.
/// `tau` is per local face. `w_load` is the interior load on the `w` rows.
pub fn local_poisson_blocks(
    spaces: &Spaces,
    ctx: ElementContext<'_>,
    tau: [f64; 3],
    eps: f64,
    w_load: &[f64],
) -> Result<LocalSystem> {
    let g = ctx.geometry;
    if !(g.abs_det() > 0.0) {
        return Err(Error::DegenerateElement {
            element: ctx.element,
            det: g.det,
        });
    }
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::NonPositiveTau(bad));
    }
    let t = &spaces.tables;
    let n = spaces.n_scalar();
    let nt = spaces.poisson_trace_dim();
    let ni = 3 * n;
    let (px, py, fo) = (0, n, 2 * n);
    let mut ls = LocalSystem::new(ctx.element, ni, 3 * nt);
    let a = &mut ls.matrix;

    let mut grads = vec![[0.0; 2]; n];
    for (q, &w) in t.volume_rule.weights.iter().enumerate() {
        let wq = eps * w * g.abs_det();
        let v = &t.volume.values_at(q)[..n];
        for (gp, gr) in grads.iter_mut().zip(t.volume.grads_at(q)) {
            *gp = g.physical_gradient(*gr);
        }
        for i in 0..n {
            for j in 0..n {
                let m = wq * v[i] * v[j];
                a[(px + i, px + j)] += m;
                a[(py + i, py + j)] += m;
                a[(px + i, fo + j)] -= wq * v[j] * grads[i][0];
                a[(py + i, fo + j)] -= wq * v[j] * grads[i][1];
                a[(fo + j, px + i)] += wq * grads[i][0] * v[j];
                a[(fo + j, py + i)] += wq * grads[i][1] * v[j];
            }
        }
    }
    for f in 0..3 {
        let len = g.face_lengths[f];
        let nrm = g.normals[f];
        let ftab = t.face(f, ctx.aligned[f]);
        let to = ni + f * nt;
        let tf = tau[f];
        for (q, &w) in t.face_rule.weights.iter().enumerate() {
            let wq = eps * w * len;
            let v = &ftab.values_at(q)[..n];
            let psi = &t.trace.values_at(q)[..nt];
            for i in 0..n {
                for j in 0..n {
                    a[(fo + i, fo + j)] += wq * tf * v[i] * v[j];
                }
                for m in 0..nt {
                    let c = wq * psi[m] * v[i];
                    a[(px + i, to + m)] += c * nrm[0];
                    a[(py + i, to + m)] += c * nrm[1];
                    a[(to + m, px + i)] -= c * nrm[0];
                    a[(to + m, py + i)] -= c * nrm[1];
                    a[(fo + i, to + m)] -= tf * c;
                    a[(to + m, fo + i)] -= tf * c;
                }
            }
            for m in 0..nt {
                for l in 0..nt {
                    a[(to + m, to + l)] += wq * tf * psi[m] * psi[l];
                }
            }
        }
    }
    if w_load.len() != n {
        return Err(Error::Dimension(format!(
            "poisson load has {} entries, expected {n}",
            w_load.len()
        )));
    }
    ls.load[fo..fo + n].copy_from_slice(w_load);
    Ok(ls)
}

/// Schur complement of a local system onto its trace unknowns.
#[derive(Debug)]
pub struct CondensedBlock {
    pub element: usize,
    /// `S = A_ΛΛ - A_ΛI A_II⁻¹ A_IΛ`
    pub schur: Mat<f64>,
    /// `g = b_Λ - A_ΛI A_II⁻¹ b_I`
    pub reduced_load: Vec<f64>,
    lu: PartialPivLu<f64>,
    /// `A_II⁻¹ A_IΛ`
    interior_from_trace: Mat<f64>,
    a_li: Mat<f64>,
    /// `A_II⁻¹ b_I`
    interior_particular: Vec<f64>,
}

fn col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn condense(local: &LocalSystem) -> Result<CondensedBlock> {
    let lu = local.a_ii().partial_piv_lu();
    let rcond = reciprocal_pivot_ratio(lu.U().diagonal().column_vector().iter().copied());
    if !(rcond > 1e-14) {
        return Err(Error::SingularLocal {
            element: local.element,
            rcond,
        });
    }
    let x = lu.solve(local.a_il());
    let a_li = local.a_li().to_owned();
    let schur = local.a_ll() - &a_li * &x;
    let mut block = CondensedBlock {
        element: local.element,
        schur,
        reduced_load: Vec::new(),
        lu,
        interior_from_trace: x,
        a_li,
        interior_particular: Vec::new(),
    };
    block.set_load(local.b_i(), local.b_l());
    Ok(block)
}

impl CondensedBlock {
    /// Replaces the load without refactorizing.
    pub fn set_load(&mut self, b_i: &[f64], b_l: &[f64]) {
        let y = self.lu.solve(&col(b_i));
        let g = col(b_l) - &self.a_li * &y;
        self.interior_particular = (0..y.nrows()).map(|i| y[(i, 0)]).collect();
        self.reduced_load = (0..g.nrows()).map(|i| g[(i, 0)]).collect();
    }

    pub fn n_trace(&self) -> usize {
        self.schur.nrows()
    }

    pub fn n_interior(&self) -> usize {
        self.interior_from_trace.nrows()
    }
}

/// Interior unknowns `A_II⁻¹ (b_I - A_IΛ λ)` from the local trace values.
pub fn recover_interior(block: &CondensedBlock, trace: &[f64]) -> Result<Vec<f64>> {
    if trace.len() != block.n_trace() {
        return Err(Error::Dimension(format!(
            "trace has {} entries, block expects {}",
            trace.len(),
            block.n_trace()
        )));
    }
    let x = &block.interior_from_trace;
    Ok((0..x.nrows())
        .map(|i| {
            block.interior_particular[i] - (0..x.ncols()).map(|j| x[(i, j)] * trace[j]).sum::<f64>()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_unit_square;

    fn reference_mesh() -> Mesh {
        let v = vec![
            crate::mesh::Vertex::new(0.0, 0.0),
            crate::mesh::Vertex::new(1.0, 0.0),
            crate::mesh::Vertex::new(0.0, 1.0),
        ];
        Mesh::from_triangles(v, vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn p0_stabilization_by_hand() {
        // k = 0, p ≡ 0, α = 0: on the w-rows, the constant mode couples to
        // itself through Σ_e h⁻¹ |e| (φ_0 ≡ 1 restricts to Π_0 φ_0 = 1).
        let m = reference_mesh();
        let sp = Spaces::new(0).unwrap();
        let ls = local_transport_blocks(
            &sp,
            ElementContext::of(&m, 0),
            &DriftData::zero(&sp),
            0.0,
            &[0.0; 3],
        )
        .unwrap();
        let g = m.geometry(0);
        let want: f64 = g.face_lengths.iter().sum::<f64>() / g.diameter;
        let uo = 2 * sp.n_flux();
        assert!((ls.matrix[(uo, uo)] - want).abs() < 1e-13);
        // trace diagonal: h⁻¹|e|
        for f in 0..3 {
            let i = ls.n_interior + f;
            assert!((ls.matrix[(i, i)] - g.face_lengths[f] / g.diameter).abs() < 1e-13);
        }
    }

    #[test]
    fn poisson_tau_block_constant_mode() {
        let m = reference_mesh();
        let sp = Spaces::new(0).unwrap();
        let n = sp.n_scalar();
        let ls = local_poisson_blocks(&sp, ElementContext::of(&m, 0), [1.0; 3], 1.0, &vec![0.0; n])
            .unwrap();
        let fo = 2 * n;
        let perimeter: f64 = m.geometry(0).face_lengths.iter().sum();
        assert!((ls.matrix[(fo, fo)] - perimeter).abs() < 1e-13);
    }

    #[test]
    fn nonpositive_tau_is_rejected() {
        let m = reference_mesh();
        let sp = Spaces::new(0).unwrap();
        let n = sp.n_scalar();
        let r = local_poisson_blocks(
            &sp,
            ElementContext::of(&m, 0),
            [1.0, 0.0, 1.0],
            1.0,
            &vec![0.0; n],
        );
        assert!(matches!(r, Err(Error::NonPositiveTau(_))));
    }

    #[test]
    fn block_diagonal_condensation_is_trivial() {
        let mut ls = LocalSystem::new(0, 2, 2);
        ls.matrix[(0, 0)] = 2.0;
        ls.matrix[(1, 1)] = 3.0;
        ls.matrix[(2, 2)] = 4.0;
        ls.matrix[(3, 3)] = 5.0;
        ls.matrix[(2, 3)] = 1.0;
        ls.load = vec![1.0, 2.0, 3.0, 4.0];
        let b = condense(&ls).unwrap();
        assert_eq!(b.schur[(0, 0)], 4.0);
        assert_eq!(b.schur[(0, 1)], 1.0);
        assert_eq!(b.reduced_load, vec![3.0, 4.0]);
        let x = recover_interior(&b, &[0.0, 0.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_interior_block_reports_element() {
        let mut ls = LocalSystem::new(7, 2, 1);
        ls.matrix[(0, 0)] = 1.0;
        ls.matrix[(2, 2)] = 1.0;
        match condense(&ls) {
            Err(Error::SingularLocal { element, .. }) => assert_eq!(element, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn drift_block_is_linear_in_p() {
        let m = build_structured_unit_square(2).unwrap();
        let sp = Spaces::new(1).unwrap();
        let nu = sp.n_scalar();
        let mut drift = DriftData::zero(&sp);
        for (i, p) in drift.p.iter_mut().enumerate() {
            *p = [0.3 + 0.1 * i as f64, -0.2 * i as f64];
        }
        for (f, v) in drift.p_hat_normal.iter_mut().enumerate() {
            for (q, x) in v.iter_mut().enumerate() {
                *x = 0.5 - 0.1 * (f + q) as f64;
            }
        }
        let ctx = ElementContext::of(&m, 3);
        let base =
            local_transport_blocks(&sp, ctx, &DriftData::zero(&sp), 0.0, &vec![0.0; nu]).unwrap();
        let one = local_transport_blocks(&sp, ctx, &drift, 0.0, &vec![0.0; nu]).unwrap();
        let two =
            local_transport_blocks(&sp, ctx, &drift.scaled(2.0), 0.0, &vec![0.0; nu]).unwrap();
        let c1 = &one.matrix - &base.matrix;
        let c2 = &two.matrix - &base.matrix;
        let diff = (&c2 - &c1 * 2.0).norm_max();
        assert!(diff < 1e-13 * c1.norm_max().max(1.0), "{diff}");
    }
}
