//! Discrete fields and the projections onto them.
//!
//! Coefficients are expressed in the orthonormal bases of [`crate::fem`], so
//! element L² projections reduce to scaled moments and the mean value of a
//! scalar field on an element is its first coefficient.

use faer::prelude::*;
use faer::Mat;
use rayon::prelude::*;

use crate::fem::{
    reference_face_point, segment_quadrature, triangle_dim, triangle_quadrature, SegmentBasis,
    TriangleBasis,
};
use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// Element-wise polynomial field with 1 (scalar) or 2 (vector) components.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    degree: usize,
    components: usize,
    dim: usize,
    data: Vec<f64>,
}

impl CoefficientField {
    pub fn zeros(num_elements: usize, degree: usize, components: usize) -> Self {
        let dim = triangle_dim(degree);
        Self {
            degree,
            components,
            dim,
            data: vec![0.0; num_elements * components * dim],
        }
    }

    pub fn from_data(
        num_elements: usize,
        degree: usize,
        components: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        let dim = triangle_dim(degree);
        if data.len() != num_elements * components * dim {
            return Err(Error::Dimension(format!(
                "field data has {} entries, expected {}",
                data.len(),
                num_elements * components * dim
            )));
        }
        Ok(Self {
            degree,
            components,
            dim,
            data,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// `dim P^degree`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_elements(&self) -> usize {
        self.data.len() / (self.components * self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// All components of one element, component-major.
    pub fn element(&self, e: usize) -> &[f64] {
        let n = self.components * self.dim;
        &self.data[e * n..(e + 1) * n]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let n = self.components * self.dim;
        &mut self.data[e * n..(e + 1) * n]
    }

    pub fn component(&self, e: usize, c: usize) -> &[f64] {
        &self.element(e)[c * self.dim..(c + 1) * self.dim]
    }

    /// Element mean of component `c`.
    pub fn mean(&self, e: usize, c: usize) -> f64 {
        self.component(e, c)[0]
    }

    /// Evaluates at reference coordinates `xi` of element `e`, given the basis
    /// values there (at least `dim` of them).
    pub fn eval_with(&self, e: usize, basis_values: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate().take(self.components) {
            *o = self
                .component(e, c)
                .iter()
                .zip(basis_values)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    /// Evaluates at a physical point inside element `e`.
    pub fn eval(&self, mesh: &Mesh, e: usize, x: Point) -> Vec<f64> {
        let basis = TriangleBasis::new(self.degree);
        let xi = mesh.geometry(e).inverse_map(x);
        let mut out = vec![0.0; self.components];
        self.eval_with(e, &basis.eval(xi), &mut out);
        out
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &CoefficientField) {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(s, o)| *s += a * o);
    }

    /// `Σ_K ∫_K |field|²` equals the area-weighted coefficient norm.
    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        (0..self.num_elements())
            .map(|e| mesh.geometry(e).area * self.element(e).iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// L² distance to another field on the same mesh and space.
    pub fn l2_distance(&self, other: &CoefficientField, mesh: &Mesh) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        (0..self.num_elements())
            .map(|e| {
                let d: f64 = self
                    .element(e)
                    .iter()
                    .zip(other.element(e))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                mesh.geometry(e).area * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Face-wise polynomial field, one record per face.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField {
    degree: usize,
    data: Vec<f64>,
}

impl TraceField {
    pub fn zeros(num_faces: usize, degree: usize) -> Self {
        Self {
            degree,
            data: vec![0.0; num_faces * (degree + 1)],
        }
    }

    pub fn from_data(num_faces: usize, degree: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != num_faces * (degree + 1) {
            return Err(Error::Dimension(format!(
                "trace data has {} entries, expected {}",
                data.len(),
                num_faces * (degree + 1)
            )));
        }
        Ok(Self { degree, data })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_faces(&self) -> usize {
        self.data.len() / (self.degree + 1)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn face(&self, f: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.data[f * n..(f + 1) * n]
    }

    pub fn face_mut(&mut self, f: usize) -> &mut [f64] {
        let n = self.degree + 1;
        &mut self.data[f * n..(f + 1) * n]
    }

    /// Value at global face parameter `s`.
    pub fn eval(&self, f: usize, s: f64) -> f64 {
        let psi = SegmentBasis::new(self.degree).eval(s);
        self.face(f).iter().zip(&psi).map(|(a, b)| a * b).sum()
    }
}

/// Element L² projection of a pointwise function with `components` outputs
/// onto `P^degree`. Quadrature exactness is `2·degree + 4`.
pub fn l2_project_element<F>(
    mesh: &Mesh,
    degree: usize,
    components: usize,
    f: F,
) -> CoefficientField
where
    F: Fn(Point, &mut [f64]) + Sync,
{
    let basis = TriangleBasis::new(degree);
    let rule = triangle_quadrature(2 * degree + 4).expect("projection quadrature");
    let tab = basis.tabulate_rule(&rule);
    let dim = basis.dim();
    let per = components * dim;
    let data: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .flat_map_iter(|e| {
            let g = mesh.geometry(e);
            let mut coeffs = vec![0.0; per];
            let mut val = vec![0.0; components];
            for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                f(g.map(xi), &mut val);
                let v = tab.values_at(q);
                for c in 0..components {
                    for i in 0..dim {
                        // mean-orthonormal basis: coefficient = (1/|T̂|) ∫ f φ_i
                        coeffs[c * dim + i] += 2.0 * w * val[c] * v[i];
                    }
                }
            }
            coeffs
        })
        .collect();
    CoefficientField {
        degree,
        components,
        dim,
        data,
    }
}

pub fn l2_project_scalar<F>(mesh: &Mesh, degree: usize, f: F) -> CoefficientField
where
    F: Fn(Point) -> f64 + Sync,
{
    l2_project_element(mesh, degree, 1, |x, out| out[0] = f(x))
}

pub fn l2_project_vector<F>(mesh: &Mesh, degree: usize, f: F) -> CoefficientField
where
    F: Fn(Point) -> Point + Sync,
{
    l2_project_element(mesh, degree, 2, |x, out| {
        let v = f(x);
        out[0] = v[0];
        out[1] = v[1];
    })
}

/// Coefficients of the L² projection of `g` onto `P^degree(e)` for one face,
/// in the global face parameter.
pub fn project_on_face<F>(mesh: &Mesh, face: usize, degree: usize, g: F) -> Vec<f64>
where
    F: Fn(Point) -> f64,
{
    let rule = segment_quadrature(2 * degree + 4).expect("face projection quadrature");
    let basis = SegmentBasis::new(degree);
    let mut coeffs = vec![0.0; degree + 1];
    let mut psi = vec![0.0; degree + 1];
    for (&s, &w) in rule.points.iter().zip(&rule.weights) {
        let val = g(mesh.face_point(face, s));
        basis.eval_into(s, &mut psi);
        for (c, p) in coeffs.iter_mut().zip(&psi) {
            *c += w * val * p;
        }
    }
    coeffs
}

/// Face L² projection onto `P^degree` on every face.
pub fn l2_project_face<F>(mesh: &Mesh, degree: usize, g: F) -> TraceField
where
    F: Fn(Point) -> f64 + Sync,
{
    let data: Vec<f64> = (0..mesh.num_faces())
        .into_par_iter()
        .flat_map_iter(|f| project_on_face(mesh, f, degree, &g))
        .collect();
    TraceField { degree, data }
}

/// A volumetric field restricted to one side of a face, parametrized by the
/// global face parameter.
#[derive(Debug, Clone)]
pub struct FaceRestriction {
    coefficients: Vec<f64>,
    components: usize,
    basis: TriangleBasis,
    local_face: usize,
    aligned: bool,
}

impl FaceRestriction {
    pub fn eval(&self, s: f64) -> Vec<f64> {
        let xi = reference_face_point(self.local_face, self.aligned, s);
        let v = self.basis.eval(xi);
        let dim = self.basis.dim();
        (0..self.components)
            .map(|c| {
                self.coefficients[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

pub fn restrict_to_face(
    field: &CoefficientField,
    mesh: &Mesh,
    element: usize,
    face: usize,
) -> Result<FaceRestriction> {
    let local_face = mesh.element_faces[element]
        .iter()
        .position(|&f| f == face)
        .ok_or_else(|| {
            Error::Dimension(format!("face {face} is not a face of element {element}"))
        })?;
    Ok(FaceRestriction {
        coefficients: field.element(element).to_vec(),
        components: field.components(),
        basis: TriangleBasis::new(field.degree()),
        local_face,
        aligned: mesh.face_aligned[element][local_face],
    })
}

/// Coupled HDG projection `(Π_V p, Π_W φ)` into `[P^m]² × P^m`: interior
/// moments against `P^{m-1}` and face moments of `Π_V p·n + τ Π_W φ` against
/// `P^m(e)` on every face. `tau` holds one nonnegative value per face with a
/// positive maximum on each element.
pub fn hdg_project<P, F>(
    mesh: &Mesh,
    degree: usize,
    tau: &[f64],
    p: P,
    phi: F,
) -> Result<(CoefficientField, CoefficientField)>
where
    P: Fn(Point) -> Point + Sync,
    F: Fn(Point) -> f64 + Sync,
{
    if tau.len() != mesh.num_faces() {
        return Err(Error::Dimension(format!(
            "tau has {} entries for {} faces",
            tau.len(),
            mesh.num_faces()
        )));
    }
    let basis = TriangleBasis::new(degree);
    let n = basis.dim();
    let n_low = if degree == 0 {
        0
    } else {
        triangle_dim(degree - 1)
    };
    let vol = triangle_quadrature(2 * degree + 14)?;
    let vtab = basis.tabulate_rule(&vol);
    let seg = segment_quadrature(2 * degree + 14)?;
    let trace = SegmentBasis::new(degree).tabulate(&seg.points);
    let face_tabs: Vec<_> = (0..3)
        .map(|j| {
            let pts: Vec<Point> = seg
                .points
                .iter()
                .map(|&s| reference_face_point(j, true, s))
                .collect();
            basis.tabulate(&pts)
        })
        .collect();

    let locals: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let g = mesh.geometry(e);
            let taus: [f64; 3] = mesh.element_faces[e].map(|f| tau[f]);
            if taus.iter().any(|&t| t < 0.0) || taus.iter().cloned().fold(0.0, f64::max) <= 0.0 {
                return Err(Error::SingularLocal {
                    element: e,
                    rcond: 0.0,
                });
            }
            let size = 3 * n;
            let mut a = Mat::<f64>::zeros(size, size);
            let mut b = Mat::<f64>::zeros(size, 1);
            let mut row = 0;
            // (Π_V p, r) = (p, r), r ∈ [P^{m-1}]²; (Π_W φ, w) = (φ, w), w ∈ P^{m-1}
            for c in 0..3 {
                for i in 0..n_low {
                    for (q, (&xi, &w)) in vol.points.iter().zip(&vol.weights).enumerate() {
                        let x = g.map(xi);
                        let v = vtab.values_at(q);
                        let wq = w * g.abs_det();
                        let target = match c {
                            0 => p(x)[0],
                            1 => p(x)[1],
                            _ => phi(x),
                        };
                        b[(row, 0)] += wq * target * v[i];
                        for j in 0..n {
                            a[(row, c * n + j)] += wq * v[j] * v[i];
                        }
                    }
                    row += 1;
                }
            }
            // ⟨Π_V p·n + τ Π_W φ, μ⟩_e = ⟨p·n + τφ, μ⟩_e, μ ∈ P^m(e)
            for (j, ftab) in face_tabs.iter().enumerate() {
                let len = g.face_lengths[j];
                let nrm = g.normals[j];
                for l in 0..=degree {
                    for (q, (&s, &w)) in seg.points.iter().zip(&seg.weights).enumerate() {
                        let x = g.map(reference_face_point(j, true, s));
                        let mu = trace.values_at(q)[l];
                        let v = ftab.values_at(q);
                        let wq = w * len * mu;
                        let pv = p(x);
                        b[(row, 0)] += wq * (pv[0] * nrm[0] + pv[1] * nrm[1] + taus[j] * phi(x));
                        for k in 0..n {
                            a[(row, k)] += wq * v[k] * nrm[0];
                            a[(row, n + k)] += wq * v[k] * nrm[1];
                            a[(row, 2 * n + k)] += wq * taus[j] * v[k];
                        }
                    }
                    row += 1;
                }
            }
            debug_assert_eq!(row, size);
            let lu = a.partial_piv_lu();
            let rcond = reciprocal_pivot_ratio(lu.U().diagonal().column_vector().iter().copied());
            if !(rcond > 1e-13) {
                return Err(Error::SingularLocal { element: e, rcond });
            }
            let x = lu.solve(&b);
            let pv: Vec<f64> = (0..2 * n).map(|i| x[(i, 0)]).collect();
            let wv: Vec<f64> = (0..n).map(|i| x[(2 * n + i, 0)]).collect();
            Ok((pv, wv))
        })
        .collect();

    let mut pv = CoefficientField::zeros(mesh.num_elements(), degree, 2);
    let mut wv = CoefficientField::zeros(mesh.num_elements(), degree, 1);
    for (e, r) in locals.into_iter().enumerate() {
        let (a, b) = r?;
        pv.element_mut(e).copy_from_slice(&a);
        wv.element_mut(e).copy_from_slice(&b);
    }
    Ok((pv, wv))
}

/// Largest relative residual of the three equation families defining
/// [`hdg_project`], recomputed with a finer quadrature: interior moments of
/// `Π_V p - p` and `Π_W φ - φ` against `P^{m-1}`, and face moments of
/// `(Π_V p - p)·n + τ(Π_W φ - φ)` against `P^m(e)`. Each family is scaled by
/// the magnitude of the corresponding data moments.
pub fn hdg_projection_residual<P, F>(
    mesh: &Mesh,
    degree: usize,
    tau: &[f64],
    p: &P,
    phi: &F,
    pv: &CoefficientField,
    pw: &CoefficientField,
) -> f64
where
    P: Fn(Point) -> Point + Sync,
    F: Fn(Point) -> f64 + Sync,
{
    let vol = triangle_quadrature(2 * degree + 20).expect("residual quadrature");
    let seg = segment_quadrature(2 * degree + 20).expect("residual quadrature");
    let field_basis = TriangleBasis::new(degree);
    let test = (degree > 0).then(|| TriangleBasis::new(degree - 1));
    let trace = SegmentBasis::new(degree);
    let (mut res, mut scale) = ([0.0f64; 2], [0.0f64; 2]);
    for e in 0..mesh.num_elements() {
        let g = mesh.geometry(e);
        let mut a = [0.0, 0.0];
        let mut b = [0.0];
        if let Some(test) = &test {
            let nt = test.dim();
            let mut r = vec![0.0; 3 * nt];
            let mut d = vec![0.0; 3 * nt];
            for (&xi, &w) in vol.points.iter().zip(&vol.weights) {
                let x = g.map(xi);
                let fb = field_basis.eval(xi);
                pv.eval_with(e, &fb, &mut a);
                pw.eval_with(e, &fb, &mut b);
                let (pp, ff) = (p(x), phi(x));
                let wq = w * g.abs_det();
                for (i, t) in test.eval(xi).iter().enumerate() {
                    r[i] += wq * (a[0] - pp[0]) * t;
                    r[nt + i] += wq * (a[1] - pp[1]) * t;
                    r[2 * nt + i] += wq * (b[0] - ff) * t;
                    d[i] += wq * pp[0] * t;
                    d[nt + i] += wq * pp[1] * t;
                    d[2 * nt + i] += wq * ff * t;
                }
            }
            res[0] = r.iter().fold(res[0], |m, v| m.max(v.abs()));
            scale[0] = d.iter().fold(scale[0], |m, v| m.max(v.abs()));
        }
        for (j, &f) in mesh.element_faces[e].iter().enumerate() {
            let nrm = g.normals[j];
            let len = g.face_lengths[j];
            let aligned = mesh.face_aligned[e][j];
            let mut r = vec![0.0; degree + 1];
            let mut d = vec![0.0; degree + 1];
            for (&s, &w) in seg.points.iter().zip(&seg.weights) {
                let xi = reference_face_point(j, aligned, s);
                let x = g.map(xi);
                let fb = field_basis.eval(xi);
                pv.eval_with(e, &fb, &mut a);
                pw.eval_with(e, &fb, &mut b);
                let (pp, ff) = (p(x), phi(x));
                let dn = (a[0] - pp[0]) * nrm[0] + (a[1] - pp[1]) * nrm[1] + tau[f] * (b[0] - ff);
                let dd = pp[0] * nrm[0] + pp[1] * nrm[1] + tau[f] * ff;
                for (l, mu) in trace.eval(s).iter().enumerate() {
                    r[l] += w * len * dn * mu;
                    d[l] += w * len * dd * mu;
                }
            }
            res[1] = r.iter().fold(res[1], |m, v| m.max(v.abs()));
            scale[1] = d.iter().fold(scale[1], |m, v| m.max(v.abs()));
        }
    }
    (0..2)
        .map(|i| res[i] / scale[i].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// `min |u_ii| / max |u_ii|` over LU pivots: a cheap reciprocal condition estimate.
pub(crate) fn reciprocal_pivot_ratio(diag: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in diag {
        let d = d.abs();
        if !d.is_finite() {
            return 0.0;
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}
