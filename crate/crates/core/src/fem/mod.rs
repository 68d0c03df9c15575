//! Reference-element machinery: bases, quadrature, cached tabulations and
//! elementary local matrices.

pub mod basis;
pub mod quadrature;

use faer::Mat;

pub use basis::{triangle_dim, SegmentBasis, Tabulation, TriangleBasis};
pub use quadrature::{segment_quadrature, triangle_quadrature, SegmentRule, TriangleRule};

use crate::mesh::ElementGeometry;
use crate::{Error, Point, Result};

const REFERENCE_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Reference coordinates of the point at global face parameter `s` on local
/// face `local_face`. `aligned` tells whether the local face direction
/// (vertex `j` to `j+1`) matches the global face direction.
pub fn reference_face_point(local_face: usize, aligned: bool, s: f64) -> Point {
    let a = REFERENCE_VERTICES[local_face];
    let b = REFERENCE_VERTICES[(local_face + 1) % 3];
    let (from, to) = if aligned { (a, b) } else { (b, a) };
    [
        from[0] + s * (to[0] - from[0]),
        from[1] + s * (to[1] - from[1]),
    ]
}

/// Immutable basis tables for one (degree, rule) configuration.
///
/// Face tables are indexed by local face and orientation and are evaluated at
/// the face rule points taken in the *global* face parameter, so quadrature
/// point `q` is the same physical point for both elements sharing a face.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub basis: TriangleBasis,
    pub trace_basis: SegmentBasis,
    pub volume_rule: TriangleRule,
    pub face_rule: SegmentRule,
    pub volume: Tabulation,
    faces: Vec<Tabulation>,
    pub trace: Tabulation,
}

impl ReferenceTables {
    pub fn new(
        degree: usize,
        trace_degree: usize,
        volume_exactness: usize,
        face_exactness: usize,
    ) -> Result<Self> {
        let basis = TriangleBasis::new(degree);
        let trace_basis = SegmentBasis::new(trace_degree);
        let volume_rule = triangle_quadrature(volume_exactness)?;
        let face_rule = segment_quadrature(face_exactness)?;
        let volume = basis.tabulate_rule(&volume_rule);
        let mut faces = Vec::with_capacity(6);
        for j in 0..3 {
            for aligned in [false, true] {
                let pts: Vec<Point> = face_rule
                    .points
                    .iter()
                    .map(|&s| reference_face_point(j, aligned, s))
                    .collect();
                faces.push(basis.tabulate(&pts));
            }
        }
        let trace = trace_basis.tabulate(&face_rule.points);
        Ok(Self {
            basis,
            trace_basis,
            volume_rule,
            face_rule,
            volume,
            faces,
            trace,
        })
    }

    /// Element basis restricted to a local face, at global-parameter face points.
    pub fn face(&self, local_face: usize, aligned: bool) -> &Tabulation {
        &self.faces[2 * local_face + usize::from(aligned)]
    }
}

/// `M_ij = ∫_K φ_i φ_j` for the full basis.
pub fn local_mass_matrix(basis: &TriangleBasis, geometry: &ElementGeometry) -> Result<Mat<f64>> {
    if !(geometry.abs_det() > 0.0) {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            det: geometry.det,
        });
    }
    let rule = triangle_quadrature(2 * basis.degree())?;
    let tab = basis.tabulate_rule(&rule);
    let n = basis.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for (q, w) in rule.weights.iter().enumerate() {
        let v = tab.values_at(q);
        let wq = w * geometry.abs_det();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += wq * v[i] * v[j];
            }
        }
    }
    Ok(m)
}

/// `∫_e trial_i test_j ds` from two tables sampled at the same face rule.
/// Only the leading `n_trial` / `n_test` columns are used.
pub fn local_face_mass(
    trial: &Tabulation,
    n_trial: usize,
    test: &Tabulation,
    n_test: usize,
    rule: &SegmentRule,
    length: f64,
) -> Result<Mat<f64>> {
    if !(length > 0.0) {
        return Err(Error::DegenerateFace(usize::MAX));
    }
    if n_trial > trial.dim || n_test > test.dim {
        return Err(Error::Dimension(format!(
            "face mass wants {n_trial}x{n_test} from tables of width {}x{}",
            trial.dim, test.dim
        )));
    }
    let mut m = Mat::<f64>::zeros(n_trial, n_test);
    for (q, w) in rule.weights.iter().enumerate() {
        let a = trial.values_at(q);
        let b = test.values_at(q);
        for i in 0..n_trial {
            for j in 0..n_test {
                m[(i, j)] += length * w * a[i] * b[j];
            }
        }
    }
    Ok(m)
}
