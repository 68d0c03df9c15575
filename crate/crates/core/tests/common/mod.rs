//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use ddhdg::fem::{segment_quadrature, triangle_quadrature, SegmentBasis, TriangleBasis};
use ddhdg::mesh::Mesh;
use ddhdg::operators::LocalSystem;
use ddhdg::projections::TraceField;
use ddhdg::solver::DofMap;
use ddhdg::Point;
use faer::prelude::*;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Solution of the uncondensed global system.
pub struct Monolithic {
    /// Interior unknowns of each element in local order.
    pub interiors: Vec<Vec<f64>>,
    pub trace: TraceField,
}

/// Assembles every interior and every non-Dirichlet trace unknown into one
/// dense system and solves it with full pivoting. Dirichlet trace values come
/// from `dirichlet` and move to the right-hand side.
pub fn monolithic_solve(
    mesh: &Mesh,
    locals: &[LocalSystem],
    dofs: &DofMap,
    dirichlet: &TraceField,
) -> Monolithic {
    let nt = dofs.trace_dim();
    let ni: Vec<usize> = locals.iter().map(|l| l.n_interior).collect();
    let mut start = vec![0; locals.len() + 1];
    for e in 0..locals.len() {
        start[e + 1] = start[e] + ni[e];
    }
    let n_int = start[locals.len()];
    let n = n_int + dofs.n_active();
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = Mat::<f64>::zeros(n, 1);
    for (e, ls) in locals.iter().enumerate() {
        let mut global: Vec<Option<usize>> = (0..ni[e]).map(|i| Some(start[e] + i)).collect();
        let mut known = vec![0.0; ni[e]];
        for &f in &mesh.element_faces[e] {
            for m in 0..nt {
                global.push(dofs.offset(f).map(|o| n_int + o + m));
                known.push(dirichlet.face(f)[m]);
            }
        }
        for (i, gi) in global.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            b[(gi, 0)] += ls.load[i];
            for (j, gj) in global.iter().enumerate() {
                match *gj {
                    Some(gj) => a[(gi, gj)] += ls.matrix[(i, j)],
                    None => b[(gi, 0)] -= ls.matrix[(i, j)] * known[j],
                }
            }
        }
    }
    let x = a.full_piv_lu().solve(&b);
    let interiors = (0..locals.len())
        .map(|e| (0..ni[e]).map(|i| x[(start[e] + i, 0)]).collect())
        .collect();
    let mut trace = dirichlet.clone();
    for f in 0..mesh.num_faces() {
        if let Some(o) = dofs.offset(f) {
            for m in 0..nt {
                trace.face_mut(f)[m] = x[(n_int + o + m, 0)];
            }
        }
    }
    Monolithic { interiors, trace }
}

/// Element polynomial `Σ c_i φ_i` evaluated at a physical point, using the
/// first `c.len()` functions of the degree-`degree` basis.
pub fn eval_poly(mesh: &Mesh, e: usize, degree: usize, c: &[f64], x: Point) -> f64 {
    let xi = mesh.geometry(e).inverse_map(x);
    TriangleBasis::new(degree)
        .eval(xi)
        .iter()
        .zip(c)
        .map(|(a, b)| a * b)
        .sum()
}

/// `∫_K (Σ_c Σ_i v_ci φ_i)²`: squared L² norm of a field with `blocks` components.
pub fn element_norm_sq(mesh: &Mesh, e: usize, degree: usize, blocks: &[&[f64]]) -> f64 {
    let g = mesh.geometry(e);
    let rule = triangle_quadrature(2 * degree + 2).unwrap();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&xi, &w)| {
            let x = g.map(xi);
            w * g.abs_det()
                * blocks
                    .iter()
                    .map(|c| eval_poly(mesh, e, degree, c, x).powi(2))
                    .sum::<f64>()
        })
        .sum()
}

/// Physical point at global parameter `s` of face `f`.
pub fn face_point(mesh: &Mesh, f: usize, s: f64) -> Point {
    let [a, b] = mesh.face_points(f);
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// `∫_e (Π u - û)²` where `Π` is the L² projection onto the `trace.len()`
/// lowest segment modes, computed with an independent Gauss rule.
pub fn face_jump_sq(
    mesh: &Mesh,
    e: usize,
    f: usize,
    degree: usize,
    u: &[f64],
    trace: &[f64],
    project: bool,
) -> f64 {
    let rule = segment_quadrature(2 * degree + 4).unwrap();
    let nt = trace.len();
    let seg = SegmentBasis::new(nt - 1);
    let len = mesh.face_length(f);
    let uval: Vec<f64> = rule
        .points
        .iter()
        .map(|&s| eval_poly(mesh, e, degree, u, face_point(mesh, f, s)))
        .collect();
    let modes: Vec<Vec<f64>> = rule.points.iter().map(|&s| seg.eval(s)).collect();
    let proj: Vec<f64> = if project {
        (0..nt)
            .map(|m| {
                rule.weights
                    .iter()
                    .zip(&uval)
                    .zip(&modes)
                    .map(|((w, v), p)| w * v * p[m])
                    .sum()
            })
            .collect()
    } else {
        Vec::new()
    };
    rule.weights
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let hat: f64 = trace.iter().zip(&modes[q]).map(|(a, b)| a * b).sum();
            let v = if project {
                proj.iter().zip(&modes[q]).map(|(a, b)| a * b).sum()
            } else {
                uval[q]
            };
            w * len * (v - hat).powi(2)
        })
        .sum()
}

/// `xᵀ A y`
pub fn bilinear(a: &Mat<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..y.len() {
            s += x[i] * a[(i, j)] * y[j];
        }
    }
    s
}

/// Largest entry of `|A D - (A D)ᵀ|` with `D = diag(-1 on the first
/// `n_flip` unknowns, +1 elsewhere)`, relative to the largest entry of `A`.
pub fn adjointness_defect(a: &Mat<f64>, n_flip: usize) -> f64 {
    let n = a.nrows();
    let d = |i: usize| if i < n_flip { -1.0 } else { 1.0 };
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((a[(i, j)] * d(j) - a[(j, i)] * d(i)).abs());
            scale = scale.max(a[(i, j)].abs());
        }
    }
    defect / scale
}
