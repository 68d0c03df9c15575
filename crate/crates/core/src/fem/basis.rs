//! Orthonormal hierarchical bases on the reference triangle and segment.
//!
//! Both bases are orthonormal with respect to the *mean* over the reference
//! cell, so the physical mass matrix on an element of area `A` is `A·I` and the
//! face mass matrix on a face of length `L` is `L·I`. The first basis function
//! is the constant 1. Ordering is by total degree, so the leading
//! `dim(P^j)` functions of a degree-`k` basis span `P^j` for every `j ≤ k`.

use crate::fem::quadrature::{triangle_quadrature, TriangleRule};
use crate::Point;

/// `dim P^k` on a triangle.
pub const fn triangle_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Jacobi polynomial `P_n^{(α,0)}(z)` by three-term recurrence.
fn jacobi(n: usize, alpha: f64, beta: f64, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (alpha + 1.0) + (alpha + beta + 2.0) * (z - 1.0) / 2.0;
    for m in 2..=n {
        let m = m as f64;
        let c = 2.0 * m + alpha + beta;
        let a1 = 2.0 * m * (m + alpha + beta) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * z + alpha * alpha - beta * beta);
        let a3 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * c;
        let p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn jacobi_derivative(n: usize, alpha: f64, beta: f64, z: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + alpha + beta + 1.0) * jacobi(n - 1, alpha + 1.0, beta + 1.0, z)
    }
}

/// Orthonormal Dubiner basis of `P^degree` on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriangleBasis {
    degree: usize,
    /// `(p, q)` index pairs in hierarchical order.
    modes: Vec<(usize, usize)>,
    scale: Vec<f64>,
}

impl TriangleBasis {
    pub fn new(degree: usize) -> Self {
        let mut modes = Vec::with_capacity(triangle_dim(degree));
        for n in 0..=degree {
            for q in 0..=n {
                modes.push((n - q, q));
            }
        }
        let mut basis = Self {
            degree,
            modes,
            scale: vec![1.0; triangle_dim(degree)],
        };
        let rule = triangle_quadrature(2 * degree).expect("basis degree within quadrature range");
        let mut norms = vec![0.0; basis.dim()];
        let mut vals = vec![0.0; basis.dim()];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            basis.eval_into(*p, &mut vals);
            for (n, v) in norms.iter_mut().zip(&vals) {
                *n += 2.0 * w * v * v;
            }
        }
        basis.scale = norms.iter().map(|n| 1.0 / n.sqrt()).collect();
        basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Collapsed-coordinate factors: the scaled Legendre part
    /// `(1-η)^p P_p((2ξ+η-1)/(1-η))` and its gradient, for all `p ≤ degree`.
    fn scaled_legendre(&self, xi: Point) -> (Vec<f64>, Vec<Point>) {
        let x = 2.0 * xi[0] + xi[1] - 1.0;
        let s = 1.0 - xi[1];
        let d = self.degree;
        let mut l = vec![0.0; d + 1];
        let mut g = vec![[0.0; 2]; d + 1];
        l[0] = 1.0;
        if d >= 1 {
            l[1] = x;
            g[1] = [2.0, 1.0];
        }
        for p in 1..d {
            let pf = p as f64;
            let a = (2.0 * pf + 1.0) / (pf + 1.0);
            let b = pf / (pf + 1.0);
            l[p + 1] = a * x * l[p] - b * s * s * l[p - 1];
            // ∂x = (2, 1), ∂(s²) = (0, -2s)
            g[p + 1] = [
                a * (2.0 * l[p] + x * g[p][0]) - b * s * s * g[p - 1][0],
                a * (l[p] + x * g[p][1]) - b * (s * s * g[p - 1][1] - 2.0 * s * l[p - 1]),
            ];
        }
        (l, g)
    }

    pub fn eval_into(&self, xi: Point, out: &mut [f64]) {
        let (l, _) = self.scaled_legendre(xi);
        let z = 2.0 * xi[1] - 1.0;
        for (i, &(p, q)) in self.modes.iter().enumerate() {
            out[i] = self.scale[i] * l[p] * jacobi(q, 2.0 * p as f64 + 1.0, 0.0, z);
        }
    }

    pub fn eval(&self, xi: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(xi, &mut v);
        v
    }

    /// Reference gradients `(∂ξ, ∂η)`.
    pub fn grad_into(&self, xi: Point, out: &mut [Point]) {
        let (l, g) = self.scaled_legendre(xi);
        let z = 2.0 * xi[1] - 1.0;
        for (i, &(p, q)) in self.modes.iter().enumerate() {
            let a = 2.0 * p as f64 + 1.0;
            let jq = jacobi(q, a, 0.0, z);
            let djq = 2.0 * jacobi_derivative(q, a, 0.0, z);
            out[i] = [
                self.scale[i] * g[p][0] * jq,
                self.scale[i] * (g[p][1] * jq + l[p] * djq),
            ];
        }
    }

    pub fn grad(&self, xi: Point) -> Vec<Point> {
        let mut v = vec![[0.0; 2]; self.dim()];
        self.grad_into(xi, &mut v);
        v
    }

    /// Values and reference gradients at every point of a rule.
    pub fn tabulate(&self, points: &[Point]) -> Tabulation {
        let dim = self.dim();
        let mut values = vec![0.0; points.len() * dim];
        let mut grads = vec![[0.0; 2]; points.len() * dim];
        for (i, p) in points.iter().enumerate() {
            self.eval_into(*p, &mut values[i * dim..(i + 1) * dim]);
            self.grad_into(*p, &mut grads[i * dim..(i + 1) * dim]);
        }
        Tabulation { dim, values, grads }
    }

    pub fn tabulate_rule(&self, rule: &TriangleRule) -> Tabulation {
        self.tabulate(&rule.points)
    }
}

/// Point-major basis tables: entry `(point, i)` at `point * dim + i`.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub dim: usize,
    pub values: Vec<f64>,
    pub grads: Vec<Point>,
}

impl Tabulation {
    #[inline]
    pub fn values_at(&self, point: usize) -> &[f64] {
        &self.values[point * self.dim..(point + 1) * self.dim]
    }

    #[inline]
    pub fn grads_at(&self, point: usize) -> &[Point] {
        &self.grads[point * self.dim..(point + 1) * self.dim]
    }

    pub fn num_points(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.values.len() / self.dim
        }
    }
}

/// Orthonormal shifted Legendre basis `√(2j+1) P_j(2s-1)` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct SegmentBasis {
    degree: usize,
}

impl SegmentBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        let z = 2.0 * s - 1.0;
        let (mut p0, mut p1) = (1.0, z);
        for (j, o) in out.iter_mut().enumerate().take(self.dim()) {
            let pj = match j {
                0 => 1.0,
                1 => z,
                _ => {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *o = (2.0 * j as f64 + 1.0).sqrt() * pj;
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(s, &mut v);
        v
    }

    pub fn tabulate(&self, points: &[f64]) -> Tabulation {
        let dim = self.dim();
        let mut values = vec![0.0; points.len() * dim];
        for (i, &s) in points.iter().enumerate() {
            self.eval_into(s, &mut values[i * dim..(i + 1) * dim]);
        }
        Tabulation {
            dim,
            values,
            grads: Vec::new(),
        }
    }
}
