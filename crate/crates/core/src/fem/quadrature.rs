//! Gauss–Legendre rules on `[0, 1]` and collapsed (conical product) rules on
//! the reference triangle `{(0,0), (1,0), (0,1)}`.

use crate::{Error, Point, Result};

/// Highest polynomial degree any rule here is generated for.
pub const MAX_EXACTNESS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl SegmentRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// `m`-point Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, refined by Newton.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for n in 2..=m {
                let p2 = ((2 * n - 1) as f64 * z * p1 - (n - 1) as f64 * p0) / n as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule on `[0, 1]` exact through degree `exactness`.
pub fn segment_quadrature(exactness: usize) -> Result<SegmentRule> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::QuadratureUnsupported {
            requested: exactness,
            max: MAX_EXACTNESS,
        });
    }
    let m = exactness / 2 + 1;
    let (x, w) = gauss_legendre(m);
    Ok(SegmentRule {
        points: x.iter().map(|&z| 0.5 * (z + 1.0)).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        exactness,
    })
}

/// Collapsed product rule on the reference triangle, exact through total
/// degree `exactness`. Weights sum to 1/2.
pub fn triangle_quadrature(exactness: usize) -> Result<TriangleRule> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::QuadratureUnsupported {
            requested: exactness,
            max: MAX_EXACTNESS,
        });
    }
    // The Duffy Jacobian (1 - a) raises the degree in `a` by one.
    let outer = segment_quadrature(exactness + 1)?;
    let inner = segment_quadrature(exactness)?;
    let mut points = Vec::with_capacity(outer.len() * inner.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (&a, &wa) in outer.points.iter().zip(&outer.weights) {
        for (&b, &wb) in inner.points.iter().zip(&inner.weights) {
            points.push([a, b * (1.0 - a)]);
            weights.push(wa * wb * (1.0 - a));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        exactness,
    })
}
