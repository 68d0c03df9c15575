//! Exact solutions, problem presets, L² errors and observed convergence orders.

use std::sync::Arc;

use crate::fem::{segment_quadrature, triangle_quadrature, TriangleBasis};
use crate::mesh::{build_structured_unit_square, BoundaryTag, Mesh};
use crate::projections::{CoefficientField, TraceField};
use crate::solver::BoundaryData;
use crate::timestepping::ProblemData;
use crate::{Error, Point, Result};

/// Smooth manufactured solution
/// `u = cos t sin x cos y`, `φ = sin t cos x sin y` on the unit square with
/// the exact traces as Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1 {
    pub eps: f64,
}

impl Default for Example1 {
    fn default() -> Self {
        Self { eps: 0.1 }
    }
}

impl Example1 {
    pub fn u(x: Point, t: f64) -> f64 {
        t.cos() * x[0].sin() * x[1].cos()
    }

    pub fn phi(x: Point, t: f64) -> f64 {
        t.sin() * x[0].cos() * x[1].sin()
    }

    /// `q = -∇u`
    pub fn q(x: Point, t: f64) -> Point {
        let c = t.cos();
        [-c * x[0].cos() * x[1].cos(), c * x[0].sin() * x[1].sin()]
    }

    /// `p = -∇φ`
    pub fn p(x: Point, t: f64) -> Point {
        let s = t.sin();
        [s * x[0].sin() * x[1].sin(), -s * x[0].cos() * x[1].cos()]
    }

    pub fn u_t(x: Point, t: f64) -> f64 {
        -t.sin() * x[0].sin() * x[1].cos()
    }

    pub fn laplace_u(x: Point, t: f64) -> f64 {
        -2.0 * Self::u(x, t)
    }

    pub fn laplace_phi(x: Point, t: f64) -> f64 {
        -2.0 * Self::phi(x, t)
    }

    /// `∇·(u∇φ) = -∇·(u p)`
    pub fn drift_divergence(x: Point, t: f64) -> f64 {
        let (s, c) = (t.sin(), t.cos());
        let (sx, cx, sy, cy) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
        // u∇φ = cos t sin t sin x cos y (-sin x sin y, cos x cos y)
        let a = c * s;
        a * (-2.0 * sx * cx * sy * cy) + a * (-sx * cx * 2.0 * cy * sy)
    }

    /// `f1 = u_t - Δu + ∇·(u∇φ)`
    pub fn f1(x: Point, t: f64) -> f64 {
        Self::u_t(x, t) - Self::laplace_u(x, t) + Self::drift_divergence(x, t)
    }

    /// `f2 = -εΔφ + u`
    pub fn f2(&self, x: Point, t: f64) -> f64 {
        -self.eps * Self::laplace_phi(x, t) + Self::u(x, t)
    }

    pub fn problem(&self) -> ProblemData {
        let me = *self;
        ProblemData {
            eps: self.eps,
            f1: Arc::new(Self::f1),
            f2: Arc::new(move |x, t| me.f2(x, t)),
            u0: Arc::new(|x| Self::u(x, 0.0)),
            boundary: BoundaryData {
                g_u: Arc::new(Self::u),
                g_phi: Arc::new(Self::phi),
                neumann_u: None,
                neumann_phi: None,
            },
        }
    }

    /// Structured unit-square mesh, all boundary Dirichlet.
    pub fn mesh(n: usize) -> Result<Mesh> {
        build_structured_unit_square(n)
    }
}

/// Device-like problem on the unit square: `ε = 10⁻²`, `f1 = 0`, a doping
/// profile `f2 = -0.8` on `(0, ½) × (½, 1)` and `0.8` elsewhere, contacts on
/// the bottom edge and on the top edge for `x ≤ ¼`, insulation elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2 {
    pub eps: f64,
}

impl Default for Example2 {
    fn default() -> Self {
        Self { eps: 1e-2 }
    }
}

impl Example2 {
    pub fn f2(x: Point) -> f64 {
        if x[0] > 0.0 && x[0] < 0.5 && x[1] > 0.5 && x[1] < 1.0 {
            -0.8
        } else {
            0.8
        }
    }

    pub fn u0(x: Point) -> f64 {
        0.5 * (1.0 + Self::f2(x))
    }

    /// Contact values `(g_u, g_φ)`: bottom contact below `y = ½`, top contact above.
    pub fn contact(x: Point) -> (f64, f64) {
        if x[1] < 0.5 {
            (0.9, 1.1)
        } else {
            (0.1, -1.1)
        }
    }

    /// Boundary tag from a face midpoint. A face on the top edge belongs to
    /// the contact when its midpoint satisfies `x ≤ ¼`.
    pub fn tag(mid: Point) -> BoundaryTag {
        let tol = 1e-12;
        if mid[1].abs() < tol || ((mid[1] - 1.0).abs() < tol && mid[0] <= 0.25 + tol) {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    }

    pub fn mesh(n: usize) -> Result<Mesh> {
        build_structured_unit_square(n)?.tag_boundary(|mid, _| Self::tag(mid))
    }

    pub fn problem(&self) -> ProblemData {
        ProblemData {
            eps: self.eps,
            f1: Arc::new(|_, _| 0.0),
            f2: Arc::new(|x, _| Self::f2(x)),
            u0: Arc::new(Self::u0),
            boundary: BoundaryData {
                g_u: Arc::new(|x, _| Self::contact(x).0),
                g_phi: Arc::new(|x, _| Self::contact(x).1),
                neumann_u: None,
                neumann_phi: None,
            },
        }
    }
}

/// `‖field - exact‖_{L²(Ω)}` with quadrature of exactness `2·degree + 8`.
/// `exact` writes one value per field component.
pub fn l2_error<F>(mesh: &Mesh, field: &CoefficientField, exact: F) -> f64
where
    F: Fn(Point, &mut [f64]),
{
    let deg = field.degree();
    let rule = triangle_quadrature(2 * deg + 8).expect("error quadrature");
    let tab = TriangleBasis::new(deg).tabulate_rule(&rule);
    let nc = field.components();
    let (mut fh, mut fe) = (vec![0.0; nc], vec![0.0; nc]);
    let mut sum = 0.0;
    for e in 0..mesh.num_elements() {
        let g = mesh.geometry(e);
        for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            field.eval_with(e, tab.values_at(q), &mut fh);
            exact(g.map(xi), &mut fe);
            sum += w
                * g.abs_det()
                * fh.iter()
                    .zip(&fe)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>();
        }
    }
    sum.sqrt()
}

pub fn l2_error_scalar(mesh: &Mesh, field: &CoefficientField, exact: impl Fn(Point) -> f64) -> f64 {
    l2_error(mesh, field, |x, out| out[0] = exact(x))
}

pub fn l2_error_vector(
    mesh: &Mesh,
    field: &CoefficientField,
    exact: impl Fn(Point) -> Point,
) -> f64 {
    l2_error(mesh, field, |x, out| out.copy_from_slice(&exact(x)))
}

/// `(Σ_e |e| ‖trace - g‖²_e)^{1/2}`: the face norm scaled like an L²(Ω) norm.
pub fn weighted_face_error(mesh: &Mesh, trace: &TraceField, g: impl Fn(Point) -> f64) -> f64 {
    let rule = segment_quadrature(2 * trace.degree() + 8).expect("error quadrature");
    let mut sum = 0.0;
    for f in 0..mesh.num_faces() {
        let len = mesh.face_length(f);
        let e2: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| w * len * (trace.eval(f, s) - g(mesh.face_point(f, s))).powi(2))
            .sum();
        sum += len * e2;
    }
    sum.sqrt()
}

/// Final-time errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `log₂ n` for an `n × n` structured mesh.
    pub level: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_phi: f64,
    pub err_q: f64,
    pub err_p: f64,
}

impl ErrorReport {
    pub fn errors(&self) -> [f64; 4] {
        [self.err_u, self.err_phi, self.err_q, self.err_p]
    }
}

/// Observed orders `log₂(e_{ℓ-1} / e_ℓ)` between consecutive entries, which
/// must halve `h`.
pub fn observed_orders(h: &[f64], errors: &[f64]) -> Result<Vec<f64>> {
    if h.len() != errors.len() {
        return Err(Error::Eoc(format!(
            "{} mesh sizes for {} errors",
            h.len(),
            errors.len()
        )));
    }
    h.windows(2)
        .zip(errors.windows(2))
        .map(|(hw, ew)| {
            let ratio = hw[0] / hw[1];
            if (ratio - 2.0).abs() > 1e-6 {
                return Err(Error::Eoc(format!(
                    "mesh sizes {} -> {} do not halve",
                    hw[0], hw[1]
                )));
            }
            Ok((ew[0] / ew[1]).log2())
        })
        .collect()
}

/// Reports with their rates; row `i > 0` carries the rates against row `i-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EocTable {
    pub rows: Vec<ErrorReport>,
    /// `[u, φ, q, p]` per row, `None` on the first row.
    pub rates: Vec<[Option<f64>; 4]>,
}

pub fn eoc_table(reports: &[ErrorReport]) -> Result<EocTable> {
    if reports.is_empty() {
        return Err(Error::Eoc("no levels".into()));
    }
    let h: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let mut rates = vec![[None; 4]; reports.len()];
    for c in 0..4 {
        let e: Vec<f64> = reports.iter().map(|r| r.errors()[c]).collect();
        for (i, r) in observed_orders(&h, &e)?.into_iter().enumerate() {
            rates[i + 1][c] = Some(r);
        }
    }
    Ok(EocTable {
        rows: reports.to_vec(),
        rates,
    })
}

impl EocTable {
    /// Rates `[u, φ, q, p]` between the last two levels.
    pub fn final_rates(&self) -> Option<[f64; 4]> {
        let last = self.rates.last()?;
        Some([last[0]?, last[1]?, last[2]?, last[3]?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Point, f64) -> f64, x: Point, t: f64) -> (f64, f64, f64, f64) {
        let h = 1e-4;
        let ft = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
        let fx = (f([x[0] + h, x[1]], t) - f([x[0] - h, x[1]], t)) / (2.0 * h);
        let fy = (f([x[0], x[1] + h], t) - f([x[0], x[1] - h], t)) / (2.0 * h);
        let lap = (f([x[0] + h, x[1]], t)
            + f([x[0] - h, x[1]], t)
            + f([x[0], x[1] + h], t)
            + f([x[0], x[1] - h], t)
            - 4.0 * f(x, t))
            / (h * h);
        (ft, fx, fy, lap)
    }

    #[test]
    fn derived_fields_match_finite_differences() {
        let ex = Example1::default();
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = [rnd(), rnd()];
            let t = rnd();
            let (ut, ux, uy, lu) = fd_check(Example1::u, x, t);
            let (_, px, py, lp) = fd_check(Example1::phi, x, t);
            assert!((ut - Example1::u_t(x, t)).abs() < 1e-6);
            let q = Example1::q(x, t);
            assert!((q[0] + ux).abs() < 1e-6 && (q[1] + uy).abs() < 1e-6);
            let p = Example1::p(x, t);
            assert!((p[0] + px).abs() < 1e-6 && (p[1] + py).abs() < 1e-6);
            assert!((lu - Example1::laplace_u(x, t)).abs() < 1e-5);
            assert!((lp - Example1::laplace_phi(x, t)).abs() < 1e-5);
            // ∇·(u∇φ) from differences of the flux u∇φ
            let h = 1e-5;
            let flux = |y: Point| {
                let u = Example1::u(y, t);
                let p = Example1::p(y, t);
                [-u * p[0], -u * p[1]]
            };
            let div = (flux([x[0] + h, x[1]])[0] - flux([x[0] - h, x[1]])[0]) / (2.0 * h)
                + (flux([x[0], x[1] + h])[1] - flux([x[0], x[1] - h])[1]) / (2.0 * h);
            assert!((div - Example1::drift_divergence(x, t)).abs() < 1e-6);
            let f2 = -ex.eps * lp + Example1::u(x, t);
            assert!((f2 - ex.f2(x, t)).abs() < 1e-5);
        }
    }

    #[test]
    fn sources_at_time_zero() {
        let ex = Example1::default();
        let x: Point = [0.3, 0.7];
        let s = x[0].sin() * x[1].cos();
        assert!((ex.f2(x, 0.0) - s).abs() < 1e-15);
        assert!((Example1::f1(x, 0.0) - 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn example2_data() {
        assert_eq!(Example2::f2([0.25, 0.75]), -0.8);
        assert_eq!(Example2::f2([0.75, 0.25]), 0.8);
        assert!((Example2::u0([0.25, 0.75]) - 0.1).abs() < 1e-15);
        assert!((Example2::u0([0.75, 0.75]) - 0.9).abs() < 1e-15);
        let m = Example2::mesh(4).unwrap();
        // bottom edge: 4 faces, top contact: the face [0, 0.25]
        assert_eq!(m.count_tag(BoundaryTag::Dirichlet), 5);
        assert_eq!(m.count_tag(BoundaryTag::Neumann), 11);
    }

    #[test]
    fn zero_field_error_closed_form() {
        let m = build_structured_unit_square(4).unwrap();
        let z = CoefficientField::zeros(m.num_elements(), 2, 1);
        let e = l2_error_scalar(&m, &z, |x| x[0].sin() * x[1].cos());
        let s2 = 2f64.sin() / 4.0;
        let want = ((0.5 - s2) * (0.5 + s2)).sqrt();
        assert!((e - want).abs() < 1e-12, "{e} vs {want}");
    }

    #[test]
    fn rates_of_exact_halving() {
        let r = observed_orders(&[0.4, 0.2, 0.1], &[4e-2, 2e-2, 1e-2]).unwrap();
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(observed_orders(&[0.4, 0.3], &[1.0, 0.5]).is_err());
    }
}
