//! Conforming triangulations of planar polygons.
//!
//! Elements are stored counterclockwise. Local face `j` of an element runs
//! from local vertex `j` to local vertex `j+1 (mod 3)`. Every face is stored
//! once with its vertex pair sorted ascending; that ordering defines the global
//! face parameter `s ∈ [0, 1]` used by all trace unknowns.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

/// A counterclockwise triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub vertices: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// One element side of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub element: usize,
    pub local_face: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Sorted ascending; the face parameter runs from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    /// One entry for boundary faces, two for interior faces.
    pub sides: Vec<FaceSide>,
    pub tag: BoundaryTag,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.sides.len() == 1
    }
}

/// Affine element data. The map is `x = origin + J ξ` from the reference
/// triangle `{(0,0), (1,0), (0,1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub origin: Point,
    /// Column-major: `jacobian[c]` is column `c`.
    pub jacobian: [[f64; 2]; 2],
    /// Row-major inverse Jacobian.
    pub inverse_jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    pub normals: [Point; 3],
    pub face_lengths: [f64; 3],
    /// Longest edge.
    pub diameter: f64,
}

impl ElementGeometry {
    pub fn from_points(p: [Point; 3]) -> Option<Self> {
        let c0 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let c1 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        let scale = (c0[0].hypot(c0[1]) * c1[0].hypot(c1[1])).max(f64::MIN_POSITIVE);
        if !det.is_finite() || det.abs() <= 1e-14 * scale {
            return None;
        }
        let inverse_jacobian = [[c1[1] / det, -c1[0] / det], [-c0[1] / det, c0[0] / det]];
        let mut normals = [[0.0; 2]; 3];
        let mut face_lengths = [0.0; 3];
        let sign = det.signum();
        for j in 0..3 {
            let a = p[j];
            let b = p[(j + 1) % 3];
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = d[0].hypot(d[1]);
            face_lengths[j] = len;
            normals[j] = [sign * d[1] / len, -sign * d[0] / len];
        }
        let diameter = face_lengths.iter().cloned().fold(0.0, f64::max);
        Some(Self {
            origin: p[0],
            jacobian: [c0, c1],
            inverse_jacobian,
            det,
            area: 0.5 * det.abs(),
            normals,
            face_lengths,
            diameter,
        })
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    /// Reference to physical.
    pub fn map(&self, xi: Point) -> Point {
        let [c0, c1] = self.jacobian;
        [
            self.origin[0] + c0[0] * xi[0] + c1[0] * xi[1],
            self.origin[1] + c0[1] * xi[0] + c1[1] * xi[1],
        ]
    }

    /// Physical to reference.
    pub fn inverse_map(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let g = self.inverse_jacobian;
        [
            g[0][0] * d[0] + g[0][1] * d[1],
            g[1][0] * d[0] + g[1][1] * d[1],
        ]
    }

    /// Maps a reference gradient to the physical gradient, `J^{-T} ĝ`.
    #[inline]
    pub fn physical_gradient(&self, g: Point) -> Point {
        let m = self.inverse_jacobian;
        [
            m[0][0] * g[0] + m[1][0] * g[1],
            m[0][1] * g[0] + m[1][1] * g[1],
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Global face id of each local face.
    pub element_faces: Vec<[usize; 3]>,
    /// Whether local face `j` runs in the same direction as the global face parameter.
    pub face_aligned: Vec<[bool; 3]>,
    geometry: Vec<ElementGeometry>,
    h_max: f64,
}

impl Mesh {
    /// Builds the face topology from a raw triangle list. Clockwise triangles
    /// are reoriented; boundary faces start out Dirichlet.
    pub fn from_triangles(vertices: Vec<Vertex>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no elements".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "vertex {i} has non-finite coordinates"
                )));
            }
        }
        let mut elements = Vec::with_capacity(triangles.len());
        let mut geometry = Vec::with_capacity(triangles.len());
        for (e, tri) in triangles.into_iter().enumerate() {
            let mut tri = tri;
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("element {e} repeats a vertex")));
            }
            let pts = tri.map(|v| vertices[v].point());
            let g = ElementGeometry::from_points(pts).ok_or(Error::DegenerateElement {
                element: e,
                det: 0.0,
            })?;
            let g = if g.det < 0.0 {
                tri.swap(1, 2);
                ElementGeometry::from_points(tri.map(|v| vertices[v].point())).unwrap()
            } else {
                g
            };
            elements.push(Element { vertices: tri });
            geometry.push(g);
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_faces = Vec::with_capacity(elements.len());
        let mut face_aligned = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            let mut ids = [0; 3];
            let mut aligned = [true; 3];
            for j in 0..3 {
                let a = el.vertices[j];
                let b = el.vertices[(j + 1) % 3];
                let key = (a.min(b), a.max(b));
                let side = FaceSide {
                    element: e,
                    local_face: j,
                };
                let id = match lookup.get(&key) {
                    Some(&id) => {
                        if faces[id].sides.len() >= 2 {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({}, {}) shared by more than two elements",
                                key.0, key.1
                            )));
                        }
                        faces[id].sides.push(side);
                        faces[id].tag = BoundaryTag::Interior;
                        id
                    }
                    None => {
                        faces.push(Face {
                            vertices: [key.0, key.1],
                            sides: vec![side],
                            tag: BoundaryTag::Dirichlet,
                        });
                        lookup.insert(key, faces.len() - 1);
                        faces.len() - 1
                    }
                };
                ids[j] = id;
                aligned[j] = a == key.0;
            }
            element_faces.push(ids);
            face_aligned.push(aligned);
        }
        let h_max = geometry.iter().map(|g| g.diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            elements,
            faces,
            element_faces,
            face_aligned,
            geometry,
            h_max,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.diameter)
            .fold(f64::INFINITY, f64::min)
    }

    /// `max h_K / min h_K`.
    pub fn quasi_uniformity(&self) -> f64 {
        self.h_max / self.h_min()
    }

    pub fn element_diameters(&self) -> Vec<f64> {
        self.geometry.iter().map(|g| g.diameter).collect()
    }

    pub fn geometry(&self, element: usize) -> &ElementGeometry {
        &self.geometry[element]
    }

    /// Geometry of one element, recomputed from its vertices.
    pub fn compute_geometry(&self, element: usize) -> Result<ElementGeometry> {
        let el = self
            .elements
            .get(element)
            .ok_or_else(|| Error::InvalidMesh(format!("no element {element}")))?;
        let pts = el.vertices.map(|v| self.vertices[v].point());
        ElementGeometry::from_points(pts).ok_or(Error::DegenerateElement { element, det: 0.0 })
    }

    pub fn element_points(&self, element: usize) -> [Point; 3] {
        self.elements[element]
            .vertices
            .map(|v| self.vertices[v].point())
    }

    pub fn face_points(&self, face: usize) -> [Point; 2] {
        self.faces[face].vertices.map(|v| self.vertices[v].point())
    }

    pub fn face_length(&self, face: usize) -> f64 {
        let [a, b] = self.face_points(face);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn face_midpoint(&self, face: usize) -> Point {
        let [a, b] = self.face_points(face);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Physical point at face parameter `s`.
    pub fn face_point(&self, face: usize, s: f64) -> Point {
        let [a, b] = self.face_points(face);
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_boundary())
            .map(|(i, _)| i)
    }

    pub fn count_tag(&self, tag: BoundaryTag) -> usize {
        self.faces.iter().filter(|f| f.tag == tag).count()
    }

    /// Retags boundary faces. The predicate receives the face midpoint and its
    /// two end points; interior faces are never touched.
    pub fn tag_boundary<F>(&self, predicate: F) -> Result<Mesh>
    where
        F: Fn(Point, [Point; 2]) -> BoundaryTag,
    {
        let mut out = self.clone();
        for id in 0..out.faces.len() {
            if !out.faces[id].is_boundary() {
                continue;
            }
            let tag = predicate(self.face_midpoint(id), self.face_points(id));
            if tag == BoundaryTag::Interior {
                return Err(Error::InteriorTagOnBoundary(id));
            }
            out.faces[id].tag = tag;
        }
        Ok(out)
    }

    /// Splits every triangle into four congruent children through its edge
    /// midpoints. Child boundary faces inherit the tag of their parent face.
    pub fn refine_uniform(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vertex>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(Vertex::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y)));
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.elements.len());
        for el in &self.elements {
            let [a, b, c] = el.vertices;
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut child_tags: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for face in self.faces.iter().filter(|f| f.is_boundary()) {
            let [a, b] = face.vertices;
            let m = midpoint[&(a, b)];
            child_tags.insert((a.min(m), a.max(m)), face.tag);
            child_tags.insert((b.min(m), b.max(m)), face.tag);
        }
        let mut fine =
            Mesh::from_triangles(vertices, triangles).expect("refinement of a valid mesh is valid");
        for face in fine.faces.iter_mut().filter(|f| f.sides.len() == 1) {
            let key = (face.vertices[0], face.vertices[1]);
            face.tag = child_tags[&key];
        }
        fine
    }

    /// Parses `nv ne`, then `nv` lines `x y`, then `ne` lines `v0 v1 v2` (0-based).
    pub fn parse_text(text: &str) -> Result<Mesh> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<&str> {
            tokens.next().ok_or_else(|| {
                Error::InvalidMesh(format!("unexpected end of input reading {what}"))
            })
        };
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::InvalidMesh(format!("bad integer {s:?}: {e}")))
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidMesh(format!("bad coordinate {s:?}: {e}")))
        };
        let nv = parse_usize(next("vertex count")?)?;
        let ne = parse_usize(next("element count")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x = parse_f64(next("x")?)?;
            let y = parse_f64(next("y")?)?;
            vertices.push(Vertex::new(x, y));
        }
        let mut triangles = Vec::with_capacity(ne);
        for _ in 0..ne {
            let a = parse_usize(next("v0")?)?;
            let b = parse_usize(next("v1")?)?;
            let c = parse_usize(next("v2")?)?;
            triangles.push([a, b, c]);
        }
        if tokens.next().is_some() {
            return Err(Error::InvalidMesh(
                "trailing tokens after element list".into(),
            ));
        }
        Mesh::from_triangles(vertices, triangles)
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {}", self.vertices.len(), self.elements.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{} {}", v.x, v.y).unwrap();
        }
        for e in &self.elements {
            writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.vertices[2]).unwrap();
        }
        s
    }
}

/// `nx × ny` cells on `[x0, x1] × [y0, y1]`, each split along its
/// lower-left to upper-right diagonal. All boundary faces are Dirichlet.
pub fn build_structured_rectangle(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(
            "need at least one cell per direction".into(),
        ));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            let y = y0 + (y1 - y0) * j as f64 / ny as f64;
            vertices.push(Vertex::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Uniform mesh of the unit square with `h_max = √2 / n`.
pub fn build_structured_unit_square(n: usize) -> Result<Mesh> {
    build_structured_rectangle(0.0, 1.0, 0.0, 1.0, n, n)
}
