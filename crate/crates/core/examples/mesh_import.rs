//! Solves a Poisson problem on a triangulation read from a text file.
//!
//! ```text
//! cargo run --release --example mesh_import -- [mesh.txt]
//! ```
//!
//! The file lists `nv ne`, then `nv` lines `x y`, then `ne` lines of 0-based
//! vertex indices. Without an argument an L-shaped mesh is generated, written
//! to `out/lshape.txt` and read back. The boundary is Dirichlet everywhere.

use std::sync::Arc;

use ddhdg::manufactured::l2_error_scalar;
use ddhdg::mesh::Mesh;
use ddhdg::operators::Spaces;
use ddhdg::solver::{solve_poisson, Boundary, PoissonRhs};
use ddhdg::Point;

fn l_shape_text() -> String {
    // Three unit squares, each split into two triangles.
    let v = [
        [0.0, 0.0],
        [1.0, 0.0],
        [2.0, 0.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [2.0, 1.0],
        [0.0, 2.0],
        [1.0, 2.0],
    ];
    let t = [
        [0, 1, 4],
        [0, 4, 3],
        [1, 2, 5],
        [1, 5, 4],
        [3, 4, 7],
        [3, 7, 6],
    ];
    let mut s = format!("{} {}\n", v.len(), t.len());
    for p in v {
        s += &format!("{} {}\n", p[0], p[1]);
    }
    for c in t {
        s += &format!("{} {} {}\n", c[0], c[1], c[2]);
    }
    s
}

fn main() -> ddhdg::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            std::fs::create_dir_all("out")?;
            let p = std::path::PathBuf::from("out/lshape.txt");
            std::fs::write(&p, l_shape_text())?;
            p
        }
    };
    let mut mesh = Mesh::read_text(&path)?;
    for _ in 0..3 {
        mesh = mesh.refine_uniform();
    }
    println!(
        "{}: {} elements, {} faces, h = {:.4}, area = {}",
        path.display(),
        mesh.num_elements(),
        mesh.num_faces(),
        mesh.h_max(),
        mesh.total_area()
    );

    // -εΔφ = f with φ = sin(x) e^y.
    let eps = 0.5;
    let exact = |x: Point| x[0].sin() * x[1].exp();
    let f = |_: Point| 0.0;
    let mesh = Arc::new(mesh);
    let rhs = PoissonRhs {
        f2: &f,
        u: None,
        boundary: Boundary {
            dirichlet: &exact,
            neumann: None,
        },
    };
    for k in 0..=2 {
        let sol = solve_poisson(mesh.clone(), Arc::new(Spaces::new(k)?), eps, 1.0, &rhs)?;
        println!(
            "k = {k}: |phi - phi_h| = {:.3e}",
            l2_error_scalar(&mesh, &sol.phi, exact)
        );
    }
    Ok(())
}
