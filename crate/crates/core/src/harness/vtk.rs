//! Legacy VTK 3.0 ASCII unstructured grids with cell data, and a minimal
//! reader for the same subset.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// Named cell fields to write.
#[derive(Debug, Clone, Default)]
pub struct CellData<'a> {
    pub scalars: Vec<(&'a str, &'a [f64])>,
    pub vectors: Vec<(&'a str, &'a [Point])>,
}

/// Numbers use Rust's shortest round-trip formatting so re-reading is exact.
pub fn write_vtk(mesh: &Mesh, title: &str, data: &CellData<'_>, mut w: impl Write) -> Result<()> {
    let ne = mesh.num_elements();
    for (name, v) in &data.scalars {
        if v.len() != ne {
            return Err(Error::Dimension(format!(
                "cell field {name} has {} values for {ne} cells",
                v.len()
            )));
        }
    }
    for (name, v) in &data.vectors {
        if v.len() != ne {
            return Err(Error::Dimension(format!(
                "cell field {name} has {} values for {ne} cells",
                v.len()
            )));
        }
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} 0", v.x, v.y)?;
    }
    writeln!(w, "CELLS {} {}", ne, 4 * ne)?;
    for e in &mesh.elements {
        writeln!(w, "3 {} {} {}", e.vertices[0], e.vertices[1], e.vertices[2])?;
    }
    writeln!(w, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(w, "5")?;
    }
    if data.scalars.is_empty() && data.vectors.is_empty() {
        return Ok(());
    }
    writeln!(w, "CELL_DATA {ne}")?;
    for (name, v) in &data.scalars {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for x in v.iter() {
            writeln!(w, "{x}")?;
        }
    }
    for (name, v) in &data.vectors {
        writeln!(w, "VECTORS {name} double")?;
        for x in v.iter() {
            writeln!(w, "{} {} 0", x[0], x[1])?;
        }
    }
    Ok(())
}

pub fn write_vtk_file(
    mesh: &Mesh,
    title: &str,
    data: &CellData<'_>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_vtk(mesh, title, data, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Contents of a file written by [`write_vtk`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkData {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<[usize; 3]>,
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

pub fn read_vtk(text: &str) -> Result<VtkData> {
    let bad = |m: &str| Error::Config(format!("vtk: {m}"));
    let mut lines = text.lines();
    let mut out = VtkData::default();
    if lines.next() != Some("# vtk DataFile Version 3.0") {
        return Err(bad("missing version line"));
    }
    out.title = lines
        .next()
        .ok_or_else(|| bad("missing title"))?
        .to_string();
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(&format!("bad number {s:?}")))
    };
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(&format!("bad integer {s:?}")))
    };
    if next()? != "ASCII" || next()? != "DATASET" || next()? != "UNSTRUCTURED_GRID" {
        return Err(bad("expected ASCII unstructured grid"));
    }
    let mut ncells = 0;
    while let Ok(kw) = next() {
        match kw {
            "POINTS" => {
                let n = int(next()?)?;
                next()?;
                for _ in 0..n {
                    out.points
                        .push([num(next()?)?, num(next()?)?, num(next()?)?]);
                }
            }
            "CELLS" => {
                ncells = int(next()?)?;
                next()?;
                for _ in 0..ncells {
                    if int(next()?)? != 3 {
                        return Err(bad("only triangles are supported"));
                    }
                    out.cells
                        .push([int(next()?)?, int(next()?)?, int(next()?)?]);
                }
            }
            "CELL_TYPES" => {
                let n = int(next()?)?;
                for _ in 0..n {
                    if int(next()?)? != 5 {
                        return Err(bad("cell type other than 5"));
                    }
                }
            }
            "CELL_DATA" => {
                if int(next()?)? != ncells {
                    return Err(bad("CELL_DATA count differs from cell count"));
                }
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                next()?;
                if next()? != "LOOKUP_TABLE" {
                    return Err(bad("expected LOOKUP_TABLE"));
                }
                next()?;
                let v = (0..ncells)
                    .map(|_| num(next()?))
                    .collect::<Result<Vec<_>>>()?;
                out.scalars.insert(name, v);
            }
            "VECTORS" => {
                let name = next()?.to_string();
                next()?;
                let v = (0..ncells)
                    .map(|_| Ok([num(next()?)?, num(next()?)?, num(next()?)?]))
                    .collect::<Result<Vec<_>>>()?;
                out.vectors.insert(name, v);
            }
            other => return Err(bad(&format!("unexpected keyword {other:?}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_unit_square;

    #[test]
    fn two_triangles_round_trip() {
        let m = build_structured_unit_square(1).unwrap();
        let s = [0.1, 1.0 / 3.0];
        let v = [[1.0, -2.5e-17], [0.0, 7.0]];
        let data = CellData {
            scalars: vec![("u", &s)],
            vectors: vec![("p", &v)],
        };
        let mut buf = Vec::new();
        write_vtk(&m, "test", &data, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 4 double"));
        let r = read_vtk(&text).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert_eq!(r.scalars["u"], s.to_vec());
        assert_eq!(r.vectors["p"][0], [1.0, -2.5e-17, 0.0]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let m = build_structured_unit_square(1).unwrap();
        let s = [0.1];
        let data = CellData {
            scalars: vec![("u", &s)],
            vectors: vec![],
        };
        assert!(write_vtk(&m, "t", &data, Vec::new()).is_err());
    }
}
