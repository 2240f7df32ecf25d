//! ASCII mesh file format.
//!
//! ```text
//! mesh2d <n_vertices> <n_triangles>
//! x y marker            (n_vertices lines)
//! i j k                 (n_triangles lines, 0-based)
//! ```
//!
//! Lines starting with `#` are comments. Fields are whitespace-separated and
//! decimal formatting is locale-independent.

use super::Mesh;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Serializes a mesh; coordinates round-trip bit-exactly through
/// [`import_mesh`].
pub fn export_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mesh2d {} {}", mesh.n_vertices(), mesh.n_triangles());
    for (v, &[x, y]) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{:.16e} {:.16e} {}", x, y, mesh.boundary_markers()[v]);
    }
    for tri in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", tri[0], tri[1], tri[2]);
    }
    out
}

/// Parses the ASCII format and validates all mesh invariants. Errors carry
/// 1-based line numbers.
pub fn import_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::MeshParse { line: 1, message: "empty file".into() })?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("mesh2d") {
        return Err(Error::MeshParse {
            line: line_no,
            message: "expected header 'mesh2d <n_vertices> <n_triangles>'".into(),
        });
    }
    let n_vertices = parse_field::<usize>(fields.next(), line_no, "vertex count")?;
    let n_triangles = parse_field::<usize>(fields.next(), line_no, "triangle count")?;

    let mut vertices = Vec::with_capacity(n_vertices);
    let mut markers = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (line_no, line) = lines.next().ok_or(Error::MeshParse {
            line: line_no,
            message: format!("expected {n_vertices} vertex lines"),
        })?;
        let mut fields = line.split_whitespace();
        let x = parse_field::<f64>(fields.next(), line_no, "x coordinate")?;
        let y = parse_field::<f64>(fields.next(), line_no, "y coordinate")?;
        let marker = parse_field::<i32>(fields.next(), line_no, "boundary marker")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::MeshParse { line: line_no, message: "non-finite coordinate".into() });
        }
        vertices.push([x, y]);
        markers.push(marker);
    }

    let mut triangles = Vec::with_capacity(n_triangles);
    for _ in 0..n_triangles {
        let (line_no, line) = lines.next().ok_or(Error::MeshParse {
            line: line_no,
            message: format!("expected {n_triangles} triangle lines"),
        })?;
        let mut fields = line.split_whitespace();
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            *slot = parse_field::<usize>(fields.next(), line_no, "vertex index")?;
            if *slot >= n_vertices {
                return Err(Error::MeshParse {
                    line: line_no,
                    message: format!("vertex index {} out of range 0..{n_vertices}", slot),
                });
            }
        }
        triangles.push(tri);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::MeshParse { line: line_no, message: "trailing content".into() });
    }
    Mesh::new(vertices, triangles, markers)
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let raw = field.ok_or_else(|| Error::MeshParse { line, message: format!("missing {what}") })?;
    raw.parse().map_err(|_| Error::MeshParse { line, message: format!("invalid {what} '{raw}'") })
}
