//! Conforming triangulations of the computational domains.
//!
//! A [`Mesh`] stores vertex coordinates, counterclockwise triangle
//! connectivity, per-vertex boundary markers (0 = interior) and cached
//! element areas. Construction validates orientation, boundary marking and
//! vertex distinctness; the type is immutable afterwards and safe to share
//! across threads.

mod generate;
mod io;

pub use generate::{
    generate_channel_cylinder_mesh, generate_offset_annulus_mesh, generate_rectangle_mesh,
};
pub use io::{export_mesh, import_mesh};

use crate::error::{Error, Result};

/// Immutable two-dimensional triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_markers: Vec<i32>,
    areas: Vec<f64>,
    domain_area: f64,
}

/// Edge-based connectivity derived from a mesh.
///
/// Edges are numbered in order of first appearance while scanning triangles,
/// which makes the numbering deterministic for a fixed mesh.
#[derive(Debug, Clone)]
pub struct EdgeTopology {
    /// Unique undirected edges as `[min_vertex, max_vertex]`.
    pub edges: Vec<[usize; 2]>,
    /// Per-triangle edge ids for local edges (v0,v1), (v1,v2), (v2,v0).
    pub triangle_edges: Vec<[usize; 3]>,
    /// Number of triangles sharing each edge (1 = boundary edge).
    pub edge_triangle_count: Vec<u8>,
}

/// Element-size summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub min_edge: f64,
    pub max_edge: f64,
    pub min_area: f64,
    pub max_area: f64,
    pub n_elements: usize,
}

impl Mesh {
    /// Builds a mesh from raw arrays and validates every structural invariant.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_markers: Vec<i32>,
    ) -> Result<Self> {
        if boundary_markers.len() != vertices.len() {
            return Err(Error::MeshValidation(format!(
                "{} boundary markers for {} vertices",
                boundary_markers.len(),
                vertices.len()
            )));
        }
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::MeshValidation("mesh has no vertices or no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::MeshValidation(format!(
                        "triangle {t} references vertex {v} but there are only {} vertices",
                        vertices.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::MeshValidation(format!("triangle {t} has repeated vertices")));
            }
        }

        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let s = signed_area(&vertices, tri);
            if s <= 0.0 {
                return Err(Error::MeshValidation(format!(
                    "triangle {t} has non-positive signed area {s:e} (clockwise or degenerate)"
                )));
            }
            areas.push(s);
        }
        let domain_area = areas.iter().sum();

        let mesh = Mesh { vertices, triangles, boundary_markers, areas, domain_area };

        // Boundary edges must join two marked vertices, and every marked
        // vertex must lie on at least one boundary edge.
        let topo = mesh.edge_topology();
        let mut on_boundary = vec![false; mesh.vertices.len()];
        for (e, edge) in topo.edges.iter().enumerate() {
            if topo.edge_triangle_count[e] == 1 {
                for &v in edge {
                    on_boundary[v] = true;
                    if mesh.boundary_markers[v] == 0 {
                        return Err(Error::MeshValidation(format!(
                            "boundary edge ({}, {}) has unmarked vertex {v}",
                            edge[0], edge[1]
                        )));
                    }
                }
            } else if topo.edge_triangle_count[e] > 2 {
                return Err(Error::MeshValidation(format!(
                    "edge ({}, {}) is shared by more than two triangles",
                    edge[0], edge[1]
                )));
            }
        }
        for (v, &m) in mesh.boundary_markers.iter().enumerate() {
            if m != 0 && !on_boundary[v] {
                return Err(Error::MeshValidation(format!(
                    "vertex {v} is marked {m} but lies on no boundary edge"
                )));
            }
        }

        mesh.check_duplicate_vertices(&topo)?;
        Ok(mesh)
    }

    fn check_duplicate_vertices(&self, topo: &EdgeTopology) -> Result<()> {
        let min_edge = topo
            .edges
            .iter()
            .map(|e| dist(self.vertices[e[0]], self.vertices[e[1]]))
            .fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * min_edge;
        // Sweep along x so only nearby vertices are compared.
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        for i in 0..order.len() {
            let vi = self.vertices[order[i]];
            for &oj in order[i + 1..].iter() {
                let vj = self.vertices[oj];
                if vj[0] - vi[0] > tol {
                    break;
                }
                if dist(vi, vj) <= tol {
                    return Err(Error::MeshValidation(format!(
                        "vertices {} and {} coincide within tolerance",
                        order[i], oj
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_markers(&self) -> &[i32] {
        &self.boundary_markers
    }

    /// Cached area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn domain_area(&self) -> f64 {
        self.domain_area
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Corner coordinates of triangle `t`.
    pub fn triangle_vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    /// Enumerates unique edges and the per-triangle edge map.
    pub fn edge_topology(&self) -> EdgeTopology {
        let mut lookup = std::collections::HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangle_count = Vec::new();
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for tri in &self.triangles {
            let mut ids = [0usize; 3];
            for (k, (a, b)) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
                .into_iter()
                .enumerate()
            {
                let key = if a < b { (a, b) } else { (b, a) };
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangle_count.push(0u8);
                    edges.len() - 1
                });
                edge_triangle_count[id] += 1;
                ids[k] = id;
            }
            triangle_edges.push(ids);
        }
        EdgeTopology { edges, triangle_edges, edge_triangle_count }
    }

    /// Markers recomputed from connectivity: 1 for every vertex incident to a
    /// boundary edge, 0 elsewhere. Used to cross-check stored markers.
    pub fn boundary_flags(&self) -> Vec<bool> {
        let topo = self.edge_topology();
        let mut flags = vec![false; self.vertices.len()];
        for (e, edge) in topo.edges.iter().enumerate() {
            if topo.edge_triangle_count[e] == 1 {
                flags[edge[0]] = true;
                flags[edge[1]] = true;
            }
        }
        flags
    }

    pub fn stats(&self) -> MeshStats {
        let topo = self.edge_topology();
        let mut min_edge = f64::INFINITY;
        let mut max_edge = 0.0f64;
        for e in &topo.edges {
            let len = dist(self.vertices[e[0]], self.vertices[e[1]]);
            min_edge = min_edge.min(len);
            max_edge = max_edge.max(len);
        }
        let mut min_area = f64::INFINITY;
        let mut max_area = 0.0f64;
        for &a in &self.areas {
            min_area = min_area.min(a);
            max_area = max_area.max(a);
        }
        MeshStats { min_edge, max_edge, min_area, max_area, n_elements: self.triangles.len() }
    }
}

fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
