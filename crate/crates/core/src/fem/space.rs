//! Continuous Lagrange spaces on triangulations.

use super::basis::n_local_nodes;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Cached affine map data for one triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    /// Inverse-transpose Jacobian: maps reference gradients to physical ones.
    pub inv_jt: [[f64; 2]; 2],
    /// Jacobian determinant (twice the area, positive for CCW triangles).
    pub det: f64,
}

impl TriangleGeometry {
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_jt[0][0] * g[0] + self.inv_jt[0][1] * g[1],
            self.inv_jt[1][0] * g[0] + self.inv_jt[1][1] * g[1],
        ]
    }
}

/// Scalar or two-component vector Lagrange space of degree 1, 2 or 3.
///
/// Nodes are numbered vertices first, then edge nodes, then cell interiors;
/// vector degrees of freedom interleave the components of a node.
#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    components: usize,
    n_nodes: usize,
    node_coords: Vec<[f64; 2]>,
    dof_map: Vec<Vec<usize>>,
    boundary_nodes: BTreeMap<i32, Vec<usize>>,
    geometry: Vec<TriangleGeometry>,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize, components: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::InvalidArgument(format!("unsupported element degree {degree}")));
        }
        if !(1..=2).contains(&components) {
            return Err(Error::InvalidArgument(format!("unsupported component count {components}")));
        }
        let topo = mesh.edge_topology();
        let n_vertices = mesh.n_vertices();
        let n_edges = topo.edges.len();
        let per_edge = degree - 1;
        let interior = if degree == 3 { 1 } else { 0 };
        let n_nodes = n_vertices + n_edges * per_edge + interior * mesh.n_triangles();

        let mut node_coords = mesh.vertices().to_vec();
        for edge in &topo.edges {
            let (a, b) = (mesh.vertices()[edge[0]], mesh.vertices()[edge[1]]);
            for s in 0..per_edge {
                let frac = (s + 1) as f64 / degree as f64;
                node_coords
                    .push([a[0] + (b[0] - a[0]) * frac, a[1] + (b[1] - a[1]) * frac]);
            }
        }
        if interior == 1 {
            for t in 0..mesh.n_triangles() {
                let [a, b, c] = mesh.triangle_vertices(t);
                node_coords.push([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
            }
        }

        // per-triangle node list following the reference ordering
        let n_local = n_local_nodes(degree);
        let mut dof_map = Vec::with_capacity(mesh.n_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut nodes = Vec::with_capacity(n_local);
            nodes.extend_from_slice(tri);
            if per_edge > 0 {
                for (e, (p, q)) in
                    [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])].into_iter().enumerate()
                {
                    let edge_id = topo.triangle_edges[t][e];
                    for s in 0..per_edge {
                        // edge slots run from the lower-numbered vertex
                        let slot = if p < q { s } else { per_edge - 1 - s };
                        nodes.push(n_vertices + edge_id * per_edge + slot);
                    }
                }
            }
            if interior == 1 {
                nodes.push(n_vertices + n_edges * per_edge + t);
            }
            let mut dofs = Vec::with_capacity(n_local * components);
            for node in nodes {
                for c in 0..components {
                    dofs.push(node * components + c);
                }
            }
            dof_map.push(dofs);
        }

        // boundary nodes per marker
        let mut boundary_nodes: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (v, &m) in mesh.boundary_markers().iter().enumerate() {
            if m != 0 {
                boundary_nodes.entry(m).or_default().push(v);
            }
        }
        if per_edge > 0 {
            for (e, edge) in topo.edges.iter().enumerate() {
                if topo.edge_triangle_count[e] != 1 {
                    continue;
                }
                let (ma, mb) =
                    (mesh.boundary_markers()[edge[0]], mesh.boundary_markers()[edge[1]]);
                // at marker junctions the more specific (larger) marker wins
                let marker = ma.max(mb);
                let bucket = boundary_nodes.entry(marker).or_default();
                for s in 0..per_edge {
                    bucket.push(n_vertices + e * per_edge + s);
                }
            }
        }
        for nodes in boundary_nodes.values_mut() {
            nodes.sort_unstable();
        }

        let geometry = (0..mesh.n_triangles())
            .map(|t| {
                let [a, b, c] = mesh.triangle_vertices(t);
                let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let inv_jt = [
                    [j[1][1] / det, -j[1][0] / det],
                    [-j[0][1] / det, j[0][0] / det],
                ];
                TriangleGeometry { inv_jt, det }
            })
            .collect();

        Ok(FunctionSpace {
            mesh,
            degree,
            components,
            n_nodes,
            node_coords,
            dof_map,
            boundary_nodes,
            geometry,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.components
    }

    pub fn n_local_nodes(&self) -> usize {
        n_local_nodes(self.degree)
    }

    /// Coordinates of a scalar node.
    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        self.node_coords[node]
    }

    /// Global dofs of triangle `t`, components interleaved per node.
    pub fn dofs(&self, t: usize) -> &[usize] {
        &self.dof_map[t]
    }

    /// Global scalar node ids of triangle `t` in local order.
    pub fn triangle_nodes(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.dof_map[t].iter().step_by(self.components).map(move |d| d / self.components)
    }

    pub fn geometry(&self, t: usize) -> &TriangleGeometry {
        &self.geometry[t]
    }

    pub fn markers(&self) -> impl Iterator<Item = i32> + '_ {
        self.boundary_nodes.keys().copied()
    }

    pub fn has_marker(&self, marker: i32) -> bool {
        self.boundary_nodes.contains_key(&marker)
    }

    /// Boundary nodes attached to `marker`.
    pub fn boundary_nodes(&self, marker: i32) -> Result<&[usize]> {
        self.boundary_nodes
            .get(&marker)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown boundary marker {marker}")))
    }

    /// All dofs attached to `marker` (both components for vector spaces).
    pub fn boundary_dofs(&self, marker: i32) -> Result<Vec<usize>> {
        let nodes = self.boundary_nodes(marker)?;
        let mut dofs = Vec::with_capacity(nodes.len() * self.components);
        for &n in nodes {
            for c in 0..self.components {
                dofs.push(n * self.components + c);
            }
        }
        Ok(dofs)
    }

    /// Physical coordinates of a barycentric point inside triangle `t`.
    pub fn physical_point(&self, t: usize, l: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.mesh.triangle_vertices(t);
        [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
        ]
    }
}
