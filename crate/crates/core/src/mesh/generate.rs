//! Structured mesh generators for the benchmark domains.
//!
//! Curved boundaries are approximated by inscribed polygons. The annular and
//! channel domains are meshed from boundary rings connected by graded layers,
//! with a 1-to-2 band where the ring resolution doubles.

use super::Mesh;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Structured triangulation of `rect = [x0, y0, x1, y1]` with `nx` by `ny`
/// cells, each split along the (lower-left, upper-right) diagonal. Boundary
/// vertices are marked 1.
pub fn generate_rectangle_mesh(nx: usize, ny: usize, rect: [f64; 4]) -> Result<Mesh> {
    let [x0, y0, x1, y1] = rect;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!("cell counts must be positive, got {nx}x{ny}")));
    }
    if !(x1 > x0) || !(y1 > y0) {
        return Err(Error::InvalidArgument(format!(
            "rectangle [{x0}, {y0}, {x1}, {y1}] has non-positive width or height"
        )));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut markers = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y0 + (y1 - y0) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            vertices.push([x, y]);
            markers.push(if i == 0 || j == 0 || i == nx || j == ny { 1 } else { 0 });
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Mesh::new(vertices, triangles, markers)
}

/// Interval fractions that grow geometrically from `first` by `ratio` up to
/// `cap`, normalized to sum to one.
fn graded_fractions(first: f64, ratio: f64, cap: f64) -> Vec<f64> {
    let mut fractions = Vec::new();
    let mut h = first;
    let mut total = 0.0;
    while total < 1.0 {
        fractions.push(h);
        total += h;
        h = (h * ratio).min(cap);
    }
    for f in &mut fractions {
        *f /= total;
    }
    fractions
}

/// Cumulative ring parameters 0 = inner boundary, 1 = outer boundary.
fn cumulative(fractions: &[f64]) -> Vec<f64> {
    let mut t = Vec::with_capacity(fractions.len() + 1);
    t.push(0.0);
    let mut acc = 0.0;
    for &f in fractions {
        acc += f;
        t.push(acc);
    }
    *t.last_mut().unwrap() = 1.0;
    t
}

/// Connects two closed rings with the same vertex count, `inner` inside.
fn ring_band(triangles: &mut Vec<[usize; 3]>, inner: &[usize], outer: &[usize]) {
    let n = inner.len();
    debug_assert_eq!(n, outer.len());
    for k in 0..n {
        let k1 = (k + 1) % n;
        triangles.push([inner[k], outer[k], outer[k1]]);
        triangles.push([inner[k], outer[k1], inner[k1]]);
    }
}

/// Connects a closed `coarse` ring (n points) to a `fine` ring (2n points)
/// outside it; fine vertex 2k sits on the same ray as coarse vertex k.
fn transition_band(triangles: &mut Vec<[usize; 3]>, coarse: &[usize], fine: &[usize]) {
    let n = coarse.len();
    debug_assert_eq!(2 * n, fine.len());
    for k in 0..n {
        let k1 = (k + 1) % n;
        let (f0, f1, f2) = (fine[2 * k], fine[2 * k + 1], fine[(2 * k + 2) % (2 * n)]);
        triangles.push([coarse[k], f0, f1]);
        triangles.push([coarse[k], f1, coarse[k1]]);
        triangles.push([coarse[k1], f1, f2]);
    }
}

/// Polygonal approximation of the unit disk with an off-center hole of
/// radius 0.1 at (0.5, 0). At `refine = 0` the outer circle carries 60
/// vertices and the inner circle 30, with layers graded toward the hole.
/// Markers: 1 = outer circle, 2 = inner circle.
pub fn generate_offset_annulus_mesh(refine: usize) -> Result<Mesh> {
    let n_in = 30usize << refine;
    let n_out = 60usize << refine;
    let scale = (1u32 << refine) as f64;
    let fractions = graded_fractions(0.02 / scale, 1.4f64.powf(1.0 / scale), 0.09 / scale);
    let t = cumulative(&fractions);
    let n_layers = fractions.len();
    // Rings 0..=n_coarse keep the inner resolution, the rest are doubled.
    let n_coarse = (3usize << refine).min(n_layers - 1);

    let inner_point = |phi: f64| [0.5 + 0.1 * phi.cos(), 0.1 * phi.sin()];
    let outer_point = |phi: f64| [phi.cos(), phi.sin()];
    let blend = |phi: f64, s: f64| {
        let a = inner_point(phi);
        let b = outer_point(phi);
        [(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]]
    };

    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(n_layers + 1);
    for (ring, &s) in t.iter().enumerate() {
        let n = if ring <= n_coarse { n_in } else { n_out };
        let mut ids = Vec::with_capacity(n);
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            ids.push(vertices.len());
            vertices.push(blend(phi, s));
        }
        rings.push(ids);
    }

    let mut triangles = Vec::new();
    for ring in 0..n_layers {
        if rings[ring].len() == rings[ring + 1].len() {
            ring_band(&mut triangles, &rings[ring], &rings[ring + 1]);
        } else {
            transition_band(&mut triangles, &rings[ring], &rings[ring + 1]);
        }
    }

    let mut markers = vec![0; vertices.len()];
    for &v in &rings[0] {
        markers[v] = 2;
    }
    for &v in &rings[n_layers] {
        markers[v] = 1;
    }
    Mesh::new(vertices, triangles, markers)
}

/// Channel `[0, 2.2] x [0, 0.41]` with a polygonal hole approximating the
/// radius-0.05 disk centered at (0.2, 0.2); the polygon has `32 << refine`
/// sides. An O-grid graded toward the hole fills a square block around it and
/// a tensor background grid covers the rest. Markers: 1 = walls, 2 = inflow
/// (x = 0), 3 = outflow (x = 2.2), 4 = cylinder.
pub fn generate_channel_cylinder_mesh(refine: usize) -> Result<Mesh> {
    let n_c = 32usize << refine;
    let scale = (1u32 << refine) as f64;
    let (cx, cy, r, half) = (0.2, 0.2, 0.05, 0.15);
    let (width, height) = (2.2, 0.41);

    // Outer ring of the O-grid block: ray intersections with the square of
    // half-width `half` around the center. Offsets are computed for the first
    // octant only and mirrored with exact sign flips so opposite sides carry
    // bit-identical coordinates.
    let n8 = n_c / 8;
    let off: Vec<f64> = (0..=n8)
        .map(|i| if i == n8 { half } else { half * (2.0 * PI * i as f64 / n_c as f64).tan() })
        .collect();
    let mut box_ring_pts = Vec::with_capacity(n_c);
    for k in 0..n_c {
        let (q, i) = (k / n8, k % n8);
        let (dx, dy) = match q {
            0 => (half, off[i]),
            1 => (off[n8 - i], half),
            2 => (-off[i], half),
            3 => (-half, off[n8 - i]),
            4 => (-half, -off[i]),
            5 => (-off[n8 - i], -half),
            6 => (off[i], -half),
            _ => (half, -off[n8 - i]),
        };
        box_ring_pts.push([cx + dx, cy + dy]);
    }

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut pool: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut vertex = |p: [f64; 2], vertices: &mut Vec<[f64; 2]>| -> usize {
        *pool.entry((p[0].to_bits(), p[1].to_bits())).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };

    // O-grid rings from the cylinder polygon out to the box ring.
    let fractions = graded_fractions(0.098 / scale, 1.45f64.powf(1.0 / scale), 0.55);
    let t = cumulative(&fractions);
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for &s in &t {
        let mut ids = Vec::with_capacity(n_c);
        for k in 0..n_c {
            let theta = 2.0 * PI * k as f64 / n_c as f64;
            let a = [cx + r * theta.cos(), cy + r * theta.sin()];
            let b = box_ring_pts[k];
            let p = [(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]];
            ids.push(vertex(p, &mut vertices));
        }
        rings.push(ids);
    }
    let mut triangles = Vec::new();
    for ring in 0..rings.len() - 1 {
        ring_band(&mut triangles, &rings[ring], &rings[ring + 1]);
    }

    // Tensor partitions. Inside the block footprint they reuse the exact ray
    // coordinates so grid nodes coincide bit-exactly with the box ring.
    let (xl, xr, yb, yt) = (cx - half, cx + half, cy - half, cy + half);
    let mut box_xs: Vec<f64> =
        box_ring_pts.iter().filter(|p| p[1] == yb).map(|p| p[0]).collect();
    box_xs.sort_by(f64::total_cmp);
    let mut box_ys: Vec<f64> =
        box_ring_pts.iter().filter(|p| p[0] == xl).map(|p| p[1]).collect();
    box_ys.sort_by(f64::total_cmp);

    let mut xs = uniform_points(0.0, xl, 1 << refine);
    xs.extend_from_slice(&box_xs[1..]);
    xs.extend(graded_points(xr, width, 0.055 / scale, 1.12f64.powf(1.0 / scale), 0.1 / scale));
    let mut ys = uniform_points(0.0, yb, 1 << refine);
    ys.extend_from_slice(&box_ys[1..]);
    ys.extend(uniform_points(yt, height, 1 << refine)[1..].iter());

    let il = xs.iter().position(|&x| x == xl).unwrap();
    let ir = xs.iter().position(|&x| x == xr).unwrap();
    let jb = ys.iter().position(|&y| y == yb).unwrap();
    let jt = ys.iter().position(|&y| y == yt).unwrap();

    let grid: Vec<Vec<usize>> = ys
        .iter()
        .map(|&y| xs.iter().map(|&x| vertex([x, y], &mut vertices)).collect())
        .collect();
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            if i >= il && i < ir && j >= jb && j < jt {
                continue; // covered by the O-grid
            }
            let (v00, v10) = (grid[j][i], grid[j][i + 1]);
            let (v01, v11) = (grid[j + 1][i], grid[j + 1][i + 1]);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut markers = vec![0; vertices.len()];
    for (j, row) in grid.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            if j == 0 || j == ys.len() - 1 {
                markers[v] = 1;
            }
            if i == 0 {
                markers[v] = 2;
            } else if i == xs.len() - 1 {
                markers[v] = 3;
            }
        }
    }
    for &v in &rings[0] {
        markers[v] = 4;
    }
    Mesh::new(vertices, triangles, markers)
}

fn uniform_points(from: f64, to: f64, n: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..n {
        pts.push(from + (to - from) * i as f64 / n as f64);
    }
    pts.push(to);
    pts
}

/// Points of a graded partition of `[from, to]`, including both endpoints.
fn graded_points(from: f64, to: f64, first: f64, ratio: f64, cap: f64) -> Vec<f64> {
    let span = to - from;
    let fractions = graded_fractions(first / span, ratio, cap / span);
    cumulative(&fractions).into_iter().skip(1).map(|t| from + span * t).collect()
}
