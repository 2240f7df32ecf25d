//! Lagrange basis functions of degree 1-3 on the reference triangle.
//!
//! Barycentric coordinates are (l0, l1, l2) with reference coordinates
//! xi = l1, eta = l2. Local node order: the three vertices, then the nodes of
//! edges (0,1), (1,2), (2,0) walking from the first vertex of the edge, then
//! the interior node (degree 3).

/// Maximum number of local nodes (degree 3).
pub const MAX_LOCAL_NODES: usize = 10;

pub fn n_local_nodes(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Barycentric coordinates of the local nodes.
pub fn reference_nodes(degree: usize) -> Vec<[f64; 3]> {
    let mut nodes = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let edges = [(0usize, 1usize), (1, 2), (2, 0)];
    match degree {
        1 => {}
        2 => {
            for (i, j) in edges {
                let mut n = [0.0; 3];
                n[i] = 0.5;
                n[j] = 0.5;
                nodes.push(n);
            }
        }
        3 => {
            for (i, j) in edges {
                for frac in [1.0 / 3.0, 2.0 / 3.0] {
                    let mut n = [0.0; 3];
                    n[i] = 1.0 - frac;
                    n[j] = frac;
                    nodes.push(n);
                }
            }
            nodes.push([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        }
        _ => panic!("unsupported degree {degree}"),
    }
    nodes
}

/// Basis values at a barycentric point; only the first
/// `n_local_nodes(degree)` entries are meaningful.
pub fn basis_values(degree: usize, l: [f64; 3]) -> [f64; MAX_LOCAL_NODES] {
    let mut phi = [0.0; MAX_LOCAL_NODES];
    match degree {
        1 => {
            phi[..3].copy_from_slice(&l);
        }
        2 => {
            for i in 0..3 {
                phi[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            phi[3] = 4.0 * l[0] * l[1];
            phi[4] = 4.0 * l[1] * l[2];
            phi[5] = 4.0 * l[2] * l[0];
        }
        3 => {
            for i in 0..3 {
                phi[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
            }
            let edges = [(0, 1), (1, 2), (2, 0)];
            for (e, (i, j)) in edges.into_iter().enumerate() {
                phi[3 + 2 * e] = 4.5 * l[i] * l[j] * (3.0 * l[i] - 1.0);
                phi[3 + 2 * e + 1] = 4.5 * l[i] * l[j] * (3.0 * l[j] - 1.0);
            }
            phi[9] = 27.0 * l[0] * l[1] * l[2];
        }
        _ => panic!("unsupported degree {degree}"),
    }
    phi
}

/// Basis gradients with respect to the reference coordinates (xi, eta).
pub fn basis_gradients(degree: usize, l: [f64; 3]) -> [[f64; 2]; MAX_LOCAL_NODES] {
    // gradients of the barycentric coordinates
    const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut dphi_dl = [[0.0; 3]; MAX_LOCAL_NODES];
    match degree {
        1 => {
            for i in 0..3 {
                dphi_dl[i][i] = 1.0;
            }
        }
        2 => {
            for i in 0..3 {
                dphi_dl[i][i] = 4.0 * l[i] - 1.0;
            }
            let edges = [(0, 1), (1, 2), (2, 0)];
            for (e, (i, j)) in edges.into_iter().enumerate() {
                dphi_dl[3 + e][i] = 4.0 * l[j];
                dphi_dl[3 + e][j] = 4.0 * l[i];
            }
        }
        3 => {
            for i in 0..3 {
                dphi_dl[i][i] = 0.5 * (27.0 * l[i] * l[i] - 18.0 * l[i] + 2.0);
            }
            let edges = [(0, 1), (1, 2), (2, 0)];
            for (e, (i, j)) in edges.into_iter().enumerate() {
                dphi_dl[3 + 2 * e][i] = 4.5 * l[j] * (6.0 * l[i] - 1.0);
                dphi_dl[3 + 2 * e][j] = 4.5 * l[i] * (3.0 * l[i] - 1.0);
                dphi_dl[3 + 2 * e + 1][i] = 4.5 * l[j] * (3.0 * l[j] - 1.0);
                dphi_dl[3 + 2 * e + 1][j] = 4.5 * l[i] * (6.0 * l[j] - 1.0);
            }
            dphi_dl[9][0] = 27.0 * l[1] * l[2];
            dphi_dl[9][1] = 27.0 * l[0] * l[2];
            dphi_dl[9][2] = 27.0 * l[0] * l[1];
        }
        _ => panic!("unsupported degree {degree}"),
    }
    let mut grad = [[0.0; 2]; MAX_LOCAL_NODES];
    for n in 0..n_local_nodes(degree) {
        for i in 0..3 {
            grad[n][0] += dphi_dl[n][i] * DL[i][0];
            grad[n][1] += dphi_dl[n][i] * DL[i][1];
        }
    }
    grad
}
