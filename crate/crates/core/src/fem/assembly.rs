//! Assembly of the flow, Nitsche and transport forms.
//!
//! All matrices use the global numbering of [`DofMap`]. Cells are processed in
//! fixed-size chunks in parallel and the chunk buffers are concatenated in cell
//! order, so results do not depend on the number of worker threads.

use rayon::prelude::*;

use super::basis::{dot, p2_gradients, p2_values, CellGeometry};
use super::quadrature::{edge_bary, GAUSS3, TRI_DEG4};
use super::sparse::TripletMatrix;
use super::spaces::DofMap;
use crate::mesh::{BoundaryEdge, BoundaryTag, Mesh, Point};
use crate::params::{NitscheParams, PhysicalParams};

const CHUNK: usize = 256;

type Entries = Vec<(usize, usize, f64)>;

fn assemble_matrix<F>(n: usize, n_items: usize, f: F) -> TripletMatrix
where
    F: Fn(usize, &mut Entries) + Sync,
{
    let chunks: Vec<Entries> = (0..n_items.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut buf = Vec::new();
            for item in k * CHUNK..((k + 1) * CHUNK).min(n_items) {
                f(item, &mut buf);
            }
            buf
        })
        .collect();
    let mut t = TripletMatrix::new(n, n);
    t.entries.reserve(chunks.iter().map(Vec::len).sum());
    for c in chunks {
        t.entries.extend(c);
    }
    t
}

fn assemble_vector<F>(n: usize, n_items: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut Vec<(usize, f64)>) + Sync,
{
    let chunks: Vec<Vec<(usize, f64)>> = (0..n_items.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut buf = Vec::new();
            for item in k * CHUNK..((k + 1) * CHUNK).min(n_items) {
                f(item, &mut buf);
            }
            buf
        })
        .collect();
    let mut out = vec![0.0; n];
    for c in chunks {
        for (i, v) in c {
            out[i] += v;
        }
    }
    out
}

/// Velocity and its gradient at barycentric point `l` of cell `c`.
pub fn velocity_at(dofs: &DofMap, u: &[f64], c: usize, l: [f64; 3], g: &[[f64; 2]; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
    let nodes = dofs.cell_p2(c);
    let n = p2_values(l);
    let dn = p2_gradients(l, g);
    let mut w = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for k in 0..6 {
        for comp in 0..2 {
            let coef = u[dofs.velocity(comp, nodes[k])];
            w[comp] += coef * n[k];
            grad[comp][0] += coef * dn[k][0];
            grad[comp][1] += coef * dn[k][1];
        }
    }
    (w, grad)
}

fn velocity_value(dofs: &DofMap, u: &[f64], c: usize, l: [f64; 3]) -> [f64; 2] {
    let nodes = dofs.cell_p2(c);
    let n = p2_values(l);
    let mut w = [0.0; 2];
    for k in 0..6 {
        w[0] += u[dofs.velocity(0, nodes[k])] * n[k];
        w[1] += u[dofs.velocity(1, nodes[k])] * n[k];
    }
    w
}

/// `a(u, v) = mu * int grad u : grad v`.
pub fn viscous(mesh: &Mesh, dofs: &DofMap, mu: f64) -> TripletMatrix {
    assemble_matrix(dofs.n_flow(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let nodes = dofs.cell_p2(c);
        let mut k = [[0.0; 6]; 6];
        for q in &TRI_DEG4 {
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let w = q.weight * geo.area * mu;
            for i in 0..6 {
                for j in 0..6 {
                    k[i][j] += w * dot(g[i], g[j]);
                }
            }
        }
        for comp in 0..2 {
            for i in 0..6 {
                for j in 0..6 {
                    out.push((dofs.velocity(comp, nodes[i]), dofs.velocity(comp, nodes[j]), k[i][j]));
                }
            }
        }
    })
}

/// `b(v, p) + b(u, q)` with `b(v, q) = -int q div v`.
pub fn pressure_coupling(mesh: &Mesh, dofs: &DofMap) -> TripletMatrix {
    assemble_matrix(dofs.n_flow(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let nodes = dofs.cell_p2(c);
        let verts = dofs.cell_p1(c);
        let mut b = [[[0.0; 3]; 6]; 2];
        for q in &TRI_DEG4 {
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let w = q.weight * geo.area;
            for comp in 0..2 {
                for i in 0..6 {
                    for j in 0..3 {
                        b[comp][i][j] -= w * q.bary[j] * g[i][comp];
                    }
                }
            }
        }
        for comp in 0..2 {
            for i in 0..6 {
                let vi = dofs.velocity(comp, nodes[i]);
                for j in 0..3 {
                    let pj = dofs.pressure(verts[j]);
                    out.push((vi, pj, b[comp][i][j]));
                    out.push((pj, vi, b[comp][i][j]));
                }
            }
        }
    })
}

/// Stokes blocks `a + b + b^T`.
pub fn stokes(mesh: &Mesh, dofs: &DofMap, params: &PhysicalParams) -> TripletMatrix {
    let mut t = viscous(mesh, dofs, params.mu);
    t.append(pressure_coupling(mesh, dofs));
    t
}

/// Oseen convection `rho * int (w . grad u) . v` with frozen velocity `w`
/// (a flow or velocity coefficient vector).
pub fn oseen(mesh: &Mesh, dofs: &DofMap, rho: f64, w: &[f64]) -> TripletMatrix {
    assemble_matrix(dofs.n_flow(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let nodes = dofs.cell_p2(c);
        let mut k = [[0.0; 6]; 6];
        for q in &TRI_DEG4 {
            let n = p2_values(q.bary);
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let wq = velocity_value(dofs, w, c, q.bary);
            let s = q.weight * geo.area * rho;
            for j in 0..6 {
                let adv = s * dot(wq, g[j]);
                for i in 0..6 {
                    k[i][j] += adv * n[i];
                }
            }
        }
        for comp in 0..2 {
            for i in 0..6 {
                for j in 0..6 {
                    out.push((dofs.velocity(comp, nodes[i]), dofs.velocity(comp, nodes[j]), k[i][j]));
                }
            }
        }
    })
}

/// Per edge quadrature data shared by the Nitsche terms.
struct EdgeQuad {
    weight: f64,
    bary: [f64; 3],
    n: [f64; 6],
    /// `grad phi . normal`.
    dn: [f64; 6],
}

fn edge_quadrature(mesh: &Mesh, b: &BoundaryEdge) -> [EdgeQuad; 3] {
    let geo = CellGeometry::of(mesh, b.cell);
    GAUSS3.map(|(t, w)| {
        let bary = edge_bary(b.local_edge, t);
        let g = p2_gradients(bary, &geo.grad_lambda);
        EdgeQuad {
            weight: w * b.length,
            bary,
            n: p2_values(bary),
            dn: g.map(|gi| dot(gi, b.normal)),
        }
    })
}

#[derive(Clone, Copy)]
struct NitscheTerms {
    consistency: bool,
    symmetric: bool,
    penalty: bool,
}

fn nitsche_terms(mesh: &Mesh, dofs: &DofMap, mu: f64, alpha: f64, terms: NitscheTerms) -> TripletMatrix {
    let edges: Vec<&BoundaryEdge> = mesh.boundary_edges_tagged(BoundaryTag::Membrane).collect();
    assemble_matrix(dofs.n_flow(), edges.len(), |e, out| {
        let b = edges[e];
        let nrm = b.normal;
        let nodes = dofs.cell_p2(b.cell);
        let verts = dofs.cell_p1(b.cell);
        // local velocity index: comp * 6 + i; pressure: 12 + j
        let mut vv = [[0.0; 12]; 12];
        let mut vp = [[0.0; 3]; 12];
        for q in edge_quadrature(mesh, b) {
            let pen = alpha / b.length;
            for ci in 0..2 {
                for i in 0..6 {
                    // v . n and n^T(mu dv/dn) for basis (ci, i)
                    let vn_i = q.n[i] * nrm[ci];
                    let t_i = mu * nrm[ci] * q.dn[i];
                    for cj in 0..2 {
                        for j in 0..6 {
                            let un_j = q.n[j] * nrm[cj];
                            let t_j = mu * nrm[cj] * q.dn[j];
                            let mut v = 0.0;
                            if terms.consistency {
                                v -= t_j * vn_i;
                            }
                            if terms.symmetric {
                                v -= t_i * un_j;
                            }
                            if terms.penalty {
                                v += pen * un_j * vn_i;
                            }
                            vv[ci * 6 + i][cj * 6 + j] += q.weight * v;
                        }
                    }
                    for j in 0..3 {
                        // -(-q_j)(v . n)
                        vp[ci * 6 + i][j] += q.weight * q.bary[j] * vn_i;
                    }
                }
            }
        }
        let vel = |k: usize| dofs.velocity(k / 6, nodes[k % 6]);
        for r in 0..12 {
            for s in 0..12 {
                if vv[r][s] != 0.0 {
                    out.push((vel(r), vel(s), vv[r][s]));
                }
            }
            for j in 0..3 {
                if vp[r][j] != 0.0 {
                    let pj = dofs.pressure(verts[j]);
                    if terms.consistency {
                        out.push((vel(r), pj, vp[r][j]));
                    }
                    if terms.symmetric {
                        out.push((pj, vel(r), vp[r][j]));
                    }
                }
            }
        }
    })
}

/// Membrane Nitsche operator: both consistency terms and the penalty
/// `alpha / h_E * int (u . n)(v . n)`.
pub fn nitsche_matrix(mesh: &Mesh, dofs: &DofMap, params: &PhysicalParams, nitsche: &NitscheParams) -> TripletMatrix {
    let all = NitscheTerms {
        consistency: true,
        symmetric: true,
        penalty: true,
    };
    nitsche_terms(mesh, dofs, params.mu, nitsche.alpha, all)
}

/// Penalty part of the Nitsche operator only.
pub fn nitsche_penalty(mesh: &Mesh, dofs: &DofMap, nitsche: &NitscheParams) -> TripletMatrix {
    let pen = NitscheTerms {
        consistency: false,
        symmetric: false,
        penalty: true,
    };
    nitsche_terms(mesh, dofs, 0.0, nitsche.alpha, pen)
}

/// Load `alpha/h int g (v . n) - int n^T(mu dv/dn - q n) g` over membrane edges
/// for a normal-velocity target `g(edge, bary)`, where `edge` indexes
/// [`Mesh::boundary_edges`].
pub fn nitsche_load<G>(mesh: &Mesh, dofs: &DofMap, mu: f64, alpha: f64, target: G) -> Vec<f64>
where
    G: Fn(&BoundaryEdge, [f64; 3]) -> f64 + Sync,
{
    let edges: Vec<&BoundaryEdge> = mesh.boundary_edges_tagged(BoundaryTag::Membrane).collect();
    assemble_vector(dofs.n_flow(), edges.len(), |e, out| {
        let b = edges[e];
        let nodes = dofs.cell_p2(b.cell);
        let verts = dofs.cell_p1(b.cell);
        let pen = alpha / b.length;
        let mut lv = [[0.0; 6]; 2];
        let mut lp = [0.0; 3];
        for q in edge_quadrature(mesh, b) {
            let g = target(b, q.bary) * q.weight;
            if g == 0.0 {
                continue;
            }
            for c in 0..2 {
                for i in 0..6 {
                    lv[c][i] += g * (pen * q.n[i] * b.normal[c] - mu * b.normal[c] * q.dn[i]);
                }
            }
            for j in 0..3 {
                lp[j] += g * q.bary[j];
            }
        }
        for c in 0..2 {
            for i in 0..6 {
                out.push((dofs.velocity(c, nodes[i]), lv[c][i]));
            }
        }
        for j in 0..3 {
            out.push((dofs.pressure(verts[j]), lp[j]));
        }
    })
}

/// Pressure-drive load `F` with target `dP / I0`.
pub fn assemble_f(mesh: &Mesh, dofs: &DofMap, params: &PhysicalParams, nitsche: &NitscheParams) -> Vec<f64> {
    let g = params.drive_velocity();
    nitsche_load(mesh, dofs, params.mu, nitsche.alpha, |_, _| g)
}

/// Osmotic form `B(theta, .)` with target `kappa theta / I0`, theta being a P1
/// coefficient vector.
pub fn assemble_b(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    nitsche: &NitscheParams,
    theta: &[f64],
) -> Vec<f64> {
    let s = params.kappa / params.resistance;
    nitsche_load(mesh, dofs, params.mu, nitsche.alpha, |b, l| {
        let v = dofs.cell_p1(b.cell);
        s * (l[0] * theta[v[0]] + l[1] * theta[v[1]] + l[2] * theta[v[2]])
    })
}

/// Streamline diffusion parameter `h/(2|u|) (coth Pe - 1/Pe)`, `Pe = |u| h / (2 D)`.
pub fn supg_tau(speed: f64, h: f64, diffusivity: f64) -> f64 {
    if speed <= 0.0 {
        return 0.0;
    }
    let pe = speed * h / (2.0 * diffusivity);
    let xi = if pe < 1e-3 {
        // series of coth(x) - 1/x
        pe / 3.0 - pe.powi(3) / 45.0
    } else {
        1.0 / pe.tanh() - 1.0 / pe
    };
    h / (2.0 * speed) * xi
}

/// Cell Peclet number `|u| h / (2 D)`.
pub fn cell_peclet(speed: f64, h: f64, diffusivity: f64) -> f64 {
    speed * h / (2.0 * diffusivity)
}

/// Length of the longest chord of the cell in the direction of `w`,
/// `2|w| / sum_i |w . grad lambda_i|`; the diameter when `w = 0`.
pub fn streamline_length(geo: &CellGeometry, w: [f64; 2]) -> f64 {
    let s: f64 = geo.grad_lambda.iter().map(|g| dot(w, *g).abs()).sum();
    let speed = w[0].hypot(w[1]);
    if speed == 0.0 || s == 0.0 {
        geo.diameter()
    } else {
        2.0 * speed / s
    }
}

fn cell_tau(mesh: &Mesh, dofs: &DofMap, u: &[f64], c: usize, geo: &CellGeometry, diffusivity: f64) -> f64 {
    let w = velocity_value(dofs, u, c, [1.0 / 3.0; 3]);
    let _ = mesh;
    supg_tau(w[0].hypot(w[1]), streamline_length(geo, w), diffusivity)
}

/// Transport operator `d + c~` with transport velocity `u`; with `supg` the
/// streamline term `tau_K int (u . grad theta)(u . grad tau)` is added.
pub fn transport(mesh: &Mesh, dofs: &DofMap, diffusivity: f64, u: &[f64], supg: bool) -> TripletMatrix {
    let mut t = assemble_matrix(dofs.n_theta(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let v = dofs.cell_p1(c);
        let g = geo.grad_lambda;
        let tau = if supg {
            cell_tau(mesh, dofs, u, c, &geo, diffusivity)
        } else {
            0.0
        };
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = diffusivity * geo.area * dot(g[i], g[j]);
            }
        }
        for q in &TRI_DEG4 {
            let w = velocity_value(dofs, u, c, q.bary);
            let s = q.weight * geo.area;
            let adv = [dot(w, g[0]), dot(w, g[1]), dot(w, g[2])];
            for i in 0..3 {
                let test = q.bary[i] + tau * adv[i];
                for j in 0..3 {
                    k[i][j] += s * adv[j] * test;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                out.push((v[i], v[j], k[i][j]));
            }
        }
    });
    let edges: Vec<&BoundaryEdge> = mesh
        .boundary_edges()
        .iter()
        .filter(|b| matches!(b.tag, BoundaryTag::Membrane | BoundaryTag::Wall))
        .collect();
    t.append(assemble_matrix(dofs.n_theta(), edges.len(), |e, out| {
        let b = edges[e];
        let v = dofs.cell_p1(b.cell);
        let mut k = [[0.0; 3]; 3];
        for (tq, wq) in GAUSS3 {
            let l = edge_bary(b.local_edge, tq);
            let wn = dot(velocity_value(dofs, u, b.cell, l), b.normal);
            let s = wq * b.length * wn;
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] -= s * l[i] * l[j];
                }
            }
        }
        let (a, c) = (b.local_edge, (b.local_edge + 1) % 3);
        for i in [a, c] {
            for j in [a, c] {
                out.push((v[i], v[j], k[i][j]));
            }
        }
    }));
    t
}

/// Weight of the crosswind term in [`crosswind_coefficients`].
pub const CROSSWIND_C: f64 = 0.7;
/// Gradients below this fraction of `max|theta| / (domain size)` are not
/// treated as layers.
pub const CROSSWIND_GRADIENT: f64 = 0.1;

/// Residual-based crosswind diffusivity per cell for the concentration `theta`.
///
/// `k_c = 1/2 a h |R| / |grad theta|` with `R = u . grad theta - s`,
/// `a = max(0, C - 2 D / (|u| h))` and `h` the chord across the flow; the
/// gradient is floored at [`CROSSWIND_GRADIENT`] so that flat regions get none.
pub fn crosswind_coefficients<S>(
    mesh: &Mesh,
    dofs: &DofMap,
    diffusivity: f64,
    u: &[f64],
    theta: &[f64],
    source: S,
) -> Vec<f64>
where
    S: Fn(Point) -> f64 + Sync,
{
    let (lo, hi) = mesh.bounding_box();
    let scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let g_ref = CROSSWIND_GRADIENT * scale / (hi[0] - lo[0]).min(hi[1] - lo[1]);
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let geo = CellGeometry::of(mesh, c);
            let v = dofs.cell_p1(c);
            let mut grad = [0.0; 2];
            for i in 0..3 {
                grad[0] += theta[v[i]] * geo.grad_lambda[i][0];
                grad[1] += theta[v[i]] * geo.grad_lambda[i][1];
            }
            let w = velocity_value(dofs, u, c, [1.0 / 3.0; 3]);
            let speed = w[0].hypot(w[1]);
            if speed == 0.0 || g_ref == 0.0 {
                return 0.0;
            }
            let h = streamline_length(&geo, [-w[1], w[0]]);
            let a = (CROSSWIND_C - 2.0 * diffusivity / (speed * h)).max(0.0);
            let r = dot(w, grad) - source(geo.map([1.0 / 3.0; 3]));
            0.5 * a * h * r.abs() / grad[0].hypot(grad[1]).max(g_ref)
        })
        .collect()
}

/// Crosswind diffusion `k_c int grad theta . (I - e e^T) grad tau`, `e = u/|u|`,
/// with one coefficient per cell.
pub fn crosswind_diffusion(mesh: &Mesh, dofs: &DofMap, u: &[f64], coefficients: &[f64]) -> TripletMatrix {
    assemble_matrix(dofs.n_theta(), mesh.n_cells(), |c, out| {
        let k = coefficients[c];
        if k == 0.0 {
            return;
        }
        let geo = CellGeometry::of(mesh, c);
        let v = dofs.cell_p1(c);
        let g = geo.grad_lambda;
        let w = velocity_value(dofs, u, c, [1.0 / 3.0; 3]);
        let speed = w[0].hypot(w[1]);
        let e = if speed > 0.0 { [w[0] / speed, w[1] / speed] } else { [0.0, 0.0] };
        for i in 0..3 {
            for j in 0..3 {
                let val = dot(g[i], g[j]) - dot(e, g[i]) * dot(e, g[j]);
                out.push((v[i], v[j], k * geo.area * val));
            }
        }
    })
}

/// Body-force load `int f . v`.
pub fn velocity_load<F>(mesh: &Mesh, dofs: &DofMap, f: F) -> Vec<f64>
where
    F: Fn(Point) -> [f64; 2] + Sync,
{
    assemble_vector(dofs.n_flow(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let nodes = dofs.cell_p2(c);
        let mut l = [[0.0; 6]; 2];
        for q in &TRI_DEG4 {
            let fx = f(geo.map(q.bary));
            let n = p2_values(q.bary);
            let s = q.weight * geo.area;
            for i in 0..6 {
                l[0][i] += s * fx[0] * n[i];
                l[1][i] += s * fx[1] * n[i];
            }
        }
        for comp in 0..2 {
            for i in 0..6 {
                out.push((dofs.velocity(comp, nodes[i]), l[comp][i]));
            }
        }
    })
}

/// Source load `int s (tau + tau_K u . grad tau)`, matching [`transport`].
pub fn transport_load<S>(mesh: &Mesh, dofs: &DofMap, diffusivity: f64, u: &[f64], supg: bool, s: S) -> Vec<f64>
where
    S: Fn(Point) -> f64 + Sync,
{
    assemble_vector(dofs.n_theta(), mesh.n_cells(), |c, out| {
        let geo = CellGeometry::of(mesh, c);
        let v = dofs.cell_p1(c);
        let tau = if supg {
            cell_tau(mesh, dofs, u, c, &geo, diffusivity)
        } else {
            0.0
        };
        let mut l = [0.0; 3];
        for q in &TRI_DEG4 {
            let w = velocity_value(dofs, u, c, q.bary);
            let src = s(geo.map(q.bary)) * q.weight * geo.area;
            for i in 0..3 {
                l[i] += src * (q.bary[i] + tau * dot(w, geo.grad_lambda[i]));
            }
        }
        for i in 0..3 {
            out.push((v[i], l[i]));
        }
    })
}
