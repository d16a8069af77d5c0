//! Quadrature rules on the reference triangle and on edges.

/// Barycentric point and weight. Weights sum to 1, so integrals are
/// `area * sum(w * f)`.
#[derive(Debug, Clone, Copy)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const A1: f64 = 0.445_948_490_915_965;
const B1: f64 = 1.0 - 2.0 * A1;
const W1: f64 = 0.223_381_589_678_011;
const A2: f64 = 0.091_576_213_509_771;
const B2: f64 = 1.0 - 2.0 * A2;
const W2: f64 = 0.109_951_743_655_322;

/// Six-point rule, exact for polynomials of total degree 4.
pub const TRI_DEG4: [TriPoint; 6] = [
    TriPoint { bary: [A1, A1, B1], weight: W1 },
    TriPoint { bary: [A1, B1, A1], weight: W1 },
    TriPoint { bary: [B1, A1, A1], weight: W1 },
    TriPoint { bary: [A2, A2, B2], weight: W2 },
    TriPoint { bary: [A2, B2, A2], weight: W2 },
    TriPoint { bary: [B2, A2, A2], weight: W2 },
];

/// Gauss-Legendre points on `[0, 1]` as `(t, weight)`, weights summing to 1.
/// Exact to degree 5.
pub const GAUSS3: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + 0.387_298_334_620_741_7, 5.0 / 18.0),
];

/// Barycentric coordinates of the point at parameter `t` along local edge `k`,
/// which runs from vertex `k` to vertex `(k + 1) % 3`.
pub fn edge_bary(k: usize, t: f64) -> [f64; 3] {
    let mut b = [0.0; 3];
    b[k] = 1.0 - t;
    b[(k + 1) % 3] = t;
    b
}
