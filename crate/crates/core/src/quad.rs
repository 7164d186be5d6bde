//! One-dimensional quadrature used by the model library and the radial
//! solver: 7-point Gauss-Legendre cells with adaptive bisection.

/// 7-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 7] = [
    -0.949107912342758524526189684048,
    -0.741531185599394439863864773281,
    -0.405845151377397166906606412077,
    0.0,
    0.405845151377397166906606412077,
    0.741531185599394439863864773281,
    0.949107912342758524526189684048,
];
const GL_WEIGHTS: [f64; 7] = [
    0.129484966168869693270611432679,
    0.279705391489276667901467771424,
    0.381830050505118944950369775489,
    0.417959183673469387755102040816,
    0.381830050505118944950369775489,
    0.279705391489276667901467771424,
    0.129484966168869693270611432679,
];

/// Single Gauss-Legendre cell on [a, b].
pub fn gl7(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adaptive_rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gl7(f, a, mid);
    let right = gl7(f, mid, b);
    let err = (left + right - whole).abs();
    if err <= tol || depth == 0 {
        return left + right;
    }
    adaptive_rec(f, a, mid, left, 0.5 * tol, depth - 1)
        + adaptive_rec(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature to absolute tolerance `tol`; handles integrable
/// endpoint singularities through bisection (depth-limited).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gl7(&f, a, b);
    adaptive_rec(&f, a, b, whole, tol, 48)
}

/// Composite quadrature on a mesh graded toward `a` (`grading` > 1 pushes
/// points toward the left endpoint); used where adaptivity is too slow to
/// localize a known singularity.
pub fn integrate_graded(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize, grading: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = a;
    for i in 1..=cells {
        let t = (i as f64 / cells as f64).powf(grading);
        let next = a + (b - a) * t;
        acc += gl7(&f, prev, next);
        prev = next;
    }
    acc
}
