//! Points of the ambient Euclidean space and small vector helpers.
//!
//! The toolkit targets desk-scale problems (dimension a handful), so points
//! are plain `Vec<f64>` and the helpers below keep the numerics readable
//! without pulling a linear-algebra type into every signature.

/// A point of R^n.
pub type Point = Vec<f64>;

/// Euclidean inner product. Panics on length mismatch (programmer error).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Euclidean distance between two points.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Componentwise difference `a - b` as a new point.
pub fn sub(a: &[f64], b: &[f64]) -> Point {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// In-place `out = a`.
pub fn copy_into(a: &[f64], out: &mut [f64]) {
    out.copy_from_slice(a);
}

/// In-place `out += s * a`.
pub fn add_scaled(out: &mut [f64], s: f64, a: &[f64]) {
    debug_assert_eq!(out.len(), a.len());
    for (o, x) in out.iter_mut().zip(a) {
        *o += s * x;
    }
}

/// True when every component is finite.
pub fn is_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}
