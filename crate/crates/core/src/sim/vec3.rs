//! Minimal 3-vector helpers over `[f64; 3]`.

pub type Vec3 = [f64; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm_sq(a: Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    norm_sq(a).sqrt()
}

/// Squared chord between two points.
#[inline]
pub fn dist_sq(a: Vec3, b: Vec3) -> f64 {
    norm_sq(sub(a, b))
}

#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Great-circle angle between unit vectors, accurate for tiny angles.
#[inline]
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    2.0 * (0.5 * dist_sq(a, b).sqrt()).min(1.0).asin()
}

/// Squared chord subtending angle `theta` on the unit sphere.
#[inline]
pub fn chord_sq(theta: f64) -> f64 {
    if theta >= std::f64::consts::PI {
        4.0
    } else {
        let s = (0.5 * theta).sin();
        4.0 * s * s
    }
}
