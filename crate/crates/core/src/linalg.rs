//! 2x2 complex linear algebra used throughout the crate.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

/// Raising operator |e><g| with |e> = (1, 0).
pub fn sigma_plus() -> Mat2 {
    Mat2::new(ZERO, ONE, ZERO, ZERO)
}

pub fn sigma_minus() -> Mat2 {
    Mat2::new(ZERO, ZERO, ONE, ZERO)
}

/// `e^{i phi}`.
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

pub fn hermiticity_deviation(m: &Mat2) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_deviation(m: &Mat2) -> f64 {
    (m.adjoint() * m - Mat2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `<a, b>`, antilinear in the first slot.
pub fn inner(a: &Vec2, b: &Vec2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn norm_sqr(v: &Vec2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Eigen-decomposition of a Hermitian 2x2 matrix.
///
/// Eigenvalues are returned in ascending order; column `i` of the
/// returned matrix is the normalised eigenvector for eigenvalue `i`.
pub fn hermitian_eigen(m: &Mat2) -> ([f64; 2], Mat2) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = half.hypot(b.norm());
    let values = [mean - radius, mean + radius];
    if b.norm() <= f64::EPSILON * radius.max(f64::MIN_POSITIVE) || b.norm() == 0.0 {
        // already diagonal
        return if a <= d {
            ([a, d], Mat2::identity())
        } else {
            ([d, a], Mat2::new(ZERO, ONE, ONE, ZERO))
        };
    }
    // upper eigenvector (b, lambda_+ - a), lower one orthogonal to it
    let upper = if half >= 0.0 {
        Vec2::new(C64::from(half + radius), b.conj())
    } else {
        Vec2::new(b, C64::from(radius - half))
    };
    let upper = upper / C64::from(norm_sqr(&upper).sqrt());
    let lower = Vec2::new(-upper[1].conj(), upper[0].conj());
    (values, Mat2::from_columns(&[lower, upper]))
}

/// Eigen-decomposition of a normal (e.g. unitary) 2x2 matrix with
/// distinct eigenvalues. The second eigenvector is constructed exactly
/// orthogonal to the first.
pub fn normal_eigen(m: &Mat2) -> ([C64; 2], [Vec2; 2]) {
    let tr_half = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let diff_half = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let disc = (diff_half * diff_half + m[(0, 1)] * m[(1, 0)]).sqrt();
    let l0 = tr_half + disc;
    let l1 = tr_half - disc;
    // null vector of (m - l0): orthogonal to the conjugate of its larger row
    let r0 = Vec2::new(m[(0, 0)] - l0, m[(0, 1)]);
    let r1 = Vec2::new(m[(1, 0)], m[(1, 1)] - l0);
    let row = if norm_sqr(&r0) >= norm_sqr(&r1) { r0 } else { r1 };
    let mut v0 = Vec2::new(row[1], -row[0]);
    let n = norm_sqr(&v0).sqrt();
    if n == 0.0 {
        v0 = Vec2::new(ONE, ZERO);
    } else {
        v0 /= C64::from(n);
    }
    let v1 = Vec2::new(-v0[1].conj(), v0[0].conj());
    ([l0, l1], [v0, v1])
}

/// Phase that makes the largest-magnitude component of `v` real positive.
pub fn gauge_phase(v: &Vec2) -> C64 {
    let k = if v[0].norm() >= v[1].norm() { 0 } else { 1 };
    let z = v[k];
    if z.norm() == 0.0 {
        ONE
    } else {
        z.conj() / z.norm()
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &Mat2, t: f64) -> Mat2 {
    let (vals, vecs) = hermitian_eigen(h);
    let d = Mat2::new(cis(-vals[0] * t), ZERO, ZERO, cis(-vals[1] * t));
    vecs * d * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigen_reconstructs() {
        let m = Mat2::new(
            C64::new(0.3, 0.0),
            C64::new(0.1, -0.2),
            C64::new(0.1, 0.2),
            C64::new(-0.7, 0.0),
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] <= vals[1]);
        let d = Mat2::new(vals[0].into(), ZERO, ZERO, vals[1].into());
        let back = vecs * d * vecs.adjoint();
        assert!((back - m).norm() < 1e-14);
        assert!(unitarity_deviation(&vecs) < 1e-14);
    }

    #[test]
    fn hermitian_eigen_of_diagonal() {
        let m = Mat2::new(C64::from(2.0), ZERO, ZERO, C64::from(-1.0));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, [-1.0, 2.0]);
        assert_eq!(vecs[(1, 0)], ONE);
    }

    #[test]
    fn normal_eigen_of_unitary() {
        let h = Mat2::new(C64::from(0.4), C64::new(0.2, 0.1), C64::new(0.2, -0.1), C64::from(-0.1));
        let u = expm_hermitian(&h, 1.3);
        let (vals, vecs) = normal_eigen(&u);
        for k in 0..2 {
            let r = u * vecs[k] - vecs[k] * vals[k];
            assert!(norm_sqr(&r).sqrt() < 1e-13);
            assert!((vals[k].norm() - 1.0).abs() < 1e-13);
        }
        assert!(inner(&vecs[0], &vecs[1]).norm() < 1e-15);
    }

    #[test]
    fn gauge_phase_makes_largest_component_real() {
        let v = Vec2::new(C64::new(0.1, 0.2), C64::new(-0.5, 0.6));
        let w = v * gauge_phase(&v);
        assert!(w[1].im.abs() < 1e-15 && w[1].re > 0.0);
    }
}
