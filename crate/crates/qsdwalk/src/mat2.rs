//! Dense complex 2x2 matrices with the handful of exact operations the
//! rest of the crate needs. Everything is closed-form; there are no
//! iterative linear-algebra routines anywhere.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Row-major complex 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    /// Entries `[m00, m01, m10, m11]`.
    pub e: [C64; 4],
}

impl Mat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2 {
            e: [m00, m01, m10, m11],
        }
    }

    /// Build from real entries (row major).
    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2::new(
            C64::new(m00, 0.0),
            C64::new(m01, 0.0),
            C64::new(m10, 0.0),
            C64::new(m11, 0.0),
        )
    }

    pub fn zero() -> Self {
        Mat2::from_real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// Real diagonal matrix `diag(d0, d1)`.
    pub fn diag(d0: f64, d1: f64) -> Self {
        Mat2::from_real(d0, 0.0, 0.0, d1)
    }

    /// The bit-flip matrix `[[0, 1], [1, 0]]`.
    pub fn not() -> Self {
        Mat2::from_real(0.0, 1.0, 1.0, 0.0)
    }

    /// `(1/sqrt 2) [[1, 1], [1, -1]]`.
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::from_real(h, h, h, -h)
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: [C64; 2]) -> Self {
        Mat2::new(
            v[0] * v[0].conj(),
            v[0] * v[1].conj(),
            v[1] * v[0].conj(),
            v[1] * v[1].conj(),
        )
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Mat2::new(
            self.e[0].conj(),
            self.e[2].conj(),
            self.e[1].conj(),
            self.e[3].conj(),
        )
    }

    pub fn trace(&self) -> C64 {
        self.e[0] + self.e[3]
    }

    pub fn det(&self) -> C64 {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    /// Inverse; `None` when the determinant is numerically zero.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return None;
        }
        Some(Mat2::new(
            self.e[3] / d,
            -self.e[1] / d,
            -self.e[2] / d,
            self.e[0] / d,
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.e[0] * s, self.e[1] * s, self.e[2] * s, self.e[3] * s)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.e[0] * v[0] + self.e[1] * v[1],
            self.e[2] * v[0] + self.e[3] * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.e
            .iter()
            .zip(other.e.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `M - M^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Largest entry magnitude of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::identity())
    }

    /// Eigenvalues of a Hermitian matrix by the quadratic formula,
    /// ascending. The non-Hermitian part, if any, is discarded first.
    pub fn eigvals_hermitian(&self) -> [f64; 2] {
        let a = self.e[0].re;
        let d = self.e[3].re;
        // Off-diagonal of the Hermitian part (M + M^dagger)/2.
        let b = (self.e[1] + self.e[2].conj()) * 0.5;
        let mid = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let r = (half * half + b.norm_sqr()).sqrt();
        [mid - r, mid + r]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.e[0] + rhs.e[0],
            self.e[1] + rhs.e[1],
            self.e[2] + rhs.e[2],
            self.e[3] + rhs.e[3],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.e[0] - rhs.e[0],
            self.e[1] - rhs.e[1],
            self.e[2] - rhs.e[2],
            self.e[3] - rhs.e[3],
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.e[0] * rhs.e[0] + self.e[1] * rhs.e[2],
            self.e[0] * rhs.e[1] + self.e[1] * rhs.e[3],
            self.e[2] * rhs.e[0] + self.e[3] * rhs.e[2],
            self.e[2] * rhs.e[1] + self.e[3] * rhs.e[3],
        )
    }
}
