//! Small dense linear algebra for one- and two-dimensional spatial slices.
//!
//! Spatial dimension is 1 or 2. Points and vectors are always stored as `[T; 2]`; in one
//! dimension the second component is zero and ignored.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::scalar::Real;

pub type Point<T> = [T; 2];

/// Symmetric bilinear form `[[xx, xy], [xy, yy]]` on a 1- or 2-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymForm<T> {
    dim: usize,
    xx: T,
    xy: T,
    yy: T,
}

impl<T: Real> SymForm<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { dim: 2, xx, xy, yy }
    }

    pub fn new1(xx: T) -> Self {
        Self { dim: 1, xx, xy: T::zero(), yy: T::zero() }
    }

    pub fn scaled_identity(dim: usize, s: T) -> Self {
        match dim {
            1 => Self::new1(s),
            _ => Self::new(s, T::zero(), s),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, T::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xx(&self) -> T {
        self.xx
    }

    pub fn xy(&self) -> T {
        self.xy
    }

    pub fn yy(&self) -> T {
        self.yy
    }

    /// Eigenvalues `(min, max)`.
    pub fn eigenvalues(&self) -> (T, T) {
        if self.dim == 1 {
            return (self.xx, self.xx);
        }
        let two = T::lit(2.0);
        let mean = (self.xx + self.yy) / two;
        let rad = ((self.xx - self.yy) / two).hypot(self.xy);
        (mean - rad, mean + rad)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().0
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues().1
    }

    pub fn is_positive_definite(&self) -> bool {
        let m = self.min_eigenvalue();
        m > T::zero() && m.is_finite() && self.max_eigenvalue().is_finite()
    }

    pub fn determinant(&self) -> T {
        if self.dim == 1 {
            self.xx
        } else {
            self.xx * self.yy - self.xy * self.xy
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        Some(if self.dim == 1 {
            Self::new1(T::one() / self.xx)
        } else {
            Self::new(self.yy / det, -self.xy / det, self.xx / det)
        })
    }

    /// `v · F v`.
    #[inline]
    pub fn quad(&self, v: &Point<T>) -> T {
        if self.dim == 1 {
            self.xx * v[0] * v[0]
        } else {
            self.xx * v[0] * v[0] + T::lit(2.0) * self.xy * v[0] * v[1] + self.yy * v[1] * v[1]
        }
    }

    #[inline]
    pub fn apply(&self, v: &Point<T>) -> Point<T> {
        if self.dim == 1 {
            [self.xx * v[0], T::zero()]
        } else {
            [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
        }
    }

    /// Largest `λ` with `det(self − λ·other) = 0`, i.e. the sharpest constant in
    /// `self(u,u) ≤ λ·other(u,u)`. `other` must be positive definite.
    pub fn generalized_max_eigenvalue(&self, other: &Self) -> T {
        if self.dim == 1 {
            return self.xx / other.xx;
        }
        let (a1, b1, c1) = (self.xx, self.xy, self.yy);
        let (a2, b2, c2) = (other.xx, other.xy, other.yy);
        let qa = a2 * c2 - b2 * b2;
        let qb = -(a1 * c2 + a2 * c1 - T::lit(2.0) * b1 * b2);
        let qc = a1 * c1 - b1 * b1;
        let disc = (qb * qb - T::lit(4.0) * qa * qc).max(T::zero());
        (-qb + disc.sqrt()) / (T::lit(2.0) * qa)
    }

    pub fn max_abs_entry(&self) -> T {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

impl<T: Real> Add for SymForm<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { dim: self.dim, xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }
}

impl<T: Real> Sub for SymForm<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { dim: self.dim, xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }
}

impl<T: Real> Mul<T> for SymForm<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self { dim: self.dim, xx: self.xx * s, xy: self.xy * s, yy: self.yy * s }
    }
}

/// General 2×2 (or 1×1) matrix, used for Jacobians of spatial maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2<T> {
    dim: usize,
    m: [[T; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(m: [[T; 2]; 2]) -> Self {
        Self { dim: 2, m }
    }

    pub fn new1(a: T) -> Self {
        Self { dim: 1, m: [[a, T::zero()], [T::zero(), T::zero()]] }
    }

    pub fn scaled_identity(dim: usize, s: T) -> Self {
        match dim {
            1 => Self::new1(s),
            _ => Self::new([[s, T::zero()], [T::zero(), s]]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.m[i][j]
    }

    pub fn mul_vec(&self, v: &Point<T>) -> Point<T> {
        if self.dim == 1 {
            [self.m[0][0] * v[0], T::zero()]
        } else {
            [
                self.m[0][0] * v[0] + self.m[0][1] * v[1],
                self.m[1][0] * v[0] + self.m[1][1] * v[1],
            ]
        }
    }

    /// `JᵀJ`, the pulled-back Euclidean form `w ↦ ‖J w‖²`.
    pub fn gram(&self) -> SymForm<T> {
        if self.dim == 1 {
            return SymForm::new1(self.m[0][0] * self.m[0][0]);
        }
        let [[a, b], [c, d]] = self.m;
        SymForm::new(a * a + c * c, a * b + c * d, b * b + d * d)
    }

    /// Spectral norm.
    pub fn operator_norm(&self) -> T {
        if self.dim == 1 {
            return self.m[0][0].abs();
        }
        self.gram().max_eigenvalue().max(T::zero()).sqrt()
    }

    pub fn determinant(&self) -> T {
        if self.dim == 1 {
            self.m[0][0]
        } else {
            self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        Some(if self.dim == 1 {
            Self::new1(T::one() / self.m[0][0])
        } else {
            let [[a, b], [c, d]] = self.m;
            Self::new([[d / det, -b / det], [-c / det, a / det]])
        })
    }
}
