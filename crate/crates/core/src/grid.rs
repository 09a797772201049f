//! Periodic spatial grid: a flat torus sampled at `cells` points per axis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::Point;
use crate::scalar::Real;

/// Minimum resolution per axis accepted by [`SpatialGrid::new`].
pub const MIN_CELLS: usize = 16;

/// Flat torus `[0, period)^dim` with nodes at `i·Δx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialGrid<T> {
    dim: usize,
    period: T,
    cells: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(dim: usize, period: T, cells: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("spatial dimension {dim} not in {{1, 2}}")));
        }
        if !(period > T::zero() && period.is_finite()) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        if cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("{cells} cells per axis, need at least {MIN_CELLS}")));
        }
        Ok(Self { dim, period, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Δx = period / cells.
    pub fn spacing(&self) -> T {
        self.period / T::from_usize_lossy(self.cells)
    }

    /// `(nx, ny)`; `ny == 1` in one dimension.
    pub fn shape(&self) -> (usize, usize) {
        if self.dim == 1 {
            (self.cells, 1)
        } else {
            (self.cells, self.cells)
        }
    }

    pub fn len(&self) -> usize {
        let (nx, ny) = self.shape();
        nx * ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells, idx / self.cells)
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point<T> {
        let (i, j) = self.coords(idx);
        let h = self.spacing();
        if self.dim == 1 {
            [T::from_usize_lossy(i) * h, T::zero()]
        } else {
            [T::from_usize_lossy(i) * h, T::from_usize_lossy(j) * h]
        }
    }

    /// Periodic neighbour along `axis` (0 or 1) in direction `forward`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let (i, j) = self.coords(idx);
        let n = self.cells;
        let step = |k: usize| if forward { (k + 1) % n } else { (k + n - 1) % n };
        if axis == 0 {
            self.index(step(i), j)
        } else {
            self.index(i, step(j))
        }
    }

    /// Minimum-image displacement `b − a`.
    #[inline]
    pub fn displacement(&self, a: &Point<T>, b: &Point<T>) -> Point<T> {
        let wrap = |d: T| d - self.period * (d / self.period).round();
        if self.dim == 1 {
            [wrap(b[0] - a[0]), T::zero()]
        } else {
            [wrap(b[0] - a[0]), wrap(b[1] - a[1])]
        }
    }

    #[inline]
    pub fn distance(&self, a: &Point<T>, b: &Point<T>) -> T {
        let d = self.displacement(a, b);
        d[0].hypot(d[1])
    }

    /// Wraps a point into `[0, period)` per axis.
    #[inline]
    pub fn wrap(&self, p: &Point<T>) -> Point<T> {
        let w = |x: T| {
            let r = x - self.period * (x / self.period).floor();
            if r >= self.period {
                T::zero()
            } else {
                r
            }
        };
        if self.dim == 1 {
            [w(p[0]), T::zero()]
        } else {
            [w(p[0]), w(p[1])]
        }
    }

    /// Centre of the fundamental domain.
    pub fn center(&self) -> Point<T> {
        let c = self.period / T::lit(2.0);
        if self.dim == 1 {
            [c, T::zero()]
        } else {
            [c, c]
        }
    }

    /// Periodic (bi)linear interpolation of nodal values.
    pub fn interpolate(&self, values: &[T], p: &Point<T>) -> T {
        let h = self.spacing();
        let n = self.cells;
        let q = self.wrap(p);
        let split = |x: T| {
            let s = x / h;
            let f = s.floor();
            let i = f.to_usize().unwrap_or(0) % n;
            (i, (i + 1) % n, s - f)
        };
        let (i0, i1, fx) = split(q[0]);
        if self.dim == 1 {
            return values[i0] * (T::one() - fx) + values[i1] * fx;
        }
        let (j0, j1, fy) = split(q[1]);
        let v00 = values[self.index(i0, j0)];
        let v10 = values[self.index(i1, j0)];
        let v01 = values[self.index(i0, j1)];
        let v11 = values[self.index(i1, j1)];
        let one = T::one();
        (v00 * (one - fx) + v10 * fx) * (one - fy) + (v01 * (one - fx) + v11 * fx) * fy
    }
}
