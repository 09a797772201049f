//! Regions of the spatial torus carried as signed-distance fields (positive inside).

mod contour;
mod fmm;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{Point, SymForm};
use crate::geometry::StandardSpacetime;
use crate::grid::SpatialGrid;
use crate::scalar::Real;

pub use contour::{polylines, segments, Segment};
pub(crate) use fmm::{distance_to_interface, Speed};

/// Safety margin in multiples of the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Margin(f64);

impl Margin {
    pub const ZERO: Margin = Margin(0.0);

    pub fn cells(cells: f64) -> Result<Self> {
        if cells >= 0.0 && cells.is_finite() {
            Ok(Margin(cells))
        } else {
            Err(Error::Precondition(format!("margin {cells} must be a non-negative number of cells")))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }

    pub(crate) fn length<T: Real>(&self, grid: &SpatialGrid<T>) -> T {
        T::lit(self.0) * grid.spacing()
    }
}

/// Euclidean ball known analytically, kept alongside the raster so exact maps can carry it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallHint<T> {
    pub center: Point<T>,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    grid: SpatialGrid<T>,
    sdf: Vec<T>,
    ball: Option<BallHint<T>>,
}

impl<T: Real> Region<T> {
    pub fn from_sdf(grid: SpatialGrid<T>, sdf: Vec<T>) -> Result<Self> {
        if sdf.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, sdf, ball: None })
    }

    pub(crate) fn with_ball_hint(mut self, ball: Option<BallHint<T>>) -> Self {
        self.ball = ball;
        self
    }

    fn tabulate(grid: SpatialGrid<T>, f: impl Fn(&Point<T>) -> T + Sync) -> Self {
        let sdf = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        Self { grid, sdf, ball: None }
    }

    /// Open Euclidean ball, measured with the minimum-image convention.
    pub fn ball(grid: SpatialGrid<T>, center: Point<T>, radius: T) -> Self {
        let g = grid;
        Self::tabulate(grid, move |p| radius - g.distance(&center, p))
            .with_ball_hint(Some(BallHint { center, radius }))
    }

    /// Axis-aligned box `|x_i − c_i| < half_i`.
    pub fn axis_box(grid: SpatialGrid<T>, center: Point<T>, half: Point<T>) -> Self {
        let g = grid;
        let dim = grid.dim();
        Self::tabulate(grid, move |p| {
            let d = g.displacement(&center, p);
            let q: Vec<T> = (0..dim).map(|i| d[i].abs() - half[i]).collect();
            let outside = q.iter().map(|v| v.max(T::zero()).powi(2)).sum::<T>().sqrt();
            let inside = q.iter().copied().fold(T::neg_infinity(), T::max).min(T::zero());
            -(outside + inside)
        })
    }

    /// `inner < ‖x − c‖ < outer`.
    pub fn annulus(grid: SpatialGrid<T>, center: Point<T>, inner: T, outer: T) -> Self {
        let g = grid;
        Self::tabulate(grid, move |p| {
            let r = g.distance(&center, p);
            (outer - r).min(r - inner)
        })
    }

    /// The whole torus (no exterior).
    pub fn whole(grid: SpatialGrid<T>) -> Self {
        let p = grid.period();
        Self::tabulate(grid, move |_| p)
    }

    pub fn empty(grid: SpatialGrid<T>) -> Self {
        let p = grid.period();
        Self::tabulate(grid, move |_| -p)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::max)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::min)
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid, sdf: self.sdf.iter().map(|&v| -v).collect(), ball: None }
    }

    fn combine(&self, other: &Self, op: impl Fn(T, T) -> T) -> Result<Self> {
        same_grid(self, other)?;
        let sdf = self.sdf.iter().zip(&other.sdf).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { grid: self.grid, sdf, ball: None })
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn sdf(&self) -> &[T] {
        &self.sdf
    }

    pub fn ball_hint(&self) -> Option<BallHint<T>> {
        self.ball
    }

    pub fn is_empty(&self) -> bool {
        !self.sdf.iter().any(|&v| v > T::zero())
    }

    /// Whether some node lies at least `m` outside the region.
    pub fn has_exterior(&self, m: Margin) -> bool {
        let lim = -m.length(&self.grid);
        self.sdf.iter().any(|&v| v < lim)
    }

    pub fn inside_count(&self) -> usize {
        self.sdf.iter().filter(|&&v| v > T::zero()).count()
    }

    /// Area (length in one dimension) by node counting.
    pub fn measure(&self) -> T {
        T::from_usize_lossy(self.inside_count()) * self.grid.spacing().powi(self.grid.dim() as i32)
    }

    pub fn max_sdf(&self) -> T {
        self.sdf.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn value_at(&self, p: &Point<T>) -> T {
        self.grid.interpolate(&self.sdf, p)
    }

    /// Adds `r` to the field: a dilation when the field is an exact distance.
    pub fn offset(&self, r: T) -> Self {
        Self {
            grid: self.grid,
            sdf: self.sdf.iter().map(|&v| v + r).collect(),
            ball: self.ball.map(|b| BallHint { center: b.center, radius: b.radius + r }),
        }
    }

    /// Replaces the field by a Euclidean signed distance to the same zero set.
    pub fn redistance(&self) -> Result<Self> {
        self.require_nonempty("redistance")?;
        let d = distance_to_interface(&self.grid, &self.sdf, Speed::Euclidean);
        Ok(Self { grid: self.grid, sdf: signed(&self.sdf, &d, self.grid.period()), ball: self.ball })
    }

    /// Euclidean dilation by `r` (erosion for negative `r`) of the zero set.
    pub fn dilate(&self, r: T) -> Result<Self> {
        Ok(self.redistance()?.offset(r))
    }

    /// Euclidean depth of the deepest interior node.
    pub fn inradius(&self) -> Result<T> {
        Ok(self.redistance()?.max_sdf().max(T::zero()))
    }

    /// Euclidean distance from the region to its farthest exterior node.
    pub fn exterior_depth(&self) -> Result<T> {
        let r = self.redistance()?;
        Ok(r.sdf.iter().copied().fold(T::zero(), |a, v| a.max(-v)))
    }

    /// Largest Euclidean distance from `center` to a node of the region.
    pub fn enclosing_radius(&self, center: &Point<T>) -> T {
        (0..self.grid.len())
            .filter(|&i| self.sdf[i] > T::zero())
            .map(|i| self.grid.distance(center, &self.grid.point(i)))
            .fold(T::zero(), T::max)
    }

    /// Boundary polylines, vertices in `[0, period)`.
    pub fn contours(&self) -> Vec<Vec<Point<T>>> {
        polylines(&self.grid, &self.sdf)
    }

    pub(crate) fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyRegion(format!("{what}: region has no interior nodes")))
        } else {
            Ok(())
        }
    }
}

fn signed<T: Real>(sdf: &[T], dist: &[T], cap: T) -> Vec<T> {
    sdf.iter()
        .zip(dist)
        .map(|(&s, &d)| {
            let d = if d.is_finite() { d } else { cap };
            if s > T::zero() {
                d
            } else {
                -d
            }
        })
        .collect()
}

pub(crate) fn same_grid<T: Real>(a: &Region<T>, b: &Region<T>) -> Result<()> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Every node with `B.sdf > m·Δx` has `A.sdf > 0`.
pub fn contains<T: Real>(a: &Region<T>, b: &Region<T>, m: Margin) -> Result<bool> {
    same_grid(a, b)?;
    let lim = m.length(&a.grid);
    Ok(a.sdf.iter().zip(&b.sdf).all(|(&av, &bv)| bv <= lim || av > T::zero()))
}

/// Strict form: `B` dilated by `m` cells (in its own field units) lies inside `A`.
pub fn contains_strict<T: Real>(a: &Region<T>, b: &Region<T>, m: Margin) -> Result<bool> {
    same_grid(a, b)?;
    let lim = -m.length(&a.grid);
    Ok(a.sdf.iter().zip(&b.sdf).all(|(&av, &bv)| bv <= lim || av > T::zero()))
}

/// Smallest `A.sdf / Δx` over the nodes of `B`: how far, in cells, `B` sits inside `A`.
/// Negative when `B` pokes out of `A`; `+∞` when `B` is empty.
pub fn containment_margin<T: Real>(a: &Region<T>, b: &Region<T>) -> Result<T> {
    same_grid(a, b)?;
    let h = a.grid.spacing();
    Ok(a.sdf
        .iter()
        .zip(&b.sdf)
        .filter(|(_, &bv)| bv > T::zero())
        .map(|(&av, _)| av / h)
        .fold(T::infinity(), T::min))
}

/// Euclidean distance from `inner` to the boundary of `outer`, read off `outer`'s contour.
pub fn euclidean_gap<T: Real>(inner: &Region<T>, outer: &Region<T>) -> Result<T> {
    field_gap(&inner.redistance()?.sdf, outer)
}

/// Minimum of `−field` over the boundary vertices of `outer`.
pub(crate) fn field_gap<T: Real>(field: &[T], outer: &Region<T>) -> Result<T> {
    let segs = segments(&outer.grid, &outer.sdf);
    if segs.is_empty() {
        return Err(Error::EmptyRegion("gap: outer region has no boundary".into()));
    }
    Ok(segs
        .iter()
        .flat_map(|s| [s.a, s.b])
        .map(|p| -outer.grid.interpolate(field, &p))
        .fold(T::infinity(), T::min))
}

/// Symmetric Hausdorff distance between the boundaries, in Euclidean units.
pub fn hausdorff<T: Real>(a: &Region<T>, b: &Region<T>) -> Result<T> {
    same_grid(a, b)?;
    a.require_nonempty("hausdorff")?;
    b.require_nonempty("hausdorff")?;
    let sa = segments(&a.grid, &a.sdf);
    let sb = segments(&b.grid, &b.sdf);
    Ok(contour::hausdorff_segments(&a.grid, &sa, &sb))
}

/// Inverse optical forms `k⁻¹` at every node of the slice `t`.
pub(crate) fn inverse_optical_field<T: Real>(m: &StandardSpacetime<T>, t: T) -> Result<Vec<SymForm<T>>> {
    m.optical_field(t)?
        .into_iter()
        .map(|k| k.inverse().ok_or_else(|| Error::Precondition("singular optical form".into())))
        .collect()
}

/// Signed optical distance to the boundary of `u` on the slice `t` (positive inside).
pub fn optical_signed_distance<T: Real>(m: &StandardSpacetime<T>, t: T, u: &Region<T>) -> Result<Vec<T>> {
    same_grid_metric(m, u)?;
    u.require_nonempty("optical distance")?;
    let minv = inverse_optical_field(m, t)?;
    let d = distance_to_interface(&u.grid, &u.sdf, Speed::Field(&minv));
    let cap = T::lit(1e6) * u.grid.period();
    Ok(signed(&u.sdf, &d, cap))
}

/// `{x : dist_k(x, U) < δ}` with `k` the optical metric of `M` at time `t`. The field of the
/// result is `δ + signed optical distance to ∂U`.
pub fn optical_ball<T: Real>(m: &StandardSpacetime<T>, t: T, u: &Region<T>, delta: T) -> Result<Region<T>> {
    if !(delta >= T::zero()) {
        return Err(Error::Precondition(format!("ball radius {delta} must be non-negative")));
    }
    let d = optical_signed_distance(m, t, u)?;
    Ok(Region { grid: u.grid, sdf: d.into_iter().map(|v| v + delta).collect(), ball: None })
}

fn same_grid_metric<T: Real>(m: &StandardSpacetime<T>, u: &Region<T>) -> Result<()> {
    if *m.grid() == u.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}
