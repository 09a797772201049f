//! The two kinds of Cauchy morphism used by the constructions: slab inclusions and scaled
//! diffeomorphisms `(t, x) ↦ (t / c, f(x))`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{Mat2, Point};
use crate::grid::SpatialGrid;
use crate::regions::{BallHint, Region};
use crate::scalar::Real;

/// A diffeomorphism of the plane (or line) written about a centre, acting on the torus through
/// the fundamental domain around that centre.
pub trait SpatialMap<T: Real>: Send + Sync {
    fn describe(&self) -> String;
    fn center(&self) -> Point<T>;
    fn forward_local(&self, d: &Point<T>) -> Point<T>;
    fn inverse_local(&self, e: &Point<T>) -> Result<Point<T>>;
    /// `Df` at the local point `d`.
    fn jacobian_local(&self, d: &Point<T>) -> Mat2<T>;

    /// `sup ‖Df‖` over the whole chart, when known independently of any grid.
    fn max_stretch(&self) -> Option<T> {
        None
    }

    /// Exact image of a ball, when the map sends balls to balls.
    fn image_ball(&self, _ball: &BallHint<T>) -> Option<BallHint<T>> {
        None
    }

    /// Exact preimage of a ball, when the map sends balls to balls.
    fn preimage_ball(&self, _ball: &BallHint<T>) -> Option<BallHint<T>> {
        None
    }
}

impl<T: Real> fmt::Debug for dyn SpatialMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap<T> {
    pub dim: usize,
    pub center: Point<T>,
}

impl<T: Real> SpatialMap<T> for IdentityMap<T> {
    fn describe(&self) -> String {
        "identity".into()
    }

    fn center(&self) -> Point<T> {
        self.center
    }

    fn forward_local(&self, d: &Point<T>) -> Point<T> {
        *d
    }

    fn inverse_local(&self, e: &Point<T>) -> Result<Point<T>> {
        Ok(*e)
    }

    fn jacobian_local(&self, _d: &Point<T>) -> Mat2<T> {
        Mat2::scaled_identity(self.dim, T::one())
    }

    fn max_stretch(&self) -> Option<T> {
        Some(T::one())
    }

    fn image_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        Some(*ball)
    }

    fn preimage_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        Some(*ball)
    }
}

/// `f(x) = c₀ + factor·(x − c₀)`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingMap<T> {
    pub dim: usize,
    pub center: Point<T>,
    pub factor: T,
}

impl<T: Real> ScalingMap<T> {
    pub fn new(dim: usize, center: Point<T>, factor: T) -> Result<Self> {
        if !(factor > T::zero() && factor.is_finite()) {
            return Err(Error::Construction(format!("scaling factor {factor} must be positive")));
        }
        Ok(Self { dim, center, factor })
    }
}

impl<T: Real> SpatialMap<T> for ScalingMap<T> {
    fn describe(&self) -> String {
        format!("scaling(factor={})", self.factor)
    }

    fn center(&self) -> Point<T> {
        self.center
    }

    fn forward_local(&self, d: &Point<T>) -> Point<T> {
        [d[0] * self.factor, d[1] * self.factor]
    }

    fn inverse_local(&self, e: &Point<T>) -> Result<Point<T>> {
        Ok([e[0] / self.factor, e[1] / self.factor])
    }

    fn jacobian_local(&self, _d: &Point<T>) -> Mat2<T> {
        Mat2::scaled_identity(self.dim, self.factor)
    }

    fn max_stretch(&self) -> Option<T> {
        Some(self.factor)
    }

    fn image_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        let d = [ball.center[0] - self.center[0], ball.center[1] - self.center[1]];
        let e = self.forward_local(&d);
        Some(BallHint { center: [self.center[0] + e[0], self.center[1] + e[1]], radius: ball.radius * self.factor })
    }

    fn preimage_ball(&self, ball: &BallHint<T>) -> Option<BallHint<T>> {
        let e = [ball.center[0] - self.center[0], ball.center[1] - self.center[1]];
        let d = [e[0] / self.factor, e[1] / self.factor];
        Some(BallHint { center: [self.center[0] + d[0], self.center[1] + d[1]], radius: ball.radius / self.factor })
    }
}

/// Applies a map to a torus point. `None` when the point's image under the local chart leaves
/// the fundamental domain about the centre.
pub fn apply_map<T: Real>(map: &dyn SpatialMap<T>, grid: &SpatialGrid<T>, x: &Point<T>, dir: Direction) -> Result<Option<Point<T>>> {
    let c = map.center();
    let d = grid.displacement(&c, x);
    let e = match dir {
        Direction::Forward => map.forward_local(&d),
        Direction::Inverse => map.inverse_local(&d)?,
    };
    let half = grid.period() / T::lit(2.0);
    if (0..grid.dim()).any(|i| e[i].abs() >= half) {
        return Ok(None);
    }
    Ok(Some(grid.wrap(&[c[0] + e[0], c[1] + e[1]])))
}

/// `D(f⁻¹)` at the torus point `y`.
pub fn inverse_jacobian<T: Real>(map: &dyn SpatialMap<T>, grid: &SpatialGrid<T>, y: &Point<T>) -> Result<Mat2<T>> {
    let e = grid.displacement(&map.center(), y);
    let d = map.inverse_local(&e)?;
    map.jacobian_local(&d)
        .inverse()
        .ok_or_else(|| Error::Construction(format!("singular Jacobian at local point {d:?}")))
}

/// Image (`Forward`) or preimage (`Inverse`) of a region, rasterized from the pulled-back field
/// and redistanced. Fails if the region reaches the edge of the chart.
pub fn map_region<T: Real>(map: &dyn SpatialMap<T>, region: &Region<T>, dir: Direction) -> Result<Region<T>> {
    let grid = *region.grid();
    let n = grid.cells();
    let edge = grid.period() / T::lit(2.0) - T::lit(1.5) * grid.spacing();
    let c = map.center();
    for i in 0..grid.len() {
        if region.sdf()[i] > -grid.spacing() {
            let d = grid.displacement(&c, &grid.point(i));
            if (0..grid.dim()).any(|k| d[k].abs() >= edge) {
                return Err(Error::Escape(format!(
                    "region reaches the chart edge at node {:?} of a {n}-cell grid",
                    grid.coords(i)
                )));
            }
        }
    }
    let back = match dir {
        Direction::Forward => Direction::Inverse,
        Direction::Inverse => Direction::Forward,
    };
    let outside = -grid.period();
    let mut sdf = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let v = match apply_map(map, &grid, &grid.point(i), back)? {
            Some(x) => region.value_at(&x),
            None => outside,
        };
        sdf.push(v);
    }
    let hint = region.ball_hint().and_then(|b| match dir {
        Direction::Forward => map.image_ball(&b),
        Direction::Inverse => map.preimage_ball(&b),
    });
    let raw = Region::from_sdf(grid, sdf)?;
    if raw.is_empty() {
        return Err(Error::Transport("mapped region has no interior nodes".into()));
    }
    Ok(raw.redistance()?.with_ball_hint(hint))
}

#[derive(Clone)]
pub enum MorphismSpec<T: Real> {
    /// Inclusion of the slab `(lo, hi) × Σ`; the identity on points.
    SlabInclusion { lo: T, hi: T },
    /// `(t, x) ↦ (t / c, f(x))`.
    ScaledDiffeo { c: T, map: Arc<dyn SpatialMap<T>> },
}

impl<T: Real> fmt::Debug for MorphismSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismSpec::SlabInclusion { lo, hi } => write!(f, "SlabInclusion({lo}, {hi})"),
            MorphismSpec::ScaledDiffeo { c, map } => write!(f, "ScaledDiffeo(c={c}, {})", map.describe()),
        }
    }
}

impl<T: Real> MorphismSpec<T> {
    pub fn slab(lo: T, hi: T) -> Result<Self> {
        if lo < hi {
            Ok(MorphismSpec::SlabInclusion { lo, hi })
        } else {
            Err(Error::Construction(format!("empty slab ({lo}, {hi})")))
        }
    }

    /// Scaled diffeomorphism, checking `c·‖Df‖ ≤ 1` at every grid node of the chart.
    pub fn scaled_diffeo(c: T, map: Arc<dyn SpatialMap<T>>, grid: &SpatialGrid<T>) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::Construction(format!("time scale c = {c} must be positive")));
        }
        let spec = MorphismSpec::ScaledDiffeo { c, map };
        let excess = spec.contraction_excess(grid);
        if excess > T::lit(1e-12) {
            return Err(Error::Construction(format!("c·‖Df‖ exceeds 1 by {excess}")));
        }
        Ok(spec)
    }

    /// `max c·‖Df‖ − 1` over the grid nodes and the map's own stretch bound, if it has one
    /// (zero for slab inclusions).
    pub fn contraction_excess(&self, grid: &SpatialGrid<T>) -> T {
        match self {
            MorphismSpec::SlabInclusion { .. } => T::zero(),
            MorphismSpec::ScaledDiffeo { c, map } => {
                let nodes = (0..grid.len())
                    .map(|i| {
                        let d = grid.displacement(&map.center(), &grid.point(i));
                        *c * map.jacobian_local(&d).operator_norm() - T::one()
                    })
                    .fold(T::neg_infinity(), T::max);
                match map.max_stretch() {
                    Some(s) => nodes.max(*c * s - T::one()),
                    None => nodes,
                }
            }
        }
    }
}
