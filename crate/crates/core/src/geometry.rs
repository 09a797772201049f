//! Standard-form spacetimes `g = β dt⊗dt − h_t` on ℝ × torus, their instantaneous optical
//! metrics `k = h_t / β`, and light-cone containment.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::FieldExpression;
use crate::form::{Point, SymForm};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

/// Cone tolerance for analytic metrics.
pub const ANALYTIC_CONE_TOL: f64 = 1e-10;
/// Cone tolerance for metrics built from parsed expressions.
pub const PARSED_CONE_TOL: f64 = 1e-6;

pub type ScalarSampler<T> = Arc<dyn Fn(T, &Point<T>) -> Result<T> + Send + Sync>;
pub type FormSampler<T> = Arc<dyn Fn(T, &Point<T>) -> Result<SymForm<T>> + Send + Sync>;

/// A metric in standard form, given pointwise by pure samplers for `β` and `h_t`.
#[derive(Clone)]
pub struct StandardSpacetime<T> {
    grid: SpatialGrid<T>,
    beta: ScalarSampler<T>,
    hmetric: FormSampler<T>,
    label: String,
    static_metric: bool,
}

impl<T: Real> fmt::Debug for StandardSpacetime<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StandardSpacetime")
            .field("label", &self.label)
            .field("grid", &self.grid)
            .field("static_metric", &self.static_metric)
            .finish()
    }
}

impl<T: Real> StandardSpacetime<T> {
    pub fn new(grid: SpatialGrid<T>, beta: ScalarSampler<T>, hmetric: FormSampler<T>) -> Self {
        Self { grid, beta, hmetric, label: "custom".into(), static_metric: false }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Declares that neither `β` nor `h` depends on `t`, letting solvers cache optical forms.
    pub fn with_static_metric(mut self, is_static: bool) -> Self {
        self.static_metric = is_static;
        self
    }

    /// `β ≡ 1`, `h = δ`.
    pub fn minkowski(grid: SpatialGrid<T>) -> Self {
        Self::ultrastatic(grid, T::one()).with_label("minkowski")
    }

    /// Ultrastatic with constant optical form `k = k_scale·δ` (`β ≡ 1`).
    pub fn ultrastatic(grid: SpatialGrid<T>, k_scale: T) -> Self {
        let dim = grid.dim();
        let beta: ScalarSampler<T> = Arc::new(|_, _| Ok(T::one()));
        let h: FormSampler<T> = Arc::new(move |_, _| Ok(SymForm::scaled_identity(dim, k_scale)));
        Self::new(grid, beta, h)
            .with_label(format!("ultrastatic(k={k_scale})"))
            .with_static_metric(true)
    }

    /// `β ≡ 1`, `h_t = e^{2·rate·t} δ`: spatial scale factor `e^{rate·t}`.
    pub fn exponential_scale(grid: SpatialGrid<T>, rate: T) -> Self {
        let dim = grid.dim();
        let beta: ScalarSampler<T> = Arc::new(|_, _| Ok(T::one()));
        let two = T::lit(2.0);
        let h: FormSampler<T> =
            Arc::new(move |t, _| Ok(SymForm::scaled_identity(dim, (two * rate * t).exp())));
        Self::new(grid, beta, h).with_label(format!("exponential-scale(rate={rate})"))
    }

    /// Metric from expression text: `beta`, and `h` entries `[h11]` in one dimension or
    /// `[h11, h12, h22]` in two.
    pub fn from_expressions(grid: SpatialGrid<T>, beta: &str, h: &[&str]) -> Result<Self> {
        let dim = grid.dim();
        let want = if dim == 1 { 1 } else { 3 };
        if h.len() != want {
            return Err(Error::Precondition(format!(
                "spatial metric needs {want} component(s) in dimension {dim}, got {}",
                h.len()
            )));
        }
        let beta_expr = FieldExpression::parse(beta, dim)?;
        let h_exprs = h.iter().map(|s| FieldExpression::parse(s, dim)).collect::<Result<Vec<_>>>()?;
        let is_static = beta_expr.is_time_independent() && h_exprs.iter().all(|e| e.is_time_independent());
        let beta_s: ScalarSampler<T> = Arc::new(move |t, x| beta_expr.eval(t, x));
        let h_s: FormSampler<T> = Arc::new(move |t, x| {
            if h_exprs.len() == 1 {
                Ok(SymForm::new1(h_exprs[0].eval(t, x)?))
            } else {
                Ok(SymForm::new(h_exprs[0].eval(t, x)?, h_exprs[1].eval(t, x)?, h_exprs[2].eval(t, x)?))
            }
        });
        Ok(Self::new(grid, beta_s, h_s).with_label("expression").with_static_metric(is_static))
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_static(&self) -> bool {
        self.static_metric
    }

    pub fn beta(&self, t: T, x: &Point<T>) -> Result<T> {
        (self.beta)(t, x)
    }

    pub fn hmetric(&self, t: T, x: &Point<T>) -> Result<SymForm<T>> {
        (self.hmetric)(t, x)
    }

    pub fn beta_sampler(&self) -> ScalarSampler<T> {
        self.beta.clone()
    }

    pub fn hmetric_sampler(&self) -> FormSampler<T> {
        self.hmetric.clone()
    }

    /// Optical form at `(t, x)`; see [`optical_metric`].
    pub fn optical(&self, t: T, x: &Point<T>) -> Result<OpticalForm<T>> {
        optical_metric(self, t, x)
    }

    /// Optical forms at every grid node on the slice `t`.
    pub fn optical_field(&self, t: T) -> Result<Vec<SymForm<T>>> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.optical(t, &self.grid.point(i)).map(|k| k.form()))
            .collect()
    }
}

/// Instantaneous optical metric `k = β⁻¹ h_t` at a point, always positive definite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalForm<T>(SymForm<T>);

impl<T: Real> OpticalForm<T> {
    pub fn form(&self) -> SymForm<T> {
        self.0
    }

    /// Coordinate speed of light in the direction it is fastest: `sqrt(λ_max(k⁻¹))`.
    pub fn max_speed(&self) -> T {
        (T::one() / self.0.min_eigenvalue()).sqrt()
    }
}

fn invalid<T: Real>(t: T, x: &Point<T>, reason: String) -> Error {
    Error::InvalidMetric { t: t.to_f(), x: [x[0].to_f(), x[1].to_f()], reason }
}

pub fn optical_metric<T: Real>(m: &StandardSpacetime<T>, t: T, x: &Point<T>) -> Result<OpticalForm<T>> {
    let beta = m.beta(t, x)?;
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(invalid(t, x, format!("beta = {beta} is not positive")));
    }
    let h = m.hmetric(t, x)?;
    if !h.is_positive_definite() {
        return Err(invalid(t, x, format!("spatial metric {h:?} is not positive definite")));
    }
    Ok(OpticalForm(h * (T::one() / beta)))
}

/// Smallest eigenvalue of `k_a − k_b`. Non-negative iff the light cone of `a` lies inside
/// that of `b` at `(t, x)`.
pub fn cone_margin<T: Real>(a: &StandardSpacetime<T>, b: &StandardSpacetime<T>, t: T, x: &Point<T>) -> Result<T> {
    let ka = optical_metric(a, t, x)?.form();
    let kb = optical_metric(b, t, x)?.form();
    Ok((ka - kb).min_eigenvalue())
}

/// Every `a`-timelike vector at `(t, x)` is `b`-timelike, up to `tol`.
pub fn cone_contained<T: Real>(
    a: &StandardSpacetime<T>,
    b: &StandardSpacetime<T>,
    t: T,
    x: &Point<T>,
    tol: T,
) -> Result<bool> {
    Ok(cone_margin(a, b, t, x)? >= -tol)
}

/// Parses a scalar field into a pure sampler.
pub fn parse_field_expression<T: Real>(src: &str, spatial_dim: usize) -> Result<ScalarSampler<T>> {
    let e = FieldExpression::parse(src, spatial_dim)?;
    Ok(Arc::new(move |t, x| e.eval(t, x)))
}
