//! Turns scenario specs into core objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use causalkit::distal::{distal_metric, radial_diffeo, radial_diffeo_with_c, DistalProfile, RadialBump};
use causalkit::morphism::{IdentityMap, MorphismSpec, ScalingMap, SpatialMap};
use causalkit::{Grid, Morphism, Pair, Point, Region, Spacetime, SpatialGrid};

use crate::error::{CliError, Stage};
use crate::scenario::{MapSpec, Scenario, Shape, SpacetimeSpec};

/// A distal spacetime together with the morphism and profile it was built from.
#[derive(Clone)]
pub struct DistalParts {
    pub morphism: Morphism,
    pub tstar: f64,
}

pub struct World {
    pub grid: Grid,
    pub spacetimes: BTreeMap<String, Spacetime>,
    pub distal: BTreeMap<String, DistalParts>,
    pub regions: BTreeMap<String, Region>,
    pub pairs: BTreeMap<String, Pair>,
}

impl World {
    pub fn build(s: &Scenario) -> Result<Self, CliError> {
        let grid = SpatialGrid::new(s.grid.dim, s.grid.period, s.grid.cells).map_err(|e| CliError::schema(e.to_string()))?;
        let mut spacetimes = BTreeMap::new();
        let mut distal = BTreeMap::new();
        for (name, spec) in &s.spacetimes {
            let stage = format!("building spacetime `{name}`");
            let m = match spec {
                SpacetimeSpec::Minkowski => Spacetime::minkowski(grid),
                SpacetimeSpec::Ultrastatic { k_scale } => Spacetime::ultrastatic(grid, *k_scale),
                SpacetimeSpec::Expression { beta, h } => {
                    let h: Vec<&str> = h.iter().map(String::as_str).collect();
                    Spacetime::from_expressions(grid, beta, &h).map_err(|e| CliError::schema(format!("spacetime `{name}`: {e}")))?
                }
                SpacetimeSpec::Distal { map, tstar, c } => {
                    let morphism = build_morphism(&grid, map, *c).stage(&stage)?;
                    let profile = DistalProfile::new(*tstar).stage(&stage)?;
                    let m = distal_metric(&morphism, profile, &grid).stage(&stage)?;
                    distal.insert(name.clone(), DistalParts { morphism, tstar: *tstar });
                    m
                }
            };
            spacetimes.insert(name.clone(), m);
        }
        let mut regions = BTreeMap::new();
        for (name, shape) in &s.regions {
            let r = rasterize(&grid, shape).stage(&format!("rasterizing region `{name}`"))?;
            if r.is_empty() {
                return Err(CliError::schema(format!("region `{name}` covers no grid node")));
            }
            regions.insert(name.clone(), r);
        }
        let mut pairs = BTreeMap::new();
        for (name, p) in &s.pairs {
            let pair = Pair::new(p.t, regions[&p.inner].clone(), regions[&p.outer].clone());
            pairs.insert(name.clone(), pair);
        }
        Ok(Self { grid, spacetimes, distal, regions, pairs })
    }

    pub fn spacetime(&self, name: &str) -> &Spacetime {
        &self.spacetimes[name]
    }

    pub fn region(&self, name: &str) -> &Region {
        &self.regions[name]
    }
}

fn center_or(grid: &Grid, c: Option<[f64; 2]>) -> Point {
    c.map(|c| grid.wrap(&c)).unwrap_or_else(|| grid.center())
}

pub fn rasterize(grid: &Grid, shape: &Shape) -> causalkit::Result<Region> {
    Ok(match shape {
        Shape::Ball { center, radius } => Region::ball(*grid, center_or(grid, *center), *radius),
        Shape::Box { center, half } => Region::axis_box(*grid, center_or(grid, *center), *half),
        Shape::Annulus { center, inner, outer } => Region::annulus(*grid, center_or(grid, *center), *inner, *outer),
        Shape::Union { parts } => {
            let mut acc = rasterize(grid, &parts[0])?;
            for p in &parts[1..] {
                acc = acc.union(&rasterize(grid, p)?)?;
            }
            acc
        }
    })
}

/// Default time scale: the largest admissible `c`, `1/sup‖Df‖`.
fn build_morphism(grid: &Grid, map: &MapSpec, c: Option<f64>) -> causalkit::Result<Morphism> {
    let dim = grid.dim();
    match map {
        MapSpec::Identity { center } => {
            let m: Arc<dyn SpatialMap<f64>> = Arc::new(IdentityMap { dim, center: center_or(grid, *center) });
            MorphismSpec::scaled_diffeo(c.unwrap_or(1.0), m, grid)
        }
        MapSpec::Scaling { factor, center } => {
            let m: Arc<dyn SpatialMap<f64>> = Arc::new(ScalingMap::new(dim, center_or(grid, *center), *factor)?);
            MorphismSpec::scaled_diffeo(c.unwrap_or(1.0 / factor), m, grid)
        }
        MapSpec::Radial { rstar, rho1, rho2, support, center } => {
            let chi = RadialBump::build(*rstar, *rho1, *rho2, *support)?;
            let center = center_or(grid, *center);
            match c {
                Some(c) => radial_diffeo_with_c(chi, center, c, grid),
                None => radial_diffeo(chi, center, grid),
            }
        }
    }
}
