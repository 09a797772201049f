//! Numerical toolkit for globally hyperbolic spacetimes of the form `−β dt² + h_t` over a
//! periodic spatial slice: optical cones, Cauchy developments, Cauchy pairs and their
//! precedence preorder, metric interpolation, theorem-chain verification and distal
//! splitting-distance bounds.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`). The `f64` aliases at the crate root
//! cover the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod deform;
pub mod distal;
pub mod error;
pub mod expr;
pub mod form;
pub mod geometry;
pub mod grid;
pub mod morphism;
pub mod pairs;
pub mod regions;
pub mod scalar;
pub mod smooth;

pub use causal::{develop, slice_contained, SliceSummary, CFL, SPEED_SAFETY};
pub use deform::{
    interpolate, verify_interpolation, verify_theorem_chain, ChainMode, ChainOptions, ChainReport, InterpolationReport,
};
pub use distal::{
    apply_diffeo_bound, apply_easydistal, bisection_bound, bisection_refine, distal_cone_certificate, distal_metric,
    drive_all_below, radial_diffeo, radial_diffeo_with_c, refine_until, ConeCertificate, DiffeoBound, DriveReport,
    Provenance, RefineTrace,
};
pub use error::{Error, Result};
pub use form::{Mat2, SymForm};
pub use geometry::{cone_contained, cone_margin, optical_metric, parse_field_expression, ANALYTIC_CONE_TOL, PARSED_CONE_TOL};
pub use grid::SpatialGrid;
pub use morphism::{apply_map, map_region, Direction, MorphismSpec, SpatialMap};
pub use pairs::{
    check_chain, lightspeed_epsilon, precedence, precedes, precedes_margin, regularity, step_pairs, step_pairs_with,
    transport_pair, verify_lightspeed, LightspeedEstimate, LightspeedReport, Precedence, StepCertificate, StepOptions,
};
pub use regions::{contains, contains_strict, containment_margin, hausdorff, optical_ball, Margin};
pub use scalar::Real;

pub type Point = form::Point<f64>;
pub type Grid = grid::SpatialGrid<f64>;
pub type Spacetime = geometry::StandardSpacetime<f64>;
pub type Optical = geometry::OpticalForm<f64>;
pub type Form = form::SymForm<f64>;
pub type Region = regions::Region<f64>;
pub type Development = causal::DevelopmentField<f64>;
pub type Pair = pairs::CauchyPair<f64>;
pub type Times = deform::InterpolationTimes<f64>;
pub type Chain = deform::CauchyChain<f64>;
pub type Morphism = morphism::MorphismSpec<f64>;
pub type Bump = distal::RadialBump<f64>;
pub type Radial = distal::RadialDiffeo<f64>;
pub type Profile = distal::DistalProfile<f64>;
pub type Model = distal::DistanceModel<f64>;
