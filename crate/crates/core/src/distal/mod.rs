//! Distal-split toolbox: radial bump, radial diffeomorphism, the inflationary metric, and the
//! calculus of upper bounds on splitting distances.

mod bump;
mod calculus;
mod diffeo;
mod metric;

pub use bump::{RadialBump, DECAY_SLOPE, TRANSITION_FRACTION, VALIDATION_SAMPLES};
pub use calculus::*;
pub use diffeo::{radial_diffeo, radial_diffeo_with_c, RadialDiffeo};
pub use metric::{distal_cone_certificate, distal_metric, pushed_metric, sampled_contraction_excess, ConeCertificate, DistalProfile};
