//! Scenario files: one JSON document per run.

use std::collections::BTreeMap;
use std::path::Path;

use causalkit::distal::DEFAULT_RADIUS_STEP;
use causalkit::grid::MIN_CELLS;
use causalkit::parse_field_expression;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_CELLS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub grid: GridSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub spacetimes: BTreeMap<String, SpacetimeSpec>,
    #[serde(default)]
    pub regions: BTreeMap<String, Shape>,
    #[serde(default)]
    pub pairs: BTreeMap<String, PairSpec>,
    pub command: Command,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub period: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_dim() -> usize {
    2
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpacetimeSpec {
    Minkowski,
    Ultrastatic {
        k_scale: f64,
    },
    /// `beta` and the spatial metric entries `[h11]` or `[h11, h12, h22]` as expression text.
    Expression {
        beta: String,
        h: Vec<String>,
    },
    /// The metric interpolating from `f`'s pulled-back geometry (`t ≤ 0`) to Minkowski (`t ≥ tstar`).
    Distal {
        map: MapSpec,
        tstar: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    Scaling {
        factor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    Radial {
        rstar: f64,
        rho1: f64,
        rho2: f64,
        support: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
}

/// Region primitives. A missing centre means the centre of the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
        radius: f64,
    },
    Box {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
        half: [f64; 2],
    },
    Annulus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
        inner: f64,
        outer: f64,
    },
    Union {
        parts: Vec<Shape>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub t: f64,
    pub inner: String,
    pub outer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Split,
    Rs,
    Both,
    WeakDistal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Development of `{t0} × region` over the horizon, with optional ball oracle.
    Develop {
        spacetime: String,
        region: String,
        t0: f64,
        horizon: [f64; 2],
        #[serde(default)]
        slices: Vec<f64>,
        /// Optical speed for the oracle `ball(R − v|t − t0|)`; needs a ball region.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle_speed: Option<f64>,
    },
    Ball {
        spacetime: String,
        region: String,
        t: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected_radius: Option<f64>,
    },
    VerifyLightspeed {
        spacetime: String,
        target: String,
        delta: f64,
        tstar: f64,
        #[serde(default = "default_lightspeed_samples")]
        samples: usize,
    },
    VerifyStep {
        spacetime: String,
        /// `[S₂, S₁, T₁, T₂]`, innermost first.
        chain: [String; 4],
        tstar: f64,
        #[serde(default = "default_random_checks")]
        random_checks: usize,
        #[serde(default = "default_corner_fraction")]
        corner_fraction: f64,
    },
    Interpolate {
        m1: String,
        m2: String,
        /// `[t1, t1', t2', t2]`.
        times: [f64; 4],
        #[serde(default = "default_interpolation_samples")]
        samples: usize,
    },
    VerifyTheoremChain {
        mbm: String,
        mbn: String,
        pairs: Vec<String>,
        mode: Mode,
        #[serde(default = "default_chain_samples")]
        interpolation_samples: usize,
        #[serde(default = "default_random_checks")]
        random_checks: usize,
    },
    DistalMetric {
        spacetime: String,
        #[serde(default = "default_interpolation_samples")]
        samples: usize,
    },
    Splitcalc {
        #[serde(default = "default_radius_step")]
        radius_step: f64,
        radius_count: usize,
        seeds: Vec<SeedSpec>,
        rules: Vec<Rule>,
        #[serde(default)]
        targets: Vec<TargetSpec>,
    },
}

fn default_lightspeed_samples() -> usize {
    20
}

fn default_random_checks() -> usize {
    2
}

fn default_corner_fraction() -> f64 {
    0.95
}

fn default_interpolation_samples() -> usize {
    10_000
}

fn default_chain_samples() -> usize {
    2000
}

fn default_radius_step() -> f64 {
    DEFAULT_RADIUS_STEP
}

fn default_max_iter() -> usize {
    60
}

fn default_max_rounds() -> usize {
    50
}

/// A seed bound; without a radius it applies to every grid radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub radius: f64,
    pub below: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rule {
    Dilation,
    Scaling,
    /// One bisection pass over every grid radius with each `eps`.
    Bisection {
        eps: Vec<f64>,
        k: u32,
    },
    /// Repeated bisection at one radius with `eps0·2^{−j}`.
    Refine {
        radius: f64,
        eps0: f64,
        k: u32,
        target: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
    Drive {
        target: f64,
        k: u32,
        #[serde(default = "default_max_rounds")]
        max_rounds: usize,
    },
    /// Reports the bound for a set of the given diameter; does not change the model.
    Easydistal {
        diameter: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_hausdorff_cells")]
    pub hausdorff_cells: f64,
    #[serde(default = "default_cone")]
    pub cone: f64,
}

fn default_hausdorff_cells() -> f64 {
    2.0
}

fn default_cone() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hausdorff_cells: default_hausdorff_cells(), cone: default_cone() }
    }
}

/// File names relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contours: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// A parsed scenario with the digest of its source bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub sha256: String,
}

impl Loaded {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        let scenario: Scenario = serde_json::from_slice(bytes).map_err(|e| CliError::schema(e.to_string()))?;
        scenario.validate()?;
        Ok(Self { scenario, sha256: hex::encode(Sha256::digest(bytes)) })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::from_bytes(&bytes)
    }
}

pub const COMMANDS: [&str; 8] =
    ["develop", "ball", "verify-lightspeed", "verify-step", "interpolate", "verify-theorem-chain", "distal-metric", "splitcalc"];

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::Develop { .. } => "develop",
            Command::Ball { .. } => "ball",
            Command::VerifyLightspeed { .. } => "verify-lightspeed",
            Command::VerifyStep { .. } => "verify-step",
            Command::Interpolate { .. } => "interpolate",
            Command::VerifyTheoremChain { .. } => "verify-theorem-chain",
            Command::DistalMetric { .. } => "distal-metric",
            Command::Splitcalc { .. } => "splitcalc",
        }
    }
}

struct Diagnostics(Vec<String>);

impl Diagnostics {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl Scenario {
    /// Semantic checks beyond the JSON shape: names resolve, parameters are in range, and the
    /// command has what it needs.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut d = Diagnostics(Vec::new());
        d.check(
            !self.name.is_empty() && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
            || format!("name `{}` must be non-empty and use only letters, digits, `-` and `_`", self.name),
        );
        self.validate_grid(&mut d);
        for (name, st) in &self.spacetimes {
            self.validate_spacetime(&mut d, name, st);
        }
        for (name, shape) in &self.regions {
            validate_shape(&mut d, &format!("region `{name}`"), shape);
        }
        for (name, p) in &self.pairs {
            d.check(p.t.is_finite(), || format!("pair `{name}`: time must be finite"));
            for r in [&p.inner, &p.outer] {
                d.check(self.regions.contains_key(r), || format!("pair `{name}`: unknown region `{r}`"));
            }
        }
        d.check(positive(self.tolerances.hausdorff_cells), || "tolerances.hausdorff_cells must be positive".into());
        d.check(self.tolerances.cone.is_finite() && self.tolerances.cone >= 0.0, || "tolerances.cone must be non-negative".into());
        self.validate_command(&mut d);
        if d.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Schema(d.0))
        }
    }

    fn validate_grid(&self, d: &mut Diagnostics) {
        let g = &self.grid;
        d.check(g.dim == 1 || g.dim == 2, || format!("grid.dim must be 1 or 2, got {}", g.dim));
        d.check(positive(g.period), || format!("grid.period must be positive, got {}", g.period));
        d.check(g.cells >= MIN_CELLS, || format!("grid.cells must be at least {MIN_CELLS}, got {}", g.cells));
    }

    fn validate_spacetime(&self, d: &mut Diagnostics, name: &str, st: &SpacetimeSpec) {
        let dim = self.grid.dim;
        match st {
            SpacetimeSpec::Minkowski => {}
            SpacetimeSpec::Ultrastatic { k_scale } => {
                d.check(positive(*k_scale), || format!("spacetime `{name}`: k_scale must be positive"));
            }
            SpacetimeSpec::Expression { beta, h } => {
                let want = if dim == 1 { 1 } else { 3 };
                d.check(h.len() == want, || format!("spacetime `{name}`: h needs {want} entries in dimension {dim}, got {}", h.len()));
                for (label, src) in std::iter::once(("beta", beta)).chain(h.iter().map(|s| ("h", s))) {
                    if let Err(e) = parse_field_expression::<f64>(src, dim.clamp(1, 2)) {
                        d.0.push(format!("spacetime `{name}`: {label} `{src}`: {e}"));
                    }
                }
            }
            SpacetimeSpec::Distal { map, tstar, c } => {
                d.check(positive(*tstar), || format!("spacetime `{name}`: tstar must be positive"));
                d.check(c.is_none_or(positive), || format!("spacetime `{name}`: c must be positive"));
                match map {
                    MapSpec::Identity { .. } => {}
                    MapSpec::Scaling { factor, .. } => {
                        d.check(positive(*factor), || format!("spacetime `{name}`: scaling factor must be positive"));
                    }
                    MapSpec::Radial { rstar, rho1, rho2, support, .. } => {
                        d.check(
                            rstar.is_finite() && *rstar >= 0.0 && positive(*rho1) && rho2 > rho1 && support.is_finite(),
                            || format!("spacetime `{name}`: radial map needs 0 ≤ rstar, 0 < rho1 < rho2 and a finite support"),
                        );
                    }
                }
            }
        }
    }

    fn spacetime_ref(&self, d: &mut Diagnostics, field: &str, name: &str) {
        d.check(self.spacetimes.contains_key(name), || format!("command.{field}: unknown spacetime `{name}`"));
    }

    fn region_ref(&self, d: &mut Diagnostics, field: &str, name: &str) {
        d.check(self.regions.contains_key(name), || format!("command.{field}: unknown region `{name}`"));
    }

    fn validate_command(&self, d: &mut Diagnostics) {
        match &self.command {
            Command::Develop { spacetime, region, t0, horizon, slices, oracle_speed } => {
                self.spacetime_ref(d, "spacetime", spacetime);
                self.region_ref(d, "region", region);
                let [lo, hi] = *horizon;
                d.check(lo.is_finite() && hi.is_finite() && lo <= *t0 && t0 <= &hi, || {
                    format!("command.horizon [{lo}, {hi}] must contain t0 = {t0}")
                });
                for t in slices {
                    d.check(lo <= *t && *t <= hi, || format!("command.slices: {t} lies outside the horizon"));
                }
                if let Some(v) = oracle_speed {
                    d.check(positive(*v), || "command.oracle_speed must be positive".into());
                    d.check(matches!(self.regions.get(region), Some(Shape::Ball { .. })), || {
                        "command.oracle_speed needs a ball region".into()
                    });
                }
            }
            Command::Ball { spacetime, region, t, delta, expected_radius } => {
                self.spacetime_ref(d, "spacetime", spacetime);
                self.region_ref(d, "region", region);
                d.check(t.is_finite(), || "command.t must be finite".into());
                d.check(positive(*delta), || "command.delta must be positive".into());
                d.check(expected_radius.is_none_or(positive), || "command.expected_radius must be positive".into());
            }
            Command::VerifyLightspeed { spacetime, target, delta, tstar, samples } => {
                self.spacetime_ref(d, "spacetime", spacetime);
                self.region_ref(d, "target", target);
                d.check(positive(*delta), || "command.delta must be positive".into());
                d.check(tstar.is_finite(), || "command.tstar must be finite".into());
                d.check(*samples > 0, || "command.samples must be positive".into());
            }
            Command::VerifyStep { spacetime, chain, tstar, corner_fraction, .. } => {
                self.spacetime_ref(d, "spacetime", spacetime);
                for r in chain {
                    self.region_ref(d, "chain", r);
                }
                d.check(tstar.is_finite(), || "command.tstar must be finite".into());
                d.check(*corner_fraction > 0.0 && *corner_fraction < 1.0, || "command.corner_fraction must lie in (0, 1)".into());
            }
            Command::Interpolate { m1, m2, times, samples } => {
                self.spacetime_ref(d, "m1", m1);
                self.spacetime_ref(d, "m2", m2);
                d.check(times.windows(2).all(|w| w[0] < w[1]) && times.iter().all(|t| t.is_finite()), || {
                    format!("command.times {times:?} must be finite and strictly increasing")
                });
                d.check(*samples > 0, || "command.samples must be positive".into());
            }
            Command::VerifyTheoremChain { mbm, mbn, pairs, interpolation_samples, .. } => {
                self.spacetime_ref(d, "mbm", mbm);
                self.spacetime_ref(d, "mbn", mbn);
                d.check(!pairs.is_empty(), || "command.pairs must name at least one pair".into());
                for p in pairs {
                    d.check(self.pairs.contains_key(p), || format!("command.pairs: unknown pair `{p}`"));
                }
                let times: Vec<f64> = pairs.iter().filter_map(|p| self.pairs.get(p)).map(|p| p.t).collect();
                d.check(times.windows(2).all(|w| w[0] == w[1]), || "command.pairs must share one time".into());
                d.check(*interpolation_samples > 0, || "command.interpolation_samples must be positive".into());
            }
            Command::DistalMetric { spacetime, samples } => {
                self.spacetime_ref(d, "spacetime", spacetime);
                d.check(matches!(self.spacetimes.get(spacetime), Some(SpacetimeSpec::Distal { .. }) | None), || {
                    format!("command.spacetime `{spacetime}` must be of kind distal")
                });
                d.check(*samples > 0, || "command.samples must be positive".into());
            }
            Command::Splitcalc { radius_step, radius_count, seeds, rules, targets } => {
                d.check(positive(*radius_step), || "command.radius_step must be positive".into());
                d.check(*radius_count > 0, || "command.radius_count must be positive".into());
                d.check(!seeds.is_empty(), || "command.seeds must not be empty".into());
                let r_max = radius_step * *radius_count as f64;
                for s in seeds {
                    d.check(s.value.is_finite() && s.value >= 0.0, || format!("command.seeds: value {} must be finite and non-negative", s.value));
                    if let Some(r) = s.radius {
                        d.check(on_radius_grid(r, *radius_step, *radius_count), || {
                            format!("command.seeds: radius {r} is not a multiple of {radius_step} in (0, {r_max}]")
                        });
                    }
                }
                for rule in rules {
                    validate_rule(d, rule);
                }
                for t in targets {
                    d.check(positive(t.radius) && positive(t.below), || "command.targets need positive radius and bound".into());
                }
            }
        }
    }
}

pub(crate) fn on_radius_grid(r: f64, step: f64, count: usize) -> bool {
    let i = (r / step).round();
    i >= 1.0 && i <= count as f64 && (r - i * step).abs() <= 1e-9 * (1.0 + r)
}

fn validate_rule(d: &mut Diagnostics, rule: &Rule) {
    match rule {
        Rule::Dilation | Rule::Scaling => {}
        Rule::Bisection { eps, k } => {
            d.check(!eps.is_empty() && eps.iter().all(|e| positive(*e)), || "bisection: eps must be a non-empty list of positive values".into());
            d.check(*k > 0, || "bisection: k must be positive".into());
        }
        Rule::Refine { radius, eps0, k, target, max_iter } => {
            d.check(positive(*radius) && positive(*eps0) && positive(*target), || "refine: radius, eps0 and target must be positive".into());
            d.check(*k > 0 && *max_iter > 0, || "refine: k and max_iter must be positive".into());
        }
        Rule::Drive { target, k, max_rounds } => {
            d.check(positive(*target), || "drive: target must be positive".into());
            d.check(*k > 0 && *max_rounds > 0, || "drive: k and max_rounds must be positive".into());
        }
        Rule::Easydistal { diameter } => {
            d.check(diameter.is_finite() && *diameter >= 0.0, || "easydistal: diameter must be non-negative".into());
        }
    }
}

fn validate_shape(d: &mut Diagnostics, at: &str, shape: &Shape) {
    match shape {
        Shape::Ball { radius, .. } => d.check(positive(*radius), || format!("{at}: radius must be positive")),
        Shape::Box { half, .. } => d.check(half.iter().all(|h| positive(*h)), || format!("{at}: half widths must be positive")),
        Shape::Annulus { inner, outer, .. } => {
            d.check(inner.is_finite() && *inner >= 0.0 && outer > inner && outer.is_finite(), || {
                format!("{at}: annulus needs 0 ≤ inner < outer")
            })
        }
        Shape::Union { parts } => {
            d.check(!parts.is_empty(), || format!("{at}: union needs at least one part"));
            for (i, p) in parts.iter().enumerate() {
                validate_shape(d, &format!("{at} part {i}"), p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "m",
        "grid": { "period": 8.0 },
        "spacetimes": { "M": { "kind": "minkowski" } },
        "regions": { "U": { "kind": "ball", "radius": 1.0 } },
        "command": { "kind": "ball", "spacetime": "M", "region": "U", "t": 0.0, "delta": 0.5 }
    }"#;

    #[test]
    fn defaults_fill_in() {
        let l = Loaded::from_bytes(MINIMAL.as_bytes()).unwrap();
        assert_eq!(l.scenario.grid, GridSpec { dim: 2, period: 8.0, cells: DEFAULT_CELLS });
        assert_eq!(l.scenario.tolerances, Tolerances::default());
        assert_eq!(l.scenario.seed, 0);
        assert_eq!(l.sha256.len(), 64);
    }

    #[test]
    fn round_trips_through_json() {
        let s = Loaded::from_bytes(MINIMAL.as_bytes()).unwrap().scenario;
        let again: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn collects_every_diagnostic() {
        let text = MINIMAL.replace("\"radius\": 1.0", "\"radius\": -1.0").replace("\"region\": \"U\"", "\"region\": \"V\"");
        match Loaded::from_bytes(text.as_bytes()) {
            Err(CliError::Schema(d)) => assert_eq!(d.len(), 2, "{d:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn radius_grid_membership() {
        assert!(on_radius_grid(1.0, 0.0125, 400));
        assert!(on_radius_grid(0.0125, 0.0125, 400));
        assert!(!on_radius_grid(0.0, 0.0125, 400));
        assert!(!on_radius_grid(1.01, 0.0125, 400));
        assert!(!on_radius_grid(5.0125, 0.0125, 400));
    }
}
