//! Scenario description consumed by the simulator.

use crate::consensus::CommGraph;
use crate::controller::ControlParams;
use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Centralised baseline on true global poses.
    Cvt,
    /// Anchor-oriented coverage after boundary consensus.
    #[default]
    Aoc,
    /// Anchor-oriented coverage where every robot keeps its own boundary.
    AocNoConsensus,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Cvt, Variant::Aoc, Variant::AocNoConsensus];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Cvt => "cvt",
            Variant::Aoc => "aoc",
            Variant::AocNoConsensus => "aoc-no-consensus",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant `{s}` (expected cvt, aoc or aoc-no-consensus)")))
    }
}

fn default_min_separation() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Placement {
    /// Uniform in a square of `half_width` around `center` (default: the
    /// anchor's start), redrawn until every pair is `min_separation` apart.
    Random {
        half_width: f64,
        #[serde(default)]
        center: Option<Point>,
        #[serde(default = "default_min_separation")]
        min_separation: f64,
    },
    /// Global start positions, one per robot.
    Explicit(Vec<Point>),
}

/// Initial headings of the robots' frames.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Orientations {
    Zero,
    #[default]
    Random,
    Degrees(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSigma {
    Shared(f64),
    PerRobot(Vec<f64>),
}

impl Default for NoiseSigma {
    fn default() -> Self {
        NoiseSigma::Shared(0.0)
    }
}

impl NoiseSigma {
    pub fn for_robot(&self, i: usize) -> f64 {
        match self {
            NoiseSigma::Shared(s) => *s,
            NoiseSigma::PerRobot(v) => v[i],
        }
    }

    fn validate(&self, field: &str, robots: usize) -> Result<()> {
        let values: &[f64] = match self {
            NoiseSigma::Shared(s) => std::slice::from_ref(s),
            NoiseSigma::PerRobot(v) => {
                if v.len() != robots {
                    return Err(Error::config(field, format!("lists {} values for {robots} robots", v.len())));
                }
                v
            }
        };
        if let Some(bad) = values.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::config(field, format!("must be non-negative, got {bad}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseChange {
    pub step: usize,
    pub noise_sigma: NoiseSigma,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnchorConfig {
    /// Global position at `t = 0`.
    pub start: Point,
    /// Global velocity, m/s.
    pub velocity: Point,
    /// Per-axis standard deviation of every robot's anchor estimate, m.
    pub noise_sigma: NoiseSigma,
    /// Noise levels taking effect at the given steps. Each change triggers a
    /// fresh consensus from the original proposals.
    pub noise_schedule: Vec<NoiseChange>,
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusConfig {
    /// Step size; defaults to `0.5 / max degree`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Defaults to `50 · robots`.
    #[serde(default)]
    pub max_iters: Option<usize>,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            tolerance: default_tolerance(),
            max_iters: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    #[default]
    Complete,
    Path,
    Ring,
    Edges(Vec<(usize, usize)>),
}

impl GraphSpec {
    pub fn build(&self, n: usize) -> Result<CommGraph> {
        match self {
            GraphSpec::Complete => Ok(CommGraph::complete(n)),
            GraphSpec::Path => Ok(CommGraph::path(n)),
            GraphSpec::Ring => Ok(CommGraph::ring(n)),
            GraphSpec::Edges(e) => CommGraph::new(n, e).map_err(|e| Error::config("graph", e.to_string())),
        }
    }
}

fn default_resolution() -> usize {
    256
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub robots: usize,
    /// Nominal half-width `r*` of the square workspace, m.
    pub boundary_radius: f64,
    /// Variance of the robots' initial radius proposals, m².
    #[serde(default)]
    pub radius_variance: f64,
    /// When set, every robot proposes this orientation (degrees) instead of
    /// its own heading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_proposal_deg: Option<f64>,
    /// Half-width of the physical environment, m; used for rendering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arena_half_width: Option<f64>,
    pub placement: Placement,
    #[serde(default)]
    pub orientations: Orientations,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub anchor: AnchorConfig,
    #[serde(default)]
    pub density: DensityField,
    #[serde(default)]
    pub control: ControlParams,
    #[serde(default)]
    pub consensus: ConsensusConfig,
    #[serde(default)]
    pub graph: GraphSpec,
    /// Maximum number of recorded steps.
    pub horizon: usize,
    /// Integration cells per workspace side.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "yes")]
    pub stop_on_convergence: bool,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.robots;
        if n == 0 {
            return Err(Error::config("robots", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if !(self.boundary_radius > 0.0 && self.boundary_radius.is_finite()) {
            return Err(Error::config("boundary_radius", format!("must be positive, got {}", self.boundary_radius)));
        }
        if !(self.radius_variance >= 0.0 && self.radius_variance.is_finite()) {
            return Err(Error::config(
                "radius_variance",
                format!("must be non-negative, got {}", self.radius_variance),
            ));
        }
        if let Some(d) = self.orientation_proposal_deg {
            if !d.is_finite() {
                return Err(Error::config("orientation_proposal_deg", "must be finite"));
            }
        }
        if let Some(a) = self.arena_half_width {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::config("arena_half_width", format!("must be positive, got {a}")));
            }
        }
        if self.resolution < 16 {
            return Err(Error::config("resolution", format!("must be at least 16, got {}", self.resolution)));
        }
        match &self.placement {
            Placement::Random {
                half_width,
                center,
                min_separation,
            } => {
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::config("placement.random.half_width", "must be positive"));
                }
                if !(*min_separation >= 1e-6 && min_separation.is_finite()) {
                    return Err(Error::config("placement.random.min_separation", "must be at least 1e-6"));
                }
                if center.is_some_and(|c| !c.is_finite()) {
                    return Err(Error::config("placement.random.center", "must be finite"));
                }
                // a packing bound keeps rejection sampling finite
                let cells = (2.0 * half_width / min_separation).powi(2);
                if cells < 4.0 * n as f64 {
                    return Err(Error::config(
                        "placement.random",
                        format!("cannot fit {n} robots {min_separation} m apart in half-width {half_width}"),
                    ));
                }
            }
            Placement::Explicit(ps) => {
                if ps.len() != n {
                    return Err(Error::config("placement.explicit", format!("lists {} positions for {n} robots", ps.len())));
                }
                for (i, p) in ps.iter().enumerate() {
                    if !p.is_finite() {
                        return Err(Error::config("placement.explicit", format!("position {i} is not finite")));
                    }
                    for (j, q) in ps.iter().enumerate().skip(i + 1) {
                        if p.distance(*q) < 1e-6 {
                            return Err(Error::config("placement.explicit", format!("positions {i} and {j} coincide")));
                        }
                    }
                }
            }
        }
        if let Orientations::Degrees(d) = &self.orientations {
            if d.len() != n {
                return Err(Error::config("orientations.degrees", format!("lists {} angles for {n} robots", d.len())));
            }
            if d.iter().any(|a| !a.is_finite()) {
                return Err(Error::config("orientations.degrees", "angles must be finite"));
            }
        }
        if !self.anchor.start.is_finite() {
            return Err(Error::config("anchor.start", "must be finite"));
        }
        if !self.anchor.velocity.is_finite() {
            return Err(Error::config("anchor.velocity", "must be finite"));
        }
        self.anchor.noise_sigma.validate("anchor.noise_sigma", n)?;
        for (k, change) in self.anchor.noise_schedule.iter().enumerate() {
            change
                .noise_sigma
                .validate(&format!("anchor.noise_schedule[{k}].noise_sigma"), n)?;
        }
        self.density.validate()?;
        self.control.validate()?;
        let c = &self.consensus;
        if let Some(a) = c.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::config("consensus.alpha", format!("must lie in (0, 1], got {a}")));
            }
        }
        if !(c.tolerance > 0.0 && c.tolerance.is_finite()) {
            return Err(Error::config("consensus.tolerance", "must be positive"));
        }
        if c.max_iters == Some(0) {
            return Err(Error::config("consensus.max_iters", "must be at least 1"));
        }
        let graph = self.graph.build(n)?;
        if !graph.is_connected() {
            return Err(Error::config("graph", "communication graph must be connected"));
        }
        Ok(())
    }

    pub fn consensus_alpha(&self, graph: &CommGraph) -> f64 {
        self.consensus.alpha.unwrap_or_else(|| graph.default_alpha())
    }

    pub fn consensus_max_iters(&self) -> usize {
        self.consensus.max_iters.unwrap_or(50 * self.robots)
    }

    /// Same scenario with every time-dependent input held at `t = 0`.
    pub fn frozen(&self) -> Self {
        let mut c = self.clone();
        c.anchor.velocity = Point::ORIGIN;
        c.density = c.density.frozen_at(0.0);
        c
    }
}
