//! Declarative run configuration. A TOML file supplies any subset of the
//! fields, command-line flags override it, and the resolved value is echoed
//! into every output directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use onetwo::census::{Adjacency, ObservationWindow};
use onetwo::sampler::{SamplerOptions, DEFAULT_BLOCK_RADIUS, DEFAULT_BURN_IN, DEFAULT_THINNING};
use onetwo::surgery::DEFAULT_TRIDENT_THRESHOLD;
use onetwo::{Boundary, BoxSpec, Geometry, LocalCode, Weights};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Default output root when neither `--out` nor `out` is given.
pub const OUT_ROOT_ENV: &str = "ONETWO_OUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub seed: u64,
    /// Not echoed: the same run written to two places must hash the same.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub geometry: GeometryConfig,
    pub weights: WeightsConfig,
    pub sampler: SamplerConfig,
    pub census: CensusConfig,
    pub surgery: SurgeryConfig,
    pub partitions: PartitionsConfig,
    pub keane: KeaneConfig,
    pub render: RenderConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            seed: 1,
            out: None,
            geometry: GeometryConfig::default(),
            weights: WeightsConfig::default(),
            sampler: SamplerConfig::default(),
            census: CensusConfig::default(),
            surgery: SurgeryConfig::default(),
            partitions: PartitionsConfig::default(),
            keane: KeaneConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Torus,
    Window,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Exterior edges absent, boundary vertices unconstrained by them.
    Free,
    /// Every exterior edge fixed absent.
    Absent,
    /// Every exterior edge fixed present.
    Present,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: GeometryKind,
    #[serde(rename = "L")]
    pub l: usize,
    pub width: usize,
    pub height: usize,
    pub boundary: BoundaryKind,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { kind: GeometryKind::Torus, l: 8, width: 4, height: 4, boundary: BoundaryKind::Absent }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<Arc<Geometry>> {
        let g = match self.kind {
            GeometryKind::Torus => Geometry::torus(self.l)?,
            GeometryKind::Window => {
                let free = Geometry::window(self.width, self.height, Boundary::Free)?;
                let stubs = free.stub_count();
                match self.boundary {
                    BoundaryKind::Free => free,
                    BoundaryKind::Absent => free.with_boundary(Boundary::Fixed(vec![false; stubs]))?,
                    BoundaryKind::Present => free.with_boundary(Boundary::Fixed(vec![true; stubs]))?,
                }
            }
        };
        Ok(Arc::new(g))
    }
}

/// Central cell, the default box center.
pub fn center_of(g: &Geometry) -> (i64, i64) {
    ((g.width() / 2) as i64, (g.height() / 2) as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig { a: 1.0, b: 1.0, c: 1.0 }
    }
}

impl WeightsConfig {
    pub fn build(&self) -> Result<Weights<f64>> {
        Ok(Weights::new(self.a, self.b, self.c)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Sweeps after burn-in; every `thin`-th one is kept.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub block_radius: usize,
    pub flips_per_sweep: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sweeps: 1000,
            burn_in: DEFAULT_BURN_IN,
            thin: DEFAULT_THINNING,
            block_radius: DEFAULT_BLOCK_RADIUS,
            flips_per_sweep: 0,
        }
    }
}

impl SamplerConfig {
    pub fn options(&self) -> SamplerOptions {
        SamplerOptions { block_radius: self.block_radius, flips_per_sweep: self.flips_per_sweep }
    }

    pub fn kept_samples(&self) -> usize {
        self.sweeps / self.thin.max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WindowConfig {
    /// The whole geometry; its rim is the set of vertices with exterior edges.
    Whole,
    /// A box whose own boundary vertices form the rim.
    Box { n: usize, center: Option<(i64, i64)> },
    /// A box plus the ring of vertices just outside it, which forms the rim.
    Ring { n: usize, center: Option<(i64, i64)> },
}

impl WindowConfig {
    /// A torus has no boundary, so its default window is an inset box.
    pub fn build(&self, g: &Geometry) -> Result<ObservationWindow> {
        let middle = center_of(g);
        let center = |c: &Option<(i64, i64)>| c.unwrap_or(middle);
        let w = match self {
            WindowConfig::Whole if g.is_torus() => {
                let n = g.width().saturating_sub(2).max(1);
                ObservationWindow::from_box(g, BoxSpec::new(n, middle))?
            }
            WindowConfig::Whole => ObservationWindow::whole(g),
            WindowConfig::Box { n, center: c } => ObservationWindow::from_box(g, BoxSpec::new(*n, center(c)))?,
            WindowConfig::Ring { n, center: c } => {
                ObservationWindow::box_with_outer_ring(g, BoxSpec::new(*n, center(c)))?
            }
        };
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusConfig {
    pub adjacency: Adjacency,
    pub window: WindowConfig,
    /// Second-largest cluster fraction counted as coexistence.
    pub coexist_fraction: f64,
    /// Number of leading samples rendered as SVG.
    pub render: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig { adjacency: Adjacency::Lattice, window: WindowConfig::Whole, coexist_fraction: 0.1, render: 0 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SurgeryOp {
    Rewire,
    Encounter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurgeryConfig {
    pub op: SurgeryOp,
    #[serde(rename = "N")]
    pub n: usize,
    pub center: Option<(i64, i64)>,
    /// Local code, as an integer `1..=6`.
    pub code: u8,
    pub threshold: usize,
    pub adjacency: Adjacency,
    /// Observation window for the encounter surgery; defaults to `B_{N+2}`
    /// plus its outer ring.
    pub window: Option<WindowConfig>,
}

impl Default for SurgeryConfig {
    fn default() -> Self {
        SurgeryConfig {
            op: SurgeryOp::Rewire,
            n: 3,
            center: None,
            code: LocalCode::HORIZONTAL.value(),
            threshold: DEFAULT_TRIDENT_THRESHOLD,
            adjacency: Adjacency::Lattice,
            window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionsConfig {
    #[serde(rename = "Ysize")]
    pub y_size: usize,
}

impl Default for PartitionsConfig {
    fn default() -> Self {
        PartitionsConfig { y_size: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeaneConfig {
    pub s: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub code: u8,
    pub center: Option<(i64, i64)>,
    pub adjacency: Adjacency,
}

impl Default for KeaneConfig {
    fn default() -> Self {
        KeaneConfig { s: 4, n: 1, code: LocalCode::HORIZONTAL.value(), center: None, adjacency: Adjacency::Lattice }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub clusters: bool,
    /// Shade only clusters of this code.
    pub code: Option<u8>,
    pub adjacency: Adjacency,
    /// `[x0, y0, width, height]` in cells.
    pub crop: Option<[i64; 4]>,
    pub max_vertices: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { clusters: true, code: None, adjacency: Adjacency::Lattice, crop: None, max_vertices: 2 * 96 * 96 }
    }
}

pub fn parse_code(value: u8) -> Result<LocalCode> {
    let code = LocalCode::new(value)?;
    if !code.is_valid() {
        bail!("code {value:03b} is not a valid local code");
    }
    Ok(code)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text)?;
        if cfg.schema != SCHEMA_VERSION {
            bail!("config schema {} is not supported (expected {SCHEMA_VERSION})", cfg.schema);
        }
        Ok(cfg)
    }

    /// The resolved configuration as written to `config.toml`.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// `--out`, then `out`, then `$ONETWO_OUT_ROOT/<command>`, then
    /// `onetwo-out/<command>`.
    pub fn output_dir(&self, command: &str) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        match std::env::var_os(OUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(command),
            None => PathBuf::from("onetwo-out").join(command),
        }
    }
}
