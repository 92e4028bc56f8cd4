//! Command-line flags. Every flag is optional and, when given, overrides the
//! corresponding [`RunConfig`] field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use onetwo::census::Adjacency;

use crate::config::{BoundaryKind, GeometryKind, RunConfig, SurgeryOp, WindowConfig};

#[derive(Debug, Parser)]
#[command(name = "onetwo", version, about = "1-2 model on the hexagonal lattice")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (the render output file for `render`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact count and partition function by pruned enumeration.
    Enumerate(EnumerateArgs),
    /// Block heat-bath samples written as configuration files.
    Sample(SampleArgs),
    /// Homogeneous-cluster census of stored or freshly sampled configurations.
    Census(CensusArgs),
    /// Box rewiring or encounter-box construction on one configuration.
    Surgery(SurgeryArgs),
    /// Largest compatible family of 3-partitions of a k-set.
    Partitions(PartitionsArgs),
    /// Encounter boxes of a tiling and their partition families.
    Keane(KeaneArgs),
    /// Draw one configuration as SVG.
    Render(RenderArgs),
    /// Oracle and property suite; exits 1 on any failure.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::Sample(_) => "sample",
            Command::Census(_) => "census",
            Command::Surgery(_) => "surgery",
            Command::Partitions(_) => "partitions",
            Command::Keane(_) => "keane",
            Command::Render(_) => "render",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum AdjacencyArg {
    Lattice,
    PresentOnly,
}

impl From<AdjacencyArg> for Adjacency {
    fn from(a: AdjacencyArg) -> Adjacency {
        match a {
            AdjacencyArg::Lattice => Adjacency::Lattice,
            AdjacencyArg::PresentOnly => Adjacency::PresentOnly,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum WindowArg {
    Whole,
    Box,
    Ring,
}

/// `x,y`.
pub fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => Ok((x.parse().map_err(|e| format!("{e}"))?, y.parse().map_err(|e| format!("{e}"))?)),
        _ => Err(format!("expected x,y, got {s:?}")),
    }
}

/// `x0,y0,width,height`.
pub fn parse_crop(s: &str) -> Result<[i64; 4], String> {
    let v: Vec<i64> = s.split(',').map(|p| p.trim().parse::<i64>().map_err(|e| format!("{e}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected x0,y0,width,height, got {s:?}"))
}

/// A local code as three bits (`001`) or a decimal value (`1`).
pub fn parse_code(s: &str) -> Result<u8, String> {
    let v = if s.len() == 3 && s.chars().all(|c| c == '0' || c == '1') {
        u8::from_str_radix(s, 2).map_err(|e| format!("{e}"))?
    } else {
        s.parse::<u8>().map_err(|e| format!("{e}"))?
    };
    crate::config::parse_code(v).map(|c| c.value()).map_err(|e| e.to_string())
}

#[derive(Debug, Args, Default)]
pub struct GeometryArgs {
    /// Torus side length.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Window width in cells; selects a window geometry.
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryKind>,
}

#[derive(Debug, Args, Default)]
pub struct WeightArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SamplerArgs {
    /// Sweeps after burn-in.
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Keep every k-th sweep.
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub block_radius: Option<usize>,
    /// Metropolis single-edge proposals per sweep.
    #[arg(long)]
    pub flips: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Configuration files or directories; without it a fresh chain is run.
    #[arg(long = "in", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub adjacency: Option<AdjacencyArg>,
    #[arg(long, value_enum)]
    pub window: Option<WindowArg>,
    #[arg(long)]
    pub window_n: Option<usize>,
    #[arg(long, value_parser = parse_pair)]
    pub window_center: Option<(i64, i64)>,
    /// Render the first k samples as SVG.
    #[arg(long)]
    pub render: Option<usize>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct SurgeryArgs {
    #[arg(long, value_enum)]
    pub op: Option<SurgeryOp>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_pair)]
    pub center: Option<(i64, i64)>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_code)]
    pub code: Option<u8>,
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, value_enum)]
    pub adjacency: Option<AdjacencyArg>,
    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Args)]
pub struct PartitionsArgs {
    #[arg(long = "Ysize")]
    pub y_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KeaneArgs {
    #[arg(long = "in", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_code)]
    pub code: Option<u8>,
    #[arg(long, value_parser = parse_pair)]
    pub center: Option<(i64, i64)>,
    #[arg(long, value_enum)]
    pub adjacency: Option<AdjacencyArg>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Plain drawing without cluster fills.
    #[arg(long)]
    pub no_clusters: bool,
    #[arg(long, value_parser = parse_code)]
    pub code: Option<u8>,
    #[arg(long, value_enum)]
    pub adjacency: Option<AdjacencyArg>,
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<[i64; 4]>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Reduced sample sizes; seconds rather than minutes.
    #[arg(long)]
    pub quick: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl GeometryArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.geometry;
        if self.l.is_some() {
            g.kind = GeometryKind::Torus;
        }
        if self.width.is_some() || self.height.is_some() {
            g.kind = GeometryKind::Window;
        }
        set(&mut g.l, self.l);
        set(&mut g.width, self.width);
        set(&mut g.height, self.height);
        set(&mut g.boundary, self.boundary);
    }
}

impl WeightArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.weights.a, self.a);
        set(&mut cfg.weights.b, self.b);
        set(&mut cfg.weights.c, self.c);
    }
}

impl SamplerArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.sampler;
        set(&mut s.sweeps, self.sweeps);
        set(&mut s.burn_in, self.burn_in);
        set(&mut s.thin, self.thin);
        set(&mut s.block_radius, self.block_radius);
        set(&mut s.flips_per_sweep, self.flips);
    }
}

impl Cli {
    /// Folds the flags into `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        set(&mut cfg.seed, self.seed);
        match &self.command {
            Command::Enumerate(a) => {
                a.geometry.apply(cfg);
                a.weights.apply(cfg);
            }
            Command::Sample(a) => {
                a.geometry.apply(cfg);
                a.weights.apply(cfg);
                a.sampler.apply(cfg);
            }
            Command::Census(a) => {
                a.geometry.apply(cfg);
                a.weights.apply(cfg);
                a.sampler.apply(cfg);
                set(&mut cfg.census.adjacency, a.adjacency.map(Into::into));
                set(&mut cfg.census.render, a.render);
                let (n, center) = match &cfg.census.window {
                    WindowConfig::Whole => (None, None),
                    WindowConfig::Box { n, center } | WindowConfig::Ring { n, center } => (Some(*n), *center),
                };
                let n = a.window_n.or(n).unwrap_or_else(|| cfg.geometry.l.saturating_sub(2).max(1));
                let center = a.window_center.or(center);
                match a.window {
                    Some(WindowArg::Whole) => cfg.census.window = WindowConfig::Whole,
                    Some(WindowArg::Box) => cfg.census.window = WindowConfig::Box { n, center },
                    Some(WindowArg::Ring) => cfg.census.window = WindowConfig::Ring { n, center },
                    None => match &mut cfg.census.window {
                        WindowConfig::Whole => {}
                        WindowConfig::Box { n: wn, center: wc } | WindowConfig::Ring { n: wn, center: wc } => {
                            *wn = n;
                            *wc = center;
                        }
                    },
                }
            }
            Command::Surgery(a) => {
                a.weights.apply(cfg);
                let s = &mut cfg.surgery;
                set(&mut s.op, a.op);
                set(&mut s.n, a.n);
                if a.center.is_some() {
                    s.center = a.center;
                }
                set(&mut s.code, a.code);
                set(&mut s.threshold, a.threshold);
                set(&mut s.adjacency, a.adjacency.map(Into::into));
            }
            Command::Partitions(a) => set(&mut cfg.partitions.y_size, a.y_size),
            Command::Keane(a) => {
                a.geometry.apply(cfg);
                a.weights.apply(cfg);
                a.sampler.apply(cfg);
                let k = &mut cfg.keane;
                set(&mut k.s, a.s);
                set(&mut k.n, a.n);
                set(&mut k.code, a.code);
                if a.center.is_some() {
                    k.center = a.center;
                }
                set(&mut k.adjacency, a.adjacency.map(Into::into));
            }
            Command::Render(a) => {
                let r = &mut cfg.render;
                if a.no_clusters {
                    r.clusters = false;
                }
                if a.code.is_some() {
                    r.code = a.code;
                }
                set(&mut r.adjacency, a.adjacency.map(Into::into));
                if a.crop.is_some() {
                    r.crop = a.crop;
                }
                set(&mut r.max_vertices, a.max_vertices);
            }
            Command::Verify(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(argv: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(argv).unwrap();
        let mut cfg = RunConfig::default();
        cli.apply(&mut cfg);
        cfg
    }

    #[test]
    fn flags_override_defaults() {
        let cfg = resolve(&["onetwo", "sample", "--L", "3", "--a", "2", "--seed", "9", "--thin", "1", "--sweeps", "50"]);
        assert_eq!(cfg.geometry.l, 3);
        assert_eq!(cfg.geometry.kind, GeometryKind::Torus);
        assert_eq!(cfg.weights.a, 2.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sampler.kept_samples(), 50);
    }

    #[test]
    fn width_selects_a_window() {
        let cfg = resolve(&["onetwo", "enumerate", "--width", "3", "--height", "2", "--boundary", "free"]);
        assert_eq!(cfg.geometry.kind, GeometryKind::Window);
        assert_eq!(cfg.geometry.boundary, BoundaryKind::Free);
    }

    #[test]
    fn codes_parse_as_bits_or_decimal() {
        assert_eq!(parse_code("001"), Ok(1));
        assert_eq!(parse_code("110"), Ok(6));
        assert_eq!(parse_code("6"), Ok(6));
        assert!(parse_code("111").is_err());
        assert!(parse_code("000").is_err());
    }

    #[test]
    fn census_window_flags() {
        let cfg = resolve(&["onetwo", "census", "--L", "12", "--window", "ring", "--window-n", "6", "--window-center", "5,6"]);
        assert_eq!(cfg.census.window, WindowConfig::Ring { n: 6, center: Some((5, 6)) });
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        let err = Cli::try_parse_from(["onetwo", "sample", "--bogus"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
