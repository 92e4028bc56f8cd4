//! Subcommand bodies. Each writes into its output directory and returns a
//! JSON summary for standard output; `ok == false` maps to exit code 1.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use onetwo::census::{is_encounter_box, CensusReport, SizeStatistics};
use onetwo::exact::{exact_distribution, partition_function, Enumeration, DEFAULT_ENUMERATION_CAP};
use onetwo::partition::{is_compatible, keane_census, max_compatible_family, nested_family, TilingSpec, MAX_FAMILY_GROUND};
use onetwo::sampler::{run, Chain, RunParams};
use onetwo::surgery::{log_probability_factor, make_encounter_box, rewire_box_interior, EncounterOptions, SurgeryReport};
use onetwo::{BoxSpec, Configuration, Error, Geometry, LocalCode, Weights};
use serde_json::{json, Value};

use crate::config::{center_of, parse_code, RunConfig, SurgeryOp, WindowConfig};
use crate::output::OutputDir;
use crate::render::render_svg;

/// Geometries up to this many edges get an exact-distribution check in `sample`.
pub const ORACLE_EDGE_LIMIT: usize = 27;

pub struct Outcome {
    pub summary: Value,
    pub ok: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Outcome {
        Outcome { summary, ok: true }
    }
}

fn exact_weights(cfg: &RunConfig) -> Result<Weights<BigRational>> {
    let conv = |x: f64| BigRational::from_float(x).context("weights must be finite");
    Ok(Weights::new(conv(cfg.weights.a)?, conv(cfg.weights.b)?, conv(cfg.weights.c)?)?)
}

pub fn enumerate(cfg: &RunConfig) -> Result<Outcome> {
    let g = cfg.geometry.build()?;
    let w = cfg.weights.build()?;
    let e = Enumeration::new(&g, DEFAULT_ENUMERATION_CAP)?;
    let count = e.count();
    let z = partition_function(&g, &w, DEFAULT_ENUMERATION_CAP)?;
    let exact = partition_function(&g, &exact_weights(cfg)?, DEFAULT_ENUMERATION_CAP)?;
    let summary = json!({
        "geometry": g.describe(),
        "edges": g.edge_count(),
        "count": count,
        "Z": z,
        "logZ": z.ln(),
        "Z_exact": exact.to_string(),
        "logZ_exact": exact.to_f64().map(f64::ln),
    });
    let mut out = OutputDir::create(&cfg.output_dir("enumerate"))?;
    out.write_json("enumerate.json", &summary)?;
    out.finish("enumerate", cfg)?;
    Ok(Outcome::ok(summary))
}

/// Empirical distribution of `samples` against the exact law, keyed by edge mask.
pub fn oracle_tv(g: &Arc<Geometry>, w: &Weights<f64>, samples: &[Configuration]) -> Result<Value> {
    let exact = exact_distribution(g, w, ORACLE_EDGE_LIMIT)?;
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for s in samples {
        *counts.entry(s.to_mask().context("geometry too large for masks")?).or_default() += 1;
    }
    let n = samples.len().max(1) as f64;
    let mut tv = 0.0;
    let mut covered = 0.0;
    for (i, &m) in exact.support.iter().enumerate() {
        let mask = exact.free_edges.iter().enumerate().fold(0u64, |acc, (p, &e)| acc | ((m >> p & 1) << e));
        let emp = counts.get(&mask).copied().unwrap_or(0) as f64 / n;
        covered += emp;
        tv += (emp - exact.probabilities[i]).abs();
    }
    // mass outside the exact support would be invalid configurations
    tv += 1.0 - covered;
    Ok(json!({
        "support": exact.len(),
        "distinct_visited": counts.len(),
        "total_variation": 0.5 * tv,
    }))
}

pub fn sample(cfg: &RunConfig) -> Result<Outcome> {
    let g = cfg.geometry.build()?;
    let w = cfg.weights.build()?;
    let params = RunParams { burn_in: cfg.sampler.burn_in, n_samples: cfg.sampler.kept_samples(), thinning: cfg.sampler.thin };
    let result = run(g.clone(), w.clone(), cfg.seed, cfg.sampler.options(), params)?;
    let mut out = OutputDir::create(&cfg.output_dir("sample"))?;
    for (i, s) in result.samples.iter().enumerate() {
        out.write(&format!("samples/{i:06}.ot12"), s.to_text().as_bytes())?;
    }
    let oracle = if g.edge_count() <= ORACLE_EDGE_LIMIT { oracle_tv(&g, &w, &result.samples)? } else { Value::Null };
    let diagnostics = json!({ "chain": result.diagnostics, "oracle": oracle });
    out.write_json("diagnostics.json", &diagnostics)?;
    out.finish("sample", cfg)?;
    Ok(Outcome::ok(json!({
        "samples": result.samples.len(),
        "sweeps": result.diagnostics.sweeps,
        "log_weight_mean": result.diagnostics.log_weight_mean,
        "oracle": oracle,
    })))
}

/// Configuration files named by `inputs`; directories contribute their
/// `*.ot12` files and those of a `samples` subdirectory, in name order.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found = Vec::new();
            for dir in [p.clone(), p.join("samples")] {
                if !dir.is_dir() {
                    continue;
                }
                for entry in std::fs::read_dir(&dir)? {
                    let path = entry?.path();
                    if path.extension().is_some_and(|e| e == "ot12") {
                        found.push(path);
                    }
                }
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

/// Stored configurations, or a fresh chain run from the configuration.
fn load_or_sample(cfg: &RunConfig, inputs: &[PathBuf], out: &mut OutputDir) -> Result<Vec<Configuration>> {
    if inputs.is_empty() {
        let g = cfg.geometry.build()?;
        let w = cfg.weights.build()?;
        let mut chain = Chain::new(g, w, cfg.seed, 0, cfg.sampler.options())?;
        return Ok(chain.samples(cfg.sampler.burn_in, cfg.sampler.kept_samples(), cfg.sampler.thin).collect());
    }
    let mut configs = Vec::new();
    for path in expand_inputs(inputs)? {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        out.record_input(&path, text.as_bytes());
        configs.push(Configuration::from_text(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    if configs.is_empty() {
        bail!("no configuration files found in the inputs");
    }
    Ok(configs)
}

fn code_label(code: LocalCode) -> String {
    format!("{:03b}", code.value())
}

pub fn census(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Outcome> {
    let mut out = OutputDir::create(&cfg.output_dir("census"))?;
    let configs = load_or_sample(cfg, inputs, &mut out)?;
    let mut csv = String::from("sample");
    for code in LocalCode::VALID {
        let c = code_label(code);
        let _ = write!(csv, ",largest_{c},second_{c},boundary_{c}");
    }
    csv.push('\n');
    let mut stats = SizeStatistics::new(cfg.census.coexist_fraction);
    let mut window_size = 0;
    for (i, c) in configs.iter().enumerate() {
        let g = c.geometry();
        let window = cfg.census.window.build(g)?;
        let report = CensusReport::new(c, &window, cfg.census.adjacency, &[])?;
        window_size = report.window_size;
        stats.add(&report);
        let _ = write!(csv, "{i}");
        for r in &report.per_code {
            let _ = write!(csv, ",{},{},{}", r.largest, r.second_largest, r.boundary_clusters);
        }
        csv.push('\n');
        if i < cfg.census.render {
            out.write(&format!("renders/{i:06}.svg"), render_svg(c, &cfg.render)?.as_bytes())?;
        }
    }
    let per_code: Vec<Value> = LocalCode::VALID
        .iter()
        .zip(&stats.per_code)
        .map(|(code, s)| {
            json!({
                "code": code_label(*code),
                "mean_largest_fraction": s.mean_largest_fraction(),
                "mean_second_fraction": s.mean_second_fraction(),
                "max_second_fraction": s.max_second_fraction,
                "coexistence_frequency": s.coexistence_frequency(),
                "mean_boundary_clusters": s.boundary_clusters as f64 / s.samples.max(1) as f64,
            })
        })
        .collect();
    let summary = json!({
        "samples": configs.len(),
        "window_size": window_size,
        "adjacency": cfg.census.adjacency,
        "coexist_fraction": cfg.census.coexist_fraction,
        "per_code": per_code,
    });
    out.write("census.csv", csv.as_bytes())?;
    out.write_json("census.json", &summary)?;
    out.finish("census", cfg)?;
    Ok(Outcome::ok(summary))
}

fn report_json<T: onetwo::scalar::Scalar>(report: &SurgeryReport<T>, n: usize, center: (i64, i64)) -> Value {
    let g = report.output.geometry();
    let inner_ok = BoxSpec::new(n, center)
        .lattice_vertices()
        .into_iter()
        .all(|v| report.output.local_code(v).is_ok_and(|c| c == LocalCode::HORIZONTAL));
    json!({
        "valid": report.output.is_valid(),
        "inner_box_horizontal": inner_ok,
        "modified_count": report.modified_vertices.len(),
        "bound": report.bound,
        "within_bound": report.within_bound(),
        "modified_vertices": report.modified_vertices.iter().map(|&v| g.vertex_id(v)).collect::<Vec<_>>(),
    })
}

pub fn surgery(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let s = &cfg.surgery;
    let mut out = OutputDir::create(&cfg.output_dir("surgery"))?;
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    out.record_input(input, text.as_bytes());
    let before = Configuration::from_text(&text)?;
    let g = before.geometry().clone();
    let w = cfg.weights.build()?;
    let center = s.center.unwrap_or_else(|| center_of(&g));
    out.write("before.svg", render_svg(&before, &cfg.render)?.as_bytes())?;
    let mut summary = json!({
        "op": s.op,
        "N": s.n,
        "center": center,
        "log_probability_factor": log_probability_factor(s.n, &w),
    });
    let mut ok = true;
    let after = match s.op {
        SurgeryOp::Rewire => {
            let report = rewire_box_interior(&before, s.n, center, &w)?;
            summary["report"] = report_json(&report, s.n, center);
            Some(report.output)
        }
        SurgeryOp::Encounter => {
            let code = parse_code(s.code)?;
            let window = match &s.window {
                Some(wc) => wc.build(&g)?,
                None => WindowConfig::Ring { n: s.n + 2, center: Some(center) }.build(&g)?,
            };
            let opts = EncounterOptions { code, threshold: s.threshold, adjacency: s.adjacency };
            match make_encounter_box(&before, s.n, center, &window, &opts, &w) {
                Ok(done) => {
                    let enc = is_encounter_box(&done.report.output, BoxSpec::new(s.n, center), code, &window, s.adjacency)?;
                    summary["trident"] = json!({
                        "vertices": done.trident.vertices.map(|v| g.vertex_id(v)),
                        "clusters_meeting": done.trident.clusters_meeting,
                        "admissible_clusters": done.trident.admissible_clusters,
                        "guaranteed": done.trident.guaranteed,
                    });
                    summary["report"] = report_json(&done.report, s.n, center);
                    summary["is_encounter_box"] = json!(enc.is_encounter);
                    Some(done.report.output)
                }
                Err(e @ (Error::InsufficientClusters { .. } | Error::Unrepairable { .. })) => {
                    ok = false;
                    let witness = match &e {
                        Error::Unrepairable { vertex } => json!(vertex),
                        _ => Value::Null,
                    };
                    summary["rejected"] = json!({ "reason": e.to_string(), "witness": witness });
                    None
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    if let Some(after) = after {
        out.write("after.svg", render_svg(&after, &cfg.render)?.as_bytes())?;
        out.write("output.ot12", after.to_text().as_bytes())?;
    }
    out.write_json("surgery.json", &summary)?;
    out.finish("surgery", cfg)?;
    Ok(Outcome { summary, ok })
}

pub fn partitions(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.partitions.y_size;
    if k < 3 {
        bail!("--Ysize must be at least 3");
    }
    let nested = nested_family(k);
    let mut nested_ok = nested.len() == k - 2;
    for i in 0..nested.len() {
        for j in i + 1..nested.len() {
            nested_ok &= is_compatible(&nested[i], &nested[j])?;
        }
    }
    let mut summary = json!({
        "Ysize": k,
        "bound": k - 2,
        "nested_family": { "size": nested.len(), "pairwise_compatible": nested_ok,
            "partitions": nested.iter().map(|p| p.blocks()).collect::<Vec<_>>() },
    });
    let mut ok = nested_ok;
    if k <= MAX_FAMILY_GROUND {
        let fam = max_compatible_family(k)?;
        ok &= fam.size <= k - 2;
        summary["partitions_considered"] = json!(fam.partitions_considered);
        summary["max_family"] = json!(fam.size);
        summary["witness"] = json!(fam.witness.iter().map(|p| p.blocks()).collect::<Vec<_>>());
    } else {
        summary["max_family"] = Value::Null;
    }
    summary["holds"] = json!(ok);
    let mut out = OutputDir::create(&cfg.output_dir("partitions"))?;
    out.write_json("partitions.json", &summary)?;
    out.finish("partitions", cfg)?;
    Ok(Outcome { summary, ok })
}

pub fn keane(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Outcome> {
    let k = &cfg.keane;
    let mut out = OutputDir::create(&cfg.output_dir("keane"))?;
    let configs = load_or_sample(cfg, inputs, &mut out)?;
    let g = configs[0].geometry();
    let center = k.center.unwrap_or_else(|| center_of(g));
    let spec = TilingSpec::new(k.s, k.n, center)?;
    let w = cfg.weights.build()?;
    let report = keane_census(&configs, &spec, parse_code(k.code)?, &w, k.adjacency)?;
    let mut csv = String::from(
        "sample,encounter_boxes,clusters,y_cap,rim_size,violations,connected_core_violations,disconnected_core_boxes\n",
    );
    for (i, s) in report.per_sample.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{},{}",
            s.encounter_boxes,
            s.clusters.len(),
            s.y_cap,
            s.rim_size,
            s.violations,
            s.connected_core_violations,
            s.disconnected_core_boxes
        );
    }
    let summary = json!({
        "tiling": report.spec,
        "code": format!("{:03b}", k.code),
        "adjacency": k.adjacency,
        "samples": report.samples,
        "total_encounter_boxes": report.total_encounter_boxes,
        "max_encounter_boxes": report.max_encounter_boxes,
        "mean_encounter_boxes": report.mean_encounter_boxes,
        "violations": report.violations,
        "connected_core_violations": report.connected_core_violations,
        "disconnected_core_boxes": report.disconnected_core_boxes,
        "max_rim_size": report.max_rim_size,
        "perimeter_estimate": report.perimeter_estimate,
        "lower_bound": report.lower_bound,
    });
    out.write("keane.csv", csv.as_bytes())?;
    out.write_json("keane.json", &summary)?;
    out.finish("keane", cfg)?;
    Ok(Outcome::ok(summary))
}

pub fn render(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let c = Configuration::from_text(&text)?;
    let svg = render_svg(&c, &cfg.render)?;
    let target = match &cfg.out {
        Some(p) => p.clone(),
        None => cfg.output_dir("render").join("configuration.svg"),
    };
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = target.file_name().context("render output needs a file name")?.to_string_lossy().into_owned();
    let stem = target.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| name.clone());
    let mut out = OutputDir::create(dir)?.with_prefix(&stem);
    out.record_input(input, text.as_bytes());
    out.write(&name, svg.as_bytes())?;
    out.finish("render", cfg)?;
    Ok(Outcome::ok(json!({ "svg": target, "bytes": svg.len() })))
}

pub fn verify(cfg: &RunConfig, quick: bool) -> Result<Outcome> {
    let params = if quick { crate::checks::SuiteParams::quick() } else { crate::checks::SuiteParams::full() };
    let results = crate::checks::run_suite(&params);
    for r in &results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        eprintln!("[{mark}] {} {}: {} ({:.1} s)", r.id, r.name, r.summary, r.seconds);
        for f in &r.failures {
            eprintln!("    {}", f.replace('\n', "\n    "));
        }
    }
    let ok = results.iter().all(|r| r.passed);
    let summary = json!({ "quick": quick, "passed": ok, "params": params, "checks": results });
    let mut out = OutputDir::create(&cfg.output_dir("verify"))?;
    out.write_json("verify.json", &summary)?;
    out.finish("verify", cfg)?;
    Ok(Outcome { summary: json!({ "passed": ok, "checks": results.len() }), ok })
}
