//! Report-producing command implementations behind the `sdpcut` binary.
//!
//! Reports are versioned JSON documents (`"schema": 1`) that embed their
//! exact configuration; identical configs and seeds produce byte-identical
//! reports except for the `timestamp` field.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use sdpcut::graph::laplacian_spectrum;
use sdpcut::metric::squared_distances;
use sdpcut::oracle::{brute_phi, brute_phi_k, brute_sse, verify_cover};
use sdpcut::partition::{greedy_ball_cover, Cover};
use sdpcut::rat::to_f64;
use sdpcut::rounding::{round_arv_with, round_sa_with, wellspread_subcover, RoundingConfig};
use sdpcut::sdp::{check_feasibility, solve_arv, solve_sa_for_set};
use sdpcut::structure::{cover_via_lambda, cover_via_phi, StructureBranch};
use sdpcut::Graph;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Lambda,
    Phi,
    Sa,
}

/// Everything a run depends on, echoed into the report for reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub tol: f64,
    pub kappa: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            bail!("--eps must lie in (0,1), got {}", self.eps);
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("--delta must lie in (0,1), got {}", self.delta);
        }
        if self.k < 1 {
            bail!("--k must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            bail!("--tol must lie in (0, 1e-2], got {}", self.tol);
        }
        if self.kappa < 0.0 {
            bail!("--kappa must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInfo {
    pub path: String,
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub connected: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdpInfo {
    pub objective: f64,
    pub dimension: usize,
    pub max_triangle_violation: f64,
    pub normalization_residual: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverInfo {
    /// "structure" when the pipeline's cover branch supplied it, otherwise
    /// "greedy-fallback".
    pub provenance: String,
    pub verified: bool,
    pub covered_count: usize,
    pub max_diameter: f64,
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundingInfo {
    pub method: String,
    pub s: Vec<usize>,
    pub expansion: f64,
    pub expansion_num: u64,
    pub expansion_den: u64,
    pub cut_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_vs_sdp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_vs_brute_phi: Option<f64>,
    pub trace: serde_json::Value,
}

/// Versioned report: the single document both commands emit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    /// Unix seconds; excluded from determinism comparisons.
    pub timestamp: u64,
    pub config: ExperimentConfig,
    pub graph: GraphInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_prefix: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp: Option<SdpInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<RoundingInfo>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("stage: graph ingestion ({})", path.display()))?;
    Graph::parse(&text).map_err(|e| anyhow!("stage: graph ingestion: {e}"))
}

fn graph_info(path: &Path, g: &Graph) -> GraphInfo {
    GraphInfo {
        path: path.display().to_string(),
        n: g.n(),
        r: g.degree(),
        m: g.edges().len(),
        connected: g.is_connected(),
    }
}

/// Graph diagnostics: spectrum prefix plus exhaustive phi / phi_k / sse
/// whenever the instance is within the oracle caps.
pub fn cmd_diagnose(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let g = load_graph(&config.graph)?;
    let spec = laplacian_spectrum(&g).map_err(|e| anyhow!("stage: spectrum: {e}"))?;
    let prefix: Vec<f64> = spec.eigenvalues.iter().take(8).copied().collect();

    let mut oracle = serde_json::Map::new();
    if let Ok(res) = brute_phi(&g) {
        oracle.insert("phi".into(), serde_json::to_value(&res)?);
    }
    for k in 2..=4usize {
        if let Ok(res) = brute_phi_k(&g, k) {
            oracle.insert(format!("phi_{k}"), serde_json::to_value(&res)?);
        }
    }
    let s_small = (g.n() / 4).max(1);
    if let Ok(res) = brute_sse(&g, s_small) {
        oracle.insert(format!("sse_{s_small}"), serde_json::to_value(&res)?);
    }

    Ok(Report {
        schema: SCHEMA_VERSION,
        command: "diagnose".into(),
        timestamp: now_unix(),
        config: config.clone(),
        graph: graph_info(&config.graph, &g),
        spectrum_prefix: Some(prefix),
        oracle: Some(serde_json::Value::Object(oracle)),
        sdp: None,
        structure: None,
        cover: None,
        sa: None,
        rounding: None,
    })
}

/// Full pipeline: solve the relaxation, run the requested structure
/// pipeline, obtain a verified cover (structure branch or greedy fallback),
/// and round (separated-set Frechet, or Sherali-Adams sampling for
/// `--mode sa`).
pub fn cmd_pipeline(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let mode = config
        .mode
        .ok_or_else(|| anyhow!("pipeline requires --mode"))?;
    let g = load_graph(&config.graph)?;
    let sol = solve_arv(&g, config.tol).map_err(|e| anyhow!("stage: solve-arv: {e}"))?;
    let feas = check_feasibility(&sol, config.tol);
    let sdp_info = SdpInfo {
        objective: sol.objective,
        dimension: sol.dim(),
        max_triangle_violation: feas.max_triangle_violation,
        normalization_residual: feas.normalization_residual,
        feasible: feas.pass,
    };
    let d2 = squared_distances(&sol);

    let outcome = match mode {
        Mode::Phi => cover_via_phi(&g, &sol, config.k, config.eps, config.delta, config.seed),
        Mode::Lambda | Mode::Sa => {
            cover_via_lambda(&g, &sol, config.k, config.eps, config.delta, config.seed)
        }
    }
    .map_err(|e| anyhow!("stage: structure: {e}"))?;

    let (cover, provenance): (Cover, String) = match &outcome.branch {
        StructureBranch::Cover { cover } => (cover.clone(), "structure".into()),
        StructureBranch::Certificate { .. } => (
            greedy_ball_cover(&d2, config.delta, 2 * config.k),
            "greedy-fallback".into(),
        ),
    };
    let verified = verify_cover(&cover, &d2, config.delta, config.eps);
    let cover_info = CoverInfo {
        provenance,
        verified,
        covered_count: cover.covered_count,
        max_diameter: cover.max_diameter(),
        sets: cover.sets.clone(),
    };

    let rounding_cfg = RoundingConfig {
        kappa: config.kappa,
        c3_threshold: config.delta,
        c4_threshold: config.delta,
        ..RoundingConfig::default()
    };

    let mut sa_value = None;
    let rounded = if verified {
        match mode {
            Mode::Lambda | Mode::Phi => {
                Some(round_arv_with(&g, &sol, &cover, config.seed, rounding_cfg)
                    .map_err(|e| anyhow!("stage: round-arv: {e}"))?)
            }
            Mode::Sa => {
                let ws = wellspread_subcover(&g, &sol, &cover, rounding_cfg)
                    .map_err(|e| anyhow!("stage: wellspread-subcover: {e}"))?;
                let centers = ws.sub_cover.as_ref().expect("subcover populated").centers.clone();
                let (sa_sol, sa) = solve_sa_for_set(&g, &centers, config.tol)
                    .map_err(|e| anyhow!("stage: solve-sa: {e}"))?;
                sa_value = Some(serde_json::json!({
                    "representatives": sa.representatives,
                    "objective": sa_sol.objective,
                    "p": sa.p,
                }));
                Some(
                    round_sa_with(&g, &sa_sol, &sa, &cover, config.seed, rounding_cfg)
                        .map_err(|e| anyhow!("stage: round-sa: {e}"))?,
                )
            }
        }
    } else {
        None
    };

    let oracle_phi = brute_phi(&g).ok();
    let rounding_info = rounded
        .map(|r| -> Result<RoundingInfo> {
            let expansion = r.cut.expansion_f64();
            let ratio_vs_sdp = if sdp_info.objective > 1e-12 {
                Some(expansion / sdp_info.objective)
            } else {
                None
            };
            let ratio_vs_brute_phi = oracle_phi.as_ref().and_then(|res| {
                let phi = to_f64(&res.value);
                if phi > 0.0 {
                    Some(expansion / phi)
                } else {
                    None
                }
            });
            Ok(RoundingInfo {
                method: r.method.clone(),
                s: r.cut.s.clone(),
                expansion,
                expansion_num: *r.cut.expansion.numer(),
                expansion_den: *r.cut.expansion.denom(),
                cut_edges: r.cut.cut_edges,
                ratio_vs_sdp,
                ratio_vs_brute_phi,
                trace: serde_json::to_value(&r.trace)?,
            })
        })
        .transpose()?;

    Ok(Report {
        schema: SCHEMA_VERSION,
        command: "pipeline".into(),
        timestamp: now_unix(),
        config: config.clone(),
        graph: graph_info(&config.graph, &g),
        spectrum_prefix: None,
        oracle: oracle_phi
            .map(|res| serde_json::to_value(&res))
            .transpose()?,
        sdp: Some(sdp_info),
        structure: Some(serde_json::to_value(&outcome)?),
        cover: Some(cover_info),
        sa: sa_value,
        rounding: rounding_info,
    })
}

/// One CSV row per report for external plotting.
#[derive(Debug, Serialize)]
struct PlotRow {
    file: String,
    command: String,
    mode: String,
    k: u64,
    eps: f64,
    delta: f64,
    seed: u64,
    sdp_objective: Option<f64>,
    structure_branch: Option<String>,
    coverage: Option<u64>,
    expansion: Option<f64>,
    ratio_vs_sdp: Option<f64>,
    ratio_vs_brute_phi: Option<f64>,
}

/// Collects `*.json` reports from a directory into one RFC-4180 CSV,
/// sorted by k then filename. An empty input directory yields a
/// header-only CSV.
pub fn cmd_emit_plotdata(reports_dir: &Path, out: &Path) -> Result<usize> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(reports_dir)
        .with_context(|| format!("reading reports directory {}", reports_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    for file in &files {
        let text = std::fs::read_to_string(file)
            .with_context(|| format!("reading report {}", file.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing report {}", file.display()))?;
        let get = |path: &[&str]| -> Option<&serde_json::Value> {
            let mut cur = &value;
            for key in path {
                cur = cur.get(key)?;
            }
            Some(cur)
        };
        rows.push(PlotRow {
            file: file
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            command: get(&["command"]).and_then(|v| v.as_str()).unwrap_or("").into(),
            mode: get(&["config", "mode"])
                .and_then(|v| v.as_str())
                .unwrap_or("")
                .into(),
            k: get(&["config", "k"]).and_then(|v| v.as_u64()).unwrap_or(0),
            eps: get(&["config", "eps"]).and_then(|v| v.as_f64()).unwrap_or(f64::NAN),
            delta: get(&["config", "delta"])
                .and_then(|v| v.as_f64())
                .unwrap_or(f64::NAN),
            seed: get(&["config", "seed"]).and_then(|v| v.as_u64()).unwrap_or(0),
            sdp_objective: get(&["sdp", "objective"]).and_then(|v| v.as_f64()),
            structure_branch: get(&["structure", "branch"])
                .and_then(|v| v.as_str())
                .map(String::from),
            coverage: get(&["cover", "covered_count"]).and_then(|v| v.as_u64()),
            expansion: get(&["rounding", "expansion"]).and_then(|v| v.as_f64()),
            ratio_vs_sdp: get(&["rounding", "ratio_vs_sdp"]).and_then(|v| v.as_f64()),
            ratio_vs_brute_phi: get(&["rounding", "ratio_vs_brute_phi"]).and_then(|v| v.as_f64()),
        });
    }
    rows.sort_by(|a, b| a.k.cmp(&b.k).then(a.file.cmp(&b.file)));

    let mut writer = csv::Writer::from_path(out)
        .with_context(|| format!("creating CSV {}", out.display()))?;
    if rows.is_empty() {
        // serde-based writers only learn headers from records; emit them
        // explicitly for the empty case.
        writer.write_record([
            "file",
            "command",
            "mode",
            "k",
            "eps",
            "delta",
            "seed",
            "sdp_objective",
            "structure_branch",
            "coverage",
            "expansion",
            "ratio_vs_sdp",
            "ratio_vs_brute_phi",
        ])?;
    }
    let count = rows.len();
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(count)
}

/// Strips the timestamp so equal configurations compare byte-identical.
pub fn comparable_json(report_text: &str) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(report_text)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timestamp");
    }
    Ok(serde_json::to_string_pretty(&value)?)
}
