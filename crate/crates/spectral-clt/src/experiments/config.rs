//! Experiment configuration: a flat key=value file with two bracketed
//! sections, every field overridable from the command line.
//!
//! ```text
//! [experiment]
//! n_grid = 2000, 4000
//! replicates = 10
//! eta = 0.05
//! seed = 42
//! out_dir = out
//!
//! [model]
//! kind = sbm
//! b = 0.42, 0.42; 0.42, 0.5
//! pi = 0.6, 0.4
//! ```
//!
//! Unset fields fall back to per-experiment defaults that mirror the
//! simulation protocol the experiments reproduce. The configuration hash
//! recorded in every artifact covers only fields that affect numbers;
//! `out_dir` and `threads` change where and how fast results appear, never
//! what they are.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::model::{erdos_renyi_distribution, sbm_to_latent, LatentDistribution};
use std::fmt::Write as _;
use std::path::PathBuf;

const DEFAULT_SEED: u64 = 1729;
const DEFAULT_ETA: f64 = 0.05;
const DEFAULT_LEVEL: f64 = 0.95;
const DEFAULT_MC: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    TableCov,
    EllipsePlot,
    ClusterBench,
    ErClt,
    BoundsAudit,
    Sample,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TableCov => "table-cov",
            Experiment::EllipsePlot => "ellipse-plot",
            Experiment::ClusterBench => "cluster-bench",
            Experiment::ErClt => "er-clt",
            Experiment::BoundsAudit => "bounds-audit",
            Experiment::Sample => "sample",
        }
    }

    fn default_grid(self) -> Vec<usize> {
        match self {
            Experiment::TableCov => vec![2000, 4000, 8000, 16000],
            Experiment::EllipsePlot => vec![1000, 2000, 4000, 8000],
            Experiment::ClusterBench => (1000..=4000).step_by(250).collect(),
            Experiment::ErClt => vec![4000],
            Experiment::BoundsAudit => vec![2000],
            Experiment::Sample => vec![1000],
        }
    }

    fn default_replicates(self) -> usize {
        match self {
            Experiment::TableCov => 10,
            Experiment::EllipsePlot => 1,
            Experiment::ClusterBench => 100,
            Experiment::ErClt => 20,
            Experiment::BoundsAudit => 100,
            Experiment::Sample => 1,
        }
    }
}

/// The generating model, in the three shapes the config file accepts.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    Sbm { b: Mat, pi: Vec<f64> },
    Er { p: f64 },
    Atoms { atoms: Mat, weights: Vec<f64> },
}

impl ModelSpec {
    /// The two-block model the reference experiments run on.
    pub fn default_sbm() -> ModelSpec {
        ModelSpec::Sbm {
            b: Mat::from_rows(&[vec![0.42, 0.42], vec![0.42, 0.5]]),
            pi: vec![0.6, 0.4],
        }
    }
}

/// A fully resolved experiment run: file values, flag overrides, and
/// defaults already merged and validated.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    /// Embedding dimension; must match the model dimension.
    pub d: usize,
    pub eta: f64,
    /// Probability mass enclosed by plotted level curves.
    pub level: f64,
    pub seed: u64,
    /// Monte Carlo draws for the Bayes baseline.
    pub n_mc: usize,
    /// Embed the edge-probability operator itself instead of a sampled graph.
    pub noiseless: bool,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_grid: Option<Vec<usize>>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub level: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Merges defaults, an optional config file, and flag overrides, then
    /// validates the result.
    pub fn build(
        experiment: Experiment,
        file: Option<&str>,
        overrides: &Overrides,
    ) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig {
            experiment,
            model: match experiment {
                Experiment::ErClt => ModelSpec::Er { p: 0.25 },
                _ => ModelSpec::default_sbm(),
            },
            n_grid: experiment.default_grid(),
            replicates: experiment.default_replicates(),
            d: 0,
            eta: DEFAULT_ETA,
            level: DEFAULT_LEVEL,
            seed: DEFAULT_SEED,
            n_mc: DEFAULT_MC,
            noiseless: false,
            out_dir: PathBuf::from("out"),
            threads: None,
        };
        let mut d_set = false;
        if let Some(text) = file {
            cfg.apply_file(text, &mut d_set)?;
        }
        if let Some(grid) = &overrides.n_grid {
            cfg.n_grid = grid.clone();
        }
        if let Some(r) = overrides.replicates {
            cfg.replicates = r;
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(e) = overrides.eta {
            cfg.eta = e;
        }
        if let Some(l) = overrides.level {
            cfg.level = l;
        }
        if let Some(o) = &overrides.out_dir {
            cfg.out_dir = o.clone();
        }
        if overrides.threads.is_some() {
            cfg.threads = overrides.threads;
        }
        if !d_set {
            cfg.d = cfg.latent()?.dim();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the latent distribution the configured model describes.
    pub fn latent(&self) -> Result<LatentDistribution> {
        let built = match &self.model {
            ModelSpec::Sbm { b, pi } => sbm_to_latent(b, pi),
            ModelSpec::Er { p } => erdos_renyi_distribution(*p),
            ModelSpec::Atoms { atoms, weights } => {
                LatentDistribution::new(atoms.clone(), weights.clone())
            }
        };
        built.map_err(|e| Error::Config(format!("model: {e}")))
    }

    /// Canonical text over the number-affecting fields; hashed into every
    /// artifact so outputs can be traced back to their configuration.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d={}", self.d);
        let _ = writeln!(s, "eta={}", self.eta);
        let _ = writeln!(s, "experiment={}", self.experiment.name());
        let _ = writeln!(s, "level={}", self.level);
        match &self.model {
            ModelSpec::Sbm { b, pi } => {
                let _ = writeln!(s, "model=sbm b={} pi={}", fmt_mat(b), fmt_list(pi));
            }
            ModelSpec::Er { p } => {
                let _ = writeln!(s, "model=er p={p}");
            }
            ModelSpec::Atoms { atoms, weights } => {
                let _ = writeln!(
                    s,
                    "model=atoms atoms={} weights={}",
                    fmt_mat(atoms),
                    fmt_list(weights)
                );
            }
        }
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "n_grid={}", grid.join(","));
        let _ = writeln!(s, "n_mc={}", self.n_mc);
        let _ = writeln!(s, "noiseless={}", self.noiseless);
        let _ = writeln!(s, "replicates={}", self.replicates);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }

    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }

    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 100) {
            return Err(Error::Config(format!("n = {n} below the minimum of 100")));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::Config(format!(
                "eta = {} outside (0, 0.5)",
                self.eta
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level = {} outside (0, 1)",
                self.level
            )));
        }
        if self.n_mc < 100_000 {
            return Err(Error::Config(format!(
                "n_mc = {} below the Monte Carlo minimum of 100000",
                self.n_mc
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let dist = self.latent()?;
        if self.d != dist.dim() {
            return Err(Error::Config(format!(
                "d = {} but the model has dimension {}",
                self.d,
                dist.dim()
            )));
        }
        Ok(())
    }

    fn apply_file(&mut self, text: &str, d_set: &mut bool) -> Result<()> {
        let mut model_kind: Option<String> = None;
        let mut b: Option<Mat> = None;
        let mut pi: Option<Vec<f64>> = None;
        let mut p: Option<f64> = None;
        let mut atoms: Option<Mat> = None;
        let mut weights: Option<Vec<f64>> = None;
        let mut saw_model = false;

        for (section, key, value) in parse_lines(text)? {
            match (section.as_str(), key.as_str()) {
                ("experiment", "n_grid") | ("experiment", "n") => {
                    self.n_grid = parse_usize_list(&value)?;
                }
                ("experiment", "replicates") => self.replicates = parse_num(&value)?,
                ("experiment", "d") => {
                    self.d = parse_num(&value)?;
                    *d_set = true;
                }
                ("experiment", "eta") => self.eta = parse_num(&value)?,
                ("experiment", "level") => self.level = parse_num(&value)?,
                ("experiment", "seed") => self.seed = parse_num(&value)?,
                ("experiment", "n_mc") => self.n_mc = parse_num(&value)?,
                ("experiment", "noiseless") => self.noiseless = parse_bool(&value)?,
                ("experiment", "out_dir") => self.out_dir = PathBuf::from(value),
                ("experiment", "threads") => self.threads = Some(parse_num(&value)?),
                ("model", "kind") => {
                    saw_model = true;
                    model_kind = Some(value);
                }
                ("model", "b") => {
                    saw_model = true;
                    b = Some(parse_matrix(&value)?);
                }
                ("model", "pi") => {
                    saw_model = true;
                    pi = Some(parse_f64_list(&value)?);
                }
                ("model", "p") => {
                    saw_model = true;
                    p = Some(parse_num(&value)?);
                }
                ("model", "atoms") => {
                    saw_model = true;
                    atoms = Some(parse_matrix(&value)?);
                }
                ("model", "weights") => {
                    saw_model = true;
                    weights = Some(parse_f64_list(&value)?);
                }
                _ => {
                    return Err(Error::Config(format!(
                        "unknown key '{key}' in section [{section}]"
                    )))
                }
            }
        }

        if saw_model {
            let kind =
                model_kind.ok_or_else(|| Error::Config("model section lacks 'kind'".into()))?;
            self.model = match kind.as_str() {
                "sbm" => ModelSpec::Sbm {
                    b: b.ok_or_else(|| Error::Config("sbm model lacks 'b'".into()))?,
                    pi: pi.ok_or_else(|| Error::Config("sbm model lacks 'pi'".into()))?,
                },
                "er" => ModelSpec::Er {
                    p: p.ok_or_else(|| Error::Config("er model lacks 'p'".into()))?,
                },
                "atoms" => ModelSpec::Atoms {
                    atoms: atoms
                        .ok_or_else(|| Error::Config("atoms model lacks 'atoms'".into()))?,
                    weights: weights
                        .ok_or_else(|| Error::Config("atoms model lacks 'weights'".into()))?,
                },
                other => return Err(Error::Config(format!("unknown model kind '{other}'"))),
            };
        }
        Ok(())
    }
}

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn fmt_mat(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
            row.join(",")
        })
        .collect();
    format!("[{}]", rows.join(";"))
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    items.join(",")
}

/// Yields (section, key, value) triples; '#' and ';' start full-line
/// comments and keys must follow a section header.
fn parse_lines(text: &str) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if name != "experiment" && name != "model" {
                return Err(Error::Config(format!(
                    "line {}: unknown section [{name}]",
                    idx + 1
                )));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key = value",
                idx + 1
            )));
        };
        let Some(section) = &section else {
            return Err(Error::Config(format!(
                "line {}: key outside any [section]",
                idx + 1
            )));
        };
        out.push((
            section.clone(),
            key.trim().to_string(),
            value.trim().to_string(),
        ));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{s}' as a number")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!(
            "cannot parse '{other}' as true/false"
        ))),
    }
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(parse_num).collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_num).collect()
}

/// Rows separated by ';', entries by ','; rows must have equal length.
fn parse_matrix(s: &str) -> Result<Mat> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_f64_list).collect::<Result<_>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Config(format!("ragged or empty matrix '{s}'")));
    }
    Ok(Mat::from_rows(&rows))
}
