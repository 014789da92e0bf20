//! Named simulation sweeps and their runner.
//!
//! A run is fully determined by its [`ExperimentConfig`]; the config is written
//! as `# key = value` lines at the top of every result CSV so the table can be
//! regenerated from the file alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{pruning_diagnostic, spacl_from_spectrum, SpaclOptions};
use crate::linalg::select_rows;
use crate::metrics::{max_rowwise_relative_error, rc_avg, relative_frobenius_error};
use crate::model::ModelParams;
use crate::sampling::{sample_graph, SamplerConfig};
use crate::spectral::{population_spectrum, top_k_eigs_with, EigenOptions};

pub const DEFAULT_N: usize = 5000;
pub const DEFAULT_SEEDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Frob,
    Rowwise,
    Rc,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Frob => "frob",
            Metric::Rowwise => "rowwise",
            Metric::Rc => "rc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "frob" => Ok(Metric::Frob),
            "rowwise" => Ok(Metric::Rowwise),
            "rc" => Ok(Metric::Rc),
            other => Err(Error::InvalidArgument(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneVariants {
    Both,
    On,
    Off,
}

impl PruneVariants {
    pub fn as_str(self) -> &'static str {
        match self {
            PruneVariants::Both => "both",
            PruneVariants::On => "on",
            PruneVariants::Off => "off",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(PruneVariants::Both),
            "on" => Ok(PruneVariants::On),
            "off" => Ok(PruneVariants::Off),
            other => Err(Error::InvalidArgument(format!("prune must be both, on or off, got '{other}'"))),
        }
    }

    fn variants(self) -> Vec<(&'static str, bool)> {
        match self {
            PruneVariants::Both => vec![("prune", true), ("no-prune", false)],
            PruneVariants::On => vec![("prune", true)],
            PruneVariants::Off => vec![("no-prune", false)],
        }
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1b,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    SuppK,
    SuppAlpha,
    PruneDiag,
}

pub const ALL_PRESETS: [Preset; 8] = [
    Preset::Fig1b,
    Preset::Fig2a,
    Preset::Fig2b,
    Preset::Fig2c,
    Preset::Fig2d,
    Preset::SuppK,
    Preset::SuppAlpha,
    Preset::PruneDiag,
];

fn offdiag_b(diag: &[f64], off: f64) -> DMatrix<f64> {
    let k = diag.len();
    DMatrix::from_fn(k, k, |i, j| if i == j { diag[i] } else { off })
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1b => "fig1b",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig2d => "fig2d",
            Preset::SuppK => "suppK",
            Preset::SuppAlpha => "suppAlpha",
            Preset::PruneDiag => "prune-diag",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ALL_PRESETS
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    /// Name of the swept quantity.
    pub fn parameter(self) -> &'static str {
        match self {
            Preset::Fig1b => "rho",
            Preset::Fig2a | Preset::Fig2b => "eps_B",
            Preset::Fig2c => "eps",
            Preset::Fig2d => "i",
            Preset::SuppK | Preset::PruneDiag => "K",
            Preset::SuppAlpha => "eps_alpha",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Preset::Fig1b => vec![0.005, 0.0055, 0.006, 0.0065, 0.007],
            Preset::Fig2a => vec![0.0, 0.1, 0.2, 0.3, 0.4],
            Preset::Fig2b => (0..=6).map(|i| 0.025 * i as f64).collect(),
            Preset::Fig2c => (0..=6).map(|i| 0.05 * i as f64).collect(),
            Preset::Fig2d => (1..=15).map(f64::from).collect(),
            Preset::SuppK => (2..=8).map(f64::from).collect(),
            Preset::SuppAlpha => (0..=4).map(|i| 0.1 * i as f64).collect(),
            Preset::PruneDiag => (2..=10).map(f64::from).collect(),
        }
    }

    /// Node counts swept alongside the values; only the pruning grid has more than one.
    pub fn default_ns(self) -> Vec<usize> {
        match self {
            Preset::PruneDiag => (2..=6).map(|t| t * 1000).collect(),
            _ => vec![DEFAULT_N],
        }
    }

    /// One-line statement of the fixed settings.
    pub fn describe(self) -> &'static str {
        match self {
            Preset::Fig1b => "K=3, alpha=(0.4,0.4,0.4), B=(1-q)I+q11^T with q=0.001; sweep rho",
            Preset::Fig2a => "K=3, rho=0.2, alpha=(1/3,1/3,1/3), beta=(0.5-eps_B,0.5,0.5+eps_B), diag(B)=beta/max(beta), B_ij=0.05",
            Preset::Fig2b => "K=7, rho=0.15, alpha_i=0.1, beta_i=0.5+(i-4)eps_B, diag(B)=beta/max(beta), B_ij=0.2",
            Preset::Fig2c => "K=7, rho=0.15, alpha_i=1/3, B_ii=1, B_ij=eps",
            Preset::Fig2d => "K=3, rho=0.15, alpha=(1/3,1/3,1/3), B=[[1,0.2,0.1],[0.2,0.5,0.075i],[0.1,0.075i,0]], rescaled when 0.075i>1",
            Preset::SuppK => "rho=0.15, alpha_i=1/K, B_ii=1, B_ij=0.4; sweep K",
            Preset::SuppAlpha => "K=3, rho=0.15, alpha=(0.5-eps_alpha,0.5,0.5+eps_alpha), B_ii=1, B_ij=0.5",
            Preset::PruneDiag => "alpha=1_K/K, B_ii=1, B_ij=0.001, rho=ln(n)/n; sweep K and n",
        }
    }

    /// Model at one sweep value.
    pub fn model(self, value: f64, n: usize) -> Result<ModelParams> {
        let third = 1.0 / 3.0;
        match self {
            Preset::Fig1b => {
                let q = 0.001;
                let b = offdiag_b(&[1.0; 3], q);
                ModelParams::new(n, vec![0.4; 3], b, value)
            }
            Preset::Fig2a => {
                let beta = [0.5 - value, 0.5, 0.5 + value];
                let top = beta.iter().copied().fold(f64::MIN, f64::max);
                let diag: Vec<f64> = beta.iter().map(|b| b / top).collect();
                ModelParams::new(n, vec![third; 3], offdiag_b(&diag, 0.05), 0.2)
            }
            Preset::Fig2b => {
                let beta: Vec<f64> = (1..=7).map(|i| 0.5 + (i as f64 - 4.0) * value).collect();
                let top = beta.iter().copied().fold(f64::MIN, f64::max);
                let diag: Vec<f64> = beta.iter().map(|b| b / top).collect();
                ModelParams::new(n, vec![0.1; 7], offdiag_b(&diag, 0.2), 0.15)
            }
            Preset::Fig2c => ModelParams::new(n, vec![third; 7], offdiag_b(&[1.0; 7], value), 0.15),
            Preset::Fig2d => {
                let x = 0.075 * value;
                let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 0.5, x, 0.1, x, 0.0]);
                ModelParams::normalized(n, vec![third; 3], b, 0.15)
            }
            Preset::SuppK => {
                let k = value as usize;
                ModelParams::new(n, vec![1.0 / k as f64; k], offdiag_b(&vec![1.0; k], 0.4), 0.15)
            }
            Preset::SuppAlpha => ModelParams::new(
                n,
                vec![0.5 - value, 0.5, 0.5 + value],
                offdiag_b(&[1.0; 3], 0.5),
                0.15,
            ),
            Preset::PruneDiag => {
                let k = value as usize;
                let rho = (n as f64).ln() / n as f64;
                ModelParams::new(n, vec![1.0 / k as f64; k], offdiag_b(&vec![1.0; k], 0.001), rho)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub values: Vec<f64>,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub prune: PruneVariants,
    pub metrics: Vec<Metric>,
    pub inject_pure: bool,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad entry '{s}' for '{key}'")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn for_preset(preset: Preset) -> Self {
        Self {
            preset,
            values: preset.default_values(),
            ns: preset.default_ns(),
            seeds: (0..DEFAULT_SEEDS as u64).collect(),
            prune: PruneVariants::Both,
            metrics: vec![Metric::Frob],
            inject_pure: true,
        }
    }

    /// `key = value` lines; the inverse of [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preset = {}", self.preset.name());
        let _ = writeln!(s, "values = {}", join(&self.values));
        let _ = writeln!(s, "n = {}", join(&self.ns));
        let _ = writeln!(s, "seeds = {}", join(&self.seeds));
        let _ = writeln!(s, "prune = {}", self.prune.as_str());
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(s, "metrics = {}", metrics.join(","));
        let _ = writeln!(s, "inject_pure = {}", self.inject_pure);
        s
    }

    /// Parses `key = value` lines; blank lines and lines starting with `#` are
    /// skipped. Keys other than `preset` default to the preset's settings.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let preset = Preset::parse(
            map.remove("preset")
                .ok_or_else(|| Error::InvalidArgument("config needs a preset".into()))?
                .as_str(),
        )?;
        let mut cfg = Self::for_preset(preset);
        for (k, v) in map {
            match k.as_str() {
                "values" => cfg.values = parse_list(&k, &v)?,
                "n" => cfg.ns = parse_list(&k, &v)?,
                "seeds" => cfg.seeds = parse_list(&k, &v)?,
                "prune" => cfg.prune = PruneVariants::parse(&v)?,
                "metrics" => {
                    cfg.metrics = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(Metric::parse)
                        .collect::<Result<_>>()?
                }
                "inject_pure" => {
                    cfg.inject_pure = v
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("inject_pure must be true or false, got '{v}'")))?
                }
                other => return Err(Error::InvalidArgument(format!("unknown config key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.ns.is_empty() || self.seeds.is_empty() || self.metrics.is_empty() {
            return Err(Error::InvalidArgument("values, n, seeds and metrics must be nonempty".into()));
        }
        for &n in &self.ns {
            for &v in &self.values {
                self.preset.model(v, n)?;
            }
        }
        Ok(())
    }

    /// Reads the config embedded in a result CSV.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            match line.strip_prefix("# ") {
                Some(rest) => {
                    text.push_str(rest);
                    text.push('\n');
                }
                None => break,
            }
        }
        Self::parse(&text)
    }

    pub fn points(&self) -> Result<Vec<(usize, SweepPoint)>> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &value in &self.values {
                out.push((
                    n,
                    SweepPoint {
                        value,
                        params: self.preset.model(value, n)?,
                    },
                ));
            }
        }
        Ok(out)
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub preset: &'static str,
    pub param: &'static str,
    pub param_value: f64,
    pub n: usize,
    pub seed: u64,
    pub variant: String,
    pub metric: String,
    pub metric_value: f64,
    /// `ok`, or the failure message.
    pub status: String,
}

pub const CSV_HEADER: &str = "preset,param,param_value,n,seed,variant,metric,metric_value,status";

impl ResultRow {
    fn csv_line(&self) -> String {
        let status = self.status.replace([',', '\n'], ";");
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.preset, self.param, self.param_value, self.n, self.seed, self.variant, self.metric, self.metric_value, status
        )
    }
}

fn metric_value(metric: Metric, theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<f64> {
    match metric {
        Metric::Frob => relative_frobenius_error(theta_hat, theta),
        Metric::Rowwise => max_rowwise_relative_error(theta_hat, theta).map(|r| r.max_relative_error),
        Metric::Rc => rc_avg(theta_hat, theta),
    }
}

fn fit_rows(cfg: &ExperimentConfig, point: &SweepPoint, n: usize, seed: u64) -> Vec<ResultRow> {
    let row = |variant: &str, metric: &str, value: f64, status: String| ResultRow {
        preset: cfg.preset.name(),
        param: cfg.preset.parameter(),
        param_value: point.value,
        n,
        seed,
        variant: variant.to_string(),
        metric: metric.to_string(),
        metric_value: value,
        status,
    };
    let variants = cfg.prune.variants();
    let failed = |msg: String| -> Vec<ResultRow> {
        variants
            .iter()
            .flat_map(|(v, _)| cfg.metrics.iter().map(|m| row(v, m.as_str(), f64::NAN, msg.clone())).collect::<Vec<_>>())
            .collect()
    };
    let sampler = if cfg.inject_pure {
        SamplerConfig::new(seed)
    } else {
        SamplerConfig::new(seed).without_pure()
    };
    let (theta, graph) = match sample_graph(&point.params, &sampler) {
        Ok(x) => x,
        Err(e) => return failed(e.to_string()),
    };
    let k = point.params.k();
    let spectrum = match top_k_eigs_with(&graph, k, &EigenOptions::default()) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let mut out = Vec::new();
    for (variant, prune_enabled) in variants {
        let options = SpaclOptions {
            prune_enabled,
            ..SpaclOptions::default()
        };
        match spacl_from_spectrum(spectrum.clone(), &options) {
            Ok(fit) => {
                for &m in &cfg.metrics {
                    match metric_value(m, fit.theta_hat.matrix(), theta.matrix()) {
                        Ok(v) => out.push(row(variant, m.as_str(), v, "ok".into())),
                        Err(e) => out.push(row(variant, m.as_str(), f64::NAN, e.to_string())),
                    }
                }
            }
            Err(e) => {
                for &m in &cfg.metrics {
                    out.push(row(variant, m.as_str(), f64::NAN, e.to_string()));
                }
            }
        }
    }
    out
}

fn diagnostic_rows(cfg: &ExperimentConfig, point: &SweepPoint, n: usize, seed: u64) -> Vec<ResultRow> {
    let row = |metric: &str, value: f64, status: String| ResultRow {
        preset: cfg.preset.name(),
        param: cfg.preset.parameter(),
        param_value: point.value,
        n,
        seed,
        variant: "diagnostic".into(),
        metric: metric.to_string(),
        metric_value: value,
        status,
    };
    let run = || -> Result<Vec<(&'static str, f64)>> {
        let sampler = SamplerConfig::new(seed);
        let (theta, graph) = sample_graph(&point.params, &sampler)?;
        let k = point.params.k();
        let spectrum = top_k_eigs_with(&graph, k, &EigenOptions::default())?;
        let pop = population_spectrum(&theta, &point.params)?;
        let v_p = select_rows(&pop.eigenvectors, theta.pure_rows());
        let d = pruning_diagnostic(
            &spectrum.eigenvectors,
            &theta,
            &v_p,
            &SpaclOptions::default().prune,
            None,
        )?;
        Ok(vec![
            ("high_norm_fraction", d.high_norm_fraction),
            ("prunable_fraction", d.prunable_fraction.unwrap_or(f64::NAN)),
            ("quantile_high_norm_fraction", d.quantile_high_norm_fraction),
            ("quantile_prunable_fraction", d.quantile_prunable_fraction.unwrap_or(f64::NAN)),
            ("pruned_fraction", d.pruned_fraction),
            ("epsilon", d.epsilon),
        ])
    };
    match run() {
        Ok(values) => values.into_iter().map(|(m, v)| row(m, v, "ok".into())).collect(),
        Err(e) => vec![row("high_norm_fraction", f64::NAN, e.to_string())],
    }
}

/// Runs every (sweep point, seed) job and returns rows in a fixed order:
/// node count, sweep value, seed, variant, metric.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if cfg.preset == Preset::PruneDiag && !cfg.inject_pure {
        return Err(Error::InvalidArgument("the pruning diagnostic needs injected pure nodes".into()));
    }
    let points = cfg.points()?;
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| cfg.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let mut rows: Vec<ResultRow> = jobs
        .par_iter()
        .flat_map_iter(|&(p, seed)| {
            let (n, point) = &points[p];
            if cfg.preset == Preset::PruneDiag {
                diagnostic_rows(cfg, point, *n, seed)
            } else {
                fit_rows(cfg, point, *n, seed)
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.param_value.total_cmp(&b.param_value))
            .then(a.seed.cmp(&b.seed))
            .then(a.variant.cmp(&b.variant))
            .then(a.metric.cmp(&b.metric))
    });
    Ok(rows)
}

/// Writes the embedded config, the header and the rows.
pub fn write_results(path: impl AsRef<Path>, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for line in cfg.to_text().lines() {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{CSV_HEADER}")?;
        for r in rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_entry;

    #[test]
    fn preset_constants() {
        let m = Preset::Fig1b.model(0.007, 5000).unwrap();
        assert_eq!((m.n(), m.k(), m.rho()), (5000, 3, 0.007));
        assert_eq!(m.alpha(), &[0.4, 0.4, 0.4]);
        assert_eq!(m.b()[(0, 1)], 0.001);
        assert_eq!(m.b()[(0, 0)], 1.0);

        let m = Preset::Fig2a.model(0.1, 5000).unwrap();
        assert_eq!(m.rho(), 0.2);
        assert_eq!(m.b()[(0, 1)], 0.05);
        assert!((m.b()[(0, 0)] - 0.4 / 0.6).abs() < 1e-15);
        assert_eq!(m.b()[(2, 2)], 1.0);

        let m = Preset::Fig2b.model(0.1, 5000).unwrap();
        assert_eq!((m.k(), m.rho()), (7, 0.15));
        assert_eq!(m.alpha(), &[0.1; 7]);
        assert_eq!(m.b()[(0, 1)], 0.2);
        assert!((m.b()[(0, 0)] - 0.2 / 0.8).abs() < 1e-15);
        assert_eq!(m.b()[(6, 6)], 1.0);

        let m = Preset::Fig2c.model(0.3, 5000).unwrap();
        assert_eq!((m.k(), m.rho()), (7, 0.15));
        assert_eq!(m.b()[(3, 4)], 0.3);
        assert!((m.alpha()[0] - 1.0 / 3.0).abs() < 1e-15);

        let m = Preset::Fig2d.model(2.0, 5000).unwrap();
        assert_eq!(m.rho(), 0.15);
        assert!((m.b()[(1, 2)] - 0.15).abs() < 1e-15);
        assert_eq!(m.b()[(2, 2)], 0.0);
        assert_eq!(m.b()[(0, 2)], 0.1);

        let m = Preset::SuppK.model(5.0, 5000).unwrap();
        assert_eq!((m.k(), m.rho()), (5, 0.15));
        assert_eq!(m.b()[(0, 4)], 0.4);
        assert_eq!(m.alpha(), &[0.2; 5]);

        let m = Preset::SuppAlpha.model(0.2, 5000).unwrap();
        assert_eq!(m.rho(), 0.15);
        assert_eq!(m.b()[(0, 1)], 0.5);
        assert!((m.alpha()[0] - 0.3).abs() < 1e-15 && (m.alpha()[2] - 0.7).abs() < 1e-15);

        let m = Preset::PruneDiag.model(4.0, 3000).unwrap();
        assert!((m.rho() - (3000f64).ln() / 3000.0).abs() < 1e-18);
        assert_eq!(m.b()[(0, 1)], 0.001);
        assert_eq!(m.alpha(), &[0.25; 4]);
    }

    #[test]
    fn fig2d_rescales_and_turns_negative() {
        let last = Preset::Fig2d.model(15.0, 100).unwrap();
        assert_eq!(max_entry(last.b()), 1.0);
        let rb = last.scaled_b();
        assert!((rb[(1, 2)] - 0.15 * 1.125).abs() < 1e-15);
        let eig = rb.symmetric_eigen();
        assert!(eig.eigenvalues.min() < 0.0);
        let first = Preset::Fig2d.model(1.0, 100).unwrap().scaled_b().symmetric_eigen();
        assert!(eig.eigenvalues.min() < first.eigenvalues.min());
    }

    #[test]
    fn grids() {
        assert_eq!(Preset::Fig2d.default_values().len(), 15);
        assert_eq!(Preset::PruneDiag.default_ns(), vec![2000, 3000, 4000, 5000, 6000]);
        assert_eq!(Preset::PruneDiag.default_values(), (2..=10).map(f64::from).collect::<Vec<_>>());
        let fig1b = Preset::Fig1b.default_values();
        assert_eq!((fig1b[0], *fig1b.last().unwrap()), (0.005, 0.007));
        for p in ALL_PRESETS {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
            assert!(!p.describe().is_empty());
            ExperimentConfig::for_preset(p).validate().unwrap();
        }
        assert!(matches!(Preset::parse("fig9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = ExperimentConfig::for_preset(Preset::Fig2c);
        cfg.values = vec![0.05, 0.1];
        cfg.seeds = vec![3, 4];
        cfg.metrics = vec![Metric::Frob, Metric::Rc];
        cfg.prune = PruneVariants::Off;
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::parse("preset = fig2c\ncolour = red\n").is_err());
    }

    #[test]
    fn small_run_has_one_row_per_job() {
        let mut cfg = ExperimentConfig::for_preset(Preset::Fig2a);
        cfg.values = vec![0.1];
        cfg.ns = vec![300];
        cfg.seeds = vec![1, 2];
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.status == "ok"));
        assert_eq!(rows[0].variant, "no-prune");
        assert_eq!(run_experiment(&cfg).unwrap(), rows);
    }
}
