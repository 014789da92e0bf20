//! `spacl`: simulate, fit and evaluate mixed-membership blockmodels.
//!
//! Exit status is 0 on success, 1 when the estimator or a witness search fails,
//! and 2 for I/O, parse or configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use spacl_core::estimator::{spacl, PruneConfig, SpaclOptions};
use spacl_core::experiment::{run_experiment, write_results, ExperimentConfig, Metric, Preset, PruneVariants};
use spacl_core::identifiability::{check_identifiability, verify_witness};
use spacl_core::io::{
    load_graph, load_membership, save_fit, save_graph, save_membership, FitSummary, MembershipTable,
};
use spacl_core::metrics::{max_rowwise_relative_error, rc_avg, relative_frobenius_error};
use spacl_core::model::{validate_assumptions, DEFAULT_XI};
use spacl_core::nalgebra::DMatrix;
use spacl_core::sampling::{expected_average_degree, sample_graph, SamplerConfig};
use spacl_core::spectral::EigenOptions;
use spacl_core::{Error, ModelParams};

#[derive(Parser)]
#[command(name = "spacl", version, about = "Mixed-membership community estimation by pruned successive projection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and its ground-truth memberships.
    Generate(GenerateArgs),
    /// Estimate memberships from an edge list.
    Fit(FitArgs),
    /// Compare an estimated membership file against ground truth.
    Eval(EvalArgs),
    /// Run a named simulation sweep and write a CSV table.
    Experiment(ExperimentArgs),
    /// Decide whether (Theta, B, rho) is identifiable and print a witness if not.
    CheckIdentifiability(IdentArgs),
    /// Evaluate the model conditions for consistent recovery.
    CheckAssumptions(AssumptionArgs),
}

/// A model given either by preset and sweep value or by explicit parameters.
#[derive(Args, Clone)]
struct ModelArgs {
    /// Experiment preset supplying the model.
    #[arg(long, conflicts_with_all = ["rho", "alpha", "b"])]
    preset: Option<String>,
    /// Sweep value for the preset.
    #[arg(long, requires = "preset")]
    value: Option<f64>,
    /// Number of nodes.
    #[arg(long, default_value_t = spacl_core::experiment::DEFAULT_N)]
    n: usize,
    #[arg(long)]
    rho: Option<f64>,
    /// Dirichlet parameter, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Block matrix: entries separated by commas, rows by semicolons.
    #[arg(long)]
    b: Option<String>,
    /// Rescale B so its largest entry is 1, keeping rho * B fixed.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Do not plant one pure node per community.
    #[arg(long)]
    no_pure: bool,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Edge list.
    graph: PathBuf,
    /// Number of communities.
    #[arg(short, long)]
    k: usize,
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = 10)]
    r: usize,
    #[arg(long, default_value_t = 0.75)]
    q: f64,
    #[arg(long, default_value_t = 0.95)]
    eps: f64,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = spacl_core::spectral::DEFAULT_TOL)]
    tol: f64,
    /// Estimated memberships (CSV).
    #[arg(long)]
    membership: PathBuf,
    /// B, rho and diagnostics (JSON).
    #[arg(long)]
    summary: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Frob,
    Rowwise,
    Rc,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MetricArg::Frob])]
    metric: Vec<MetricArg>,
    /// Append `estimate,truth,metric,value` rows to this CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Preset name; see `--list`.
    #[arg(long, required_unless_present_any = ["config", "from_csv", "list"])]
    preset: Option<String>,
    /// `key = value` config file.
    #[arg(long, conflicts_with_all = ["preset", "from_csv"])]
    config: Option<PathBuf>,
    /// Rerun the config embedded in an earlier result CSV.
    #[arg(long, conflicts_with = "preset")]
    from_csv: Option<PathBuf>,
    /// Run seeds 0..N.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Override the sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Override the node counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_parser = ["both", "on", "off"])]
    prune: Option<String>,
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Output CSV, or a directory receiving `<preset>.csv`.
    #[arg(long, required_unless_present_any = ["list", "print_config"])]
    out: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
    /// List presets and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct IdentArgs {
    /// Membership CSV.
    #[arg(long)]
    theta: PathBuf,
    /// Block matrix: entries separated by commas, rows by semicolons.
    #[arg(long)]
    b: String,
    #[arg(long)]
    rho: f64,
    /// Write the witness memberships here when one is found.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct AssumptionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_XI)]
    xi: f64,
}

/// Errors carrying their exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. }
            | Error::TooFewRows { .. }
            | Error::RankDeficient { .. }
            | Error::SingularCorners { .. }
            | Error::Witness(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("'{t}' is not a number"))))
        .collect()
}

fn parse_matrix(s: &str) -> CliResult<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_vector).collect::<CliResult<_>>()?;
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(usage(format!("matrix '{s}' is not square")));
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

fn format_row(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn format_matrix(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| format_row(m.row(i).iter().copied()))
        .collect::<Vec<_>>()
        .join(";")
}

impl ModelArgs {
    fn resolve(&self) -> CliResult<ModelParams> {
        if let Some(name) = &self.preset {
            let preset = Preset::parse(name)?;
            let value = self.value.ok_or_else(|| usage("--preset needs --value"))?;
            return Ok(preset.model(value, self.n)?);
        }
        let (Some(rho), Some(alpha), Some(b)) = (self.rho, &self.alpha, &self.b) else {
            return Err(usage("give either --preset and --value or all of --rho, --alpha and --b"));
        };
        let alpha = parse_vector(alpha)?;
        let b = parse_matrix(b)?;
        let params = if self.normalize {
            ModelParams::normalized(self.n, alpha, b, rho)
        } else {
            ModelParams::new(self.n, alpha, b, rho)
        };
        Ok(params?)
    }
}

fn describe(params: &ModelParams) -> String {
    format!(
        "n={} K={} rho={:?} alpha={} B={}",
        params.n(),
        params.k(),
        params.rho(),
        format_row(params.alpha().iter().copied()),
        format_matrix(params.b())
    )
}

fn generate(args: &GenerateArgs) -> CliResult<()> {
    let params = args.model.resolve()?;
    let config = if args.no_pure {
        SamplerConfig::new(args.seed).without_pure()
    } else {
        SamplerConfig::new(args.seed)
    };
    let (theta, graph) = sample_graph(&params, &config)?;
    let header = vec![
        format!("generated by spacl {}", env!("CARGO_PKG_VERSION")),
        format!("model {}", describe(&params)),
        format!("seed={} pure_nodes={}", args.seed, !args.no_pure),
    ];
    save_graph(&args.graph, &graph, &header)?;
    save_membership(&args.truth, theta.matrix(), None, &header)?;
    println!(
        "nodes {}\nedges {}\naverage_degree {:.3}\nexpected_average_degree {:.3}",
        graph.n(),
        graph.num_edges(),
        graph.average_degree(),
        expected_average_degree(&theta, &params)
    );
    Ok(())
}

fn fit(args: &FitArgs) -> CliResult<()> {
    let start = Instant::now();
    let loaded = load_graph(&args.graph)?;
    let load_time = start.elapsed().as_secs_f64();
    info!(
        "loaded {} nodes, {} edges ({} self loops and {} duplicates dropped)",
        loaded.graph.n(),
        loaded.graph.num_edges(),
        loaded.report.self_loops,
        loaded.report.duplicates
    );
    let options = SpaclOptions {
        prune: PruneConfig {
            r: args.r,
            q: args.q,
            eps: args.eps,
        },
        prune_enabled: !args.no_prune,
        eigen: EigenOptions::with_tol(args.tol),
        ..SpaclOptions::default()
    };
    let fit_start = Instant::now();
    let result = spacl(&loaded.graph, args.k, &options)?;
    let fit_time = fit_start.elapsed().as_secs_f64();

    let ids: Vec<u64> = (0..loaded.graph.n()).map(|i| loaded.ids.to_original(i)).collect();
    let mut summary = FitSummary::new(&result, &loaded.ids);
    summary.elapsed_seconds = Some(fit_time);
    let comments = vec![format!(
        "spacl fit of {} with K={} prune={} r={} q={} eps={}",
        args.graph.display(),
        args.k,
        !args.no_prune,
        args.r,
        args.q,
        args.eps
    )];
    save_membership(&args.membership, result.theta_hat.matrix(), Some(&ids), &comments)?;
    save_fit(&args.summary, &summary)?;
    println!("nodes {} edges {}", loaded.graph.n(), loaded.graph.num_edges());
    println!("rho_hat {:?}", result.rho_hat);
    println!("b_hat {}", format_matrix(&result.b_hat));
    println!("pure_nodes {:?}", summary.pure_nodes);
    println!("pruned {} zeroed_rows {}", summary.pruned_nodes.len(), summary.zeroed_rows);
    println!("corner_condition {:.3e}", result.corner_condition);
    println!("load_seconds {load_time:.3} fit_seconds {fit_time:.3}");
    Ok(())
}

fn matched_tables(estimate: &Path, truth: &Path) -> CliResult<(DMatrix<f64>, DMatrix<f64>)> {
    let est = load_membership(estimate, None)?.sorted_by_node();
    let tru: MembershipTable = load_membership(truth, Some(est.k()))?.sorted_by_node();
    if est.nodes != tru.nodes {
        return Err(usage(format!(
            "{} and {} list different nodes",
            estimate.display(),
            truth.display()
        )));
    }
    Ok((
        est.to_membership()?.into_matrix(),
        tru.to_membership()?.into_matrix(),
    ))
}

fn eval(args: &EvalArgs) -> CliResult<()> {
    let (est, tru) = matched_tables(&args.estimate, &args.truth)?;
    let mut rows = Vec::new();
    for m in &args.metric {
        let (name, value) = match m {
            MetricArg::Frob => ("frob", relative_frobenius_error(&est, &tru)?),
            MetricArg::Rowwise => ("rowwise", max_rowwise_relative_error(&est, &tru)?.max_relative_error),
            MetricArg::Rc => ("rc", rc_avg(&est, &tru)?),
        };
        println!("{name} {value:?}");
        rows.push(format!(
            "{},{},{name},{value:?}",
            args.estimate.display(),
            args.truth.display()
        ));
    }
    if let Some(out) = &args.out {
        use std::io::Write;
        let fresh = !out.exists();
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out)
            .map_err(|e| usage(format!("{}: {e}", out.display())))?;
        let mut text = String::new();
        if fresh {
            text.push_str("estimate,truth,metric,value\n");
        }
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        file.write_all(text.as_bytes())
            .map_err(|e| usage(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn experiment(args: &ExperimentArgs) -> CliResult<()> {
    if args.list {
        for p in spacl_core::experiment::ALL_PRESETS {
            println!("{:<11} sweep {:<10} {}", p.name(), p.parameter(), p.describe());
        }
        return Ok(());
    }
    let mut cfg = if let Some(path) = &args.config {
        ExperimentConfig::parse(&read_text(path)?)?
    } else if let Some(path) = &args.from_csv {
        ExperimentConfig::from_csv(path)?
    } else {
        let name = args.preset.as_deref().ok_or_else(|| usage("--preset is required"))?;
        ExperimentConfig::for_preset(Preset::parse(name)?)
    };
    if let Some(n) = args.seeds {
        cfg.seeds = (0..n).collect();
    }
    if let Some(list) = &args.seed_list {
        cfg.seeds = list.clone();
    }
    if let Some(values) = &args.values {
        cfg.values = values.clone();
    }
    if let Some(ns) = &args.n {
        cfg.ns = ns.clone();
    }
    if let Some(p) = &args.prune {
        cfg.prune = match p.as_str() {
            "on" => PruneVariants::On,
            "off" => PruneVariants::Off,
            _ => PruneVariants::Both,
        };
    }
    if let Some(ms) = &args.metrics {
        cfg.metrics = ms.iter().map(|m| Metric::parse(m)).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    if args.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let out = args.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let path = if out.is_dir() {
        out.join(format!("{}.csv", cfg.preset.name()))
    } else {
        out.clone()
    };
    let start = Instant::now();
    let rows = run_experiment(&cfg)?;
    write_results(&path, &cfg, &rows)?;
    let failures = rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "wrote {} rows to {} ({} failed) in {:.1} s",
        rows.len(),
        path.display(),
        failures,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn check_ident(args: &IdentArgs) -> CliResult<()> {
    let table = load_membership(&args.theta, None)?;
    let theta = table.to_membership()?;
    let b = parse_matrix(&args.b)?;
    let verdict = check_identifiability(&theta, &b, args.rho)?;
    println!("status {}", verdict.status.as_str());
    println!("reason {}", verdict.reason.as_str());
    println!("rank {}", verdict.rank);
    if let Some(w) = &verdict.witness {
        let check = verify_witness(&theta, &b, args.rho, w)?;
        println!("witness_epsilon {:?}", w.epsilon);
        println!("witness_b {}", format_matrix(&w.b));
        println!("witness_p_max_error {:e}", check.p_max_error);
        println!("witness_permutation_distance {:e}", check.permutation_distance);
        if let Some(path) = &args.witness {
            save_membership(
                path,
                w.theta.matrix(),
                Some(&table.nodes),
                &[format!("witness B={} rho={:?}", format_matrix(&w.b), args.rho)],
            )?;
        }
    }
    Ok(())
}

fn check_assumptions(args: &AssumptionArgs) -> CliResult<()> {
    let params = args.model.resolve()?;
    let report = validate_assumptions(&params, args.xi);
    let json = serde_json::to_string_pretty(&report).map_err(|e| usage(e.to_string()))?;
    println!("{json}");
    println!("all_satisfied {}", report.all_satisfied());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Experiment(a) => experiment(a),
        Command::CheckIdentifiability(a) => check_ident(a),
        Command::CheckAssumptions(a) => check_assumptions(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
