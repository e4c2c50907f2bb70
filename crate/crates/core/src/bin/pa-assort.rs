use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use pa_assort::experiments::output::{write_gnuplot, write_result, write_theory, write_theory_csv};
use pa_assort::experiments::{
    check_preset, check_theory, preset, run_scenario_with_workers, theory_tables, worker_count, Check, Output,
    Scenario,
};
use pa_assort::graph::{export_edge_list, generate, import_edge_list};
use pa_assort::metrics::{clustering, degree_profile, pearson_assortativity};
use pa_assort::oracle::{compare_row, integrate_n, integrate_s};
use pa_assort::params::{derive_generator_params, GeneratorParams, ModelParams, Regime};
use pa_assort::theory::TheoryCurve;
use pa_assort::Error;

/// Generalized preferential attachment graphs and their degree-degree
/// correlations.
#[derive(Parser)]
#[command(name = "pa-assort", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow a graph and write its edge list.
    Generate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge-list destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-degree statistics of an edge list.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scalars as `key,value` CSV; stderr when absent.
        #[arg(long)]
        scalars: Option<PathBuf>,
    },
    /// Closed-form overlay tables.
    Theory {
        #[command(flatten)]
        params: ModelArgs,
        #[arg(long)]
        d_max: u64,
        /// Graph sizes for the hypothesis columns (A >= 1/2).
        #[arg(long, value_delimiter = ',', default_value = "100000")]
        n: Vec<u64>,
        /// Constant multiplying the hypothesis predictors.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the expectation recurrences and compare with the closed forms.
    Oracle {
        #[command(flatten)]
        params: ModelArgs,
        #[arg(long = "n-end", alias = "n")]
        n: u64,
        #[arg(long, default_value_t = 50)]
        d_max: u64,
        /// Extra sizes to record besides `n`.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-seed scenarios.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: ExperimentOpts,
    },
    /// Run a built-in figure preset.
    Preset {
        #[arg(value_parser = pa_assort::experiments::PRESET_NAMES)]
        name: String,
        #[command(flatten)]
        opts: ExperimentOpts,
    },
}

#[derive(Args)]
struct ExperimentOpts {
    /// Output directory; defaults to `results/<scenario name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the scenario's full-scale size list.
    #[arg(long)]
    full: bool,
    /// Evaluate the preset checks; exit with status 3 if any fails.
    #[arg(long)]
    check: bool,
    /// Also write gnuplot scripts next to the CSVs.
    #[arg(long)]
    plot: bool,
    /// Worker threads; overrides the environment.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long = "A", alias = "a")]
    a: f64,
    #[arg(long = "D", alias = "d", default_value_t = 0.0)]
    d: f64,
}

impl ModelArgs {
    fn model(&self) -> pa_assort::Result<ModelParams> {
        ModelParams::new(self.m, self.a, self.d)
    }
}

/// Either `(A, D)` or `(beta, c)`.
#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long = "A", alias = "a", conflicts_with_all = ["beta", "c"])]
    a: Option<f64>,
    #[arg(long = "D", alias = "d", conflicts_with_all = ["beta", "c"])]
    d: Option<f64>,
    #[arg(long, requires = "c")]
    beta: Option<f64>,
    #[arg(long, requires = "beta", allow_negative_numbers = true)]
    c: Option<f64>,
}

impl ParamArgs {
    fn generator(&self) -> pa_assort::Result<GeneratorParams> {
        match (self.beta, self.c) {
            (Some(beta), Some(c)) => GeneratorParams::new(self.m, beta, c),
            _ => {
                let a = self.a.ok_or_else(|| Error::InvalidParameter("give --A (and --D) or --beta and --c".into()))?;
                derive_generator_params(self.m, a, self.d.unwrap_or(0.0))
            }
        }
    }
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_metrics(input: &Path, out: Option<&Path>, scalars: Option<&Path>) -> anyhow::Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let g = import_edge_list(BufReader::new(file))?;
    let profile = degree_profile(&g);
    let cl = clustering(&g);
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(["d", "N", "S", "dnn", "C_of_d"])?;
    for d in profile.degrees() {
        w.write_record([
            d.to_string(),
            profile.count(d).to_string(),
            profile.neighbor_sum(d).to_string(),
            fmt_opt(profile.dnn(d)),
            fmt_opt(cl.at_degree(d)),
        ])?;
    }
    w.flush()?;
    let rows = [
        ("n", profile.n.to_string()),
        ("edges", profile.edges.to_string()),
        ("W", profile.w.to_string()),
        ("C1", cl.global.to_string()),
        ("C2", cl.average_local.to_string()),
        ("pearson", fmt_opt(pearson_assortativity(&g))),
    ];
    let dest: Box<dyn Write> = match scalars {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stderr()),
    };
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_oracle(p: &ModelParams, n: u64, d_max: u64, checkpoints: &[u64], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    if p.regime() == Regime::Subcritical {
        let table = integrate_s(p, n, d_max, checkpoints)?;
        let curve = TheoryCurve::build(p, d_max)?;
        w.write_record(["n", "d", "S_over_n", "M_closed", "rel_err", "N_over_n", "c_closed", "rel_err_N"])?;
        for row in &table.rows {
            if row.n < u64::from(p.m()) + 2 {
                continue;
            }
            for g in compare_row(&table, row, &curve)? {
                w.write_record([
                    g.n.to_string(),
                    g.d.to_string(),
                    g.s_over_n.to_string(),
                    g.m_closed.to_string(),
                    g.rel_err_s.to_string(),
                    g.count_over_n.to_string(),
                    g.c_closed.to_string(),
                    g.rel_err_count.to_string(),
                ])?;
            }
        }
    } else {
        let table = integrate_n(p, n, d_max, checkpoints)?;
        w.write_record(["n", "d", "N_over_n", "c_closed"])?;
        for row in &table.rows {
            for d in u64::from(p.m())..=d_max {
                w.write_record([
                    row.n.to_string(),
                    d.to_string(),
                    (row.counts[d as usize] / row.n as f64).to_string(),
                    pa_assort::theory::c_exact(p, d)?.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn report(checks: &[Check]) -> bool {
    for c in checks {
        eprintln!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

/// Returns `false` when `--check` was given and a check failed.
fn cmd_experiment(mut s: Scenario, opts: &ExperimentOpts, preset_name: Option<&str>) -> anyhow::Result<bool> {
    if opts.full {
        s.use_full_scale();
    }
    let dir = opts.out.clone().unwrap_or_else(|| Path::new("results").join(&s.name));
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let mut checks = Vec::new();
    if s.wants(Output::TheoryOnly) {
        for v in s.variants()? {
            let d_max = s.theory_d_max.unwrap_or(10_000);
            let n_list: Vec<u64> = s.n_list.iter().map(|&n| n as u64).collect();
            let n_list = if n_list.is_empty() { vec![100_000] } else { n_list };
            let table = theory_tables(&v.model, d_max, &n_list, 1.0)?;
            let path = dir.join("theory.csv");
            write_theory_csv(&table, &path)?;
            written.push(path);
            if preset_name.is_some() {
                checks.extend(check_theory(&table));
            }
        }
    }
    if !s.theory_only() {
        let workers = opts.workers.unwrap_or_else(worker_count);
        let result = run_scenario_with_workers(&s, workers)?;
        written.extend(write_result(&result, &dir)?);
        if let Some(name) = preset_name {
            checks.extend(check_preset(name, &result));
        }
    }
    if opts.plot {
        written.extend(write_gnuplot(&s.name, &s.outputs, &dir)?);
    }
    for p in &written {
        println!("{}", p.display());
    }
    Ok(!opts.check || report(&checks))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate { params, n, seed, out } => {
            let g = generate(&params.generator()?, n, seed)?;
            let mut w = sink(out.as_deref())?;
            export_edge_list(&g, &mut w)?;
            w.flush()?;
        }
        Command::Metrics { input, out, scalars } => cmd_metrics(&input, out.as_deref(), scalars.as_deref())?,
        Command::Theory { params, d_max, n, constant, out } => {
            let table = theory_tables(&params.model()?, d_max, &n, constant)?;
            write_theory(&table, sink(out.as_deref())?)?;
        }
        Command::Oracle { params, n, d_max, checkpoints, out } => {
            cmd_oracle(&params.model()?, n, d_max, &checkpoints, out.as_deref())?
        }
        Command::Experiment { action } => {
            return match action {
                ExperimentAction::Run { scenario, opts } => cmd_experiment(Scenario::load(&scenario)?, &opts, None),
                ExperimentAction::Preset { name, opts } => cmd_experiment(preset(&name)?, &opts, Some(&name)),
            };
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter(_) | Error::Regime(_) | Error::Domain(_) | Error::SizeCap(_) | Error::Json(_)) => 2,
        Some(Error::Parse { .. } | Error::Empty(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
