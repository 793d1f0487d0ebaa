use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ehaoi::config::{RunConfig, SimSection};
use ehaoi::sweep::{sweep_rows, to_csv, Output, SweepSpec};
use ehaoi::{analyze, compare, simulate_cmd, Discipline, Method};

#[derive(Parser)]
#[command(
    name = "ehaoi",
    version,
    about = "Age of information for an energy-harvesting multi-source transmitter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean, second moment and MGF of one source's age.
    Analyze(Common),
    /// Discrete-event simulation checked against the closed forms.
    Simulate(SimArgs),
    /// Sweep one parameter and tabulate the results.
    Sweep(SweepArgs),
    /// All three disciplines side by side.
    Compare(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    discipline: Option<Discipline>,
    /// Arrival rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    battery: Option<usize>,
    /// Source of interest, 1-based.
    #[arg(long)]
    source: Option<usize>,
    #[arg(long)]
    method: Option<Method>,
    /// Normalized MGF arguments s/μ, comma separated.
    #[arg(long = "mgf-at", value_delimiter = ',')]
    mgf_at: Option<Vec<f64>>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// Print the first N events of replication 0 to stderr.
    #[arg(long, value_name = "N")]
    trace: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// `beta=0.1:10:50`, `rho=0.2:3:20`, `rho_split=0.05:0.95:19` or `battery=1:8`.
    #[arg(long)]
    sweep: String,
    /// Any of mean, second_moment, std, mgf@<s̄>, jfi, sum_aoi.
    #[arg(long, value_delimiter = ',', default_value = "mean,std,jfi,sum_aoi")]
    outputs: Vec<String>,
    /// Sources whose per-source columns are written.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sources: Vec<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        let sim = (self.horizon.is_some() || self.seed.is_some() || self.replications.is_some()).then(|| SimSection {
            horizon: self.horizon,
            seed: self.seed,
            replications: self.replications,
            ..Default::default()
        });
        Ok(base.merge(RunConfig {
            n_sources: None,
            lambda: self.lambda.clone(),
            eta: self.eta,
            mu: self.mu,
            battery: self.battery,
            discipline: self.discipline,
            source: self.source,
            method: self.method,
            mgf_at: self.mgf_at.clone(),
            sim,
        }))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T> {
    config: &'a RunConfig,
    result: T,
}

fn json<T: Serialize>(config: &RunConfig, result: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Document { config, result })?;
    s.push('\n');
    Ok(s)
}

fn fmt_row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

fn run_analyze(args: &Common) -> Result<String> {
    let cfg = args.resolve()?;
    let params = cfg.params()?;
    let disciplines = match cfg.discipline {
        Some(d) => vec![d],
        None => Discipline::ALL.to_vec(),
    };
    let reports = disciplines
        .iter()
        .map(|&d| analyze(&params, d, cfg.source(), cfg.method(), &cfg.mgf_at()))
        .collect::<ehaoi::Result<Vec<_>>>()?;
    if args.format == Some(Format::Csv) {
        let mut header = vec!["discipline", "source", "mean", "second_moment", "std", "domain_bound"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(cfg.mgf_at().iter().map(|s| format!("mgf{s}")));
        let mut out = fmt_row(&header);
        for r in &reports {
            let mut row = vec![
                r.discipline.to_string(),
                r.source.to_string(),
                r.mean.to_string(),
                r.second_moment.to_string(),
                r.std.to_string(),
                r.domain_bound.to_string(),
            ];
            row.extend(r.mgf_samples.iter().map(|(_, m)| m.to_string()));
            out.push_str(&fmt_row(&row));
        }
        return Ok(out);
    }
    json(&cfg, &reports)
}

fn run_simulate(sim: &SimArgs) -> Result<String> {
    let args = &sim.common;
    let cfg = args.resolve()?;
    let params = cfg.params()?;
    let Some(discipline) = cfg.discipline else {
        bail!("simulate needs --discipline");
    };
    let mut sim_config = cfg.sim_config()?;
    sim_config.trace_limit = sim.trace;
    let mut report = simulate_cmd(&params, discipline, &sim_config)?;
    if let Some(trace) = report.trace.take() {
        let mut stderr = std::io::stderr().lock();
        for event in trace {
            writeln!(stderr, "{event}")?;
        }
    }
    if args.format == Some(Format::Csv) {
        let mut out = fmt_row(
            &[
                "source",
                "metric",
                "simulated",
                "std_error",
                "half_width",
                "reference",
                "pass",
            ]
            .map(String::from),
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let optb = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &report.sources {
            let mut push = |metric: String, c: &ehaoi::analysis::Check| {
                out.push_str(&fmt_row(&[
                    s.source.to_string(),
                    metric,
                    c.simulated.to_string(),
                    c.std_error.to_string(),
                    c.half_width.to_string(),
                    opt(c.reference),
                    optb(c.pass),
                ]));
            };
            push("mean".into(), &s.mean);
            push("second_moment".into(), &s.second_moment);
            for m in &s.mgf {
                push(format!("mgf{}", m.s_bar), &m.check);
            }
        }
        return Ok(out);
    }
    json(&cfg, &report)
}

fn run_compare(args: &Common) -> Result<String> {
    let cfg = args.resolve()?;
    let params = cfg.params()?;
    let cmp = compare(&params, cfg.source(), cfg.method(), &cfg.mgf_at())?;
    if args.format == Some(Format::Csv) {
        let mut out = fmt_row(&["discipline", "mean", "second_moment", "std", "sum_aoi", "jfi"].map(String::from));
        for r in &cmp.rows {
            out.push_str(&fmt_row(&[
                r.report.discipline.to_string(),
                r.report.mean.to_string(),
                r.report.second_moment.to_string(),
                r.report.std.to_string(),
                r.sum_aoi.to_string(),
                r.jfi.to_string(),
            ]));
        }
        return Ok(out);
    }
    json(&cfg, &cmp)
}

fn run_sweep(args: &SweepArgs) -> Result<String> {
    let cfg = args.common.resolve()?;
    let mut spec = SweepSpec::parse_axis(&args.sweep, cfg.params()?)?;
    spec.method = cfg.method();
    if let Some(d) = cfg.discipline {
        spec.disciplines = vec![d];
    }
    spec.sources = args.sources.clone();
    spec.outputs = args
        .outputs
        .iter()
        .map(|o| o.parse::<Output>())
        .collect::<ehaoi::Result<Vec<_>>>()?;
    let rows = sweep_rows(&spec)?;
    let header = spec.header();
    if args.common.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct Table<'a> {
            sweep: &'a SweepSpec,
            header: Vec<String>,
            rows: Vec<Vec<f64>>,
        }
        return json(
            &cfg,
            Table {
                sweep: &spec,
                header,
                rows,
            },
        );
    }
    Ok(to_csv(&header, &rows))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (text, common) = match &cli.command {
        Command::Analyze(a) => (run_analyze(a)?, a),
        Command::Simulate(a) => (run_simulate(a)?, &a.common),
        Command::Compare(a) => (run_compare(a)?, a),
        Command::Sweep(a) => (run_sweep(a)?, &a.common),
    };
    common.emit(&text)
}
