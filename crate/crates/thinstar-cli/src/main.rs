//! `thinstar`: limit spectra, asymptotic expansions, junction constants and
//! convergence studies for thin star junctions.
//!
//! Exit codes: 0 ok, 1 configuration or usage, 2 solver, 3 degenerate
//! eigenvalue, 4 missing node constants.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thinstar::expansion::{expand_with, provider_for, series_to_json, ConstantsProvider};
use thinstar::junction::JunctionProvider;
use thinstar::limit_spectrum::{solve_limit_spectrum, Mesh};
use thinstar::model::{load_config, serialize_config, AlphaRegime, ConstantsSource, JunctionParams, StarGraph};
use thinstar::oracle::{oracle_table, RateFit, SurrogateOptions};
use thinstar::{Error, ErrorKind};

use manifest::{fmt_f64, json_text, Recorder};

#[derive(Parser, Debug, Serialize)]
#[command(name = "thinstar", version, about = "Spectral asymptotics of thin star junctions")]
struct Cli {
    /// Base directory for every relative path.
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Limit eigenpairs on the star graph.
    Spectrum(SpectrumArgs),
    /// Asymptotic series of one eigenvalue.
    Expand(ExpandArgs),
    /// Lumped-mass surrogate eigenvalues over an eps sweep (CSV).
    Oracle(OracleArgs),
    /// Log-log rate fit of an oracle CSV.
    Rates(RatesArgs),
    /// Node constants from junction solves, as a config-ready table.
    Junction(JunctionArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RegimeFlag {
    Zero,
    Frac,
    One,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

/// Where the expansion takes its node constants from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    /// Whatever the config specifies.
    Auto,
    /// The config's tables, ignoring any junction block.
    Table,
    /// Junction solves.
    Junction,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's regime.
    #[arg(long, value_enum)]
    regime: Option<RegimeFlag>,
    /// Exponent for `--regime frac`; near-rational values are classified as rational.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, requires = "n0")]
    m0: Option<u32>,
    #[arg(long, requires = "m0")]
    n0: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct JunctionFlags {
    /// Grid spacing; defaults to the config's, else ell0/8.
    #[arg(long)]
    spacing: Option<f64>,
    /// Outlet truncation; defaults to the config's, else 6.
    #[arg(long)]
    truncation: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct ExpandArgs {
    #[command(flatten)]
    common: Common,
    /// 1-based eigenvalue index.
    #[arg(long, default_value_t = 1)]
    index: usize,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[arg(long, value_enum, default_value = "auto")]
    mode: Mode,
    /// Shorthand for `--mode junction`.
    #[arg(long)]
    compute_junction: bool,
    #[command(flatten)]
    junction: JunctionFlags,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Largest eigenvalue index.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    eps: Vec<f64>,
    /// Elements per unit edge length.
    #[arg(long, default_value_t = 4000)]
    mesh: usize,
    /// Start the edges at distance eps*ell0 from the vertex.
    #[arg(long)]
    node_offset: bool,
}

#[derive(Args, Debug, Serialize)]
struct RatesArgs {
    /// CSV written by `oracle`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Exponent used for the prefactor fit.
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct JunctionArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    index: usize,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[command(flatten)]
    junction: JunctionFlags,
    /// Also write a copy of the config carrying the computed tables.
    #[arg(long)]
    config_out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::kind) {
        Some(ErrorKind::Solver) => 2,
        Some(ErrorKind::Degenerate) => 3,
        Some(ErrorKind::MissingConstants) => 4,
        Some(ErrorKind::Config) | None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let wd = &cli.workdir;
    let params = serde_json::to_value(&cli.command)?;
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(wd, a, params),
        Command::Expand(a) => cmd_expand(wd, a, params),
        Command::Oracle(a) => cmd_oracle(wd, a, params),
        Command::Rates(a) => cmd_rates(wd, a, params),
        Command::Junction(a) => cmd_junction(wd, a, params),
    }
}

fn resolve(wd: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        wd.join(p)
    }
}

struct Loaded {
    graph: StarGraph,
    regime: AlphaRegime,
    out: Option<PathBuf>,
}

fn load(wd: &Path, c: &Common, rec: &mut Recorder) -> Result<Loaded> {
    let path = resolve(wd, &c.config);
    let (graph, from_config) = load_config(&path)?;
    rec.hash_config(&path)?;
    let regime = match c.regime {
        None => from_config,
        Some(RegimeFlag::Zero) => AlphaRegime::Zero,
        Some(RegimeFlag::One) => AlphaRegime::One,
        Some(RegimeFlag::Frac) => match (c.m0, c.n0, c.alpha) {
            (Some(m0), Some(n0), _) => AlphaRegime::rational(m0, n0)?,
            (_, _, Some(alpha)) => AlphaRegime::fractional(alpha)?,
            _ => return Err(Error::config("--regime frac needs --alpha or --m0/--n0").into()),
        },
    };
    Ok(Loaded { graph, regime, out: c.out.as_ref().map(|p| resolve(wd, p)) })
}

fn junction_params(graph: &StarGraph, flags: &JunctionFlags) -> JunctionParams {
    let configured = match &graph.node.constants {
        ConstantsSource::Computed(p) => Some(*p),
        ConstantsSource::Config(_) => None,
    };
    JunctionParams {
        spacing: flags.spacing.or(configured.map(|p| p.spacing)).unwrap_or(graph.node.ell0 / 8.0),
        truncation: flags.truncation.or(configured.map(|p| p.truncation)).unwrap_or(6.0),
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    lambda: f64,
    relative_gap: f64,
    degenerate: bool,
    pole_type: bool,
}

fn cmd_spectrum(wd: &Path, a: &SpectrumArgs, params: serde_json::Value) -> Result<()> {
    let mut rec = Recorder::new("spectrum", params);
    if a.count == 0 {
        return Err(Error::config("--count must be at least 1").into());
    }
    let l = load(wd, &a.common, &mut rec)?;
    let rows: Vec<SpectrumRow> = solve_limit_spectrum(&l.graph, &l.regime, a.count)?
        .iter()
        .map(|p| SpectrumRow {
            index: p.index,
            lambda: p.lambda,
            relative_gap: p.relative_gap,
            degenerate: p.degenerate,
            pole_type: p.pole_type,
        })
        .collect();
    let text = match a.format {
        Format::Json => json_text(&serde_json::json!({ "regime": l.regime.to_string(), "eigenpairs": rows }))?,
        Format::Csv => {
            let mut s = String::from("index,lambda,relative_gap,degenerate,pole_type\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{},{}\n",
                    r.index,
                    fmt_f64(r.lambda),
                    fmt_f64(r.relative_gap),
                    r.degenerate,
                    r.pole_type
                );
            }
            s
        }
    };
    rec.emit(l.out.as_deref(), &text)?;
    rec.finish(wd, l.out.as_deref())?;
    Ok(())
}

fn cmd_expand(wd: &Path, a: &ExpandArgs, params: serde_json::Value) -> Result<()> {
    let mut rec = Recorder::new("expand", params);
    let l = load(wd, &a.common, &mut rec)?;
    let mode = if a.compute_junction { Mode::Junction } else { a.mode };
    let graph = match mode {
        Mode::Auto => l.graph.clone(),
        Mode::Table => match &l.graph.node.constants {
            ConstantsSource::Config(_) => l.graph.clone(),
            ConstantsSource::Computed(_) => bail!(Error::config("--mode table on a config without tables")),
        },
        Mode::Junction => l.graph.with_constants(ConstantsSource::Computed(junction_params(&l.graph, &a.junction))),
    };
    let mut provider = provider_for(&graph, l.regime.alpha())?;
    let series = expand_with(&graph, &l.regime, a.index, a.order, provider.as_mut())?;

    let mut table = format!("{:>12}  {:>24}  {}\n", "exponent", "mu", "label");
    for (entry, mu) in series.table() {
        table += &format!("{:>12.6}  {:>24}  {}\n", entry.exponent, fmt_f64(mu), entry.label);
    }
    if l.out.is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    rec.emit(l.out.as_deref(), &json_text(&series_to_json(&series))?)?;
    rec.finish(wd, l.out.as_deref())?;
    series.require_complete()?;
    Ok(())
}

fn cmd_oracle(wd: &Path, a: &OracleArgs, params: serde_json::Value) -> Result<()> {
    let mut rec = Recorder::new("oracle", params);
    let l = load(wd, &a.common, &mut rec)?;
    let opts = SurrogateOptions { mesh: Mesh::per_unit_length(&l.graph, a.mesh), node_offset: a.node_offset };
    let rows = oracle_table(&l.graph, l.regime.alpha(), &a.eps, a.count, opts)?;
    let mut text = String::from("eps,n,lambda,deviation,predicted,residual\n");
    for r in &rows {
        text += &format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.eps),
            r.n,
            fmt_f64(r.lambda),
            fmt_f64(r.deviation),
            fmt_f64(r.predicted),
            fmt_f64(r.residual)
        );
    }
    rec.emit(l.out.as_deref(), &text)?;
    rec.finish(wd, l.out.as_deref())?;
    Ok(())
}

/// `(eps, deviation)` for eigenvalue `index`, in file order.
fn read_oracle_csv(text: &str, index: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::config(format!("oracle csv lacks a '{name}' column")))
    };
    let (ce, cn, cd) = (col("eps")?, col("n")?, col("deviation")?);
    let (mut eps, mut dev) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::config(format!("oracle csv row {}: malformed", k + 2));
        let n: usize = f.get(cn).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if n == index {
            eps.push(f.get(ce).and_then(|s| s.parse().ok()).ok_or_else(bad)?);
            dev.push(f.get(cd).and_then(|s| s.parse().ok()).ok_or_else(bad)?);
        }
    }
    if eps.is_empty() {
        bail!(Error::config(format!("oracle csv has no rows for n = {index}")));
    }
    Ok((eps, dev))
}

fn cmd_rates(wd: &Path, a: &RatesArgs, params: serde_json::Value) -> Result<()> {
    let mut rec = Recorder::new("rates", params);
    let input = resolve(wd, &a.input);
    let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let (eps, dev) = read_oracle_csv(&text, a.index)?;
    let fit = RateFit::new(&eps, &dev, a.alpha)?;
    let out = a.out.as_ref().map(|p| resolve(wd, p));
    rec.emit(out.as_deref(), &json_text(&fit)?)?;
    rec.finish(wd, out.as_deref())?;
    Ok(())
}

fn cmd_junction(wd: &Path, a: &JunctionArgs, params: serde_json::Value) -> Result<()> {
    let mut rec = Recorder::new("junction", params);
    let l = load(wd, &a.common, &mut rec)?;
    let jp = junction_params(&l.graph, &a.junction);
    let graph = l.graph.with_constants(ConstantsSource::Computed(jp));
    let mut provider = JunctionProvider::new(&graph, jp)?;
    let series = expand_with(&graph, &l.regime, a.index, a.order, &mut provider as &mut dyn ConstantsProvider)?;
    let tables = provider.recorded().to_tables();
    let report = provider.basis()?.report();
    let doc = serde_json::json!({
        "constants": tables,
        "basis": report,
        "mu": series_to_json(&series)["mu"],
    });
    rec.emit(l.out.as_deref(), &json_text(&doc)?)?;
    if let Some(p) = &a.config_out {
        let p = resolve(wd, p);
        let with_tables = l.graph.with_constants(ConstantsSource::Config(provider.recorded().clone()));
        rec.emit(Some(&p), &(serialize_config(&with_tables, &l.regime) + "\n"))?;
    }
    rec.finish(wd, l.out.as_deref())?;
    Ok(())
}
