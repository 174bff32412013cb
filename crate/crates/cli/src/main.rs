//! `cheby`: command-line front end for the inequality verifier.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cheby_core::conditions::{check_condition, corollary_bound, Direction};
use cheby_core::continuous::{
    bound_for_triple, classical_chebyshev, derived_estimates, BoundOptions, Monotonicity, SGrid, WeightedTriple,
    DEFAULT_CONT_TOL_REL, DEFAULT_PANELS, DEFAULT_S_GRID,
};
use cheby_core::discrete::{bound_for, reduce_chain, WeightedSequence};
use cheby_core::io::{self, ReportRow};
use cheby_core::lab::{fuzz_campaign, CampaignConfig, Target};
use cheby_core::report::{BoundKind, BoundReport, DEFAULT_TOL_REL};
use cheby_core::{CurvedFunction, Error, Result};

use output::{Format, Sink};

const PANELS_ENV: &str = "CHEBY_DEFAULT_PANELS";

#[derive(Parser, Debug)]
#[command(
    name = "cheby",
    version,
    about = "Check Chebyshev-type inequalities for convex and concave outer functions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format; text on a terminal, json otherwise
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Quadrature panels (default: $CHEBY_DEFAULT_PANELS or 16384)
    #[arg(long, global = true)]
    panels: Option<usize>,
    /// Number of uniform s-grid points
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Relative tolerance for the holds/violated decision
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the bound for one instance
    Bound(InstanceArgs),
    /// Run every applicable check on one instance
    Verify(InstanceArgs),
    /// Check the ratio condition and, if it passes, the power-mean bound
    CheckCondition(ConditionArgs),
    /// Run a randomized campaign
    Fuzz(FuzzArgs),
    /// Print the merge chain of a sequence
    Reduce(ReduceArgs),
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Treat the input as a weighted sequence (a,b,p CSV)
    #[arg(long)]
    discrete: bool,
    /// CSV input: columns a,b,p with --discrete, otherwise x,f,g,p
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// builtin:f=..,g=..,p=.. descriptor, or a .toml / .csv path
    #[arg(long, value_name = "SPEC")]
    triple: Option<String>,
    /// TOML triple description
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Outer function, e.g. power:2 or plin:0,1,3@0,1,2
    #[arg(long = "M", value_name = "FAMILY")]
    m: String,
    /// Identifier used in report rows
    #[arg(long, default_value = "instance")]
    id: String,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    /// builtin:f=..,g=..,p=.. descriptor, or a .toml / .csv path
    #[arg(long, value_name = "SPEC")]
    triple: Option<String>,
    /// TOML triple description
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    r: f64,
    /// c1 (r in (0,1], upper bound) or c2 (r >= 1, lower bound)
    #[arg(long)]
    direction: String,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    /// Campaign TOML; defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Restrict to these targets (comma separated)
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    /// Also write per-trial rows as CSV
    #[arg(long, value_name = "PATH")]
    rows: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Sequence CSV with columns a,b,p
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
    /// Accepted for symmetry with `bound`; sequences are the only input
    #[arg(long)]
    discrete: bool,
    #[arg(long = "M", value_name = "FAMILY")]
    m: String,
}

enum Instance {
    Sequence(WeightedSequence),
    Triple(WeightedTriple),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(true)` when every checked inequality holds.
fn run(cli: &Cli) -> Result<bool> {
    let settings = Settings::resolve(&cli.common)?;
    let sink = Sink::new(cli.common.format, cli.common.out.clone());
    match &cli.command {
        Command::Bound(args) => cmd_bound(args, &settings, &sink),
        Command::Verify(args) => cmd_verify(args, &settings, &sink),
        Command::CheckCondition(args) => cmd_condition(args, &settings, &sink),
        Command::Fuzz(args) => cmd_fuzz(args, &cli.common, &sink),
        Command::Reduce(args) => cmd_reduce(args, &sink),
    }
}

struct Settings {
    panels: usize,
    grid: usize,
    tol: Option<f64>,
}

impl Settings {
    fn resolve(common: &Common) -> Result<Self> {
        let panels = match common.panels {
            Some(n) => n,
            None => default_panels()?,
        };
        if panels == 0 {
            return Err(Error::Usage("--panels must be at least 1".into()));
        }
        let grid = common.grid.unwrap_or(DEFAULT_S_GRID);
        if grid == 0 {
            return Err(Error::Usage("--grid must be at least 1".into()));
        }
        if let Some(t) = common.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(Self {
            panels,
            grid,
            tol: common.tol,
        })
    }

    fn bound_options(&self) -> BoundOptions {
        BoundOptions::default()
            .with_panels(self.panels)
            .with_grid(SGrid::Uniform(self.grid))
            .with_tol(self.tol.unwrap_or(DEFAULT_CONT_TOL_REL))
    }

    fn discrete_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL_REL)
    }

    fn continuous_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_CONT_TOL_REL)
    }
}

fn default_panels() -> Result<usize> {
    match std::env::var(PANELS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{PANELS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_PANELS),
    }
}

fn load_triple(spec: Option<&str>, config: Option<&Path>) -> Result<WeightedTriple> {
    match (spec, config) {
        (Some(_), Some(_)) => Err(Error::Usage("give either --triple or --config, not both".into())),
        (Some(s), None) if s.starts_with("builtin:") => io::parse_builtin_triple(s),
        (Some(s), None) => {
            let path = Path::new(s);
            match path.extension().and_then(|e| e.to_str()) {
                Some("toml") => io::read_triple_toml_path(path),
                Some("csv") => io::read_triple_csv_path(path),
                _ => Err(Error::Usage(format!(
                    "--triple expects builtin:..., a .toml or a .csv path, got {s:?}"
                ))),
            }
        }
        (None, Some(path)) => io::read_triple_toml_path(path),
        (None, None) => Err(Error::Usage("no input: give --triple or --config".into())),
    }
}

fn load_instance(args: &InstanceArgs) -> Result<Instance> {
    if args.discrete {
        if args.triple.is_some() || args.config.is_some() {
            return Err(Error::Usage("--discrete takes its input from --csv only".into()));
        }
        let path = args
            .csv
            .as_deref()
            .ok_or_else(|| Error::Usage("--discrete needs --csv PATH".into()))?;
        return Ok(Instance::Sequence(io::read_sequence_path(path)?));
    }
    if let Some(path) = &args.csv {
        if args.triple.is_some() || args.config.is_some() {
            return Err(Error::Usage("give only one of --csv, --triple, --config".into()));
        }
        return Ok(Instance::Triple(io::read_triple_csv_path(path)?));
    }
    load_triple(args.triple.as_deref(), args.config.as_deref()).map(Instance::Triple)
}

fn sequence_theorem(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Upper => "lemma1-upper",
        BoundKind::Lower => "lemma1-lower",
    }
}

fn triple_theorem(t: &WeightedTriple, kind: BoundKind) -> &'static str {
    match (t.f.monotonicity(), kind) {
        (Monotonicity::Nondecreasing, _) => "remark",
        (_, BoundKind::Upper) => "theorem1-upper",
        (_, BoundKind::Lower) => "theorem1-lower",
    }
}

fn instance_bound(inst: &Instance, m: &CurvedFunction, settings: &Settings) -> Result<(BoundReport, &'static str)> {
    let kind = if m.is_convex() {
        BoundKind::Upper
    } else {
        BoundKind::Lower
    };
    match inst {
        Instance::Sequence(seq) => Ok((
            bound_for(seq, m).with_tol(settings.discrete_tol()),
            sequence_theorem(kind),
        )),
        Instance::Triple(t) => Ok((
            bound_for_triple(t, m, &settings.bound_options())?,
            triple_theorem(t, kind),
        )),
    }
}

fn cmd_bound(args: &InstanceArgs, settings: &Settings, sink: &Sink) -> Result<bool> {
    let m = CurvedFunction::parse(&args.m)?;
    let inst = load_instance(args)?;
    let (report, theorem) = instance_bound(&inst, &m, settings)?;
    let row = ReportRow::new(&args.id, theorem, &report);
    sink.emit(|format| match format {
        Format::Json => io::to_json_string(&report),
        Format::Csv => output::csv_string(std::slice::from_ref(&row)),
        Format::Text => Ok(output::bound_text(&row)),
    })?;
    Ok(report.holds)
}

fn cmd_verify(args: &InstanceArgs, settings: &Settings, sink: &Sink) -> Result<bool> {
    let m = CurvedFunction::parse(&args.m)?;
    let inst = load_instance(args)?;
    let (report, theorem) = instance_bound(&inst, &m, settings)?;
    let mut rows = vec![ReportRow::new(&args.id, theorem, &report)];

    match &inst {
        Instance::Sequence(seq) => {
            if m.is_convex() && seq.len() > 1 {
                let chain = reduce_chain(seq, &m)?;
                let first = &chain.stages[0];
                let last = chain.stages.last().expect("chain has the input stage");
                rows.push(ReportRow {
                    instance_id: args.id.clone(),
                    theorem: "merge-chain".into(),
                    lhs: last.lhs,
                    bound: first.bound,
                    extremal_s: first.extremal_s as f64,
                    slack: first.bound - last.lhs,
                    holds: chain.laws_hold(),
                    divergent: false,
                });
            }
        }
        Instance::Triple(t) => {
            let tol = settings.continuous_tol();
            if t.f.monotonicity().is_monotone() && t.g.monotonicity().is_monotone() {
                let c = classical_chebyshev(&t.p, &t.f, &t.g, settings.panels, tol)?;
                rows.push(ReportRow {
                    instance_id: args.id.clone(),
                    theorem: "classical".into(),
                    lhs: c.lhs,
                    bound: c.rhs,
                    extremal_s: f64::NAN,
                    slack: c.slack,
                    holds: c.holds,
                    divergent: false,
                });
            }
            match derived_estimates(t, &m, &settings.bound_options()) {
                Ok(e) => rows.extend(output::estimate_rows(&args.id, &e, m.curvature())),
                Err(Error::Usage(_)) => {}
                Err(other) => return Err(other),
            }
        }
    }

    let all_hold = rows.iter().all(|r| r.holds);
    sink.emit(|format| match format {
        Format::Json => io::to_json_string(&rows),
        Format::Csv => output::csv_string(&rows),
        Format::Text => Ok(output::rows_text(&rows)),
    })?;
    Ok(all_hold)
}

fn cmd_condition(args: &ConditionArgs, settings: &Settings, sink: &Sink) -> Result<bool> {
    let direction: Direction = args.direction.parse()?;
    let t = load_triple(args.triple.as_deref(), args.config.as_deref())?;
    let tol = settings.continuous_tol();
    let cond = check_condition(&t.p, &t.g, args.r, direction, settings.grid, settings.panels, tol)?;
    let bound = if cond.passed && t.f.monotonicity() == Monotonicity::Nonincreasing {
        Some(corollary_bound(
            &t.p,
            &t.g,
            &t.f,
            args.r,
            direction,
            &cond,
            settings.panels,
        )?)
    } else {
        None
    };
    let ok = cond.passed && bound.as_ref().is_none_or(|b| b.holds);
    sink.emit(|format| match format {
        Format::Json => io::to_json_string(&output::ConditionOutput::new(&cond, bound.as_ref())),
        Format::Csv => output::csv_string(&cond.rows()),
        Format::Text => Ok(output::condition_text(&cond, bound.as_ref())),
    })?;
    Ok(ok)
}

fn cmd_fuzz(args: &FuzzArgs, common: &Common, sink: &Sink) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => CampaignConfig::from_path(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if !args.targets.is_empty() {
        let targets = args
            .targets
            .iter()
            .map(|s| s.parse::<Target>())
            .collect::<Result<Vec<_>>>()?;
        cfg = cfg.with_targets(&targets);
    }
    // explicit flags override the file; the environment does not
    if let Some(p) = common.panels {
        cfg.panels = p;
    }
    if let Some(g) = common.grid {
        cfg.s_grid = g;
    }
    if let Some(t) = common.tol {
        cfg.tol_rel = t;
        cfg.tol_rel_continuous = t;
    }

    let report = fuzz_campaign(&cfg)?;
    if let Some(path) = &args.rows {
        let file = std::fs::File::create(path)?;
        io::write_csv(&report.rows, file)?;
    }
    sink.emit(|format| match format {
        Format::Json => io::to_json_string(&report),
        Format::Csv => output::csv_string(&report.rows),
        Format::Text => Ok(output::fuzz_text(&report)),
    })?;
    Ok(report.total_violations() == 0)
}

fn cmd_reduce(args: &ReduceArgs, sink: &Sink) -> Result<bool> {
    let m = CurvedFunction::parse(&args.m)?;
    let seq = io::read_sequence_path(&args.csv)?;
    let chain = reduce_chain(&seq, &m)?;
    sink.emit(|format| match format {
        Format::Json => io::to_json_string(&chain),
        Format::Csv => output::csv_string(&output::chain_rows(&chain)),
        Format::Text => Ok(output::chain_text(&chain)),
    })?;
    Ok(chain.laws_hold())
}
