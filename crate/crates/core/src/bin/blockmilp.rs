use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use blockmilp::admm::{DualScheme, ResidualMode};
use blockmilp::alm::AlmVariant;
use blockmilp::instances::{GenSpec, RandomSpec, TChoice};
use blockmilp::model::TwoBlockMilp;
use blockmilp::reference;
use blockmilp::report::{run, Algorithm, RunConfig, RunReport, RunStatus};
use blockmilp::subsolver::{BranchAndBound, ExternalSolver, MilpSolver};
use blockmilp::tables::{case_oracle, cases, run_case, Scale, TableId, TableRow};

const EXIT_LIMIT: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Errors that map to the usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "blockmilp", version, about = "ALM and ADMM decomposition for two-block MILPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as problem JSON.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a problem file or a generated instance.
    #[command(alias = "run")]
    Solve(SolveArgs),
    /// Exact brute-force values for small instances.
    Oracle(OracleArgs),
    /// Run a table grid with both methods and flag failures.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Investment,
    Sslp,
    Random,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Scenarios per axis of the investment family.
    #[arg(long = "S", default_value_t = 3)]
    s: usize,
    #[arg(long = "T", default_value = "I")]
    t: String,
    /// Upper end of Z's box for the investment family.
    #[arg(long, default_value_t = 5)]
    upper: u32,
    #[arg(long, default_value_t = 3)]
    servers: usize,
    #[arg(long, default_value_t = 5)]
    clients: usize,
    #[arg(long, default_value_t = 3)]
    scenarios: usize,
    #[arg(long, default_value_t = 1.0)]
    revenue_scale: f64,
    #[arg(long, default_value_t = 5)]
    blocks: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 6)]
    int_count: usize,
    #[arg(long, default_value_t = 4)]
    eq_rows: usize,
    #[arg(long, default_value_t = 2)]
    copies: usize,
    #[arg(long, default_value_t = 4)]
    slack: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl GenArgs {
    fn spec(&self) -> Result<Option<GenSpec>> {
        let Some(family) = self.family else {
            return Ok(None);
        };
        Ok(Some(match family {
            Family::Investment => {
                let t = match self.t.as_str() {
                    "I" | "i" => TChoice::Identity,
                    "T" | "t" => TChoice::Mixed,
                    other => return Err(usage(format!("--T must be I or T, got {other:?}"))),
                };
                GenSpec::Investment {
                    scenarios: self.s,
                    t,
                    upper: self.upper,
                }
            }
            Family::Sslp => GenSpec::Sslp {
                servers: self.servers,
                clients: self.clients,
                scenarios: self.scenarios,
                seed: self.seed,
                revenue_scale: self.revenue_scale,
            },
            Family::Random => GenSpec::Random(RandomSpec {
                blocks: self.blocks,
                dim: self.dim,
                int_count: self.int_count,
                eq_rows: self.eq_rows,
                copies: self.copies,
                slack: self.slack,
                seed: self.seed,
            }),
        }))
    }
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

impl ProblemArgs {
    fn load(&self) -> Result<(TwoBlockMilp, String)> {
        match (&self.problem, self.gen.spec()?) {
            (Some(_), Some(_)) => Err(usage("give either --problem or --family, not both")),
            (Some(path), None) => {
                if !path.exists() {
                    return Err(usage(format!("problem file {} does not exist", path.display())));
                }
                let p = TwoBlockMilp::load(path).with_context(|| format!("reading {}", path.display()))?;
                Ok((p, path.display().to_string()))
            }
            (None, Some(spec)) => Ok((spec.generate()?, spec.label())),
            (None, None) => Err(usage("no problem given; use --problem FILE or --family")),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// JSON config, same shape as a report's `parameters` block.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 6-tuple `ρ₀,γ,innerALM,innerADMM,almStep,admmStep`.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, value_parser = ["alm", "admm"])]
    alg: Option<String>,
    #[arg(long, value_parser = ["penalty", "gap", "finite", "practical"])]
    variant: Option<String>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    inner_alm: Option<usize>,
    #[arg(long)]
    alm_step: Option<f64>,
    #[arg(long)]
    eps_p: Option<f64>,
    #[arg(long)]
    eps_d: Option<f64>,
    #[arg(long)]
    outer_limit: Option<usize>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    inner_admm: Option<usize>,
    #[arg(long)]
    admm_step: Option<f64>,
    #[arg(long)]
    beta_cap: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_hi: Option<f64>,
    #[arg(long, value_parser = ["practical", "projected"])]
    scheme: Option<String>,
    #[arg(long, value_parser = ["x-step", "z-step"])]
    residual: Option<String>,
    #[arg(long)]
    iter_limit: Option<usize>,
    #[arg(long)]
    cut_window: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Append the CSV summary row here (header written for new files).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// External MILP solver command; defaults to $BLOCKMILP_SOLVER_CMD.
    #[arg(long)]
    solver_cmd: Option<String>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| usage(e.to_string()))
}

impl SolveArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(t) = &self.params {
            cfg.apply_tuple(t).map_err(|e| usage(e.to_string()))?;
        }
        if let Some(a) = &self.alg {
            cfg.algorithm = parse_enum::<Algorithm>(a)?;
        }
        if let Some(v) = &self.variant {
            cfg.variant = parse_enum::<AlmVariant>(v)?;
        }
        if let Some(s) = &self.scheme {
            cfg.scheme = parse_enum::<DualScheme>(s)?;
        }
        if let Some(r) = &self.residual {
            cfg.residual = parse_enum::<ResidualMode>(r)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        take!(rho0, gamma, inner_alm, alm_step, eps_p, eps_d, outer_limit, beta0, inner_admm, admm_step, iter_limit);
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if self.beta_cap.is_some() {
            cfg.beta_cap = self.beta_cap;
        }
        if self.mu_lo.is_some() {
            cfg.mu_lo = self.mu_lo;
        }
        if self.mu_hi.is_some() {
            cfg.mu_hi = self.mu_hi;
        }
        if self.cut_window.is_some() {
            cfg.cut_window = self.cut_window;
        }
        Ok(cfg)
    }
}

fn solver(cmd: Option<&str>) -> Box<dyn MilpSolver> {
    match cmd {
        Some(c) => Box::new(ExternalSolver::new(c)),
        None => match ExternalSolver::from_env() {
            Some(s) => Box::new(s),
            None => Box::new(BranchAndBound),
        },
    }
}

fn append_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

fn solve_cmd(args: &SolveArgs) -> Result<u8> {
    let cfg = args.config()?;
    let (problem, label) = args.problem.load()?;
    let solver = solver(args.solver_cmd.as_deref());
    let report = run(&problem, &label, &cfg, solver.as_ref())?;
    let json = report.to_json()?;
    if let Some(path) = &args.report {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        append_csv(path, &RunReport::csv_header(), &[report.csv_row()])?;
    }
    match args.format {
        Format::Json => println!("{json}"),
        Format::Csv => {
            println!("{}", RunReport::csv_header());
            println!("{}", report.csv_row());
        }
    }
    Ok(match report.status {
        RunStatus::Converged => 0,
        RunStatus::IterationLimit => EXIT_LIMIT,
    })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleOp {
    /// Monolithic branch-and-bound on the whole problem.
    Extensive,
    /// Z enumeration with exact per-block solves.
    Lattice,
    /// Enumeration of Z and of every block.
    Enumerate,
    /// `d(λ, ρ)` by enumeration.
    Dual,
    /// `p(u)` for the perturbed coupling `Ax + Bz + u = 0`.
    Perturb,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "extensive")]
    op: OracleOp,
    /// Comma-separated multipliers (default zero).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Comma-separated perturbation (default zero).
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
}

fn parse_vec(text: Option<&str>, len: usize, what: &str) -> Result<Vec<f64>> {
    let Some(text) = text else {
        return Ok(vec![0.0; len]);
    };
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| usage(format!("--{what}: {e}")))?;
    if v.len() != len {
        return Err(usage(format!("--{what} needs {len} values, got {}", v.len())));
    }
    Ok(v)
}

fn oracle_cmd(args: &OracleArgs) -> Result<u8> {
    let (problem, label) = args.problem.load()?;
    let m = problem.m();
    let (value, sol) = match args.op {
        OracleOp::Extensive => wrap(reference::extensive_solve(&problem)?),
        OracleOp::Lattice => wrap(reference::lattice_solve(&problem)?),
        OracleOp::Enumerate => wrap(reference::enumerate_extensive(&problem)?),
        OracleOp::Dual => {
            let lambda = parse_vec(args.lambda.as_deref(), m, "lambda")?;
            let s = reference::enum_dual(&problem, &lambda, args.rho)?;
            (Some(s.value), Some(s))
        }
        OracleOp::Perturb => {
            let u = parse_vec(args.u.as_deref(), m, "u")?;
            let v = reference::enum_perturbation(&problem, &u)?;
            (v.is_finite().then_some(v), None)
        }
    };
    let out = serde_json::json!({
        "instance": label,
        "op": format!("{:?}", args.op).to_lowercase(),
        "value": value,
        "feasible": value.is_some(),
        "x": sol.as_ref().map(|s| &s.x),
        "z": sol.as_ref().map(|s| &s.z),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn wrap(s: Option<reference::OracleSolution>) -> (Option<f64>, Option<reference::OracleSolution>) {
    (s.as_ref().map(|s| s.value), s)
}

#[derive(Args)]
struct ReproduceArgs {
    /// investment-I, investment-T, investment-u10, sslp-small or random.
    table: String,
    /// desk (small grids) or full (hours with the bundled solver).
    #[arg(long, default_value = "desk")]
    scale: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Skip the exact oracle column.
    #[arg(long)]
    no_oracle: bool,
    /// Write each run's JSON report into this directory.
    #[arg(long)]
    reports: Option<PathBuf>,
    /// Append rows to this CSV file as well as stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    solver_cmd: Option<String>,
}

fn reproduce_cmd(args: &ReproduceArgs) -> Result<u8> {
    let table: TableId = args.table.parse().map_err(|e: blockmilp::Error| usage(e.to_string()))?;
    let scale: Scale = args.scale.parse().map_err(|e: blockmilp::Error| usage(e.to_string()))?;
    let solver = solver(args.solver_cmd.as_deref());
    if let Some(dir) = &args.reports {
        std::fs::create_dir_all(dir)?;
    }
    println!("{}", TableRow::CSV_HEADER);
    let mut flagged = 0;
    for case in cases(table, scale) {
        let oracle = if args.no_oracle { None } else { case_oracle(&case)? };
        let rows = run_case(&case, solver.as_ref(), args.workers, oracle)?;
        let mut lines = Vec::new();
        for (row, report) in &rows {
            let line = row.csv_row();
            println!("{line}");
            lines.push(line);
            if !row.passed() {
                flagged += 1;
            }
            if let Some(dir) = &args.reports {
                let name = format!("{}-{}.json", report.instance, row.method);
                std::fs::write(dir.join(name), report.to_json()?)?;
            }
        }
        if let Some(path) = &args.csv {
            append_csv(path, TableRow::CSV_HEADER, &lines)?;
        }
    }
    if flagged > 0 {
        eprintln!("{flagged} run(s) flagged against their acceptance bound");
    }
    Ok(0)
}

fn gen_cmd(gen: &GenArgs, output: Option<&Path>) -> Result<u8> {
    let Some(spec) = gen.spec()? else {
        return Err(usage("gen needs --family"));
    };
    let problem = spec.generate()?;
    match output {
        Some(path) => problem.save(path).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", problem.to_json()),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Gen { gen, output } => gen_cmd(gen, output.as_deref()),
        Command::Solve(args) => solve_cmd(args),
        Command::Oracle(args) => oracle_cmd(args),
        Command::Reproduce(args) => reproduce_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
