//! Command-line front end: build Cantor-type sets, tabulate staircases, run
//! fractal integrals, estimate local fractional derivatives, and solve
//! separable problems, emitting CSV/JSON artifacts plus a run manifest with
//! output checksums. Runs are deterministic: identical manifests imply
//! byte-identical outputs.

use clap::{Parser, Subcommand, ValueEnum};
use lfrac::{
    estimate_critical_order, integrate_recursive, integrate_riemann, integrate_sum, lfd_at, solve,
    Error as LfracError, FractalTerm, GbarExpr, Interval, LfdEstimate, ProblemDoc, SampledFunction,
    ScaleLadder, SelfSimilarSet, Side, SolutionEvaluator, StaircaseEvaluator,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lfrac",
    version,
    about = "Fractal calculus on Cantor-type sets: staircases, integrals, local fractional derivatives, separable equations"
)]
struct Cli {
    /// Directory artifacts are written to
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a middle-1/p Cantor set: set JSON + depth-n cover CSV
    Set(SetArgs),
    /// Tabulate the staircase solution P_C on a uniform grid
    Staircase(StaircaseArgs),
    /// Fractal integral of a named expression with lower/upper bounds
    Integrate(IntegrateArgs),
    /// Solve a separable problem given as a JSON file
    Solve(SolveArgs),
    /// Estimate the critical order and LFD coefficient at a point
    Lfd(LfdArgs),
}

#[derive(clap::Args, Serialize)]
struct SetArgs {
    /// Middle fraction parameter: remove the open middle 1/p each step
    #[arg(long)]
    p: f64,
    /// Ambient interval endpoints
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [0.0, 1.0])]
    ambient: Vec<f64>,
    /// Cover depth for the emitted intervals
    #[arg(long, default_value_t = 0)]
    depth: u32,
}

#[derive(clap::Args, Serialize)]
struct StaircaseArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [0.0, 1.0])]
    ambient: Vec<f64>,
    /// Number of uniform grid points (≥ 2)
    #[arg(long, default_value_t = 101)]
    grid: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Riemann,
    Recursive,
}

#[derive(clap::Args, Serialize)]
struct IntegrateArgs {
    /// Integrand ḡ: one | x | x2 | poly:[c0,c1,...]
    #[arg(long)]
    gbar: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [0.0, 1.0])]
    ambient: Vec<f64>,
    /// Lipschitz bound for a certified bracket (named expressions derive one)
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Riemann)]
    method: MethodArg,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    /// Integration range (default: the full ambient interval)
    #[arg(long, num_args = 2, value_names = ["X0", "X1"])]
    range: Option<Vec<f64>>,
    /// Superposition term "gbar=<expr>;p=<p>;a=<a>;b=<b>[;lipschitz=<L>]",
    /// repeatable; all terms must share one dimension
    #[arg(long)]
    term: Vec<String>,
}

#[derive(clap::Args, Serialize)]
struct SolveArgs {
    /// Problem JSON: {set, gbar, h: {kind, k?}, x0, y0, depth}
    #[arg(long)]
    problem: PathBuf,
    /// Number of uniform grid points over the ambient interval
    #[arg(long, default_value_t = 101)]
    grid: u32,
}

#[derive(clap::Args, Serialize)]
struct LfdArgs {
    /// CSV file with columns x,f (monotone x; linear interpolation)
    #[arg(long, conflicts_with = "builtin")]
    input: Option<PathBuf>,
    /// Built-in function: power:<beta> (|t-at|^beta) or staircase:<p>
    #[arg(long)]
    builtin: Option<String>,
    /// Abscissa of the estimate
    #[arg(long)]
    at: f64,
    /// Order of the derivative; omit to estimate the critical order only
    #[arg(long)]
    q: Option<f64>,
    /// Ladder h0 rho count (default: h0 = 1e-2·width, rho = 1/2, count = 20)
    #[arg(long, num_args = 3, value_names = ["H0", "RHO", "COUNT"])]
    ladder: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    side: SideArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SideArg {
    Left,
    Right,
    Both,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
            SideArg::Both => Side::Both,
        }
    }
}

// ---------------------------------------------------------------------------
// error plumbing: input errors exit 2, numeric failures exit 3

enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }

    fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<LfracError> for CliError {
    fn from(e: LfracError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// run manifest

#[derive(Serialize)]
struct RunManifest {
    command: String,
    params: serde_json::Value,
    version: String,
    /// sha256 checksum per emitted artifact
    outputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equilibrium: Option<f64>,
}

struct Emitter {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl Emitter {
    fn new(out_dir: &PathBuf, command: &str, params: impl Serialize) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir)?;
        let params = serde_json::to_value(params).map_err(|e| CliError::input(e.to_string()))?;
        Ok(Self {
            out_dir: out_dir.clone(),
            manifest: RunManifest {
                command: command.to_string(),
                params,
                version: lfrac::VERSION.to_string(),
                outputs: BTreeMap::new(),
                blowup: None,
                equilibrium: None,
            },
        })
    }

    fn write(&mut self, name: &str, content: &str) -> CliResult<()> {
        std::fs::write(self.out_dir.join(name), content)?;
        let digest = Sha256::digest(content.as_bytes());
        self.manifest.outputs.insert(name.to_string(), hex::encode(digest));
        Ok(())
    }

    fn finish(self) -> CliResult<()> {
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::input(e.to_string()))?;
        std::fs::write(self.out_dir.join("manifest.json"), format!("{text}\n"))?;
        println!("{text}");
        Ok(())
    }
}

// ---------------------------------------------------------------------------

fn parse_ambient(values: &[f64]) -> CliResult<Interval> {
    Interval::new(values[0], values[1]).map_err(CliError::from)
}

fn build_set(p: f64, ambient: &[f64]) -> CliResult<SelfSimilarSet> {
    Ok(SelfSimilarSet::middle_p(p, parse_ambient(ambient)?)?)
}

fn cmd_set(out: &PathBuf, args: SetArgs) -> CliResult<()> {
    let set = build_set(args.p, &args.ambient)?;
    let cover = set.refine(args.depth)?;
    let mut emitter = Emitter::new(out, "set", &args)?;
    emitter.write("set.json", &format!("{}\n", set.to_json_string()?))?;
    let mut csv = String::from("lo,hi,address\n");
    for iv in cover.intervals() {
        let _ = writeln!(csv, "{},{},\"{}\"", iv.lo, iv.hi, iv.address);
    }
    emitter.write("cover.csv", &csv)?;
    emitter.finish()
}

fn cmd_staircase(out: &PathBuf, args: StaircaseArgs) -> CliResult<()> {
    if args.grid < 2 {
        return Err(CliError::input(format!(
            "grid must have at least 2 points, got {}",
            args.grid
        )));
    }
    let set = build_set(args.p, &args.ambient)?;
    let staircase = StaircaseEvaluator::new(set.clone())?;
    let ambient = set.ambient();
    let mut emitter = Emitter::new(out, "staircase", &args)?;
    let mut csv = String::from("x,P\n");
    let n = args.grid;
    for i in 0..n {
        let x = if i == n - 1 {
            ambient.hi
        } else {
            ambient.lo + ambient.width() * i as f64 / (n - 1) as f64
        };
        let _ = writeln!(csv, "{},{}", x, staircase.value(x));
    }
    emitter.write("staircase.csv", &csv)?;
    emitter.finish()
}

fn parse_term_spec(spec: &str) -> CliResult<FractalTerm> {
    let mut gbar: Option<String> = None;
    let mut p: Option<f64> = None;
    let mut a = 0.0f64;
    let mut b = 1.0f64;
    let mut lipschitz: Option<f64> = None;
    for part in spec.split(';').filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("term field '{part}' is not key=value")))?;
        let bad_num = |e| CliError::input(format!("term field '{key}': {e}"));
        match key {
            "gbar" => gbar = Some(value.to_string()),
            "p" => p = Some(value.parse().map_err(bad_num)?),
            "a" => a = value.parse().map_err(bad_num)?,
            "b" => b = value.parse().map_err(bad_num)?,
            "lipschitz" => lipschitz = Some(value.parse().map_err(bad_num)?),
            other => return Err(CliError::input(format!("unknown term field '{other}'"))),
        }
    }
    let gbar = gbar.ok_or_else(|| CliError::input("term needs gbar=<expr>"))?;
    let p = p.ok_or_else(|| CliError::input("term needs p=<value>"))?;
    let set = SelfSimilarSet::middle_p(p, Interval::new(a, b)?)?;
    let mut term = FractalTerm::new(set, GbarExpr::parse(&gbar)?)?;
    if let Some(l) = lipschitz {
        term = term.with_lipschitz(l)?;
    }
    Ok(term)
}

fn cmd_integrate(out: &PathBuf, args: IntegrateArgs) -> CliResult<()> {
    let range = args.range.as_ref().map(|v| (v[0], v[1]));
    let result = if args.term.is_empty() {
        let gbar = args
            .gbar
            .as_deref()
            .ok_or_else(|| CliError::input("--gbar is required without --term"))?;
        let p = args
            .p
            .ok_or_else(|| CliError::input("--p is required without --term"))?;
        let set = build_set(p, &args.ambient)?;
        let ambient = set.ambient();
        let mut term = FractalTerm::new(set, GbarExpr::parse(gbar)?)?;
        if let Some(l) = args.lipschitz {
            term = term.with_lipschitz(l)?;
        }
        match args.method {
            MethodArg::Riemann => {
                let range = range.unwrap_or((ambient.lo, ambient.hi));
                integrate_riemann(&term, range, args.depth)?
            }
            MethodArg::Recursive => {
                if range.is_some() {
                    return Err(CliError::input(
                        "--method recursive integrates the full ambient interval; drop --range",
                    ));
                }
                integrate_recursive(&term, args.depth)?
            }
        }
    } else {
        if args.gbar.is_some() || args.p.is_some() {
            return Err(CliError::input(
                "--term conflicts with the single-term flags --gbar/--p",
            ));
        }
        if args.method == MethodArg::Recursive {
            return Err(CliError::input(
                "superposition terms integrate by the riemann method",
            ));
        }
        let terms = args
            .term
            .iter()
            .map(|s| parse_term_spec(s))
            .collect::<CliResult<Vec<_>>>()?;
        integrate_sum(&terms, range, args.depth)?
    };
    let mut emitter = Emitter::new(out, "integrate", &args)?;
    emitter.write("integral.json", &format!("{}\n", result.to_json_string()?))?;
    emitter.finish()
}

fn tabulate_solution(sol: &SolutionEvaluator, ambient: Interval, grid: u32) -> String {
    let mut csv = String::from("x,y,lower,upper\n");
    for i in 0..grid {
        let x = if i == grid - 1 {
            ambient.hi
        } else {
            ambient.lo + ambient.width() * i as f64 / (grid - 1) as f64
        };
        // rows outside the validity interval are omitted (truncated output)
        if let Ok(point) = sol.evaluate(x) {
            let _ = writeln!(csv, "{},{},{},{}", x, point.y, point.lower, point.upper);
        }
    }
    csv
}

fn cmd_solve(out: &PathBuf, args: SolveArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.problem)?;
    let doc = ProblemDoc::parse(&text)?;
    let (problem, depth) = doc.to_problem()?;
    if args.grid < 2 {
        return Err(CliError::input(format!(
            "grid must have at least 2 points, got {}",
            args.grid
        )));
    }
    let ambient = problem.term().set().ambient();
    let solution = solve(problem, depth)?;
    let mut emitter = Emitter::new(out, "solve", &args)?;
    emitter.write("solution.csv", &tabulate_solution(&solution, ambient, args.grid))?;
    emitter.manifest.blowup = solution.blowup();
    emitter.manifest.equilibrium = solution.equilibrium();
    emitter.finish()
}

#[derive(Serialize)]
struct LfdOutput {
    at: f64,
    side: SideArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    locally_constant: bool,
    critical_order: Option<f64>,
    fit_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right_coefficient: Option<f64>,
    oscillation_band: f64,
    interpolated: bool,
}

enum LfdSource {
    Sampled(SampledFunction),
    Power { beta: f64, center: f64 },
    Staircase(Box<StaircaseEvaluator>),
}

impl LfdSource {
    fn eval(&self, t: f64) -> f64 {
        match self {
            LfdSource::Sampled(sf) => sf.eval(t),
            LfdSource::Power { beta, center } => (t - center).abs().powf(*beta),
            LfdSource::Staircase(st) => st.value(t),
        }
    }

    fn width(&self) -> f64 {
        match self {
            LfdSource::Sampled(sf) => {
                let (lo, hi) = sf.domain();
                hi - lo
            }
            LfdSource::Power { .. } => 1.0,
            LfdSource::Staircase(st) => st.set().ambient().width(),
        }
    }

    fn interpolated(&self) -> bool {
        matches!(self, LfdSource::Sampled(_))
    }
}

fn parse_builtin(spec: &str, at: f64) -> CliResult<LfdSource> {
    if let Some(beta) = spec.strip_prefix("power:") {
        let beta: f64 = beta
            .parse()
            .map_err(|e| CliError::input(format!("power exponent: {e}")))?;
        return Ok(LfdSource::Power { beta, center: at });
    }
    if let Some(p) = spec.strip_prefix("staircase:") {
        let p: f64 = p
            .parse()
            .map_err(|e| CliError::input(format!("staircase parameter: {e}")))?;
        let set = SelfSimilarSet::middle_p(p, Interval::new(0.0, 1.0)?)?;
        return Ok(LfdSource::Staircase(Box::new(StaircaseEvaluator::new(set)?)));
    }
    Err(CliError::input(format!(
        "unknown builtin '{spec}' (expected power:<beta> or staircase:<p>)"
    )))
}

fn cmd_lfd(out: &PathBuf, args: LfdArgs) -> CliResult<()> {
    let source = match (&args.input, &args.builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            LfdSource::Sampled(SampledFunction::from_csv(&text)?)
        }
        (None, Some(spec)) => parse_builtin(spec, args.at)?,
        _ => return Err(CliError::input("exactly one of --input or --builtin is required")),
    };
    let ladder = match &args.ladder {
        Some(v) => ScaleLadder::new(v[0], v[1], v[2] as u32)?,
        None => ScaleLadder::default_for_width(source.width()),
    };
    let side: Side = args.side.into();

    let order = estimate_critical_order(|t| source.eval(t), args.at, &ladder, side)?;
    let coefficient: Option<LfdEstimate> = match args.q {
        Some(q) => Some(lfd_at(|t| source.eval(t), args.at, q, &ladder, side)?),
        None => None,
    };

    let output = LfdOutput {
        at: args.at,
        side: args.side,
        q: args.q,
        locally_constant: order.locally_constant
            || coefficient.as_ref().is_some_and(|c| c.locally_constant),
        critical_order: order.critical_order,
        fit_residual: order.fit_residual,
        coefficient: coefficient.as_ref().and_then(|c| c.coefficient),
        left_coefficient: coefficient.as_ref().and_then(|c| c.left_coefficient),
        right_coefficient: coefficient.as_ref().and_then(|c| c.right_coefficient),
        oscillation_band: coefficient.as_ref().map_or(0.0, |c| c.oscillation_band),
        interpolated: source.interpolated(),
    };
    let mut emitter = Emitter::new(out, "lfd", &args)?;
    let json =
        serde_json::to_string_pretty(&output).map_err(|e| CliError::input(e.to_string()))?;
    emitter.write("lfd.json", &format!("{json}\n"))?;
    emitter.finish()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Set(args) => cmd_set(&cli.out, args),
        Command::Staircase(args) => cmd_staircase(&cli.out, args),
        Command::Integrate(args) => cmd_integrate(&cli.out, args),
        Command::Solve(args) => cmd_solve(&cli.out, args),
        Command::Lfd(args) => cmd_lfd(&cli.out, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
