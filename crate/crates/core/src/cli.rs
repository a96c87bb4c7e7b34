//! The `gridohm` command-line front end.
//!
//! Every subcommand produces a [`SweepTable`]; `--format` picks CSV (the
//! default) or JSON. `verify` defaults to JSON and exits with status 1 when
//! any check fails.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 capacity or convergence error.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{self, build_torus, Graph, TorusSpec};
use crate::hydro::{self, QuadMethod};
use crate::resistance::{self, SolveConfig};
use crate::spectral;
use crate::table::{Cell, SweepTable};
use crate::walk::{self, WalkConfig};

/// Spectral sums above this many terms need `--force`.
pub const SPECTRAL_GUARD: usize = 10_000_000;

/// Exact (linear-solve) computations above this many vertices need `--force`.
pub const EXACT_GUARD: usize = 2_000;

/// Spectral max-resistance searches (cost `N^2`) above this many vertices
/// need `--force`.
pub const PAIR_SEARCH_GUARD: usize = 20_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gridohm", version, about = "Effective resistance and hitting times on toroidal grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format [default: csv; json for verify]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads; results do not depend on it
    #[arg(long, global = true, env = "GRIDOHM_THREADS")]
    pub threads: Option<usize>,

    /// Skip the size guardrails
    #[arg(long, global = true)]
    pub force: bool,

    /// Relative residual tolerance of the iterative solver
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Iteration cap of the iterative solver
    #[arg(long, global = true, default_value_t = 20_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HydroMethod {
    #[value(name = "laplace-1d")]
    Laplace1d,
    #[value(name = "midpoint-dd")]
    MidpointDd,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Commute,
    Tau0,
    Spectral,
    Hydro,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Torus side length M
    #[arg(long = "M", requires = "dim", conflicts_with = "edge_list")]
    pub side: Option<usize>,

    /// Torus dimension d
    #[arg(long = "d", requires = "side")]
    pub dim: Option<usize>,

    /// Edge-list file (`u v` per line, 0-based, `#` comments)
    #[arg(long, required_unless_present = "side")]
    pub edge_list: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Average effective resistance
    Rave {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
    },
    /// Maximum effective resistance, swept over dimensions
    Rmax {
        /// Torus side length M
        #[arg(long = "M", conflicts_with = "edge_list", requires = "dims")]
        side: Option<usize>,
        /// Dimensions, e.g. `3-8` or `1,2,5`
        #[arg(long = "d-list", value_parser = parse_index_list)]
        dims: Option<IndexList>,
        #[arg(long, required_unless_present = "side")]
        edge_list: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "spectral")]
        method: Method,
    },
    /// Hitting time between two vertices
    Hitting {
        #[command(flatten)]
        graph: GraphArgs,
        /// Start vertex: an index, or comma-separated torus coordinates
        #[arg(long)]
        from: String,
        /// Target vertex, same forms as --from
        #[arg(long)]
        to: String,
        /// First-step linear solve (default)
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        /// Monte Carlo estimate
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        /// Per-walk step cap [default: 100 N^2]
        #[arg(long)]
        step_cap: Option<u64>,
    },
    /// Average hitting time tau_0 and, on regular graphs, delta N R_ave
    Tau0 {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// The M -> infinity lattice integral
    Hydro {
        #[arg(long = "d-list", value_parser = parse_index_list, default_value = "3-12")]
        dims: IndexList,
        #[arg(long, value_enum, default_value = "laplace-1d")]
        method: HydroMethod,
        #[arg(long, default_value_t = hydro::DEFAULT_TARGET_ERROR)]
        target_error: f64,
    },
    /// R_ave(T_M) against M/12
    #[command(name = "sweep-1d")]
    #[serde(rename = "sweep-1d")]
    Sweep1d {
        #[arg(long = "M-list", value_parser = parse_index_list)]
        sides: IndexList,
    },
    /// R_ave(T_{M^2}) against log(M)/(2 pi)
    #[command(name = "sweep-2d")]
    #[serde(rename = "sweep-2d")]
    Sweep2d {
        #[arg(long = "M-list", value_parser = parse_index_list)]
        sides: IndexList,
    },
    /// R_ave(T_{M^d}) against 1/(4d), 8/(d+1) and the lattice integral
    #[command(name = "sweep-d")]
    SweepD {
        #[arg(long = "d-list", value_parser = parse_index_list)]
        dims: IndexList,
        #[arg(long = "M")]
        side: usize,
        #[arg(long, default_value_t = hydro::DEFAULT_TARGET_ERROR)]
        target_error: f64,
    },
    /// Run identity checks and report pass/fail
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Non-empty list of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IndexList(pub Vec<usize>);

/// Longest list a range like `3-8` may expand to.
pub const MAX_LIST_LEN: usize = 100_000;

/// Parses `3,4,5`, `3-8` (inclusive) or mixtures such as `1,3-5,9`.
pub fn parse_index_list(s: &str) -> std::result::Result<IndexList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty item in list {s:?}"));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad number {t:?}: {e}"))
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(format!("descending range {part:?}"));
                }
                if hi - lo >= MAX_LIST_LEN || out.len() + (hi - lo) >= MAX_LIST_LEN {
                    return Err(format!("list longer than {MAX_LIST_LEN} entries"));
                }
                out.extend(lo..=hi);
            }
            None => {
                if out.len() >= MAX_LIST_LEN {
                    return Err(format!("list longer than {MAX_LIST_LEN} entries"));
                }
                out.push(num(part)?);
            }
        }
    }
    Ok(IndexList(out))
}

/// A vertex given as a plain index or as comma-separated torus coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexRef {
    Index(usize),
    Coords(Vec<usize>),
}

pub fn parse_vertex(s: &str) -> Result<VertexRef> {
    let bad = |e: std::num::ParseIntError| Error::Config(format!("bad vertex {s:?}: {e}"));
    if s.contains(',') {
        s.split(',')
            .map(|c| c.trim().parse::<usize>().map_err(bad))
            .collect::<Result<Vec<_>>>()
            .map(VertexRef::Coords)
    } else {
        s.trim().parse::<usize>().map(VertexRef::Index).map_err(bad)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) | Error::Convergence { .. } | Error::EstimationFailed { .. } => EXIT_CAPACITY,
        Error::CrossValidation { .. } => EXIT_VERIFY_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the table to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.exit_code() {
                0 => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gridohm: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command. `Ok` carries 0 or [`EXIT_VERIFY_FAILED`].
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let (table, code) = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| build_table(cli))?,
        None => build_table(cli)?,
    };
    let default = if matches!(cli.command, Command::Verify { .. }) { Format::Json } else { Format::Csv };
    match cli.format.unwrap_or(default) {
        Format::Csv => table.write_csv(&mut *out)?,
        Format::Json => table.write_json(&mut *out)?,
    }
    Ok(code)
}

struct Ctx<'a> {
    cli: &'a Cli,
    solve: SolveConfig,
}

impl Ctx<'_> {
    fn guard(&self, n: usize, limit: usize, what: &str) -> Result<()> {
        if n > limit && !self.cli.force {
            return Err(Error::Capacity(format!(
                "{what} on {n} vertices exceeds the guardrail of {limit}; pass --force to run anyway"
            )));
        }
        Ok(())
    }
}

enum Input {
    Torus(TorusSpec),
    File(PathBuf, Graph),
}

impl Input {
    fn load(side: Option<usize>, dim: Option<usize>, edge_list: Option<&PathBuf>) -> Result<Self> {
        match (side, dim, edge_list) {
            (Some(m), Some(d), None) => Ok(Input::Torus(TorusSpec::new(m, d)?)),
            (None, None, Some(path)) => Ok(Input::File(path.clone(), graph::read_edge_list(path)?)),
            _ => Err(Error::Config("give either --M and --d, or --edge-list".into())),
        }
    }

    fn label(&self) -> String {
        match self {
            Input::Torus(s) => format!("T_{}^{}", s.side(), s.dim()),
            Input::File(p, _) => p.display().to_string(),
        }
    }

    fn num_vertices(&self) -> usize {
        match self {
            Input::Torus(s) => s.num_vertices(),
            Input::File(_, g) => g.num_vertices(),
        }
    }

    fn graph(&self, ctx: &Ctx) -> Result<Graph> {
        match self {
            Input::Torus(s) => {
                ctx.guard(s.num_vertices(), EXACT_GUARD, "exact computation")?;
                build_torus(s)
            }
            Input::File(_, g) => {
                ctx.guard(g.num_vertices(), EXACT_GUARD, "exact computation")?;
                Ok(g.clone())
            }
        }
    }

    fn torus(&self) -> Result<TorusSpec> {
        match self {
            Input::Torus(s) => Ok(*s),
            Input::File(..) => Err(Error::Config("spectral method needs a torus (--M and --d)".into())),
        }
    }

    fn vertex(&self, v: &VertexRef) -> Result<usize> {
        let idx = match (v, self) {
            (VertexRef::Index(i), _) => *i,
            (VertexRef::Coords(c), Input::Torus(s)) => s.encode(c)?,
            (VertexRef::Coords(_), Input::File(..)) => {
                return Err(Error::Config("coordinates need a torus input".into()))
            }
        };
        if idx >= self.num_vertices() {
            return Err(Error::Range(format!("vertex {idx} not in 0..{}", self.num_vertices())));
        }
        Ok(idx)
    }
}

fn build_table(cli: &Cli) -> Result<(SweepTable, i32)> {
    let ctx = Ctx { cli, solve: SolveConfig::new(cli.tol, cli.max_iter)? };
    let (mut table, code) = match &cli.command {
        Command::Rave { graph, method } => (cmd_rave(&ctx, graph, *method)?, EXIT_OK),
        Command::Rmax { side, dims, edge_list, method } => {
            (cmd_rmax(&ctx, *side, dims.as_ref(), edge_list.as_ref(), *method)?, EXIT_OK)
        }
        Command::Hitting { graph, from, to, mc, seed, replicates, step_cap, .. } => (
            cmd_hitting(&ctx, graph, from, to, *mc, *seed, *replicates, *step_cap)?,
            EXIT_OK,
        ),
        Command::Tau0 { graph } => (cmd_tau0(&ctx, graph)?, EXIT_OK),
        Command::Hydro { dims, method, target_error } => (cmd_hydro(dims, *method, *target_error)?, EXIT_OK),
        Command::Sweep1d { sides } => (cmd_sweep_1d(&ctx, sides)?, EXIT_OK),
        Command::Sweep2d { sides } => (cmd_sweep_2d(&ctx, sides)?, EXIT_OK),
        Command::SweepD { dims, side, target_error } => (cmd_sweep_d(&ctx, dims, *side, *target_error)?, EXIT_OK),
        Command::Verify { suite, seed } => cmd_verify(&ctx, *suite, *seed)?,
    };
    let args = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let command = args
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default();
    table
        .meta("command", command)
        .meta("args", args)
        .meta("version", env!("CARGO_PKG_VERSION"))
        .meta("force", cli.force)
        .meta("solver_tolerance", cli.tol)
        .meta("solver_max_iterations", cli.max_iter)
        .meta("threads", cli.threads.map_or(Value::Null, Value::from));
    Ok((table, code))
}

fn summation_tag(spec: &TorusSpec) -> &'static str {
    if spectral::uses_compensation(spec) { "neumaier" } else { "plain" }
}

fn cmd_rave(ctx: &Ctx, args: &GraphArgs, method: Method) -> Result<SweepTable> {
    let input = Input::load(args.side, args.dim, args.edge_list.as_ref())?;
    let mut t = SweepTable::comparison(&["graph", "vertices", "method"], &[]);
    let value = match method {
        Method::Exact => resistance::average_resistance(&input.graph(ctx)?, &ctx.solve)?,
        Method::Spectral => {
            let spec = input.torus()?;
            ctx.guard(spec.num_vertices(), SPECTRAL_GUARD, "spectral sum")?;
            t.meta("summation", summation_tag(&spec));
            spectral::average_resistance_spectral(&spec)?
        }
    };
    t.push_comparison(
        vec![input.label().into(), input.num_vertices().into(), format!("{method:?}").to_lowercase().into()],
        value,
        None,
        vec![],
    );
    Ok(t)
}

fn cmd_rmax(
    ctx: &Ctx,
    side: Option<usize>,
    dims: Option<&IndexList>,
    edge_list: Option<&PathBuf>,
    method: Method,
) -> Result<SweepTable> {
    let mut t = SweepTable::comparison(&["graph", "d", "M", "method"], &["argmax"]);
    t.meta("reference", "1/d (ratio column is d * R_max)");
    let inputs: Vec<(Input, Option<usize>)> = match (side, dims, edge_list) {
        (Some(m), Some(ds), None) => ds
            .0
            .iter()
            .map(|&d| Ok((Input::Torus(TorusSpec::new(m, d)?), Some(d))))
            .collect::<Result<_>>()?,
        (None, _, Some(path)) => vec![(Input::load(None, None, Some(path))?, None)],
        _ => return Err(Error::Config("give --M with --d-list, or --edge-list".into())),
    };
    for (input, d) in inputs {
        let (value, argmax) = match method {
            Method::Exact => {
                let (r, (u, v)) = resistance::max_resistance(&input.graph(ctx)?, &ctx.solve)?;
                (r, format!("({u},{v})"))
            }
            Method::Spectral => {
                let spec = input.torus()?;
                ctx.guard(spec.num_vertices(), PAIR_SEARCH_GUARD, "spectral max search")?;
                let (r, delta) = spectral::max_resistance_spectral(&spec)?;
                (r, format!("{delta:?}"))
            }
        };
        t.push_comparison(
            vec![
                input.label().into(),
                d.map_or(Cell::Empty, Cell::from),
                side.map_or(Cell::Empty, Cell::from),
                format!("{method:?}").to_lowercase().into(),
            ],
            value,
            d.map(|d| 1.0 / d as f64),
            vec![argmax.into()],
        );
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn cmd_hitting(
    ctx: &Ctx,
    args: &GraphArgs,
    from: &str,
    to: &str,
    mc: bool,
    seed: u64,
    replicates: usize,
    step_cap: Option<u64>,
) -> Result<SweepTable> {
    let input = Input::load(args.side, args.dim, args.edge_list.as_ref())?;
    let v = input.vertex(&parse_vertex(from)?)?;
    let w = input.vertex(&parse_vertex(to)?)?;
    let mut t = SweepTable::comparison(
        &["graph", "from", "to", "method"],
        &["standard_error", "replicates_used", "capped"],
    );
    if mc {
        let g = match &input {
            Input::Torus(s) => build_torus(s)?,
            Input::File(_, g) => g.clone(),
        };
        let cfg = match step_cap {
            Some(cap) => WalkConfig::new(seed, replicates, cap)?,
            None => WalkConfig::with_default_cap(&g, seed, replicates)?,
        };
        let est = walk::hitting_time_mc(&g, v, w, &cfg)?;
        if est.capped > 0 {
            eprintln!("gridohm: warning: {} of {} walks hit the step cap", est.capped, replicates);
        }
        t.meta("rng", walk::RNG_NAME).meta("step_cap", cfg.step_cap).meta("seed", seed);
        t.push_comparison(
            vec![input.label().into(), v.into(), w.into(), "mc".into()],
            est.mean,
            None,
            vec![est.standard_error.into(), est.replicates_used.into(), est.capped.into()],
        );
    } else {
        let h = walk::hitting_time_exact(&input.graph(ctx)?, w)?;
        t.push_comparison(
            vec![input.label().into(), v.into(), w.into(), "exact".into()],
            h[v],
            None,
            vec![Cell::Empty, Cell::Empty, Cell::Empty],
        );
    }
    Ok(t)
}

fn cmd_tau0(ctx: &Ctx, args: &GraphArgs) -> Result<SweepTable> {
    let input = Input::load(args.side, args.dim, args.edge_list.as_ref())?;
    let g = input.graph(ctx)?;
    let tau = walk::tau0(&g)?;
    let mut t = SweepTable::comparison(&["graph", "vertices", "degree"], &[]);
    t.meta("reference", "delta * N * R_ave (regular graphs only)");
    let reference = match g.regular_degree() {
        Some(delta) => Some(
            delta as f64 * g.num_vertices() as f64 * resistance::average_resistance(&g, &ctx.solve)?,
        ),
        None => None,
    };
    t.push_comparison(
        vec![
            input.label().into(),
            g.num_vertices().into(),
            g.regular_degree().map_or(Cell::Empty, Cell::from),
        ],
        tau,
        reference,
        vec![],
    );
    Ok(t)
}

fn cmd_hydro(dims: &IndexList, method: HydroMethod, target_error: f64) -> Result<SweepTable> {
    let mut t = SweepTable::comparison(
        &["d", "method"],
        &["error_estimate", "nodes_used", "lower_bound", "upper_bound"],
    );
    t.meta("reference", "1/d (ratio column is d * R_hydro)").meta("target_error", target_error);
    let methods: &[QuadMethod] = match method {
        HydroMethod::Laplace1d => &[QuadMethod::Laplace1d],
        HydroMethod::MidpointDd => &[QuadMethod::MidpointDd],
        HydroMethod::Both => &[QuadMethod::Laplace1d, QuadMethod::MidpointDd],
    };
    for &d in &dims.0 {
        if method == HydroMethod::Both {
            hydro::cross_validate(d, target_error)?;
        }
        for &m in methods {
            let r = hydro::hydro_integral(d, m, target_error)?;
            let df = d as f64;
            t.push_comparison(
                vec![d.into(), m.tag().into()],
                r.value,
                Some(1.0 / df),
                vec![
                    r.error_estimate.into(),
                    r.nodes_used.into(),
                    (1.0 / (4.0 * df)).into(),
                    (4.0 / df).into(),
                ],
            );
        }
    }
    Ok(t)
}

fn spectral_average(ctx: &Ctx, m: usize, d: usize) -> Result<(f64, TorusSpec)> {
    let spec = TorusSpec::new(m, d)?;
    ctx.guard(spec.num_vertices(), SPECTRAL_GUARD, "spectral sum")?;
    Ok((spectral::average_resistance_spectral(&spec)?, spec))
}

fn cmd_sweep_1d(ctx: &Ctx, sides: &IndexList) -> Result<SweepTable> {
    let mut t = SweepTable::comparison(&["M"], &["cycle_closed_form"]);
    t.meta("reference", "M/12");
    for &m in &sides.0 {
        let (value, _) = spectral_average(ctx, m, 1)?;
        let mf = m as f64;
        t.push_comparison(vec![m.into()], value, Some(mf / 12.0), vec![((mf * mf - 1.0) / (12.0 * mf)).into()]);
    }
    Ok(t)
}

fn cmd_sweep_2d(ctx: &Ctx, sides: &IndexList) -> Result<SweepTable> {
    let mut t = SweepTable::comparison(&["M"], &["summation"]);
    t.meta("reference", "log(M)/(2 pi)");
    for &m in &sides.0 {
        let (value, spec) = spectral_average(ctx, m, 2)?;
        t.push_comparison(
            vec![m.into()],
            value,
            Some((m as f64).ln() / (2.0 * PI)),
            vec![summation_tag(&spec).into()],
        );
    }
    Ok(t)
}

fn cmd_sweep_d(ctx: &Ctx, dims: &IndexList, side: usize, target_error: f64) -> Result<SweepTable> {
    let mut t = SweepTable::comparison(
        &["d", "M"],
        &["lower_bound", "upper_limit_bound", "d_times_computed", "above_lower_bound"],
    );
    t.meta("reference", "lattice integral R_hydro(d), empty for d < 3")
        .meta("lower_bound", "1/(4d)")
        .meta("upper_limit_bound", "8/(d+1)")
        .meta("quadrature", QuadMethod::Laplace1d.tag())
        .meta("target_error", target_error);
    for &d in &dims.0 {
        let (value, _) = spectral_average(ctx, side, d)?;
        let df = d as f64;
        let reference = if d >= 3 {
            Some(hydro::hydro_integral(d, QuadMethod::Laplace1d, target_error)?.value)
        } else {
            None
        };
        let lower = 1.0 / (4.0 * df);
        t.push_comparison(
            vec![d.into(), side.into()],
            value,
            reference,
            vec![lower.into(), (8.0 / (df + 1.0)).into(), (df * value).into(), (value >= lower).into()],
        );
    }
    Ok(t)
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

fn residual_check(suite: &'static str, name: String, value: f64, limit: f64) -> Check {
    Check { suite, name, value, limit, pass: value < limit }
}

fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn torus(m: usize, d: usize) -> Result<Graph> {
    build_torus(&TorusSpec::new(m, d)?)
}

pub fn verify_commute(seed: u64, solve: &SolveConfig) -> Result<Vec<Check>> {
    let mut graphs = vec![
        ("T_3^2".to_string(), torus(3, 2)?),
        ("T_3^3".to_string(), torus(3, 3)?),
        ("path_10".to_string(), Graph::path(10)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..5 {
        let n = rng.random_range(5..=40);
        let graph_seed = rng.random();
        graphs.push((format!("random_{i}_n{n}"), Graph::random_connected(n, 0.1, graph_seed)));
    }
    graphs
        .into_iter()
        .map(|(name, g)| {
            let rep = walk::commute_identity_check(&g, &walk::all_pairs(g.num_vertices()), solve)?;
            Ok(residual_check("commute", name, rep.max_residual, 1e-8))
        })
        .collect()
}

pub fn verify_tau0(solve: &SolveConfig) -> Result<Vec<Check>> {
    let graphs = [
        ("triangle", torus(3, 1)?),
        ("T_4", torus(4, 1)?),
        ("T_3^2", torus(3, 2)?),
        ("T_4^2", torus(4, 2)?),
        ("T_3^3", torus(3, 3)?),
        ("K_5", Graph::complete(5)),
    ];
    graphs
        .into_iter()
        .map(|(name, g)| {
            let delta = g.regular_degree().expect("regular test graph");
            let tau = walk::tau0(&g)?;
            let rhs = delta as f64 * g.num_vertices() as f64 * resistance::average_resistance(&g, solve)?;
            Ok(residual_check("tau0", name.to_string(), relative_diff(tau, rhs), 1e-8))
        })
        .collect()
}

pub fn verify_spectral(seed: u64, solve: &SolveConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for m in 3..=5 {
        for d in 1..=3 {
            let spec = TorusSpec::new(m, d)?;
            let g = build_torus(&spec)?;
            let label = format!("T_{m}^{d}");
            let exact = resistance::resistance_matrix(&g, solve)?;
            let avg = spectral::average_resistance_spectral(&spec)?;
            checks.push(residual_check("spectral", format!("{label} average"), (avg - exact.average()).abs(), 1e-8));
            let (u, v) = (rng.random_range(0..g.num_vertices()), rng.random_range(0..g.num_vertices()));
            let (cu, cv) = (spec.decode(u)?, spec.decode(v)?);
            let delta: Vec<usize> = cu.iter().zip(&cv).map(|(a, b)| (b + m - a) % m).collect();
            let pair = spectral::pair_resistance_spectral(&spec, &delta)?;
            checks.push(residual_check(
                "spectral",
                format!("{label} pair ({u},{v})"),
                (pair - exact.get(u, v)).abs(),
                1e-8,
            ));
            let (max_s, _) = spectral::max_resistance_spectral(&spec)?;
            let (max_e, _) = exact.max();
            checks.push(residual_check("spectral", format!("{label} max"), (max_s - max_e).abs(), 1e-8));
        }
    }
    Ok(checks)
}

pub fn verify_hydro() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 3..=5 {
        let a = hydro::hydro_integral(d, QuadMethod::Laplace1d, hydro::DEFAULT_TARGET_ERROR)?;
        let b = hydro::hydro_integral(d, QuadMethod::MidpointDd, hydro::DEFAULT_TARGET_ERROR)?;
        let allowed = a.error_estimate + b.error_estimate;
        let diff = (a.value - b.value).abs();
        checks.push(Check {
            suite: "hydro",
            name: format!("d={d} method agreement"),
            value: diff,
            limit: allowed,
            pass: diff <= allowed,
        });
    }
    for d in 3..=12 {
        let r = hydro::hydro_integral(d, QuadMethod::Laplace1d, hydro::DEFAULT_TARGET_ERROR)?;
        let df = d as f64;
        checks.push(Check {
            suite: "hydro",
            name: format!("d={d} within [1/(4d), 4/d]"),
            value: r.value,
            limit: 4.0 / df,
            pass: r.value >= 1.0 / (4.0 * df) && r.value <= 4.0 / df,
        });
    }
    Ok(checks)
}

fn cmd_verify(ctx: &Ctx, suite: Suite, seed: u64) -> Result<(SweepTable, i32)> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Commute {
        checks.extend(verify_commute(seed, &ctx.solve)?);
    }
    if all || suite == Suite::Tau0 {
        checks.extend(verify_tau0(&ctx.solve)?);
    }
    if all || suite == Suite::Spectral {
        checks.extend(verify_spectral(seed, &ctx.solve)?);
    }
    if all || suite == Suite::Hydro {
        checks.extend(verify_hydro()?);
    }
    let mut t = SweepTable::new(&["suite", "check", "value", "limit", "pass"]);
    for c in &checks {
        t.push(vec![c.suite.into(), c.name.clone().into(), c.value.into(), c.limit.into(), c.pass.into()]);
    }
    let passed = checks.iter().all(|c| c.pass);
    t.meta("seed", seed).meta("passed", passed).meta("checks", json!(checks.len()));
    Ok((t, if passed { EXIT_OK } else { EXIT_VERIFY_FAILED }))
}
