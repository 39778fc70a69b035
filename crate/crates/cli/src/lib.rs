//! `qwoa-dla` command-line runner.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 resource or I/O
//! error, 4 a `verify-claims` check failed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qwoa_core::depth::{self, DepthOptions, NelderMeadOptions, Target};
use qwoa_core::dla;
use qwoa_core::landscape::{self, InstanceFamily, Interval, MarkedRule, ParamRanges};
use qwoa_core::problems::{binomial, Graph, GraphFamily, ProblemInstance, DEFAULT_BUDGET};
use qwoa_core::sim::{self, LayerParams};
use qwoa_core::{CostSpectrum, Error};

pub mod config;
pub mod emit;

use config::Config;
use emit::{emit, Format, Table, Value};

#[derive(Debug, Parser)]
#[command(name = "qwoa-dla", version, about = "Lie-algebraic and simulation toolkit for the quantum walk optimization algorithm")]
pub struct Cli {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the cost spectrum of an instance
    Spectrum {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dynamical Lie algebra dimension and basis
    Dla {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Relative rank tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Also report the dimension modulo the identity direction
        #[arg(long)]
        traceless: bool,
        /// Cross-check with the dense-matrix closure (|S'| <= 64)
        #[arg(long)]
        dense: bool,
        /// Write the orthonormal basis as JSON to this path
        #[arg(long)]
        basis_out: Option<PathBuf>,
    },
    /// Evolve the compressed QWOA state
    Simulate {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Number of layers (with --grover-angles)
        #[arg(long)]
        depth: Option<usize>,
        /// Use gamma = pi, t = pi/N in every layer
        #[arg(long)]
        grover_angles: bool,
        /// Comma-separated phase angles
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Option<Vec<f64>>,
        /// Comma-separated walk times
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Option<Vec<f64>>,
        /// Emit one row per layer instead of the final state only
        #[arg(long)]
        trace: bool,
    },
    /// Monte-Carlo loss variance over random parameters
    Variance {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Phase-angle interval
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        gamma_range: Option<Vec<f64>>,
        /// Walk times are drawn from [-pi/N * scale, pi/N * scale] (default scale N)
        #[arg(long)]
        time_scale: Option<f64>,
        /// Sweep a family over these sizes (n vertices, or log2 N for search)
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Marked count for a search sweep
        #[arg(long)]
        marked: Option<u64>,
        /// Marked fraction for a search sweep
        #[arg(long)]
        marked_fraction: Option<f64>,
    },
    /// Minimal depth reaching a success threshold
    Depth {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        p_max: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Count any solution at least this good as success
        #[arg(long, allow_hyphen_values = true)]
        target_cost: Option<f64>,
        #[arg(long)]
        max_evals: Option<usize>,
    },
    /// Random-sampling baseline
    Baseline {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Samples drawn per trial (default N ln 20 / d_opt, rounded up)
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Check the optimal-solution counts for cycles, chains and complete graphs
    VerifyClaims {
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        max_n: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// maxcut, kdensest or search
    #[arg(long)]
    problem: Option<String>,
    /// cycle, chain or complete
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Graph file: "n m" header then one "u v" edge per line
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Unstructured search over N items with M marked
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    search: Option<Vec<u64>>,
    /// Spectrum JSON file
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Maximum number of feasible solutions to enumerate
    #[arg(long)]
    enum_budget: Option<u64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
    ClaimsFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Domain(_)) => 2,
            CliError::Core(Error::Resource(_)) | CliError::Io(_) => 3,
            CliError::ClaimsFailed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::ClaimsFailed(k) => write!(f, "{k} claim check(s) failed"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Results go to `--out` or `stdout`; diagnostics to
/// `stderr`.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Spectrum { inst, out } => {
            let src = resolve_instance(&inst, &cfg)?;
            let spec = src.spectrum()?;
            let o = resolve_output(&out, &cfg, Format::Json)?;
            let mut buf = Vec::new();
            match o.format {
                Format::Json => writeln!(buf, "{}", spec.to_json())?,
                Format::Csv => {
                    let mut t = Table::new(&["cost", "multiplicity"]);
                    for (c, d) in spec.costs().iter().zip(spec.multiplicities()) {
                        t.push(vec![(*c).into(), (*d).into()]);
                    }
                    emit(&t, &[], Format::Csv, &mut buf)?;
                }
            }
            o.write(&buf, stdout)
        }
        Command::Dla { inst, out, tol, traceless, dense, basis_out } => {
            let src = resolve_instance(&inst, &cfg)?;
            let spec = src.spectrum()?;
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let tol = tol.or(cfg.tol).unwrap_or(dla::DEFAULT_TOL);
            let traceless = traceless || cfg.traceless.unwrap_or(false);
            let dense = dense || cfg.dense.unwrap_or(false);
            let basis = dla::lie_closure(&spec, tol)?;
            let m = spec.num_classes();

            let mut cols = vec!["instance", "m", "N", "dim", "bound"];
            let mut row: Vec<Value> = vec![
                src.label().into(),
                m.into(),
                spec.total().into(),
                basis.dim().into(),
                (m * m + 1).into(),
            ];
            if traceless {
                cols.push("traceless_dim");
                row.push(basis.traceless_dim(&spec, tol)?.into());
            }
            if dense {
                let inst = src
                    .instance()
                    .ok_or_else(|| CliError::Usage("--dense needs a problem instance, not a spectrum file".into()))?;
                cols.push("dense_dim");
                row.push(dla::dense_lie_closure(inst, tol)?.into());
            }
            if let Some(path) = basis_out.or(cfg.basis_out.clone()) {
                std::fs::write(&path, basis.to_json() + "\n")?;
            }
            let mut t = Table::new(&cols);
            t.push(row);
            let meta = [("tol", Value::Float(tol))];
            o.emit(&t, &meta, stdout)
        }
        Command::Simulate { inst, out, depth, grover_angles, gammas, times, trace } => {
            let src = resolve_instance(&inst, &cfg)?;
            let spec = src.spectrum()?;
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let grover = grover_angles || cfg.grover_angles.unwrap_or(false);
            let params = if grover {
                let p = depth
                    .or(cfg.depth)
                    .ok_or_else(|| CliError::Usage("--grover-angles needs --depth".into()))?;
                LayerParams::grover(p, spec.total())
            } else {
                let g = gammas.or(cfg.gammas.clone()).unwrap_or_default();
                let t = times.or(cfg.times.clone()).unwrap_or_default();
                if let Some(p) = depth.or(cfg.depth) {
                    if p != g.len() {
                        return Err(CliError::Usage(format!("--depth {p} but {} angles given", g.len())));
                    }
                }
                LayerParams::new(g, t)?
            };
            let trace = trace || cfg.trace.unwrap_or(false);
            let mut t = Table::new(&["instance", "m", "N", "p", "loss", "success"]);
            let mut st = sim::ClassState::uniform(&spec);
            let mut push = |p: usize, st: &sim::ClassState| {
                t.push(vec![
                    src.label().into(),
                    spec.num_classes().into(),
                    spec.total().into(),
                    p.into(),
                    st.loss().into(),
                    st.success_probability().into(),
                ])
            };
            if trace {
                push(0, &st);
            }
            for (layer, (g, time)) in params.layers().enumerate() {
                st.apply_phase(g);
                st.apply_mixer(time);
                if trace {
                    push(layer + 1, &st);
                }
            }
            if !trace {
                push(params.depth(), &st);
            }
            o.emit(&t, &[], stdout)
        }
        Command::Variance {
            inst,
            out,
            depth,
            samples,
            gamma_range,
            time_scale,
            sizes,
            marked,
            marked_fraction,
        } => {
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let p = depth.or(cfg.depth).unwrap_or(2);
            let samples = samples.or(cfg.samples).unwrap_or(10_000);
            let gamma_range = gamma_range.map(|v| [v[0], v[1]]).or(cfg.gamma_range);
            let time_scale = time_scale.or(cfg.time_scale);
            let ranges_for = |spec: &CostSpectrum| -> CliResult<ParamRanges> {
                let mut r = match time_scale {
                    Some(s) => ParamRanges::with_time_scale(spec, s)?,
                    None => ParamRanges::default_for(spec),
                };
                if let Some([lo, hi]) = gamma_range {
                    r.gamma = Interval::new(lo, hi)?;
                }
                Ok(r)
            };
            let mut t = Table::new(&["family", "size", "m", "N", "p", "samples", "mean", "variance", "stderr", "seed"]);
            let mut meta = vec![("seed", Value::from(o.seed)), ("depth", Value::from(p))];
            let budget = inst.enum_budget.or(cfg.enum_budget).unwrap_or(DEFAULT_BUDGET);
            match sizes.or(cfg.sizes.clone()) {
                Some(sizes) => {
                    let family = resolve_family(&inst, &cfg, marked.or(cfg.marked), marked_fraction.or(cfg.marked_fraction))?;
                    let mut sizes_rows = Vec::new();
                    for &s in &sizes {
                        let spec = family.instance(s)?.spectrum(budget)?;
                        let est = landscape::estimate_variance(&spec, p, samples, &ranges_for(&spec)?, o.seed)?;
                        sizes_rows.push((s as f64, est.variance));
                        t.push(variance_row(&family.name(), s, &spec, &est));
                    }
                    let pts: Vec<(f64, f64)> = sizes_rows.iter().filter(|r| r.1 > 0.0).map(|r| (r.0, r.1.ln())).collect();
                    if let Some((slope, se)) = landscape::fit_line(&pts) {
                        writeln!(stderr, "log-variance slope vs size: {}", emit::format_float(slope))?;
                        meta.push(("log_variance_slope", slope.into()));
                        if let Some(se) = se {
                            meta.push(("slope_stderr", se.into()));
                        }
                    }
                }
                None => {
                    let src = resolve_instance(&inst, &cfg)?;
                    let spec = src.spectrum()?;
                    let est = landscape::estimate_variance(&spec, p, samples, &ranges_for(&spec)?, o.seed)?;
                    t.push(variance_row(&src.label(), src.size(), &spec, &est));
                }
            }
            o.emit(&t, &meta, stdout)
        }
        Command::Depth { inst, out, threshold, p_max, restarts, target_cost, max_evals } => {
            let src = resolve_instance(&inst, &cfg)?;
            let spec = src.spectrum()?;
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let threshold = threshold.or(cfg.threshold).unwrap_or(0.5);
            let p_max = p_max.or(cfg.p_max).unwrap_or(20);
            let target = match target_cost.or(cfg.target_cost) {
                Some(c) => Target::Cost(c),
                None => Target::Optimal,
            };
            let opts = DepthOptions {
                restarts: restarts.or(cfg.restarts).unwrap_or(20),
                seed: o.seed,
                target,
                nelder_mead: NelderMeadOptions {
                    max_evals: max_evals.or(cfg.max_evals).unwrap_or(NelderMeadOptions::default().max_evals),
                    ..Default::default()
                },
            };
            let outcome = depth::minimal_depth(&spec, threshold, p_max, &opts)?;
            let lb = depth::lower_bound_depth(&spec);
            let (_, d_opt) = spec.optimal_class();
            let mut t = Table::new(&["instance", "N", "d_opt", "p", "best_success", "evals", "lower_bound", "seed"]);
            for r in outcome.history() {
                t.push(vec![
                    src.label().into(),
                    spec.total().into(),
                    d_opt.into(),
                    r.p.into(),
                    r.best_success.into(),
                    r.evaluations.into(),
                    lb.into(),
                    o.seed.into(),
                ]);
            }
            let reached = match outcome.depth() {
                Some(p) => p.to_string(),
                None => "not reached".into(),
            };
            writeln!(stderr, "minimal depth at threshold {}: {reached}", emit::format_float(threshold))?;
            let meta = [
                ("threshold", Value::from(threshold)),
                ("minimal_depth", Value::from(reached)),
                ("restarts", Value::from(opts.restarts)),
                ("seed", Value::from(o.seed)),
            ];
            o.emit(&t, &meta, stdout)
        }
        Command::Baseline { inst, out, budget, trials } => {
            let src = resolve_instance(&inst, &cfg)?;
            let spec = src.spectrum()?;
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let (_, d_opt) = spec.optimal_class();
            let budget = budget
                .or(cfg.budget)
                .unwrap_or_else(|| (spec.total() as f64 * 20f64.ln() / d_opt as f64).ceil() as u64);
            let trials = trials.or(cfg.trials).unwrap_or(10_000);
            let res = depth::random_sampling_trials(&spec, budget, trials, o.seed)?;
            let mut t = Table::new(&["instance", "N", "d_opt", "budget", "trials", "frequency", "closed_form", "seed"]);
            t.push(vec![
                src.label().into(),
                spec.total().into(),
                d_opt.into(),
                budget.into(),
                trials.into(),
                res.frequency.into(),
                res.closed_form.into(),
                o.seed.into(),
            ]);
            o.emit(&t, &[("seed", Value::from(o.seed))], stdout)
        }
        Command::VerifyClaims { out, max_n } => {
            let o = resolve_output(&out, &cfg, Format::Csv)?;
            let max_n = max_n.or(cfg.max_n).unwrap_or(12);
            if max_n < 3 {
                return Err(CliError::Usage("--max-n must be at least 3".into()));
            }
            let checks = claim_checks(max_n)?;
            let mut t = Table::new(&["claim", "problem", "family", "n", "k", "expected", "observed", "pass"]);
            let mut failures = 0;
            for c in &checks {
                if c.expected != c.observed {
                    failures += 1;
                }
                t.push(vec![
                    c.claim.into(),
                    c.problem.into(),
                    c.family.as_str().into(),
                    c.n.into(),
                    c.k.map(Value::from).unwrap_or_else(|| Value::from("")),
                    c.expected.into(),
                    c.observed.into(),
                    (c.expected == c.observed).into(),
                ]);
            }
            o.emit(&t, &[("max_n", Value::from(max_n))], stdout)?;
            if failures > 0 {
                return Err(CliError::ClaimsFailed(failures));
            }
            Ok(())
        }
    }
}

fn variance_row(name: &str, size: usize, spec: &CostSpectrum, est: &landscape::VarianceEstimate) -> Vec<Value> {
    vec![
        name.into(),
        size.into(),
        spec.num_classes().into(),
        spec.total().into(),
        est.depth.into(),
        est.samples.into(),
        est.mean.into(),
        est.variance.into(),
        est.standard_error_of_variance.into(),
        est.seed.into(),
    ]
}

/// One optimal-solution count check.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimCheck {
    pub claim: &'static str,
    pub problem: &'static str,
    pub family: GraphFamily,
    pub n: usize,
    pub k: Option<usize>,
    pub expected: u64,
    pub observed: u64,
}

/// Brute-force optimal counts against the closed forms for every
/// `n in 3..=max_n`:
/// Max-Cut cycles `2` (even) / `2n` (odd), chains `2`, complete graphs
/// `C(n, n/2)` (even) / `C(n, (n-1)/2) + C(n, (n+1)/2)` (odd);
/// k-densest cycles `n`, chains `n + 1 - k` for every `1 < k < n`.
pub fn claim_checks(max_n: usize) -> qwoa_core::Result<Vec<ClaimCheck>> {
    let mut out = Vec::new();
    for n in 3..=max_n {
        let nu = n as u64;
        let maxcut = |f: GraphFamily| -> qwoa_core::Result<u64> {
            ProblemInstance::MaxCut(Graph::family(f, n)?).count_optimal(DEFAULT_BUDGET)
        };
        let cycle_expected = if n % 2 == 0 { 2 } else { 2 * nu };
        out.push(ClaimCheck {
            claim: "maxcut-sparse",
            problem: "maxcut",
            family: GraphFamily::Cycle,
            n,
            k: None,
            expected: cycle_expected,
            observed: maxcut(GraphFamily::Cycle)?,
        });
        out.push(ClaimCheck {
            claim: "maxcut-sparse",
            problem: "maxcut",
            family: GraphFamily::Chain,
            n,
            k: None,
            expected: 2,
            observed: maxcut(GraphFamily::Chain)?,
        });
        let complete_expected = if n % 2 == 0 {
            binomial(nu, nu / 2)
        } else {
            binomial(nu, (nu - 1) / 2) + binomial(nu, (nu + 1) / 2)
        } as u64;
        out.push(ClaimCheck {
            claim: "maxcut-complete",
            problem: "maxcut",
            family: GraphFamily::Complete,
            n,
            k: None,
            expected: complete_expected,
            observed: maxcut(GraphFamily::Complete)?,
        });
        for k in 2..n {
            for (family, expected) in [(GraphFamily::Cycle, nu), (GraphFamily::Chain, nu + 1 - k as u64)] {
                let inst = ProblemInstance::KDensest { graph: Graph::family(family, n)?, k };
                out.push(ClaimCheck {
                    claim: "kdensest",
                    problem: "kdensest",
                    family,
                    n,
                    k: Some(k),
                    expected,
                    observed: inst.count_optimal(DEFAULT_BUDGET)?,
                });
            }
        }
    }
    Ok(out)
}

enum Source {
    Instance(ProblemInstance, u64),
    Spectrum(CostSpectrum, String),
}

impl Source {
    fn spectrum(&self) -> CliResult<CostSpectrum> {
        match self {
            Source::Instance(inst, budget) => Ok(inst.spectrum(*budget)?),
            Source::Spectrum(s, _) => Ok(s.clone()),
        }
    }

    fn instance(&self) -> Option<&ProblemInstance> {
        match self {
            Source::Instance(i, _) => Some(i),
            Source::Spectrum(..) => None,
        }
    }

    fn label(&self) -> String {
        match self {
            Source::Instance(i, _) => i.label(),
            Source::Spectrum(_, name) => name.clone(),
        }
    }

    /// Vertex count for graph problems, log2 N for search, else N.
    fn size(&self) -> usize {
        match self {
            Source::Instance(ProblemInstance::MaxCut(g), _) => g.num_vertices(),
            Source::Instance(ProblemInstance::KDensest { graph, .. }, _) => graph.num_vertices(),
            Source::Instance(ProblemInstance::Search { space_size, .. }, _) => space_size.ilog2() as usize,
            Source::Spectrum(s, _) => s.total() as usize,
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(CliError::Io)
}

fn resolve_graph(inst: &InstanceArgs, cfg: &Config) -> CliResult<Graph> {
    if let Some(path) = inst.graph.as_ref().or(cfg.graph.as_ref()) {
        return Ok(Graph::parse(&read_text(path)?)?);
    }
    let family = inst
        .family
        .as_ref()
        .or(cfg.family.as_ref())
        .ok_or_else(|| CliError::Usage("need --graph, or --family with --n".into()))?;
    let family: GraphFamily = family.parse()?;
    let n = inst
        .n
        .or(cfg.n)
        .ok_or_else(|| CliError::Usage("--family needs --n".into()))?;
    Ok(Graph::family(family, n)?)
}

fn resolve_instance(inst: &InstanceArgs, cfg: &Config) -> CliResult<Source> {
    let budget = inst.enum_budget.or(cfg.enum_budget).unwrap_or(DEFAULT_BUDGET);
    if let Some(path) = inst.spectrum.as_ref().or(cfg.spectrum.as_ref()) {
        let s = CostSpectrum::from_json(&read_text(path)?)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(Source::Spectrum(s, name));
    }
    let search = inst.search.as_ref().map(|v| [v[0], v[1]]).or(cfg.search);
    let problem = inst.problem.as_deref().or(cfg.problem.as_deref());
    if let Some([n, m]) = search {
        if problem.is_some_and(|p| p != "search") {
            return Err(CliError::Usage("--search conflicts with --problem".into()));
        }
        return Ok(Source::Instance(ProblemInstance::Search { marked: m, space_size: n }, budget));
    }
    let instance = match problem.unwrap_or("maxcut") {
        "maxcut" => ProblemInstance::MaxCut(resolve_graph(inst, cfg)?),
        "kdensest" => {
            let k = inst
                .k
                .or(cfg.k)
                .ok_or_else(|| CliError::Usage("kdensest needs --k".into()))?;
            ProblemInstance::KDensest { graph: resolve_graph(inst, cfg)?, k }
        }
        "search" => return Err(CliError::Usage("search needs --search N M".into())),
        other => return Err(CliError::Usage(format!("unknown problem {other:?}"))),
    };
    Ok(Source::Instance(instance, budget))
}

fn resolve_family(
    inst: &InstanceArgs,
    cfg: &Config,
    marked: Option<u64>,
    fraction: Option<f64>,
) -> CliResult<InstanceFamily> {
    let problem = inst.problem.as_deref().or(cfg.problem.as_deref()).unwrap_or("maxcut");
    let graph_family = || -> CliResult<GraphFamily> {
        let f = inst
            .family
            .as_ref()
            .or(cfg.family.as_ref())
            .ok_or_else(|| CliError::Usage("--sizes needs --family".into()))?;
        Ok(f.parse()?)
    };
    Ok(match problem {
        "search" => InstanceFamily::Search(match (marked, fraction) {
            (Some(_), Some(_)) => return Err(CliError::Usage("give --marked or --marked-fraction, not both".into())),
            (Some(c), None) => MarkedRule::Count(c),
            (None, Some(f)) => MarkedRule::Fraction(f),
            (None, None) => MarkedRule::Count(1),
        }),
        "maxcut" => InstanceFamily::MaxCut(graph_family()?),
        "kdensest" => {
            let k = inst
                .k
                .or(cfg.k)
                .ok_or_else(|| CliError::Usage("kdensest needs --k".into()))?;
            InstanceFamily::KDensest(graph_family()?, k)
        }
        other => return Err(CliError::Usage(format!("unknown problem {other:?}"))),
    })
}

struct Output {
    path: Option<PathBuf>,
    format: Format,
    seed: u64,
}

impl Output {
    fn write(&self, bytes: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes)?,
            None => stdout.write_all(bytes)?,
        }
        Ok(())
    }

    fn emit(&self, table: &Table, meta: &[(&str, Value)], stdout: &mut dyn Write) -> CliResult<()> {
        let mut buf = Vec::new();
        emit(table, meta, self.format, &mut buf)?;
        self.write(&buf, stdout)
    }
}

fn resolve_output(out: &OutputArgs, cfg: &Config, default_format: Format) -> CliResult<Output> {
    let format = match out.format.as_ref().or(cfg.format.as_ref()) {
        Some(f) => f.parse().map_err(CliError::Usage)?,
        None => default_format,
    };
    Ok(Output {
        path: out.out.clone().or(cfg.out.clone()),
        format,
        seed: out.seed.or(cfg.seed).unwrap_or(0),
    })
}
