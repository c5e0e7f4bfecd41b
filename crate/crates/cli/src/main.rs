mod expr;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fracvexp::config::SolveMode;
use fracvexp::field::{norm_sq, ExteriorRule, FarField, Field};
use fracvexp::max_principles::{
    boundary_estimate_probe, check_antisym_mp, check_strong_mp, HypothesisMode, MpTolerances, Verdict,
};
use fracvexp::moving_planes::{random_directions, sweep_directions, SweepMode};
use fracvexp::operator::{tail_integrability_check, TailVerdict};
use fracvexp::pipeline::{self, Status};
use fracvexp::report::{self, Metadata, Report};
use fracvexp::solver::{self, NamedFn, ProblemSpec, QField, RhsMode};
use fracvexp::{eval_plap_field, AnalyticField, Error, Grid, PlaneGeometry, Result, RunConfig, SampledFunction};

use expr::{space_values, Expr, SPACE};

const EXIT_CODES: &str = "\
Exit status:
  0   every check in the run passed
  2   a check failed (or was inconclusive)
  3   precondition violated by the input
  4   numerical failure (tail tolerance, non-finite values, kernel singularity)
  5   I/O error
  64  usage or configuration error

Environment:
  FRACVEXP_THREADS  caps the number of worker threads

Formulas (--u, --q, --f, --df) use evalexpr syntax with variables x, y, r
(r = |x|) or u; write reals with a decimal point (1/2 is integer division).";

#[derive(Parser)]
#[command(name = "fracvexp", version, about = "Fractional p(x,·)-Laplacian toolkit", after_help = EXIT_CODES)]
struct Cli {
    /// Run configuration (TOML, or JSON when the file starts with `{`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` of the configuration.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides `seed` of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Checks the exponent of the configuration against the standing hypotheses.
    ValidateExponent {
        #[arg(long, default_value_t = fracvexp::exponents::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Evaluates the operator at the given points.
    Eval {
        #[command(flatten)]
        field: FieldArgs,
        /// Point `x` or `x,y`; repeat for several points.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Estimates the weighted tail integral of a field.
    TailCheck {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
        /// Increasing shell radii, comma separated; default 2, 4, ..., 4096.
        #[arg(long)]
        radii: Option<String>,
        /// Bound on |u| outside radius 4 for formula fields.
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
    },
    /// Runs the seeded lemma suites.
    CertifyLemmas,
    /// Runs one maximum-principle check on a sampled field.
    CheckMp {
        #[arg(long, value_enum)]
        check: MpCheck,
        #[command(flatten)]
        field: FieldArgs,
        /// Plane `e1[,e2],lambda` (antisymmetric and boundary checks).
        #[arg(long, allow_hyphen_values = true)]
        plane: Option<String>,
        /// Domain of the strong maximum principle.
        #[arg(long, value_enum, default_value_t = Domain::Ball)]
        domain: Domain,
        /// Take the operator hypothesis as given instead of evaluating it.
        #[arg(long)]
        claimed: bool,
        /// Ball radius of the antisymmetric check.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Upper bound m of the antisymmetric check.
        #[arg(long, default_value_t = 0.999)]
        m_bound: f64,
        /// Levels `k0..k1` of the boundary probe (δ_k = 2^-k).
        #[arg(long)]
        levels: Option<String>,
    },
    /// Solves the Dirichlet problem on the unit ball.
    Solve {
        #[arg(long, value_enum, default_value_t = ModeArg::Manufactured)]
        mode: ModeArg,
        /// Nodes per axis (overrides the configuration).
        #[arg(long)]
        grid: Option<usize>,
        /// Exponent of the power nonlinearity: a constant or a formula in x, y, r.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Right-hand side f(u) for general-f mode.
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        /// Derivative f'(u) for general-f mode.
        #[arg(long, allow_hyphen_values = true)]
        df: Option<String>,
        /// Initial guess (CSV); default a(1 − |x|²)₊ in power and general-f mode.
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Solution CSV; default `<output_dir>/u.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report path; default `<output_dir>/solve.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Moving-plane sweeps of a sampled field.
    SweepPlanes {
        #[arg(long)]
        input: PathBuf,
        /// Number of seeded directions, or a list such as `1,0;0,1`.
        #[arg(long, default_value = "8", allow_hyphen_values = true)]
        directions: String,
        #[arg(long, value_enum, default_value_t = SweepArg::Ball)]
        mode: SweepArg,
        /// Report path; default `<output_dir>/sweep.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs every check and writes a summary.
    ReproduceAll,
}

#[derive(Args)]
struct FieldArgs {
    /// Sampled field (CSV with header line).
    #[arg(long, conflicts_with = "u")]
    input: Option<PathBuf>,
    /// Formula in x, y, r sampled on the configured grid.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Exterior rule for --u: zero_outside_ball, zero_outside_box or constant:<c>.
    /// Default: the constant itself for constant formulas, else zero_outside_box.
    #[arg(long)]
    exterior: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MpCheck {
    Strong,
    Antisymmetric,
    Boundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    /// Grid nodes with |x| < 1.
    Ball,
    /// Grid nodes where u is nonzero.
    Support,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Power,
    Manufactured,
    GeneralF,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Ball,
    WholeSpace,
}

struct Ctx {
    cfg: RunConfig,
    hash: String,
    out: PathBuf,
    name: &'static str,
}

impl Ctx {
    fn report<T: Serialize>(&self, path: Option<&Path>, result: &T) -> Result<PathBuf> {
        let path = path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.out.join(format!("{}.json", self.name)));
        report::write_text(
            &path,
            &Report::new(self.name, self.cfg.seed, &self.hash, result).to_json(),
        )?;
        Ok(path)
    }

    fn grid(&self, nodes: Option<usize>) -> Result<Grid> {
        Grid::new(
            self.cfg.exponent.dimension,
            nodes.unwrap_or(self.cfg.solver.nodes),
            self.cfg.solver.half_width,
        )
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))
        })
        .collect()
}

fn parse_plane(s: &str, dim: usize) -> Result<PlaneGeometry> {
    let v = parse_list(s)?;
    if v.len() != dim + 1 {
        return Err(Error::Parse(format!(
            "plane {s:?} needs {dim} direction components and an offset"
        )));
    }
    PlaneGeometry::new(&v[..dim], v[dim])
}

fn load_field(ctx: &Ctx, args: &FieldArgs) -> Result<SampledFunction> {
    match (&args.input, &args.u) {
        (Some(p), _) => report::read_sampled_csv(p),
        (None, Some(src)) => {
            let e = Expr::parse(src, SPACE)?;
            let exterior = match (&args.exterior, e.constant()) {
                (Some(r), _) => ExteriorRule::parse(r)?,
                (None, Some(c)) => ExteriorRule::Constant(c),
                (None, None) => ExteriorRule::ZeroOutsideBox,
            };
            let ball = matches!(exterior, ExteriorRule::ZeroOutsideBall);
            SampledFunction::from_fn(ctx.grid(None)?, exterior, 2, |x| {
                if ball && norm_sq(x) >= 1.0 {
                    0.0
                } else {
                    e.eval(&space_values(x))
                }
            })
        }
        (None, None) => Err(Error::invalid("give a field with --input u.csv or --u <formula>")),
    }
}

#[derive(Serialize)]
struct EvalResult {
    field: String,
    exterior_rule: String,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct SolveResult {
    mode: &'static str,
    q: String,
    nodes: usize,
    solution: String,
    error_sup: Option<f64>,
    report: solver::SolveReport,
}

#[derive(Serialize)]
struct SweepResult {
    input: String,
    csv: Vec<String>,
    report: fracvexp::moving_planes::MultiSweepReport,
}

fn default_radii() -> Vec<f64> {
    (1..=12).map(|k| 2f64.powi(k)).collect()
}

fn field_label(args: &FieldArgs) -> String {
    match (&args.input, &args.u) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(u)) => u.clone(),
        _ => String::new(),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.display().to_string();
    }
    cfg.validate()?;
    let name: &'static str = match &cli.command {
        Command::ValidateExponent { .. } => "validate-exponent",
        Command::Eval { .. } => "eval",
        Command::TailCheck { .. } => "tail-check",
        Command::CertifyLemmas => "certify-lemmas",
        Command::CheckMp { .. } => "check-mp",
        Command::Solve { .. } => "solve",
        Command::SweepPlanes { .. } => "sweep-planes",
        Command::ReproduceAll => "reproduce-all",
    };
    let ctx = Ctx {
        hash: cfg.hash(),
        out: PathBuf::from(&cfg.output_dir),
        cfg,
        name,
    };
    report::ensure_dir(&ctx.out)?;
    let started = SystemTime::now();
    let spec = ctx.cfg.exponent.build()?;
    let quad = &ctx.cfg.quadrature;

    let passed = match &cli.command {
        Command::ValidateExponent { samples } => {
            let p1 = fracvexp::exponents::validate_p1(&spec, *samples)?;
            let p2 = fracvexp::exponents::validate_p2(&spec, *samples)?;
            for c in p1.checks.iter().chain(&p2.checks) {
                println!(
                    "{:<24} {}  {}",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.detail
                );
            }
            let r = pipeline::ExponentValidation {
                passed: p1.passed && p2.passed,
                p1,
                p2,
            };
            ctx.report(None, &r)?;
            r.passed
        }
        Command::Eval { field, at } => {
            let u = load_field(&ctx, field)?;
            let points: Vec<Vec<f64>> = at.iter().map(|s| parse_list(s)).collect::<Result<_>>()?;
            let values = eval_plap_field(&spec, &u, &points, quad)?;
            for (x, v) in points.iter().zip(&values) {
                println!(
                    "L u({}) = {v:e}",
                    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
                );
            }
            ctx.report(
                None,
                &EvalResult {
                    field: field_label(field),
                    exterior_rule: u.exterior().label(),
                    points,
                    values,
                },
            )?;
            true
        }
        Command::TailCheck {
            field,
            at,
            radii,
            bound,
        } => {
            let x = parse_list(at)?;
            let radii = radii
                .as_deref()
                .map(parse_list)
                .transpose()?
                .unwrap_or_else(default_radii);
            let r = match (&field.input, &field.u) {
                (None, Some(src)) if field.exterior.is_none() => {
                    let e = Expr::parse(src, SPACE)?;
                    let far = FarField::Bounded {
                        center: vec![0.0; spec.dimension()],
                        radius: 4.0,
                        bound: *bound,
                    };
                    let u = AnalyticField::new(spec.dimension(), far, move |y| e.eval(&space_values(y)));
                    tail_integrability_check(&spec, &u as &dyn Field, &x, &radii, quad)?
                }
                _ => tail_integrability_check(&spec, &load_field(&ctx, field)?, &x, &radii, quad)?,
            };
            ctx.report(None, &r)?;
            r.verdict == TailVerdict::Decaying
        }
        Command::CertifyLemmas => {
            let r = pipeline::certify_lemmas(&ctx.cfg)?;
            for suite in [&r.mean_value, &r.kernel_monotone, &r.g_prime] {
                println!(
                    "{:<24} {}  {} samples, {} failures, min margin {:e}",
                    suite.name,
                    if suite.passed { "pass" } else { "FAIL" },
                    suite.samples,
                    suite.failures,
                    suite.min_margin
                );
            }
            ctx.report(None, &r)?;
            r.mean_value.passed && r.kernel_monotone.passed && r.g_prime.passed
        }
        Command::CheckMp {
            check,
            field,
            plane,
            domain,
            claimed,
            radius,
            m_bound,
            levels,
        } => {
            let u = load_field(&ctx, field)?;
            let mode = if *claimed {
                HypothesisMode::Claimed
            } else {
                HypothesisMode::Computed
            };
            let tol = MpTolerances::default();
            let dim = u.grid().dimension;
            let need_plane = || -> Result<PlaneGeometry> {
                parse_plane(
                    plane
                        .as_deref()
                        .ok_or_else(|| Error::invalid("this check needs --plane e1[,e2],lambda"))?,
                    dim,
                )
            };
            match check {
                MpCheck::Strong => {
                    let g = *u.grid();
                    let mask: Vec<bool> = (0..g.len())
                        .map(|i| match domain {
                            Domain::Ball => norm_sq(&g.node(i)) < 1.0,
                            Domain::Support => u.values()[i] != 0.0,
                        })
                        .collect();
                    let r = check_strong_mp(&spec, &u, &mask, mode, quad, tol)?;
                    ctx.report(None, &r)?;
                    r.verdict == Verdict::Holds
                }
                MpCheck::Antisymmetric => {
                    let r = check_antisym_mp(&spec, &u, &need_plane()?, *radius, *m_bound, mode, quad, tol)?;
                    ctx.report(None, &r)?;
                    r.verdict == Verdict::Holds
                }
                MpCheck::Boundary => {
                    let limit = need_plane()?;
                    let (k0, k1) = match levels {
                        Some(s) => {
                            let (a, b) = s
                                .split_once("..")
                                .ok_or_else(|| Error::Parse(format!("levels {s:?} must be k0..k1")))?;
                            let p = |t: &str| {
                                t.trim()
                                    .parse::<i32>()
                                    .map_err(|_| Error::Parse(format!("bad level {t:?}")))
                            };
                            (p(a)?, p(b)?)
                        }
                        None => ctx.cfg.checks.probe_levels,
                    };
                    let e = limit.direction().to_vec();
                    let points: Vec<Vec<f64>> = (k0..=k1)
                        .map(|k| e.iter().map(|c| (limit.offset() - 2f64.powi(-k)) * c).collect())
                        .collect();
                    let planes = vec![limit.clone(); points.len()];
                    let r = boundary_estimate_probe(&spec, &u, &planes, &points, &limit, quad)?;
                    ctx.report(None, &r)?;
                    r.verdict == Verdict::Holds
                }
            }
        }
        Command::Solve {
            mode,
            grid,
            q,
            f,
            df,
            initial,
            out,
            report: report_path,
        } => {
            let mut cfg = ctx.cfg.clone();
            if let Some(n) = grid {
                cfg.solver.nodes = *n;
            }
            let g = ctx.grid(Some(cfg.solver.nodes))?;
            let qfield = match q {
                None => QField::Constant(cfg.solver.q),
                Some(s) => {
                    let e = Expr::parse(s, SPACE)?;
                    match e.constant() {
                        Some(c) => QField::Constant(c),
                        None => QField::Callable(NamedFn::new(s.clone(), move |x: &[f64]| e.eval(&space_values(x)))),
                    }
                }
            };
            let q_label = qfield.label();
            let (rep, error_sup, mode_name) = match mode {
                ModeArg::Manufactured => {
                    if initial.is_some() {
                        return Err(Error::invalid("manufactured mode builds its own initial guess"));
                    }
                    cfg.solver.mode = SolveMode::Manufactured;
                    let r = pipeline::manufactured_solve(&cfg)?;
                    let err = r.summary.final_error;
                    (r.summary.report, Some(err), "manufactured")
                }
                ModeArg::Power | ModeArg::GeneralF => {
                    let rhs = if matches!(mode, ModeArg::Power) {
                        RhsMode::Power
                    } else {
                        let (Some(fs), Some(dfs)) = (f, df) else {
                            return Err(Error::invalid("general-f mode needs --f and --df"));
                        };
                        let fe = Expr::parse(fs, &["u"])?;
                        let de = Expr::parse(dfs, &["u"])?;
                        RhsMode::GeneralF {
                            f: NamedFn::new(fs.clone(), move |u: &f64| fe.eval(&[*u])),
                            df: NamedFn::new(dfs.clone(), move |u: &f64| de.eval(&[*u])),
                        }
                    };
                    let problem = ProblemSpec::new(spec.clone(), qfield, g, rhs)?;
                    let start = match initial {
                        Some(p) => report::read_sampled_csv(p)?,
                        None => {
                            let a = cfg.solver.amplitude;
                            SampledFunction::from_fn(g, ExteriorRule::ZeroOutsideBall, 2, |x| {
                                a * (1.0 - norm_sq(x)).max(0.0)
                            })?
                        }
                    };
                    let r = solver::solve(&problem, &start, None, quad, &cfg.solver.iteration())?;
                    (
                        r,
                        None,
                        if matches!(mode, ModeArg::Power) {
                            "power"
                        } else {
                            "general_f"
                        },
                    )
                }
            };
            let u_path = out.clone().unwrap_or_else(|| ctx.out.join("u.csv"));
            report::write_sampled_csv(&u_path, &rep.solution)?;
            report::write_residual_csv(&ctx.out.join("residual_history.csv"), &rep.history)?;
            println!(
                "{}: {} iterations, residual {:.3e}, {:?}",
                mode_name, rep.iterations, rep.final_residual_sup, rep.stop_reason
            );
            let converged = rep.converged;
            let result = SolveResult {
                mode: mode_name,
                q: q_label,
                nodes: g.len(),
                solution: u_path.display().to_string(),
                error_sup,
                report: rep,
            };
            ctx.report(report_path.as_deref(), &result)?;
            converged
        }
        Command::SweepPlanes {
            input,
            directions,
            mode,
            out,
        } => {
            let u = report::read_sampled_csv(input)?;
            let dim = u.grid().dimension;
            let dirs: Vec<Vec<f64>> = match directions.trim().parse::<usize>() {
                Ok(k) => random_directions(dim, k, ctx.cfg.seed),
                Err(_) => directions.split(';').map(parse_list).collect::<Result<_>>()?,
            };
            let mode = match mode {
                SweepArg::Ball => SweepMode::Ball,
                SweepArg::WholeSpace => SweepMode::WholeSpace,
            };
            let r = sweep_directions(&u, &dirs, mode, &ctx.cfg.sweep.sweep())?;
            let mut csv = Vec::new();
            for (k, s) in r.sweeps.iter().enumerate() {
                let name = if k == 0 {
                    "sweep.csv".to_string()
                } else {
                    format!("sweep_{k}.csv")
                };
                report::write_sweep_csv(&ctx.out.join(&name), s)?;
                csv.push(name);
            }
            report::write_radial_csv(&ctx.out.join("radial_profile.csv"), &u, &r.radial.center)?;
            csv.push("radial_profile.csv".into());
            for s in &r.sweeps {
                println!(
                    "direction {:?}: lambda0 {:?}, symmetric {}",
                    s.direction, s.lambda0_estimate, s.symmetric_verdict
                );
            }
            let ok = r.symmetric_verdict && r.monotone_verdict;
            ctx.report(
                out.as_deref(),
                &SweepResult {
                    input: input.display().to_string(),
                    csv,
                    report: r,
                },
            )?;
            ok
        }
        Command::ReproduceAll => {
            let s = pipeline::reproduce_all(&ctx.cfg, &ctx.out)?;
            for c in &s.criteria {
                println!("criterion {:>2} {:<26} {:?}  {}", c.id, c.name, c.status, c.detail);
            }
            s.criteria.iter().all(|c| c.status != Status::Fail)
        }
    };

    let meta = Metadata::new(name, std::env::args().collect(), &ctx.hash, ctx.cfg.seed, started);
    report::write_json(&ctx.out.join("metadata.json"), &meta)?;
    Ok(passed)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FRACVEXP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::invalid(format!("FRACVEXP_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("fracvexp: check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fracvexp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
