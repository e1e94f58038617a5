//! Batch front end: a TOML run configuration, four commands, and their
//! report files.
//!
//! Exit codes: 0 success, 1 failed checks or invalid problem, 2 iteration
//! cap, 3 geometry error or divergence, 4 sign violation, 64 unreadable or
//! malformed input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ExponentField, ValidationReport};
use crate::functional::{energy_and_residual, ps_quantity, residual_dual_proxy, DomainSpec, EnergyReport, ProblemDefinition, ProblemSpec};
use crate::grid::{cone_function, GridFunction, Layout};
use crate::operator::{
    check_ar_condition, check_flux_consistency, check_growth_sandwich, check_origin_decay, check_structural_s, check_uniform_convexity,
    ArReport, ConvexityReport, GrowthReport, NonlinearitySpec, PotentialKind, PotentialSpec, StructuralReport, Truncation,
};
use crate::profile::{Profile, Weight};
use crate::random::{fork, seeded};
use crate::solvers::{
    default_seed, far_point, minimize, mountain_pass, multi_solution_sweep, solve_sign_definite, Classification, Sign, SolverOptions,
    SolverReport, Status, TraceEntry,
};
use crate::spaces::{
    convergence_battery, holder_battery, homogeneity_battery, interpolation_battery, norm_modular_battery, power_bounds_battery,
    sum_space_battery, x_norm, BatteryReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub dim: usize,
    pub radius: f64,
    pub nodes_per_axis: usize,
    /// Dimension used by the hypothesis checks, if not the grid's.
    #[serde(default)]
    pub space_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentBlock {
    pub p: Profile,
    pub q: Profile,
    pub alpha: Profile,
    pub delta: Profile,
    pub gamma: Profile,
    #[serde(default)]
    pub s: Option<Profile>,
    pub r: Profile,
    pub r_star: Profile,
}

fn default_kind() -> PotentialKind {
    PotentialKind::TypicalDoublePhase
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    #[serde(default = "default_kind")]
    pub kind: PotentialKind,
    #[serde(default)]
    pub a: Option<Weight>,
    #[serde(default)]
    pub b: Option<Weight>,
    #[serde(default)]
    pub p1: Option<Profile>,
    #[serde(default)]
    pub q1: Option<Profile>,
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock {
            kind: default_kind(),
            a: None,
            b: None,
            p1: None,
            q1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    #[serde(default)]
    pub a: Weight,
    #[serde(default)]
    pub w: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo_c1: f64,
    pub path_nodes: usize,
    pub dedup_tol: f64,
    pub project_sign: bool,
    pub far_doublings: u32,
    pub n_starts: usize,
    /// `min` starts from this multiple of a cone centred at the origin.
    pub start_scale: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverBlock {
            tol: o.tol,
            max_iter: o.max_iter,
            armijo_c1: o.armijo_c1,
            path_nodes: o.path_nodes,
            dedup_tol: o.dedup_tol,
            project_sign: o.project_sign,
            far_doublings: o.far_doublings,
            n_starts: 16,
            start_scale: 0.1,
        }
    }
}

impl SolverBlock {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            armijo_c1: self.armijo_c1,
            path_nodes: self.path_nodes,
            dedup_tol: self.dedup_tol,
            project_sign: self.project_sign,
            far_doublings: self.far_doublings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksBlock {
    /// Random functions per inequality battery.
    pub trials: usize,
    /// Random points per structural check of the potential and reaction.
    pub samples: usize,
}

impl Default for ChecksBlock {
    fn default() -> Self {
        ChecksBlock {
            trials: 1000,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationBlock {
    pub waive: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: PathBuf,
    /// `csv` enables the solution and trace files; the JSON report is always
    /// written.
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

/// One run, as written in a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
    pub domain: DomainBlock,
    pub exponents: ExponentBlock,
    #[serde(default)]
    pub potential: PotentialBlock,
    #[serde(default)]
    pub weights: WeightsBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub checks: ChecksBlock,
    #[serde(default)]
    pub validation: ValidationBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn definition(&self) -> ProblemDefinition {
        let e = &self.exponents;
        let pot = &self.potential;
        ProblemDefinition {
            domain: DomainSpec {
                dim: self.domain.dim,
                radius: self.domain.radius,
                nodes_per_axis: self.domain.nodes_per_axis,
            },
            space_dim: self.domain.space_dim,
            potential: PotentialSpec {
                kind: pot.kind,
                p: e.p.clone(),
                q: e.q.clone(),
                a_coef: pot.a.clone(),
                b_coef: pot.b.clone(),
                p1: pot.p1.clone(),
                q1: pot.q1.clone(),
            },
            alpha: e.alpha.clone(),
            s: e.s.clone(),
            r: e.r.clone(),
            r_star: e.r_star.clone(),
            nonlinearity: NonlinearitySpec {
                lambda: self.lambda,
                mu: self.mu,
                a_weight: self.weights.a.clone(),
                w_weight: self.weights.w.clone(),
                delta: e.delta.clone(),
                gamma: e.gamma.clone(),
                theta: self.theta,
                truncation: Truncation::None,
            },
            waive: self.validation.waive.clone(),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.definition())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dphase", version, about = "Double-phase variable-exponent problems on a box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Min,
    Mp,
    Signed,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hypothesis checks and structural checks of the potential and reaction.
    Validate(Common),
    /// Randomized batteries of norm inequalities.
    CheckSpaces {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Critical points of the energy.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Energy, residual norms and PS quantity of a field read from CSV.
    Energy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateReport {
    pub hypotheses: ValidationReport,
    pub growth: GrowthReport,
    pub structural: StructuralReport,
    pub flux_consistency: StructuralReport,
    pub uniform_convexity: ConvexityReport,
    pub superlinearity: ArReport,
    pub origin_decay: StructuralReport,
    pub overall_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacesReport {
    pub seed: u64,
    pub trials: usize,
    pub batteries: Vec<BatteryReport>,
    pub failures: usize,
}

/// Scalars and trace of a [`SolverReport`]; the field itself goes to CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub index: usize,
    pub classification: Classification,
    pub status: Status,
    pub exit_code: i32,
    pub message: String,
    pub energy: EnergyReport,
    pub residual_norm: f64,
    pub residual_dual: f64,
    pub iterations: usize,
    pub x_norm: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: Mode,
    pub seed: u64,
    pub exit_code: i32,
    pub message: String,
    pub results: Vec<SolutionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldEnergyReport {
    pub energy: EnergyReport,
    pub residual_norm: f64,
    pub residual_dual: f64,
    pub ps_quantity: f64,
    pub x_norm: f64,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_PARSE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => EXIT_PARSE,
                Error::Io(ref io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_PARSE,
                Error::Geometry(_) => Status::GeometryError.exit_code(),
                _ => EXIT_FAILED,
            }
        }
    }
}

struct Setup {
    config: RunConfig,
    seed: u64,
    out: PathBuf,
}

fn setup(c: &Common) -> Result<Setup> {
    let config = RunConfig::load(&c.config)?;
    let seed = c.seed.unwrap_or(config.seed);
    let out = c.out.clone().unwrap_or_else(|| config.output.directory.clone());
    fs::create_dir_all(&out)?;
    Ok(Setup { config, seed, out })
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Validate(c) => {
            let s = setup(c)?;
            let rep = validate(&s.config, s.seed)?;
            write_json(&s.out.join("report.json"), &rep)?;
            for f in rep.hypotheses.failures() {
                eprintln!("failed {}: {}", f.id, f.statement);
            }
            Ok(if rep.overall_pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::CheckSpaces { common, trials } => {
            let s = setup(common)?;
            let rep = check_spaces(&s.config, trials.unwrap_or(s.config.checks.trials), s.seed)?;
            write_json(&s.out.join("report.json"), &rep)?;
            Ok(if rep.failures == 0 { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Solve { common, mode } => {
            let s = setup(common)?;
            let problem = s.config.problem()?;
            if !problem.validation().overall_pass {
                write_json(&s.out.join("report.json"), problem.validation())?;
                problem.validation().ensure_valid()?;
            }
            let rep = solve(&s.config, &problem, *mode, s.seed, &s.out)?;
            write_json(&s.out.join("report.json"), &rep)?;
            Ok(rep.exit_code)
        }
        Command::Energy { common, input } => {
            let s = setup(common)?;
            let problem = s.config.problem()?;
            let text = fs::read_to_string(input)?;
            let u = GridFunction::from_csv(&text).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("{}: {m}", input.display())),
                other => other,
            })?;
            let rep = field_energy(&u, &problem)?;
            write_json(&s.out.join("report.json"), &rep)?;
            Ok(EXIT_OK)
        }
    }
}

/// Hypotheses plus randomized structural checks, all from one seed.
pub fn validate(config: &RunConfig, seed: u64) -> Result<ValidateReport> {
    let def = config.definition();
    let problem = ProblemSpec::new(def.clone())?;
    let grid = *problem.grid();
    let n = config.checks.samples;
    let mut rng = seeded(seed);
    let s = def.s.clone().unwrap_or_else(|| def.potential.q.clone());
    let growth = check_growth_sandwich(&def.potential, &grid, n, &mut fork(&mut rng));
    let structural = check_structural_s(&def.potential, &s, &grid, n, &mut fork(&mut rng));
    let flux_consistency = check_flux_consistency(&def.potential, &grid, 1e-3, n, &mut fork(&mut rng));
    let uniform_convexity = check_uniform_convexity(&def.potential, &[0.1, 0.3, 0.5], &grid, n, &mut fork(&mut rng));
    let superlinearity = check_ar_condition(&def.nonlinearity, &grid, n, &mut fork(&mut rng));
    let origin_decay = check_origin_decay(&def.nonlinearity, &def.alpha, &grid, n, &mut fork(&mut rng));
    let overall_pass = problem.validation().overall_pass
        && growth.violations == 0
        && structural.violations == 0
        && flux_consistency.violations == 0
        && uniform_convexity.passed
        && superlinearity.passed
        && origin_decay.violations == 0;
    Ok(ValidateReport {
        hypotheses: problem.validation().clone(),
        growth,
        structural,
        flux_consistency,
        uniform_convexity,
        superlinearity,
        origin_decay,
        overall_pass,
    })
}

/// All inequality batteries on the exponents of the config. Interpolation
/// only runs when `p << α << q` holds on the grid.
pub fn check_spaces(config: &RunConfig, trials: usize, seed: u64) -> Result<SpacesReport> {
    let problem = config.problem()?;
    let grid = *problem.grid();
    let e = &config.exponents;
    let field = |p: &Profile| ExponentField::from_profile(grid, Layout::Interior, p);
    let (p, q, alpha) = (field(&e.p)?, field(&e.q)?, field(&e.alpha)?);
    let mut rng = seeded(seed);
    let mut batteries = vec![
        norm_modular_battery(&p, trials, &mut fork(&mut rng))?,
        power_bounds_battery(&p, trials, &mut fork(&mut rng))?,
        convergence_battery(&p, trials, &mut fork(&mut rng))?,
        homogeneity_battery(&p, trials, &mut fork(&mut rng))?,
        holder_battery(&p, trials, &mut fork(&mut rng))?,
    ];
    let mut interp_rng = fork(&mut rng);
    let ordered = crate::exponents::strictly_less(&p, &alpha)?.0 && crate::exponents::strictly_less(&alpha, &q)?.0;
    if ordered {
        batteries.push(interpolation_battery(&alpha, &p, &q, trials, &mut interp_rng)?);
    } else {
        batteries.push(BatteryReport {
            inequality_name: "interpolation".into(),
            trials: 0,
            failures: 0,
            worst_slack: f64::INFINITY,
            note: "skipped: needs p << alpha << q".into(),
        });
    }
    batteries.push(sum_space_battery(
        problem.p_cells(),
        problem.q_cells(),
        trials,
        &mut fork(&mut rng),
    )?);
    let failures = batteries.iter().map(|b| b.failures).sum();
    Ok(SpacesReport {
        seed,
        trials,
        batteries,
        failures,
    })
}

fn record(index: usize, rep: &SolverReport, problem: &ProblemSpec) -> Result<SolutionRecord> {
    let v = rep.solution.values();
    Ok(SolutionRecord {
        index,
        classification: rep.classification,
        status: rep.status,
        exit_code: rep.exit_code(),
        message: rep.message.clone(),
        energy: rep.energy,
        residual_norm: rep.residual_norm,
        residual_dual: rep.residual_dual,
        iterations: rep.iterations,
        x_norm: x_norm(&rep.solution, problem)?,
        min_value: v.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        trace: rep.trace.clone(),
    })
}

fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut s = String::from("iteration,energy,residual_norm,ps_quantity\n");
    for t in trace {
        s.push_str(&format!(
            "{},{:e},{:e},{:e}\n",
            t.iteration, t.energy, t.residual_norm, t.ps_quantity
        ));
    }
    s
}

/// Runs a solve and writes `solution_<k>.csv` and `trace_<k>.csv` when CSV
/// output is enabled. The exit code is the most severe of the results.
pub fn solve(config: &RunConfig, problem: &ProblemSpec, mode: Mode, seed: u64, out: &Path) -> Result<SolveReport> {
    let opts = config.solver.options();
    let mut message = String::new();
    let reports: Vec<SolverReport> = match mode {
        Mode::Min => {
            let r = problem.grid().radius();
            let u0 = cone_function(&vec![0.0; problem.grid().dim()], 0.5 * r, problem.grid())?.scale(config.solver.start_scale);
            vec![minimize(problem, &u0, &opts)?]
        }
        Mode::Mp => match far_point(problem, &default_seed(problem)?, &opts) {
            Ok(far) => vec![mountain_pass(problem, &far, opts.path_nodes, &opts)?],
            Err(Error::Geometry(m)) => {
                message = m;
                Vec::new()
            }
            Err(e) => return Err(e),
        },
        Mode::Signed => {
            let mut v = Vec::new();
            for sign in [Sign::Positive, Sign::Negative] {
                let r = solve_sign_definite(problem, sign, &opts)?;
                v.push(r.mountain_pass);
                v.push(r.small_ball);
            }
            v
        }
        Mode::Sweep => multi_solution_sweep(problem, config.solver.n_starts, seed, &opts)?,
    };
    let csv = config.output.formats.contains(&Format::Csv);
    let mut results = Vec::with_capacity(reports.len());
    for (k, rep) in reports.iter().enumerate() {
        results.push(record(k, rep, problem)?);
        if csv {
            fs::write(out.join(format!("solution_{k}.csv")), rep.solution.to_csv()?)?;
            fs::write(out.join(format!("trace_{k}.csv")), trace_csv(&rep.trace))?;
        }
    }
    let exit_code = if results.is_empty() && mode == Mode::Mp {
        Status::GeometryError.exit_code()
    } else {
        results.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK)
    };
    Ok(SolveReport {
        mode,
        seed,
        exit_code,
        message,
        results,
    })
}

pub fn field_energy(u: &GridFunction, problem: &ProblemSpec) -> Result<FieldEnergyReport> {
    if u.grid() != problem.grid() {
        return Err(Error::GridMismatch(format!(
            "field is on {:?}, config on {:?}",
            u.grid(),
            problem.grid()
        )));
    }
    let (energy, r) = energy_and_residual(u, problem)?;
    Ok(FieldEnergyReport {
        energy,
        residual_norm: r.l2_norm(),
        residual_dual: residual_dual_proxy(&r, problem)?,
        ps_quantity: ps_quantity(u, problem)?,
        x_norm: x_norm(u, problem)?,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
