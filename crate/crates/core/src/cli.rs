//! Command-line front end: plan, simulate, verify, fuel comparison, a
//! randomized soundness suite and the reproduction table.
//!
//! Exit codes: 0 success, 1 numerical or planner failure (including a
//! failed verification), 2 usage or input-format error. Relative output
//! paths resolve against `ORTHOSTEER_OUT_DIR` when it is set.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GnhiState, Interval, NhiState, SystemKind, Trajectory};
use crate::error::Error;
use crate::fuel_l1::{compare_families, fuel_min, l1_norm, FuelReport};
use crate::lie::{Mat3, PiPolicy, Rotation};
use crate::optimal_energy::{cheb_optimal_inputs, weighted_cost, WeightedCost};
use crate::orthopoly::{BasisElement, Domain, Family};
use crate::signal::{InputSignal, Term};
use crate::so3_control::{
    constant_omega_plan, underactuated_plan, weighted_rate_plan, AttitudePlan, RateProfile, RateWeight,
};
use crate::steering::{plan_gnhi_with, plan_nhi, PairIndices, Phase, PhaseKind, SteeringFamily, SteeringPlan};

pub const OUT_DIR_ENV: &str = "ORTHOSTEER_OUT_DIR";
/// `verify` passes when the simulated endpoint error is below this.
pub const VERIFY_TOL: f64 = 1e-6;
pub const VERIFY_STEPS: usize = 4000;
pub const CONVENTION: &str = "gdot = hat(omega) g";

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "orthosteer",
    version,
    about = "Steering driftless systems with orthogonal polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a steering or attitude plan as JSON.
    Plan(PlanArgs),
    /// Plan (or load a plan) and write the sampled trajectory as CSV.
    Simulate(SimulateArgs),
    /// Re-simulate a plan and check its endpoint.
    Verify(VerifyArgs),
    /// Fuel reports for several families plus a comparison table.
    Fuel(FuelArgs),
    /// Plan and verify randomized targets for one scenario.
    Suite(SuiteArgs),
    /// Recompute the published example values.
    #[command(name = "paper-repro")]
    Reproduce(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SystemChoice {
    Nhi,
    Gnhi,
    So3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyChoice {
    Legendre,
    ChebyshevFirst,
    ChebyshevSecond,
    Jacobi,
    Trig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CostChoice {
    /// Equal amplitudes on the steering pair; phase costs are `½ ∫ u²/w`.
    #[default]
    None,
    /// Chebyshev-weighted minimum-energy inputs for the area phase; phase
    /// costs are that weighted energy.
    WeightedL2,
    /// Fuel-optimal amplitude split of the steering pair; phase costs are
    /// fuel `Σ ∫ |u_i|`.
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AttitudeMode {
    #[default]
    Constant,
    Weighted,
    Underactuated,
}

fn default_interval() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_steps() -> usize {
    crate::dynamics::DEFAULT_STEPS
}

/// Everything a single run needs; loadable from JSON with `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemChoice,
    /// NHI: `x1, x2, x3`. GNHI: `x1..xm` then the areas in lexicographic
    /// order. SO(3): a rotation vector.
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_family")]
    pub family: FamilyChoice,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// `(odd, even)` pair indices; the family default when absent.
    #[serde(default)]
    pub pair: Option<[usize; 2]>,
    #[serde(default)]
    pub cost: CostChoice,
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// SO(3) horizon.
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub attitude: AttitudeMode,
    /// `q(t) = q[0] + q[1] t` for weighted attitude plans.
    #[serde(default)]
    pub q: Option<[f64; 2]>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seed for randomized suites.
    #[serde(default)]
    pub seed: u64,
}

fn default_family() -> FamilyChoice {
    FamilyChoice::Legendre
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number '{p}': {e}")))
        .collect()
}

/// Comma-separated numbers as one argument value.
#[derive(Debug, Clone, PartialEq)]
struct Nums(Vec<f64>);

fn parse_nums(s: &str) -> std::result::Result<Nums, String> {
    parse_list(s).map(Nums)
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// JSON scenario file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(value_enum)]
    system: Option<SystemChoice>,
    /// Start state, comma separated: `x1,x2,x3` (nhi), `x1..xm` then the
    /// areas `x12,x13,..` (gnhi), or a rotation vector (so3).
    #[arg(long, value_parser = parse_nums, allow_hyphen_values = true)]
    from: Option<Nums>,
    /// Target state, same layout as `--from`.
    #[arg(long, value_parser = parse_nums, allow_hyphen_values = true)]
    to: Option<Nums>,
    /// Channel count for gnhi; inferred from the state length when absent.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum)]
    family: Option<FamilyChoice>,
    /// Jacobi parameters.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// `odd,even` indices of the steering pair.
    #[arg(long, value_parser = parse_nums)]
    pair: Option<Nums>,
    #[arg(long, value_enum)]
    cost: Option<CostChoice>,
    /// `-1,1` or `0,1`.
    #[arg(long, value_parser = parse_nums, allow_hyphen_values = true)]
    interval: Option<Nums>,
    /// RK4 steps per phase (at least 100).
    #[arg(long)]
    steps: Option<usize>,
    /// Horizon of so3 plans; 1 when absent.
    #[arg(long)]
    duration: Option<f64>,
    /// Rate profile of so3 plans.
    #[arg(long, value_enum)]
    attitude: Option<AttitudeMode>,
    /// `a0,a1` for `q(t) = a0 + a1 t`.
    #[arg(long, value_parser = parse_nums, allow_hyphen_values = true)]
    q: Option<Nums>,
    /// Seed for `suite`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Outcome<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<ScenarioConfig>(&text)
                    .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => {
                let system = self
                    .system
                    .ok_or_else(|| Failure::Usage("a system (nhi, gnhi, so3) or --config is required".into()))?;
                let (from, to) = match (&self.from, &self.to) {
                    (Some(Nums(f)), Some(Nums(t))) => (f.clone(), t.clone()),
                    _ => return Err(Failure::Usage("--from and --to are required without --config".into())),
                };
                ScenarioConfig {
                    system,
                    from,
                    to,
                    m: None,
                    family: FamilyChoice::Legendre,
                    alpha: 0.0,
                    beta: 0.0,
                    pair: None,
                    cost: CostChoice::None,
                    interval: default_interval(),
                    steps: default_steps(),
                    duration: None,
                    attitude: AttitudeMode::Constant,
                    q: None,
                    output: None,
                    seed: 0,
                }
            }
        };
        if let Some(s) = self.system {
            cfg.system = s;
        }
        if let Some(Nums(v)) = &self.from {
            cfg.from = v.clone();
        }
        if let Some(Nums(v)) = &self.to {
            cfg.to = v.clone();
        }
        cfg.m = self.m.or(cfg.m);
        cfg.family = self.family.unwrap_or(cfg.family);
        cfg.alpha = self.alpha.unwrap_or(cfg.alpha);
        cfg.beta = self.beta.unwrap_or(cfg.beta);
        if let Some(Nums(p)) = &self.pair {
            cfg.pair = Some(pair_from(p)?);
        }
        cfg.cost = self.cost.unwrap_or(cfg.cost);
        if let Some(Nums(v)) = &self.interval {
            if v.len() != 2 {
                return Err(Failure::Usage("--interval takes two numbers".into()));
            }
            cfg.interval = [v[0], v[1]];
        }
        cfg.steps = self.steps.unwrap_or(cfg.steps);
        cfg.duration = self.duration.or(cfg.duration);
        cfg.attitude = self.attitude.unwrap_or(cfg.attitude);
        if let Some(Nums(v)) = &self.q {
            if v.len() != 2 {
                return Err(Failure::Usage("--q takes two numbers".into()));
            }
            cfg.q = Some([v[0], v[1]]);
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        if cfg.steps < crate::dynamics::MIN_STEPS {
            return Err(Failure::Usage(format!(
                "steps must be at least {}",
                crate::dynamics::MIN_STEPS
            )));
        }
        Ok(cfg)
    }
}

fn pair_from(v: &[f64]) -> Outcome<[usize; 2]> {
    let ok = v.len() == 2 && v.iter().all(|x| *x >= 0.0 && x.fract() == 0.0);
    if !ok {
        return Err(Failure::Usage("--pair takes two non-negative integers".into()));
    }
    Ok([v[0] as usize, v[1] as usize])
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Simulate this plan file instead of planning from a scenario.
    #[arg(long, conflicts_with = "config")]
    plan: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Plan JSON as written by `plan`.
    plan: PathBuf,
    #[arg(long, default_value_t = VERIFY_STEPS)]
    steps: usize,
}

#[derive(Args, Debug)]
struct FuelArgs {
    /// Required change of x3.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    /// `family:odd,even`, repeatable; defaults to legendre:1,2 and trig:1,1.
    #[arg(long = "compare")]
    compare: Vec<String>,
    #[arg(long, value_parser = parse_nums, allow_hyphen_values = true)]
    interval: Option<Nums>,
    /// JSON report file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comparison table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Number of random targets.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Coordinate bound of the random targets.
    #[arg(long, default_value_t = 5.0)]
    bound: f64,
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// Directory for the plot data of the two simulation examples.
    #[arg(long)]
    plots: Option<PathBuf>,
}

/// Runs the command line; returns the process exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Fuel(a) => cmd_fuel(a, out),
        Command::Suite(a) => cmd_suite(a, out),
        Command::Reproduce(a) => cmd_repro(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Run(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn resolve_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn emit(target: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Outcome {
    match target {
        Some(p) => {
            let path = resolve_path(p);
            if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| Failure::Run(format!("cannot create {}: {e}", parent.display())))?;
            }
            fs::write(&path, bytes).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))
        }
        None => out.write_all(bytes).map_err(|e| Failure::Run(e.to_string())),
    }
}

fn to_json<S: Serialize>(v: &S) -> Outcome<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| Failure::Run(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// ---------------------------------------------------------------- documents

/// One term of one input channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    /// 1-based channel.
    pub channel: usize,
    #[serde(flatten)]
    pub family: Family<f64>,
    pub index: usize,
    pub scale: f64,
    pub weighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDoc {
    pub kind: PhaseKind,
    /// Local interval; the phase family's own domain.
    pub interval: [f64; 2],
    pub start_time: f64,
    pub inputs: Vec<TermDoc>,
    pub moves: Vec<String>,
    pub fixes: Vec<String>,
    pub predicted_endpoint: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub system: SystemChoice,
    pub m: usize,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    pub cost_kind: CostChoice,
    pub phases: Vec<PhaseDoc>,
    pub start: Vec<f64>,
    pub target: Vec<f64>,
    pub predicted_endpoint: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileDoc {
    Constant { omega: [f64; 3] },
    Weighted { c: [f64; 3], q: [f64; 2] },
    Underactuated { r: f64, phi: f64, c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttitudeDoc {
    pub system: SystemChoice,
    pub convention: String,
    /// Only attitudes are constrained; rates are free at both ends.
    pub boundary: String,
    pub profile: ProfileDoc,
    pub duration: f64,
    pub g0: [[f64; 3]; 3],
    pub g1: [[f64; 3]; 3],
    pub cost: f64,
    pub iterations: usize,
}

fn terms_doc(inputs: &[InputSignal<f64>]) -> Vec<TermDoc> {
    inputs
        .iter()
        .enumerate()
        .flat_map(|(ch, u)| {
            u.terms().iter().map(move |t| TermDoc {
                channel: ch + 1,
                family: t.basis.family,
                index: t.basis.index,
                scale: t.scale,
                weighted: t.weighted,
            })
        })
        .collect()
}

impl PlanDoc {
    fn from_plan(plan: &SteeringPlan<f64>, family: &str, cost_kind: CostChoice, closed_form: Option<String>) -> Self {
        let m = plan.channels();
        Self {
            system: if plan.system == SystemKind::Nhi {
                SystemChoice::Nhi
            } else {
                SystemChoice::Gnhi
            },
            m,
            family: family.to_string(),
            closed_form,
            cost_kind,
            phases: plan
                .phases
                .iter()
                .map(|p| PhaseDoc {
                    kind: p.kind,
                    interval: [p.interval.start, p.interval.end],
                    start_time: p.start_time,
                    inputs: terms_doc(&p.inputs),
                    moves: p.moves.clone(),
                    fixes: p.fixes.clone(),
                    predicted_endpoint: p.predicted_endpoint.clone(),
                    cost: p.cost,
                })
                .collect(),
            start: plan.start.clone(),
            target: plan.target.clone(),
            predicted_endpoint: plan.predicted_endpoint.clone(),
            cost: plan.cost,
        }
    }

    fn to_plan(&self) -> Outcome<SteeringPlan<f64>> {
        let system = match self.system {
            SystemChoice::Nhi => SystemKind::Nhi,
            SystemChoice::Gnhi => SystemKind::Gnhi { m: self.m },
            SystemChoice::So3 => return Err(Failure::Usage("not a steering plan".into())),
        };
        let m = if system == SystemKind::Nhi { 2 } else { self.m };
        let dim = m + m * (m.saturating_sub(1)) / 2;
        if self.start.len() != dim || self.target.len() != dim {
            return Err(Failure::Usage(format!("plan states must have {dim} coordinates")));
        }
        let mut phases = Vec::new();
        for p in &self.phases {
            let domain = Domain::from_bounds(p.interval[0], p.interval[1])
                .ok_or_else(|| Failure::Usage(format!("unsupported phase interval {:?}", p.interval)))?;
            let mut channels: Vec<Vec<Term<f64>>> = vec![Vec::new(); m];
            for t in &p.inputs {
                if t.channel == 0 || t.channel > m {
                    return Err(Failure::Usage(format!("channel {} out of range", t.channel)));
                }
                let mut basis = BasisElement::new(t.family, t.index)?;
                basis.domain = domain;
                channels[t.channel - 1].push(Term {
                    basis,
                    scale: t.scale,
                    weighted: t.weighted,
                });
            }
            let inputs = channels
                .into_iter()
                .map(|terms| InputSignal::try_from_terms(domain, terms))
                .collect::<crate::error::Result<Vec<_>>>()?;
            phases.push(Phase {
                kind: p.kind,
                interval: Interval::of(domain),
                start_time: p.start_time,
                inputs,
                moves: p.moves.clone(),
                fixes: p.fixes.clone(),
                predicted_endpoint: p.predicted_endpoint.clone(),
                cost: p.cost,
            });
        }
        if phases.is_empty() {
            return Err(Failure::Usage("plan has no phases".into()));
        }
        Ok(SteeringPlan {
            system,
            start: self.start.clone(),
            target: self.target.clone(),
            phases,
            predicted_endpoint: self.predicted_endpoint.clone(),
            cost: self.cost,
        })
    }
}

impl AttitudeDoc {
    fn from_plan(p: &AttitudePlan<f64>) -> Outcome<Self> {
        let profile = match &p.profile {
            RateProfile::Constant { omega } => ProfileDoc::Constant { omega: *omega },
            RateProfile::Weighted {
                c,
                q: RateWeight::Affine { a0, a1 },
            } => ProfileDoc::Weighted { c: *c, q: [*a0, *a1] },
            RateProfile::Weighted { .. } => return Err(Failure::Run("only affine rate weights can be written".into())),
            RateProfile::Underactuated { r, phi, c } => ProfileDoc::Underactuated {
                r: *r,
                phi: *phi,
                c: *c,
            },
        };
        Ok(Self {
            system: SystemChoice::So3,
            convention: CONVENTION.into(),
            boundary: "attitudes only".into(),
            profile,
            duration: p.duration,
            g0: p.g0.matrix().0,
            g1: p.g1.matrix().0,
            cost: p.cost,
            iterations: p.iterations,
        })
    }

    fn to_plan(&self) -> Outcome<AttitudePlan<f64>> {
        let profile = match self.profile {
            ProfileDoc::Constant { omega } => RateProfile::Constant { omega },
            ProfileDoc::Weighted { c, q } => RateProfile::Weighted {
                c,
                q: RateWeight::Affine { a0: q[0], a1: q[1] },
            },
            ProfileDoc::Underactuated { r, phi, c } => RateProfile::Underactuated { r, phi, c },
        };
        Ok(AttitudePlan {
            profile,
            duration: self.duration,
            g0: Rotation::try_new(Mat3(self.g0))?,
            g1: Rotation::try_new(Mat3(self.g1))?,
            cost: self.cost,
            iterations: self.iterations,
        })
    }
}

// ---------------------------------------------------------------- planning

fn steering_family(cfg: &ScenarioConfig) -> SteeringFamily<f64> {
    match cfg.family {
        FamilyChoice::Legendre => SteeringFamily::Legendre,
        FamilyChoice::ChebyshevFirst => SteeringFamily::ChebyshevFirst,
        FamilyChoice::ChebyshevSecond => SteeringFamily::ChebyshevSecond,
        FamilyChoice::Jacobi => SteeringFamily::Jacobi {
            alpha: cfg.alpha,
            beta: cfg.beta,
        },
        FamilyChoice::Trig => SteeringFamily::Trig,
    }
}

fn domain_of(cfg: &ScenarioConfig) -> Outcome<Domain> {
    Domain::from_bounds(cfg.interval[0], cfg.interval[1])
        .ok_or_else(|| Failure::Run(format!("interval {:?} must be [-1, 1] or [0, 1]", cfg.interval)))
}

/// Replaces the equal-amplitude split of the area phases according to the
/// requested cost, then restates every phase cost in that measure: fuel
/// `Σ ∫|u_i|` for `l1`, Chebyshev-weighted energy for `weighted_l2`.
fn retune_area_phase(plan: &mut SteeringPlan<f64>, cost: CostChoice) -> Outcome<Option<String>> {
    let closed = match cost {
        CostChoice::None => return Ok(None),
        CostChoice::L1 => {
            for phase in plan.phases.iter_mut().filter(|p| p.kind == PhaseKind::Area) {
                let active: Vec<usize> = (0..phase.inputs.len())
                    .filter(|&i| !phase.inputs[i].is_zero())
                    .collect();
                if active.len() != 2 {
                    return Err(Failure::Run(
                        "l1 split needs exactly two active channels per area phase".into(),
                    ));
                }
                let (i, k) = (active[0], active[1]);
                let (si, sk) = (phase.inputs[i].terms()[0].scale, phase.inputs[k].terms()[0].scale);
                let unit_i = phase.inputs[i].scaled(1.0 / si);
                let unit_k = phase.inputs[k].scaled(1.0 / sk);
                let report = fuel_min(&crate::fuel_l1::FuelConstants {
                    c1: l1_norm(&unit_i, phase.interval)?,
                    c2: l1_norm(&unit_k, phase.interval)?,
                    c: si * sk,
                    displacement: f64::NAN,
                })?;
                phase.inputs[i] = unit_i.scaled(report.b1);
                phase.inputs[k] = unit_k.scaled(report.b2);
            }
            for phase in &mut plan.phases {
                let mut fuel = 0.0;
                for u in phase.inputs.iter().filter(|u| !u.is_zero()) {
                    fuel += l1_norm(u, phase.interval)?;
                }
                phase.cost = fuel;
            }
            None
        }
        CostChoice::WeightedL2 => {
            let canonical = plan.phases.iter().all(|p| p.interval.is_domain(Domain::Canonical));
            if plan.system != SystemKind::Nhi || !canonical {
                return Err(Failure::Run(
                    "weighted_l2 plans are for the two-input system on [-1, 1]".into(),
                ));
            }
            let mut before = plan.start[2];
            for phase in &mut plan.phases {
                let after = phase.predicted_endpoint[2];
                if phase.kind == PhaseKind::Area {
                    let sol = cheb_optimal_inputs(after - before, None)?;
                    phase.inputs = vec![sol.u1, sol.u2];
                }
                before = after;
                phase.cost = weighted_cost(&phase.inputs[0], &phase.inputs[1], &WeightedCost::chebyshev())?;
            }
            Some("chebyshev_optimal".into())
        }
    };
    plan.cost = plan.phases.iter().map(|p| p.cost).fold(0.0, |a, c| a + c);
    Ok(closed)
}

fn area_count(m: usize) -> usize {
    m * (m - 1) / 2
}

fn build_steering(cfg: &ScenarioConfig) -> Outcome<(SteeringPlan<f64>, Option<String>)> {
    let family = steering_family(cfg);
    let pair = match cfg.pair {
        Some([odd, even]) => PairIndices { odd, even },
        None => family.default_pair(),
    };
    let domain = domain_of(cfg)?;
    let mut plan = match cfg.system {
        SystemChoice::Nhi => {
            if cfg.from.len() != 3 || cfg.to.len() != 3 {
                return Err(Failure::Usage("nhi states have three coordinates".into()));
            }
            plan_nhi(
                NhiState::from_slice(&cfg.from),
                NhiState::from_slice(&cfg.to),
                family,
                pair,
                domain,
            )?
        }
        SystemChoice::Gnhi => {
            let m = match cfg.m {
                Some(m) => m,
                None => (2..=crate::dynamics::MAX_CHANNELS)
                    .find(|&m| m + area_count(m) == cfg.from.len())
                    .ok_or_else(|| Failure::Usage("cannot infer m from the state length".into()))?,
            };
            let s0 = GnhiState::from_flat(m, &cfg.from).map_err(|e| Failure::Usage(e.to_string()))?;
            let sf = GnhiState::from_flat(m, &cfg.to).map_err(|e| Failure::Usage(e.to_string()))?;
            plan_gnhi_with(&s0, &sf, family, pair, domain)?
        }
        SystemChoice::So3 => unreachable!("attitude scenarios are planned separately"),
    };
    let closed = retune_area_phase(&mut plan, cfg.cost)?;
    Ok((plan, closed))
}

fn build_attitude(cfg: &ScenarioConfig) -> Outcome<AttitudePlan<f64>> {
    let rot = |v: &[f64], name: &str| -> Outcome<Rotation<f64>> {
        if v.len() != 3 {
            return Err(Failure::Usage(format!(
                "--{name} takes a rotation vector of three numbers"
            )));
        }
        Ok(Rotation::exp([v[0], v[1], v[2]]))
    };
    let g0 = rot(&cfg.from, "from")?;
    let g1 = rot(&cfg.to, "to")?;
    let duration = cfg.duration.unwrap_or(1.0);
    Ok(match cfg.attitude {
        AttitudeMode::Constant => constant_omega_plan(g0, g1, duration, PiPolicy::TieBreak)?,
        AttitudeMode::Weighted => {
            let [a0, a1] = cfg
                .q
                .ok_or_else(|| Failure::Usage("weighted attitude plans need --q a0,a1".into()))?;
            weighted_rate_plan(g0, g1, duration, RateWeight::Affine { a0, a1 }, PiPolicy::TieBreak)?
        }
        AttitudeMode::Underactuated => underactuated_plan(g0, g1, duration)?,
    })
}

/// Plan document for a scenario, as written by `plan`.
pub fn plan_json(cfg: &ScenarioConfig) -> crate::error::Result<Vec<u8>> {
    plan_bytes(cfg).map_err(|f| match f {
        Failure::Usage(m) | Failure::Run(m) => Error::Argument(m),
    })
}

fn plan_bytes(cfg: &ScenarioConfig) -> Outcome<Vec<u8>> {
    match cfg.system {
        SystemChoice::So3 => to_json(&AttitudeDoc::from_plan(&build_attitude(cfg)?)?),
        _ => {
            let (plan, closed) = build_steering(cfg)?;
            to_json(&PlanDoc::from_plan(
                &plan,
                steering_family(cfg).name(),
                cfg.cost,
                closed,
            ))
        }
    }
}

fn cmd_plan(a: PlanArgs, out: &mut dyn Write) -> Outcome {
    let cfg = a.scenario.resolve()?;
    let bytes = plan_bytes(&cfg)?;
    emit(cfg.output.as_deref(), &bytes, out)
}

fn csv_bytes(tr: &Trajectory<f64>) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).map_err(|e| Failure::Run(e.to_string()))?;
    Ok(buf)
}

enum LoadedPlan {
    Steering(SteeringPlan<f64>),
    Attitude(AttitudePlan<f64>),
}

fn load_plan(path: &Path) -> Outcome<LoadedPlan> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid plan {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Failure::Usage(format!("invalid plan {}: {e}", path.display()));
    if value.get("system").and_then(|s| s.as_str()) == Some("so3") {
        let doc: AttitudeDoc = serde_json::from_value(value).map_err(bad)?;
        Ok(LoadedPlan::Attitude(doc.to_plan()?))
    } else {
        let doc: PlanDoc = serde_json::from_value(value).map_err(bad)?;
        Ok(LoadedPlan::Steering(doc.to_plan()?))
    }
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Outcome {
    let (tr, target) = match &a.plan {
        Some(path) => {
            let steps = a.scenario.steps.unwrap_or(default_steps());
            let tr = match load_plan(path)? {
                LoadedPlan::Steering(p) => p.simulate(steps)?,
                LoadedPlan::Attitude(p) => p.simulate(steps)?,
            };
            (tr, a.scenario.out.clone())
        }
        None => {
            let cfg = a.scenario.resolve()?;
            let tr = match cfg.system {
                SystemChoice::So3 => build_attitude(&cfg)?.simulate(cfg.steps)?,
                _ => build_steering(&cfg)?.0.simulate(cfg.steps)?,
            };
            (tr, cfg.output.clone())
        }
    };
    emit(target.as_deref(), &csv_bytes(&tr)?, out)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    if a.steps < crate::dynamics::MIN_STEPS {
        return Err(Failure::Usage(format!(
            "steps must be at least {}",
            crate::dynamics::MIN_STEPS
        )));
    }
    let (error, what) = match load_plan(&a.plan)? {
        LoadedPlan::Steering(p) => {
            let parts = p.simulate_phases(a.steps)?;
            let end = parts.last().expect("non-empty").terminal().to_vec();
            let labels = p.labels();
            for (k, label) in labels.iter().enumerate() {
                writeln!(
                    out,
                    "{label}: target {} simulated {:.15e} error {:e}",
                    p.target[k],
                    end[k],
                    (end[k] - p.target[k]).abs()
                )
                .map_err(|e| Failure::Run(e.to_string()))?;
            }
            (p.endpoint_error(a.steps)?, "max coordinate error")
        }
        LoadedPlan::Attitude(p) => (p.final_error(a.steps)?, "frobenius error"),
    };
    let verdict = if error < VERIFY_TOL { "ok" } else { "FAILED" };
    writeln!(
        out,
        "{what} {error:e} (tolerance {VERIFY_TOL:e}, {} steps): {verdict}",
        a.steps
    )
    .map_err(|e| Failure::Run(e.to_string()))?;
    if error < VERIFY_TOL {
        Ok(())
    } else {
        Err(Failure::Run(format!("endpoint error {error:e} exceeds {VERIFY_TOL:e}")))
    }
}

fn parse_compare(s: &str) -> Outcome<(SteeringFamily<f64>, PairIndices)> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let family = match name.trim() {
        "legendre" => SteeringFamily::Legendre,
        "chebyshev_first" => SteeringFamily::ChebyshevFirst,
        "chebyshev_second" => SteeringFamily::ChebyshevSecond,
        "trig" => SteeringFamily::Trig,
        other => return Err(Failure::Usage(format!("unknown family '{other}' in --compare"))),
    };
    let pair = if rest.is_empty() {
        family.default_pair()
    } else {
        let v = parse_list(rest).map_err(Failure::Usage)?;
        let [odd, even] = pair_from(&v)?;
        PairIndices { odd, even }
    };
    Ok((family, pair))
}

fn fuel_csv(reports: &[FuelReport<f64>]) -> Vec<u8> {
    let mut s = String::from("family,odd,even,c1,c2,c,b1,b2,min_j,oracle_min_j\n");
    for r in reports {
        let pair = r.pair.expect("comparison reports carry their pair");
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.family.as_deref().unwrap_or(""),
            pair.odd,
            pair.even,
            r.c1,
            r.c2,
            r.c,
            r.b1,
            r.b2,
            r.min_j,
            r.oracle_min_j
        ));
    }
    s.into_bytes()
}

fn cmd_fuel(a: FuelArgs, out: &mut dyn Write) -> Outcome {
    let entries = if a.compare.is_empty() {
        vec![
            (SteeringFamily::Legendre, PairIndices { odd: 1, even: 2 }),
            (SteeringFamily::Trig, PairIndices { odd: 1, even: 1 }),
        ]
    } else {
        a.compare
            .iter()
            .map(|s| parse_compare(s))
            .collect::<Outcome<Vec<_>>>()?
    };
    let iv = a.interval.map(|n| n.0).unwrap_or_else(|| default_interval().to_vec());
    if iv.len() != 2 {
        return Err(Failure::Usage("--interval takes two numbers".into()));
    }
    let domain = Domain::from_bounds(iv[0], iv[1])
        .ok_or_else(|| Failure::Run(format!("interval {iv:?} must be [-1, 1] or [0, 1]")))?;
    let reports = compare_families(&entries, a.a, domain)?;
    emit(a.out.as_deref(), &to_json(&reports)?, out)?;
    if let Some(csv) = &a.csv {
        emit(Some(csv), &fuel_csv(&reports), out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SuiteCase {
    case: usize,
    target: Vec<f64>,
    error: f64,
    ok: bool,
}

fn cmd_suite(a: SuiteArgs, out: &mut dyn Write) -> Outcome {
    let cfg = a.scenario.resolve()?;
    if cfg.system == SystemChoice::So3 {
        return Err(Failure::Usage("the randomized suite covers nhi and gnhi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let targets: Vec<Vec<f64>> = (0..a.count)
        .map(|_| (0..cfg.to.len()).map(|_| rng.gen_range(-a.bound..=a.bound)).collect())
        .collect();
    let steps = cfg.steps.max(VERIFY_STEPS);
    let cases = targets
        .into_par_iter()
        .enumerate()
        .map(|(case, target)| {
            let mut c = cfg.clone();
            c.to = target.clone();
            let (plan, _) = build_steering(&c)?;
            let error = plan.endpoint_error(steps)?;
            Ok(SuiteCase {
                case,
                target,
                error,
                ok: error < VERIFY_TOL,
            })
        })
        .collect::<Outcome<Vec<_>>>()?;
    let failed = cases.iter().filter(|c| !c.ok).count();
    emit(cfg.output.as_deref(), &to_json(&cases)?, out)?;
    if failed > 0 {
        return Err(Failure::Run(format!(
            "{failed} of {} cases missed the target",
            cases.len()
        )));
    }
    Ok(())
}

// ------------------------------------------------------------ reproduction

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproStatus {
    Pass,
    Fail,
    /// The published number disagrees with an independent evaluation; the
    /// computed value is the one checked.
    #[serde(rename = "paper-deviation")]
    PublishedDeviation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproRow {
    pub name: &'static str,
    pub published: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub status: ReproStatus,
}

fn row(name: &'static str, published: f64, computed: f64, tolerance: f64) -> ReproRow {
    let status = if (published - computed).abs() <= tolerance {
        ReproStatus::Pass
    } else {
        ReproStatus::Fail
    };
    ReproRow {
        name,
        published,
        computed,
        tolerance,
        status,
    }
}

/// `independent` is the value the computation is checked against.
fn deviation(name: &'static str, published: f64, computed: f64, independent: f64, tolerance: f64) -> ReproRow {
    let status = if (computed - independent).abs() <= tolerance {
        ReproStatus::PublishedDeviation
    } else {
        ReproStatus::Fail
    };
    ReproRow {
        name,
        published,
        computed,
        tolerance,
        status,
    }
}

/// Trajectories of the two published simulation input sets on `[-1, 1]`.
pub fn simulation_examples(steps: usize) -> crate::error::Result<[Trajectory<f64>; 2]> {
    use crate::dynamics::integrate_nhi;
    let iv = Interval::of(Domain::Canonical);
    let s = (15.0f64 / 4.0).sqrt();
    let p1 = InputSignal::basis(BasisElement::legendre(1)?, s, false);
    let p2 = InputSignal::basis(BasisElement::legendre(2)?, s, false);
    let leg = integrate_nhi([&p1, &p2], NhiState::origin(), iv, steps)?;
    let b = (2.0 / std::f64::consts::PI).sqrt();
    let c1 = InputSignal::basis(BasisElement::chebyshev_first(2)?, b, true);
    let c2 = InputSignal::basis(BasisElement::chebyshev_second(1)?, -b, false);
    let cheb = integrate_nhi([&c1, &c2], NhiState::origin(), iv, steps)?;
    Ok([leg, cheb])
}

pub fn reproduction_rows() -> crate::error::Result<Vec<ReproRow>> {
    use crate::dynamics::coupling_displacement;
    use crate::fuel_l1::fuel_constants;
    use std::f64::consts::PI;
    let canonical = Interval::of(Domain::Canonical);
    let mut rows = Vec::new();

    let u1 = InputSignal::basis(BasisElement::legendre(1)?.shift(), 1.0, false);
    let u2 = InputSignal::basis(BasisElement::legendre(2)?.shift(), 1.0, false);
    rows.push(row(
        "shifted legendre coupling",
        1.0 / 15.0,
        coupling_displacement(&u1, &u2, Interval::of(Domain::Shifted))?,
        1e-10,
    ));

    let plan = plan_nhi(
        NhiState::origin(),
        NhiState::new(0.0, 0.0, 1.0),
        SteeringFamily::Legendre,
        PairIndices { odd: 1, even: 2 },
        Domain::Canonical,
    )?;
    rows.push(row(
        "legendre amplitude sqrt(15/4)",
        (15.0f64 / 4.0).sqrt(),
        plan.phases[0].inputs[0].terms()[0].scale,
        1e-10,
    ));

    let [leg, cheb] = simulation_examples(VERIFY_STEPS)?;
    rows.push(row("legendre simulation x3(1)", 1.0, leg.terminal_nhi().x3, 1e-6));
    rows.push(row("chebyshev simulation x3(1)", 1.0, cheb.terminal_nhi().x3, 1e-6));

    let t1 = InputSignal::basis(BasisElement::chebyshev_first(1)?, 1.0, true);
    let t2 = InputSignal::basis(BasisElement::chebyshev_first(2)?, 1.0, true);
    let d = coupling_displacement(&t1, &t2, canonical)?;
    rows.push(deviation("chebyshev steering integral", 5.0 / 3.0, d, 4.0 / 3.0, 1e-9));

    let sol = cheb_optimal_inputs(1.0, None)?;
    rows.push(row(
        "optimal cost for a = 1",
        1.0,
        weighted_cost(&sol.u1, &sol.u2, &WeightedCost::chebyshev())?,
        1e-9,
    ));

    let (l1, l2) = SteeringFamily::Legendre.pair_signals(PairIndices { odd: 1, even: 2 }, Domain::Canonical)?;
    let k = fuel_constants(&l1, &l2, 1.0, canonical)?;
    let r = fuel_min(&k)?;
    rows.push(row("legendre fuel c1", 1.0, k.c1, 1e-4));
    rows.push(row("legendre fuel c2", 0.7698, k.c2, 1e-4));
    rows.push(row("legendre fuel |c|", 3.75, k.c.abs(), 1e-9));
    rows.push(row("legendre fuel min J", 3.3981, r.min_j, 1e-3));

    let (s1, s2) = SteeringFamily::Trig.pair_signals(PairIndices { odd: 1, even: 1 }, Domain::Canonical)?;
    let k = fuel_constants(&s1, &s2, 1.0, canonical)?;
    let r = fuel_min(&k)?;
    rows.push(row("trig fuel c1", 1.2732, k.c1, 1e-4));
    rows.push(row("trig fuel c2", 1.2732, k.c2, 1e-4));
    rows.push(deviation("trig fuel |c|", 3.1407, k.c.abs(), PI / 2.0, 1e-9));
    rows.push(deviation(
        "trig fuel min J",
        4.5135,
        r.min_j,
        2.0 * (8.0 / PI).sqrt(),
        1e-6,
    ));
    Ok(rows)
}

fn plot_files(dir: &Path, name: &str, tr: &Trajectory<f64>) -> Outcome {
    let write = |suffix: &str, cols: &[usize], header: &str| -> Outcome {
        let mut s = format!("{header}\n");
        for st in &tr.states {
            let vals: Vec<String> = cols.iter().map(|&c| format!("{}", st[c] + 0.0)).collect();
            s.push_str(&vals.join(","));
            s.push('\n');
        }
        emit(
            Some(&dir.join(format!("{name}_{suffix}.csv"))),
            s.as_bytes(),
            &mut std::io::sink(),
        )
    };
    write("x1_x3", &[0, 2], "x1,x3")?;
    write("x1_x2", &[0, 1], "x1,x2")?;
    write("trace", &[0, 1, 2], "x1,x2,x3")
}

fn cmd_repro(a: ReproArgs, out: &mut dyn Write) -> Outcome {
    let rows = reproduction_rows()?;
    let io = |e: std::io::Error| Failure::Run(e.to_string());
    writeln!(
        out,
        "{:<32} {:>16} {:>16} {:>10}  status",
        "quantity", "published", "computed", "|delta|"
    )
    .map_err(io)?;
    for r in &rows {
        let status = match r.status {
            ReproStatus::Pass => "pass",
            ReproStatus::Fail => "FAIL",
            ReproStatus::PublishedDeviation => "paper-deviation",
        };
        writeln!(
            out,
            "{:<32} {:>16.10} {:>16.10} {:>10.3e}  {status}",
            r.name,
            r.published,
            r.computed,
            (r.published - r.computed).abs()
        )
        .map_err(io)?;
    }
    if let Some(dir) = &a.plots {
        let [leg, cheb] = simulation_examples(VERIFY_STEPS)?;
        plot_files(dir, "legendre", &leg)?;
        plot_files(dir, "chebyshev", &cheb)?;
    }
    let failed = rows.iter().filter(|r| r.status == ReproStatus::Fail).count();
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} reproduction rows failed")));
    }
    Ok(())
}
