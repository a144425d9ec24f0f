//! Scenario files: JSON with 1-based indices.
//!
//! Parsing happens in two stages. The file is first read into loosely typed
//! raw structs (syntax and field errors become [`Error::Parse`] with a
//! position), then each payload is checked against its model invariants
//! (failures become [`Error::Validation`]).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::random::{generate_random_instance, RandomDims};
use crate::discrete::{AssociationProfile, NetworkInstance};
use crate::dynamics::{Rule, RunConfig, Scheduler, TieBreak};
use crate::error::{Error, Result};
use crate::nonatomic::{NonatomicInstance, SolverOptions};
use crate::poa::SingleClassInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Discrete,
    Nonatomic,
    SingleClassPoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    Enumerate,
    Tolls,
    SolveNe,
    SolveOpt,
    PoaSweep,
    ReproduceFig1,
    /// One of the built-in fixtures; the number goes in the `example` field.
    Example,
}

impl Experiment {
    fn kind(self) -> Option<Kind> {
        match self {
            Experiment::Simulate | Experiment::Enumerate | Experiment::Tolls => Some(Kind::Discrete),
            Experiment::SolveNe | Experiment::SolveOpt => Some(Kind::Nonatomic),
            Experiment::PoaSweep | Experiment::ReproduceFig1 => Some(Kind::SingleClassPoa),
            Experiment::Example => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Instance {
    Discrete(NetworkInstance),
    Nonatomic(NonatomicInstance),
    SingleClass(SingleClassInstance),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    pub rule: Rule,
    pub scheduler: Scheduler,
    pub tie_break: TieBreak,
    pub max_steps: Option<usize>,
    pub quiet_window: Option<usize>,
    /// Run the tolled game instead of the plain one.
    pub tolled: bool,
    /// More than one run draws a fresh initial profile per run, with seeds
    /// `seed, seed + 1, ...`, and reports aggregate statistics.
    pub runs: usize,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            rule: Rule::Mapc,
            scheduler: Scheduler::RoundRobin,
            tie_break: TieBreak::LowestIndex,
            max_steps: None,
            quiet_window: None,
            tolled: false,
            runs: 1,
        }
    }
}

impl DynamicsParams {
    pub fn config(&self, seed: u64) -> RunConfig {
        RunConfig {
            rule: self.rule,
            scheduler: self.scheduler.clone(),
            seed,
            tie_break: self.tie_break,
            max_steps: self.max_steps,
            quiet_window: self.quiet_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    /// Even grid points in `(0, N / gamma)`; the spill-over masses are always added.
    pub points: usize,
    /// Explicit masses replace the grid.
    pub masses: Option<Vec<f64>>,
    /// Random instance used by `reproduce_fig1` when no instance is given.
    pub num_bs: usize,
    pub gamma: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            points: 200,
            masses: None,
            num_bs: 5,
            gamma: 0.01,
        }
    }
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub kind: Option<Kind>,
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<u8>,
    pub seed: u64,
    /// Not echoed in metadata so the artifacts do not depend on where they land.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    pub instance: Option<Instance>,
    /// 1-based.
    pub initial_profile: Option<Vec<usize>>,
    /// 1-based profile whose tolls are tabulated.
    pub profile: Option<Vec<usize>>,
    pub dynamics: DynamicsParams,
    pub solver: SolverOptions,
    pub sweep: SweepParams,
    pub enumeration_cap: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    kind: Option<Kind>,
    experiment: Experiment,
    #[serde(default)]
    example: Option<u8>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    instance: Option<serde_json::Value>,
    #[serde(default)]
    random: Option<RandomDims>,
    #[serde(default)]
    initial_profile: Option<Vec<usize>>,
    #[serde(default)]
    profile: Option<Vec<usize>>,
    #[serde(default)]
    dynamics: DynamicsParams,
    #[serde(default)]
    solver: Option<SolverOptions>,
    #[serde(default)]
    sweep: SweepParams,
    #[serde(default)]
    enumeration_cap: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscrete {
    gains: Vec<Vec<f64>>,
    target_sinr: Vec<f64>,
    #[serde(default = "unit")]
    noise_power: f64,
    #[serde(default)]
    tie_tolerance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonatomic {
    gains: Vec<Vec<f64>>,
    sinr_density: Vec<f64>,
    masses: Vec<f64>,
    #[serde(default = "unit")]
    noise_power: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSingleClass {
    gains: Vec<f64>,
    gamma: f64,
    #[serde(default = "unit")]
    noise_power: f64,
}

fn unit() -> f64 {
    1.0
}

const DEFAULT_CAP: u64 = 10_000_000;

fn parse_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        context: format!("{context}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn payload<T: for<'de> Deserialize<'de>>(value: serde_json::Value, context: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Parse {
        context: format!("{context}: instance"),
        message: e.to_string(),
    })
}

fn build_instance(kind: Kind, value: serde_json::Value, context: &str) -> Result<Instance> {
    Ok(match kind {
        Kind::Discrete => {
            let r: RawDiscrete = payload(value, context)?;
            Instance::Discrete(
                NetworkInstance::new(r.gains, r.noise_power, r.target_sinr)?.with_tie_tolerance(r.tie_tolerance)?,
            )
        }
        Kind::Nonatomic => {
            let r: RawNonatomic = payload(value, context)?;
            Instance::Nonatomic(NonatomicInstance::new(r.gains, r.noise_power, r.sinr_density, r.masses)?)
        }
        Kind::SingleClassPoa => {
            let r: RawSingleClass = payload(value, context)?;
            Instance::SingleClass(SingleClassInstance::new(r.gains, r.gamma, r.noise_power)?)
        }
    })
}

fn check_profile(net: &NetworkInstance, one_based: &[usize], what: &str) -> Result<()> {
    if one_based.len() != net.num_mobiles() {
        return Err(Error::Validation(format!(
            "{what} has {} entries for {} mobiles",
            one_based.len(),
            net.num_mobiles()
        )));
    }
    AssociationProfile::from_one_based(one_based, net.num_bs())
        .map(|_| ())
        .map_err(|e| Error::Validation(format!("{what}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = read(path)?;
    parse_scenario_str(&text, &path.display().to_string())
}

/// Parses `path`, optionally replacing its seed before any random instance
/// is drawn.
pub fn parse_scenario_with_seed(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let text = read(path)?;
    let context = path.display().to_string();
    let parsed = parse_scenario_str(&text, &context)?;
    let Some(seed) = seed else { return Ok(parsed) };
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_error(&context, e))?;
    value["seed"] = seed.into();
    Ok(parse_scenario_str(&value.to_string(), &context)?.with_seed(seed))
}

/// `context` names the source in error messages.
pub fn parse_scenario_str(text: &str, context: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| parse_error(context, e))?;

    let kind = match (raw.experiment.kind(), raw.kind) {
        (Some(needed), Some(given)) if needed != given => {
            return Err(Error::Validation(format!(
                "experiment {:?} needs kind {:?}, scenario declares {:?}",
                raw.experiment, needed, given
            )));
        }
        (Some(needed), _) => Some(needed),
        (None, given) => given,
    };

    let example = match (raw.experiment, raw.example) {
        (Experiment::Example, Some(k)) if (1..=7).contains(&k) => Some(k),
        (Experiment::Example, Some(k)) => {
            return Err(Error::Validation(format!("example number must be 1..=7, got {k}")));
        }
        (Experiment::Example, None) => {
            return Err(Error::Validation("experiment \"example\" needs an \"example\" number".into()));
        }
        (_, Some(_)) => {
            return Err(Error::Validation("\"example\" is only valid with experiment \"example\"".into()));
        }
        (_, None) => None,
    };

    let instance = match (kind, raw.instance, raw.random) {
        (_, Some(_), Some(_)) => {
            return Err(Error::Validation("give either \"instance\" or \"random\", not both".into()));
        }
        (Some(kind), Some(value), None) => Some(build_instance(kind, value, context)?),
        (Some(kind), None, Some(dims)) => Some(generate_random_instance(kind, &dims, raw.seed)?),
        (Some(_), None, None) if raw.experiment == Experiment::ReproduceFig1 => None,
        (Some(_), None, None) => {
            return Err(Error::Validation("scenario needs an \"instance\" or \"random\" block".into()));
        }
        (None, None, None) => None,
        (None, _, _) => {
            return Err(Error::Validation("fixture scenarios carry their own instance".into()));
        }
    };

    if let Some(Instance::Discrete(net)) = &instance {
        if let Some(p) = &raw.initial_profile {
            check_profile(net, p, "initial_profile")?;
        }
        if let Some(p) = &raw.profile {
            check_profile(net, p, "profile")?;
        }
    }
    if raw.dynamics.runs == 0 {
        return Err(Error::Validation("dynamics.runs must be at least 1".into()));
    }
    if raw.dynamics.runs > 1 && raw.initial_profile.is_some() {
        return Err(Error::Validation(
            "initial_profile is only used with a single run; several runs draw their own".into(),
        ));
    }
    if raw.experiment == Experiment::Tolls && raw.profile.is_none() && raw.initial_profile.is_none() {
        return Err(Error::Validation("tolls experiment needs a \"profile\"".into()));
    }
    if let Some(masses) = &raw.sweep.masses {
        if masses.is_empty() || masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Validation("sweep masses must be a non-empty list of positive numbers".into()));
        }
    }
    if raw.sweep.masses.is_none() && raw.sweep.points == 0 {
        return Err(Error::Validation("sweep.points must be at least 1".into()));
    }

    // Without a solver block the multistart draws follow the scenario seed.
    let solver = raw.solver.unwrap_or_else(|| SolverOptions {
        seed: raw.seed,
        ..SolverOptions::default()
    });
    if !(solver.tolerance > 0.0) || solver.starts == 0 || solver.max_iters == 0 {
        return Err(Error::Validation(
            "solver needs a positive tolerance, at least one start and at least one iteration".into(),
        ));
    }

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| format!("{:?}", raw.experiment).to_lowercase()),
        kind,
        experiment: raw.experiment,
        example,
        seed: raw.seed,
        output_dir: raw.output_dir,
        instance,
        initial_profile: raw.initial_profile,
        profile: raw.profile,
        dynamics: raw.dynamics,
        solver,
        sweep: raw.sweep,
        enumeration_cap: raw.enumeration_cap.unwrap_or(DEFAULT_CAP),
    })
}

impl Scenario {
    /// A fixture scenario, as run by `cellgame example <k>`.
    pub fn example(k: u8) -> Result<Self> {
        parse_scenario_str(&format!("{{\"experiment\": \"example\", \"example\": {k}}}"), "example")
    }

    /// Replaces the run and solver seeds. A random instance keeps the draw
    /// made at parse time.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.solver.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
        "kind": "discrete",
        "experiment": "simulate",
        "instance": {"gains": [[1.0, 0.6], [0.6, 1.0]], "target_sinr": [0.5, 0.5], "noise_power": 1.0},
        "initial_profile": [2, 1]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = parse_scenario_str(EX1, "ex1").unwrap();
        assert_eq!(s.name, "simulate");
        assert_eq!(s.dynamics, DynamicsParams::default());
        assert_eq!(s.enumeration_cap, DEFAULT_CAP);
        let Some(Instance::Discrete(net)) = &s.instance else { panic!() };
        assert_eq!(net.target_sinr(0), 0.5);
        assert_eq!(s.initial_profile, Some(vec![2, 1]));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario_str("{\n  \"experiment\": simulate\n}", "bad.json").unwrap_err();
        let Error::Parse { context, .. } = err else { panic!("{err}") };
        assert!(context.starts_with("bad.json:2:"), "{context}");
        let err = parse_scenario_str(r#"{"experiment": "simulate", "colour": 1}"#, "f").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn invariant_errors_are_validation() {
        let bad_noise = EX1.replace("\"noise_power\": 1.0", "\"noise_power\": 0.0");
        assert!(matches!(parse_scenario_str(&bad_noise, "f"), Err(Error::Validation(_))));
        let bad_profile = EX1.replace("[2, 1]", "[3, 1]");
        assert!(matches!(parse_scenario_str(&bad_profile, "f"), Err(Error::Validation(_))));
        let overload = r#"{"experiment": "solve_ne",
            "instance": {"gains": [[1.0, 1.0]], "sinr_density": [0.1], "masses": [20.0]}}"#;
        let err = parse_scenario_str(overload, "f").unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("sum_l gamma_l M_l < N")), "{err}");
        let mismatch = EX1.replace("\"discrete\"", "\"nonatomic\"");
        assert!(matches!(parse_scenario_str(&mismatch, "f"), Err(Error::Validation(_))));
    }

    #[test]
    fn examples_and_random() {
        assert_eq!(Scenario::example(3).unwrap().example, Some(3));
        assert!(matches!(Scenario::example(8), Err(Error::Validation(_))));
        let r = r#"{"experiment": "simulate", "seed": 4, "random": {"num_mobiles": 3, "num_bs": 2}}"#;
        let a = parse_scenario_str(r, "f").unwrap();
        let b = parse_scenario_str(r, "f").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.solver.seed, 4);
        let zero = r#"{"experiment": "simulate", "random": {"num_mobiles": 0}}"#;
        assert!(matches!(parse_scenario_str(zero, "f"), Err(Error::Validation(_))));
    }
}
