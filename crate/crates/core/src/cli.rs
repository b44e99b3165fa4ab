//! Experiment configuration and command execution behind the `comp-dof` binary.
//!
//! A run is described by an [`ExperimentConfig`] (JSON, or assembled from
//! flags) and a [`CommandName`]. [`execute`] returns the text printed on
//! stdout and writes artifacts to the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::assignment::{reduce_assignment, scheme_assign, spiral_assign, MessageAssignment};
use crate::bounds::{
    closed_form_tau, greedy_witness, m3_witness, no_coop_bound, subset_bound, BoundMethod, DofBound, SubsetMode,
    TauConnectivity, TauRestriction, TauSetting,
};
use crate::channel::{ChannelRealization, ChannelTopology, TopologyKind};
use crate::error::{Error, Result};
use crate::search::{max_zf_dof, SearchLimits};
use crate::simulator::{simulate_plan, simulate_rates, simulate_reconstruction, ReconstructionPlan, SimulationConfig};
use crate::zf_scheme::{design_beams, plan_clusters, plan_dof, reuse_schedule, verify_zero_interference, BeamDesign, SchemePlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Spiral,
    Scheme,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Subset,
    Greedy,
    Witness,
    M3,
    Tau,
    Nocoop,
}

impl BoundKind {
    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(Value::String(s.to_string())).ok()
    }
}

/// Command-specific settings; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundKind>,
    /// `start:end:stepdB` or a comma-separated list of linear powers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sessions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_cap_pruning: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unrestricted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noiseless: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<TauRestriction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beams_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: ChannelTopology,
    #[serde(rename = "M")]
    pub cooperation: usize,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub options: CommandOptions,
}

fn violation(pointer: &str, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn check_keys(obj: &Map<String, Value>, base: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(violation(&format!("{base}/{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn require_uint(obj: &Map<String, Value>, base: &str, key: &str, min: u64) -> Result<u64> {
    let pointer = format!("{base}/{key}");
    let value = obj.get(key).ok_or_else(|| violation(&pointer, "missing required field"))?;
    let n = value
        .as_u64()
        .ok_or_else(|| violation(&pointer, "expected a non-negative integer"))?;
    if n < min {
        return Err(violation(&pointer, format!("must be at least {min}")));
    }
    Ok(n)
}

fn check_type(obj: &Map<String, Value>, base: &str, key: &str, ok: fn(&Value) -> bool, what: &str) -> Result<()> {
    match obj.get(key) {
        Some(v) if !ok(v) => Err(violation(&format!("{base}/{key}"), format!("expected {what}"))),
        _ => Ok(()),
    }
}

const OPTION_KEYS: &[&str] = &[
    "bound",
    "sweep",
    "trials",
    "sessions",
    "limit",
    "window_cap_pruning",
    "unrestricted",
    "powers",
    "noiseless",
    "restriction",
    "plan_file",
    "beams_file",
    "channel_file",
];

/// Validates a JSON value against the configuration schema, reporting the
/// first problem with its JSON pointer.
pub fn validate_config(value: &Value) -> Result<ExperimentConfig> {
    let root = value.as_object().ok_or_else(|| violation("", "expected an object"))?;
    check_keys(
        root,
        "",
        &["topology", "M", "strategy", "assignment_file", "seed", "output", "options"],
    )?;

    let topo = root
        .get("topology")
        .ok_or_else(|| violation("/topology", "missing required field"))?
        .as_object()
        .ok_or_else(|| violation("/topology", "expected an object"))?;
    check_keys(topo, "/topology", &["kind", "K", "L"])?;
    let kind_str = topo
        .get("kind")
        .ok_or_else(|| violation("/topology/kind", "missing required field"))?
        .as_str()
        .ok_or_else(|| violation("/topology/kind", "expected a string"))?;
    let kind = TopologyKind::parse(kind_str)
        .ok_or_else(|| violation("/topology/kind", "expected full, local_original or local_shifted"))?;
    let k = require_uint(topo, "/topology", "K", 1)?;
    if kind != TopologyKind::FullyConnected {
        let l = require_uint(topo, "/topology", "L", 0)?;
        if l >= k {
            return Err(violation("/topology/L", format!("L={l} must be below K={k}")));
        }
    } else {
        check_type(topo, "/topology", "L", Value::is_u64, "a non-negative integer")?;
    }

    require_uint(root, "", "M", 1)?;
    let strategy = root
        .get("strategy")
        .ok_or_else(|| violation("/strategy", "missing required field"))?
        .as_str()
        .ok_or_else(|| violation("/strategy", "expected a string"))?;
    match strategy {
        "spiral" | "scheme" => {}
        "custom" => {
            if !root.get("assignment_file").is_some_and(Value::is_string) {
                return Err(violation("/assignment_file", "custom strategy needs an assignment file path"));
            }
        }
        other => return Err(Error::UnknownStrategy(other.to_string())),
    }
    check_type(root, "", "assignment_file", Value::is_string, "a string")?;
    check_type(root, "", "seed", Value::is_u64, "a non-negative integer")?;
    check_type(root, "", "output", Value::is_string, "a string")?;

    if let Some(options) = root.get("options") {
        let options = options
            .as_object()
            .ok_or_else(|| violation("/options", "expected an object"))?;
        check_keys(options, "/options", OPTION_KEYS)?;
        for key in ["trials", "sessions", "limit"] {
            if options.contains_key(key) {
                require_uint(options, "/options", key, 1)?;
            }
        }
        for key in ["window_cap_pruning", "unrestricted", "noiseless"] {
            check_type(options, "/options", key, Value::is_boolean, "a boolean")?;
        }
        for key in ["sweep", "plan_file", "beams_file", "channel_file"] {
            check_type(options, "/options", key, Value::is_string, "a string")?;
        }
        if let Some(b) = options.get("bound") {
            if !b.as_str().is_some_and(|s| BoundKind::parse(s).is_some()) {
                return Err(violation("/options/bound", "expected subset, greedy, witness, m3, tau or nocoop"));
            }
        }
        if let Some(r) = options.get("restriction") {
            if serde_json::from_value::<TauRestriction>(r.clone()).is_err() {
                return Err(violation(
                    "/options/restriction",
                    "expected none, local_cooperation or zero_forcing",
                ));
            }
        }
        if let Some(p) = options.get("powers") {
            let ok = p
                .as_array()
                .is_some_and(|a| !a.is_empty() && a.iter().all(|v| v.as_f64().is_some_and(|x| x > 0.0)));
            if !ok {
                return Err(violation("/options/powers", "expected a non-empty array of positive numbers"));
            }
        }
    }
    serde_json::from_value(value.clone()).map_err(|e| violation("", e.to_string()))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| violation("", format!("invalid JSON: {e}")))?;
    validate_config(&value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandName {
    Assign,
    Reduce,
    Bound,
    Scheme,
    Verify,
    Search,
    Simulate,
    Reconstruct,
    Tau,
}

impl CommandName {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "assign" => Self::Assign,
            "reduce" => Self::Reduce,
            "bound" => Self::Bound,
            "scheme" => Self::Scheme,
            "verify" => Self::Verify,
            "search" => Self::Search,
            "simulate" => Self::Simulate,
            "reconstruct" => Self::Reconstruct,
            "tau" => Self::Tau,
            _ => return None,
        })
    }
}

/// Exit status for a finished command: 0 on success, 1 for domain errors,
/// 2 for malformed input or usage problems.
pub fn exit_code(result: &Result<String>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(
            Error::SchemaViolation { .. }
            | Error::UnknownStrategy(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_),
        ) => 2,
        Err(_) => 1,
    }
}

struct Artifacts<'a> {
    dir: Option<&'a Path>,
}

impl Artifacts<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = self.dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Transmit sets for the configured strategy. For the scheme on an
/// original-orientation channel the equivalent shifted channel is used and
/// its transmitter labels are mapped back.
pub fn build_assignment(config: &ExperimentConfig) -> Result<MessageAssignment> {
    let topology = &config.topology;
    let k = topology.users();
    let m = config.cooperation;
    let assignment = match config.strategy {
        Strategy::Spiral => spiral_assign(k, m)?,
        Strategy::Custom => {
            let path = config
                .assignment_file
                .as_ref()
                .ok_or_else(|| violation("/assignment_file", "custom strategy needs an assignment file path"))?;
            serde_json::from_str(&fs::read_to_string(path)?)?
        }
        Strategy::Scheme => match topology.kind() {
            TopologyKind::LocalShifted => scheme_assign(k, m, topology.interferers().unwrap_or(0))?,
            TopologyKind::LocalOriginal => {
                let shifted = topology.equivalent_shift()?;
                let inner = scheme_assign(
                    shifted.topology.users(),
                    m,
                    shifted.topology.interferers().unwrap_or(0),
                )?;
                let mut sets = vec![Default::default(); k];
                for (i, set) in inner.sets().iter().enumerate() {
                    sets[shifted.original_receiver(i + 1) - 1] =
                        set.iter().map(|&j| shifted.original_transmitter(j)).collect();
                }
                MessageAssignment::new(k, sets)?
            }
            TopologyKind::FullyConnected => {
                return Err(Error::UnsupportedTopology(
                    "the cluster scheme needs a locally connected channel".into(),
                ))
            }
        },
    };
    if assignment.users() != k {
        return Err(Error::TopologyMismatch {
            expected: format!("K={k}"),
            found: format!("assignment with K={}", assignment.users()),
        });
    }
    Ok(assignment)
}

fn shifted_l(config: &ExperimentConfig) -> Result<usize> {
    match config.topology.kind() {
        TopologyKind::LocalShifted => Ok(config.topology.interferers().unwrap_or(0)),
        other => Err(Error::UnsupportedTopology(format!(
            "cluster plans are built on local_shifted channels, got {other}"
        ))),
    }
}

/// Plan, realization and beams: loaded from the files named in the options
/// when present, otherwise built from the configuration and seed.
fn load_scheme(config: &ExperimentConfig) -> Result<(SchemePlan, ChannelRealization, BeamDesign)> {
    let options = &config.options;
    let plan: SchemePlan = match &options.plan_file {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => plan_clusters(config.topology.users(), config.cooperation, shifted_l(config)?)?,
    };
    let topology = plan.topology()?;
    let realization = match &options.channel_file {
        Some(path) => ChannelRealization::from_csv(topology, config.seed, &fs::read_to_string(path)?)?,
        None => ChannelRealization::sample(topology, config.seed),
    };
    let beams = match &options.beams_file {
        Some(path) => BeamDesign::from_csv(&fs::read_to_string(path)?)?,
        None => design_beams(&realization, &plan)?,
    };
    Ok((plan, realization, beams))
}

fn parse_sweep(text: &str, trials: usize, seed: u64) -> Result<SimulationConfig> {
    let trimmed = text.trim();
    if let Some(db) = trimmed.strip_suffix("dB").or_else(|| trimmed.strip_suffix("db")) {
        let parts: Vec<f64> = db
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("sweep {text:?}: {e}")))?;
        let [start, end, step] = parts[..] else {
            return Err(Error::Parse(format!("sweep {text:?}: expected start:end:stepdB")));
        };
        return SimulationConfig::from_db(start, end, step, trials, seed);
    }
    let powers = trimmed
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse(format!("sweep {text:?}: {e}")))?;
    SimulationConfig::new(powers, trials, seed)
}

fn tau_setting(config: &ExperimentConfig) -> TauSetting {
    TauSetting {
        connectivity: match config.topology.interferers() {
            Some(l) => TauConnectivity::Local { interferers: l },
            None => TauConnectivity::Full,
        },
        cooperation: config.cooperation,
        restriction: config.options.restriction.unwrap_or_default(),
    }
}

fn run_bound(config: &ExperimentConfig) -> Result<Value> {
    let k = config.topology.users();
    let kind = config.options.bound.unwrap_or(BoundKind::Subset);
    if kind == BoundKind::Tau {
        let tau = closed_form_tau(tau_setting(config))?;
        let bound = DofBound {
            value: tau.value,
            witness: None,
            method: BoundMethod::ClosedForm,
        };
        let mut value = serde_json::to_value(bound)?;
        value["kind"] = serde_json::to_value(tau.kind)?;
        return Ok(value);
    }
    let assignment = build_assignment(config)?;
    let bound = match kind {
        BoundKind::Subset => subset_bound(&assignment, SubsetMode::Exact)?,
        BoundKind::Greedy => subset_bound(&assignment, SubsetMode::Greedy)?,
        BoundKind::Witness => DofBound::from_witness(
            k,
            greedy_witness(&assignment, config.cooperation)?,
            BoundMethod::SubsetGreedy,
        ),
        BoundKind::M3 => DofBound::from_witness(k, m3_witness(&assignment)?, BoundMethod::SubsetGreedy),
        BoundKind::Nocoop => no_coop_bound(&config.topology, &assignment)?,
        BoundKind::Tau => unreachable!(),
    };
    Ok(serde_json::to_value(bound)?)
}

fn rational_json(r: Rational64) -> Value {
    json!({"num": r.numer(), "den": r.denom()})
}

/// Runs `command` and returns what should be printed on stdout.
pub fn execute(config: &ExperimentConfig, command: CommandName) -> Result<String> {
    let artifacts = Artifacts {
        dir: config.output.as_deref(),
    };
    let k = config.topology.users();
    let m = config.cooperation;
    match command {
        CommandName::Assign => {
            let text = to_json(&build_assignment(config)?)?;
            artifacts.write("assignment.json", &text)?;
            Ok(text)
        }
        CommandName::Reduce => {
            let assignment = build_assignment(config)?;
            let reduction = reduce_assignment(&assignment, &config.topology, m)?;
            let text = to_json(&json!({
                "assignment": reduction.assignment,
                "removed": reduction.removed,
                "envelope_violations": reduction.envelope_violations,
            }))?;
            artifacts.write("reduction.json", &text)?;
            Ok(text)
        }
        CommandName::Bound => {
            let text = to_json(&run_bound(config)?)?;
            artifacts.write("bound.json", &text)?;
            Ok(text)
        }
        CommandName::Scheme => {
            let l = shifted_l(config)?;
            let plan = plan_clusters(k, m, l)?;
            let realization = ChannelRealization::sample(plan.topology()?, config.seed);
            let beams = design_beams(&realization, &plan)?;
            let sessions = config.options.sessions.unwrap_or(1);
            let schedule = reuse_schedule(k, m, l, sessions)?;
            let dof = plan_dof(&schedule)?;
            let plan_text = to_json(&plan)?;
            artifacts.write("plan.json", &plan_text)?;
            artifacts.write("beams.csv", &beams.to_csv()?)?;
            artifacts.write("channel.csv", &realization.to_csv())?;
            artifacts.write("dof.json", &to_json(&dof)?)?;
            if sessions > 1 {
                artifacts.write("schedule.json", &to_json(&schedule)?)?;
            }
            Ok(plan_text)
        }
        CommandName::Verify => {
            let (plan, realization, beams) = load_scheme(config)?;
            let report = verify_zero_interference(&realization, &plan, &beams);
            let text = to_json(&report)?;
            artifacts.write("verify.json", &text)?;
            Ok(text)
        }
        CommandName::Search => {
            let mut limits = SearchLimits::default();
            if let Some(limit) = config.options.limit {
                limits.max_users = limit;
            }
            if let Some(p) = config.options.window_cap_pruning {
                limits.window_cap_pruning = p;
            }
            if let Some(u) = config.options.unrestricted {
                limits.unrestricted = u;
            }
            let text = to_json(&max_zf_dof(&config.topology, m, limits)?)?;
            artifacts.write("search.json", &text)?;
            Ok(text)
        }
        CommandName::Simulate => {
            let trials = config.options.trials.unwrap_or(1);
            let sim = parse_sweep(
                config.options.sweep.as_deref().unwrap_or("30:60:10dB"),
                trials,
                config.seed,
            )?;
            let samples = if config.options.plan_file.is_some()
                || config.options.beams_file.is_some()
                || config.options.channel_file.is_some()
            {
                let (plan, realization, beams) = load_scheme(config)?;
                simulate_rates(&realization, &plan, &beams, &sim)?
            } else {
                simulate_plan(&plan_clusters(k, m, shifted_l(config)?)?, &sim)?
            };
            let mut text = String::from("user,P_dB,rate,slope\n");
            for (u, row) in samples.rates.iter().enumerate() {
                let slope = samples
                    .slopes
                    .as_ref()
                    .map_or(String::new(), |s| format!("{:.16e}", s[u]));
                for (p, rate) in samples.powers.iter().zip(row) {
                    text.push_str(&format!("{},{:.16e},{:.16e},{}\n", u + 1, 10.0 * p.log10(), rate, slope));
                }
            }
            artifacts.write("rates.csv", &text)?;
            Ok(text)
        }
        CommandName::Reconstruct => {
            let realization = ChannelRealization::sample(config.topology, config.seed);
            let plan = ReconstructionPlan::new(&realization, m)?;
            let powers = config.options.powers.clone().unwrap_or_else(|| vec![1e2, 1e4, 1e6]);
            let noisy = !config.options.noiseless.unwrap_or(false);
            let runs = powers
                .iter()
                .map(|&p| {
                    let rec = simulate_reconstruction(&realization, m, p, config.seed, noisy)?;
                    Ok(json!({"power": p, "reconstruction": rec}))
                })
                .collect::<Result<Vec<Value>>>()?;
            let text = to_json(&json!({"plan": plan, "runs": runs}))?;
            artifacts.write("reconstruction.json", &text)?;
            Ok(text)
        }
        CommandName::Tau => {
            let tau = closed_form_tau(tau_setting(config))?;
            artifacts.write(
                "tau.json",
                &to_json(&json!({"value": rational_json(tau.value), "kind": tau.kind}))?,
            )?;
            Ok(format!("{tau}\n"))
        }
    }
}

/// Builds a config from command-line style fields, reusing the schema checks.
pub fn config_from_fields(fields: Map<String, Value>) -> Result<ExperimentConfig> {
    validate_config(&Value::Object(fields))
}
