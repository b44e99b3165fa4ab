use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use comp_dof::cli::{config_from_fields, execute, exit_code, CommandName};
use comp_dof::{Error, Result};

#[derive(Parser)]
#[command(name = "comp-dof", version, about = "Degrees-of-freedom toolkit for cooperative interference channels")]
struct Cli {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for JSON/CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Instance {
    /// full, local_original or local_shifted
    #[arg(long)]
    topology: Option<String>,
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long = "L")]
    l: Option<u64>,
    #[arg(long = "M")]
    m: Option<u64>,
    /// spiral, scheme or custom
    #[arg(long)]
    strategy: Option<String>,
    /// Assignment JSON for the custom strategy.
    #[arg(long)]
    assignment: Option<PathBuf>,
}

#[derive(Args, Default)]
struct SchemeFiles {
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    beams: Option<PathBuf>,
    #[arg(long)]
    channel: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Subset,
    Greedy,
    Witness,
    M3,
    Tau,
    Nocoop,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Zf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Setting {
    Full,
    Local,
}

#[derive(Subcommand)]
enum Command {
    /// Print the transmit sets of a strategy.
    Assign(Instance),
    /// Drop transmitters that cannot help their message.
    Reduce(Instance),
    /// Upper bounds on the sum DoF.
    Bound {
        kind: BoundArg,
        #[command(flatten)]
        instance: Instance,
        /// none, local_cooperation or zero_forcing (tau only)
        #[arg(long)]
        restriction: Option<String>,
    },
    /// Build the cluster plan, beams and a channel draw.
    Scheme {
        #[command(flatten)]
        instance: Instance,
        /// Fractional-reuse sessions used for the DoF summary.
        #[arg(long)]
        sessions: Option<u64>,
    },
    /// Residual interference of a plan and its beams.
    Verify {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        files: SchemeFiles,
    },
    /// Exhaustive zero-forcing optimum on a small instance.
    Search {
        mode: Option<SearchMode>,
        #[command(flatten)]
        instance: Instance,
        /// Largest K accepted.
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long)]
        no_window_pruning: bool,
        /// Search all transmit sets instead of the envelope around each message.
        #[arg(long)]
        unrestricted: bool,
    },
    /// Rates over a power sweep as CSV.
    Simulate {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        files: SchemeFiles,
        /// start:end:stepdB or comma-separated linear powers.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Successive signal reconstruction on Wyner's model.
    Reconstruct {
        #[command(flatten)]
        instance: Instance,
        #[arg(long = "power")]
        powers: Vec<f64>,
        #[arg(long)]
        noiseless: bool,
    },
    /// Asymptotic per-user DoF.
    Tau {
        #[arg(long)]
        setting: Setting,
        #[arg(long = "L")]
        l: Option<u64>,
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        restriction: Option<String>,
    },
}

type Fields = serde_json::Map<String, Value>;

fn set_topology(fields: &mut Fields, key: &str, value: Value) {
    let topo = fields.entry("topology").or_insert_with(|| json!({}));
    if let Some(obj) = topo.as_object_mut() {
        obj.insert(key.to_string(), value);
    }
}

fn apply_instance(fields: &mut Fields, inst: &Instance) {
    if let Some(t) = &inst.topology {
        set_topology(fields, "kind", json!(t));
    }
    if let Some(k) = inst.k {
        set_topology(fields, "K", json!(k));
    }
    if let Some(l) = inst.l {
        set_topology(fields, "L", json!(l));
    }
    if let Some(m) = inst.m {
        fields.insert("M".into(), json!(m));
    }
    if let Some(s) = &inst.strategy {
        fields.insert("strategy".into(), json!(s));
    }
    if let Some(a) = &inst.assignment {
        fields.insert("assignment_file".into(), json!(a));
    }
}

fn set_option(fields: &mut Fields, key: &str, value: Value) {
    let options = fields.entry("options").or_insert_with(|| json!({}));
    if let Some(obj) = options.as_object_mut() {
        obj.insert(key.to_string(), value);
    }
}

fn apply_files(fields: &mut Fields, files: &SchemeFiles) -> Result<()> {
    if let Some(p) = &files.plan {
        set_option(fields, "plan_file", json!(p));
        // K, M and L default to the plan's own.
        let plan: Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        for key in ["K", "L"] {
            let present = fields.get("topology").and_then(|t| t.get(key)).is_some();
            if !present {
                set_topology(fields, key, plan[key].clone());
            }
        }
        if !fields.contains_key("M") {
            fields.insert("M".into(), plan["M"].clone());
        }
    }
    if let Some(p) = &files.beams {
        set_option(fields, "beams_file", json!(p));
    }
    if let Some(p) = &files.channel {
        set_option(fields, "channel_file", json!(p));
    }
    Ok(())
}

fn build(cli: &Cli) -> Result<(comp_dof::cli::ExperimentConfig, CommandName)> {
    let mut fields: Fields = match &cli.config {
        Some(path) => match serde_json::from_str(&std::fs::read_to_string(path)?)? {
            Value::Object(map) => map,
            _ => {
                return Err(Error::SchemaViolation {
                    pointer: String::new(),
                    message: "expected an object".into(),
                })
            }
        },
        None => Fields::new(),
    };
    let name = match &cli.command {
        Command::Assign(inst) => {
            apply_instance(&mut fields, inst);
            CommandName::Assign
        }
        Command::Reduce(inst) => {
            apply_instance(&mut fields, inst);
            CommandName::Reduce
        }
        Command::Bound {
            kind,
            instance,
            restriction,
        } => {
            apply_instance(&mut fields, instance);
            let kind = kind.to_possible_value().expect("no skipped variants");
            set_option(&mut fields, "bound", json!(kind.get_name()));
            if let Some(r) = restriction {
                set_option(&mut fields, "restriction", json!(r));
            }
            CommandName::Bound
        }
        Command::Scheme { instance, sessions } => {
            apply_instance(&mut fields, instance);
            if let Some(s) = sessions {
                set_option(&mut fields, "sessions", json!(s));
            }
            CommandName::Scheme
        }
        Command::Verify { instance, files } => {
            apply_instance(&mut fields, instance);
            apply_files(&mut fields, files)?;
            CommandName::Verify
        }
        Command::Search {
            mode: _,
            instance,
            limit,
            no_window_pruning,
            unrestricted,
        } => {
            apply_instance(&mut fields, instance);
            if let Some(l) = limit {
                set_option(&mut fields, "limit", json!(l));
            }
            if *no_window_pruning {
                set_option(&mut fields, "window_cap_pruning", json!(false));
            }
            if *unrestricted {
                set_option(&mut fields, "unrestricted", json!(true));
            }
            CommandName::Search
        }
        Command::Simulate {
            instance,
            files,
            sweep,
            trials,
        } => {
            apply_instance(&mut fields, instance);
            apply_files(&mut fields, files)?;
            if let Some(s) = sweep {
                set_option(&mut fields, "sweep", json!(s));
            }
            if let Some(t) = trials {
                set_option(&mut fields, "trials", json!(t));
            }
            CommandName::Simulate
        }
        Command::Reconstruct {
            instance,
            powers,
            noiseless,
        } => {
            apply_instance(&mut fields, instance);
            if fields.get("topology").and_then(|t| t.get("L")).is_none() {
                set_topology(&mut fields, "L", json!(1));
            }
            if !powers.is_empty() {
                set_option(&mut fields, "powers", json!(powers));
            }
            if *noiseless {
                set_option(&mut fields, "noiseless", json!(true));
            }
            CommandName::Reconstruct
        }
        Command::Tau {
            setting,
            l,
            m,
            restriction,
        } => {
            // K plays no role in the asymptotic value; any valid size will do.
            match setting {
                Setting::Full => fields.insert("topology".into(), json!({"kind": "full", "K": 1})),
                Setting::Local => {
                    let l = l.unwrap_or(1);
                    fields.insert("topology".into(), json!({"kind": "local_shifted", "K": l + 1, "L": l}))
                }
            };
            fields.insert("M".into(), json!(m));
            if let Some(r) = restriction {
                set_option(&mut fields, "restriction", json!(r));
            }
            CommandName::Tau
        }
    };
    if !fields.contains_key("strategy") {
        let kind = fields.get("topology").and_then(|t| t.get("kind")).and_then(Value::as_str);
        let default = if kind == Some("full") { "spiral" } else { "scheme" };
        fields.insert("strategy".into(), json!(default));
    }
    if fields.get("topology").is_some_and(|t| t.get("kind").is_none()) {
        set_topology(&mut fields, "kind", json!("local_shifted"));
    }
    if let Some(seed) = cli.seed {
        fields.insert("seed".into(), json!(seed));
    }
    if let Some(out) = &cli.out {
        fields.insert("output".into(), json!(out));
    }
    let config = config_from_fields(fields)?;
    Ok((config, name))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(&cli).and_then(|(config, name)| execute(&config, name));
    let code = exit_code(&result);
    match result {
        Ok(text) => print!("{text}"),
        Err(e) => eprintln!("error[{}]: {e}", e.code()),
    }
    ExitCode::from(code as u8)
}
