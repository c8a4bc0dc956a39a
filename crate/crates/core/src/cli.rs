//! Command-line front end. One subcommand per analysis; every run prints a
//! JSON [`RunReport`] on stdout and diagnostics on stderr.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::blowtorch::{synthesize, Direction, SynthesisOptions};
use crate::error::{Error, Result};
use crate::heat::{heat_bounds, order_digest};
use crate::lowtemp::{barrier_representation, energies_by_label, load_phi, lowt_profile, phi_for, verify_asymptotics};
use crate::model::{validate, Network, NetworkDocument, PhiEntry};
use crate::report::{sha256_hex, InputDigest, RunReport};
use crate::sim::{empirical_stats, simulate, stationary_entropy_rate};
use crate::stationary::{stationary, total_variation, MethodChoice, RateMatrix};
use crate::trees::Limits;

#[derive(Debug, Parser)]
#[command(name = "blowtorch", version, about = "Heat bounds, heat order, blowtorch kinetics and low-temperature dominance for Markov jump networks")]
pub struct Cli {
    #[command(flatten)]
    pub caps: CapArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Largest network accepted by spanning-tree enumeration.
    #[arg(long, global = true, env = "BLOWTORCH_MAX_TREE_STATES")]
    pub max_tree_states: Option<usize>,
    /// Largest network accepted by self-avoiding path enumeration.
    #[arg(long, global = true, env = "BLOWTORCH_MAX_PATH_STATES")]
    pub max_path_states: Option<usize>,
    /// Refuse tree enumeration above this many spanning trees.
    #[arg(long, global = true, env = "BLOWTORCH_MAX_TREES")]
    pub max_trees: Option<u64>,
}

impl CapArgs {
    pub fn limits(&self) -> Limits {
        let d = Limits::default();
        Limits {
            max_tree_states: self.max_tree_states.unwrap_or(d.max_tree_states),
            max_path_states: self.max_path_states.unwrap_or(d.max_path_states),
            max_trees: self.max_trees.unwrap_or(d.max_trees),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Solve,
    Trees,
    MatrixTree,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Solve => MethodChoice::Solve,
            MethodArg::Trees => MethodChoice::Trees,
            MethodArg::MatrixTree => MethodChoice::MatrixTree,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    XOverY,
    YOverX,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary occupations.
    Stationary {
        file: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// Path-heat bounds on (1/beta) ln rho(x)/rho(y) over a beta sweep.
    Bounds {
        file: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 5.0])]
        beta_sweep: Vec<f64>,
    },
    /// All-pairs heat order.
    Order { file: PathBuf },
    /// Activation tables that force rho(x) > rho(y) or rho(x) < rho(y).
    Blowtorch {
        file: PathBuf,
        x: String,
        y: String,
        #[arg(long, value_enum, default_value = "both")]
        direction: DirectionArg,
        #[arg(long)]
        beta: Option<f64>,
        /// Allow heat-ordered pairs when a positive path exists in the requested direction.
        #[arg(long)]
        one_sided: bool,
        /// Where to write the synthesized network documents (default: next to the input).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Zero-temperature exponents, dominant states and an asymptotics sweep.
    Lowtemp {
        file: PathBuf,
        /// Explicit exponent table: a JSON array of {from,to,value} or an object with a "phi" array.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// JSON object mapping state labels to energies, for the barrier representation.
        #[arg(long)]
        energy: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0, 20.0, 40.0])]
        betas: Vec<f64>,
    },
    /// Kinetic Monte Carlo trajectory statistics.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: f64,
        /// Initial state (default: first listed).
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        /// Write the trajectory as `time from to q` lines.
        #[arg(long)]
        trajectory_out: Option<PathBuf>,
    },
    /// Lists invariant violations of a network document.
    Validate { file: PathBuf },
}

/// A finished run: the report and its exit code.
pub struct Outcome {
    pub report: RunReport,
    pub exit_code: i32,
}

struct Loaded {
    text: String,
    path: PathBuf,
}

impl Loaded {
    fn read(path: &Path) -> Result<Self> {
        Ok(Loaded {
            text: std::fs::read_to_string(path)?,
            path: path.to_owned(),
        })
    }

    fn network(&self) -> Result<Network> {
        crate::model::parse_network(&self.text)
    }

    fn digest(&self, beta: Option<f64>, overrides: Value) -> InputDigest {
        InputDigest {
            file: self.path.display().to_string(),
            sha256: sha256_hex(self.text.as_bytes()),
            beta,
            overrides,
        }
    }
}

fn per_state(net: &Network, v: &[f64]) -> Value {
    let mut m = Map::new();
    for (i, x) in v.iter().enumerate() {
        m.insert(net.label(i).into(), json!(x));
    }
    Value::Object(m)
}

fn report(command: &str, inputs: InputDigest, results: Value, warnings: Vec<String>) -> Outcome {
    Outcome {
        report: RunReport {
            command: command.into(),
            inputs,
            results,
            warnings,
        },
        exit_code: 0,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let limits = cli.caps.limits();
    let caps = json!({
        "max_tree_states": limits.max_tree_states,
        "max_path_states": limits.max_path_states,
        "max_trees": limits.max_trees,
    });
    match &cli.command {
        Command::Stationary { file, beta, method } => {
            let input = Loaded::read(file)?;
            let net = input.network()?;
            let beta = beta.unwrap_or(net.beta());
            let rates = RateMatrix::build(&net, beta)?;
            let dist = stationary(&rates, (*method).into(), &limits)?;
            let mut warnings: Vec<String> = rates.conditioning_warning().into_iter().collect();
            if dist.relative_residual() > 1e-9 {
                warnings.push(format!("relative residual {} above 1e-9", dist.relative_residual()));
            }
            let mut results = serde_json::to_value(&dist).expect("serializable");
            results["log_probs"] = per_state(&net, &dist.log_probs);
            results["relative_residual"] = json!(dist.relative_residual());
            let overrides = json!({"method": format!("{method:?}").to_lowercase(), "caps": caps});
            Ok(report("stationary", input.digest(Some(beta), overrides), results, warnings))
        }
        Command::Bounds { file, x, y, beta_sweep } => {
            let input = Loaded::read(file)?;
            let net = input.network()?;
            let (xi, yi) = (net.index_of(x)?, net.index_of(y)?);
            let b = heat_bounds(&net, xi, yi, &limits)?;
            let mut cols: [Vec<Value>; 5] = Default::default();
            let mut warnings = Vec::new();
            for &beta in beta_sweep {
                if !(beta > 0.0) {
                    return Err(Error::InvalidArgument(format!("sweep beta must be > 0, got {beta}")));
                }
                let rates = RateMatrix::build(&net, beta)?;
                warnings.extend(rates.conditioning_warning());
                let dist = stationary(&rates, MethodChoice::Auto, &limits)?;
                let scaled = (dist.log_probs[xi] - dist.log_probs[yi]) / beta;
                cols[0].push(json!(beta));
                cols[1].push(json!(scaled));
                cols[2].push(json!(b.min_heat));
                cols[3].push(json!(b.max_heat));
                cols[4].push(json!(b.contains(scaled, 1e-9)));
            }
            let results = json!({
                "x": x, "y": y,
                "paths": b.n_paths,
                "min_path": b.min_path.labelled(&net),
                "max_path": b.max_path.labelled(&net),
                "columns": {
                    "beta": cols[0], "log_ratio_over_beta": cols[1],
                    "min_heat": cols[2], "max_heat": cols[3], "contained": cols[4],
                },
            });
            let overrides = json!({"beta_sweep": beta_sweep, "caps": caps});
            Ok(report("bounds", input.digest(None, overrides), results, warnings))
        }
        Command::Order { file } => {
            let input = Loaded::read(file)?;
            let net = input.network()?;
            let digest = order_digest(&net, &limits)?;
            Ok(report(
                "order",
                input.digest(None, json!({"caps": caps})),
                digest.to_json(&net),
                vec![],
            ))
        }
        Command::Blowtorch { file, x, y, direction, beta, one_sided, out_dir } => {
            let input = Loaded::read(file)?;
            let mut net = input.network()?;
            if let Some(b) = beta {
                net = net.with_beta(*b)?;
            }
            let (xi, yi) = (net.index_of(x)?, net.index_of(y)?);
            let dirs: Vec<Direction> = match direction {
                DirectionArg::XOverY => vec![Direction::XOverY],
                DirectionArg::YOverX => vec![Direction::YOverX],
                DirectionArg::Both => vec![Direction::XOverY, Direction::YOverX],
            };
            let options = SynthesisOptions { allow_one_sided: *one_sided };
            let dir_out = out_dir
                .clone()
                .or_else(|| file.parent().map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            if !dir_out.as_os_str().is_empty() {
                std::fs::create_dir_all(&dir_out)?;
            }
            let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("network");
            let mut outputs = Vec::new();
            for d in dirs {
                let a = synthesize(&net, xi, yi, d, &limits, options)?;
                let (hi, lo) = match d {
                    Direction::XOverY => (x, y),
                    Direction::YOverX => (y, x),
                };
                let target = dir_out.join(format!("{stem}.blowtorch.{hi}-over-{lo}.json"));
                std::fs::write(&target, a.network.to_json())?;
                let mut cert = a.certificate_json();
                cert["network_file"] = json!(target.display().to_string());
                outputs.push(cert);
            }
            let overrides = json!({"direction": format!("{direction:?}"), "one_sided": one_sided, "caps": caps});
            Ok(report(
                "blowtorch",
                input.digest(Some(net.beta()), overrides),
                json!({ "assignments": outputs }),
                vec![],
            ))
        }
        Command::Lowtemp { file, phi, energy, betas } => {
            let input = Loaded::read(file)?;
            let net = input.network()?;
            let table = match phi {
                Some(p) => load_phi(&net, &read_phi_entries(p)?)?,
                None => phi_for(&net)?,
            };
            let profile = lowt_profile(&table);
            let sweep = verify_asymptotics(&table, betas)?;
            let mut warnings: Vec<String> = sweep.rows.iter().filter_map(|r| r.warning.clone()).collect();
            warnings.dedup();
            let mut results = json!({
                "phi_source": if phi.is_some() { "file" } else if net.phi_entries().is_some() { "network" } else { "half-heat" },
                "profile": profile.to_json(),
                "asymptotics": sweep.to_json(),
            });
            if let Some(e) = energy {
                let map: HashMap<String, f64> = serde_json::from_str(&std::fs::read_to_string(e)?)
                    .map_err(|e| Error::Schema(e.to_string()))?;
                let energies = energies_by_label(&net, &map)?;
                results["barrier"] = barrier_representation(&table, &energies)?.to_json(&net);
            }
            let overrides = json!({
                "phi": phi.as_ref().map(|p| p.display().to_string()),
                "energy": energy.as_ref().map(|p| p.display().to_string()),
                "betas": betas,
            });
            Ok(report("lowtemp", input.digest(None, overrides), results, warnings))
        }
        Command::Simulate { file, seed, horizon, initial, beta, trajectory_out } => {
            let input = Loaded::read(file)?;
            let net = input.network()?;
            let beta = beta.unwrap_or(net.beta());
            let start = match initial {
                Some(s) => net.index_of(s)?,
                None => 0,
            };
            let rates = RateMatrix::build(&net, beta)?;
            let traj = simulate(&rates, start, *horizon, *seed)?;
            let stats = empirical_stats(&traj, &net)?;
            if let Some(p) = trajectory_out {
                std::fs::write(p, traj.export(&net))?;
            }
            let analytic = stationary(&rates, MethodChoice::Auto, &limits)?;
            let n = net.n_states();
            let mut counts = Vec::new();
            for a in 0..n {
                for &(b, _) in net.neighbors(a) {
                    counts.push(json!({"from": net.label(a), "to": net.label(b), "count": stats.count(a, b)}));
                }
            }
            let results = json!({
                "jumps": traj.events.len(),
                "final_state": net.label(traj.final_state()),
                "occupation": per_state(&net, &stats.occupation),
                "entropy_flux": stats.entropy_flux,
                "entropy_flux_per_time": stats.entropy_flux / traj.horizon,
                "analytic_entropy_rate": stationary_entropy_rate(&rates, &analytic.probs),
                "analytic": per_state(&net, &analytic.probs),
                "total_variation": total_variation(&stats.occupation, &analytic.probs),
                "jump_counts": counts,
            });
            let overrides = json!({
                "seed": seed, "horizon": horizon,
                "initial": net.label(start),
                "rng": "ChaCha8Rng::seed_from_u64",
            });
            Ok(report("simulate", input.digest(Some(beta), overrides), results, vec![]))
        }
        Command::Validate { file } => {
            let input = Loaded::read(file)?;
            let doc = NetworkDocument::from_json(&input.text)?;
            let violations = validate(&doc);
            let list: Vec<Value> = violations
                .iter()
                .map(|v| json!({"invariant": v.invariant(), "message": v.to_string()}))
                .collect();
            let mut out = report(
                "validate",
                input.digest(Some(doc.beta), json!({})),
                json!({"valid": violations.is_empty(), "violations": list}),
                vec![],
            );
            if !violations.is_empty() {
                out.exit_code = 1;
            }
            Ok(out)
        }
    }
}

fn read_phi_entries(path: &Path) -> Result<Vec<PhiEntry>> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let list = match v {
        Value::Object(mut m) => m
            .remove("phi")
            .ok_or_else(|| Error::Schema("phi file lacks a \"phi\" array".into()))?,
        other => other,
    };
    serde_json::from_value(list).map_err(|e| Error::Schema(e.to_string()))
}
