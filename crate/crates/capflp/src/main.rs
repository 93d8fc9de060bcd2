//! Command-line interface for instance generation, mechanism evaluation,
//! equilibrium inspection, and experiment runs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use capflp::analysis::{
    check_absolute_truthfulness, empirical_ratio, mean_mechanism_placement, misreport_grid,
    sw_upper_bound, worst_case_instance,
};
use capflp::distribution::{sample_positions, DistributionSpec};
use capflp::error::{Error, Result};
use capflp::fcfs::{
    check_equilibrium_stability, construct_ne, enumerate_ne, outcome_rows, resolve_outcome,
    social_welfare, Placement, PriorityRule, DEFAULT_NE_ENUMERATION_CAP,
};
use capflp::harness::{
    configure_thread_pool_from_env, emit_report, run_experiment, ExperimentConfig, ReportFormat,
};
use capflp::instance::{make_instance, CapacityVector, Instance};
use capflp::mechanisms::{
    apply_percentile, best_uniform_vector_m, best_wg_vector, es_condition, MechanismKind,
    PercentileVector,
};

#[derive(Parser)]
#[command(name = "capflp")]
#[command(about = "Capacitated facility location with scarce capacity: percentile mechanisms and the post-placement service game")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorstCaseKind {
    Wg,
    Aio,
    Sbs,
    AllAside,
    UniformGrid,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an instance from a distribution.
    Gen {
        /// Distribution: "uniform", "triangular", or a JSON spec.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FileFormat,
    },
    /// Apply a percentile vector to an instance.
    Place {
        /// Percentile vector: JSON array or {"v": [...], "assignment": [...]}.
        #[arg(long)]
        v: String,
        /// Comma-separated capacities, e.g. "2,2".
        #[arg(long)]
        caps: String,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Construct (default) or enumerate equilibria of the service game.
    Ne {
        #[arg(long)]
        instance: PathBuf,
        /// Placement JSON file, as produced by `place`.
        #[arg(long)]
        placement: PathBuf,
        /// Enumerate all equilibria and report stability.
        #[arg(long)]
        enumerate: bool,
        /// Profile-scan cap for enumeration.
        #[arg(long)]
        cap: Option<u128>,
        /// Write the constructed equilibrium's outcome as CSV.
        #[arg(long)]
        dump_outcome: Option<PathBuf>,
    },
    /// Check the closed-form stability condition of a percentile vector.
    VerifyEs {
        #[arg(long)]
        v: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        caps: String,
        /// Also enumerate equilibria on seeded random instances.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value = "100")]
        trials: usize,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// The percentile vector with the lowest worst-case ratio.
    BestVector {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "m")]
        k1: Option<usize>,
        #[arg(long, requires = "k1")]
        k2: Option<usize>,
        /// Facility count for the uniform-capacity spread.
        #[arg(long, requires = "k")]
        m: Option<usize>,
        /// Uniform capacity for the spread.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Extremal instance for a mechanism class.
    WorstCase {
        #[arg(long, value_enum)]
        kind: WorstCaseKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        caps: String,
        /// Comma-separated 1-based facility indices (wide-gap, all-aside,
        /// uniform-grid, sbs).
        #[arg(long)]
        indices: Option<String>,
    },
    /// Upper-bound over mechanism welfare on one instance.
    Ratio {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        v: String,
        #[arg(long)]
        caps: String,
    },
    /// Run a Monte-Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FileFormat,
        /// Include per-trial rows in the output.
        #[arg(long)]
        per_trial: bool,
    },
    /// Audit a percentile mechanism for profitable misreports.
    AuditTruthful {
        #[arg(long)]
        v: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        caps: String,
        #[arg(long, default_value = "0.01")]
        grid_step: f64,
        /// Audit the non-truthful average-report control instead.
        #[arg(long)]
        mean_control: bool,
    },
}

fn parse_caps(raw: &str) -> Result<CapacityVector> {
    let capacities = raw
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("bad capacity {part:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    CapacityVector::new(capacities)
}

fn parse_percentile_vector(raw: &str) -> Result<PercentileVector> {
    let value: serde_json::Value = serde_json::from_str(raw)
        .map_err(|e| Error::InvalidParams(format!("percentile vector is not JSON: {e}")))?;
    if let Some(array) = value.as_array() {
        let entries = array
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::InvalidParams("non-numeric entry".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        return PercentileVector::new(entries);
    }
    #[derive(serde::Deserialize)]
    struct Wire {
        v: Vec<f64>,
        assignment: Option<Vec<usize>>,
    }
    let wire: Wire = serde_json::from_value(value)
        .map_err(|e| Error::InvalidParams(format!("bad percentile vector object: {e}")))?;
    match wire.assignment {
        Some(order) => PercentileVector::with_assignment(wire.v, order),
        None => PercentileVector::new(wire.v),
    }
}

fn parse_distribution(raw: &str) -> Result<DistributionSpec> {
    match raw {
        "uniform" => Ok(DistributionSpec::Uniform),
        "triangular" => Ok(DistributionSpec::Triangular),
        other => {
            let spec: DistributionSpec = serde_json::from_str(other)
                .map_err(|e| Error::InvalidParams(format!("bad distribution spec: {e}")))?;
            spec.validate()?;
            Ok(spec)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let raw: Vec<f64> = serde_json::from_str(trimmed)
            .map_err(|e| Error::InvalidParams(format!("bad instance JSON: {e}")))?;
        make_instance(&raw)
    } else {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::InvalidParams(format!("bad instance CSV: {e}")))?
            .clone();
        let column = header
            .iter()
            .position(|h| h.trim() == "position")
            .ok_or_else(|| Error::InvalidParams("instance CSV needs a `position` column".into()))?;
        let mut raw = Vec::new();
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::InvalidParams(format!("bad instance CSV: {e}")))?;
            let cell = record
                .get(column)
                .ok_or_else(|| Error::InvalidParams("short CSV row".into()))?;
            raw.push(
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("bad position {cell:?}")))?,
            );
        }
        make_instance(&raw)
    }
}

fn placement_to_json(placement: &Placement) -> serde_json::Value {
    let facilities: Vec<serde_json::Value> = placement
        .facilities()
        .iter()
        .map(|f| {
            json!({
                "position": f.position[0],
                "capacity": f.capacity,
            })
        })
        .collect();
    json!({ "metric": "line", "facilities": facilities })
}

fn load_placement(path: &Path) -> Result<Placement> {
    #[derive(serde::Deserialize)]
    struct WireFacility {
        position: f64,
        capacity: usize,
    }
    #[derive(serde::Deserialize)]
    struct WirePlacement {
        facilities: Vec<WireFacility>,
    }
    let text = std::fs::read_to_string(path)?;
    let wire: WirePlacement = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParams(format!("bad placement JSON: {e}")))?;
    let spots: Vec<(f64, usize)> = wire
        .facilities
        .iter()
        .map(|f| (f.position, f.capacity))
        .collect();
    Placement::on_line(&spots)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            dist,
            n,
            seed,
            out,
            format,
        } => {
            let spec = parse_distribution(&dist)?;
            let instance = sample_positions(&spec, n, seed)?;
            let body = match format {
                FileFormat::Json => serde_json::to_string(instance.positions())?,
                FileFormat::Csv => {
                    let mut text = String::from("position\n");
                    for x in instance.positions() {
                        text.push_str(&format!("{x}\n"));
                    }
                    text
                }
            };
            emit(out.as_deref(), &body)
        }
        Command::Place { v, caps, instance } => {
            let vector = parse_percentile_vector(&v)?;
            let capacities = parse_caps(&caps)?;
            let instance = load_instance(&instance)?;
            let placement = apply_percentile(&vector, &instance, &capacities)?;
            emit(None, &placement_to_json(&placement).to_string())
        }
        Command::Ne {
            instance,
            placement,
            enumerate,
            cap,
            dump_outcome,
        } => {
            let instance = load_instance(&instance)?;
            let placement = load_placement(&placement)?;
            let priority = PriorityRule::ascending(instance.n());
            let cap = cap.unwrap_or(DEFAULT_NE_ENUMERATION_CAP);
            if enumerate {
                let all = enumerate_ne(&instance, &placement, &priority, cap)?;
                let (stable, welfare_values) =
                    check_equilibrium_stability(&instance, &placement, &priority, cap)?;
                let equilibria: Vec<serde_json::Value> = all
                    .iter()
                    .map(|p| {
                        let outcome =
                            resolve_outcome(&instance, &placement, p, &priority)?;
                        Ok(json!({
                            "profile": p.to_one_based(),
                            "welfare": social_welfare(&outcome),
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(
                    None,
                    &json!({
                        "equilibria": equilibria,
                        "stable": stable,
                        "welfare_values": welfare_values,
                    })
                    .to_string(),
                )
            } else {
                let profile = construct_ne(&instance, &placement, &priority)?;
                let outcome = resolve_outcome(&instance, &placement, &profile, &priority)?;
                if let Some(path) = dump_outcome {
                    let mut writer = csv::Writer::from_path(&path)
                        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                    writer
                        .write_record(["agent", "position", "strategy", "served", "utility"])
                        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                    for (agent, position, strategy, served, utility) in
                        outcome_rows(&instance, &profile, &outcome)
                    {
                        writer
                            .write_record([
                                agent.to_string(),
                                position.to_string(),
                                strategy.to_string(),
                                served.to_string(),
                                utility.to_string(),
                            ])
                            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                    }
                    writer.flush()?;
                }
                emit(
                    None,
                    &json!({
                        "profile": profile.to_one_based(),
                        "welfare": social_welfare(&outcome),
                    })
                    .to_string(),
                )
            }
        }
        Command::VerifyEs {
            v,
            n,
            caps,
            brute_force,
            trials,
            seed,
        } => {
            let vector = parse_percentile_vector(&v)?;
            let capacities = parse_caps(&caps)?;
            let es = es_condition(&vector, n, &capacities)?;
            let mut body = json!({ "es": es, "method": "closed-form" });
            if brute_force {
                let mut all_stable = true;
                let mut checked = 0usize;
                for t in 0..trials {
                    let instance = sample_positions(
                        &DistributionSpec::Uniform,
                        n,
                        capflp::harness::derive_seed(seed, n, t),
                    )?;
                    let placement = apply_percentile(&vector, &instance, &capacities)?;
                    let priority = PriorityRule::ascending(n);
                    let (stable, _) = check_equilibrium_stability(
                        &instance,
                        &placement,
                        &priority,
                        DEFAULT_NE_ENUMERATION_CAP,
                    )?;
                    checked += 1;
                    if !stable {
                        all_stable = false;
                        break;
                    }
                }
                body["brute_force"] = json!({
                    "instances": checked,
                    "stable_all": all_stable,
                });
            }
            emit(None, &body.to_string())
        }
        Command::BestVector { n, k1, k2, m, k } => {
            let report = match (m, k) {
                (Some(m), Some(k)) => match best_uniform_vector_m(n, k, m) {
                    Ok(report) => report.to_json(),
                    Err(Error::Infeasible(_)) => fallback_best_vector(n, m, k)?,
                    Err(e) => return Err(e),
                },
                _ => {
                    let k1 = k1.expect("clap enforces k1 without m");
                    let k2 = k2.ok_or_else(|| {
                        Error::InvalidParams("k2 is required alongside k1".into())
                    })?;
                    best_wg_vector(n, k1, k2)?.to_json()
                }
            };
            emit(None, &report.to_string())
        }
        Command::WorstCase {
            kind,
            n,
            caps,
            indices,
        } => {
            let capacities = parse_caps(&caps)?;
            let indices: Vec<usize> = match indices {
                Some(raw) => raw
                    .split(',')
                    .map(|part| {
                        part.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidParams(format!("bad index {part:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            let kind = match kind {
                WorstCaseKind::Wg => MechanismKind::WideGap,
                WorstCaseKind::Aio => MechanismKind::Aio,
                WorstCaseKind::Sbs => MechanismKind::Sbs,
                WorstCaseKind::AllAside => MechanismKind::AllAside,
                WorstCaseKind::UniformGrid => MechanismKind::UniformGrid,
            };
            let wc = worst_case_instance(kind, n, &capacities, &indices)?;
            emit(
                None,
                &json!({
                    "instance": wc.instance.positions(),
                    "lambda": wc.lambda,
                    "form": wc.form_label,
                    "ratio": wc.achieved_ratio,
                })
                .to_string(),
            )
        }
        Command::Ratio { instance, v, caps } => {
            let instance = load_instance(&instance)?;
            let vector = parse_percentile_vector(&v)?;
            let capacities = parse_caps(&caps)?;
            let priority = PriorityRule::ascending(instance.n());
            let ratio = empirical_ratio(&instance, &vector, &capacities, &priority)?;
            let ub = sw_upper_bound(&instance, &capacities)?;
            emit(
                None,
                &json!({
                    "ratio": ratio,
                    "sw_ub": ub,
                    "sw_mech": ub / ratio,
                })
                .to_string(),
            )
        }
        Command::Experiment {
            config,
            out,
            format,
            per_trial,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let config: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParams(format!("bad experiment config: {e}")))?;
            let report = run_experiment(&config)?;
            let format = match format {
                FileFormat::Json => ReportFormat::Json,
                FileFormat::Csv => ReportFormat::Csv,
            };
            emit_report(&report, format, per_trial, &out)?;
            emit(None, &json!({ "written": out }).to_string())
        }
        Command::AuditTruthful {
            v,
            instance,
            caps,
            grid_step,
            mean_control,
        } => {
            let instance = load_instance(&instance)?;
            let capacities = parse_caps(&caps)?;
            let grid = misreport_grid(grid_step)?;
            let priority = PriorityRule::ascending(instance.n());
            let vector = parse_percentile_vector(&v)?;
            let mut witness_body = serde_json::Value::Null;
            for agent in 0..instance.n() {
                let witness = if mean_control {
                    check_absolute_truthfulness(
                        |inst| mean_mechanism_placement(inst, &capacities),
                        &instance,
                        agent,
                        &grid,
                        &priority,
                    )?
                } else {
                    check_absolute_truthfulness(
                        |inst| apply_percentile(&vector, inst, &capacities),
                        &instance,
                        agent,
                        &grid,
                        &priority,
                    )?
                };
                if let Some(w) = witness {
                    witness_body = json!({
                        "agent": w.agent + 1,
                        "misreport": w.misreport,
                        "opponents": w.opponent_profile.to_one_based(),
                        "gain": w.gain,
                    });
                    break;
                }
            }
            emit(None, &json!({ "witness": witness_body }).to_string())
        }
    }
}

/// When the uniform spread is infeasible, group the facilities instead:
/// two groups on the outermost stable pair when the population allows it,
/// otherwise all of them on the median agent.
fn fallback_best_vector(n: usize, m: usize, k: usize) -> Result<serde_json::Value> {
    if 2 * m * k < n {
        let (a, b) = (1, n);
        let instance_free_ratio =
            capflp::analysis::ar_wg(n, m.div_ceil(2) * k, (m / 2) * k, a, b).ok();
        return Ok(json!({
            "indices": [a, b],
            "v": [0.0, 1.0],
            "assignment": [0, 1],
            "predicted_ratio": instance_free_ratio.map(|r| r.ratio),
            "case_label": "all-aside",
        }));
    }
    let median = n.div_ceil(2);
    let ratio = capflp::analysis::ar_aio_m(n, k, m)?;
    let v = median as f64 / n as f64;
    Ok(json!({
        "indices": vec![median; m],
        "v": vec![v; m],
        "assignment": (0..m).collect::<Vec<_>>(),
        "predicted_ratio": ratio.ratio,
        "case_label": "aio-median",
    }))
}

fn main() -> ExitCode {
    configure_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
