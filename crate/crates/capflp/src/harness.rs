//! Reproducible Monte-Carlo experiments: expected-welfare and per-instance
//! approximation ratios of percentile mechanisms under position
//! distributions, with report persistence.
//!
//! Determinism contract: trial `t` of population size `n` always draws its
//! instance from `derive_seed(seed, n, t)`, so adding mechanisms or
//! resizing the grid never perturbs the instance streams, and parallel
//! execution aggregates an order-preserved trial vector.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{mechanism_welfare, sw_upper_bound};
use crate::distribution::{sample_positions, DistributionSpec};
use crate::error::{Error, Result};
use crate::instance::CapacityVector;
use crate::mechanisms::{apply_percentile, best_wg_vector, es_condition, PercentileVector};
use crate::fcfs::PriorityRule;

/// SplitMix64 finalizer.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Per-trial seed: `splitmix64(splitmix64(seed ^ C1*n) ^ C2*t)`.
pub fn derive_seed(seed: u64, n: usize, trial: usize) -> u64 {
    let with_n = splitmix64(seed ^ (n as u64).wrapping_mul(0xD1B54A32D192ED03));
    splitmix64(with_n ^ (trial as u64).wrapping_mul(0x9E3779B97F4A7C15))
}

const BOOTSTRAP_RESAMPLES: usize = 2000;
const BOOTSTRAP_SALT: u64 = 0xB007;

/// Mechanism named in a config: a strategy keyword or an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MechanismSpec {
    /// "best" (tailored wide-gap vector per population and capacities) or
    /// "extremes" (facilities on the outermost agents).
    Named(String),
    Explicit {
        v: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        assignment: Option<Vec<usize>>,
    },
}

impl MechanismSpec {
    pub fn label(&self) -> String {
        match self {
            MechanismSpec::Named(name) => name.clone(),
            MechanismSpec::Explicit { v, .. } => format!(
                "v=[{}]",
                v.iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }

    /// Resolve to a concrete percentile vector for a population of `n`
    /// agents with capacities `k1 >= k2`.
    fn resolve(&self, n: usize, k1: usize, k2: usize) -> Result<PercentileVector> {
        match self {
            MechanismSpec::Named(name) => match name.as_str() {
                "best" => Ok(best_wg_vector(n, k1, k2)?.vector),
                "extremes" => PercentileVector::new(vec![0.0, 1.0]),
                other => Err(Error::InvalidParams(format!(
                    "unknown mechanism name {other:?}; expected \"best\" or \"extremes\""
                ))),
            },
            MechanismSpec::Explicit { v, assignment } => match assignment {
                Some(order) => PercentileVector::with_assignment(v.clone(), order.clone()),
                None => PercentileVector::new(v.clone()),
            },
        }
    }
}

/// Which ratio metrics to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    Bayesian,
    AverageCase,
    Both,
}

impl MetricChoice {
    fn wants_bayesian(&self) -> bool {
        matches!(self, MetricChoice::Bayesian | MetricChoice::Both)
    }
    fn wants_average(&self) -> bool {
        matches!(self, MetricChoice::AverageCase | MetricChoice::Both)
    }
}

/// Full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mechanisms: Vec<MechanismSpec>,
    pub distribution: DistributionSpec,
    pub n_values: Vec<usize>,
    /// Capacity fractions `(alpha_1, alpha_2)`: `k_j = max(1, floor(alpha_j * n))`.
    pub capacity_fractions: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub metric: MetricChoice,
}

impl ExperimentConfig {
    fn capacities_for(&self, n: usize) -> Result<(usize, usize)> {
        let mut ks: Vec<usize> = self
            .capacity_fractions
            .iter()
            .map(|&alpha| ((alpha * n as f64).floor() as usize).max(1))
            .collect();
        ks.sort_unstable_by(|a, b| b.cmp(a));
        let (k1, k2) = (ks[0], ks[1]);
        if k1 + k2 >= n {
            return Err(Error::CapacityInfeasible {
                total_capacity: k1 + k2,
                agents: n,
            });
        }
        Ok((k1, k2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidParams("no mechanisms configured".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidParams("no population sizes configured".into()));
        }
        if self.capacity_fractions.len() != 2 {
            return Err(Error::UnsupportedArity {
                m: self.capacity_fractions.len(),
            });
        }
        if self
            .capacity_fractions
            .iter()
            .any(|a| !a.is_finite() || *a <= 0.0 || *a >= 1.0)
        {
            return Err(Error::InvalidParams(
                "capacity fractions must lie strictly between 0 and 1".into(),
            ));
        }
        self.distribution.validate()?;
        for &n in &self.n_values {
            self.capacities_for(n)?;
        }
        Ok(())
    }
}

/// Mean and 95% confidence band of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

/// One trial's welfare pair for one mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sw_ub: f64,
    pub sw_mech: f64,
    pub ratio: f64,
}

/// Aggregates for one (mechanism, n) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportCell {
    pub mechanism: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayesian: Option<MetricStat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average_case: Option<MetricStat>,
    pub per_trial: Vec<TrialRecord>,
}

/// Full experiment result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioReport {
    pub cells: Vec<ReportCell>,
}

impl RatioReport {
    pub fn cell(&self, mechanism: &str, n: usize) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.mechanism == mechanism && c.n == n)
    }
}

fn percentile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn bootstrap_ratio_of_means(
    records: &[TrialRecord],
    seed: u64,
) -> MetricStat {
    let mean_ub: f64 = records.iter().map(|r| r.sw_ub).sum::<f64>() / records.len() as f64;
    let mean_mech: f64 = records.iter().map(|r| r.sw_mech).sum::<f64>() / records.len() as f64;
    let point = mean_ub / mean_mech;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resampled = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut ub = 0.0;
        let mut mech = 0.0;
        for _ in 0..records.len() {
            let r = &records[rng.gen_range(0..records.len())];
            ub += r.sw_ub;
            mech += r.sw_mech;
        }
        resampled.push(ub / mech);
    }
    resampled.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    MetricStat {
        mean: point,
        ci95_lo: percentile_of_sorted(&resampled, 0.025),
        ci95_hi: percentile_of_sorted(&resampled, 0.975),
    }
}

fn normal_ci_of_mean(values: &[f64]) -> MetricStat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let half = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        1.96 * (var / n).sqrt()
    } else {
        0.0
    };
    MetricStat {
        mean,
        ci95_lo: mean - half,
        ci95_hi: mean + half,
    }
}

/// Run the configured experiment grid. Every mechanism is resolved and
/// checked for equilibrium stability on every (n, capacities) pair before
/// any sampling happens.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RatioReport> {
    config.validate()?;
    // Resolve every (mechanism, n) pair up front; stability failures name
    // the offending combination.
    let mut resolved: Vec<Vec<PercentileVector>> = Vec::new();
    for &n in &config.n_values {
        let (k1, k2) = config.capacities_for(n)?;
        let caps = CapacityVector::new(vec![k1, k2])?;
        let mut row = Vec::new();
        for spec in &config.mechanisms {
            let vector = spec.resolve(n, k1, k2)?;
            if !es_condition(&vector, n, &caps)? {
                return Err(Error::NotEquilibriumStable(format!(
                    "mechanism {} is unstable at n = {n}, k = ({k1}, {k2})",
                    spec.label()
                )));
            }
            row.push(vector);
        }
        resolved.push(row);
    }

    let mut cells: Vec<ReportCell> = Vec::new();
    for (n_idx, &n) in config.n_values.iter().enumerate() {
        let (k1, k2) = config.capacities_for(n)?;
        let caps = CapacityVector::new(vec![k1, k2])?;
        let vectors = &resolved[n_idx];
        let priority = PriorityRule::ascending(n);

        // One instance stream per n; mechanisms share the upper bound.
        let trial_rows: Vec<(f64, Vec<f64>)> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, Vec<f64>)> {
                let instance =
                    sample_positions(&config.distribution, n, derive_seed(config.seed, n, t))?;
                let ub = sw_upper_bound(&instance, &caps)?;
                let mut per_mechanism = Vec::with_capacity(vectors.len());
                for vector in vectors {
                    let placement = apply_percentile(vector, &instance, &caps)?;
                    per_mechanism.push(mechanism_welfare(&instance, &placement, &priority)?);
                }
                Ok((ub, per_mechanism))
            })
            .collect::<Result<Vec<_>>>()?;

        for (mech_idx, spec) in config.mechanisms.iter().enumerate() {
            let records: Vec<TrialRecord> = trial_rows
                .iter()
                .map(|(ub, mechs)| TrialRecord {
                    sw_ub: *ub,
                    sw_mech: mechs[mech_idx],
                    ratio: ub / mechs[mech_idx],
                })
                .collect();
            let bayesian = config.metric.wants_bayesian().then(|| {
                bootstrap_ratio_of_means(
                    &records,
                    derive_seed(config.seed ^ BOOTSTRAP_SALT, n, mech_idx),
                )
            });
            let average_case = config.metric.wants_average().then(|| {
                normal_ci_of_mean(&records.iter().map(|r| r.ratio).collect::<Vec<_>>())
            });
            cells.push(ReportCell {
                mechanism: spec.label(),
                n,
                trials: config.trials,
                seed: config.seed,
                bayesian,
                average_case,
                per_trial: records,
            });
        }
    }
    Ok(RatioReport { cells })
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Serialize a report. CSV columns are
/// `mechanism,n,metric,mean,ci95_lo,ci95_hi,trials,seed`; with
/// `per_trial`, each cell additionally emits one `trial` row per trial
/// carrying (ratio, sw_ub, sw_mech, trial index) in the numeric columns.
pub fn write_report<W: Write>(
    report: &RatioReport,
    format: ReportFormat,
    per_trial: bool,
    writer: &mut W,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            if per_trial {
                serde_json::to_writer_pretty(&mut *writer, report)?;
            } else {
                let slim = RatioReport {
                    cells: report
                        .cells
                        .iter()
                        .map(|c| ReportCell {
                            per_trial: Vec::new(),
                            ..c.clone()
                        })
                        .collect(),
                };
                serde_json::to_writer_pretty(&mut *writer, &slim)?;
            }
            writer.write_all(b"\n")?;
            Ok(())
        }
        ReportFormat::Csv => {
            let mut csv_writer = csv::Writer::from_writer(writer);
            csv_writer
                .write_record([
                    "mechanism", "n", "metric", "mean", "ci95_lo", "ci95_hi", "trials", "seed",
                ])
                .map_err(csv_to_io)?;
            for cell in &report.cells {
                let mut metric_rows: Vec<(&str, &MetricStat)> = Vec::new();
                if let Some(stat) = &cell.bayesian {
                    metric_rows.push(("bayesian", stat));
                }
                if let Some(stat) = &cell.average_case {
                    metric_rows.push(("average_case", stat));
                }
                for (metric, stat) in metric_rows {
                    csv_writer
                        .write_record([
                            cell.mechanism.clone(),
                            cell.n.to_string(),
                            metric.to_string(),
                            format!("{:.12}", stat.mean),
                            format!("{:.12}", stat.ci95_lo),
                            format!("{:.12}", stat.ci95_hi),
                            cell.trials.to_string(),
                            cell.seed.to_string(),
                        ])
                        .map_err(csv_to_io)?;
                }
                if per_trial {
                    for (t, record) in cell.per_trial.iter().enumerate() {
                        csv_writer
                            .write_record([
                                cell.mechanism.clone(),
                                cell.n.to_string(),
                                "trial".to_string(),
                                format!("{:.12}", record.ratio),
                                format!("{:.12}", record.sw_ub),
                                format!("{:.12}", record.sw_mech),
                                t.to_string(),
                                cell.seed.to_string(),
                            ])
                            .map_err(csv_to_io)?;
                    }
                }
            }
            csv_writer.flush()?;
            Ok(())
        }
    }
}

fn csv_to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Write a report to a file path.
pub fn emit_report(
    report: &RatioReport,
    format: ReportFormat,
    per_trial: bool,
    path: &Path,
) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_report(report, format, per_trial, &mut file)
}

/// Honor the `CAPFLP_THREADS` environment variable for the global thread
/// pool. Silently keeps the default when unset, unparsable, or already
/// initialized.
pub fn configure_thread_pool_from_env() {
    if let Ok(raw) = std::env::var("CAPFLP_THREADS") {
        if let Ok(threads) = raw.trim().parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            mechanisms: vec![
                MechanismSpec::Named("best".into()),
                MechanismSpec::Named("extremes".into()),
            ],
            distribution: DistributionSpec::Uniform,
            n_values: vec![10, 20],
            capacity_fractions: vec![0.2, 0.2],
            trials: 25,
            seed: 7,
            metric: MetricChoice::Both,
        }
    }

    #[test]
    fn derive_seed_is_stable_and_spread() {
        assert_eq!(derive_seed(1, 10, 0), derive_seed(1, 10, 0));
        assert_ne!(derive_seed(1, 10, 0), derive_seed(1, 10, 1));
        assert_ne!(derive_seed(1, 10, 0), derive_seed(1, 20, 0));
        assert_ne!(derive_seed(1, 10, 0), derive_seed(2, 10, 0));
    }

    #[test]
    fn experiment_is_deterministic() {
        let config = small_config();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_report(&a, ReportFormat::Csv, true, &mut buf_a).unwrap();
        write_report(&b, ReportFormat::Csv, true, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn serial_and_parallel_runs_agree() {
        let config = small_config();
        let parallel = run_experiment(&config).unwrap();
        let serial_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = serial_pool.install(|| run_experiment(&config).unwrap());
        for (a, b) in parallel.cells.iter().zip(serial.cells.iter()) {
            let (sa, sb) = (a.bayesian.unwrap(), b.bayesian.unwrap());
            assert!((sa.mean - sb.mean).abs() < 1e-12);
            let (sa, sb) = (a.average_case.unwrap(), b.average_case.unwrap());
            assert!((sa.mean - sb.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn ratios_are_at_least_one() {
        let report = run_experiment(&small_config()).unwrap();
        for cell in &report.cells {
            assert!(cell.bayesian.unwrap().mean >= 1.0 - 1e-9);
            assert!(cell.average_case.unwrap().mean >= 1.0 - 1e-9);
            for record in &cell.per_trial {
                assert!(record.ratio >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn near_point_mass_population_is_near_optimal() {
        let config = ExperimentConfig {
            mechanisms: vec![MechanismSpec::Named("best".into())],
            distribution: DistributionSpec::Beta {
                alpha: 500.0,
                beta: 500.0,
            },
            n_values: vec![10],
            capacity_fractions: vec![0.2, 0.2],
            trials: 50,
            seed: 11,
            metric: MetricChoice::Both,
        };
        let report = run_experiment(&config).unwrap();
        let cell = report.cell("best", 10).unwrap();
        assert!((cell.bayesian.unwrap().mean - 1.0).abs() < 0.01);
        assert!((cell.average_case.unwrap().mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn unstable_mechanism_is_rejected_by_name() {
        let config = ExperimentConfig {
            mechanisms: vec![MechanismSpec::Explicit {
                // Indices (3, 5) at n = 10: gap 2 below k1 + k2 - 1 = 3.
                v: vec![0.3, 0.5],
                assignment: None,
            }],
            distribution: DistributionSpec::Uniform,
            n_values: vec![10],
            capacity_fractions: vec![0.2, 0.2],
            trials: 5,
            seed: 1,
            metric: MetricChoice::Both,
        };
        let err = run_experiment(&config).unwrap_err();
        match err {
            Error::NotEquilibriumStable(msg) => {
                assert!(msg.contains("n = 10"), "{msg}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn csv_shapes() {
        let report = RatioReport {
            cells: vec![ReportCell {
                mechanism: "best".into(),
                n: 10,
                trials: 3,
                seed: 5,
                bayesian: Some(MetricStat {
                    mean: 1.01,
                    ci95_lo: 1.0,
                    ci95_hi: 1.02,
                }),
                average_case: None,
                per_trial: vec![
                    TrialRecord {
                        sw_ub: 4.0,
                        sw_mech: 4.0,
                        ratio: 1.0,
                    };
                    3
                ],
            }],
        };
        let mut buf = Vec::new();
        write_report(&report, ReportFormat::Csv, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("mechanism,n,metric,mean,ci95_lo,ci95_hi,trials,seed"));

        let mut buf = Vec::new();
        write_report(&report, ReportFormat::Csv, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Header + one metric row + one detail row per trial.
        assert_eq!(text.lines().count(), 2 + 3);

        let empty = RatioReport { cells: vec![] };
        let mut buf = Vec::new();
        write_report(&empty, ReportFormat::Csv, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let report = run_experiment(&ExperimentConfig {
            trials: 4,
            n_values: vec![10],
            ..small_config()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_report(&report, ReportFormat::Json, true, &mut buf).unwrap();
        let parsed: RatioReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed.cells.len(), report.cells.len());
        assert_eq!(parsed.cells[0].per_trial.len(), 4);
    }

    #[test]
    fn config_json_round_trip() {
        let raw = r#"{
            "mechanisms": ["best", "extremes", {"v": [0.1, 0.9]}],
            "distribution": {"kind": "mixture", "weights": [0.34, 0.33, 0.33], "alpha": 5.0, "beta": 5.0},
            "n_values": [10, 20],
            "capacity_fractions": [0.2, 0.2],
            "trials": 100,
            "seed": 42,
            "metric": "both"
        }"#;
        let config: ExperimentConfig = serde_json::from_str(raw).unwrap();
        assert_eq!(config.mechanisms.len(), 3);
        assert_eq!(config.mechanisms[0], MechanismSpec::Named("best".into()));
        config.validate().unwrap();
    }
}
