use std::fs;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::settings::{build_setting, ExperimentConfig, Method};
use crate::baselines::{bimodularity_communities, projection_counts, BimodularityOptions};
use crate::bcv::{select, BcvConfig};
use crate::error::Result;
use crate::graph::{generate_sbm, LabelVector};
use crate::metrics::RecoveryTally;
use crate::rng::{derive_seed, TAG_REPLICATION};

/// Outcome of one method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub k1_hat: Option<usize>,
    pub k2_hat: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub n0: usize,
    pub rep: usize,
    pub seed: u64,
    pub n1: usize,
    pub n2: usize,
    pub edges: usize,
    /// Smallest community share on each side, `min_k n_rk / n_r`.
    pub balance1: f64,
    pub balance2: f64,
    pub outcomes: Vec<MethodOutcome>,
    /// Set when the graph itself could not be generated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTally {
    pub n0: usize,
    pub method: Method,
    pub tally: RecoveryTally,
    /// Replications excluded from the tally because they failed.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_secs: f64,
    /// Wall-clock per grid point, in grid order.
    pub per_n0_secs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub truth: (usize, usize),
    pub replications: Vec<ReplicationSummary>,
    pub tallies: Vec<MethodTally>,
    pub timings: Timings,
}

impl RunRecord {
    pub fn tally(&self, n0: usize, method: Method) -> Option<&MethodTally> {
        self.tallies.iter().find(|t| t.n0 == n0 && t.method == method)
    }
}

fn min_share(labels: &LabelVector) -> f64 {
    let counts = labels.counts();
    let min = counts.iter().copied().min().unwrap_or(0);
    min as f64 / labels.len().max(1) as f64
}

fn run_replication(config: &ExperimentConfig, n0: usize, rep: usize) -> ReplicationSummary {
    let generator = build_setting(config).expect("configuration validated before the sweep");
    let seed = derive_seed(config.seed, &[TAG_REPLICATION, n0 as u64, rep as u64]);
    let (n1, n2) = generator.node_counts(n0);
    let mut summary = ReplicationSummary {
        n0,
        rep,
        seed,
        n1,
        n2,
        edges: 0,
        balance1: 0.0,
        balance2: 0.0,
        outcomes: Vec::new(),
        error: None,
    };
    let generated = generator
        .spec(derive_seed(seed, &[0]))
        .and_then(|spec| generate_sbm(&spec, n1, n2, derive_seed(seed, &[1])));
    let (graph, c1, c2) = match generated {
        Ok(g) => g,
        Err(e) => {
            warn!("n0={n0} rep={rep}: generation failed: {e}");
            summary.error = Some(e.to_string());
            return summary;
        }
    };
    summary.edges = graph.n_edges();
    summary.balance1 = min_share(&c1);
    summary.balance2 = min_share(&c2);
    for &method in &config.methods {
        let method_seed = derive_seed(seed, &[2, method as u64]);
        let result = match method {
            Method::Bcv => {
                let cfg = BcvConfig {
                    seed: method_seed,
                    ..config.bcv.clone()
                };
                select(&graph, &cfg).map(|r| (r.k1_hat, r.k2_hat))
            }
            Method::Projection => projection_counts(&graph, method_seed),
            Method::Bimodularity => {
                let opts = BimodularityOptions {
                    max_modules: config.max_modules,
                    seed: method_seed,
                    ..BimodularityOptions::default()
                };
                bimodularity_communities(&graph, &opts).map(|b| b.side_counts())
            }
        };
        summary.outcomes.push(match result {
            Ok((k1, k2)) => MethodOutcome {
                method,
                k1_hat: Some(k1),
                k2_hat: Some(k2),
                error: None,
            },
            Err(e) => {
                warn!("n0={n0} rep={rep} {}: {e}", method.as_str());
                MethodOutcome {
                    method,
                    k1_hat: None,
                    k2_hat: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    summary
}

/// Runs every requested method on `reps` fresh graphs per grid point. Failed
/// replications are kept in the record and left out of the tallies.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let truth = build_setting(config)?.truth();
    let start = Instant::now();
    let mut replications = Vec::new();
    let mut tallies = Vec::new();
    let mut per_n0_secs = Vec::new();
    for &n0 in &config.n0 {
        let t = Instant::now();
        let reps: Vec<ReplicationSummary> = (0..config.reps)
            .into_par_iter()
            .map(|rep| run_replication(config, n0, rep))
            .collect();
        for &method in &config.methods {
            let mut failed = 0;
            let mut pairs = Vec::new();
            for r in &reps {
                match r.outcomes.iter().find(|o| o.method == method) {
                    Some(MethodOutcome {
                        k1_hat: Some(k1),
                        k2_hat: Some(k2),
                        ..
                    }) => pairs.push((*k1, *k2)),
                    _ => failed += 1,
                }
            }
            let tally = RecoveryTally::from_pairs(pairs, truth);
            let (a, b) = tally.rates();
            info!(
                "{} n0={n0} {}: recovery ({a:.2}, {b:.2}) over {} reps, {failed} failed",
                config.setting,
                method.as_str(),
                tally.reps
            );
            tallies.push(MethodTally {
                n0,
                method,
                tally,
                failed,
            });
        }
        replications.extend(reps);
        per_n0_secs.push(t.elapsed().as_secs_f64());
    }
    let record = RunRecord {
        config: config.clone(),
        truth,
        replications,
        tallies,
        timings: Timings {
            total_secs: start.elapsed().as_secs_f64(),
            per_n0_secs,
        },
    };
    if let Some(dir) = &config.output {
        write_run(&record, dir)?;
    }
    Ok(record)
}

#[derive(Serialize)]
struct TallyRow {
    setting: String,
    n0: usize,
    method: &'static str,
    reps: usize,
    failed: usize,
    hits1: usize,
    hits2: usize,
    rate1: f64,
    rate2: f64,
}

#[derive(Serialize)]
struct ReplicationRow<'a> {
    n0: usize,
    rep: usize,
    seed: u64,
    n1: usize,
    n2: usize,
    edges: usize,
    balance1: f64,
    balance2: f64,
    method: &'static str,
    k1_hat: Option<usize>,
    k2_hat: Option<usize>,
    error: Option<&'a str>,
}

/// Writes `summary.csv`, `replications.csv` and `manifest.json` into `dir`.
/// Timings only appear in the manifest, so the CSVs are reproducible byte for byte.
pub fn write_run(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for t in &record.tallies {
        let (rate1, rate2) = t.tally.rates();
        w.serialize(TallyRow {
            setting: record.config.setting.to_string(),
            n0: t.n0,
            method: t.method.as_str(),
            reps: t.tally.reps,
            failed: t.failed,
            hits1: t.tally.hits1,
            hits2: t.tally.hits2,
            rate1,
            rate2,
        })?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("replications.csv"))?;
    for r in &record.replications {
        let row = |method: &'static str, k1_hat, k2_hat, error| ReplicationRow {
            n0: r.n0,
            rep: r.rep,
            seed: r.seed,
            n1: r.n1,
            n2: r.n2,
            edges: r.edges,
            balance1: r.balance1,
            balance2: r.balance2,
            method,
            k1_hat,
            k2_hat,
            error,
        };
        if let Some(e) = &r.error {
            w.serialize(row("generation", None, None, Some(e)))?;
        }
        for o in &r.outcomes {
            w.serialize(row(o.method.as_str(), o.k1_hat, o.k2_hat, o.error.as_deref()))?;
        }
    }
    w.flush()?;

    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": record.config,
        "master_seed": record.config.seed,
        "replication_seeds": record.replications.iter().map(|r| r.seed).collect::<Vec<_>>(),
        "truth": record.truth,
        "tallies": record.tallies,
        "timings": record.timings,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
