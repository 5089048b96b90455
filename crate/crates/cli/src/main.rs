use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::de::DeserializeOwned;
use serde::Serialize;

use bcv_core::baselines::{bimodularity_communities, modularity_communities, project, BimodularityOptions};
use bcv_core::bcv::{BcvConfig, DRule, PenaltyForm, SplitKind};
use bcv_core::graph::{EdgelistOptions, Side};
use bcv_core::harness::{
    emit_heatmap, run_dataset, run_experiment, write_dataset_outputs, Balance, DatasetSource, ExperimentConfig, Method,
    SettingId,
};

#[derive(Parser)]
#[command(
    name = "bcv",
    version,
    about = "Select community counts of bipartite networks by cross-validation"
)]
struct Cli {
    /// Log filter, e.g. `info` or `bcv_core=debug`.
    #[arg(long, global = true, default_value = "info")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep over a simulation setting.
    Simulate(SimulateArgs),
    /// Select (K1, K2) for one dataset and export labels and the loss surface.
    Select(DatasetArgs),
    /// Run a baseline on one dataset.
    Baseline(BaselineArgs),
    /// Write heatmap CSVs of the loss surface for one dataset.
    Surface(SurfaceArgs),
}

#[derive(Args, Default)]
struct BcvFlags {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Penalty constant.
    #[arg(long = "C", alias = "c")]
    c: Option<f64>,
    #[arg(long, value_enum)]
    penalty_form: Option<PenaltyArg>,
    /// Frontier steps without improvement before stopping, or `inf`.
    #[arg(long)]
    patience: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_frontier: Option<usize>,
    /// `product` or a `K1,K2,d` CSV path.
    #[arg(long)]
    d_rule: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Kfold,
    Bernoulli,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenaltyArg {
    Geometric,
    RhoSquaredLog,
}

#[derive(Clone, Copy, ValueEnum)]
enum BalanceArg {
    Balanced,
    Unbalanced,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML file; its keys override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    setting: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated grid of n0 (n1 under polynomial growth).
    #[arg(long, value_delimiter = ',')]
    n0: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    balance: Option<BalanceArg>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated subset of bcv, projection, bimodularity.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    max_modules: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    bcv: BcvFlags,
}

#[derive(Args)]
struct InputArgs {
    /// Edgelist path or builtin id (`southern-women`).
    dataset: String,
    /// Node ids in the file start at 0.
    #[arg(long)]
    zero_indexed: bool,
    /// Field separator (default: whitespace).
    #[arg(long)]
    delimiter: Option<char>,
    /// First line holds `n1 n2`.
    #[arg(long)]
    header: bool,
}

impl InputArgs {
    fn source(&self) -> DatasetSource {
        DatasetSource::parse(
            &self.dataset,
            EdgelistOptions {
                one_indexed: !self.zero_indexed,
                delimiter: self.delimiter,
                header: self.header,
            },
        )
    }
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `id,<class>` CSV for side-one nodes; side-one labels are scored by ARI against it.
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// TOML file of selection settings; its keys override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "bcv-out")]
    output: PathBuf,
    #[command(flatten)]
    bcv: BcvFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Projection,
    Bimodularity,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: BaselineArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    max_modules: usize,
    /// Write labels CSV and a JSON summary here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Long-format heatmap CSV; the slice goes next to it.
    #[arg(long, default_value = "heatmap.csv")]
    output: PathBuf,
    /// K1 of the conditional slice (default: the selected K1).
    #[arg(long)]
    slice_k1: Option<usize>,
    #[command(flatten)]
    bcv: BcvFlags,
}

impl BcvFlags {
    fn apply(&self, cfg: &mut BcvConfig) -> Result<()> {
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Kfold => SplitKind::Kfold,
                ModeArg::Bernoulli => SplitKind::Bernoulli,
            };
        }
        if let Some(p) = self.penalty_form {
            cfg.penalty_form = match p {
                PenaltyArg::Geometric => PenaltyForm::Geometric,
                PenaltyArg::RhoSquaredLog => PenaltyForm::RhoSquaredLog,
            };
        }
        if let Some(p) = &self.patience {
            cfg.patience = if p == "inf" {
                None
            } else {
                Some(p.parse().with_context(|| format!("bad patience `{p}`"))?)
            };
        }
        if let Some(d) = &self.d_rule {
            cfg.d_rule = if d == "product" {
                DRule::Product
            } else {
                DRule::from_table(d)?
            };
        }
        set(&mut cfg.folds, self.folds);
        set(&mut cfg.w, self.w);
        set(&mut cfg.replications, self.replications);
        set(&mut cfg.c, self.c);
        set(&mut cfg.restarts, self.restarts);
        set(&mut cfg.seed, self.seed);
        if self.max_frontier.is_some() {
            cfg.max_frontier = self.max_frontier;
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Values from `file` replace the corresponding values of `flags`.
fn overlay<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>) -> Result<T> {
    let Some(path) = file else {
        return Ok(toml::from_str(&toml::to_string(flags)?)?);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let over: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut base: toml::Table = toml::from_str(&toml::to_string(flags)?)?;
    merge(&mut base, over);
    toml::Value::Table(base)
        .try_into()
        .with_context(|| format!("invalid configuration in {}", path.display()))
}

fn bcv_config(flags: &BcvFlags, file: Option<&Path>) -> Result<BcvConfig> {
    let mut cfg = BcvConfig::default();
    flags.apply(&mut cfg)?;
    let cfg = overlay(&cfg, file)?;
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(s) = &args.setting {
        cfg.setting = s.parse::<SettingId>()?;
    }
    set(&mut cfg.r, args.r);
    set(&mut cfg.n0, args.n0.clone());
    if let Some(b) = args.balance {
        cfg.balance = match b {
            BalanceArg::Balanced => Balance::Balanced,
            BalanceArg::Unbalanced => Balance::Unbalanced,
        };
    }
    set(&mut cfg.reps, args.reps);
    if let Some(m) = &args.methods {
        cfg.methods = m.iter().map(|s| s.parse::<Method>()).collect::<Result<_, _>>()?;
    }
    set(&mut cfg.max_modules, args.max_modules);
    if args.output.is_some() {
        cfg.output = args.output.clone();
    }
    args.bcv.apply(&mut cfg.bcv)?;
    let cfg = overlay(&cfg, args.config.as_deref())?;
    cfg.validate()?;
    let record = run_experiment(&cfg)?;
    println!("setting,n0,method,reps,failed,rate1,rate2");
    for t in &record.tallies {
        let (a, b) = t.tally.rates();
        println!(
            "{},{},{},{},{},{a:.3},{b:.3}",
            cfg.setting,
            t.n0,
            t.method.as_str(),
            t.tally.reps,
            t.failed
        );
    }
    if let Some(dir) = &cfg.output {
        info!("wrote {}", dir.display());
    }
    Ok(())
}

fn select(args: &DatasetArgs) -> Result<()> {
    let cfg = bcv_config(&args.bcv, args.config.as_deref())?;
    let graph = args.input.source().load()?;
    let metadata = args.metadata.as_deref().map(|p| (p, !args.input.zero_indexed));
    let report = run_dataset(&graph, &cfg, metadata)?;
    write_dataset_outputs(&report, &cfg, &args.output)?;
    println!("K1_hat={} K2_hat={}", report.result.k1_hat, report.result.k2_hat);
    if let Some(m) = &report.metadata {
        println!("ARI({})={:.4} over {} nodes", m.column, m.ari, m.matched_nodes);
    }
    info!("wrote {}", args.output.display());
    Ok(())
}

fn baseline(args: &BaselineArgs) -> Result<()> {
    let graph = args.input.source().load()?;
    let (labels1, labels2, extra) = match args.method {
        BaselineArg::Projection => {
            let l1 = modularity_communities(&project(&graph, Side::One), args.seed)?;
            let l2 = modularity_communities(&project(&graph, Side::Two), args.seed)?;
            (l1, l2, serde_json::Value::Null)
        }
        BaselineArg::Bimodularity => {
            let opts = BimodularityOptions {
                max_modules: args.max_modules,
                seed: args.seed,
                ..BimodularityOptions::default()
            };
            let b = bimodularity_communities(&graph, &opts)?;
            let extra = serde_json::json!({ "bimodularity": b.modularity, "modules": b.modules });
            (b.labels1, b.labels2, extra)
        }
    };
    let (k1, k2) = (labels1.n_nonempty(), labels2.n_nonempty());
    println!("K1={k1} K2={k2}");
    if let Some(dir) = &args.output {
        fs::create_dir_all(dir)?;
        let mut text = String::from("side,node,label\n");
        for (side, labels) in [(1, &labels1), (2, &labels2)] {
            for (node, label) in labels.as_slice().iter().enumerate() {
                text.push_str(&format!("{side},{node},{label}\n"));
            }
        }
        fs::write(dir.join("labels.csv"), text)?;
        let summary = serde_json::json!({ "k1": k1, "k2": k2, "seed": args.seed, "details": extra });
        fs::write(dir.join("baseline.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(())
}

fn surface(args: &SurfaceArgs) -> Result<()> {
    let cfg = bcv_config(&args.bcv, args.config.as_deref())?;
    let graph = args.input.source().load()?;
    let result = bcv_core::select(&graph, &cfg)?;
    if let Some(k1) = args.slice_k1 {
        if result.slice_k1(k1).is_empty() {
            bail!("K1 = {k1} was never visited");
        }
    }
    let slice = emit_heatmap(&result, &args.output, args.slice_k1)?;
    println!(
        "K1_hat={} K2_hat={} surface={} slice={}",
        result.k1_hat,
        result.k2_hat,
        args.output.display(),
        slice.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Select(a) => select(a),
        Command::Baseline(a) => baseline(a),
        Command::Surface(a) => surface(a),
    }
}
