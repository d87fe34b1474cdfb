use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stcluster::corpus::load_embeddings;
use stcluster::graph::knn_graph_from_features;
use stcluster::pipeline::{load_inputs, run_pipeline, run_sweep, PipelineConfig, SweepAxis};
use stcluster::{Error, Result};

#[derive(Parser)]
#[command(name = "stcluster", version, about = "Clustering-oriented fine-tuning of short-text embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set ae_epochs=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed; shorthand for `--set base_seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured pipeline and write its report.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Repeat the pipeline over several values of one hyperparameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `epochs` or `layer_spec`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. `5,15,30` or `d:500:2000:20,d:256:512:20`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Build the cosine KNN text graph and write it as an edge list.
    ExportGraph {
        #[command(flatten)]
        common: Common,
    },
    /// Print a summary of an embedding file.
    InspectEmbeddings {
        #[command(flatten)]
        common: Common,
        /// Embedding file; defaults to the configured `embeddings` path.
        path: Option<PathBuf>,
    },
}

fn config(common: &Common) -> Result<PipelineConfig> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("base_seed={seed}"));
    }
    PipelineConfig::load(common.config.as_deref(), &overrides)
}

fn export_graph(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let g = knn_graph_from_features(inputs.x.view(), cfg.knn_k)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_owned(),
        source: e,
    })?;
    let path = out.join("graph.tsv");
    g.write_edge_list(&path)?;
    println!("nodes\t{}", g.n());
    println!("edges\t{}", g.num_edges());
    if let Some(labels) = &inputs.labels {
        let l = labels.labels();
        let within = g.edges().iter().filter(|&&(i, j)| l[i] == l[j]).count();
        println!("within_label_fraction\t{:.4}", within as f64 / g.num_edges().max(1) as f64);
    }
    println!("written\t{}", path.display());
    Ok(())
}

fn inspect(path: &Path) -> Result<()> {
    let m = load_embeddings(path)?;
    let norms: Vec<f64> = (0..m.n())
        .map(|i| m.row(i).iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt())
        .collect();
    println!("rows\t{}", m.n());
    println!("dims\t{}", m.d());
    println!("ids\t{}", if m.ids().is_some() { "yes" } else { "no" });
    if !norms.is_empty() {
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let max = norms.iter().copied().fold(0.0, f64::max);
        println!("norm_mean\t{mean:.6}");
        println!("norm_min\t{min:.6}");
        println!("norm_max\t{max:.6}");
        println!("zero_rows\t{}", norms.iter().filter(|&&n| n == 0.0).count());
    }
    if let Some(ids) = m.ids() {
        for id in ids.iter().take(5) {
            println!("id\t{id}");
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common } => {
            let cfg = config(&common)?;
            let report = run_pipeline(&cfg, &common.out)?;
            match &report.metrics {
                Some(m) => println!(
                    "{}: acc {:.4} +/- {:.4}, nmi {:.4} +/- {:.4} over {} runs",
                    cfg.pipeline.name(),
                    m.acc_mean,
                    m.acc_std,
                    m.nmi_mean,
                    m.nmi_std,
                    m.runs
                ),
                None => println!("{}: {} runs written to {}", cfg.pipeline.name(), report.runs.len(), common.out.display()),
            }
            Ok(())
        }
        Command::Sweep { common, axis, values } => {
            let cfg = config(&common)?;
            let rows = run_sweep(&cfg, axis.parse::<SweepAxis>()?, &values, &common.out)?;
            println!("value,acc_mean,acc_std,nmi_mean,nmi_std");
            for r in &rows {
                println!("{},{},{},{},{}", r.value, r.acc_mean, r.acc_std, r.nmi_mean, r.nmi_std);
            }
            Ok(())
        }
        Command::ExportGraph { common } => {
            let cfg = config(&common)?;
            cfg.validate()?;
            export_graph(&cfg, &common.out)
        }
        Command::InspectEmbeddings { common, path } => {
            let path = match path {
                Some(p) => p,
                None => config(&common)?
                    .embeddings
                    .ok_or_else(|| Error::Config("no embeddings path given".into()))?,
            };
            inspect(&path)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
