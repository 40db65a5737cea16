use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphoprof::pipeline::{
    benchmark, configure_threads, run_pipeline, write_outputs, BenchRow, ClustererChoice, DescriptorChoice, KChoice,
    PipelineConfig, SyntheticSource,
};
use morphoprof::synth::{export_dataset, generate_dataset};
use morphoprof::{Error, Result};

const DEFAULT_OUT: &str = "profile-out";

#[derive(Parser)]
#[command(name = "profile", version, about = "Powder-particle morphology profiling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment, describe and cluster a particle set, then write reports.
    Run(RunArgs),
    /// Time extraction and clustering over repeated runs.
    Bench(BenchArgs),
    /// Render a synthetic dataset as PGM masks plus labels.csv.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with the same keys as these flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of particle images (png, bmp, pgm).
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Synthetic dataset spec (JSON).
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// cdf100, fd10, zm12 or functional.
    #[arg(long)]
    descriptor: Option<DescriptorChoice>,
    /// kmeans, gmm or gpmix.
    #[arg(long)]
    clusterer: Option<ClustererChoice>,
    /// "auto" or a fixed cluster count.
    #[arg(long)]
    k: Option<KChoice>,
    /// Principal components kept before clustering.
    #[arg(long)]
    pca: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Comma-separated descriptors to time on the same particles
    /// (default: the configured descriptor).
    #[arg(long, value_delimiter = ',')]
    descriptors: Vec<DescriptorChoice>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn into_config(self) -> Result<PipelineConfig> {
        let base = match &self.config {
            Some(path) => Some(PipelineConfig::from_json_file(path)?),
            None => None,
        };
        let descriptor = self
            .descriptor
            .or(base.as_ref().map(|b| b.descriptor))
            .ok_or_else(|| Error::Config("--descriptor is required".into()))?;
        let clusterer = self
            .clusterer
            .or(base.as_ref().map(|b| b.clusterer))
            .ok_or_else(|| Error::Config("--clusterer is required".into()))?;
        let mut cfg = base.unwrap_or_else(|| PipelineConfig {
            input: None,
            synthetic: None,
            descriptor,
            clusterer,
            k: KChoice::Auto,
            pca: None,
            seed: 0,
            out: None,
            threads: None,
            funclust: Default::default(),
        });
        cfg.descriptor = descriptor;
        cfg.clusterer = clusterer;
        if let Some(dir) = self.input {
            cfg.input = Some(dir);
            cfg.synthetic = None;
        }
        if let Some(spec) = self.synthetic {
            cfg.synthetic = Some(SyntheticSource::File(spec));
            cfg.input = None;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if self.pca.is_some() {
            cfg.pca = self.pca;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.into_config()?;
    configure_threads(cfg.threads)?;
    let out = run_pipeline(&cfg)?;
    let dir = out_dir(&cfg);
    write_outputs(&out, &dir)?;
    let r = &out.report;
    println!("particles: {} (skipped {})", r.n_particles, r.skipped.len());
    println!("clusters:  {}", r.k);
    let shares: Vec<String> = r.shares.iter().map(|s| format!("{:.1}%", 100.0 * s)).collect();
    println!("shares:    {}", shares.join(" "));
    println!(
        "validity:  silhouette {:.4}  DB {:.4}  CH {:.1}",
        r.validity.silhouette, r.validity.davies_bouldin, r.validity.calinski_harabasz
    );
    if let Some(ari) = r.ari_vs_truth {
        println!("ARI vs truth: {ari:.4}");
    }
    println!(
        "{:.4} ms/particle; outputs in {}",
        r.timings.ms_per_particle,
        dir.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let cfg = args.run.into_config()?;
    configure_threads(cfg.threads)?;
    let descriptors = if args.descriptors.is_empty() {
        vec![cfg.descriptor]
    } else {
        args.descriptors
    };
    let rows = benchmark(&cfg, &descriptors, args.repeats)?;
    println!(
        "{:<12}{:<9}{:>9}{:>22}{:>22}{:>14}",
        "descriptor", "cluster", "n", "extraction s", "clustering s", "ms/particle"
    );
    for r in &rows {
        println!(
            "{:<12}{:<9}{:>9}{:>22}{:>22}{:>14.4}",
            r.descriptor.to_string(),
            r.clusterer.to_string(),
            r.n_particles,
            format!("{:.3} ({:.3})", r.extraction_mean_s, r.extraction_sd_s),
            format!("{:.3} ({:.3})", r.clustering_mean_s, r.clustering_sd_s),
            r.ms_per_particle
        );
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("bench.json"), serde_json::to_string_pretty(&rows)?)?;
        let mut csv = String::from(BenchRow::csv_header());
        csv.push('\n');
        for r in &rows {
            csv.push_str(&r.csv_line());
            csv.push('\n');
        }
        std::fs::write(dir.join("bench.csv"), csv)?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSource::File(args.spec).resolve()?;
    let data = generate_dataset(&spec)?;
    export_dataset(&data, &args.out)?;
    println!("{} masks written to {}", data.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
