//! Command-line benchmark driver for coupled matrix-tensor factorization.
//!
//! Exit codes: 0 success, 2 input parse error, 3 dimension/argument error,
//! 4 solver hit an iteration/evaluation cap (or line-search failure)
//! without converging.

use clap::{Args, Parser, Subcommand};
use cmtf_bench::experiments::{
    self, clustering_csv, clustering_svg, fit_files, parse_scenario, parse_weight_mode,
    run_clustering_demo, run_missing_curve, scenario_name, weight_mode_name, Algorithm,
    ExperimentPlan,
};
use cmtf_core::io;
use cmtf_core::solver::StopReason;
use cmtf_core::synth::{gen_mask, gen_scenario, Scenario, ScenarioConfig, WeightMode};
use cmtf_core::CmtfError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cmtf-bench", version, about = "Coupled matrix-tensor factorization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic coupled dataset and write it as text files.
    Gen(GenArgs),
    /// Fit a model to data files and write the factors and a report.
    Fit(FitArgs),
    /// Run the accuracy-table sweep and write raw + aggregate CSVs.
    Tables(TablesArgs),
    /// Run the missing-data recovery curve.
    MissingCurve(MissingArgs),
    /// Run the clustering demonstration and report purities.
    Clustering(ClusteringArgs),
    /// Recompute an aggregate CSV from its raw CSV and compare.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// tensor-matrix | tensor-tensor | tensor-two-matrices (or 1|2|3)
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    /// Relative noise level.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// unit | random-integer
    #[arg(long, default_value = "unit", value_parser = parse_weight_mode)]
    weights: WeightMode,
    #[arg(long)]
    seed: u64,
    /// Fraction of tensor entries to mark missing (writes mask.txt).
    #[arg(long)]
    missing: Option<f64>,
    /// Seed for the missing-entry mask (default: seed + 1).
    #[arg(long)]
    mask_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_side_spec(s: &str) -> Result<(usize, PathBuf), String> {
    let (mode, path) = s
        .split_once(':')
        .ok_or_else(|| format!("side spec {:?} must look like MODE:PATH", s))?;
    let mode = mode
        .parse()
        .map_err(|_| format!("bad mode in side spec {:?}", s))?;
    Ok((mode, PathBuf::from(path)))
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// Optional binary mask tensor of known entries.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Coupled matrix as MODE:PATH; repeatable.
    #[arg(long = "side", value_parser = parse_side_spec)]
    sides: Vec<(usize, PathBuf)>,
    #[arg(long)]
    rank: usize,
    /// opt | als
    #[arg(long, default_value = "opt")]
    algo: Algorithm,
    /// Seed for initialization columns not determined by the data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    /// Comma-separated scenario list.
    #[arg(long, value_delimiter = ',', value_parser = parse_scenario, default_value = "tensor-matrix")]
    scenarios: Vec<Scenario>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    etas: Vec<f64>,
    /// Generating rank.
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Comma-separated ranks to fit (each >= the generating rank).
    #[arg(long, value_delimiter = ',', default_value = "3")]
    fit_ranks: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', default_value = "opt,als")]
    algos: Vec<Algorithm>,
    /// unit | random-integer
    #[arg(long, default_value = "unit", value_parser = parse_weight_mode)]
    weights: WeightMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct MissingArgs {
    /// Comma-separated missing fractions in [0, 0.95].
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7,0.85")]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ClusteringArgs {
    /// Number of clustered entities (must be divisible by 4).
    #[arg(long, default_value_t = 40)]
    entities: usize,
    #[arg(long, default_value_t = 30)]
    dim_j: usize,
    #[arg(long, default_value_t = 30)]
    dim_k: usize,
    #[arg(long, default_value_t = 30)]
    dim_m: usize,
    /// Scale of the noise added to the +-1 group patterns.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    raw: PathBuf,
    #[arg(long)]
    aggregate: PathBuf,
}

fn exit_code_for(err: &CmtfError) -> u8 {
    match err {
        CmtfError::Parse(_) | CmtfError::Io(_) => 2,
        CmtfError::ShapeMismatch(_) | CmtfError::InvalidArgument(_) => 3,
    }
}

fn run_gen(args: &GenArgs) -> cmtf_core::Result<()> {
    let mut cfg = ScenarioConfig::desk(args.scenario, args.eta, args.weights, args.seed);
    cfg.rank = args.rank;
    let truth = gen_scenario(&cfg)?;
    let mask = args
        .missing
        .map(|f| gen_mask(&cfg.shape, f, args.mask_seed.unwrap_or(args.seed + 1)))
        .transpose()?;

    std::fs::create_dir_all(&args.out)?;
    io::write_tensor(args.out.join("tensor.txt"), &truth.dataset.tensor)?;
    for (i, (mode, y)) in truth.dataset.sides.iter().enumerate() {
        io::write_matrix(args.out.join(format!("side{}_mode{}.txt", i, mode)), y)?;
    }
    if let Some(mask) = &mask {
        io::write_tensor(args.out.join("mask.txt"), mask)?;
    }
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{:.16e}", x))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut manifest = vec![
        ("scenario".to_string(), scenario_name(args.scenario).to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("eta".to_string(), args.eta.to_string()),
        ("rank".to_string(), args.rank.to_string()),
        ("weights".to_string(), weight_mode_name(args.weights).to_string()),
        ("lambdas".to_string(), join(&truth.lambdas)),
    ];
    for (i, alpha) in truth.alphas.iter().enumerate() {
        manifest.push((format!("alphas{}", i), join(alpha)));
    }
    if let Some(f) = args.missing {
        manifest.push(("missing".to_string(), f.to_string()));
        manifest.push((
            "mask_seed".to_string(),
            args.mask_seed.unwrap_or(args.seed + 1).to_string(),
        ));
    }
    io::write_manifest(args.out.join("manifest.txt"), &manifest)?;
    Ok(())
}

fn converged(reason: StopReason) -> bool {
    matches!(reason, StopReason::RelFuncTol | StopReason::GradNormTol)
}

fn run(cli: &Cli) -> Result<u8, CmtfError> {
    match &cli.command {
        Command::Gen(args) => {
            run_gen(args)?;
            Ok(0)
        }
        Command::Fit(args) => {
            let result = fit_files(
                &args.tensor,
                args.mask.as_deref(),
                &args.sides,
                args.rank,
                args.algo,
                args.seed,
                &args.out,
            )?;
            println!(
                "stop_reason={} iterations={} func_evals={} final_objective={:.16e}",
                result.stop_reason,
                result.iterations,
                result.func_evals,
                result.final_objective()
            );
            Ok(if converged(result.stop_reason) { 0 } else { 4 })
        }
        Command::Tables(args) => {
            let plan = ExperimentPlan {
                scenarios: args.scenarios.clone(),
                etas: args.etas.clone(),
                rank: args.rank,
                fit_ranks: args.fit_ranks.clone(),
                replicates: args.replicates,
                algorithms: args.algos.clone(),
                weight_mode: args.weights,
                base_seed: args.seed,
                out_dir: args.out.clone(),
                jobs: args.jobs,
            };
            let (raw, agg) = experiments::run_accuracy_tables(&plan)?;
            println!("wrote {} and {}", raw.display(), agg.display());
            Ok(0)
        }
        Command::MissingCurve(args) => {
            let (raw, agg) = run_missing_curve(
                &args.fractions,
                args.replicates,
                args.rank,
                args.seed,
                &args.out,
                args.jobs,
            )?;
            println!("wrote {} and {}", raw.display(), agg.display());
            Ok(0)
        }
        Command::Clustering(args) => {
            let outcome = run_clustering_demo(
                args.entities,
                args.dim_j,
                args.dim_k,
                args.dim_m,
                args.noise,
                args.seed,
            )?;
            std::fs::create_dir_all(&args.out)?;
            std::fs::write(args.out.join("clustering.csv"), clustering_csv(&outcome))?;
            std::fs::write(args.out.join("clustering.svg"), clustering_svg(&outcome))?;
            for (method, purity) in &outcome.purities {
                println!("{} purity={:.4}", method, purity);
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let raw = std::fs::read_to_string(&args.raw)?;
            let agg = std::fs::read_to_string(&args.aggregate)?;
            let diffs = experiments::verify_tables(&raw, &agg)?;
            if diffs.is_empty() {
                println!("aggregate matches raw");
                Ok(0)
            } else {
                for d in &diffs {
                    eprintln!("{}", d);
                }
                Err(CmtfError::InvalidArgument(format!(
                    "aggregate does not match raw ({} differences)",
                    diffs.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
