//! Single-network analysis commands: persistence values, bounds, shuffle
//! deltas, sortedness, and distribution fits.

use crate::output::{num, CsvSink};
use crate::{CliError, CmdResult};
use clap::Args;
use std::path::PathBuf;
use topoweight::persistence::{max_spanning_tree, neural_persistence, np_bounds, shuffle_entries};
use topoweight::stats::{fit_best_distribution, fit_distribution, Family};
use topoweight::synth::sortedness;
use topoweight::{dgp, normalise};

#[derive(Args)]
pub struct NpArgs {
    /// Network file (.json or .bin).
    pub network: PathBuf,
    /// Norm order of the persistence value.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Print only the size-normalised values.
    #[arg(long)]
    pub normalized: bool,
    /// Print each layer in addition to the mean.
    #[arg(long)]
    pub per_layer: bool,
}

pub fn run_np(args: NpArgs) -> CmdResult {
    if args.p <= 0.0 {
        return Err(CliError::Usage("--p must be positive".into()));
    }
    let net = super::load_network(&args.network)?;
    let norm = normalise(&net, false)?;
    let mut raw_sum = 0.0;
    let mut norm_sum = 0.0;
    for (idx, layer) in norm.layers().iter().enumerate() {
        let diagram = max_spanning_tree(layer)?.with_p(args.p);
        let raw = neural_persistence(&diagram, false);
        let normalised = neural_persistence(&diagram, true);
        raw_sum += raw;
        norm_sum += normalised;
        if args.per_layer {
            if args.normalized {
                println!("layer {idx} normalised {}", num(normalised));
            } else {
                println!("layer {idx} raw {} normalised {}", num(raw), num(normalised));
            }
        }
    }
    let n = norm.layers().len() as f64;
    if args.normalized {
        println!("normalised {}", num(norm_sum / n));
    } else {
        println!("raw {}", num(raw_sum / n));
        println!("normalised {}", num(norm_sum / n));
    }
    Ok(())
}

#[derive(Args)]
pub struct DgpArgs {
    pub network: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Skip the per-layer standardisation step.
    #[arg(long)]
    pub no_standardize: bool,
}

pub fn run_dgp(args: DgpArgs) -> CmdResult {
    if args.p <= 0.0 {
        return Err(CliError::Usage("--p must be positive".into()));
    }
    let net = super::load_network(&args.network)?;
    let value = dgp(&net, args.p, !args.no_standardize)?;
    println!("raw {}", num(value.raw));
    println!("normalised {}", num(value.normalised));
    Ok(())
}

#[derive(Args)]
pub struct BoundsArgs {
    pub network: PathBuf,
    /// Zero-based layer index.
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
}

pub fn run_bounds(args: BoundsArgs) -> CmdResult {
    if args.p <= 0.0 {
        return Err(CliError::Usage("--p must be positive".into()));
    }
    let net = super::load_network(&args.network)?;
    let norm = normalise(&net, false)?;
    let layer = super::layer(&norm, args.layer)?;
    let report = np_bounds(layer, args.p)?;
    let diagram = max_spanning_tree(layer)?.with_p(args.p);
    let np = neural_persistence(&diagram, false);
    println!("L {}", num(report.lower));
    println!("U {}", num(report.upper));
    println!("NP {}", num(np));
    println!("B_not_sim_A {}", report.b_not_sim_a.len());
    Ok(())
}

#[derive(Args)]
pub struct PermuteTestArgs {
    pub network: PathBuf,
    /// Number of independent shuffles per layer.
    #[arg(long)]
    pub seeds: u64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run_permute_test(args: PermuteTestArgs) -> CmdResult {
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let net = super::load_network(&args.network)?;
    let norm = normalise(&net, false)?;
    let mut sink = CsvSink::create(
        args.output.as_ref(),
        "permute-test",
        &[
            ("network", args.network.display().to_string()),
            ("seeds", args.seeds.to_string()),
            ("p", args.p.to_string()),
            ("seed", args.seed.to_string()),
        ],
    )?;
    sink.line("layer,seed,np_original,np_shuffled,delta")?;
    for (idx, layer) in norm.layers().iter().enumerate() {
        let original =
            neural_persistence(&max_spanning_tree(layer)?.with_p(args.p), true);
        for k in 0..args.seeds {
            let shuffled = shuffle_entries(
                layer,
                topoweight::rng::derive_seed(args.seed, (idx as u64) << 32 | k),
            );
            let value =
                neural_persistence(&max_spanning_tree(&shuffled)?.with_p(args.p), true);
            sink.row(&[
                idx.to_string(),
                k.to_string(),
                num(original),
                num(value),
                num(value - original),
            ])?;
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct SortednessArgs {
    pub network: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
}

pub fn run_sortedness(args: SortednessArgs) -> CmdResult {
    let net = super::load_network(&args.network)?;
    let norm = normalise(&net, false)?;
    let layer = super::layer(&norm, args.layer)?;
    let report = sortedness(layer)?;
    println!("sortedness {}", num(report.value));
    println!("winning_order {}", report.winning_order.name());
    println!(
        "row_major {} col_major {} diagonal {}",
        num(report.per_order[0]),
        num(report.per_order[1]),
        num(report.per_order[2])
    );
    Ok(())
}

#[derive(Args)]
pub struct FitDistArgs {
    pub network: PathBuf,
    /// Restrict to a single layer; default pools the whole network.
    #[arg(long)]
    pub layer: Option<usize>,
    /// One family name or "all".
    #[arg(long, default_value = "all")]
    pub family: String,
}

pub fn run_fit_dist(args: FitDistArgs) -> CmdResult {
    let net = super::load_network(&args.network)?;
    let norm = normalise(&net, false)?;
    let samples: Vec<f64> = match args.layer {
        Some(k) => super::layer(&norm, k)?.data().to_vec(),
        None => norm.layers().iter().flat_map(|l| l.data()).copied().collect(),
    };
    let fits = if args.family == "all" {
        fit_best_distribution(&samples)?
    } else {
        let family: Family = args
            .family
            .parse()
            .map_err(|e: String| CliError::Usage(format!("--family: {e}")))?;
        vec![fit_distribution(&samples, family)?]
    };
    for (rank, fit) in fits.iter().enumerate() {
        let params: Vec<String> = fit.spec.parameters().iter().map(|&p| num(p)).collect();
        let marker = if rank == 0 && fits.len() > 1 { " (best)" } else { "" };
        println!(
            "{} params [{}] nll {}{marker}",
            fit.spec.family().name(),
            params.join(", "),
            num(fit.nll)
        );
    }
    Ok(())
}
