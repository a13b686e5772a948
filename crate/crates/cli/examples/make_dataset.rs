//! Writes the synthetic 8x8 digit dataset (or 2-D blobs) as a CSV that the
//! `train` and `shift-detect` subcommands consume.
//!
//! Usage:
//!   cargo run -p topoweight-cli --example make_dataset -- digits out.csv 150 7
//!   cargo run -p topoweight-cli --example make_dataset -- blobs out.csv 300 7

use std::path::PathBuf;
use topoweight::data::{synthetic_blobs, synthetic_digits};
use topoweight::io::save_dataset;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 4 {
        eprintln!("usage: make_dataset <digits|blobs> <out.csv> <per-class> <seed>");
        std::process::exit(1);
    }
    let kind = &args[0];
    let path = PathBuf::from(&args[1]);
    let per_class: usize = args[2].parse().expect("per-class must be an integer");
    let seed: u64 = args[3].parse().expect("seed must be an integer");

    let data = match kind.as_str() {
        "digits" => synthetic_digits(per_class, 0.12, seed),
        "blobs" => synthetic_blobs(
            per_class,
            &[vec![0.8, 0.2], vec![0.2, 0.8]],
            0.05,
            seed,
        ),
        other => {
            eprintln!("unknown dataset kind '{other}'");
            std::process::exit(1);
        }
    };
    save_dataset(&path, &data).expect("write dataset");
    println!(
        "wrote {} samples x {} features to {}",
        data.len(),
        data.feature_dim(),
        path.display()
    );
}
