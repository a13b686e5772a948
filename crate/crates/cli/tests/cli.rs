//! End-to-end tests of the `topoweight` binary: exit codes, printed values,
//! CSV metadata lines, and reproducibility across invocations.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topoweight"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("topoweight-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

const APPENDIX_NET: &str = r#"{"activation":"relu","layers":[{"rows":3,"cols":3,"data":[0.5,0.1,0.8,0.7,1.0,0.1,0.2,0.8,0.0]}]}"#;
const ONES_NET: &str = r#"{"activation":"relu","layers":[{"rows":2,"cols":2,"data":[1,1,1,1]}]}"#;

#[test]
fn np_prints_raw_and_normalised() {
    let dir = workdir("np");
    let net = write(&dir, "ones.json", ONES_NET);
    let out = bin().arg("np").arg(&net).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("raw 1.000000"), "{text}");
    assert!(text.contains("normalised 0.577350"), "{text}");
}

#[test]
fn bounds_match_the_worked_example() {
    let dir = workdir("bounds");
    let net = write(&dir, "appendix.json", APPENDIX_NET);
    let out = bin()
        .arg("bounds")
        .arg(&net)
        .args(["--layer", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("L 0.458258"), "{text}");
    assert!(text.contains("U 1.473092"), "{text}");
    assert!(text.contains("NP 1.191638"), "{text}");
    assert!(text.contains("B_not_sim_A 1"), "{text}");
}

#[test]
fn usage_errors_exit_one_data_errors_exit_two() {
    let dir = workdir("exitcodes");
    let net = write(&dir, "ones.json", ONES_NET);
    let data = write(&dir, "tiny.csv", "label,f0\n0,0.5\n1,0.5\n");

    // Unknown flag.
    let out = bin().arg("np").arg(&net).arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Invalid flag value.
    let out = bin()
        .arg("shift-detect")
        .arg(&net)
        .arg(&data)
        .args(["--method", "dgp", "--corruption", "gaussian_noise"])
        .args(["--trials", "0", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Missing file.
    let out = bin().arg("np").arg(dir.join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Invalid network (dims do not chain).
    let bad = write(
        &dir,
        "bad.json",
        r#"{"activation":"relu","layers":[{"rows":2,"cols":2,"data":[1,0,0,1]},{"rows":1,"cols":3,"data":[1,2,3]}]}"#,
    );
    let out = bin().arg("np").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // CSV with an out-of-range feature names row and column.
    let bad_csv = write(&dir, "bad.csv", "label,f0,f1\n0,0.5,0.5\n1,0.2,1.5\n");
    let out = bin()
        .arg("train")
        .arg(&bad_csv)
        .args(["--layers", "2", "--out-dir"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column 3"), "{err}");
}

#[test]
fn permute_test_csv_has_metadata_and_is_reproducible() {
    let dir = workdir("permute");
    let net = write(&dir, "appendix.json", APPENDIX_NET);
    let run = || {
        let out = bin()
            .arg("permute-test")
            .arg(&net)
            .args(["--seeds", "5", "--seed", "11"])
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout(&out)
    };
    let first = run();
    assert!(first.starts_with("# topoweight"), "{first}");
    assert!(first.contains("permute-test"), "{first}");
    assert!(first.contains("seed=11"), "{first}");
    assert!(first.lines().nth(1).unwrap().starts_with("layer,seed"), "{first}");
    assert_eq!(first, run(), "seeded run must be bit-reproducible");
}

#[test]
fn synth_study_size_is_reproducible_and_decreasing() {
    let dir = workdir("size");
    let out_path = dir.join("size.csv");
    let run = || {
        let out = bin()
            .args(["synth-study", "size", "--sizes", "5,10,20"])
            .args(["--trials", "10", "--seed", "3", "-o"])
            .arg(&out_path)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(&out_path).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let means: Vec<f64> = first
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rows"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 3);
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
}

#[test]
fn train_earlystop_round_trip() {
    let dir = workdir("train");
    // Blob-like two-class data, separable through the origin.
    let mut csv = String::from("label,f0,f1\n");
    for i in 0..60 {
        let t = (i % 30) as f64 / 100.0;
        if i < 30 {
            csv.push_str(&format!("0,{},{}\n", 0.7 + t / 4.0, 0.1 + t / 4.0));
        } else {
            csv.push_str(&format!("1,{},{}\n", 0.1 + t / 4.0, 0.7 + t / 4.0));
        }
    }
    let data = write(&dir, "blobs.csv", &csv);
    let out_dir = dir.join("run");
    let out = bin()
        .arg("train")
        .arg(&data)
        .args(["--layers", "", "--epochs", "20", "--seed", "5", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("train_accuracy"), "{text}");

    let metrics = out_dir.join("metrics.csv");
    let metrics_text = std::fs::read_to_string(&metrics).unwrap();
    assert!(metrics_text.starts_with("# topoweight"), "{metrics_text}");
    assert!(std::fs::metadata(out_dir.join("checkpoint_0000.json")).is_ok());

    let out = bin()
        .arg("earlystop")
        .arg(&metrics)
        .args(["--criterion", "loss", "--patience", "3", "--lower-is-better"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("stop_index"), "{}", stdout(&out));

    let out = bin()
        .arg("earlystop")
        .arg(&metrics)
        .args(["--criterion", "nonexistent"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_writes_svg() {
    let dir = workdir("plot");
    let csv = write(
        &dir,
        "results.csv",
        "# topoweight test\nn,ratio,method\n10,0.1,a\n50,0.4,a\n200,0.8,a\n10,0.2,b\n50,0.5,b\n200,0.9,b\n",
    );
    for kind in ["scatter", "lines"] {
        let out_path = dir.join(format!("{kind}.svg"));
        let out = bin()
            .arg("plot")
            .arg(&csv)
            .args(["--kind", kind, "--series", "method", "-o"])
            .arg(&out_path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let svg = std::fs::read_to_string(&out_path).unwrap();
        assert!(svg.starts_with("<svg"), "{kind}");
        assert!(svg.contains("</svg>"), "{kind}");
    }

    let heat = write(
        &dir,
        "heat.csv",
        "rows,cols,value\n10,10,0.9\n10,20,0.8\n20,10,0.7\n20,20,0.5\n",
    );
    let out_path = dir.join("heat.svg");
    let out = bin()
        .arg("plot")
        .arg(&heat)
        .args(["--kind", "heatmap", "--value", "value", "-o"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&out_path).unwrap().contains("rect"));

    let out = bin()
        .arg("plot")
        .arg(&csv)
        .args(["--kind", "pie", "-o"])
        .arg(dir.join("pie.svg"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_network_format_round_trips_through_the_cli() {
    let dir = workdir("binfmt");
    let json_net = write(&dir, "appendix.json", APPENDIX_NET);
    // Convert by loading JSON and saving as .bin through the library, then
    // verify the CLI reads it identically.
    let net = topoweight::io::load_network(&json_net).unwrap();
    let bin_path = dir.join("appendix.bin");
    topoweight::io::save_network(&bin_path, &net).unwrap();

    let from_json = bin().arg("bounds").arg(&json_net).output().unwrap();
    let from_bin = bin().arg("bounds").arg(&bin_path).output().unwrap();
    assert!(from_bin.status.success());
    assert_eq!(stdout(&from_json), stdout(&from_bin));
}

#[test]
fn fit_dist_reports_families() {
    let dir = workdir("fitdist");
    // A 6x6 layer gives 36 samples, enough for fitting.
    let mut data = Vec::new();
    for i in 0..36 {
        data.push(0.02 + 0.9 * ((i * 7 % 36) as f64 / 36.0));
    }
    let net = format!(
        r#"{{"activation":"relu","layers":[{{"rows":6,"cols":6,"data":{data:?}}}]}}"#
    );
    let net = write(&dir, "net.json", &net);
    let out = bin().arg("fit-dist").arg(&net).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("(best)"), "{text}");
    assert!(text.contains("beta"), "{text}");
    assert!(text.contains("trunc_pareto"), "{text}");
    assert_eq!(text.lines().count(), 4, "{text}");
}
