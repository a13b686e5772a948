//! File formats: networks as JSON (or a little-endian binary variant via the
//! `.bin` extension) and labeled datasets as CSV. Loading validates every
//! structural invariant; saving a loaded file reproduces it bit-exactly for
//! finite doubles thanks to shortest-round-trip float encoding.
//!
//! Network JSON schema:
//!
//! ```json
//! {"activation": "relu", "layers": [{"rows": 2, "cols": 3, "data": [6 numbers]}]}
//! ```
//!
//! The binary variant stores the same fields in order: activation (u8,
//! 0 = relu, 1 = tanh), layer count (u32 LE), then per layer rows (u32 LE),
//! cols (u32 LE), and `rows * cols` f64 LE values.
//!
//! Dataset CSV: header `label,f0,f1,...`; one sample per row with a
//! nonnegative integer label and features in `[0, 1]`.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{Activation, Network, WeightMatrix};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    activation: Activation,
    layers: Vec<LayerDoc>,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        file: display(path),
        source,
    }
}

fn network_from_doc(doc: NetworkDoc, path: &Path) -> Result<Network> {
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (idx, layer) in doc.layers.into_iter().enumerate() {
        let matrix = WeightMatrix::new(layer.rows, layer.cols, layer.data).map_err(|e| {
            Error::InvariantViolation {
                file: display(path),
                check: format!("layer {idx}: {e}"),
            }
        })?;
        layers.push(matrix);
    }
    Network::new(layers, doc.activation).map_err(|e| Error::InvariantViolation {
        file: display(path),
        check: e.to_string(),
    })
}

fn network_to_doc(net: &Network) -> NetworkDoc {
    NetworkDoc {
        activation: net.activation(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerDoc {
                rows: l.rows(),
                cols: l.cols(),
                data: l.data().to_vec(),
            })
            .collect(),
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Loads a network from JSON, or from the binary format when the path ends
/// in `.bin`.
pub fn load_network(path: &Path) -> Result<Network> {
    if is_binary(path) {
        let bytes = std::fs::read(path).map_err(io_error(path))?;
        return network_from_binary(&bytes, path);
    }
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    let doc: NetworkDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: display(path),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    network_from_doc(doc, path)
}

/// Saves a network as pretty JSON, or in the binary format when the path
/// ends in `.bin`.
pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    if is_binary(path) {
        let bytes = network_to_binary(net);
        return std::fs::write(path, bytes).map_err(io_error(path));
    }
    let doc = network_to_doc(net);
    let mut text = serde_json::to_string_pretty(&doc).expect("network serialisation");
    text.push('\n');
    std::fs::write(path, text).map_err(io_error(path))
}

fn network_to_binary(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    out.push(match net.activation() {
        Activation::Relu => 0u8,
        Activation::Tanh => 1u8,
    });
    out.extend((net.layers().len() as u32).to_le_bytes());
    for layer in net.layers() {
        out.extend((layer.rows() as u32).to_le_bytes());
        out.extend((layer.cols() as u32).to_le_bytes());
        for &w in layer.data() {
            out.extend(w.to_le_bytes());
        }
    }
    out
}

fn network_from_binary(bytes: &[u8], path: &Path) -> Result<Network> {
    let mut cursor = std::io::Cursor::new(bytes);
    let parse_err = |message: String, at: u64| Error::Parse {
        file: display(path),
        line: 1,
        column: at as usize,
        message,
    };
    let mut u8buf = [0u8; 1];
    cursor
        .read_exact(&mut u8buf)
        .map_err(|_| parse_err("missing activation byte".into(), 0))?;
    let activation = match u8buf[0] {
        0 => Activation::Relu,
        1 => Activation::Tanh,
        other => {
            return Err(parse_err(format!("unknown activation code {other}"), 0));
        }
    };
    let mut u32buf = [0u8; 4];
    cursor
        .read_exact(&mut u32buf)
        .map_err(|_| parse_err("missing layer count".into(), 1))?;
    let n_layers = u32::from_le_bytes(u32buf) as usize;
    let mut doc = NetworkDoc {
        activation,
        layers: Vec::with_capacity(n_layers),
    };
    for idx in 0..n_layers {
        let at = cursor.position();
        cursor
            .read_exact(&mut u32buf)
            .map_err(|_| parse_err(format!("layer {idx}: missing rows"), at))?;
        let rows = u32::from_le_bytes(u32buf) as usize;
        cursor
            .read_exact(&mut u32buf)
            .map_err(|_| parse_err(format!("layer {idx}: missing cols"), at))?;
        let cols = u32::from_le_bytes(u32buf) as usize;
        let mut data = Vec::with_capacity(rows.saturating_mul(cols));
        let mut f64buf = [0u8; 8];
        for _ in 0..rows.saturating_mul(cols) {
            cursor
                .read_exact(&mut f64buf)
                .map_err(|_| parse_err(format!("layer {idx}: truncated data"), at))?;
            data.push(f64::from_le_bytes(f64buf));
        }
        doc.layers.push(LayerDoc { rows, cols, data });
    }
    network_from_doc(doc, path)
}

/// Loads a labeled dataset from CSV. Errors name the offending row and
/// column (1-based, counting the header).
pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_dataset(&text, &display(path))
}

pub(crate) fn parse_dataset(text: &str, file: &str) -> Result<LabeledDataset> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        file: file.to_string(),
        line,
        column,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty dataset".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"label") || columns.len() < 2 {
        return Err(parse_err(
            header_line + 1,
            1,
            "header must be 'label,f0,f1,...'".into(),
        ));
    }
    let dim = columns.len() - 1;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(parse_err(
                line_no,
                fields.len(),
                format!("expected {} fields, got {}", dim + 1, fields.len()),
            ));
        }
        let label: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, 1, format!("bad label '{}'", fields[0])))?;
        let mut row = Vec::with_capacity(dim);
        for (col, field) in fields.iter().enumerate().skip(1) {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, col + 1, format!("bad number '{field}'")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(parse_err(
                    line_no,
                    col + 1,
                    format!("feature value {value} outside [0, 1]"),
                ));
            }
            row.push(value);
        }
        features.push(row);
        labels.push(label);
    }
    LabeledDataset::new(features, labels).map_err(|e| Error::InvariantViolation {
        file: file.to_string(),
        check: e.to_string(),
    })
}

/// Writes a labeled dataset as CSV with the standard header.
pub fn save_dataset(path: &Path, data: &LabeledDataset) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    let mut out = std::io::BufWriter::new(file);
    let mut header = String::from("label");
    for i in 0..data.feature_dim() {
        header.push_str(&format!(",f{i}"));
    }
    writeln!(out, "{header}").map_err(io_error(path))?;
    for (f, &y) in data.features().iter().zip(data.labels()) {
        let row: Vec<String> = f.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{y},{}", row.join(",")).map_err(io_error(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn temp_path(name: &str) -> std::path::PathBuf {
        let mut dir = std::env::temp_dir();
        dir.push(format!("topoweight-io-{}-{name}", std::process::id()));
        dir
    }

    fn random_network(seed: u64) -> Network {
        let mut rng = rng_from_seed(seed);
        let dims = [4usize, 3, 5, 2];
        let layers: Vec<WeightMatrix> = dims
            .windows(2)
            .map(|p| {
                let (c, r) = (p[0], p[1]);
                WeightMatrix::new(r, c, (0..r * c).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                    .unwrap()
            })
            .collect();
        Network::new(layers, Activation::Tanh).unwrap()
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let net = random_network(1);
        let path = temp_path("net.json");
        save_network(&path, &net).unwrap();
        let loaded = load_network(&path).unwrap();
        assert_eq!(net, loaded);

        // A second save produces identical bytes.
        let first = std::fs::read(&path).unwrap();
        save_network(&path, &loaded).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let net = random_network(2);
        let path = temp_path("net.bin");
        save_network(&path, &net).unwrap();
        let loaded = load_network(&path).unwrap();
        assert_eq!(net, loaded);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn mismatched_layer_dims_are_rejected() {
        let text = r#"{"activation":"relu","layers":[
            {"rows":2,"cols":2,"data":[1.0,0.0,0.0,1.0]},
            {"rows":1,"cols":3,"data":[1.0,2.0,3.0]}]}"#;
        let path = temp_path("bad.json");
        std::fs::write(&path, text).unwrap();
        let err = load_network(&path).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }), "{err}");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn json_syntax_errors_carry_position() {
        let path = temp_path("syntax.json");
        std::fs::write(&path, "{\"activation\": \"relu\",\n  layers: []}").unwrap();
        match load_network(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn dataset_round_trip_and_errors() {
        let text = "label,f0,f1\n0,0.25,0.5\n1,1,0\n";
        let data = parse_dataset(text, "<test>").unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.num_classes(), 2);

        let path = temp_path("data.csv");
        save_dataset(&path, &data).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(data, loaded);
        std::fs::remove_file(&path).ok();

        let bad = "label,f0,f1\n0,0.25,1.5\n";
        match parse_dataset(bad, "<test>").unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            other => panic!("expected parse error, got {other}"),
        }

        let bad_header = "id,f0\n0,0.5\n";
        assert!(matches!(
            parse_dataset(bad_header, "<test>").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }
}
