//! CSV emission with the mandatory metadata header line and the shared
//! 6-decimal numeric formatting.

use crate::CliError;
use std::io::Write;
use std::path::PathBuf;

/// Fixed-point with six decimals; the format used for every numeric value
/// the tool prints.
pub fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// A CSV sink (file or stdout) that writes the `#`-prefixed metadata line
/// first: tool version, subcommand, and the resolved flags.
pub struct CsvSink {
    out: Box<dyn Write>,
}

impl CsvSink {
    pub fn create(
        path: Option<&PathBuf>,
        subcommand: &str,
        flags: &[(&str, String)],
    ) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(
                std::fs::File::create(p)
                    .map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))?,
            ),
            None => Box::new(std::io::stdout()),
        };
        let mut sink = Self { out };
        let rendered: Vec<String> = flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        sink.line(&format!(
            "# topoweight {} {subcommand} {}",
            env!("CARGO_PKG_VERSION"),
            rendered.join(" ")
        ))?;
        Ok(sink)
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(|e| CliError::Data(format!("write failed: {e}")))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.line(&fields.join(","))
    }
}
