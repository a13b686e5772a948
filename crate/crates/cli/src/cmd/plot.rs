//! Static SVG rendering of results CSVs: scatter, line, and heatmap views.
//! No external renderer; the output is plain hand-assembled SVG.

use crate::{CliError, CmdResult};
use clap::Args;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct PlotArgs {
    /// Results CSV (metadata lines starting with '#' are skipped).
    pub results: PathBuf,
    /// scatter, lines, or heatmap.
    #[arg(long)]
    pub kind: String,
    /// Output SVG path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Column for the x axis (name or 0-based index); default first column.
    #[arg(long)]
    pub x: Option<String>,
    /// Column for the y axis; default second column.
    #[arg(long)]
    pub y: Option<String>,
    /// Cell value column for heatmaps; default last column.
    #[arg(long)]
    pub value: Option<String>,
    /// Grouping column for line plots.
    #[arg(long)]
    pub series: Option<String>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, selector: Option<&String>, default: usize, flag: &str) -> Result<usize, CliError> {
        match selector {
            None => {
                if default < self.header.len() {
                    Ok(default)
                } else {
                    Err(CliError::Data(format!(
                        "CSV has only {} columns",
                        self.header.len()
                    )))
                }
            }
            Some(sel) => {
                if let Some(idx) = self.header.iter().position(|h| h == sel) {
                    return Ok(idx);
                }
                sel.parse::<usize>()
                    .ok()
                    .filter(|&i| i < self.header.len())
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "{flag}: no column '{sel}'; columns are {}",
                            self.header.join(", ")
                        ))
                    })
            }
        }
    }

    fn numeric(&self, col: usize) -> Result<Vec<f64>, CliError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[col].trim().parse::<f64>().map_err(|_| {
                    CliError::Data(format!(
                        "row {}: column '{}' is not numeric ('{}')",
                        i + 1,
                        self.header[col],
                        row[col]
                    ))
                })
            })
            .collect()
    }
}

fn load_table(path: &PathBuf) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Data("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(CliError::Data(format!(
                "row {}: expected {} fields, got {}",
                i + 1,
                header.len(),
                fields.len()
            )));
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(CliError::Data("CSV has no data rows".into()));
    }
    Ok(Table { header, rows })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    min: f64,
    max: f64,
    span_px: f64,
    offset_px: f64,
    flip: bool,
}

impl Axis {
    fn new(values: &[f64], span_px: f64, offset_px: f64, flip: bool) -> Self {
        let mut min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if (max - min).abs() < 1e-12 {
            min -= 0.5;
            max += 0.5;
        }
        let pad = (max - min) * 0.04;
        Axis {
            min: min - pad,
            max: max + pad,
            span_px,
            offset_px,
            flip,
        }
    }

    fn place(&self, v: f64) -> f64 {
        let t = (v - self.min) / (self.max - self.min);
        let t = if self.flip { 1.0 - t } else { t };
        self.offset_px + t * self.span_px
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=5)
            .map(|i| self.min + (self.max - self.min) * i as f64 / 5.0)
            .collect()
    }
}

fn svg_header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
}

fn draw_axes(out: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    for t in x.ticks() {
        let px = x.place(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in y.ticks() {
        let py = y.place(t);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/><text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn run(args: PlotArgs) -> CmdResult {
    let table = load_table(&args.results)?;
    let svg = match args.kind.as_str() {
        "scatter" => render_xy(&table, &args, false)?,
        "lines" => render_xy(&table, &args, true)?,
        "heatmap" => render_heatmap(&table, &args)?,
        other => {
            return Err(CliError::Usage(format!(
                "--kind must be scatter, heatmap, or lines, got '{other}'"
            )))
        }
    };
    std::fs::write(&args.output, svg)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", args.output.display())))?;
    Ok(())
}

fn render_xy(table: &Table, args: &PlotArgs, lines: bool) -> Result<String, CliError> {
    let xc = table.column(args.x.as_ref(), 0, "--x")?;
    let yc = table.column(args.y.as_ref(), 1, "--y")?;
    let xs = table.numeric(xc)?;
    let ys = table.numeric(yc)?;
    let x_axis = Axis::new(&xs, WIDTH - MARGIN_LEFT - MARGIN_RIGHT, MARGIN_LEFT, false);
    let y_axis = Axis::new(&ys, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM, MARGIN_TOP, true);

    let groups: Vec<(String, Vec<usize>)> = match &args.series {
        None => vec![(String::new(), (0..table.rows.len()).collect())],
        Some(sel) => {
            let sc = table.column(Some(sel), usize::MAX, "--series")?;
            let mut order: Vec<String> = Vec::new();
            for row in &table.rows {
                if !order.contains(&row[sc]) {
                    order.push(row[sc].clone());
                }
            }
            order
                .into_iter()
                .map(|name| {
                    let idx = (0..table.rows.len())
                        .filter(|&i| table.rows[i][sc] == name)
                        .collect();
                    (name, idx)
                })
                .collect()
        }
    };

    let mut out = String::new();
    svg_header(&mut out);
    draw_axes(&mut out, &x_axis, &y_axis, &table.header[xc], &table.header[yc]);
    for (g, (name, members)) in groups.iter().enumerate() {
        let color = PALETTE[g % PALETTE.len()];
        if lines {
            let mut pts: Vec<(f64, f64)> = members.iter().map(|&i| (xs[i], ys[i])).collect();
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", x_axis.place(x), y_axis.place(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &i in members {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.75"/>"#,
                x_axis.place(xs[i]),
                y_axis.place(ys[i])
            );
        }
        if !name.is_empty() {
            let ly = MARGIN_TOP + 14.0 * g as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
                WIDTH - MARGIN_RIGHT - 110.0,
                ly,
                WIDTH - MARGIN_RIGHT - 96.0,
                ly + 9.0,
                escape(name)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn render_heatmap(table: &Table, args: &PlotArgs) -> Result<String, CliError> {
    let xc = table.column(args.x.as_ref(), 0, "--x")?;
    let yc = table.column(args.y.as_ref(), 1, "--y")?;
    let vc = table.column(args.value.as_ref(), table.header.len() - 1, "--value")?;
    let values = table.numeric(vc)?;

    // Axis categories in order of first appearance, numerically sorted when
    // every label parses as a number.
    let categories = |col: usize| -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for row in &table.rows {
            if !seen.contains(&row[col]) {
                seen.push(row[col].clone());
            }
        }
        if seen.iter().all(|s| s.trim().parse::<f64>().is_ok()) {
            seen.sort_by(|a, b| {
                a.trim()
                    .parse::<f64>()
                    .unwrap()
                    .partial_cmp(&b.trim().parse::<f64>().unwrap())
                    .unwrap()
            });
        }
        seen
    };
    let x_cats = categories(xc);
    let y_cats = categories(yc);

    let (vmin, vmax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let spread = (vmax - vmin).max(1e-12);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cell_w = plot_w / x_cats.len() as f64;
    let cell_h = plot_h / y_cats.len() as f64;

    let mut out = String::new();
    svg_header(&mut out);
    for (i, row) in table.rows.iter().enumerate() {
        let cx = x_cats.iter().position(|c| *c == row[xc]).unwrap();
        let cy = y_cats.iter().position(|c| *c == row[yc]).unwrap();
        let t = (values[i] - vmin) / spread;
        // White-to-blue ramp; darker is higher.
        let shade = (255.0 - t * 185.0) as u8;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="rgb({shade},{shade},255)" stroke="rgb(204,204,204)"/>"#,
            MARGIN_LEFT + cx as f64 * cell_w,
            MARGIN_TOP + (y_cats.len() - 1 - cy) as f64 * cell_h,
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + cx as f64 * cell_w + cell_w / 2.0,
            MARGIN_TOP + (y_cats.len() - 1 - cy) as f64 * cell_h + cell_h / 2.0 + 3.0,
            tick_label(values[i])
        );
    }
    for (i, cat) in x_cats.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + i as f64 * cell_w + cell_w / 2.0,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            escape(cat)
        );
    }
    for (i, cat) in y_cats.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            MARGIN_TOP + (y_cats.len() - 1 - i) as f64 * cell_h + cell_h / 2.0 + 4.0,
            escape(cat)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&table.header[xc])
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&table.header[yc])
    );
    out.push_str("</svg>\n");
    Ok(out)
}
