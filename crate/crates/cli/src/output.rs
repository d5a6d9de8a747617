//! CSV tables and gnuplot scripts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

/// Marker for a quantity that does not exist (no extinction, no ratio).
pub const NONE: &str = "none";
/// Marker for a trajectory that reached exact zero: a stability index of
/// `-inf` or a decay rate of `+inf`.
pub const EXTINCT: &str = "extinct";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> anyhow::Result<String> {
    if !v.is_finite() {
        bail!("refusing to write non-finite value {v}");
    }
    Ok(format!("{v:.16e}"))
}

/// Like [`num`], with [`NONE`] for missing or non-finite values.
pub fn num_or_none(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => NONE.to_string(),
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.render()).with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Columns drawn on a logarithmic y-axis: norms, distances and errors.
fn is_log_column(name: &str) -> bool {
    matches!(name, "W" | "U" | "sup_w" | "sup_u" | "sup_discrepancy" | "final_residual" | "w_error")
        || name.ends_with("_distance")
        || (name.starts_with('d') && name.len() == 3 && name[1..].chars().all(|c| c.is_ascii_digit()))
}

/// Gnuplot script drawing `columns` of `csv` against its first column.
/// Norm-like columns get a log y-axis, everything else a linear one. The
/// output depends only on the header and the arguments.
pub fn plot_script(csv: &Path, columns: &[&str]) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(csv).with_context(|| format!("cannot read {}", csv.display()))?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').collect();
    if columns.is_empty() {
        bail!("no columns requested for {}", csv.display());
    }
    let mut idx = Vec::new();
    for c in columns {
        match header.iter().position(|h| h == c) {
            Some(i) => idx.push(i + 1),
            None => bail!("unknown column `{c}` in {} (available: {})", csv.display(), header.join(", ")),
        }
    }
    let log = columns.iter().all(|c| is_log_column(c));
    let name = csv.file_name().and_then(|n| n.to_str()).unwrap_or("data.csv");
    let stem = csv.file_stem().and_then(|n| n.to_str()).unwrap_or("data");

    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set datafile missing '{NONE}'").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set xlabel '{}'", header[0]).unwrap();
    if log {
        writeln!(s, "set logscale y").unwrap();
    } else {
        writeln!(s, "unset logscale y").unwrap();
    }
    writeln!(s, "set terminal pngcairo size 900,600").unwrap();
    writeln!(s, "set output '{stem}_{}.png'", columns.join("_")).unwrap();
    let plots: Vec<String> = idx.iter().map(|i| format!("'{name}' using 1:{i} with lines")).collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    Ok(s)
}

/// Writes the script next to the CSV as `<stem>_<columns>.gp`.
pub fn emit_plot_script(csv: &Path, columns: &[&str]) -> anyhow::Result<PathBuf> {
    let script = plot_script(csv, columns)?;
    let stem = csv.file_stem().and_then(|n| n.to_str()).unwrap_or("data");
    let path = csv.with_file_name(format!("{stem}_{}.gp", columns.join("_")));
    std::fs::write(&path, script).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
