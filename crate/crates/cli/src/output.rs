//! File writers. Floats are written with 17 significant digits so that the
//! CSVs round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dickecool::TimeSeries;

use crate::error::CliError;

pub const SERIES_HEADER: &str = "t,jz,trace,purity";
pub const CURVE_HEADER: &str = "t,jz";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_csv(s: &TimeSeries) -> String {
    let mut out = String::with_capacity(80 * (s.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for i in 0..s.len() {
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(s.times[i]), fmt_f64(s.jz[i]), fmt_f64(s.trace[i]), fmt_f64(s.purity[i]));
    }
    out
}

pub fn curve_csv(times: &[f64], jz: &[f64]) -> String {
    let mut out = String::with_capacity(48 * (times.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (t, j) in times.iter().zip(jz) {
        let _ = writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*j));
    }
    out
}

/// `λ` as it appears in file names.
pub fn lambda_tag(lambda: f64) -> String {
    format!("{lambda}")
}

pub fn prefixed(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    std::fs::write(path, contents).map_err(err)
}

/// Gnuplot script plotting every series against the closed-form overlay.
/// File names are relative to the script's directory.
pub fn gnuplot_script(series: &[(String, PathBuf)], overlay: Option<&Path>, log_x: bool) -> String {
    let name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut out = String::new();
    out.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    out.push_str("set xlabel 't'\nset ylabel '<Jz>'\n");
    if log_x {
        out.push_str("set logscale x\n");
    }
    let mut parts: Vec<String> =
        series.iter().map(|(title, p)| format!("'{}' using 1:2 with lines title '{}'", name(p), title)).collect();
    if let Some(p) = overlay {
        parts.push(format!("'{}' using 1:2 with lines dashtype 2 title 'closed form'", name(p)));
    }
    let _ = writeln!(out, "plot {}", parts.join(", \\\n     "));
    out
}
