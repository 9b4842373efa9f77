//! Report files: JSON, CSV and plot data.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use super::config::{OutputFormat, RunConfig};
use super::run::RunReport;
use crate::error::{Error, Result};

/// Decimal with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// The full JSON document of a report.
pub fn report_document(report: &RunReport, cfg: &RunConfig) -> Value {
    json!({
        "command": report.command,
        "status": report.status,
        "exit_code": report.exit_code(),
        "error": report.error,
        "geometry": cfg.geometry.name,
        "provenance": {
            "config_sha256": cfg.hash,
            "step": cfg.tolerances.step,
            "integrator": "rkmk4",
            "seed": cfg.seed,
            "version": env!("CARGO_PKG_VERSION"),
        },
        "tolerances": cfg.tolerances,
        "summary": report.summary,
        "details": report.details,
        "table": report.table,
    })
}

pub fn csv_string(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&report.table.columns).map_err(io_err)?;
    for r in &report.table.rows {
        w.write_record(r.iter().map(|&v| format_f64(v))).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Gnuplot-style columns; grid rows are separated by blank lines.
pub fn dat_string(report: &RunReport) -> String {
    let mut out = format!("# {}\n", report.table.columns.join(" "));
    for (i, r) in report.table.rows.iter().enumerate() {
        if let Some(b) = report.table.row_break {
            if i > 0 && b > 0 && i % b == 0 {
                out.push('\n');
            }
        }
        let line: Vec<String> = r.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Writes the configured formats into `dir` and returns the written paths.
pub fn emit_outputs(report: &RunReport, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in &cfg.outputs.formats {
        let (ext, text) = match format {
            OutputFormat::Json => ("json", to_json_string(&report_document(report, cfg))?),
            OutputFormat::Csv => ("csv", csv_string(report)?),
            OutputFormat::Dat => ("dat", dat_string(report)),
        };
        let path = dir.join(format!("{}.{ext}", cfg.outputs.stem));
        fs::write(&path, text)?;
        log::debug!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}
