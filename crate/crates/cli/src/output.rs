use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};
use spinchain::scans::{ScanTable, Value};
use spinchain::{CONVENTION_NOTE, VERSION};

use crate::config::Format;
use crate::svg;
use crate::CliError;

/// A table plus everything written alongside it.
#[derive(Clone, Debug)]
pub struct Report {
    pub table: ScanTable,
    /// Ordered `key: value` provenance lines.
    pub provenance: Vec<(String, String)>,
    /// Additional top-level JSON members.
    pub extras: Vec<(String, Json)>,
}

impl Report {
    pub fn new(table: ScanTable, command: &str, spec: &str, tol: f64) -> Self {
        let provenance = vec![
            ("generator".to_string(), format!("spinchain {VERSION}")),
            ("command".to_string(), command.to_string()),
            ("spec".to_string(), spec.to_string()),
            ("convention".to_string(), CONVENTION_NOTE.to_string()),
            ("tol".to_string(), format_float(tol)),
        ];
        Report { table, provenance, extras: Vec::new() }
    }

    pub fn with_provenance(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_extra(mut self, key: &str, value: Json) -> Self {
        self.extras.push((key.to_string(), value));
        self
    }
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x.is_finite() && a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Float(x) => format_float(*x),
        other => other.to_string(),
    }
}

fn cell_json(v: &Value) -> Json {
    match v {
        // NaN and infinities have no JSON form
        Value::Float(x) if x.is_finite() => json!(x),
        Value::Float(_) => Json::Null,
        Value::Int(x) => json!(x),
        Value::Bool(x) => json!(x),
        Value::Text(x) => json!(x),
    }
}

pub fn to_csv(report: &Report) -> Result<String, CliError> {
    let mut text = String::new();
    for (k, v) in &report.provenance {
        text.push_str(&format!("# {k}: {v}\n"));
    }
    for (k, v) in &report.table.diagnostics {
        text.push_str(&format!("# diagnostic {k}: {}\n", cell_text(v)));
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::io(format!("csv: {e}"));
    writer.write_record(&report.table.columns).map_err(csv_err)?;
    for row in &report.table.rows {
        writer.write_record(row.iter().map(cell_text)).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::io(format!("csv: {e}")))?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(text)
}

pub fn to_json(report: &Report) -> String {
    let provenance: Map<String, Json> = report.provenance.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let diagnostics: Map<String, Json> =
        report.table.diagnostics.iter().map(|(k, v)| (k.clone(), cell_json(v))).collect();
    let rows: Vec<Json> = report
        .table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Json> =
                report.table.columns.iter().zip(row).map(|(c, v)| (c.clone(), cell_json(v))).collect();
            Json::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("provenance".into(), Json::Object(provenance));
    doc.insert("table".into(), json!(report.table.name));
    doc.insert("columns".into(), json!(report.table.columns));
    doc.insert("diagnostics".into(), Json::Object(diagnostics));
    for (k, v) in &report.extras {
        doc.insert(k.clone(), v.clone());
    }
    doc.insert("rows".into(), Json::Array(rows));
    let mut text = serde_json::to_string_pretty(&Json::Object(doc)).expect("serializable");
    text.push('\n');
    text
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Path of the plot written next to a table.
pub fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

/// Writes `report` in `format` to `out`, or to stdout.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let body = match format {
        Format::Json => to_json(report),
        Format::Csv | Format::SvgPlot => to_csv(report)?,
    };
    if format == Format::SvgPlot {
        let out = out.ok_or_else(|| CliError::config("out: svg-plot needs an output path"))?;
        let plot = svg::render(report)
            .ok_or_else(|| CliError::config(format!("format: no plot is defined for table {:?}", report.table.name)))?;
        write_file(out, &body)?;
        return write_file(&svg_path(out), &plot);
    }
    match out {
        Some(path) => write_file(path, &body),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text() {
        assert_eq!(format_float(1e-8), "1e-8");
        assert_eq!(format_float(1.8390711176152763e-10), "1.8390711176152763e-10");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(2.5), "2.5");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_and_json_carry_provenance() {
        let mut table = ScanTable::new("demo", &["a", "b"]);
        table.rows.push(vec![Value::Float(0.5), Value::Text("x,y".into())]);
        table.rows.push(vec![Value::Float(f64::NAN), Value::Bool(true)]);
        table.diagnostics.push(("fit".into(), Value::Float(1e-12)));
        let report = Report::new(table, "demo", "s=1/2 L=2", 1e-8);
        let csv = to_csv(&report).unwrap();
        assert!(csv.contains("# convention: "));
        assert!(csv.contains("# tol: 1e-8\n"));
        assert!(csv.contains("# diagnostic fit: 1e-12\n"));
        assert!(csv.ends_with("a,b\n0.5,\"x,y\"\nNaN,true\n"));
        let doc: Json = serde_json::from_str(&to_json(&report)).unwrap();
        assert_eq!(doc["rows"][0]["a"], json!(0.5));
        assert_eq!(doc["rows"][1]["a"], Json::Null);
        assert_eq!(doc["provenance"]["spec"], json!("s=1/2 L=2"));
    }
}
