use std::io::Write;
use std::path::Path;

use admg_learn::numfmt::round12;
use admg_learn::{Admg, Dataset, SemParams};
use nalgebra::DMatrix;
use serde_json::Value;

use crate::CliError;

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {what} '{}': {e}", path.display())))
}

/// Reads a graph in JSON form or as an edge list.
pub fn read_graph(path: &Path) -> Result<Admg, CliError> {
    let text = read_text(path, "graph")?;
    let parsed = if text.trim_start().starts_with('{') { Admg::from_json(&text) } else { Admg::from_edge_list(&text) };
    parsed.map_err(|e| CliError::usage(format!("graph '{}': {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::usage(format!("cannot read data '{}': {e}", path.display())))?;
    Dataset::read_csv(std::io::BufReader::new(file)).map_err(|e| CliError::usage(format!("data '{}': {e}", path.display())))
}

pub fn read_params(path: &Path) -> Result<(SemParams, Vec<String>), CliError> {
    let text = read_text(path, "parameters")?;
    SemParams::from_json(&text).map_err(|e| CliError::usage(format!("parameters '{}': {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::usage(format!("cannot write '{}': {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Rounds every number in `v` to 12 significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&rounded(v.clone())).expect("JSON values serialize");
    s.push('\n');
    s
}

fn round_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(round12)
}

/// Parameter JSON with entries rounded to 12 significant digits.
pub fn params_json(p: &SemParams, names: &[String]) -> Result<String, CliError> {
    let r = SemParams::new(round_matrix(p.delta()), round_matrix(p.beta()))?;
    let mut s = r.to_json(names)?;
    s.push('\n');
    Ok(s)
}

/// Permutation taking the vertex order of `names` to the column order of
/// `data`, checked by name.
pub fn order_to_data(names: &[String], data: &Dataset, what: &str) -> Result<Vec<usize>, CliError> {
    if names.len() != data.d() {
        return Err(CliError::usage(format!(
            "{what} has {} vertices but the data has {} columns",
            names.len(),
            data.d()
        )));
    }
    data.names()
        .iter()
        .map(|col| {
            names
                .iter()
                .position(|n| n == col)
                .ok_or_else(|| CliError::usage(format!("data column '{col}' is not a vertex of the {what}")))
        })
        .collect()
}
