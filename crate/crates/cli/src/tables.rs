//! Coefficient and energy tables on disk.
//!
//! Coefficient CSV columns are `shape,lambda,k,partition,alpha`. The JSON mirror
//! holds the same rows under `rows` next to a `metadata` object. `lambda` is printed
//! with ten decimals and `alpha` in shortest round-trip form, so reading a table
//! back restores every coefficient exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use rankframe::combinatorics::{IntegerPartition, OrderedSetPartition};
use rankframe::frame::{Coefficient, CoefficientTable, EnergyRow, Transform};
use rankframe::spectral::eigen_key;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn format_lambda(lambda: f64) -> String {
    format!("{lambda:.10}")
}

pub fn coefficients_csv(table: &CoefficientTable) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["shape", "lambda", "k", "partition", "alpha"])?;
    for r in &table.rows {
        w.write_record([
            r.shape.label(),
            format_lambda(r.lambda),
            r.k.to_string(),
            r.lifting.label(),
            r.alpha.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn coefficients_json(table: &CoefficientTable) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "shape": r.shape.label(),
                "lambda": format_lambda(r.lambda),
                "k": r.k,
                "partition": r.lifting.label(),
                "alpha": r.alpha,
            })
        })
        .collect();
    let doc = json!({
        "metadata": {
            "n": table.n,
            "dataset": table.dataset,
            "shapes": table.shapes.iter().map(|s| s.label()).collect::<Vec<_>>(),
            "max_eigs": table.max_eigs,
            "rows": table.rows.len(),
            "energy": table.energy(),
        },
        "rows": rows,
    });
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_coefficients(
    table: &CoefficientTable,
    path: &Path,
    format: Format,
) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => coefficients_csv(table)?,
        Format::Json => coefficients_json(table)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

fn parse_row(
    shape: &str,
    lambda: &str,
    k: &str,
    partition: &str,
    alpha: f64,
    line: usize,
) -> Result<Coefficient, CliError> {
    let bad = |msg: String| CliError::Invalid(format!("coefficient row {line}: {msg}"));
    let shape = IntegerPartition::parse(shape)?;
    let lambda: f64 = lambda
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad lambda '{lambda}'")))?;
    let k: usize = k.trim().parse().map_err(|_| bad(format!("bad k '{k}'")))?;
    let lifting = OrderedSetPartition::parse_label(partition, shape.n())?;
    if lifting.sizes() != shape.parts() {
        return Err(bad(format!("{partition} is not a lifting of {shape}")));
    }
    Ok(Coefficient {
        key: eigen_key(lambda),
        shape,
        lambda,
        k,
        lifting,
        alpha,
    })
}

/// Reads a CSV or JSON coefficient table, chosen by content.
pub fn read_coefficients(path: &Path) -> Result<CoefficientTable, CliError> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut dataset = None;
    let mut max_eigs = None;
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(&text)?;
        let meta = &doc["metadata"];
        dataset = meta["dataset"].as_str().map(str::to_owned);
        max_eigs = meta["max_eigs"].as_u64().map(|x| x as usize);
        let list = doc["rows"]
            .as_array()
            .ok_or_else(|| CliError::Invalid("JSON table has no 'rows' array".into()))?;
        for (i, r) in list.iter().enumerate() {
            let field = |name: &str| -> Result<String, CliError> {
                match &r[name] {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(x) => Ok(x.to_string()),
                    _ => Err(CliError::Invalid(format!(
                        "coefficient row {}: missing '{name}'",
                        i + 1
                    ))),
                }
            };
            let alpha = r["alpha"].as_f64().ok_or_else(|| {
                CliError::Invalid(format!("coefficient row {}: missing 'alpha'", i + 1))
            })?;
            rows.push(parse_row(
                &field("shape")?,
                &field("lambda")?,
                &field("k")?,
                &field("partition")?,
                alpha,
                i + 1,
            )?);
        }
    } else {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(CliError::Invalid(format!(
                    "coefficient row {}: expected 5 columns",
                    i + 1
                )));
            }
            let alpha: f64 = rec[4].trim().parse().map_err(|_| {
                CliError::Invalid(format!(
                    "coefficient row {}: bad alpha '{}'",
                    i + 1,
                    &rec[4]
                ))
            })?;
            rows.push(parse_row(&rec[0], &rec[1], &rec[2], &rec[3], alpha, i + 1)?);
        }
    }
    let n = rows.first().map(|r| r.shape.n()).unwrap_or(0);
    if rows.iter().any(|r| r.shape.n() != n) {
        return Err(CliError::Invalid("coefficient rows mix different n".into()));
    }
    let mut shapes: Vec<IntegerPartition> = Vec::new();
    for r in &rows {
        if !shapes.contains(&r.shape) {
            shapes.push(r.shape.clone());
        }
    }
    Ok(CoefficientTable {
        n,
        rows,
        dataset,
        shapes,
        max_eigs,
    })
}

/// Replaces each row's eigenvalue key by the key of the matching cached eigenspace.
pub fn resolve_keys(t: &Transform, table: &mut CoefficientTable) -> Result<(), CliError> {
    for r in &mut table.rows {
        let b = t.bundle(&r.shape)?;
        let space = b
            .spectrum
            .spaces
            .iter()
            .find(|s| (s.lambda - r.lambda).abs() < 1e-6)
            .ok_or_else(|| {
                CliError::Invalid(format!(
                    "{} has no eigenvalue {}",
                    r.shape,
                    format_lambda(r.lambda)
                ))
            })?;
        r.key = space.key;
        r.lambda = space.lambda;
    }
    Ok(())
}

pub fn energy_csv(rows: &[EnergyRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["shape", "lambda", "energy", "source"])?;
    for r in rows {
        w.write_record([
            r.shape.label(),
            format_lambda(r.lambda),
            r.energy.to_string(),
            (if r.direct { "direct" } else { "conjugate" }).to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}
