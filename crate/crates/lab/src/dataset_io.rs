//! Dataset CSV and its sidecar metadata file.
//!
//! CSV: header `x1,x2,y`, coordinates with 17 significant digits, labels
//! -1/1. Sidecar: `key = value` lines echoing the generation parameters
//! (k, convention, seed, n).

use std::path::Path;

use boundary_lab_core::data::Dataset;
use boundary_lab_core::synth::Convention;

use crate::error::{AppError, AppResult};
use crate::textio;

pub fn write_dataset(path: &Path, data: &Dataset) -> AppResult<()> {
    assert_eq!(data.dim(), 2, "dataset files are 2-d");
    let mut out = String::with_capacity(16 + data.len() * 48);
    out.push_str("x1,x2,y\n");
    for s in data.iter() {
        out.push_str(&textio::fmt_f64(s.point[0]));
        out.push(',');
        out.push_str(&textio::fmt_f64(s.point[1]));
        out.push(',');
        out.push_str(if s.label > 0 { "1" } else { "-1" });
        out.push('\n');
    }
    textio::write_atomic(path, &out)
}

pub fn read_dataset(path: &Path) -> AppResult<Dataset> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x1,x2,y") => {}
        other => {
            return Err(AppError::data(format!(
                "{}: expected header x1,x2,y, got {other:?}",
                path.display()
            )))
        }
    }
    let mut data = Dataset::new(2);
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = |m: String| AppError::data(format!("{} row {}: {m}", path.display(), i + 2));
        let x1 = textio::parse_f64(parts.next().unwrap_or("")).map_err(err)?;
        let x2 = textio::parse_f64(parts.next().unwrap_or("")).map_err(err)?;
        let y: i8 = parts
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| err(format!("bad label: {e}")))?;
        if parts.next().is_some() {
            return Err(err("too many fields".into()));
        }
        if y != 1 && y != -1 {
            return Err(err(format!("label must be -1 or 1, got {y}")));
        }
        if !((0.0..=1.0).contains(&x1) && (0.0..=1.0).contains(&x2)) {
            return Err(err(format!("point ({x1}, {x2}) outside the unit square")));
        }
        data.push(&[x1, x2], y);
    }
    Ok(data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub k: f64,
    pub convention: Convention,
    pub seed: u64,
    pub n: usize,
}

pub fn write_meta(path: &Path, meta: &DatasetMeta) -> AppResult<()> {
    let conv = match meta.convention {
        Convention::M1Consistent => "m1_consistent",
        Convention::Literal => "literal",
    };
    let text = format!(
        "k = {}\nconvention = {conv}\nseed = {}\nn = {}\n",
        textio::fmt_short(meta.k),
        meta.seed,
        meta.n
    );
    textio::write_atomic(path, &text)
}

pub fn read_meta(path: &Path) -> AppResult<DatasetMeta> {
    let text = textio::read_to_string(path)?;
    let mut k = None;
    let mut convention = None;
    let mut seed = None;
    let mut n = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "k" => k = Some(textio::parse_f64(value).map_err(AppError::data)?),
            "convention" => {
                convention = Some(match value {
                    "m1_consistent" => Convention::M1Consistent,
                    "literal" => Convention::Literal,
                    other => {
                        return Err(AppError::data(format!("unknown convention {other:?}")))
                    }
                })
            }
            "seed" => {
                seed = Some(value.parse().map_err(|e| {
                    AppError::data(format!("bad seed {value:?}: {e}"))
                })?)
            }
            "n" => {
                n = Some(value.parse().map_err(|e| {
                    AppError::data(format!("bad n {value:?}: {e}"))
                })?)
            }
            _ => {}
        }
    }
    match (k, convention, seed, n) {
        (Some(k), Some(convention), Some(seed), Some(n)) => Ok(DatasetMeta {
            k,
            convention,
            seed,
            n,
        }),
        _ => Err(AppError::data(format!(
            "{}: incomplete metadata",
            path.display()
        ))),
    }
}
