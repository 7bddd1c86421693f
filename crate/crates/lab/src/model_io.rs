//! Model serialization.
//!
//! MLP files are plain text: a header `mlp <input_dim> <hidden_widths...>`
//! followed by one block per affine layer, each block being a line of
//! row-major weights and a line of biases, 17 significant digits
//! (round-trip exact).
//!
//! Localized models get a manifest (`m`, `xi`, `form`, `dim`, per-cell
//! file names with the degenerate flag and training count) plus one MLP
//! file per cell.

use std::path::{Path, PathBuf};

use boundary_lab_core::localized::{LocalModel, LocalizedModel, ModelForm};
use boundary_lab_core::grid::GridPartition;
use boundary_lab_core::mlp::{Layer, MlpParams};

use crate::error::{AppError, AppResult};
use crate::textio;

pub fn mlp_to_string(params: &MlpParams) -> String {
    let spec = params.spec();
    let mut out = String::from("mlp");
    out.push(' ');
    out.push_str(&spec.input_dim().to_string());
    for w in spec.hidden_widths() {
        out.push(' ');
        out.push_str(&w.to_string());
    }
    out.push('\n');
    for layer in params.layers() {
        push_floats(&mut out, layer.weights());
        push_floats(&mut out, layer.biases());
    }
    out
}

fn push_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&textio::fmt_f64(*v));
    }
    out.push('\n');
}

pub fn write_mlp(path: &Path, params: &MlpParams) -> AppResult<()> {
    textio::write_atomic(path, &mlp_to_string(params))
}

pub fn read_mlp(path: &Path) -> AppResult<MlpParams> {
    let text = textio::read_to_string(path)?;
    parse_mlp(&text).map_err(|m| AppError::data(format!("{}: {m}", path.display())))
}

pub fn parse_mlp(text: &str) -> Result<MlpParams, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty model file")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("mlp") {
        return Err("expected `mlp` header".into());
    }
    let dims: Vec<usize> = parts
        .map(|p| p.parse().map_err(|e| format!("bad header field {p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() {
        return Err("header needs at least the input dimension".into());
    }
    let input_dim = dims[0];
    let hidden = &dims[1..];
    let mut shapes: Vec<(usize, usize)> = Vec::new();
    let mut fan_in = input_dim;
    for &w in hidden {
        shapes.push((fan_in, w));
        fan_in = w;
    }
    shapes.push((fan_in, 1));

    let mut layers = Vec::with_capacity(shapes.len());
    for (li, (i, o)) in shapes.into_iter().enumerate() {
        let wline = lines.next().ok_or(format!("missing weights for layer {li}"))?;
        let bline = lines.next().ok_or(format!("missing biases for layer {li}"))?;
        let weights = parse_floats(wline, i * o, &format!("layer {li} weights"))?;
        let biases = parse_floats(bline, o, &format!("layer {li} biases"))?;
        layers.push(Layer::from_parts(i, o, weights, biases).map_err(|e| e.to_string())?);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err("trailing content after the last layer".into());
    }
    MlpParams::from_layers(layers).map_err(|e| e.to_string())
}

fn parse_floats(line: &str, want: usize, what: &str) -> Result<Vec<f64>, String> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(textio::parse_f64)
        .collect::<Result<_, _>>()?;
    if vals.len() != want {
        return Err(format!("{what}: expected {want} values, got {}", vals.len()));
    }
    Ok(vals)
}

fn form_str(form: ModelForm) -> &'static str {
    match form {
        ModelForm::Logit => "logit",
        ModelForm::Boundary => "boundary",
    }
}

/// Writes `<stem>.manifest` plus `<stem>_cell<j>.txt` next to it.
pub fn write_localized(dir: &Path, stem: &str, model: &LocalizedModel) -> AppResult<()> {
    let mut manifest = format!(
        "localized\nm = {}\nxi = {}\nform = {}\ndim = {}\nrescale = {}\ncells = {}\n",
        model.partition().m(),
        textio::fmt_f64(model.partition().xi()),
        form_str(model.form()),
        model.dim(),
        u8::from(model.rescale()),
        model.cells().len()
    );
    for (j, cell) in model.cells().iter().enumerate() {
        let file = format!("{stem}_cell{j}.txt");
        manifest.push_str(&format!(
            "cell {j} {file} {} {}\n",
            u8::from(cell.degenerate),
            cell.n_train
        ));
        write_mlp(&dir.join(&file), &cell.params)?;
    }
    textio::write_atomic(&dir.join(format!("{stem}.manifest")), &manifest)
}

pub fn read_localized(manifest_path: &Path) -> AppResult<LocalizedModel> {
    let dir = manifest_path.parent().map(PathBuf::from).unwrap_or_default();
    let text = textio::read_to_string(manifest_path)?;
    let bad = |m: String| AppError::data(format!("{}: {m}", manifest_path.display()));
    let mut lines = text.lines();
    if lines.next() != Some("localized") {
        return Err(bad("expected `localized` header".into()));
    }
    let mut m = None;
    let mut xi = None;
    let mut form = None;
    let mut dim = None;
    let mut rescale = false;
    let mut n_cells = None;
    let mut cells: Vec<(usize, String, bool, usize)> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("cell ") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad(format!("bad cell line {line:?}")));
            }
            let idx = fields[0].parse().map_err(|e| bad(format!("cell index: {e}")))?;
            let degenerate = fields[2] == "1";
            let n_train = fields[3].parse().map_err(|e| bad(format!("cell count: {e}")))?;
            cells.push((idx, fields[1].to_string(), degenerate, n_train));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(format!("unparseable line {line:?}")));
        };
        let value = value.trim();
        match key.trim() {
            "m" => m = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "xi" => xi = Some(textio::parse_f64(value).map_err(bad)?),
            "form" => {
                form = Some(match value {
                    "logit" => ModelForm::Logit,
                    "boundary" => ModelForm::Boundary,
                    other => return Err(bad(format!("unknown form {other:?}"))),
                })
            }
            "dim" => dim = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "rescale" => rescale = value == "1",
            "cells" => n_cells = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let (Some(m), Some(xi), Some(form), Some(dim), Some(n_cells)) = (m, xi, form, dim, n_cells)
    else {
        return Err(bad("incomplete manifest".into()));
    };
    if cells.len() != n_cells {
        return Err(bad(format!(
            "manifest lists {} cells, expected {n_cells}",
            cells.len()
        )));
    }
    cells.sort_by_key(|c| c.0);
    let mut local = Vec::with_capacity(n_cells);
    for (want, (idx, file, degenerate, n_train)) in cells.into_iter().enumerate() {
        if idx != want {
            return Err(bad(format!("cell indices not contiguous at {idx}")));
        }
        let params = read_mlp(&dir.join(&file))?;
        local.push(LocalModel {
            params,
            degenerate,
            n_train,
        });
    }
    let partition = GridPartition::new(m, xi).map_err(|e| bad(e.to_string()))?;
    LocalizedModel::from_parts(partition, form, dim, rescale, local).map_err(|e| bad(e.to_string()))
}
