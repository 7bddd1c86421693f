//! Divide-and-conquer classifier: one local net per grid cell, trained on
//! the samples routed to that cell, with routed prediction.
//!
//! Two model forms:
//! - logit: each local net sees the full point and its sign is the label;
//! - boundary: each local net maps the reduced coordinates to a boundary
//!   height and the label is the sign of `x_d - f(x_{-d})`, so the positive
//!   class sits above the learned boundary, matching the task's conditional
//!   probability. Boundary-form models in d = 2 also carry the stitched
//!   single-network version.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::grid::GridPartition;
use crate::mlp::{self, MlpParams, MlpSpec, ScoredData, TrainConfig};
use crate::stitch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelForm {
    Logit,
    Boundary,
}

/// One trained cell. Cells that received no samples keep an all-zero net
/// and are flagged degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub params: MlpParams,
    pub degenerate: bool,
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedModel {
    partition: GridPartition,
    form: ModelForm,
    dim: usize,
    /// When set, each cell's reduced coordinates are affinely mapped onto
    /// `[0, 1]` before its local net sees them. Narrow cells otherwise give
    /// the first layer a tiny input range, which conditions training badly.
    rescale: bool,
    cells: Vec<LocalModel>,
    stitched: Option<MlpParams>,
}

impl LocalizedModel {
    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn form(&self) -> ModelForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[LocalModel] {
        &self.cells
    }

    /// The stitched single-net version; present only for boundary form in
    /// d = 2.
    pub fn stitched(&self) -> Option<&MlpParams> {
        self.stitched.as_ref()
    }

    pub fn rescale(&self) -> bool {
        self.rescale
    }

    pub fn degenerate_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.degenerate)
            .map(|(i, _)| i)
            .collect()
    }

    /// Routed prediction: the containing cell's local model decides.
    /// Ties go to `+1`.
    pub fn predict(&self, point: &[f64]) -> i8 {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        let j = self.partition.cell_of(&point[..self.dim - 1]);
        let params = &self.cells[j].params;
        let score = if self.rescale {
            let mut stack = [0.0f64; 16];
            let mut heap;
            let input: &mut [f64] = if params.input_dim() <= 16 {
                &mut stack[..params.input_dim()]
            } else {
                heap = alloc::vec![0.0; params.input_dim()];
                &mut heap
            };
            local_input_into(point, self.form, &self.partition, true, input);
            match self.form {
                ModelForm::Logit => params.forward(input),
                ModelForm::Boundary => point[self.dim - 1] - params.forward(input),
            }
        } else {
            match self.form {
                ModelForm::Logit => params.forward(point),
                ModelForm::Boundary => {
                    point[self.dim - 1] - params.forward(&point[..self.dim - 1])
                }
            }
        };
        if score >= 0.0 { 1 } else { -1 }
    }

    /// Assembles a model from parts (deserialization path).
    pub fn from_parts(
        partition: GridPartition,
        form: ModelForm,
        dim: usize,
        rescale: bool,
        cells: Vec<LocalModel>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpec("dim must be >= 2".into()));
        }
        let want = partition.num_cells(dim - 1);
        if cells.len() != want {
            return Err(Error::ModelMismatch(alloc::format!(
                "expected {want} cells, got {}",
                cells.len()
            )));
        }
        let expect_in = match form {
            ModelForm::Logit => dim,
            ModelForm::Boundary => dim - 1,
        };
        for c in &cells {
            if c.params.input_dim() != expect_in {
                return Err(Error::ModelMismatch(
                    "cell input dimension does not match the form".into(),
                ));
            }
        }
        let stitched = build_stitched(&partition, form, dim, rescale, &cells)?;
        Ok(LocalizedModel {
            partition,
            form,
            dim,
            rescale,
            cells,
            stitched,
        })
    }
}

/// The local-net input for a routed point: reduced coordinates, rescaled
/// onto the cell when requested, plus `x_d` for logit form.
fn local_input_into(
    point: &[f64],
    form: ModelForm,
    partition: &GridPartition,
    rescale: bool,
    out: &mut [f64],
) {
    let r = point.len() - 1;
    if rescale {
        let m = partition.m() as f64;
        for (o, &x) in out[..r].iter_mut().zip(&point[..r]) {
            let j = partition.cell_index_1d(x);
            *o = (x - j as f64 / m) * m;
        }
    } else {
        out[..r].copy_from_slice(&point[..r]);
    }
    if form == ModelForm::Logit {
        out[r] = point[r];
    }
}

/// Boundary-form models in d = 2 carry a stitched net over the raw
/// coordinate; rescaled locals are composed with their cell's affine map
/// first.
fn build_stitched(
    partition: &GridPartition,
    form: ModelForm,
    dim: usize,
    rescale: bool,
    cells: &[LocalModel],
) -> Result<Option<MlpParams>> {
    if form != ModelForm::Boundary || dim != 2 {
        return Ok(None);
    }
    let m = partition.m() as f64;
    let params: Vec<MlpParams> = cells
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if rescale {
                c.params.with_input_affine(&[m], &[-(j as f64)])
            } else {
                c.params.clone()
            }
        })
        .collect();
    Ok(Some(stitch::stitch(&params, partition)?))
}

/// Routes every sample to its cell and trains one local model per cell.
/// Cell `j` trains with seed `config.seed + j`, so an `m = 1` partition
/// (without rescaling) reproduces plain training bit for bit. Empty cells
/// yield flagged zero models.
pub fn train_localized(
    data: &Dataset,
    partition: &GridPartition,
    local_spec: &MlpSpec,
    form: ModelForm,
    cfg: &TrainConfig,
) -> Result<LocalizedModel> {
    train_localized_opts(data, partition, local_spec, form, false, cfg)
}

/// [`train_localized`] with the cell-rescaling choice explicit.
pub fn train_localized_opts(
    data: &Dataset,
    partition: &GridPartition,
    local_spec: &MlpSpec,
    form: ModelForm,
    rescale: bool,
    cfg: &TrainConfig,
) -> Result<LocalizedModel> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let dim = data.dim();
    if dim < 2 {
        return Err(Error::InvalidSpec("data must have dimension >= 2".into()));
    }
    let expect_in = match form {
        ModelForm::Logit => dim,
        ModelForm::Boundary => dim - 1,
    };
    if local_spec.input_dim() != expect_in {
        return Err(Error::DimMismatch {
            expected: expect_in,
            got: local_spec.input_dim(),
        });
    }

    let n_cells = partition.num_cells(dim - 1);
    let mut routed: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    for i in 0..data.len() {
        routed[partition.cell_of(&data.point(i)[..dim - 1])].push(i);
    }

    let mut cells = Vec::with_capacity(n_cells);
    let mut input_buf = vec![0.0; expect_in];
    for (j, idxs) in routed.iter().enumerate() {
        if idxs.is_empty() {
            cells.push(LocalModel {
                params: MlpParams::zeros(local_spec),
                degenerate: true,
                n_train: 0,
            });
            continue;
        }
        let mut inputs = Vec::with_capacity(idxs.len() * expect_in);
        let mut offsets = Vec::new();
        let mut labels = Vec::with_capacity(idxs.len());
        for &i in idxs {
            let p = data.point(i);
            local_input_into(p, form, partition, rescale, &mut input_buf);
            inputs.extend_from_slice(&input_buf);
            match form {
                ModelForm::Logit => labels.push(data.label(i)),
                ModelForm::Boundary => {
                    // The classification score is x_d - f(x_{-d}); the engine
                    // scores net + offset, so train on the negated score by
                    // flipping labels: l(x_d - net, y) = l(net - x_d, -y).
                    offsets.push(-p[dim - 1]);
                    labels.push(-data.label(i));
                }
            }
        }
        let mut cell_cfg = cfg.clone();
        cell_cfg.seed = cfg.seed.wrapping_add(j as u64);
        let params = mlp::train_engine(
            &ScoredData {
                dim: expect_in,
                inputs: &inputs,
                offsets: if offsets.is_empty() {
                    None
                } else {
                    Some(&offsets)
                },
                labels: &labels,
            },
            local_spec,
            &cell_cfg,
        )?;
        cells.push(LocalModel {
            params,
            degenerate: false,
            n_train: idxs.len(),
        });
    }

    let stitched = build_stitched(partition, form, dim, rescale, &cells)?;
    Ok(LocalizedModel {
        partition: *partition,
        form,
        dim,
        rescale,
        cells,
        stitched,
    })
}
