//! Exact merging of boundary-form local nets into one ReLU network.
//!
//! Each local net `f` (one input, scalar output) is windowed to its cell
//! `[a, b]` as
//!
//! `f_plus(x) = f(clamp(x)) - f(cancel(x)) + level(x)`
//!
//! with the helper shapes of [`crate::pwl::cell_helpers`]. Off the
//! transition band of width `xi`, `f_plus` equals `f` inside the cell and
//! is exactly zero outside (outside the cell `clamp` and `cancel` coincide,
//! so the compiled difference cancels term by term). The stitched network
//! computes the sum of all windowed locals in a single net whose depth is
//! the local depth plus one hidden layer and whose widths stay within
//! `2 m w + 15 m` of the local width `w`.
//!
//! Inputs are assumed to lie in `[0, 1]`: the construction carries the raw
//! input through ReLU layers as a single nonnegative pass-through unit.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GridPartition;
use crate::mlp::{Layer, MlpParams};
use crate::pwl::{cell_helpers, kink_form, KinkForm};

const CLAMP_UNITS: usize = 2;
const CANCEL_UNITS: usize = 4;
const LEVEL_UNITS: usize = 4;
const CELL_L1_UNITS: usize = CLAMP_UNITS + CANCEL_UNITS;

struct CellParts {
    clamp: KinkForm,
    cancel: KinkForm,
    level: KinkForm,
}

fn set_w(layer: &mut Layer, row: usize, col: usize, v: f64) {
    let ind = layer.in_dim();
    layer.weights_mut()[row * ind + col] = v;
}

fn set_b(layer: &mut Layer, row: usize, v: f64) {
    layer.biases_mut()[row] = v;
}

/// Builds the network computing `sum_j f_plus_j(x)` for locals windowed to
/// the given intervals. All locals must share one architecture with a
/// single input.
fn build_windowed_sum(
    locals: &[&MlpParams],
    intervals: &[(f64, f64)],
    xi: f64,
) -> Result<MlpParams> {
    let m_cells = locals.len();
    if m_cells == 0 {
        return Err(Error::ModelMismatch("no local models".into()));
    }
    if intervals.len() != m_cells {
        return Err(Error::ModelMismatch(format!(
            "{} locals but {} intervals",
            m_cells,
            intervals.len()
        )));
    }
    let spec0 = locals[0].spec();
    if spec0.input_dim() != 1 {
        return Err(Error::ModelMismatch(
            "locals must be boundary form (1 input)".into(),
        ));
    }
    for l in locals.iter().skip(1) {
        if l.spec() != spec0 {
            return Err(Error::ModelMismatch(
                "locals must share one architecture".into(),
            ));
        }
    }
    let h = locals[0].hidden_layer_count();

    let parts: Result<Vec<CellParts>> = locals
        .iter()
        .zip(intervals)
        .map(|(f, &(a, b))| {
            let anchor = f.forward(&[0.0]);
            let hs = cell_helpers(a, b, xi, anchor)?;
            Ok(CellParts {
                clamp: kink_form(&hs.clamp),
                cancel: kink_form(&hs.cancel),
                level: kink_form(&hs.level),
            })
        })
        .collect();
    let parts = parts?;

    let mut layers: Vec<Layer> = Vec::with_capacity(h + 2);

    // Layer 1: clamp and cancel kink units per cell, a pass-through unit
    // when deeper layers still need the raw input, and the level units
    // directly when the local nets are purely affine.
    let carry1 = h >= 1;
    let w1 = m_cells * CELL_L1_UNITS
        + usize::from(carry1)
        + if h == 0 { m_cells * LEVEL_UNITS } else { 0 };
    let clamp_base = |j: usize| j * CELL_L1_UNITS;
    let cancel_base = |j: usize| j * CELL_L1_UNITS + CLAMP_UNITS;
    let carry1_idx = m_cells * CELL_L1_UNITS;
    let mut l1 = Layer::zeros(1, w1);
    for (j, p) in parts.iter().enumerate() {
        for (u, &t) in p.clamp.thresholds.iter().enumerate() {
            set_w(&mut l1, clamp_base(j) + u, 0, 1.0);
            set_b(&mut l1, clamp_base(j) + u, -t);
        }
        for (u, &t) in p.cancel.thresholds.iter().enumerate() {
            set_w(&mut l1, cancel_base(j) + u, 0, 1.0);
            set_b(&mut l1, cancel_base(j) + u, -t);
        }
    }
    if carry1 {
        set_w(&mut l1, carry1_idx, 0, 1.0);
    }
    if h == 0 {
        for (j, p) in parts.iter().enumerate() {
            let base = m_cells * CELL_L1_UNITS + j * LEVEL_UNITS;
            for (u, &t) in p.level.thresholds.iter().enumerate() {
                set_w(&mut l1, base + u, 0, 1.0);
                set_b(&mut l1, base + u, -t);
            }
        }
    }
    layers.push(l1);

    // Layers 2..=h+1: per cell one block applied to the clamp branch and
    // one to the cancel branch; a pass-through unit while still needed and
    // the level kink units in the last hidden layer.
    let mut prev_w = w1;
    let mut prev_carry_idx = carry1_idx;
    let mut prev_block_w = 0usize; // local width feeding the branch blocks
    for l in 2..=h + 1 {
        let local_layer = &locals[0].layers()[l - 2]; // shapes shared
        let wout = local_layer.out_dim();
        let last_hidden = l == h + 1;
        let carry_here = !last_hidden;
        let width = m_cells * 2 * wout
            + usize::from(carry_here)
            + if last_hidden { m_cells * LEVEL_UNITS } else { 0 };
        let mut layer = Layer::zeros(prev_w, width);
        let g_base = |j: usize| j * 2 * wout;
        let c_base = |j: usize| j * 2 * wout + wout;
        for (j, (local, p)) in locals.iter().zip(&parts).enumerate() {
            let ll = &local.layers()[l - 2];
            for r in 0..wout {
                let wrow = ll.weight_row(r);
                let brow = ll.biases()[r];
                if l == 2 {
                    // Branch inputs are the helper affine forms over layer 1.
                    let wscalar = wrow[0];
                    for (u, &c) in p.clamp.coefs.iter().enumerate() {
                        set_w(&mut layer, g_base(j) + r, clamp_base(j) + u, wscalar * c);
                    }
                    set_b(&mut layer, g_base(j) + r, wscalar * p.clamp.bias + brow);
                    for (u, &c) in p.cancel.coefs.iter().enumerate() {
                        set_w(&mut layer, c_base(j) + r, cancel_base(j) + u, wscalar * c);
                    }
                    set_b(&mut layer, c_base(j) + r, wscalar * p.cancel.bias + brow);
                } else {
                    let prev_g = j * 2 * prev_block_w;
                    let prev_c = j * 2 * prev_block_w + prev_block_w;
                    for (i, &wv) in wrow.iter().enumerate() {
                        set_w(&mut layer, g_base(j) + r, prev_g + i, wv);
                        set_w(&mut layer, c_base(j) + r, prev_c + i, wv);
                    }
                    set_b(&mut layer, g_base(j) + r, brow);
                    set_b(&mut layer, c_base(j) + r, brow);
                }
            }
        }
        let carry_idx = m_cells * 2 * wout;
        if carry_here {
            set_w(&mut layer, carry_idx, prev_carry_idx, 1.0);
        }
        if last_hidden {
            for (j, p) in parts.iter().enumerate() {
                let base = m_cells * 2 * wout + j * LEVEL_UNITS;
                for (u, &t) in p.level.thresholds.iter().enumerate() {
                    set_w(&mut layer, base + u, prev_carry_idx, 1.0);
                    set_b(&mut layer, base + u, -t);
                }
            }
        }
        prev_w = width;
        prev_carry_idx = carry_idx;
        prev_block_w = wout;
        layers.push(layer);
    }

    // Output: clamp branch minus cancel branch plus the level contribution
    // for every cell. The local output biases cancel exactly.
    let mut out = Layer::zeros(prev_w, 1);
    let mut bias = 0.0;
    for (j, (local, p)) in locals.iter().zip(&parts).enumerate() {
        let lout = &local.layers()[h];
        if h == 0 {
            let wscalar = lout.weight_row(0)[0];
            let bout = lout.biases()[0];
            for (u, &c) in p.clamp.coefs.iter().enumerate() {
                set_w(&mut out, 0, clamp_base(j) + u, wscalar * c);
            }
            for (u, &c) in p.cancel.coefs.iter().enumerate() {
                set_w(&mut out, 0, cancel_base(j) + u, -(wscalar * c));
            }
            bias += wscalar * p.clamp.bias + bout;
            bias -= wscalar * p.cancel.bias + bout;
            let lbase = m_cells * CELL_L1_UNITS + j * LEVEL_UNITS;
            for (u, &c) in p.level.coefs.iter().enumerate() {
                set_w(&mut out, 0, lbase + u, c);
            }
            bias += p.level.bias;
        } else {
            let wlast = locals[0].layers()[h - 1].out_dim();
            let g_base = j * 2 * wlast;
            let c_base = j * 2 * wlast + wlast;
            for (i, &wv) in lout.weight_row(0).iter().enumerate() {
                set_w(&mut out, 0, g_base + i, wv);
                set_w(&mut out, 0, c_base + i, -wv);
            }
            bias += lout.biases()[0];
            bias -= lout.biases()[0];
            let lbase = m_cells * 2 * wlast + j * LEVEL_UNITS;
            for (u, &c) in p.level.coefs.iter().enumerate() {
                set_w(&mut out, 0, lbase + u, c);
            }
            bias += p.level.bias;
        }
    }
    set_b(&mut out, 0, bias);
    layers.push(out);

    MlpParams::from_layers(layers)
}

/// The windowed version of one local net on one cell: equals the local net
/// on `[a + xi, b - xi]` and vanishes outside `[a, b]`.
pub fn window_net(local: &MlpParams, interval: (f64, f64), xi: f64) -> Result<MlpParams> {
    build_windowed_sum(&[local], &[interval], xi)
}

/// Stitches boundary-form locals (one per grid cell, d = 2) into a single
/// network computing the sum of their windowed versions.
pub fn stitch(locals: &[MlpParams], partition: &GridPartition) -> Result<MlpParams> {
    if locals.len() != partition.m() {
        return Err(Error::ModelMismatch(format!(
            "{} locals for {} cells",
            locals.len(),
            partition.m()
        )));
    }
    let refs: Vec<&MlpParams> = locals.iter().collect();
    let intervals: Vec<(f64, f64)> = (0..partition.m())
        .map(|j| partition.cell_interval(j))
        .collect();
    build_windowed_sum(&refs, &intervals, partition.xi())
}

/// Tolerance for the window/stitch exactness checks.
pub const STITCH_TOL: f64 = 1e-9;

/// Verification report for a stitched network.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchReport {
    /// Max `|f_plus_j(x) - f_j(x)|` over cell interiors (off the band).
    pub interior_max_err: f64,
    /// Max `|f_plus_j(x)|` outside each cell.
    pub exterior_max_err: f64,
    /// Max `|stitched(x) - sum_j f_plus_j(x)|` on a coarser grid.
    pub sum_max_err: f64,
    pub local_hidden_layers: usize,
    pub stitched_hidden_layers: usize,
    pub stitched_max_width: usize,
    /// Constructive width bound `2 m w_local + 15 m`.
    pub width_bound: usize,
    pub depth_ok: bool,
    pub width_ok: bool,
    /// Largest absolute weight in the stitched net; the transition ramps
    /// scale like `1/xi`, so this is reported rather than constrained.
    pub max_abs_weight: f64,
    pub passed: bool,
}

/// Checks the windowed nets against the raw locals on a `grid_points`-point
/// uniform grid over `[0, 1]`, plus the size accounting of the stitched net.
pub fn verify(
    stitched: &MlpParams,
    locals: &[MlpParams],
    partition: &GridPartition,
    grid_points: usize,
) -> Result<StitchReport> {
    assert!(grid_points >= 2);
    let m = partition.m();
    if locals.len() != m {
        return Err(Error::ModelMismatch(format!(
            "{} locals for {} cells",
            locals.len(),
            m
        )));
    }
    let xi = partition.xi();
    let windows: Result<Vec<MlpParams>> = (0..m)
        .map(|j| window_net(&locals[j], partition.cell_interval(j), xi))
        .collect();
    let windows = windows?;

    let mut interior = 0.0f64;
    let mut exterior = 0.0f64;
    for i in 0..grid_points {
        let x = i as f64 / (grid_points - 1) as f64;
        for j in 0..m {
            let (a, b) = partition.cell_interval(j);
            if x >= a + xi && x <= b - xi {
                let err = (windows[j].forward(&[x]) - locals[j].forward(&[x])).abs();
                interior = interior.max(err);
            } else if x < a || x > b {
                exterior = exterior.max(windows[j].forward(&[x]).abs());
            }
        }
    }

    let sum_grid = grid_points.min(4001);
    let mut sum_err = 0.0f64;
    for i in 0..sum_grid {
        let x = i as f64 / (sum_grid - 1) as f64;
        let total: f64 = windows.iter().map(|w| w.forward(&[x])).sum();
        sum_err = sum_err.max((stitched.forward(&[x]) - total).abs());
    }

    let local_hidden = locals[0].hidden_layer_count();
    let stitched_hidden = stitched.hidden_layer_count();
    let local_max_width = locals[0]
        .spec()
        .hidden_widths()
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    let width_bound = 2 * m * local_max_width + 15 * m;
    let stitched_max_width = stitched.max_width();
    let depth_ok = stitched_hidden == local_hidden + 1;
    let width_ok = stitched_max_width <= width_bound;
    let passed = interior < STITCH_TOL
        && exterior < STITCH_TOL
        && sum_err < STITCH_TOL
        && depth_ok
        && width_ok;

    Ok(StitchReport {
        interior_max_err: interior,
        exterior_max_err: exterior,
        sum_max_err: sum_err,
        local_hidden_layers: local_hidden,
        stitched_hidden_layers: stitched_hidden,
        stitched_max_width,
        width_bound,
        depth_ok,
        width_ok,
        max_abs_weight: stitched.max_abs_weight(),
        passed,
    })
}
