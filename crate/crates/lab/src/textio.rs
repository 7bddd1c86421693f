//! Pinned text formatting and atomic file writes.
//!
//! Doubles are written with 17 significant digits (`{:.16e}`), which
//! round-trips exactly in IEEE double precision.

use std::fs;
use std::path::Path;

use crate::error::{io_data, AppResult};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Shortest round-trip form, used for human-facing fields like `k`.
pub fn fmt_short(v: f64) -> String {
    format!("{v}")
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| format!("bad float {s:?}: {e}"))
}

/// Writes a file atomically: temp file in the same directory, then rename.
/// A failed write leaves no partial output behind.
pub fn write_atomic(path: &Path, contents: &str) -> AppResult<()> {
    if let Some(parent) = path.parent()
        && !parent.as_os_str().is_empty()
    {
        io_data(fs::create_dir_all(parent), "creating output directory")?;
    }
    let tmp = path.with_extension("tmp_write");
    io_data(fs::write(&tmp, contents), &format!("writing {}", tmp.display()))?;
    let renamed = fs::rename(&tmp, path);
    if renamed.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    io_data(renamed, &format!("renaming into {}", path.display()))
}

pub fn read_to_string(path: &Path) -> AppResult<String> {
    io_data(fs::read_to_string(path), &format!("reading {}", path.display()))
}
