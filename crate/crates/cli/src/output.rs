use std::io::Write;
use std::path::{Path, PathBuf};

use hebb_dual::Dataset;

use crate::error::{CliError, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Dataset::from_json(&text).map_err(|e| CliError::Malformed {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// `run.json` → `run.csv`; `run` → `run.csv`.
pub fn sibling_csv(path: &Path) -> PathBuf {
    path.with_extension("csv")
}
