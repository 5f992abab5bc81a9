use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{FlatError, Result};

fn io_err(path: &Path, e: io::Error) -> FlatError {
    FlatError::InvalidInput(format!("{}: {e}", path.display()))
}

/// Writes the command result to `--out` or stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| FlatError::Internal(format!("stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| FlatError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Two-column series files for external plotting.
pub struct PlotDir {
    dir: PathBuf,
}

impl PlotDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(PlotDir { dir: dir.to_path_buf() })
    }

    pub fn series<X: Display, Y: Display>(&self, name: &str, header: (&str, &str), points: &[(X, Y)]) -> Result<()> {
        let mut text = format!("{},{}\n", header.0, header.1);
        for (x, y) in points {
            text.push_str(&format!("{x},{y}\n"));
        }
        let path = self.dir.join(format!("{name}.csv"));
        log::info!("writing {}", path.display());
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }
}
