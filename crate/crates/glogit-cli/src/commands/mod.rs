pub mod diagnose;
pub mod fit;
pub mod simulate;
pub mod study;

use std::path::{Path, PathBuf};

use crate::error::{CmdError, CmdResult};

/// Environment variable that overrides the default output directory when
/// `--out-dir` is not given.
pub const OUT_DIR_ENV: &str = "GLOGIT_OUT_DIR";

/// `--out-dir` flag, else `GLOGIT_OUT_DIR`, else the current directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> CmdResult<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CmdError::Io(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Parse a comma-separated list of reals.
pub fn parse_f64_list(raw: &str, flag: &str) -> CmdResult<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CmdError::Usage(format!("{flag}: cannot parse '{s}' as a number")))
        })
        .collect()
}

pub fn parse_usize_list(raw: &str, flag: &str) -> CmdResult<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CmdError::Usage(format!("{flag}: cannot parse '{s}' as a count")))
        })
        .collect()
}

pub fn check_positive(value: f64, flag: &str) -> CmdResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CmdError::Usage(format!("{flag} must be > 0, got {value}")))
    }
}

pub fn warn_if_rank_deficient(data: &glogit::Dataset, path: &Path) {
    if !data.is_full_column_rank() {
        eprintln!(
            "warning: design matrix from {} is not full column rank; estimates may be unstable",
            path.display()
        );
    }
}
