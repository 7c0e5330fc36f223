use std::path::PathBuf;

use fracharm::extension::{s_poisson_symbol, PoissonSymbol, RadialGrid};

use crate::failure::Failure;

pub const CACHE_ENV: &str = "FRACHARM_CACHE_DIR";

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// The table for (s, n) on the default radial grid, read from the cache
/// directory when one is configured and stored there otherwise.
pub fn load(s: f64, dim: usize) -> Result<PoissonSymbol, Failure> {
    let grid = RadialGrid::default();
    match cache_dir() {
        Some(dir) => PoissonSymbol::load_or_build(&dir, s, dim, grid).map_err(|e| Failure::numerical("symbol table", e)),
        None => s_poisson_symbol(s, dim, grid).map_err(|e| Failure::numerical("symbol table", e)),
    }
}

/// Builds the table and writes it into `dir`, replacing any existing file.
pub fn store(dir: &std::path::Path, s: f64, dim: usize) -> Result<PathBuf, Failure> {
    let grid = RadialGrid::default();
    let table = s_poisson_symbol(s, dim, grid).map_err(|e| match e {
        fracharm::Error::ParameterRange { .. } => Failure::Config(e.to_string()),
        other => Failure::numerical("symbol table", other),
    })?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::Output(format!("{}: {e}", dir.display())))?;
    let path = dir.join(PoissonSymbol::cache_file_name(dim, s, grid.r_max));
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, table.to_cache_string()).map_err(|e| Failure::Output(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &path).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))?;
    Ok(path)
}
