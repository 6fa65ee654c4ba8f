//! Atomic artifact writes and the content-addressed pool cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ris_sizer_core::catalog::UseCase;
use ris_sizer_core::kpi::{KpiPool, RisSize};
use ris_sizer_core::{PhaseStates, RadioParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Bumped whenever the scattering model changes in a way that invalidates
/// cached pools.
pub const MODEL_ID: &str = "bistatic-cos-q/v1";

/// Writes `path` through a temporary file in the same directory and renames
/// it into place.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(&format!("creating {}", dir.display()), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::runtime(&format!("temp file in {}", dir.display()), e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf)?;
        buf.flush().map_err(|e| CliError::runtime("flushing output", e))?;
    }
    tmp.persist(path)
        .map_err(|e| CliError::runtime(&format!("writing {}", path.display()), e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::runtime("serializing JSON", e))?;
        w.write_all(b"\n").map_err(|e| CliError::runtime("writing JSON", e))
    })
}

/// Everything a pool's contents depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolKey {
    pub model: String,
    pub usecase: UseCase,
    pub radio: RadioParams,
    pub noise: ris_sizer_core::link::NoiseParams,
    pub ris_size: RisSize,
    pub bearings_deg: Vec<f64>,
    pub phase_states: PhaseStates,
    pub e_b: f64,
}

impl PoolKey {
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("pool key serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: PoolKey,
    pool: KpiPool,
}

pub struct PoolCache {
    dir: PathBuf,
}

impl PoolCache {
    pub fn new(out_dir: &Path) -> Self {
        PoolCache {
            dir: out_dir.join("cache"),
        }
    }

    fn path(&self, key: &PoolKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    /// Cached pool for `key`, if present and its stored key matches exactly.
    pub fn load(&self, key: &PoolKey) -> Option<KpiPool> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.key == *key).then_some(entry.pool)
    }

    pub fn store(&self, key: &PoolKey, pool: &KpiPool) -> CliResult<()> {
        let entry = CacheEntry {
            key: key.clone(),
            pool: pool.clone(),
        };
        write_atomic(&self.path(key), |w| {
            serde_json::to_writer(&mut *w, &entry).map_err(|e| CliError::runtime("serializing cache", e))
        })
    }
}
