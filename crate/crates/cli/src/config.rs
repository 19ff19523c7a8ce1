//! Config-file defaults, option resolution, and the run hash.

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Optional defaults loadable from a `--config` JSON file. One schema is
/// shared by all subcommands; keys irrelevant to a command are ignored by
/// it, unknown keys are rejected outright.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<std::path::PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub level: Option<f64>,
    pub lambda: Option<Vec<f64>>,
    pub metric: Option<Vec<String>>,
    pub nuisance: Option<String>,
    pub folds: Option<usize>,
    pub bootstrap: Option<usize>,
    pub dgp: Option<String>,
    pub kind: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub path: Option<String>,
    pub ci: Option<String>,
    pub draws: Option<u64>,
    pub oracle_draws: Option<u64>,
    pub input: Option<std::path::PathBuf>,
    pub input_surrogate: Option<std::path::PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::schema(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::schema(format!("config {}: {e}", path.display())))
    }
}

/// Resolve one option: flag/env value, else config file, else default.
pub fn resolve<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Master seed: the resolved value, or a recorded entropy draw so that an
/// unseeded run is still reproducible from its own output.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> u64 {
    flag.or(file).unwrap_or_else(rand::random)
}

/// Install the global worker pool; `None` keeps the rayon default.
pub fn install_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::schema("threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::schema(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// FNV-1a hash of the canonical JSON serialization of the resolved run
/// configuration; stable across platforms and runs.
pub fn config_hash<T: Serialize>(resolved: &T) -> String {
    let canonical = serde_json::to_string(resolved).expect("config serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{hash:016x}")
}
