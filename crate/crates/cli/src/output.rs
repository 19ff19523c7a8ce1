//! Output envelope, atomic file writing, and CSV renderings.

use serde::Serialize;

use crate::CliError;

/// Metadata emitted with every run; reproducing a run needs exactly this
/// triple plus the command payload.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

pub fn meta(command: &'static str, seed: u64, config_hash: String) -> RunMeta {
    RunMeta {
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config_hash,
    }
}

#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    #[serde(flatten)]
    pub meta: RunMeta,
    #[serde(flatten)]
    pub payload: T,
}

/// Write atomically: temp file in the target directory, then rename, so an
/// interrupted run never leaves a partial artifact.
pub fn write_atomic(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => std::path::PathBuf::from(format!(".surreval.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::run("write output", format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::run("write output", format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Emit a payload as JSON (single file) or CSV (data file + `.run.json`
/// sidecar carrying the metadata/warnings). Without `--out`, JSON goes to
/// stdout.
pub fn emit<T: Serialize>(
    out: Option<&std::path::Path>,
    format: &str,
    envelope: &Envelope<T>,
    csv: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let banner = format!(
        "run: command={} version={} seed={} config_hash={}",
        envelope.meta.command,
        envelope.meta.tool_version,
        envelope.meta.seed,
        envelope.meta.config_hash
    );
    match format {
        "json" => {
            let mut text = serde_json::to_string_pretty(envelope)
                .map_err(|e| CliError::run("serialize", e))?;
            text.push('\n');
            match out {
                Some(path) => {
                    write_atomic(path, &text)?;
                    println!("{banner}");
                    println!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
        }
        "csv" => {
            let path = out.ok_or_else(|| CliError::schema("--format csv requires --out"))?;
            write_atomic(path, &csv())?;
            let sidecar = path.with_extension(match path.extension().and_then(|e| e.to_str()) {
                Some(ext) => format!("{ext}.run.json"),
                None => "run.json".to_string(),
            });
            let mut meta_text = serde_json::to_string_pretty(envelope)
                .map_err(|e| CliError::run("serialize", e))?;
            meta_text.push('\n');
            write_atomic(&sidecar, &meta_text)?;
            println!("{banner}");
            println!("wrote {}", path.display());
            println!("wrote {}", sidecar.display());
        }
        other => {
            return Err(CliError::schema(format!(
                "unknown format {other:?} (json | csv)"
            )))
        }
    }
    Ok(())
}

/// CSV cell for an optional value (empty when absent).
pub fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
