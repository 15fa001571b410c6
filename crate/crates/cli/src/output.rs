use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    command: &'a T,
}

/// `#`-prefixed header: tool version, seed, the full config and its SHA-256.
pub fn header<T: Serialize>(seed: u64, command: &T) -> String {
    let cfg = Config { tool: "avwc", version: env!("CARGO_PKG_VERSION"), seed, command };
    let json = serde_json::to_string(&cfg).expect("config serialises");
    let hash = hex::encode(Sha256::digest(json.as_bytes()));
    format!("# avwc {}\n# seed: {seed}\n# config: {json}\n# config-sha256: {hash}\n", env!("CARGO_PKG_VERSION"))
}

pub fn csv(columns: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes to a sibling temporary file and renames it into place.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let Some(path) = out else {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(());
    };
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Io(format!("cannot write {}: {e}", path.display()))
    })
}

pub fn num(v: f64) -> String {
    format!("{v:.9}")
}

pub fn vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

pub fn word(v: &[usize]) -> String {
    if v.iter().all(|&t| t < 10) {
        v.iter().map(|t| t.to_string()).collect()
    } else {
        v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(".")
    }
}
