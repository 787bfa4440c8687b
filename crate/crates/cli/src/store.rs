//! Artifact store: output-root resolution, content-derived identifiers,
//! and directory ownership.
//!
//! Everything a command writes lives under one output root, chosen by the
//! `--out` flag, the `BAHOP_OUT` environment variable, or the default
//! `bahop-out`, in that order. Cohorts land in `cohorts/<id>`, runs in
//! `runs/<id>`. Identifiers are truncated SHA-256 digests of the resolved
//! configuration, so identical requests map to identical directories and
//! re-runs overwrite their own artifacts instead of multiplying them.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bahop_core::cohort::{CohortConfig, SlideLabel};
use sha2::{Digest, Sha256};

pub const DEFAULT_OUT: &str = "bahop-out";
pub const OUT_ENV: &str = "BAHOP_OUT";

/// A command-level refusal that already knows its exit code: lookup
/// failures, directory conflicts, lock contention.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Failure { code, message: message.into() })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// The reader of our stdout went away (e.g. `bahop ... | head`). Raised as
/// an error so locks and guards unwind normally, then mapped to a silent
/// success exit instead of a panic or a complaint.
#[derive(Debug)]
pub struct PipeClosed;

impl fmt::Display for PipeClosed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("stdout closed early")
    }
}

impl std::error::Error for PipeClosed {}

/// Output root: explicit flag beats the environment beats the default.
pub fn resolve_out(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Full SHA-256 of `bytes` in lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// First twelve hex digits of the SHA-256 of `bytes`; directory names.
pub fn sha12(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..12].to_string()
}

/// Stable identifier for a cohort configuration.
pub fn cohort_id(config: &CohortConfig) -> anyhow::Result<String> {
    let canonical = serde_json::to_string(config)?;
    Ok(format!("c-{}", sha12(canonical.as_bytes())))
}

pub fn cohort_dir(out: &Path, id: &str) -> PathBuf {
    out.join("cohorts").join(id)
}

pub fn run_dir(out: &Path, id: &str) -> PathBuf {
    out.join("runs").join(id)
}

/// Reads a run's ledger, turning a missing directory into a lookup error
/// that names the run id rather than a bare file path.
pub fn read_run_ledger(out: &Path, id: &str) -> anyhow::Result<String> {
    let path = run_dir(out, id).join("ledger.jsonl");
    fs::read_to_string(&path)
        .map_err(|e| Failure::new(4, format!("run {id}: cannot read {}: {e}", path.display())))
}

pub fn label_name(label: SlideLabel) -> &'static str {
    match label {
        SlideLabel::Tumor => "tumor",
        SlideLabel::Normal => "normal",
    }
}

/// Seconds since the Unix epoch; manifest bookkeeping only, never an input
/// to anything reproducible.
pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Exclusive ownership of an artifact directory for the life of one command.
///
/// Claiming creates the directory and a `.lock` file inside it with
/// create-new semantics; a second claim fails until the first guard drops
/// and removes the file. A crash can leave the lock behind — the error
/// message names the file so the operator can remove it after checking no
/// sibling invocation is still running.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn claim(dir: &Path) -> anyhow::Result<DirLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(DirLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(Failure::new(
                4,
                format!(
                    "another invocation owns {}; if none is running, remove {}",
                    dir.display(),
                    path.display()
                ),
            )),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Empties a directory while keeping the lock file that proves ownership.
pub fn wipe_except_lock(dir: &Path) -> anyhow::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_name() == ".lock" {
            continue;
        }
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            fs::remove_dir_all(&path)?;
        } else {
            fs::remove_file(&path)?;
        }
    }
    Ok(())
}
