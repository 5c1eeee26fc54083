//! Per-run output directories, guarded by a lock file so two runs can
//! never interleave writes in the same directory.

use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

const LOCK_NAME: &str = ".lock";

/// A run directory holding the resolved config, checkpoints, and CSV
/// series of one run. Creating it acquires `.lock` exclusively; the lock
/// is released on drop.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    /// Create (or reuse) `path` and acquire its lock. Fails if another
    /// live `RunDir` holds the lock.
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(RunDir { path: path.to_path_buf() }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Io(
                std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!(
                        "{} is locked by another run (remove {} if that run is dead)",
                        path.display(),
                        lock.display()
                    ),
                ),
            )),
            Err(e) => Err(Error::Io(e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Absolute path of a file inside the run directory.
    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Create/truncate a file inside the run directory.
    pub fn create_file(&self, name: &str) -> Result<fs::File> {
        Ok(fs::File::create(self.file(name))?)
    }

    /// Write a small text file (e.g. the resolved config echo).
    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.file(name), text)?;
        Ok(())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK_NAME));
    }
}
