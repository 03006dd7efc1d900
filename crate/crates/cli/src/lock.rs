use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const LOCK_NAME: &str = ".radarnas.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutLock {
    path: PathBuf,
}

impl OutLock {
    pub fn acquire(out: &Path) -> Result<Self> {
        fs::create_dir_all(out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        let path = out.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => bail!(
                "{} is in use by another radarnas command (delete {} if that run is gone)",
                out.display(),
                path.display()
            ),
            Err(e) => Err(e).with_context(|| format!("cannot lock {}", out.display())),
        }
    }
}

impl Drop for OutLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lock_fails_until_first_drops() {
        let dir = tempfile::tempdir().unwrap();
        let a = OutLock::acquire(dir.path()).unwrap();
        assert!(OutLock::acquire(dir.path()).is_err());
        drop(a);
        assert!(!dir.path().join(LOCK_NAME).exists());
        OutLock::acquire(dir.path()).unwrap();
    }
}
