//! Output directory handling with atomic, no-clobber writes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tempfile::NamedTempFile;

pub struct OutDir {
    dir: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn new(dir: &Path, force: bool) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            force,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Fails up front if any of the files exists and `--force` is not set.
    pub fn claim(&self, names: &[String]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.path(n);
            if p.exists() {
                bail!("{} already exists (use --force to overwrite)", p.display());
            }
        }
        Ok(())
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place once `fill` succeeds.
    pub fn write<F>(&self, name: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let target = self.path(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).context("creating temporary file")?;
        {
            let mut w = BufWriter::new(tmp.as_file_mut());
            fill(&mut w).with_context(|| format!("writing {}", target.display()))?;
            w.flush()?;
        }
        tmp.as_file().sync_all()?;
        if self.force {
            tmp.persist(&target)
        } else {
            tmp.persist_noclobber(&target)
        }
        .map_err(|e| e.error)
        .with_context(|| format!("moving output into {}", target.display()))?;
        log::info!("wrote {}", target.display());
        Ok(target)
    }

    pub fn write_str(&self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}
