//! Atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use cosetcov_core::Table;

use crate::CliError;

pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// `<name>.csv` plus its `<name>.json` mirror.
    pub fn table(&mut self, t: &Table) -> Result<(), CliError> {
        let csv = t.to_csv();
        let json = serde_json::to_string_pretty(&t.to_json()).expect("table json") + "\n";
        self.write(&self.dir.join(format!("{}.csv", t.name)), csv.as_bytes())?;
        self.write(&self.dir.join(format!("{}.json", t.name)), json.as_bytes())
    }

    /// Writes through a temporary file in the target directory and renames.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&parent).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }
}
