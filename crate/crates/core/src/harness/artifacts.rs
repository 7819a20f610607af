//! Output files stamped with the config hash, and the cross-file consistency check.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{write_field_dump, Field2, FieldSidecar};

pub const HASH_KEY: &str = "config_hash";

/// Writes artifacts of one run into a directory.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    hash: String,
    files: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: hash.to_owned(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// CSV whose first line is `# config_hash: <hash>`.
    pub fn csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# {HASH_KEY}: {}", self.hash)?;
        body(&mut out)?;
        out.flush()?;
        self.files.push(path.clone());
        Ok(path)
    }

    /// Pretty JSON object with a `config_hash` member added.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        match &mut v {
            Value::Object(map) => {
                map.insert(HASH_KEY.into(), Value::String(self.hash.clone()));
            }
            _ => {
                return Err(Error::Parameter(format!(
                    "{name}: only JSON objects can carry the config hash"
                )));
            }
        }
        let path = self.dir.join(name);
        crate::field::write_json(&path, &v)?;
        self.files.push(path.clone());
        Ok(path)
    }

    /// Binary field plus sidecar; the hash goes into the sidecar.
    pub fn field(&mut self, stem: &str, field: &Field2, sidecar: FieldSidecar) -> Result<()> {
        let sidecar = FieldSidecar {
            config_hash: Some(self.hash.clone()),
            ..sidecar
        };
        write_field_dump(&self.dir, stem, field, &sidecar)?;
        self.files.push(self.dir.join(format!("{stem}.bin")));
        self.files.push(self.dir.join(format!("{stem}.json")));
        Ok(())
    }
}

fn hash_of(path: &Path) -> Result<Option<String>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let mut first = String::new();
            BufReader::new(File::open(path)?).read_line(&mut first)?;
            let prefix = format!("# {HASH_KEY}: ");
            Ok(first
                .trim_end()
                .strip_prefix(&prefix)
                .map(str::to_owned)
                .or(Some(String::new())))
        }
        Some("json") => {
            let v: Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
            Ok(Some(
                v.get(HASH_KEY)
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_owned(),
            ))
        }
        _ => Ok(None),
    }
}

/// Verifies that every CSV and JSON file in `dir` (recursively) carries the same
/// config hash; binary files are covered by their sidecars. Returns the hash.
pub fn check_artifact_hashes(dir: &Path) -> Result<String> {
    let mut paths = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                paths.push(p);
            }
        }
    }
    paths.sort();
    let mut seen: Option<(PathBuf, String)> = None;
    for p in paths {
        let Some(h) = hash_of(&p)? else { continue };
        if h.is_empty() {
            return Err(Error::Validation(format!(
                "{} carries no config hash",
                p.display()
            )));
        }
        match &seen {
            None => seen = Some((p, h)),
            Some((first, expected)) if *expected != h => {
                return Err(Error::Validation(format!(
                    "config hash mismatch: {} has {expected}, {} has {h}",
                    first.display(),
                    p.display()
                )));
            }
            _ => {}
        }
    }
    seen.map(|(_, h)| h)
        .ok_or_else(|| Error::Validation(format!("no artifacts in {}", dir.display())))
}
