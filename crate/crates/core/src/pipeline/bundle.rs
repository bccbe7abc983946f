use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::numeric::hex_digest;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    /// File name only, so the manifest does not depend on where inputs live.
    pub file: String,
    pub sha256: String,
}

/// Versions, seed and content digests of a report bundle. Carries no
/// timestamps or absolute paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub stages: Vec<String>,
    pub inputs: Vec<InputDigest>,
    /// Every bundle file except the manifest, sorted by path.
    pub outputs: Vec<FileDigest>,
    pub notices: Vec<String>,
}

/// Writes files under the output directory and records their digests.
pub(crate) struct BundleWriter {
    root: PathBuf,
    files: BTreeMap<String, FileDigest>,
}

impl BundleWriter {
    pub(crate) fn create(root: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(root).map_err(|e| PipelineError::output(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub(crate) fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::output(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| PipelineError::output(&path, e))?;
        self.files.insert(
            rel.to_string(),
            FileDigest {
                path: rel.to_string(),
                sha256: hex_digest(bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(())
    }

    pub(crate) fn write_with(
        &mut self,
        rel: &str,
        render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), PipelineError> {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| PipelineError::output(&self.root.join(rel), e))?;
        self.write(rel, &buf)
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), PipelineError> {
        let mut buf = serde_json::to_vec_pretty(value)
            .map_err(|e| PipelineError::Output(format!("{rel}: {e}")))?;
        buf.push(b'\n');
        self.write(rel, &buf)
    }

    pub(crate) fn contains(&self, rel: &str) -> bool {
        self.files.contains_key(rel)
    }

    pub(crate) fn outputs(&self) -> Vec<FileDigest> {
        self.files.values().cloned().collect()
    }

    pub(crate) fn paths(&self) -> Vec<String> {
        self.files.keys().cloned().collect()
    }
}

/// Digests of every file below `root` except the manifest, sorted by
/// relative path with `/` separators.
pub fn scan_outputs(root: &Path) -> Result<Vec<FileDigest>, PipelineError> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<FileDigest>) -> Result<(), PipelineError> {
        let entries = fs::read_dir(dir).map_err(|e| PipelineError::output(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| PipelineError::output(dir, e))?.path();
            if path.is_dir() {
                walk(&path, root, out)?;
                continue;
            }
            let rel: Vec<String> = path
                .strip_prefix(root)
                .expect("walk stays below root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            let rel = rel.join("/");
            if rel == MANIFEST {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| PipelineError::output(&path, e))?;
            out.push(FileDigest {
                path: rel,
                sha256: hex_digest(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

/// Checks that every digest in the manifest matches the file on disk and
/// that no unlisted file exists.
pub fn verify_manifest(root: &Path) -> Result<Manifest, PipelineError> {
    let text = fs::read_to_string(root.join(MANIFEST)).map_err(|e| PipelineError::output(&root.join(MANIFEST), e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| PipelineError::Data(format!("{MANIFEST}: {e}")))?;
    let actual = scan_outputs(root)?;
    if actual != manifest.outputs {
        return Err(PipelineError::Data("bundle contents do not match the manifest".into()));
    }
    Ok(manifest)
}
