//! SHA-256 manifests of output trees and the verify pass.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::run::{coherence_sweep, run_experiment};
use super::*;
use crate::error::{Error, Result};
use crate::json;

/// Relative path (with `/`) to lowercase hex SHA-256.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest(pub BTreeMap<String, String>);

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    /// Hashes the listed files under `root`.
    pub fn build(root: &Path, files: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for f in files {
            map.insert(f.clone(), sha256_file(&root.join(f))?);
        }
        Ok(Self(map))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        json::write_file(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        json::read_file(path)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries that differ or exist on one side only.
    pub fn diff(&self, other: &Manifest) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.0 {
            match other.0.get(k) {
                Some(w) if w == v => {}
                Some(_) => out.push(format!("{k}: hash differs")),
                None => out.push(format!("{k}: missing from rerun")),
            }
        }
        for k in other.0.keys() {
            if !self.0.contains_key(k) {
                out.push(format!("{k}: not in the stored manifest"));
            }
        }
        out
    }
}

/// Hashes every regular file below `root`, keyed by relative path.
pub fn hash_tree(root: &Path) -> Result<Manifest> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path
                    .strip_prefix(root)
                    .map_err(|e| Error::Internal(e.to_string()))?
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                out.insert(rel, sha256_file(&path)?);
            }
        }
        Ok(())
    }
    let mut map = BTreeMap::new();
    walk(root, root, &mut map)?;
    Ok(Manifest(map))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Number of manifest entries compared.
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn read_spec(path: &Path, scratch: &Path) -> Result<ExperimentSpec> {
    let mut spec: ExperimentSpec = json::read_file(path)?;
    spec.output_dir = scratch.to_path_buf();
    Ok(spec)
}

/// Checks a dataset tree written by `run_experiment` and/or
/// `coherence_sweep`: files on disk against the stored manifest, then a
/// full rerun in a scratch directory against the same manifest.
pub fn verify(dataset_dir: &Path, jobs: usize) -> Result<VerifyReport> {
    let scratch = tempfile::tempdir()?;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut found = false;
    let modes: [(&str, &str, bool); 2] = [
        (EXPERIMENT_FILE, MANIFEST_FILE, false),
        (COHERENCE_EXPERIMENT_FILE, COHERENCE_MANIFEST_FILE, true),
    ];
    for (spec_file, manifest_file, sweep) in modes {
        let spec_path = dataset_dir.join(spec_file);
        if !spec_path.is_file() {
            continue;
        }
        found = true;
        let stored = Manifest::read(&dataset_dir.join(manifest_file))?;
        let on_disk: Vec<String> = stored.0.keys().cloned().collect();
        let mut present = BTreeMap::new();
        for f in &on_disk {
            let p: PathBuf = dataset_dir.join(f);
            if p.is_file() {
                present.insert(f.clone(), sha256_file(&p)?);
            }
        }
        for d in stored.diff(&Manifest(present)) {
            mismatches.push(format!("on disk {d}"));
        }
        let spec = read_spec(&spec_path, scratch.path())?;
        let rerun = if sweep {
            coherence_sweep(&spec, jobs)?.manifest
        } else {
            run_experiment(&spec, jobs)?.manifest
        };
        for d in stored.diff(&rerun) {
            mismatches.push(format!("rerun {d}"));
        }
        checked += stored.len();
    }
    if !found {
        return Err(Error::Input(format!(
            "{} holds neither {EXPERIMENT_FILE} nor {COHERENCE_EXPERIMENT_FILE}",
            dataset_dir.display()
        )));
    }
    Ok(VerifyReport {
        checked,
        mismatches,
    })
}
