//! Helpers shared by the integration tests: the bundled toy dataset and a
//! SHA-256 manifest of a report tree.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use lobtail::config::RunConfig;
use lobtail::pipeline::{run_pipeline, RunOptions, RunSummary};
use sha2::{Digest, Sha256};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn golden_manifest_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join("toy_manifest.sha256")
}

pub fn toy_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&data_dir().join("toy.json")).expect("toy config");
    cfg.output_dir = out.to_path_buf();
    cfg
}

pub fn run_toy(out: &Path, jobs: usize) -> RunSummary {
    let cfg = toy_config(out);
    run_pipeline(&cfg, &RunOptions { jobs: Some(jobs), ..RunOptions::default() }).expect("pipeline")
}

fn collect(dir: &Path, root: &Path, out: &mut Vec<(String, String)>) {
    let mut entries: Vec<_> = fs::read_dir(dir).expect("read dir").map(|e| e.expect("entry").path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(&p, root, out);
        } else {
            let rel = p.strip_prefix(root).expect("under root");
            let rel = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect::<Vec<_>>().join("/");
            let digest = Sha256::digest(fs::read(&p).expect("read file"));
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            out.push((rel, hex));
        }
    }
}

/// `<sha256>  <relative path>` lines sorted by path.
pub fn manifest(root: &Path) -> String {
    let mut files = Vec::new();
    collect(root, root, &mut files);
    files.sort();
    files.into_iter().map(|(p, h)| format!("{h}  {p}\n")).collect()
}

/// Runs the toy pipeline twice with different worker counts, compares the two
/// trees and then the committed manifest. `LOBTAIL_BLESS=1` rewrites the
/// committed manifest instead of comparing against it.
pub fn check_toy_reproducible() -> Result<String, String> {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sa = run_toy(a.path(), 1);
    let sb = run_toy(b.path(), 4);
    if sa.exit_code() != 0 || sb.exit_code() != 0 {
        return Err(format!("toy run failed: {:?}", sa.fatal_errors));
    }
    let (ma, mb) = (manifest(a.path()), manifest(b.path()));
    if ma != mb {
        return Err("report trees differ between a 1-worker and a 4-worker run".into());
    }
    let files = ma.lines().count();
    let golden = golden_manifest_path();
    if std::env::var("LOBTAIL_BLESS").is_ok_and(|v| v == "1") {
        fs::write(&golden, &ma).map_err(|e| e.to_string())?;
        return Ok(format!("{files} files, manifest blessed"));
    }
    let expected = fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    if expected != ma {
        let diff: Vec<String> = ma
            .lines()
            .zip(expected.lines())
            .filter(|(x, y)| x != y)
            .take(5)
            .map(|(x, _)| x.split_once("  ").map(|(_, p)| p.to_string()).unwrap_or_default())
            .collect();
        return Err(format!("report tree differs from the golden manifest, first differing files: {diff:?}"));
    }
    Ok(format!("{files} files identical across runs and to the golden manifest"))
}
