//! Consolidates run directories into one JSON document and merged CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde_json::{Map, Value};

use crate::output::{read_json, write_atomic, MANIFEST, SUMMARY};

pub const REPORT: &str = "report.json";
/// Per-experiment CSVs that are merged with an `experiment` column.
pub const PLOT_FILES: [&str; 3] = ["scaling.csv", "histogram.csv", "terminal.csv"];

/// Experiment directories under `run_dir`: itself if it holds a manifest, else its children that do.
pub fn experiments(run_dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !run_dir.is_dir() {
        bail!("{} is not a directory", run_dir.display());
    }
    if run_dir.join(MANIFEST).is_file() {
        let name = run_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| ".".into());
        return Ok(vec![(name, run_dir.to_path_buf())]);
    }
    let mut found: Vec<(String, PathBuf)> = fs::read_dir(run_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.join(MANIFEST).is_file())
        .map(|p| (p.file_name().expect("dir entry").to_string_lossy().into_owned(), p))
        .filter(|(n, _)| !n.starts_with('.'))
        .collect();
    found.sort();
    if found.is_empty() {
        bail!("no {MANIFEST} found in {} or its subdirectories", run_dir.display());
    }
    Ok(found)
}

fn load(dir: &Path) -> Result<Value> {
    let manifest = read_json(&dir.join(MANIFEST))?;
    let summary = if dir.join(SUMMARY).is_file() { read_json(&dir.join(SUMMARY))? } else { Value::Object(Map::new()) };
    let mut doc = match summary {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("summary".into(), other);
            m
        }
    };
    doc.insert("manifest".into(), manifest);
    Ok(Value::Object(doc))
}

/// Builds the report, writes `report.json` and merged CSVs into `run_dir`, and returns the JSON.
pub fn emit_report(run_dir: &Path) -> Result<Value> {
    let exps = experiments(run_dir)?;
    let single = exps.len() == 1 && exps[0].1 == run_dir;
    let report = if single {
        load(run_dir)?
    } else {
        let mut all = Map::new();
        for (name, dir) in &exps {
            all.insert(name.clone(), load(dir)?);
        }
        let mut top = Map::new();
        top.insert("experiments".into(), Value::Object(all));
        Value::Object(top)
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_atomic(&run_dir.join(REPORT), text.as_bytes())?;
    if !single {
        for file in PLOT_FILES {
            let mut merged: Option<String> = None;
            for (name, dir) in &exps {
                let Ok(body) = fs::read_to_string(dir.join(file)) else { continue };
                let mut lines = body.lines();
                let Some(header) = lines.next() else { continue };
                let out = merged.get_or_insert_with(|| format!("experiment,{header}\n"));
                for l in lines {
                    out.push_str(name);
                    out.push(',');
                    out.push_str(l);
                    out.push('\n');
                }
            }
            if let Some(m) = merged {
                write_atomic(&run_dir.join(format!("report_{file}")), m.as_bytes())?;
            }
        }
    }
    Ok(report)
}
