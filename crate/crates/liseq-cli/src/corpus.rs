//! Corpus regression: every `*.pp` file in the corpus directory has a
//! `*.expect.json` sidecar holding the verdicts of a blessed run, one per
//! round bound. Verdicts rather than state sets are compared, so the
//! expectations survive changes to the search bounds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use liseq::compare::{compare, label, CompareConfig, CompareReport, Status};

use crate::commands::{emit_json, load_param, read, write, MISMATCH, OK};
use crate::error::CliError;
use crate::{BoundArgs, JsonArg};

pub const ENV_ROOT: &str = "LISEQ_CORPUS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub oracle: String,
    pub runtime_error: bool,
    pub lazy: String,
    pub eager: String,
    /// Eager hit a runtime error, possibly speculatively.
    pub eager_runtime_error: bool,
    pub laziness_gap: bool,
    pub status: Status,
}

impl Verdict {
    pub fn of(r: &CompareReport) -> Verdict {
        let eager = r.eager.as_ref();
        Verdict {
            oracle: label(r.oracle.violation).into(),
            runtime_error: r.oracle.error,
            lazy: label(r.lazy.violation).into(),
            eager: eager.map_or("skipped", |e| e.label()).into(),
            eager_runtime_error: eager.is_some_and(|e| e.speculative_error),
            laziness_gap: eager.is_some_and(|e| e.laziness_gap),
            status: r.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub max_threads: usize,
    /// Keyed by the round bound k.
    pub rounds: BTreeMap<usize, Verdict>,
}

pub fn sidecar(program: &Path) -> PathBuf {
    program.with_extension("expect.json")
}

/// `*.pp` files directly in `dir`, sorted by name.
pub fn programs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pp"))
        .collect();
    out.sort();
    Ok(out)
}

pub fn root(dir: Option<PathBuf>) -> PathBuf {
    dir.or_else(|| std::env::var_os(ENV_ROOT).map(PathBuf::from)).unwrap_or_else(|| "corpus".into())
}

#[derive(Serialize)]
struct Row {
    program: String,
    k: usize,
    expected: Option<Verdict>,
    actual: Option<Verdict>,
    ok: bool,
}

pub fn run(dir: Option<PathBuf>, bless: bool, rounds: &[usize], b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let dir = root(dir);
    let files = programs(&dir)?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .pp programs", dir.display())));
    }
    if rounds.contains(&0) {
        return Err(CliError::Usage("round bounds must be positive".into()));
    }
    let mut rows = Vec::new();
    for file in &files {
        let name = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let prog = load_param(file, b.int_range)?;
        let verdict = |k: usize, max_threads: usize| {
            let config = CompareConfig {
                bounds: liseq::param_oracle::Bounds {
                    k,
                    max_threads,
                    ..b.bounds()
                },
                eager: true,
                pds_budget: None,
            };
            Verdict::of(&compare(&prog, &config))
        };
        if bless {
            let max_threads = b.max_threads as usize;
            let exp = Expectation {
                max_threads,
                rounds: rounds.iter().map(|&k| (k, verdict(k, max_threads))).collect(),
            };
            let text = serde_json::to_string_pretty(&exp).expect("expectation serializes");
            write(&sidecar(file), &format!("{text}\n"))?;
            for (&k, v) in &exp.rounds {
                println!("{name:20} k={k} blessed {}", summary(v));
                rows.push(Row {
                    program: name.clone(),
                    k,
                    expected: None,
                    actual: Some(v.clone()),
                    ok: true,
                });
            }
            continue;
        }
        let path = sidecar(file);
        let exp: Expectation = match path.exists() {
            true => serde_json::from_str(&read(&path)?).map_err(|source| CliError::Json { path, source })?,
            false => {
                println!("{name:20} missing {}", path.display());
                rows.push(Row {
                    program: name,
                    k: 0,
                    expected: None,
                    actual: None,
                    ok: false,
                });
                continue;
            }
        };
        for (&k, want) in &exp.rounds {
            let got = verdict(k, exp.max_threads);
            let ok = &got == want;
            if ok {
                println!("{name:20} k={k} ok      {}", summary(&got));
            } else {
                println!("{name:20} k={k} DIFF    expected {} got {}", summary(want), summary(&got));
            }
            rows.push(Row {
                program: name.clone(),
                k,
                expected: Some(want.clone()),
                actual: Some(got),
                ok,
            });
        }
    }
    let failed = rows.iter().filter(|r| !r.ok).count();
    println!("{} checked, {failed} failed", rows.len());
    emit_json(out, &serde_json::to_string_pretty(&rows).expect("rows serialize"))?;
    Ok(if failed == 0 { OK } else { MISMATCH })
}

fn summary(v: &Verdict) -> String {
    format!(
        "oracle={} lazy={} eager={} gap={} status={}",
        v.oracle,
        v.lazy,
        v.eager,
        v.laziness_gap,
        serde_json::to_value(v.status).expect("status serializes").as_str().unwrap_or_default()
    )
}

#[cfg(test)]
mod tests;
