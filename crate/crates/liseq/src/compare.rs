//! Differential check of one program: the explicit-state oracle against the
//! lazy and eager sequentializations and, optionally, the pushdown backend.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lang::{normalize, ParamProgram};
use crate::param_oracle::{self, lossy, Bounds, Truncation};
use crate::pmpds::{self, AkStats};
use crate::seq_eager::{classify, sequentialize_eager};
use crate::seq_explorer::{explore_seq, ExplorerBounds};
use crate::seq_lazy::sequentialize_lazy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareConfig {
    pub bounds: Bounds,
    pub eager: bool,
    /// Location budget for the pushdown backend; `None` skips it.
    pub pds_budget: Option<usize>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            bounds: Bounds::default(),
            eager: true,
            pds_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Side {
    pub violation: bool,
    pub error: bool,
    pub truncated: BTreeSet<Truncation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EagerSide {
    pub speculative_violation: bool,
    pub validated_violation: bool,
    pub speculative_error: bool,
    pub truncated: BTreeSet<Truncation>,
    /// Eager visits a source state the oracle never reaches.
    pub laziness_gap: bool,
}

impl EagerSide {
    /// `validated-violation`, `speculative-violation` or `no-violation`.
    pub fn label(&self) -> &'static str {
        if self.validated_violation {
            "validated-violation"
        } else if self.speculative_violation {
            "speculative-violation"
        } else {
            "no-violation"
        }
    }
}

/// `violation` or `no-violation`.
pub fn label(violation: bool) -> &'static str {
    if violation {
        "violation"
    } else {
        "no-violation"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdsSide {
    pub violation: bool,
    pub error: bool,
    pub stats: Option<AkStats>,
    /// Set when the budget stopped the construction.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Agree,
    Mismatch,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub k: usize,
    pub max_threads: usize,
    pub oracle: Side,
    pub lazy: Side,
    /// Lazy visits only source states the oracle reaches.
    pub lazy_is_lazy: bool,
    pub eager: Option<EagerSide>,
    pub pds: Option<PdsSide>,
    pub status: Status,
    pub notes: Vec<String>,
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable verdict table.
    pub fn table(&self) -> String {
        let yn = label;
        let mut out = format!("k={} max_threads={}\n", self.k, self.max_threads);
        out += &format!("  oracle  {}{}\n", yn(self.oracle.violation), trunc_note(&self.oracle.truncated));
        out += &format!(
            "  lazy    {}{}  lazy={}\n",
            yn(self.lazy.violation),
            trunc_note(&self.lazy.truncated),
            self.lazy_is_lazy
        );
        if let Some(e) = &self.eager {
            out += &format!(
                "  eager   {}{}  laziness-gap={}\n",
                e.label(),
                trunc_note(&e.truncated),
                if e.laziness_gap { "present" } else { "absent" }
            );
        }
        if let Some(p) = &self.pds {
            match &p.skipped {
                Some(why) => out += &format!("  pds     skipped ({why})\n"),
                None => out += &format!("  pds     {}\n", yn(p.violation)),
            }
        }
        out += &format!("  status  {:?}\n", self.status).to_lowercase();
        for n in &self.notes {
            out += &format!("  note    {n}\n");
        }
        out
    }
}

fn trunc_note(t: &BTreeSet<Truncation>) -> String {
    let lossy: Vec<String> = t.iter().filter(|t| **t != Truncation::RootDepth).map(|t| format!("{t:?}")).collect();
    if lossy.is_empty() {
        String::new()
    } else {
        format!(" (truncated: {})", lossy.join(", "))
    }
}

/// Runs every backend on `prog` (normalized first) and compares verdicts.
pub fn compare(prog: &ParamProgram, config: &CompareConfig) -> CompareReport {
    let prog = normalize(prog);
    let b = config.bounds;
    let xb = ExplorerBounds {
        max_depth: b.max_depth,
        max_root_depth: b.max_threads,
        max_states: b.max_states,
        record_io: false,
    };
    let oracle = param_oracle::explore(&prog, &b);
    let oracle_side = Side {
        violation: oracle.has_violation(),
        error: !oracle.runtime_errors.is_empty(),
        truncated: oracle.truncated.clone(),
    };
    let lazy = sequentialize_lazy(&prog, b.k).expect("normalized program");
    let lreport = explore_seq(&lazy.program, Some(&lazy.stmt_map), &xb);
    let lazy_side = Side {
        violation: lreport.has_violation(),
        error: lreport.has_error(),
        truncated: lreport.truncated.clone(),
    };
    let lazy_is_lazy = lreport.instrumented.is_subset(&oracle.reachable);

    let mut notes = Vec::new();
    let mut mismatch = false;
    let mut inconclusive = false;
    let truncated = lossy(&oracle_side.truncated) || lossy(&lazy_side.truncated);
    let mut check = |ok: bool, cut: bool, what: String, notes: &mut Vec<String>| {
        if ok {
            return;
        }
        notes.push(what);
        if cut {
            inconclusive = true;
        } else {
            mismatch = true;
        }
    };
    check(
        oracle_side.violation == lazy_side.violation,
        truncated,
        format!("violation: oracle={} lazy={}", oracle_side.violation, lazy_side.violation),
        &mut notes,
    );
    check(
        oracle_side.error == lazy_side.error,
        truncated,
        format!("runtime error: oracle={} lazy={}", oracle_side.error, lazy_side.error),
        &mut notes,
    );
    check(
        lazy_is_lazy,
        lossy(&oracle_side.truncated),
        "lazy program visits a state the oracle does not reach".into(),
        &mut notes,
    );

    let eager = config.eager.then(|| {
        let out = sequentialize_eager(&prog, b.k).expect("normalized program");
        let r = explore_seq(&out.program, Some(&out.stmt_map), &xb);
        let v = classify(&r, &out.stmt_map);
        EagerSide {
            speculative_violation: !v.speculative.is_empty(),
            validated_violation: v.validated,
            speculative_error: r.has_error(),
            truncated: r.truncated.clone(),
            laziness_gap: !r.instrumented.is_subset(&oracle.reachable),
        }
    });
    if let Some(e) = &eager {
        // The eager program runs any number of threads, so a validated
        // violation the bounded oracle misses is not a contradiction.
        check(
            !oracle_side.violation || e.validated_violation,
            lossy(&oracle_side.truncated) || lossy(&e.truncated),
            "oracle violation not validated by eager".into(),
            &mut notes,
        );
        check(
            oracle_side.violation || !e.validated_violation,
            true,
            "eager validated a violation beyond the oracle's thread bound".into(),
            &mut notes,
        );
    }

    let pds = config.pds_budget.map(|budget| {
        let built = pmpds::lower(&prog, budget).and_then(|p| pmpds::build_ak(&p, b.k, budget));
        match built {
            Ok(ak) => {
                let reach = pmpds::pds_reach(&ak.pds);
                PdsSide {
                    violation: !reach.is_disjoint(&ak.pds.targets),
                    error: !reach.is_disjoint(&ak.errors),
                    stats: Some(ak.stats),
                    skipped: None,
                }
            }
            Err(e) => PdsSide {
                violation: false,
                error: false,
                stats: None,
                skipped: Some(e.to_string()),
            },
        }
    });
    if let Some(p) = pds.as_ref().filter(|p| p.skipped.is_none()) {
        check(
            !oracle_side.violation || p.violation,
            lossy(&oracle_side.truncated),
            "oracle violation not reachable in the pushdown system".into(),
            &mut notes,
        );
        check(
            oracle_side.violation || !p.violation,
            true,
            "pushdown violation beyond the oracle's thread bound".into(),
            &mut notes,
        );
    }

    let status = if mismatch {
        Status::Mismatch
    } else if inconclusive {
        Status::Inconclusive
    } else {
        Status::Agree
    };
    CompareReport {
        k: b.k,
        max_threads: b.max_threads,
        oracle: oracle_side,
        lazy: lazy_side,
        lazy_is_lazy,
        eager,
        pds,
        status,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_param;

    #[test]
    fn trivial_violation_everywhere() {
        let prog = parse_param("bool b; init: skip; process P: void main() begin assert(F); end").unwrap();
        let config = CompareConfig {
            bounds: Bounds { k: 1, ..Bounds::default() },
            pds_budget: Some(100_000),
            ..CompareConfig::default()
        };
        let r = compare(&prog, &config);
        assert!(r.oracle.violation && r.lazy.violation);
        assert!(r.eager.as_ref().unwrap().validated_violation);
        assert!(r.pds.as_ref().unwrap().violation);
        assert_eq!(r.status, Status::Agree);
    }
}
