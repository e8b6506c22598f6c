//! Explicit-state exploration of parameterized programs under k-round
//! schedules.
//!
//! A configuration fixes the number of threads `m` and the process each
//! thread runs. Threads are scheduled in index order; the active thread
//! either takes a step or hands over to the next thread, and handing over
//! from the last thread starts a new round. A thread may be scheduled for
//! zero steps. The oracle enumerates every `m` up to the bound and every
//! thread-to-process map, so its report is exact for those bounds.
//!
//! ```
//! use liseq::{lang, param_oracle::{explore, Bounds}};
//!
//! let prog = lang::parse_param(
//!     "bool f; init: f := T; process P: main() begin assert(f); end",
//! ).unwrap();
//! let report = explore(&prog, &Bounds { k: 1, ..Bounds::default() });
//! assert!(report.violations.is_empty());
//! ```

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::interfaces::{LinearInterface, SharedState};
use crate::lang::{ParamProgram, Pc};
use crate::machine::{valuations, Code, Event, LocalizedState, Outcome, RuntimeError, Thread};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Number of rounds.
    pub k: usize,
    /// Largest thread count explored.
    pub max_threads: usize,
    /// Steps a thread may take in one scheduled segment; `None` leaves
    /// segments unbounded (the state space is finite anyway).
    pub max_steps: Option<usize>,
    /// Call-stack depth of a thread.
    pub max_depth: usize,
    /// Distinct states explored per run before giving up.
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            k: 2,
            max_threads: 3,
            max_steps: None,
            max_depth: 8,
            max_states: 4_000_000,
        }
    }
}

/// Which bound cut the search short.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    StackDepth,
    SegmentSteps,
    StateLimit,
    /// Nesting of simulated thread blocks in a sequential program.
    RootDepth,
}

/// Whether any flag may have hidden behavior. Nesting depth in a sequential
/// program mirrors the thread bound, so it alone loses nothing.
pub fn lossy(t: &BTreeSet<Truncation>) -> bool {
    t.iter().any(|t| *t != Truncation::RootDepth)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub pc: Pc,
    pub localized: LocalizedState,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: RuntimeError,
    pub pc: Option<Pc>,
    pub localized: Option<LocalizedState>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub violations: BTreeSet<Violation>,
    pub runtime_errors: BTreeSet<ErrorRecord>,
    pub reachable: BTreeSet<LocalizedState>,
    pub truncated: BTreeSet<Truncation>,
    /// Distinct configurations visited, summed over all thread maps.
    pub states: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    violations: &'a BTreeSet<Violation>,
    runtime_errors: &'a BTreeSet<ErrorRecord>,
    reachable_count: usize,
    states: usize,
    truncated: &'a BTreeSet<Truncation>,
}

impl OracleReport {
    pub fn has_violation(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn has_error(&self, kind: RuntimeError) -> bool {
        self.runtime_errors.iter().any(|e| e.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ReportJson {
            violations: &self.violations,
            runtime_errors: &self.runtime_errors,
            reachable_count: self.reachable.len(),
            states: self.states,
            truncated: &self.truncated,
        })
        .expect("report serializes")
    }
}

/// A full configuration: which process each thread runs, the active thread,
/// the current round (1-based), the shared valuation and every thread's
/// local state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamState {
    pub map: Vec<u32>,
    pub active: usize,
    pub round: usize,
    pub shared: Box<[i64]>,
    pub threads: Vec<Thread>,
}

/// Result of [`Oracle::step_local`].
#[derive(Debug, Default)]
pub struct LocalStep {
    pub successors: Vec<ParamState>,
    pub violations: Vec<Pc>,
    pub errors: Vec<(RuntimeError, Option<Pc>)>,
    pub depth_exceeded: bool,
}

#[derive(Default)]
struct Recorder {
    reachable: HashSet<(Pc, Box<[i64]>)>,
    violations: HashSet<(Pc, Box<[i64]>)>,
    errors: HashSet<(RuntimeError, Option<Pc>, Option<(Pc, Box<[i64]>)>)>,
    truncated: BTreeSet<Truncation>,
    states: usize,
}

/// Compact key for deduplication; the map is fixed within one run.
#[derive(PartialEq, Eq, Hash, Clone)]
struct Key {
    active: u16,
    round: u16,
    shared: Box<[i64]>,
    threads: Box<[Thread]>,
    history: Box<[Box<[i64]>]>,
}

pub struct Oracle {
    code: Code,
    bounds: Bounds,
}

impl Oracle {
    pub fn new(prog: &ParamProgram, bounds: Bounds) -> Oracle {
        assert!(bounds.k >= 1 && bounds.max_threads >= 1, "bounds must be positive");
        Oracle {
            code: Code::from_param(prog),
            bounds,
        }
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Shared valuations `init` can produce from an arbitrary start.
    pub fn init_outcomes(&self) -> BTreeSet<SharedState> {
        let mut rec = Recorder::default();
        self.run_init(&mut rec).into_iter().map(SharedState::from).collect()
    }

    fn run_init(&self, rec: &mut Recorder) -> Vec<Box<[i64]>> {
        let code = &self.code;
        let mut outcomes = BTreeSet::new();
        let mut seen: HashSet<(Box<[i64]>, Thread)> = HashSet::new();
        let mut queue = VecDeque::new();
        for s in valuations(&code.shared) {
            let st = (s, code.init_thread());
            if seen.insert(st.clone()) {
                queue.push_back(st);
            }
        }
        let mut out = Vec::new();
        while let Some((shared, th)) = queue.pop_front() {
            if th.done() {
                outcomes.insert(shared);
                continue;
            }
            let key = code.localized_key(None, &shared, &th);
            if let Some(k) = &key {
                rec.reachable.insert(k.clone());
            }
            out.clear();
            code.step(None, &shared, &th, &mut out);
            for o in out.drain(..) {
                match o {
                    Outcome::Next { shared, thread, .. } => {
                        let st = (shared, thread);
                        if !seen.contains(&st) {
                            seen.insert(st.clone());
                            queue.push_back(st);
                        }
                    }
                    Outcome::Violation(pc) => {
                        rec.violations.insert(key.clone().expect("asserts carry a pc"));
                        debug_assert_eq!(pc, key.as_ref().map(|k| k.0));
                    }
                    Outcome::Error(kind, pc) => {
                        rec.errors.insert((kind, pc, key.clone()));
                    }
                }
            }
        }
        rec.states += seen.len();
        outcomes.into_iter().collect()
    }

    /// Every thread-to-process map for `m` threads, in lexicographic order.
    fn maps(&self, m: usize) -> Vec<Vec<u32>> {
        let n = self.code.units.len() as u32;
        let mut maps: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..m {
            maps = maps
                .into_iter()
                .flat_map(|p| {
                    (0..n).map(move |u| {
                        let mut p = p.clone();
                        p.push(u);
                        p
                    })
                })
                .collect();
        }
        maps
    }

    /// Configurations at the start of round 1 with thread 1 active.
    pub fn initial_states(&self, map: &[u32]) -> Vec<ParamState> {
        self.run_init(&mut Recorder::default())
            .into_iter()
            .map(|shared| ParamState {
                map: map.to_vec(),
                active: 0,
                round: 1,
                shared,
                threads: map.iter().map(|&u| self.code.fresh_thread(u)).collect(),
            })
            .collect()
    }

    /// All successors of one step of the active thread.
    pub fn step_local(&self, st: &ParamState) -> LocalStep {
        let mut res = LocalStep::default();
        let a = st.active;
        let th = &st.threads[a];
        if th.done() {
            return res;
        }
        let mut out = Vec::new();
        self.code.step(Some(st.map[a]), &st.shared, th, &mut out);
        for o in out {
            match o {
                Outcome::Next { shared, thread, event } => {
                    if matches!(event, Event::Pushed) && thread.stack.len() > self.bounds.max_depth {
                        res.depth_exceeded = true;
                        continue;
                    }
                    let mut next = st.clone();
                    next.shared = shared;
                    next.threads[a] = thread;
                    res.successors.push(next);
                }
                Outcome::Violation(pc) => res.violations.push(pc.expect("asserts carry a pc")),
                Outcome::Error(kind, pc) => res.errors.push((kind, pc)),
            }
        }
        res
    }

    /// The scheduler move handing control to the next thread, if allowed.
    pub fn context_switch(&self, st: &ParamState) -> Vec<ParamState> {
        let a = st.active;
        if self.code.in_atomic(Some(st.map[a]), &st.threads[a]) {
            return vec![];
        }
        let mut next = st.clone();
        if a + 1 < st.threads.len() {
            next.active = a + 1;
        } else if st.round < self.bounds.k {
            next.active = 0;
            next.round += 1;
        } else {
            return vec![];
        }
        vec![next]
    }

    /// Exhaustive exploration over all thread counts and maps.
    pub fn explore(&self) -> OracleReport {
        let mut rec = Recorder::default();
        let inits = self.run_init(&mut rec);
        'maps: for m in 1..=self.bounds.max_threads {
            for map in self.maps(m) {
                let hit_limit = self.run(&map, &inits, &mut rec, None, &mut |_, _| false);
                if hit_limit {
                    break 'maps;
                }
            }
        }
        self.report(rec)
    }

    fn report(&self, rec: Recorder) -> OracleReport {
        let code = &self.code;
        OracleReport {
            violations: rec
                .violations
                .iter()
                .map(|(pc, v)| Violation {
                    pc: *pc,
                    localized: code.localized(*pc, v),
                })
                .collect(),
            runtime_errors: rec
                .errors
                .iter()
                .map(|(kind, pc, key)| ErrorRecord {
                    kind: *kind,
                    pc: *pc,
                    localized: key.as_ref().map(|(p, v)| code.localized(*p, v)),
                })
                .collect(),
            reachable: rec.reachable.iter().map(|(pc, v)| code.localized(*pc, v)).collect(),
            truncated: rec.truncated,
            states: rec.states,
        }
    }

    /// Breadth-first search for one thread map. With `track` set, round-start
    /// shared values are kept in the state and `observe` is called at every
    /// point where the last thread runs in round k outside an atomic block;
    /// it returns true to stop. `track` may also pin the interface the
    /// execution must follow. Returns true if the state limit was hit.
    fn run(
        &self,
        map: &[u32],
        inits: &[Box<[i64]>],
        rec: &mut Recorder,
        track: Option<Track>,
        observe: &mut dyn FnMut(&[Box<[i64]>], &[i64]) -> bool,
    ) -> bool {
        let code = &self.code;
        let b = &self.bounds;
        let m = map.len();
        let mut visited: HashMap<Key, u32> = HashMap::new();
        let mut queue: VecDeque<(Key, u32)> = VecDeque::new();
        let push = |key: Key, steps: u32, visited: &mut HashMap<Key, u32>, queue: &mut VecDeque<(Key, u32)>| match visited.get(&key) {
            Some(&old) if old <= steps => {}
            _ => {
                visited.insert(key.clone(), steps);
                queue.push_back((key, steps));
            }
        };
        for s in inits {
            let history: Box<[Box<[i64]>]> = match track {
                Some(Track::Observe) => Box::new([s.clone()]),
                Some(Track::Pinned(li)) => {
                    if li.u[0].0[..] != s[..] {
                        continue;
                    }
                    Box::new([])
                }
                None => Box::new([]),
            };
            let key = Key {
                active: 0,
                round: 1,
                shared: s.clone(),
                threads: map.iter().map(|&u| code.fresh_thread(u)).collect(),
                history,
            };
            push(key, 0, &mut visited, &mut queue);
        }
        let mut out = Vec::new();
        let mut limit = false;
        while let Some((st, steps)) = queue.pop_front() {
            if visited.len() > b.max_states {
                rec.truncated.insert(Truncation::StateLimit);
                limit = true;
                break;
            }
            let a = st.active as usize;
            let unit = Some(map[a]);
            let th = &st.threads[a];
            let atomic = code.in_atomic(unit, th);
            if track.is_some() && a + 1 == m && st.round as usize == b.k && !atomic && observe(&st.history, &st.shared) {
                break;
            }
            if !th.done() {
                let key = code.localized_key(unit, &st.shared, th);
                if let Some(k) = &key {
                    rec.reachable.insert(k.clone());
                }
                out.clear();
                code.step(unit, &st.shared, th, &mut out);
                for o in out.drain(..) {
                    match o {
                        Outcome::Next { shared, thread, event } => {
                            if matches!(event, Event::Pushed) && thread.stack.len() > b.max_depth {
                                rec.truncated.insert(Truncation::StackDepth);
                                continue;
                            }
                            let steps = match b.max_steps {
                                Some(max) if steps as usize >= max => {
                                    rec.truncated.insert(Truncation::SegmentSteps);
                                    continue;
                                }
                                Some(_) => steps + 1,
                                None => 0,
                            };
                            let mut threads = st.threads.clone();
                            threads[a] = thread;
                            let next = Key {
                                active: st.active,
                                round: st.round,
                                shared,
                                threads,
                                history: st.history.clone(),
                            };
                            push(next, steps, &mut visited, &mut queue);
                        }
                        Outcome::Violation(_) => {
                            rec.violations.insert(key.clone().expect("asserts carry a pc"));
                        }
                        Outcome::Error(kind, pc) => {
                            rec.errors.insert((kind, pc, key.clone()));
                        }
                    }
                }
            }
            if !atomic {
                let mut next = st.clone();
                if a + 1 < m {
                    next.active += 1;
                } else if (st.round as usize) < b.k {
                    next.active = 0;
                    next.round += 1;
                    match track {
                        Some(Track::Observe) => {
                            let mut h = st.history.to_vec();
                            h.push(st.shared.clone());
                            next.history = h.into();
                        }
                        Some(Track::Pinned(li)) => {
                            if li.u[st.round as usize].0[..] != st.shared[..] {
                                continue;
                            }
                        }
                        None => {}
                    }
                } else {
                    continue;
                }
                push(next, 0, &mut visited, &mut queue);
            }
        }
        rec.states += visited.len();
        limit
    }

    /// Interfaces `(u, v)` observed on k-round executions: `u_r` is the
    /// shared state when round `r` starts and `v_r` when it ends. Each is
    /// tagged with the thread count of its execution.
    pub fn observed_interfaces(&self) -> (BTreeSet<(usize, LinearInterface)>, BTreeSet<Truncation>) {
        let mut rec = Recorder::default();
        let inits = self.run_init(&mut rec);
        let mut found = BTreeSet::new();
        'maps: for m in 1..=self.bounds.max_threads {
            for map in self.maps(m) {
                let mut obs = |hist: &[Box<[i64]>], s: &[i64]| {
                    let u: Vec<SharedState> = hist.iter().map(|h| SharedState::from(h.clone())).collect();
                    let mut v: Vec<SharedState> = u[1..].to_vec();
                    v.push(SharedState::from(Box::<[i64]>::from(s)));
                    found.insert((m, LinearInterface { u, v }));
                    false
                };
                if self.run(&map, &inits, &mut rec, Some(Track::Observe), &mut obs) {
                    break 'maps;
                }
            }
        }
        (found, rec.truncated)
    }

    /// Whether some bounded k-round execution switches rounds exactly at the
    /// shared states of `li`: round `r` starts in `u_r` and ends in `v_r`.
    /// Such an execution exists only for wrapped interfaces whose `u_1` is
    /// an init outcome.
    pub fn executions_conforming(&self, li: &LinearInterface) -> Conformance {
        assert_eq!(li.len(), self.bounds.k, "interface length must equal k");
        let mut rec = Recorder::default();
        if !li.is_wrapped() {
            return Conformance::default();
        }
        let inits = self.run_init(&mut rec);
        let last = li.v[self.bounds.k - 1].clone();
        for m in 1..=self.bounds.max_threads {
            for map in self.maps(m) {
                let mut hit = false;
                let mut obs = |_: &[Box<[i64]>], s: &[i64]| {
                    hit = last.0[..] == s[..];
                    hit
                };
                let limit = self.run(&map, &inits, &mut rec, Some(Track::Pinned(li)), &mut obs);
                if hit {
                    return Conformance {
                        conforms: true,
                        threads: Some(m),
                        truncated: rec.truncated,
                    };
                }
                if limit {
                    return Conformance {
                        conforms: false,
                        threads: None,
                        truncated: rec.truncated,
                    };
                }
            }
        }
        Conformance {
            conforms: false,
            threads: None,
            truncated: rec.truncated,
        }
    }
}

#[derive(Clone, Copy)]
enum Track<'a> {
    Observe,
    Pinned(&'a LinearInterface),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Conformance {
    pub conforms: bool,
    /// Thread count of the witnessing execution.
    pub threads: Option<usize>,
    pub truncated: BTreeSet<Truncation>,
}

pub fn explore(prog: &ParamProgram, bounds: &Bounds) -> OracleReport {
    Oracle::new(prog, *bounds).explore()
}

pub fn executions_conforming(prog: &ParamProgram, li: &LinearInterface, bounds: &Bounds) -> Conformance {
    Oracle::new(prog, *bounds).executions_conforming(li)
}

#[cfg(test)]
mod tests;
