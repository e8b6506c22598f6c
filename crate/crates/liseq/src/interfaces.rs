//! Linear interfaces: what a block of threads does to the shared state,
//! round by round, when the threads run one after another in every round and
//! keep their local states between rounds.
//!
//! A pair `(u, v)` of k-tuples of shared states is an interface of a block
//! of `m ≥ 1` threads if thread 1 can take `u_j` to some state, thread 2 can
//! take that to the next, and so on until thread `m` produces `v_j`, for
//! every round `j`, with each thread starting round 1 in its initial local
//! state and resuming round `j+1` where it left round `j`. Empty blocks are
//! not interfaces. Search is bounded by the thread count and the usual
//! stack bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::lang::{ParamProgram, VarDecl};
use crate::machine::{named, valuations, Code, Event, Outcome, Thread};
use crate::param_oracle::{Bounds, Oracle, Truncation};

/// A valuation of the shared variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SharedState(pub Box<[i64]>);

impl From<Box<[i64]>> for SharedState {
    fn from(b: Box<[i64]>) -> Self {
        SharedState(b)
    }
}

impl From<Vec<i64>> for SharedState {
    fn from(v: Vec<i64>) -> Self {
        SharedState(v.into())
    }
}

impl SharedState {
    pub fn render(&self, shared: &[VarDecl]) -> serde_json::Value {
        serde_json::to_value(named(shared, &self.0)).expect("valuation serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearInterface {
    pub u: Vec<SharedState>,
    pub v: Vec<SharedState>,
}

impl LinearInterface {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `v_i = u_{i+1}` for every `i < k`.
    pub fn is_wrapped(&self) -> bool {
        self.v.iter().zip(self.u.iter().skip(1)).all(|(v, u)| v == u)
    }

    /// `{"u": [...], "v": [...]}` with named valuations.
    pub fn render(&self, shared: &[VarDecl]) -> serde_json::Value {
        let tuple = |t: &[SharedState]| serde_json::Value::Array(t.iter().map(|s| s.render(shared)).collect());
        serde_json::json!({ "u": tuple(&self.u), "v": tuple(&self.v) })
    }
}

pub fn is_wrapped(li: &LinearInterface) -> bool {
    li.is_wrapped()
}

/// `u_1` is a shared state `init` can produce.
pub fn is_initial(li: &LinearInterface, prog: &ParamProgram) -> bool {
    let oracle = Oracle::new(prog, Bounds::default());
    li.u.first().is_some_and(|u| oracle.init_outcomes().contains(u))
}

/// One scheduled segment of one thread: from local state `from` with shared
/// state `x` the thread reaches local state `to` with shared state `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub from: Thread,
    pub x: SharedState,
    pub to: Thread,
    pub y: SharedState,
}

/// Evidence that a pair of tuples is an interface: `segments[i][j]` is the
/// segment of thread `i` in round `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterfaceWitness {
    /// Process index of each thread.
    pub map: Vec<u32>,
    pub segments: Vec<Vec<Segment>>,
}

impl InterfaceWitness {
    pub fn threads(&self) -> usize {
        self.map.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct InterfaceCheck {
    pub witness: Option<InterfaceWitness>,
    pub truncated: BTreeSet<Truncation>,
}

type Summary = Rc<Vec<(Thread, Box<[i64]>)>>;
type Run = (Vec<SharedState>, Vec<Segment>);

/// Interface search over one program with memoized segment and thread
/// summaries. Reuse one instance for many queries on the same program.
pub struct Interfaces {
    code: Code,
    bounds: Bounds,
    segments: HashMap<(u32, Thread, Box<[i64]>), Summary>,
    runs: HashMap<(u32, Vec<SharedState>), Rc<Vec<Run>>>,
    truncated: BTreeSet<Truncation>,
}

impl Interfaces {
    pub fn new(prog: &ParamProgram, bounds: Bounds) -> Self {
        Interfaces {
            code: Code::from_param(prog),
            bounds,
            segments: HashMap::new(),
            runs: HashMap::new(),
            truncated: BTreeSet::new(),
        }
    }

    pub fn truncated(&self) -> &BTreeSet<Truncation> {
        &self.truncated
    }

    /// Local states and shared states at which one segment starting from
    /// `(from, x)` may end, i.e. every reachable position outside an atomic
    /// block, including the start itself.
    fn segment(&mut self, unit: u32, from: &Thread, x: &[i64]) -> Summary {
        let key = (unit, from.clone(), Box::<[i64]>::from(x));
        if let Some(s) = self.segments.get(&key) {
            return s.clone();
        }
        let code = &self.code;
        let b = &self.bounds;
        let mut seen: HashMap<(Box<[i64]>, Thread), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert((key.2.clone(), from.clone()), 0);
        queue.push_back((key.2.clone(), from.clone(), 0usize));
        let mut ends = BTreeSet::new();
        let mut out = Vec::new();
        while let Some((sh, th, steps)) = queue.pop_front() {
            if !code.in_atomic(Some(unit), &th) {
                ends.insert((th.clone(), sh.clone()));
            }
            if th.done() {
                continue;
            }
            if b.max_steps.is_some_and(|m| steps >= m) {
                self.truncated.insert(Truncation::SegmentSteps);
                continue;
            }
            out.clear();
            code.step(Some(unit), &sh, &th, &mut out);
            for o in out.drain(..) {
                if let Outcome::Next { shared, thread, event } = o {
                    if matches!(event, Event::Pushed) && thread.stack.len() > b.max_depth {
                        self.truncated.insert(Truncation::StackDepth);
                        continue;
                    }
                    let k = (shared, thread);
                    if !seen.contains_key(&k) {
                        seen.insert(k.clone(), steps + 1);
                        queue.push_back((k.0, k.1, steps + 1));
                    }
                }
            }
        }
        let summary: Summary = Rc::new(ends.into_iter().map(|(t, s)| (t, s)).collect());
        self.segments.insert(key, summary.clone());
        summary
    }

    /// All ways one thread of `unit` can run k segments starting in the
    /// shared states `xs`; the first witness per output tuple is kept.
    fn thread_runs(&mut self, unit: u32, xs: &[SharedState]) -> Rc<Vec<Run>> {
        let key = (unit, xs.to_vec());
        if let Some(r) = self.runs.get(&key) {
            return r.clone();
        }
        let mut partial: Vec<(Thread, Vec<SharedState>, Vec<Segment>)> = vec![(self.code.fresh_thread(unit), vec![], vec![])];
        for x in xs {
            let mut next = Vec::new();
            for (local, ys, segs) in partial {
                for (to, y) in self.segment(unit, &local, &x.0).iter() {
                    let mut ys = ys.clone();
                    ys.push(SharedState(y.clone()));
                    let mut segs = segs.clone();
                    segs.push(Segment {
                        from: local.clone(),
                        x: x.clone(),
                        to: to.clone(),
                        y: SharedState(y.clone()),
                    });
                    next.push((to.clone(), ys, segs));
                }
            }
            // Runs that agree on the local state and outputs so far have the
            // same futures.
            let mut dedup: BTreeMap<(Thread, Vec<SharedState>), Vec<Segment>> = BTreeMap::new();
            for (t, ys, segs) in next {
                dedup.entry((t, ys)).or_insert(segs);
            }
            partial = dedup.into_iter().map(|((t, ys), segs)| (t, ys, segs)).collect();
        }
        let mut by_output: BTreeMap<Vec<SharedState>, Vec<Segment>> = BTreeMap::new();
        for (_, ys, segs) in partial {
            by_output.entry(ys).or_insert(segs);
        }
        let runs: Rc<Vec<Run>> = Rc::new(by_output.into_iter().collect());
        self.runs.insert(key, runs.clone());
        runs
    }

    /// Output tuples reachable from `u` by blocks of 1..=max_threads
    /// threads, each with a back pointer `(previous tuple, process, segments)`.
    fn blocks(&mut self, u: &[SharedState], stop: Option<&[SharedState]>) -> HashMap<Vec<SharedState>, (Vec<SharedState>, u32, Vec<Segment>)> {
        let units = self.code.units.len() as u32;
        let mut reached: HashMap<Vec<SharedState>, (Vec<SharedState>, u32, Vec<Segment>)> = HashMap::new();
        let mut frontier = vec![u.to_vec()];
        for _ in 0..self.bounds.max_threads {
            let mut next = Vec::new();
            for xs in &frontier {
                for unit in 0..units {
                    for (ys, segs) in self.thread_runs(unit, xs).iter() {
                        if !reached.contains_key(ys) {
                            reached.insert(ys.clone(), (xs.clone(), unit, segs.clone()));
                            if stop == Some(ys.as_slice()) {
                                return reached;
                            }
                            next.push(ys.clone());
                        }
                    }
                }
            }
            next.sort();
            frontier = next;
        }
        reached
    }

    /// Looks for a block of at most `max_threads` threads realizing `li`.
    pub fn check(&mut self, li: &LinearInterface) -> InterfaceCheck {
        assert!(!li.is_empty() && li.u.len() == li.v.len(), "interface tuples must have equal positive length");
        let reached = self.blocks(&li.u, Some(&li.v));
        let witness = reached.contains_key(&li.v).then(|| {
            let mut map = Vec::new();
            let mut segments = Vec::new();
            let mut cur = li.v.clone();
            while cur != li.u || map.is_empty() {
                let (prev, unit, segs) = reached[&cur].clone();
                map.push(unit);
                segments.push(segs);
                if prev == li.u {
                    break;
                }
                cur = prev;
            }
            map.reverse();
            segments.reverse();
            InterfaceWitness { map, segments }
        });
        InterfaceCheck {
            witness,
            truncated: self.truncated.clone(),
        }
    }

    /// Every interface of length `k` (taken from the bounds).
    pub fn enumerate(&mut self) -> BTreeSet<LinearInterface> {
        let k = self.bounds.k;
        let states: Vec<SharedState> = valuations(&self.code.shared).into_iter().map(SharedState).collect();
        let mut tuples: Vec<Vec<SharedState>> = vec![vec![]];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    states.iter().map(move |s| {
                        let mut t = t.clone();
                        t.push(s.clone());
                        t
                    })
                })
                .collect();
        }
        let mut out = BTreeSet::new();
        for u in tuples {
            for v in self.blocks(&u, None).into_keys() {
                out.insert(LinearInterface { u: u.clone(), v });
            }
        }
        out
    }

    /// Checks every condition a witness must satisfy for `li`.
    pub fn validate(&mut self, li: &LinearInterface, w: &InterfaceWitness) -> Result<(), String> {
        let k = li.len();
        let m = w.threads();
        if m == 0 || w.segments.len() != m {
            return Err("a witness needs at least one thread and one segment row per thread".into());
        }
        for (i, row) in w.segments.iter().enumerate() {
            if row.len() != k {
                return Err(format!("thread {} has {} segments, expected {k}", i + 1, row.len()));
            }
            let unit = w.map[i];
            if row[0].from != self.code.fresh_thread(unit) {
                return Err(format!("thread {} does not start in its initial local state", i + 1));
            }
            for j in 0..k {
                let seg = &row[j];
                if i == 0 && seg.x != li.u[j] {
                    return Err(format!("round {}: first thread does not start in u", j + 1));
                }
                if i + 1 == m && seg.y != li.v[j] {
                    return Err(format!("round {}: last thread does not end in v", j + 1));
                }
                if i > 0 && seg.x != w.segments[i - 1][j].y {
                    return Err(format!("round {}: thread {} does not resume the shared state", j + 1, i + 1));
                }
                if j + 1 < k && seg.to != row[j + 1].from {
                    return Err(format!("thread {}: local state changes between rounds {} and {}", i + 1, j + 1, j + 2));
                }
                let reach = self.segment(unit, &seg.from, &seg.x.0);
                if !reach.iter().any(|(t, y)| *t == seg.to && y[..] == seg.y.0[..]) {
                    return Err(format!("thread {} round {}: segment end is not reachable", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }
}

pub fn check_interface(prog: &ParamProgram, li: &LinearInterface, bounds: &Bounds) -> InterfaceCheck {
    Interfaces::new(prog, Bounds { k: li.len(), ..*bounds }).check(li)
}

pub fn enumerate_interfaces(prog: &ParamProgram, k: usize, bounds: &Bounds) -> (BTreeSet<LinearInterface>, BTreeSet<Truncation>) {
    let mut search = Interfaces::new(prog, Bounds { k, ..*bounds });
    let set = search.enumerate();
    (set, search.truncated)
}
