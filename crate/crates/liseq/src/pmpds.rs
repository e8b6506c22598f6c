//! Finite-state pushdown view of programs.
//!
//! [`lower`] turns a normalized finite-domain program into a parameterized
//! multi-stack pushdown system: one pushdown component per process whose
//! control locations are (shared state, thread-local state) pairs.
//! [`build_ak`] turns it into a single pushdown system whose reachable
//! locations cover the k-round executions: it sequentializes the program
//! lazily and compiles the result, one control location per (globals, top
//! frame) pair and one stack symbol per caller frame.
//! [`pds_reach`] decides reachability by post* saturation.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};

use serde::Serialize;
use thiserror::Error;

use crate::interfaces::SharedState;
use crate::lang::{is_normalized, ParamProgram, Type};
use crate::machine::{valuations, Code, Event, Frame, LocalizedState, Outcome, Thread};
use crate::param_oracle::{Bounds, Oracle};
use crate::seq_explorer::{Instrument, Limits, SeqPds};
use crate::seq_lazy::{sequentialize_lazy, LazyOutput};

pub type Loc = u32;
pub type Sym = u32;

/// A pushdown system with rules that do not inspect the stack except when
/// popping. Runs start at an initial location with an empty stack; a pop
/// needs a nonempty stack.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pds {
    pub locations: usize,
    pub symbols: usize,
    pub internal: Vec<(Loc, Loc)>,
    /// `(from, to, pushed)`
    pub push: Vec<(Loc, Loc, Sym)>,
    /// `(from, popped, to)`
    pub pop: Vec<(Loc, Sym, Loc)>,
    pub initial: Vec<Loc>,
    pub targets: BTreeSet<Loc>,
}

impl Pds {
    pub fn transitions(&self) -> usize {
        self.internal.len() + self.push.len() + self.pop.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PdsError {
    #[error("program is not normalized")]
    NotNormalized,
    #[error("the number of rounds must be at least 1")]
    ZeroRounds,
    #[error("size budget exceeded: {reached} locations built (budget {budget}); predicted up to {predicted_locations:.3e} locations and {predicted_transitions:.3e} transitions")]
    Budget {
        budget: usize,
        reached: usize,
        predicted_locations: f64,
        predicted_transitions: f64,
    },
}

/// Rule source for saturation; rules may be computed on demand.
pub(crate) trait Rules {
    fn internal(&mut self, p: Loc) -> &[Loc];
    fn push(&mut self, p: Loc) -> &[(Loc, Sym)];
    fn pop(&mut self, p: Loc, top: Sym) -> &[Loc];
    /// Saturation stops early once this holds, given the number of
    /// automaton transitions so far.
    fn exhausted(&self, _relations: usize) -> bool {
        false
    }
}

/// Stack bottom; never popped.
const BOTTOM: Sym = Sym::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum St {
    Ctl(Loc),
    Mid(u32),
    Final,
}

/// Forward saturation of a P-automaton for the configurations reachable
/// from `⟨p0, ε⟩`. Returns the locations occurring in some reachable
/// configuration.
pub(crate) fn post_star(rules: &mut dyn Rules, initial: &[Loc]) -> Option<BTreeSet<Loc>> {
    let mut rel: FxHashSet<(St, Option<Sym>, St)> = FxHashSet::default();
    let mut out: FxHashMap<St, Vec<(Sym, St)>> = FxHashMap::default();
    let mut eps_into: FxHashMap<St, Vec<Loc>> = FxHashMap::default();
    let mut mids: FxHashMap<(Loc, Sym), u32> = FxHashMap::default();
    let mut reached: Vec<bool> = Vec::new();
    let mut reach = |p: Loc| {
        let i = p as usize;
        if reached.len() <= i {
            reached.resize(i + 1, false);
        }
        reached[i] = true;
    };
    let mut work: VecDeque<(St, Option<Sym>, St)> = initial.iter().map(|&p| (St::Ctl(p), Some(BOTTOM), St::Final)).collect();
    while let Some(t) = work.pop_front() {
        if !rel.insert(t) {
            continue;
        }
        if rules.exhausted(rel.len()) {
            return None;
        }
        let (from, sym, to) = t;
        match sym {
            Some(g) => {
                out.entry(from).or_default().push((g, to));
                if let St::Ctl(p) = from {
                    reach(p);
                    for &q in rules.internal(p) {
                        work.push_back((St::Ctl(q), Some(g), to));
                    }
                    for &(q, d) in rules.push(p) {
                        let n = mids.len() as u32;
                        let m = St::Mid(*mids.entry((q, d)).or_insert(n));
                        work.push_back((St::Ctl(q), Some(d), m));
                        work.push_back((m, Some(g), to));
                    }
                    if g != BOTTOM {
                        for &q in rules.pop(p, g) {
                            work.push_back((St::Ctl(q), None, to));
                        }
                    }
                }
                for &p in eps_into.get(&from).into_iter().flatten() {
                    work.push_back((St::Ctl(p), Some(g), to));
                }
            }
            None => {
                let St::Ctl(p) = from else { unreachable!("ε-transitions leave control states") };
                reach(p);
                eps_into.entry(to).or_default().push(p);
                for &(g, q) in out.get(&to).into_iter().flatten() {
                    work.push_back((St::Ctl(p), Some(g), q));
                }
            }
        }
    }
    Some(reached.iter().enumerate().filter(|(_, r)| **r).map(|(l, _)| l as Loc).collect())
}

struct Explicit {
    internal: HashMap<Loc, Vec<Loc>>,
    push: HashMap<Loc, Vec<(Loc, Sym)>>,
    pop: HashMap<(Loc, Sym), Vec<Loc>>,
}

impl Rules for Explicit {
    fn internal(&mut self, p: Loc) -> &[Loc] {
        self.internal.get(&p).map_or(&[], Vec::as_slice)
    }

    fn push(&mut self, p: Loc) -> &[(Loc, Sym)] {
        self.push.get(&p).map_or(&[], Vec::as_slice)
    }

    fn pop(&mut self, p: Loc, top: Sym) -> &[Loc] {
        self.pop.get(&(p, top)).map_or(&[], Vec::as_slice)
    }
}

/// Locations reachable from an initial location with an empty stack.
pub fn pds_reach(pds: &Pds) -> BTreeSet<Loc> {
    let mut r = Explicit {
        internal: HashMap::new(),
        push: HashMap::new(),
        pop: HashMap::new(),
    };
    for &(a, b) in &pds.internal {
        r.internal.entry(a).or_default().push(b);
    }
    for &(a, b, g) in &pds.push {
        r.push.entry(a).or_default().push((b, g));
    }
    for &(a, g, b) in &pds.pop {
        r.pop.entry((a, g)).or_default().push(b);
    }
    post_star(&mut r, &pds.initial).expect("explicit rules never exhaust")
}

/// Whether some target location is reachable.
pub fn target_reachable(pds: &Pds) -> bool {
    !pds_reach(pds).is_disjoint(&pds.targets)
}

/// One process as a pushdown component over `S × L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub process: String,
    /// Thread-local states: process globals with a top frame, plus "done".
    pub local_states: usize,
    pub pds: Pds,
}

/// A parameterized multi-stack pushdown system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmpds {
    pub program: ParamProgram,
    pub shared_states: usize,
    pub initial: BTreeSet<SharedState>,
    pub components: Vec<Component>,
}

impl Pmpds {
    /// ℓ: total number of thread-local states.
    pub fn ell(&self) -> usize {
        self.components.iter().map(|c| c.local_states).sum()
    }

    /// d: total number of transitions.
    pub fn d(&self) -> usize {
        self.components.iter().map(|c| c.pds.transitions()).sum()
    }
}

fn domain_size(types: impl IntoIterator<Item = Type>) -> f64 {
    types.into_iter().map(|t| t.domain_size() as f64).product()
}

struct Interner<K> {
    ids: HashMap<K, u32>,
    keys: Vec<K>,
}

impl<K: Clone + Eq + std::hash::Hash> Interner<K> {
    fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            keys: Vec::new(),
        }
    }

    fn id(&mut self, k: K) -> u32 {
        if let Some(&i) = self.ids.get(&k) {
            return i;
        }
        let i = self.keys.len() as u32;
        self.ids.insert(k.clone(), i);
        self.keys.push(k);
        i
    }
}

/// Lowers a normalized program. Locations are numbered `s · |L| + l`.
/// Fails if the full product exceeds `budget` locations.
pub fn lower(prog: &ParamProgram, budget: usize) -> Result<Pmpds, PdsError> {
    if !is_normalized(prog) {
        return Err(PdsError::NotNormalized);
    }
    let oracle = Oracle::new(prog, Bounds::default());
    let code = oracle.code();
    let shared = valuations(&code.shared);
    let mut components = Vec::new();
    for (u, process) in prog.processes.iter().enumerate() {
        let unit = &code.units[u];
        let predicted = shared.len() as f64
            * domain_size(unit.globals.iter().map(|d| d.ty))
            * unit
                .procs
                .iter()
                .map(|p| p.nodes.len() as f64 * domain_size(p.vars.iter().map(|d| d.ty)))
                .sum::<f64>();
        if predicted > budget as f64 {
            return Err(PdsError::Budget {
                budget,
                reached: 0,
                predicted_locations: predicted,
                predicted_transitions: f64::NAN,
            });
        }
        // Thread-local states: every top frame under every global valuation.
        let mut locals: Interner<Option<(Box<[i64]>, Frame)>> = Interner::new();
        let mut callers: Interner<Frame> = Interner::new();
        let globals = valuations(&unit.globals);
        for g in &globals {
            for (pi, p) in unit.procs.iter().enumerate() {
                for vals in valuations(&p.vars) {
                    for node in 0..p.nodes.len() {
                        let f = Frame {
                            proc: pi as u32,
                            node: node as u32,
                            locals: vals.clone(),
                            entry: None,
                        };
                        if matches!(p.nodes[node].op, crate::machine::Op::Call { .. }) {
                            callers.id(f.clone());
                        }
                        locals.id(Some((g.clone(), f)));
                    }
                }
            }
        }
        let done = locals.id(None);
        let n_local = locals.keys.len();
        let shared_ids: HashMap<&[i64], usize> = shared.iter().enumerate().map(|(i, s)| (&s[..], i)).collect();
        let loc = |s: &[i64], l: u32| (shared_ids[s] * n_local + l as usize) as Loc;
        let mut pds = Pds {
            locations: shared.len() * n_local,
            symbols: callers.keys.len(),
            ..Pds::default()
        };
        let init_frame = code.fresh_thread(u as u32);
        let init_local = locals.ids[&Some((init_frame.globals.clone(), init_frame.stack[0].clone()))];
        for s0 in oracle.init_outcomes() {
            pds.initial.push(loc(&s0.0, init_local));
        }
        let mut out = Vec::new();
        for s in &shared {
            for l in 0..n_local as u32 {
                let Some((g, f)) = locals.keys[l as usize].clone() else { continue };
                let from = loc(s, l);
                let th = Thread {
                    globals: g.clone(),
                    stack: vec![f.clone()],
                };
                out.clear();
                code.step(Some(u as u32), s, &th, &mut out);
                for o in out.drain(..) {
                    match o {
                        Outcome::Next { shared: s2, thread, event } => match event {
                            Event::Plain => {
                                let l2 = locals.ids[&Some((thread.globals.clone(), thread.stack[0].clone()))];
                                pds.internal.push((from, loc(&s2, l2)));
                            }
                            Event::Pushed => {
                                let l2 = locals.ids[&Some((thread.globals.clone(), thread.stack[1].clone()))];
                                pds.push.push((from, loc(&s2, l2), callers.ids[&thread.stack[0]]));
                            }
                            Event::Popped(_) if f.proc == unit.main => pds.internal.push((from, loc(&s2, done))),
                            Event::Popped(_) => {
                                for (gi, caller) in callers.keys.iter().enumerate() {
                                    if !calls(&code.units[u].procs[caller.proc as usize].nodes[caller.node as usize].op, f.proc) {
                                        continue;
                                    }
                                    let th = Thread {
                                        globals: g.clone(),
                                        stack: vec![caller.clone(), f.clone()],
                                    };
                                    let mut back = Vec::new();
                                    code.step(Some(u as u32), s, &th, &mut back);
                                    for b in back {
                                        if let Outcome::Next { shared: s3, thread, .. } = b {
                                            let l3 = locals.ids[&Some((thread.globals.clone(), thread.stack[0].clone()))];
                                            pds.pop.push((from, gi as Sym, loc(&s3, l3)));
                                        }
                                    }
                                }
                            }
                        },
                        Outcome::Violation(_) | Outcome::Error(..) => {
                            pds.targets.insert(from);
                        }
                    }
                }
            }
        }
        components.push(Component {
            process: process.name.clone(),
            local_states: n_local,
            pds,
        });
    }
    Ok(Pmpds {
        program: prog.clone(),
        shared_states: shared.len(),
        initial: oracle.init_outcomes(),
        components,
    })
}

fn calls(op: &crate::machine::Op, callee: u32) -> bool {
    matches!(op, crate::machine::Op::Call { callee: c, .. } if *c == callee)
}

/// Measured size of 𝒜ₖ against the asymptotic envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AkStats {
    pub k: usize,
    pub shared_states: usize,
    pub ell: usize,
    pub d: usize,
    pub locations: usize,
    pub transitions: usize,
    /// ℓ·k²·|S|^{2k}
    pub location_envelope: f64,
    /// ℓ·d·k³·|S|^{2k−1}
    pub transition_envelope: f64,
}

impl AkStats {
    pub fn location_ratio(&self) -> f64 {
        self.locations as f64 / self.location_envelope
    }

    pub fn transition_ratio(&self) -> f64 {
        self.transitions as f64 / self.transition_envelope
    }

    /// Whether both counts are within `c` times their envelope.
    pub fn within(&self, c: f64) -> bool {
        self.location_ratio() <= c && self.transition_ratio() <= c
    }
}

/// Constant used for the size assertions; measured on the bundled corpus
/// with headroom.
pub const SIZE_CONSTANT: f64 = 16.0;

/// The pushdown system for k-round reachability.
#[derive(Debug, Clone)]
pub struct Ak {
    pub pds: Pds,
    /// Locations where a runtime error can occur.
    pub errors: BTreeSet<Loc>,
    pub lazy: LazyOutput,
    pub stats: AkStats,
    code: Code,
    locations: Vec<Thread>,
}

impl Ak {
    /// Source-program view of a location, if its pc is a mapped statement.
    pub fn localized(&self, l: Loc) -> Option<LocalizedState> {
        let th = &self.locations[l as usize];
        let inst = Instrument::new(&self.code, &self.lazy.stmt_map);
        let pc = self.code.node(Some(0), &th).and_then(|n| n.pc);
        inst.project(pc, th)
    }
}

/// Builds 𝒜ₖ from the lazy sequentialization of the lowered program,
/// keeping the locations and rules reachable from the initial
/// configuration. Stops once more than `budget` locations exist.
pub fn build_ak(p: &Pmpds, k: usize, budget: usize) -> Result<Ak, PdsError> {
    if k == 0 {
        return Err(PdsError::ZeroRounds);
    }
    let lazy = sequentialize_lazy(&p.program, k).map_err(|_| PdsError::NotNormalized)?;
    let code = Code::from_seq(&lazy.program);
    let s = p.shared_states as f64;
    let (ell, d) = (p.ell(), p.d());
    let location_envelope = ell as f64 * (k * k) as f64 * s.powi(2 * k as i32);
    let transition_envelope = ell as f64 * d as f64 * (k * k * k) as f64 * s.powi(2 * k as i32 - 1);
    let limits = Limits {
        max_depth: None,
        max_roots: None,
        max_locations: budget,
    };
    let mut c = SeqPds::new(&code, None, limits, None);
    if post_star(&mut c, &[SeqPds::START]).is_none() {
        return Err(PdsError::Budget {
            budget,
            reached: c.locs.len(),
            predicted_locations: location_envelope,
            predicted_transitions: transition_envelope,
        });
    }
    let mut pds = Pds {
        locations: c.locs.len(),
        symbols: c.syms.len(),
        initial: vec![SeqPds::START],
        targets: c.violations.keys().copied().collect(),
        ..Pds::default()
    };
    for (a, rules) in c.internal.iter().enumerate() {
        pds.internal.extend(rules.iter().flatten().map(|&b| (a as Loc, b)));
    }
    for (a, rules) in c.push.iter().enumerate() {
        pds.push.extend(rules.iter().map(|&(b, g)| (a as Loc, b, g)));
    }
    pds.pop = c.pop.iter().flat_map(|(&(a, g), v)| v.iter().map(move |&b| (a, g, b))).collect();
    pds.pop.sort_unstable();
    let stats = AkStats {
        k,
        shared_states: p.shared_states,
        ell,
        d,
        locations: pds.locations,
        transitions: pds.transitions(),
        location_envelope,
        transition_envelope,
    };
    let errors = c.errors.keys().copied().collect();
    let locations = (0..pds.locations as Loc).map(|l| c.thread(l)).collect();
    Ok(Ak {
        pds,
        errors,
        lazy,
        stats,
        code,
        locations,
    })
}

#[cfg(test)]
mod tests;
