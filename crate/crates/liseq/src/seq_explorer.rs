//! Bounded explicit-state exploration of sequential programs.
//!
//! With a [`StmtMap`] the explorer also reports what the sequential program
//! says about the source program: violations and runtime errors are tagged
//! with original pcs, and every visited state at a mapped pc is projected to
//! the source program's localized state.

use std::collections::{BTreeMap, BTreeSet};
use std::marker::PhantomData;
use std::rc::Rc;

use rustc_hash::FxHashMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::interfaces::{LinearInterface, SharedState};
use crate::lang::{Pc, SeqProgram, VarDecl};
use crate::machine::{named, Code, Event, Frame, LocalizedState, Outcome, RuntimeError, Thread};
use crate::pmpds::{post_star, Loc, Rules, Sym};
use crate::param_oracle::Truncation;
use crate::seq_lazy::StmtMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplorerBounds {
    /// Frames above the nearest thread root (or `main`), inclusive.
    pub max_depth: usize,
    /// Nesting of `linear_int` activations, i.e. threads per block.
    pub max_root_depth: usize,
    pub max_states: usize,
    /// Record the entry/exit of every `linear_int` activation.
    pub record_io: bool,
}

impl Default for ExplorerBounds {
    fn default() -> Self {
        ExplorerBounds {
            max_depth: 8,
            max_root_depth: 3,
            max_states: 2_000_000,
            record_io: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SeqViolation {
    pub pc: Option<Pc>,
    pub orig: Option<Pc>,
    /// Source-program view of the failing state, if the pc is mapped.
    pub localized: Option<LocalizedState>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SeqError {
    pub kind: RuntimeError,
    pub pc: Option<Pc>,
    pub orig: Option<Pc>,
    pub localized: Option<LocalizedState>,
}

/// One completed `linear_int` activation: its tuple arguments, its bound
/// and the shared state when it returned.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IoRecord {
    pub u: Vec<SharedState>,
    pub v: Vec<SharedState>,
    pub bound: usize,
    pub out: SharedState,
}

impl IoRecord {
    /// The interface `(u_1..u_bound, v_1..v_{bound-1} + out)` this activation
    /// accounts for.
    pub fn interface(&self) -> LinearInterface {
        let b = self.bound;
        let mut v: Vec<SharedState> = self.v[..b - 1].to_vec();
        v.push(self.out.clone());
        LinearInterface { u: self.u[..b].to_vec(), v }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExplorerReport {
    pub violations: BTreeSet<SeqViolation>,
    pub runtime_errors: BTreeSet<SeqError>,
    /// Projected localized states at mapped pcs.
    pub instrumented: BTreeSet<LocalizedState>,
    pub io: BTreeSet<IoRecord>,
    pub truncated: BTreeSet<Truncation>,
    pub states: usize,
}

impl ExplorerReport {
    pub fn has_violation(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn has_error(&self) -> bool {
        !self.runtime_errors.is_empty()
    }

    pub fn violations_at(&self, pc: Pc) -> bool {
        self.violations.iter().any(|v| v.pc == Some(pc))
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "violations": self.violations,
            "runtime_errors": self.runtime_errors,
            "instrumented_count": self.instrumented.len(),
            "io_records": self.io.len(),
            "states": self.states,
            "truncated": self.truncated,
        });
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// How a sequential procedure's frame projects onto the source program.
struct Projection {
    /// Slots of the original procedure's variables in the frame.
    locals: Vec<usize>,
    local_decls: Vec<VarDecl>,
    /// Whether process globals are visible (false for the init block).
    globals: bool,
}

pub(crate) struct Instrument {
    orig: Vec<Option<Pc>>,
    proj: Vec<Option<Projection>>,
    shared: Vec<usize>,
    shared_decls: Vec<VarDecl>,
    globals: Vec<usize>,
    global_decls: Vec<VarDecl>,
}

impl Instrument {
    pub(crate) fn new(code: &Code, map: &StmtMap) -> Instrument {
        let unit = &code.units[0];
        let max_pc = map.pcs.iter().map(|p| p.seq.0 as usize + 1).max().unwrap_or(0);
        let mut orig = vec![None; max_pc];
        for p in &map.pcs {
            orig[p.seq.0 as usize] = Some(p.orig);
        }
        let gslot = |n: &String| unit.globals.iter().position(|d| &d.name == n).expect("mapped global exists");
        let shared: Vec<usize> = map.shared.iter().map(gslot).collect();
        let globals: Vec<usize> = map.process_globals.iter().map(gslot).collect();
        let proj = unit
            .procs
            .iter()
            .map(|p| {
                let pm = map.procedures.iter().find(|m| m.name == p.name)?;
                let locals: Vec<usize> = pm
                    .user_vars
                    .iter()
                    .map(|n| p.vars.iter().position(|d| &d.name == n).expect("mapped local exists"))
                    .collect();
                Some(Projection {
                    local_decls: locals.iter().map(|&i| p.vars[i].clone()).collect(),
                    locals,
                    globals: p.name != map.init_proc,
                })
            })
            .collect();
        Instrument {
            orig,
            proj,
            shared_decls: shared.iter().map(|&i| unit.globals[i].clone()).collect(),
            shared,
            global_decls: globals.iter().map(|&i| unit.globals[i].clone()).collect(),
            globals,
        }
    }

    fn orig(&self, pc: Option<Pc>) -> Option<Pc> {
        self.orig.get(pc?.0 as usize).copied().flatten()
    }

    pub(crate) fn project(&self, pc: Option<Pc>, th: &Thread) -> Option<LocalizedState> {
        let orig = self.orig(pc)?;
        let top = th.stack.last()?;
        let p = self.proj[top.proc as usize].as_ref()?;
        let pick = |vals: &[i64], slots: &[usize]| slots.iter().map(|&i| vals[i]).collect::<Vec<_>>();
        let (gd, gv): (&[VarDecl], Vec<i64>) = if p.globals {
            (&self.global_decls, pick(&th.globals, &self.globals))
        } else {
            (&[], vec![])
        };
        Some(LocalizedState {
            pc: orig,
            locals: named(&p.local_decls, &pick(&top.locals, &p.locals)),
            globals: named(gd, &gv),
            shared: named(&self.shared_decls, &pick(&th.globals, &self.shared)),
        })
    }
}

struct IoLayout {
    proc: u32,
    k: usize,
    n: usize,
    shared: Vec<usize>,
}

impl IoLayout {
    fn record(&self, entry: &[i64], globals: &[i64]) -> IoRecord {
        let (k, n) = (self.k, self.n);
        let tuple = |i: usize| SharedState(entry[i * n..(i + 1) * n].into());
        let out = SharedState(self.shared.iter().map(|&i| globals[i]).collect());
        IoRecord {
            u: (0..k).map(tuple).collect(),
            v: (k..2 * k - 1).map(tuple).collect(),
            bound: entry[(2 * k - 1) * n] as usize,
            out,
        }
    }
}

/// A location of the sequential program: globals and top frame, plus the
/// depth counters the bounds need (zero when unbounded).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub(crate) struct Ctl {
    pub globals: Box<[i64]>,
    pub frame: Frame,
    depth: u16,
    roots: u16,
}

/// A caller frame waiting on the stack, with its counters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub(crate) struct Caller {
    frame: Frame,
    depth: u16,
    roots: u16,
}

/// Interns values by their compact encoding.
pub(crate) struct Packed<T> {
    ids: FxHashMap<Rc<[u8]>, u32>,
    keys: Vec<Rc<[u8]>>,
    _t: PhantomData<T>,
}

impl<T: Serialize + DeserializeOwned> Packed<T> {
    fn new() -> Self {
        Packed {
            ids: FxHashMap::default(),
            keys: Vec::new(),
            _t: PhantomData,
        }
    }

    fn id(&mut self, v: &T) -> u32 {
        let bytes: Rc<[u8]> = postcard::to_allocvec(v).expect("value encodes").into();
        if let Some(&i) = self.ids.get(&bytes) {
            return i;
        }
        let i = self.keys.len() as u32;
        self.ids.insert(bytes.clone(), i);
        self.keys.push(bytes);
        i
    }

    pub fn get(&self, i: u32) -> T {
        postcard::from_bytes(&self.keys[i as usize]).expect("value decodes")
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }
}

/// Limits for [`SeqPds`]; `None` leaves a dimension unbounded.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Limits {
    pub max_depth: Option<usize>,
    pub max_roots: Option<usize>,
    pub max_locations: usize,
}

/// The sequential program as a pushdown system built on demand: control
/// locations are [`Ctl`]s, stack symbols are [`Caller`]s.
pub(crate) struct SeqPds<'a> {
    code: &'a Code,
    root: Option<u32>,
    limits: Limits,
    /// Keep entry arguments for frames of this procedure.
    io_proc: Option<u32>,
    /// Pcs whose states need not be locations: plain deterministic steps
    /// through them are followed without interning.
    transient: Vec<bool>,
    pub locs: Packed<Ctl>,
    pub syms: Packed<Caller>,
    pub internal: Vec<Option<Vec<Loc>>>,
    pub push: Vec<Vec<(Loc, Sym)>>,
    pub pop: FxHashMap<(Loc, Sym), Vec<Loc>>,
    pub violations: BTreeMap<Loc, Option<Pc>>,
    pub errors: BTreeMap<Loc, Vec<(RuntimeError, Option<Pc>)>>,
    /// Popped frames of `io_proc` with the globals they returned to.
    pub returns: BTreeSet<(Box<[i64]>, Box<[i64]>)>,
    pub truncated: BTreeSet<Truncation>,
}

impl<'a> SeqPds<'a> {
    pub fn new(code: &'a Code, root: Option<u32>, limits: Limits, io_proc: Option<u32>) -> SeqPds<'a> {
        let mut s = SeqPds {
            code,
            root,
            limits,
            io_proc,
            transient: Vec::new(),
            locs: Packed::new(),
            syms: Packed::new(),
            internal: Vec::new(),
            push: Vec::new(),
            pop: FxHashMap::default(),
            violations: BTreeMap::new(),
            errors: BTreeMap::new(),
            returns: BTreeSet::new(),
            truncated: BTreeSet::new(),
        };
        let start = code.fresh_thread(0);
        s.loc(Ctl {
            globals: start.globals,
            frame: start.stack[0].clone(),
            depth: u16::from(limits.max_depth.is_some()),
            roots: 0,
        });
        s
    }

    pub const START: Loc = 0;

    fn loc(&mut self, c: Ctl) -> Loc {
        let l = self.locs.id(&c);
        if self.internal.len() <= l as usize {
            self.internal.push(None);
            self.push.push(Vec::new());
        }
        l
    }

    pub fn thread(&self, l: Loc) -> Thread {
        let c = self.locs.get(l);
        Thread {
            globals: c.globals,
            stack: vec![c.frame],
        }
    }

    /// Marks states at these pcs as transient.
    pub fn with_transient(mut self, transient: Vec<bool>) -> Self {
        self.transient = transient;
        self
    }

    /// Runs `th` through deterministic plain steps at transient pcs.
    fn fast_forward(&self, mut th: Thread) -> Thread {
        let mut out = Vec::new();
        for _ in 0..CHAIN_LIMIT {
            let transient = match self.code.node(Some(0), &th).and_then(|n| n.pc) {
                Some(pc) => self.transient.get(pc.0 as usize).copied().unwrap_or(false),
                None => false,
            };
            if !transient {
                break;
            }
            out.clear();
            self.code.step(Some(0), &[], &th, &mut out);
            match out.pop() {
                Some(Outcome::Next {
                    thread,
                    event: Event::Plain,
                    ..
                }) if out.is_empty() => th = thread,
                _ => break,
            }
        }
        th
    }

    fn expand(&mut self, p: Loc) {
        if self.internal[p as usize].is_some() {
            return;
        }
        let c = self.locs.get(p);
        let (depth, roots) = (c.depth, c.roots);
        let th = Thread {
            globals: c.globals,
            stack: vec![c.frame],
        };
        let mut out = Vec::new();
        self.code.step(Some(0), &[], &th, &mut out);
        let mut internal = Vec::new();
        for o in out {
            match o {
                Outcome::Next { thread, event, .. } => match event {
                    Event::Plain => {
                        let mut thread = self.fast_forward(thread);
                        let frame = thread.stack.pop().expect("one frame");
                        internal.push(self.loc(Ctl {
                            globals: thread.globals,
                            frame,
                            depth,
                            roots,
                        }));
                    }
                    Event::Pushed => {
                        let mut callee = thread.stack[1].clone();
                        let is_root = Some(callee.proc) == self.root;
                        let d = match self.limits.max_depth {
                            None => 0,
                            Some(_) if is_root => 1,
                            Some(max) => {
                                if depth as usize + 1 > max {
                                    self.truncated.insert(Truncation::StackDepth);
                                    continue;
                                }
                                depth + 1
                            }
                        };
                        let r = match self.limits.max_roots {
                            Some(max) if is_root => {
                                if roots as usize + 1 > max {
                                    self.truncated.insert(Truncation::RootDepth);
                                    continue;
                                }
                                roots + 1
                            }
                            _ => roots,
                        };
                        if Some(callee.proc) == self.io_proc {
                            let n = self.code.units[0].procs[callee.proc as usize].n_params;
                            callee.entry = Some(callee.locals[..n].into());
                        }
                        let sym = self.syms.id(&Caller {
                            frame: thread.stack[0].clone(),
                            depth,
                            roots,
                        });
                        let to = self.loc(Ctl {
                            globals: thread.globals,
                            frame: callee,
                            depth: d,
                            roots: r,
                        });
                        self.push[p as usize].push((to, sym));
                    }
                    // Returns are resolved per caller in `pop`.
                    Event::Popped(_) => {}
                },
                Outcome::Violation(pc) => {
                    self.violations.insert(p, pc);
                }
                Outcome::Error(kind, pc) => self.errors.entry(p).or_default().push((kind, pc)),
            }
        }
        self.internal[p as usize] = Some(internal);
    }
}

impl Rules for SeqPds<'_> {
    fn internal(&mut self, p: Loc) -> &[Loc] {
        self.expand(p);
        self.internal[p as usize].as_deref().unwrap_or_default()
    }

    fn push(&mut self, p: Loc) -> &[(Loc, Sym)] {
        self.expand(p);
        &self.push[p as usize]
    }

    fn pop(&mut self, p: Loc, top: Sym) -> &[Loc] {
        if self.pop.contains_key(&(p, top)) {
            return &self.pop[&(p, top)];
        }
        let caller = self.syms.get(top);
        let ctl = self.locs.get(p);
        let th = Thread {
            globals: ctl.globals,
            stack: vec![caller.frame, ctl.frame],
        };
        let mut out = Vec::new();
        self.code.step(Some(0), &[], &th, &mut out);
        let mut r = Vec::new();
        for o in out {
            if let Outcome::Next {
                thread,
                event: Event::Popped(popped),
                ..
            } = o
            {
                if let Some(entry) = popped.entry.filter(|_| Some(popped.proc) == self.io_proc) {
                    self.returns.insert((entry, thread.globals.clone()));
                }
                let frame = thread.stack[0].clone();
                r.push(self.loc(Ctl {
                    globals: thread.globals,
                    frame,
                    depth: caller.depth,
                    roots: caller.roots,
                }));
            }
        }
        self.pop.entry((p, top)).or_insert(r)
    }

    fn exhausted(&self, relations: usize) -> bool {
        self.locs.len() > self.limits.max_locations || relations > RELATIONS_PER_LOCATION * self.limits.max_locations
    }
}

/// Longest deterministic run followed without interning.
const CHAIN_LIMIT: usize = 256;

/// Saturation entries allowed per location of budget; bounds memory when
/// many stack contexts reach the same location.
const RELATIONS_PER_LOCATION: usize = 4;

/// Explores every execution of `prog` within the bounds. Reachability is
/// computed per location (globals and top frame) by pushdown saturation, so
/// call stacks are never enumerated.
pub fn explore_seq(prog: &SeqProgram, map: Option<&StmtMap>, bounds: &ExplorerBounds) -> ExplorerReport {
    let code = Code::from_seq(prog);
    let unit = &code.units[0];
    let proc_index = |name: &str| unit.procs.iter().position(|p| p.name == name).map(|i| i as u32);
    let inst = map.map(|m| Instrument::new(&code, m));
    let root = map.and_then(|m| proc_index(&m.root));
    let io = match (map, bounds.record_io) {
        (Some(m), true) => m.linear_int.as_ref().and_then(|li| {
            Some(IoLayout {
                proc: proc_index(&li.name)?,
                k: m.k,
                n: m.shared.len(),
                shared: m
                    .shared
                    .iter()
                    .map(|s| unit.globals.iter().position(|d| &d.name == s).expect("shared global"))
                    .collect(),
            })
        }),
        _ => None,
    };
    let limits = Limits {
        max_depth: Some(bounds.max_depth),
        max_roots: root.map(|_| bounds.max_root_depth),
        max_locations: bounds.max_states,
    };
    // Generated bookkeeping has no source pc and is never instrumented.
    let transient = inst.as_ref().map(|i| i.orig.iter().map(Option::is_none).collect()).unwrap_or_default();
    let mut pds = SeqPds::new(&code, root, limits, io.as_ref().map(|io| io.proc)).with_transient(transient);
    let reached = post_star(&mut pds, &[SeqPds::START]);
    let mut report = ExplorerReport::default();
    let reached = match reached {
        Some(r) => r,
        None => {
            report.truncated.insert(Truncation::StateLimit);
            pds.internal.iter().enumerate().filter(|(_, r)| r.is_some()).map(|(l, _)| l as Loc).collect()
        }
    };
    report.truncated.extend(pds.truncated.iter().copied());
    report.states = reached.len();
    let project = |l: Loc, pc: Option<Pc>| {
        let th = pds.thread(l);
        inst.as_ref().and_then(|i| i.project(pc, &th))
    };
    for &l in &reached {
        let th = pds.thread(l);
        let pc = code.node(Some(0), &th).and_then(|n| n.pc);
        if let Some(ls) = project(l, pc) {
            report.instrumented.insert(ls);
        }
        if let Some(&pc) = pds.violations.get(&l) {
            report.violations.insert(SeqViolation {
                pc,
                orig: inst.as_ref().and_then(|i| i.orig(pc)),
                localized: project(l, pc),
            });
        }
        for &(kind, pc) in pds.errors.get(&l).into_iter().flatten() {
            report.runtime_errors.insert(SeqError {
                kind,
                pc,
                orig: inst.as_ref().and_then(|i| i.orig(pc)),
                localized: project(l, pc),
            });
        }
    }
    if let Some(io) = &io {
        report.io = pds.returns.iter().map(|(entry, globals)| io.record(entry, globals)).collect();
    }
    report
}
