//! Breadth-first reachability, invariant and deadlock checking, and DOT
//! export of the reachable state graph.

use std::fmt::Write;
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

use crate::kernel::{self, EvalError, InitError, Model, State, StepError};
use crate::liveness::Lasso;
use crate::parser::STUTTER;

/// Default cap on the number of reachable states.
pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{0}")]
    Init(#[from] InitError),
    #[error("{source} (reached after {} step(s))", trace.actions.len())]
    Step {
        #[source]
        source: Box<StepError>,
        /// Path from an initial state to the state where the step failed.
        trace: Trace,
    },
    #[error("more than {limit} reachable states; raise the state cap")]
    StateLimit { limit: usize },
}

/// Edge label: a declared action (by index) or a stuttering step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Action(usize),
    Stutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

/// Finite execution: `states[i] --actions[i]--> states[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<State>,
    pub actions: Vec<String>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

/// Reachable states (indexed in discovery order) and labeled edges.
///
/// Edges are grouped by source state in ascending order; within a state they
/// follow action declaration order, then successor order.
#[derive(Debug, Clone)]
pub struct StateGraph {
    model: Arc<Model>,
    states: IndexSet<State>,
    edges: Vec<Edge>,
    /// `edges[offsets[i]..offsets[i + 1]]` leave state `i`.
    offsets: Vec<usize>,
    init: Vec<usize>,
    parent: Vec<Option<(usize, Label)>>,
    depth: Vec<usize>,
}

impl StateGraph {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.states.iter()
    }

    pub fn index_of(&self, s: &State) -> Option<usize> {
        self.states.get_index_of(s)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn successors(&self, i: usize) -> &[Edge] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn init_indices(&self) -> &[usize] {
        &self.init
    }

    /// BFS depth of each state.
    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn diameter(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn label_name(&self, label: Label) -> &str {
        match label {
            Label::Action(a) => &self.model.actions[a].name,
            Label::Stutter => STUTTER,
        }
    }

    /// Shortest path from an initial state to state `i`.
    pub fn trace_to(&self, i: usize) -> Trace {
        let mut states = vec![self.states[i].clone()];
        let mut actions = Vec::new();
        let mut cur = i;
        while let Some((p, label)) = self.parent[cur] {
            actions.push(self.label_name(label).to_string());
            states.push(self.states[p].clone());
            cur = p;
        }
        states.reverse();
        actions.reverse();
        Trace { states, actions }
    }

    pub fn stats(&self) -> Stats {
        Stats {
            states: self.len(),
            edges: self.edges.len(),
            diameter: self.diameter(),
        }
    }

    /// Adds a `stutter` self-loop to every state lacking one.
    pub fn stutter_closed(&self) -> StateGraph {
        let mut edges = Vec::with_capacity(self.edges.len() + self.len());
        let mut offsets = Vec::with_capacity(self.len() + 1);
        for i in 0..self.len() {
            offsets.push(edges.len());
            let out = self.successors(i);
            edges.extend_from_slice(out);
            if !out.iter().any(|e| e.label == Label::Stutter) {
                edges.push(Edge {
                    from: i,
                    label: Label::Stutter,
                    to: i,
                });
            }
        }
        offsets.push(edges.len());
        StateGraph {
            edges,
            offsets,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub states: usize,
    pub edges: usize,
    /// Largest BFS depth of any reachable state.
    pub diameter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    Trace(Trace),
    Lasso(Lasso),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(Counterexample),
    Error(String),
}

impl Verdict {
    pub fn kind(&self) -> crate::examples::VerdictKind {
        use crate::examples::VerdictKind;
        match self {
            Verdict::Holds => VerdictKind::Holds,
            Verdict::Violated(_) => VerdictKind::Violated,
            Verdict::Error(_) => VerdictKind::Error,
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Verdict::Violated(Counterexample::Trace(t)) => Some(t),
            _ => None,
        }
    }

    pub fn lasso(&self) -> Option<&Lasso> {
        match self {
            Verdict::Violated(Counterexample::Lasso(l)) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyKind {
    Invariant,
    Liveness,
    Deadlock,
}

impl PropertyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PropertyKind::Invariant => "invariant",
            PropertyKind::Liveness => "liveness",
            PropertyKind::Deadlock => "deadlock",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub property: String,
    pub kind: PropertyKind,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub stats: Stats,
    pub results: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn result(&self, property: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.property == property)
    }

    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.verdict == Verdict::Holds)
    }
}

/// Explores all states reachable from the initial states.
pub fn reachable(model: &Model) -> Result<StateGraph, CheckError> {
    reachable_with_limit(model, DEFAULT_MAX_STATES)
}

pub fn reachable_with_limit(model: &Model, max_states: usize) -> Result<StateGraph, CheckError> {
    let model = Arc::new(model.clone());
    let mut states: IndexSet<State> = IndexSet::new();
    let mut parent = Vec::new();
    let mut depth = Vec::new();
    let mut init = Vec::new();

    for s in kernel::initial_states(&model)? {
        let (i, fresh) = states.insert_full(s);
        if fresh {
            parent.push(None);
            depth.push(0);
            init.push(i);
        }
        if states.len() > max_states {
            return Err(CheckError::StateLimit { limit: max_states });
        }
    }

    let mut edges = Vec::new();
    let mut offsets = Vec::new();
    // states are appended in BFS order, so the index doubles as the queue
    let mut head = 0;
    while head < states.len() {
        offsets.push(edges.len());
        let current = states[head].clone();
        for (a, action) in model.actions.iter().enumerate() {
            let step_err =
                |source: StepError, states: &IndexSet<State>, parent: &[_]| CheckError::Step {
                    source: Box::new(source),
                    trace: trace_from_parents(&model, states, parent, head),
                };
            let on = kernel::enabled(&model, action, &current).map_err(|source| {
                step_err(
                    StepError::Eval {
                        action: action.name.clone(),
                        source,
                    },
                    &states,
                    &parent,
                )
            })?;
            if !on {
                continue;
            }
            let succ = kernel::apply(&model, action, &current)
                .map_err(|e| step_err(e, &states, &parent))?;
            for next in succ {
                let (to, fresh) = states.insert_full(next);
                if fresh {
                    if states.len() > max_states {
                        return Err(CheckError::StateLimit { limit: max_states });
                    }
                    parent.push(Some((head, Label::Action(a))));
                    depth.push(depth[head] + 1);
                }
                edges.push(Edge {
                    from: head,
                    label: Label::Action(a),
                    to,
                });
            }
        }
        head += 1;
    }
    offsets.push(edges.len());

    Ok(StateGraph {
        model,
        states,
        edges,
        offsets,
        init,
        parent,
        depth,
    })
}

fn trace_from_parents(
    model: &Model,
    states: &IndexSet<State>,
    parent: &[Option<(usize, Label)>],
    i: usize,
) -> Trace {
    let mut out = vec![states[i].clone()];
    let mut actions = Vec::new();
    let mut cur = i;
    while let Some((p, label)) = parent[cur] {
        actions.push(match label {
            Label::Action(a) => model.actions[a].name.clone(),
            Label::Stutter => STUTTER.to_string(),
        });
        out.push(states[p].clone());
        cur = p;
    }
    out.reverse();
    actions.reverse();
    Trace {
        states: out,
        actions,
    }
}

pub fn check_invariants(model: &Model) -> Result<CheckReport, CheckError> {
    let g = reachable(model)?;
    Ok(CheckReport {
        stats: g.stats(),
        results: invariant_results(&g),
    })
}

/// One result per declared invariant. A violated invariant carries the
/// shortest trace to its first violating state in discovery order.
pub fn invariant_results(g: &StateGraph) -> Vec<PropertyResult> {
    let m = g.model();
    m.invariants
        .iter()
        .map(|inv| {
            let mut verdict = Verdict::Holds;
            for (i, s) in g.states().enumerate() {
                match kernel::holds(m, &inv.expr, s) {
                    Ok(true) => {}
                    Ok(false) => {
                        verdict = Verdict::Violated(Counterexample::Trace(g.trace_to(i)));
                        break;
                    }
                    Err(e) => {
                        verdict = Verdict::Error(eval_message(m, s, e));
                        break;
                    }
                }
            }
            PropertyResult {
                property: inv.name.clone(),
                kind: PropertyKind::Invariant,
                verdict,
            }
        })
        .collect()
}

fn eval_message(m: &Model, s: &State, e: EvalError) -> String {
    format!("{e} at {}", m.display_state(s))
}

pub fn check_deadlock(model: &Model) -> Result<CheckReport, CheckError> {
    let g = reachable(model)?;
    Ok(CheckReport {
        stats: g.stats(),
        results: vec![deadlock_result(&g)],
    })
}

/// Violated iff some reachable state enables no action; stuttering does not
/// count.
pub fn deadlock_result(g: &StateGraph) -> PropertyResult {
    let m = g.model();
    let mut verdict = Verdict::Holds;
    'states: for (i, s) in g.states().enumerate() {
        for a in &m.actions {
            match kernel::enabled(m, a, s) {
                Ok(true) => continue 'states,
                Ok(false) => {}
                Err(e) => {
                    verdict = Verdict::Error(eval_message(m, s, e));
                    break 'states;
                }
            }
        }
        verdict = Verdict::Violated(Counterexample::Trace(g.trace_to(i)));
        break;
    }
    PropertyResult {
        property: "deadlock".to_string(),
        kind: PropertyKind::Deadlock,
        verdict,
    }
}

/// Which checks [`check`] runs. Invariants are always checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub liveness: bool,
    pub deadlock: bool,
    pub max_states: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            liveness: true,
            deadlock: false,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Explores the model once and evaluates every selected property: invariants
/// in declaration order, then liveness properties under the declared
/// fairness, then deadlock.
pub fn check(model: &Model, opts: &CheckOptions) -> Result<CheckReport, CheckError> {
    let g = reachable_with_limit(model, opts.max_states)?;
    Ok(check_graph(&g, opts))
}

/// Like [`check`] on an already explored graph; `max_states` is ignored.
pub fn check_graph(g: &StateGraph, opts: &CheckOptions) -> CheckReport {
    let model = g.model();
    let mut results = invariant_results(g);
    if opts.liveness {
        let fair = crate::liveness::FairnessSet::declared(model);
        for prop in &model.liveness {
            results.push(crate::liveness::leads_to_result(g, prop, &fair));
        }
    }
    if opts.deadlock {
        results.push(deadlock_result(g));
    }
    CheckReport {
        stats: g.stats(),
        results,
    }
}

/// Replays a trace through the step relation. Returns a description of the
/// first inconsistency.
pub fn replay_trace(model: &Model, trace: &Trace) -> Result<(), String> {
    let first = trace.states.first().ok_or("empty trace")?;
    if trace.actions.len() + 1 != trace.states.len() {
        return Err(format!(
            "{} states but {} labels",
            trace.states.len(),
            trace.actions.len()
        ));
    }
    let init = kernel::initial_states(model).map_err(|e| e.to_string())?;
    if !init.contains(first) {
        return Err(format!("{} is not initial", model.display_state(first)));
    }
    for (k, label) in trace.actions.iter().enumerate() {
        check_step(model, &trace.states[k], label, &trace.states[k + 1])
            .map_err(|e| format!("step {k}: {e}"))?;
    }
    Ok(())
}

/// Whether `to` is a `label`-successor of `from`; `stutter` relates a state
/// to itself.
pub fn check_step(model: &Model, from: &State, label: &str, to: &State) -> Result<(), String> {
    if label == STUTTER {
        return if from == to {
            Ok(())
        } else {
            Err("stutter changes the state".into())
        };
    }
    let action = model
        .action(label)
        .ok_or_else(|| format!("unknown action {label}"))?;
    if !kernel::enabled(model, action, from).map_err(|e| e.to_string())? {
        return Err(format!(
            "{label} is disabled at {}",
            model.display_state(from)
        ));
    }
    let succ = kernel::apply(model, action, from).map_err(|e| e.to_string())?;
    if succ.contains(to) {
        Ok(())
    } else {
        Err(format!(
            "{} is not a {label}-successor of {}",
            model.display_state(to),
            model.display_state(from)
        ))
    }
}

/// Renders the graph as a Graphviz digraph. Initial states get a double
/// border; edges of `highlight` are drawn bold red.
pub fn export_dot(g: &StateGraph, highlight: Option<&Trace>) -> String {
    let m = g.model();
    let mut marked = std::collections::HashSet::new();
    let mut marked_nodes = std::collections::HashSet::new();
    if let Some(t) = highlight {
        for (k, label) in t.actions.iter().enumerate() {
            if let (Some(a), Some(b)) = (g.index_of(&t.states[k]), g.index_of(&t.states[k + 1])) {
                marked.insert((a, label.as_str(), b));
            }
        }
        marked_nodes.extend(t.states.iter().filter_map(|s| g.index_of(s)));
    }

    let mut out = String::new();
    out.push_str("digraph states {\n");
    out.push_str("  node [shape=box, fontname=\"monospace\"];\n");
    for (i, s) in g.states().enumerate() {
        let label = m.display_state(s).with_separator("\\n").to_string();
        let _ = write!(out, "  s{i} [label=\"{}\"", escape(&label));
        if g.init.contains(&i) {
            out.push_str(", peripheries=2");
        }
        if marked_nodes.contains(&i) {
            out.push_str(", color=red");
        }
        out.push_str("];\n");
    }
    for e in g.edges() {
        let name = g.label_name(e.label);
        let _ = write!(
            out,
            "  s{} -> s{} [label=\"{}\"",
            e.from,
            e.to,
            escape(name)
        );
        if e.label == Label::Stutter {
            out.push_str(", style=dashed");
        }
        if marked.contains(&(e.from, name, e.to)) {
            out.push_str(", color=red, penwidth=2");
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    // `\n` separators are already escaped; only quotes need care
    s.replace('"', "\\\"")
}
