//! Leads-to checking under stuttering and weak fairness.
//!
//! The reachable graph is restricted to states where `Q` is false and closed
//! under stuttering. A strongly connected component of that subgraph is
//! *fair* when every weakly fair action is either taken on an edge inside it
//! or disabled at one of its states; a behavior can then stay in it forever.
//! `P ~> Q` fails iff some reachable `P && !Q` state reaches a fair
//! component without passing through a `Q` state.

use std::collections::VecDeque;

use crate::explorer::{
    self, reachable, CheckError, CheckReport, Counterexample, Label, PropertyKind, PropertyResult,
    StateGraph, Trace, Verdict,
};
use crate::kernel::{self, Expr, LeadsTo, Model, State};
use crate::parser::STUTTER;

/// The actions under weak fairness, as indices into `Model::actions`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FairnessSet {
    actions: Vec<usize>,
}

impl FairnessSet {
    pub fn none() -> Self {
        FairnessSet::default()
    }

    /// The model's declared `fairness weak` list.
    pub fn declared(model: &Model) -> Self {
        // validation guarantees the names exist
        FairnessSet::of(model, model.fairness.iter().map(String::as_str))
            .expect("validated fairness names")
    }

    /// Fails with the first name that is not an action of `model`.
    pub fn of<'a>(model: &Model, names: impl IntoIterator<Item = &'a str>) -> Result<Self, String> {
        let mut actions = Vec::new();
        for name in names {
            let id = model.action_id(name).ok_or_else(|| name.to_string())?;
            if !actions.contains(&id) {
                actions.push(id);
            }
        }
        Ok(FairnessSet { actions })
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// The repeating part of a lasso. `actions[i]` leads from `states[i]` to
/// `states[(i + 1) % len]`, so the last label returns to the entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub states: Vec<State>,
    pub actions: Vec<String>,
}

/// Infinite counterexample: `stem` followed by `cycle` repeated forever.
/// `cycle.states[0]` is the last state of the stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Trace,
    pub cycle: Cycle,
}

/// Returns the graph with a `stutter` self-loop at every state.
pub fn stutter_close(g: &StateGraph) -> StateGraph {
    g.stutter_closed()
}

/// Strongly connected components of the whole graph, each sorted, ordered by
/// their smallest state index.
pub fn sccs(g: &StateGraph) -> Vec<Vec<usize>> {
    sccs_within(g, &vec![true; g.len()])
}

/// Iterative Tarjan over the states with `keep[i]` set; edges leaving the
/// kept set are ignored.
fn sccs_within(g: &StateGraph, keep: &[bool]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if !keep[root] || index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos].to;
                *pos += 1;
                if !keep[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Checks one leads-to property against a freshly explored graph.
pub fn check_leads_to(
    model: &Model,
    prop: &LeadsTo,
    fair: &FairnessSet,
) -> Result<CheckReport, CheckError> {
    let g = reachable(model)?;
    Ok(CheckReport {
        stats: g.stats(),
        results: vec![leads_to_result(&g, prop, fair)],
    })
}

pub fn leads_to_result(g: &StateGraph, prop: &LeadsTo, fair: &FairnessSet) -> PropertyResult {
    let verdict = match find_lasso(g, &prop.p, &prop.q, fair) {
        Ok(None) => Verdict::Holds,
        Ok(Some(l)) => Verdict::Violated(Counterexample::Lasso(l)),
        Err(e) => Verdict::Error(e),
    };
    PropertyResult {
        property: prop.name.clone(),
        kind: PropertyKind::Liveness,
        verdict,
    }
}

fn eval_all(g: &StateGraph, e: &Expr) -> Result<Vec<bool>, String> {
    let m = g.model();
    g.states()
        .map(|s| kernel::holds(m, e, s).map_err(|err| format!("{err} at {}", m.display_state(s))))
        .collect()
}

/// Searches for a fair lasso refuting `p ~> q`.
pub fn find_lasso(
    g: &StateGraph,
    p: &Expr,
    q: &Expr,
    fair: &FairnessSet,
) -> Result<Option<Lasso>, String> {
    let m = g.model();
    let n = g.len();
    let p_at = eval_all(g, p)?;
    let q_at = eval_all(g, q)?;
    let keep: Vec<bool> = q_at.iter().map(|q| !q).collect();

    // enabledness of each fair action at each state
    let mut disabled = vec![vec![false; n]; fair.actions.len()];
    for (k, &a) in fair.actions.iter().enumerate() {
        for (i, s) in g.states().enumerate() {
            disabled[k][i] = !kernel::enabled(m, &m.actions[a], s).map_err(|e| e.to_string())?;
        }
    }

    let comps = sccs_within(g, &keep);
    let mut comp_of = vec![usize::MAX; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let fair_comp: Vec<bool> = comps
        .iter()
        .enumerate()
        .map(|(c, comp)| {
            fair.actions.iter().enumerate().all(|(k, &a)| {
                comp.iter().any(|&v| {
                    disabled[k][v]
                        || g.successors(v)
                            .iter()
                            .any(|e| e.label == Label::Action(a) && comp_of[e.to] == c)
                })
            })
        })
        .collect();

    // backward closure inside !Q from the fair components
    let mut preds = vec![Vec::new(); n];
    for e in g.edges() {
        if keep[e.from] && keep[e.to] {
            preds[e.to].push(e.from);
        }
    }
    let mut reaches = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&v| keep[v] && fair_comp[comp_of[v]])
        .collect();
    for &v in &queue {
        reaches[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &u in &preds[v] {
            if !reaches[u] {
                reaches[u] = true;
                queue.push_back(u);
            }
        }
    }

    let Some(start) = (0..n).find(|&v| p_at[v] && keep[v] && reaches[v]) else {
        return Ok(None);
    };

    // stem: shortest trace to `start`, then the shortest !Q path onward to
    // the nearest state of a fair component
    let mut stem = g.trace_to(start);
    let to_fair = bfs_path(g, start, |v| keep[v], |v| fair_comp[comp_of[v]])
        .expect("start reaches a fair component");
    let entry = to_fair.last().map_or(start, |&(_, v)| v);
    append_path(g, &mut stem, &to_fair);

    let c = comp_of[entry];
    let in_comp = |v: usize| comp_of[v] == c;
    let mut cur = entry;
    let mut path: Vec<(Label, usize)> = Vec::new();
    let mut visited = vec![entry];
    for (k, &a) in fair.actions.iter().enumerate() {
        let met = visited.iter().any(|&v| disabled[k][v])
            || path.iter().any(|&(l, _)| l == Label::Action(a));
        if met {
            continue;
        }
        // nearest state where A is disabled or an internal A-edge starts
        let a_edge = |v: usize| {
            g.successors(v)
                .iter()
                .find(|e| e.label == Label::Action(a) && in_comp(e.to))
                .copied()
        };
        let seg = bfs_path(g, cur, in_comp, |v| disabled[k][v] || a_edge(v).is_some())
            .expect("fair component meets every obligation");
        for &(l, v) in &seg {
            path.push((l, v));
            visited.push(v);
            cur = v;
        }
        if !disabled[k][cur] {
            let e = a_edge(cur).expect("obligation edge");
            path.push((e.label, e.to));
            visited.push(e.to);
            cur = e.to;
        }
    }
    if cur != entry {
        let back =
            bfs_path(g, cur, in_comp, |v| v == entry).expect("component is strongly connected");
        path.extend(back);
    }

    let cycle = if path.is_empty() {
        Cycle {
            states: vec![g.state(entry).clone()],
            actions: vec![STUTTER.to_string()],
        }
    } else {
        let mut states = vec![g.state(entry).clone()];
        let mut actions = Vec::new();
        for (i, &(l, v)) in path.iter().enumerate() {
            actions.push(g.label_name(l).to_string());
            if i + 1 < path.len() {
                states.push(g.state(v).clone());
            }
        }
        Cycle { states, actions }
    };
    Ok(Some(Lasso { stem, cycle }))
}

/// Shortest path from `from` to the first state satisfying `goal`, moving
/// only through states satisfying `allowed`. Returns the steps taken; empty
/// when `from` itself is a goal.
fn bfs_path(
    g: &StateGraph,
    from: usize,
    allowed: impl Fn(usize) -> bool,
    goal: impl Fn(usize) -> bool,
) -> Option<Vec<(Label, usize)>> {
    if goal(from) {
        return Some(Vec::new());
    }
    let mut prev: Vec<Option<(usize, Label)>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for e in g.successors(v) {
            if seen[e.to] || !allowed(e.to) {
                continue;
            }
            seen[e.to] = true;
            prev[e.to] = Some((v, e.label));
            if goal(e.to) {
                let mut steps = Vec::new();
                let mut cur = e.to;
                while cur != from {
                    let (p, l) = prev[cur].expect("bfs predecessor");
                    steps.push((l, cur));
                    cur = p;
                }
                steps.reverse();
                return Some(steps);
            }
            queue.push_back(e.to);
        }
    }
    None
}

fn append_path(g: &StateGraph, trace: &mut Trace, steps: &[(Label, usize)]) {
    for &(l, v) in steps {
        trace.actions.push(g.label_name(l).to_string());
        trace.states.push(g.state(v).clone());
    }
}

/// Checks that `lasso` is a genuine fair counterexample to `prop` in
/// `model`. Returns a description of the first defect.
pub fn replay_lasso(
    model: &Model,
    prop: &LeadsTo,
    fair: &FairnessSet,
    lasso: &Lasso,
) -> Result<(), String> {
    explorer::replay_trace(model, &lasso.stem).map_err(|e| format!("stem: {e}"))?;
    let cycle = &lasso.cycle;
    if cycle.states.is_empty() || cycle.states.len() != cycle.actions.len() {
        return Err("malformed cycle".into());
    }
    if Some(&cycle.states[0]) != lasso.stem.last() {
        return Err("cycle does not start at the end of the stem".into());
    }
    let n = cycle.states.len();
    for (i, label) in cycle.actions.iter().enumerate() {
        explorer::check_step(model, &cycle.states[i], label, &cycle.states[(i + 1) % n])
            .map_err(|e| format!("cycle step {i}: {e}"))?;
    }

    let q = |s: &State| kernel::holds(model, &prop.q, s).map_err(|e| e.to_string());
    let p = |s: &State| kernel::holds(model, &prop.p, s).map_err(|e| e.to_string());
    for s in &cycle.states {
        if q(s)? {
            return Err(format!(
                "cycle state {} satisfies Q",
                model.display_state(s)
            ));
        }
    }
    // some P state whose suffix, through the stem and cycle, never sees Q
    let mut q_free_suffix = true;
    let mut witnessed = false;
    for s in lasso.stem.states.iter().rev() {
        q_free_suffix &= !q(s)?;
        if !q_free_suffix {
            break;
        }
        if p(s)? {
            witnessed = true;
            break;
        }
    }
    if !witnessed {
        return Err("no P state is followed only by !Q states".into());
    }

    for &a in fair.actions() {
        let action = &model.actions[a];
        let taken = cycle.actions.contains(&action.name);
        let mut off = false;
        for s in &cycle.states {
            if !kernel::enabled(model, action, s).map_err(|e| e.to_string())? {
                off = true;
                break;
            }
        }
        if !taken && !off {
            return Err(format!(
                "cycle is unfair: {} is always enabled and never taken",
                action.name
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::builtin;
    use crate::parser::parse;

    fn model(name: &str) -> Model {
        parse(builtin(name).unwrap().source).unwrap()
    }

    fn graph(src: &str) -> StateGraph {
        reachable(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn scc_shapes() {
        let ring =
            graph("var x : 0..2\ninit { x = 0 }\naction Next { x' = if x = 2 then 0 else x + 1 }");
        assert_eq!(sccs(&ring), vec![vec![0, 1, 2]]);
        let chain = graph("var x : 0..1\ninit { x = 0 }\naction Go { when x = 0 x' = 1 }");
        assert_eq!(sccs(&chain), vec![vec![0], vec![1]]);
        let closed = stutter_close(&chain);
        for comp in sccs(&closed) {
            assert!(comp
                .iter()
                .any(|&v| closed.successors(v).iter().any(|e| comp.contains(&e.to))));
        }
    }

    #[test]
    fn sccs_partition_microwave() {
        let g = reachable(&model("microwave-v1")).unwrap();
        let comps = sccs(&g);
        let mut all: Vec<usize> = comps.concat();
        all.sort_unstable();
        assert_eq!(all, (0..g.len()).collect::<Vec<_>>());
        assert!(comps.windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn v2_with_fairness_holds() {
        let m = model("microwave-v2");
        let r = check_leads_to(&m, &m.liveness[0], &FairnessSet::declared(&m)).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Holds);
    }

    #[test]
    fn v2_without_fairness_stutters() {
        let m = model("microwave-v2");
        let prop = &m.liveness[0];
        let r = check_leads_to(&m, prop, &FairnessSet::none()).unwrap();
        let lasso = r.results[0].verdict.lasso().unwrap();
        let stem: Vec<String> = lasso.stem.states.iter().map(|s| m.state_tuple(s)).collect();
        assert_eq!(stem, ["(CLOSED,OFF,0)", "(CLOSED,OFF,1)", "(CLOSED,ON,1)"]);
        assert_eq!(lasso.cycle.actions, ["stutter"]);
        assert_eq!(replay_lasso(&m, prop, &FairnessSet::none(), lasso), Ok(()));
        // the same lasso is unfair once Tick is weakly fair
        assert!(replay_lasso(&m, prop, &FairnessSet::declared(&m), lasso).is_err());
    }

    #[test]
    fn unsatisfiable_p_holds_vacuously() {
        let m = parse(&format!(
            "{}\nliveness Vacuous {{ timeRemaining < 0 ~> true }}",
            builtin("microwave-v2").unwrap().source
        ))
        .unwrap();
        let prop = m.liveness.iter().find(|l| l.name == "Vacuous").unwrap();
        let r = check_leads_to(&m, prop, &FairnessSet::none()).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Holds);
    }

    #[test]
    fn bounded_buffer_needs_consume_fairness() {
        let m = model("bounded-buffer");
        let prop = &m.liveness[0];
        let fair = FairnessSet::declared(&m);
        let r = check_leads_to(&m, prop, &fair).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Holds);
        let r = check_leads_to(&m, prop, &FairnessSet::none()).unwrap();
        let lasso = r.results[0].verdict.lasso().unwrap();
        assert_eq!(replay_lasso(&m, prop, &FairnessSet::none(), lasso), Ok(()));
    }

    #[test]
    fn cycle_routes_through_fair_action() {
        // x cycles 0 -> 1 -> 0 while flag stays false; WF(Flip) with Flip
        // always enabled forces the cycle to take Flip, which keeps Q false
        let src = "var x : 0..1\nvar flag : bool\ninit { x = 0 && !flag }\n\
                   action Step { x' = 1 - x }\naction Flip { flag' = flag }\n\
                   liveness L { x = 0 ~> flag }\nfairness weak Step, Flip";
        let m = parse(src).unwrap();
        let fair = FairnessSet::declared(&m);
        let r = check_leads_to(&m, &m.liveness[0], &fair).unwrap();
        let lasso = r.results[0].verdict.lasso().unwrap();
        assert!(lasso.cycle.actions.iter().any(|a| a == "Step"));
        assert!(lasso.cycle.actions.iter().any(|a| a == "Flip"));
        assert_eq!(replay_lasso(&m, &m.liveness[0], &fair, lasso), Ok(()));
    }

    #[test]
    fn reflexive_leads_to() {
        let m = parse("var x : 0..1\ninit { x = 0 }\nliveness Now { x = 0 ~> x = 0 }").unwrap();
        let r = check_leads_to(&m, &m.liveness[0], &FairnessSet::none()).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Holds);
    }

    #[test]
    fn fairness_set_names() {
        let m = model("microwave-v2");
        assert_eq!(
            FairnessSet::of(&m, ["Tick", "Tick"])
                .unwrap()
                .actions()
                .len(),
            1
        );
        assert_eq!(FairnessSet::of(&m, ["Tock"]), Err("Tock".to_string()));
    }
}
