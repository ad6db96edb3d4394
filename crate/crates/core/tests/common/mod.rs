//! Reference implementations used to cross-check the checker. They share
//! only expression evaluation and the step relation with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mcc::examples::builtin;
use mcc::kernel::{self, Expr, Model, State};
use mcc::parser::parse;

pub fn model(name: &str) -> Model {
    parse(builtin(name).unwrap().source).unwrap()
}

pub fn without_fairness(name: &str) -> Model {
    let mut m = model(name);
    m.fairness.clear();
    m
}

/// Every assignment of the domain product, last variable fastest.
pub fn all_assignments(m: &Model) -> Vec<State> {
    let mut out = vec![Vec::new()];
    for v in 0..m.vars.len() {
        let dom = m.domain_values(v);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                dom.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(State::new).collect()
}

/// `(action index, successor)` pairs of `s`.
pub fn successors(m: &Model, s: &State) -> Vec<(usize, State)> {
    let mut out = Vec::new();
    for (i, a) in m.actions.iter().enumerate() {
        if kernel::enabled(m, a, s).unwrap() {
            for t in kernel::apply(m, a, s).unwrap() {
                out.push((i, t));
            }
        }
    }
    out
}

pub fn init_states(m: &Model) -> BTreeSet<State> {
    all_assignments(m)
        .into_iter()
        .filter(|s| kernel::holds(m, &m.init, s).unwrap())
        .collect()
}

/// Fixpoint closure: saturate the initial set under the step relation.
pub fn closure(m: &Model) -> BTreeSet<State> {
    let mut set = init_states(m);
    loop {
        let mut grown = set.clone();
        for s in &set {
            grown.extend(successors(m, s).into_iter().map(|(_, t)| t));
        }
        if grown.len() == set.len() {
            return set;
        }
        set = grown;
    }
}

/// Distance of every reachable state from the initial set, by level sets.
pub fn levels(m: &Model) -> BTreeMap<State, usize> {
    let mut dist = BTreeMap::new();
    let mut frontier = init_states(m);
    let mut k = 0;
    while !frontier.is_empty() {
        for s in &frontier {
            dist.insert(s.clone(), k);
        }
        let mut next = BTreeSet::new();
        for s in &frontier {
            for (_, t) in successors(m, s) {
                if !dist.contains_key(&t) {
                    next.insert(t);
                }
            }
        }
        frontier = next;
        k += 1;
    }
    dist
}

/// Length (in transitions) of the shortest path to a state violating `inv`.
pub fn shortest_violation(m: &Model, inv: &Expr) -> Option<usize> {
    levels(m)
        .into_iter()
        .filter(|(s, _)| !kernel::holds(m, inv, s).unwrap())
        .map(|(_, d)| d)
        .min()
}

/// Whether `p ~> q` fails under weak fairness of `fair` (action indices).
///
/// A counterexample is a reachable `p && !q` state from which a `!q` path
/// leads to a state `e` lying on a fair `!q` cycle. Fair cycles through `e`
/// are found by searching the product of states with the set of fairness
/// obligations met so far: a fair cycle exists iff `(e, all met)` is
/// reachable from `(e, met at e)` inside `!q`. Stuttering is always allowed.
pub fn leads_to_violated(m: &Model, p: &Expr, q: &Expr, fair: &[usize]) -> bool {
    let reach = closure(m);
    let holds = |e: &Expr, s: &State| kernel::holds(m, e, s).unwrap();
    let not_q: BTreeSet<State> = reach.iter().filter(|s| !holds(q, s)).cloned().collect();
    let disabled_mask = |s: &State| -> u32 {
        fair.iter()
            .enumerate()
            .filter(|(_, &a)| !kernel::enabled(m, &m.actions[a], s).unwrap())
            .fold(0, |acc, (k, _)| acc | 1 << k)
    };
    let taken_mask = |a: usize| -> u32 {
        fair.iter()
            .enumerate()
            .filter(|(_, &f)| f == a)
            .fold(0, |acc, (k, _)| acc | 1 << k)
    };
    let full: u32 = (1u32 << fair.len()) - 1;

    let on_fair_cycle = |e: &State| -> bool {
        let start = (e.clone(), disabled_mask(e));
        let mut seen = BTreeSet::from([start.clone()]);
        let mut stack = vec![start];
        while let Some((s, mask)) = stack.pop() {
            if s == *e && mask == full {
                return true;
            }
            let mut next: Vec<(State, u32)> = vec![(s.clone(), mask)];
            for (a, t) in successors(m, &s) {
                if not_q.contains(&t) {
                    let mk = mask | taken_mask(a) | disabled_mask(&t);
                    next.push((t, mk));
                }
            }
            for n in next {
                if seen.insert(n.clone()) {
                    stack.push(n);
                }
            }
        }
        false
    };

    let fair_entries: BTreeSet<&State> = not_q.iter().filter(|e| on_fair_cycle(e)).collect();
    // forward !q reachability from every p && !q state
    for s in not_q.iter().filter(|s| holds(p, s)) {
        let mut seen = BTreeSet::from([s.clone()]);
        let mut stack = vec![s.clone()];
        while let Some(u) = stack.pop() {
            if fair_entries.contains(&u) {
                return true;
            }
            for (_, t) in successors(m, &u) {
                if not_q.contains(&t) && seen.insert(t.clone()) {
                    stack.push(t);
                }
            }
        }
    }
    false
}

pub fn fair_indices(m: &Model) -> Vec<usize> {
    m.fairness.iter().map(|n| m.action_id(n).unwrap()).collect()
}
