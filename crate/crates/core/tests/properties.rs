//! Property tests over randomly generated small models.

mod common;

use std::collections::BTreeSet;

use mcc::examples::BUILTINS;
use mcc::explorer::{
    self, check_graph, deadlock_result, invariant_results, reachable, replay_trace, CheckOptions,
    Label, Verdict,
};
use mcc::kernel::{self, Model};
use mcc::liveness::{leads_to_result, replay_lasso, FairnessSet};
use mcc::parser::{parse, pretty};
use proptest::prelude::*;

/// `(kind, var, other var, literal)`; rendered against the model shape.
type Atom = (u8, usize, usize, i64);
/// `(kind, operand var, literal)` for an effect on one target.
type EffectSpec = (u8, usize, i64);

#[derive(Debug, Clone)]
struct Spec {
    ints: usize,
    k: i64,
    flag: bool,
    init: Vec<(bool, i64, i64)>,
    flag_init: u8,
    actions: Vec<(Vec<Atom>, Vec<Option<EffectSpec>>)>,
    invariant: (Atom, Atom),
    live: (Atom, Atom),
    fair: Vec<bool>,
}

const INT_NAMES: [&str; 3] = ["a", "b", "c"];

impl Spec {
    fn int(&self, i: usize) -> &'static str {
        INT_NAMES[i % self.ints]
    }

    fn lit(&self, l: i64) -> i64 {
        l.rem_euclid(self.k + 1)
    }

    fn atom(&self, (kind, v, w, l): Atom) -> String {
        let (v, w, l) = (self.int(v), self.int(w), self.lit(l));
        match kind % 6 {
            0 => format!("{v} < {l}"),
            1 => format!("{v} = {l}"),
            2 => format!("{v} != {w}"),
            3 if self.flag => "f".to_string(),
            4 if self.flag => "!f".to_string(),
            5 => format!("{v} + {w} >= {l}"),
            _ => format!("{v} >= {l}"),
        }
    }

    fn render(&self) -> String {
        let mut s = format!("const K = {}\n", self.k);
        for name in &INT_NAMES[..self.ints] {
            s += &format!("var {name} : 0..K\n");
        }
        if self.flag {
            s += "var f : bool\n";
        }
        let mut init: Vec<String> = (0..self.ints)
            .map(|i| {
                let (choose, x, y) = self.init[i];
                if choose {
                    format!("{} in {{{}, {}}}", INT_NAMES[i], self.lit(x), self.lit(y))
                } else {
                    format!("{} = {}", INT_NAMES[i], self.lit(x))
                }
            })
            .collect();
        if self.flag {
            match self.flag_init % 3 {
                0 => init.push("f".into()),
                1 => init.push("!f".into()),
                _ => {}
            }
        }
        s += &format!("init {{ {} }}\n", init.join(" && "));
        for (n, (guard, effects)) in self.actions.iter().enumerate() {
            s += &format!("action A{n} {{\n");
            if !guard.is_empty() {
                let g: Vec<String> = guard.iter().map(|a| self.atom(*a)).collect();
                s += &format!("  when {}\n", g.join(" && "));
            }
            for (t, eff) in effects.iter().enumerate() {
                let Some((kind, w, l)) = *eff else { continue };
                if t < self.ints {
                    let v = INT_NAMES[t];
                    let w = self.int(w);
                    let l = self.lit(l);
                    s += &match kind % 4 {
                        0 => format!("  {v}' = if {v} + {l} <= K then {v} + {l} else 0\n"),
                        1 => format!("  {v}' = {w}\n"),
                        2 => format!("  {v}' in {{{l}, K - {l}}}\n"),
                        _ => format!("  {v}' = K - {v}\n"),
                    };
                } else if t == self.ints && self.flag {
                    s += &match kind % 3 {
                        0 => "  f' = !f\n".to_string(),
                        1 => "  f' in {TRUE, FALSE}\n".to_string(),
                        _ => format!("  f' = {} < {}\n", self.int(w), self.lit(l)),
                    };
                }
            }
            s += "}\n";
        }
        s += &format!(
            "invariant Inv {{ {} || {} }}\n",
            self.atom(self.invariant.0),
            self.atom(self.invariant.1)
        );
        s += &format!(
            "liveness Live {{ {} ~> {} }}\n",
            self.atom(self.live.0),
            self.atom(self.live.1)
        );
        let fair: Vec<String> = (0..self.actions.len())
            .filter(|&i| self.fair[i])
            .map(|i| format!("A{i}"))
            .collect();
        if !fair.is_empty() {
            s += &format!("fairness weak {}\n", fair.join(", "));
        }
        s
    }
}

fn atom() -> impl Strategy<Value = Atom> {
    (0u8..7, 0usize..3, 0usize..3, 0i64..4)
}

fn spec() -> impl Strategy<Value = Spec> {
    (
        1usize..=3,
        1i64..=3,
        any::<bool>(),
        prop::collection::vec((any::<bool>(), 0i64..4, 0i64..4), 3),
        0u8..3,
        prop::collection::vec(
            (
                prop::collection::vec(atom(), 0..3),
                prop::collection::vec(prop::option::of((0u8..4, 0usize..3, 0i64..4)), 4),
            ),
            1..5,
        ),
        (atom(), atom()),
        (atom(), atom()),
        prop::collection::vec(any::<bool>(), 4),
    )
        .prop_map(
            |(ints, k, flag, init, flag_init, actions, invariant, live, fair)| Spec {
                ints,
                k,
                flag,
                init,
                flag_init,
                actions,
                invariant,
                live,
                fair,
            },
        )
}

fn build(spec: &Spec) -> Model {
    let text = spec.render();
    parse(&text).unwrap_or_else(|e| panic!("generated model rejected: {e:?}\n{text}"))
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn reachable_set_equals_closure(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        let ours: BTreeSet<_> = g.states().cloned().collect();
        prop_assert_eq!(ours.len(), g.len());
        prop_assert_eq!(ours, common::closure(&m));
    }

    #[test]
    fn bfs_depths_are_minimal(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        let levels = common::levels(&m);
        for (i, s) in g.states().enumerate() {
            prop_assert_eq!(g.depth(i), levels[s]);
        }
        let inv = &m.invariants[0];
        let r = &invariant_results(&g)[0];
        match common::shortest_violation(&m, &inv.expr) {
            None => prop_assert_eq!(&r.verdict, &Verdict::Holds),
            Some(d) => {
                let t = r.verdict.trace().expect("violation trace");
                prop_assert_eq!(t.actions.len(), d);
                prop_assert!(!kernel::holds(&m, &inv.expr, t.last().unwrap()).unwrap());
                for s in &t.states[..t.len() - 1] {
                    prop_assert!(kernel::holds(&m, &inv.expr, s).unwrap());
                }
            }
        }
    }

    #[test]
    fn traces_replay(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        for i in 0..g.len() {
            prop_assert_eq!(replay_trace(&m, &g.trace_to(i)), Ok(()));
        }
        let opts = CheckOptions { deadlock: true, ..CheckOptions::default() };
        let fair = FairnessSet::declared(&m);
        for r in check_graph(&g, &opts).results {
            if let Some(t) = r.verdict.trace() {
                prop_assert_eq!(replay_trace(&m, t), Ok(()));
            }
            if let Some(l) = r.verdict.lasso() {
                prop_assert_eq!(replay_lasso(&m, &m.liveness[0], &fair, l), Ok(()));
            }
        }
    }

    #[test]
    fn frame_rule(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        for e in g.edges() {
            let Label::Action(a) = e.label else { continue };
            let assigned: Vec<usize> = m.actions[a].effects.iter().map(|x| x.target).collect();
            for v in 0..m.vars.len() {
                if !assigned.contains(&v) {
                    prop_assert_eq!(g.state(e.from).get(v), g.state(e.to).get(v));
                }
            }
        }
    }

    #[test]
    fn stuttering_is_neutral_for_safety(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        let closed = g.stutter_closed();
        prop_assert_eq!(invariant_results(&g), invariant_results(&closed));
        prop_assert_eq!(deadlock_result(&g), deadlock_result(&closed));
    }

    #[test]
    fn liveness_matches_lasso_oracle(spec in spec()) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        let prop = &m.liveness[0];
        let fair = FairnessSet::declared(&m);
        let expected = common::leads_to_violated(&m, &prop.p, &prop.q, fair.actions());
        let r = leads_to_result(&g, prop, &fair);
        prop_assert_eq!(matches!(r.verdict, Verdict::Violated(_)), expected, "{}", spec.render());
        if let Some(l) = r.verdict.lasso() {
            prop_assert_eq!(replay_lasso(&m, prop, &fair, l), Ok(()));
        }
    }

    #[test]
    fn more_fairness_never_breaks_liveness(spec in spec(), extra in prop::collection::vec(any::<bool>(), 4)) {
        let m = build(&spec);
        let g = reachable(&m).unwrap();
        let prop = &m.liveness[0];
        let small = FairnessSet::declared(&m);
        let names: Vec<&str> = m.actions.iter().enumerate()
            .filter(|(i, a)| extra[*i] || m.fairness.contains(&a.name))
            .map(|(_, a)| a.name.as_str())
            .collect();
        let large = FairnessSet::of(&m, names).unwrap();
        let none = FairnessSet::none();
        let verdicts: Vec<bool> = [&none, &small, &large]
            .iter()
            .map(|f| leads_to_result(&g, prop, f).verdict == Verdict::Holds)
            .collect();
        prop_assert!(!verdicts[0] || verdicts[1]);
        prop_assert!(!verdicts[1] || verdicts[2]);
    }

    #[test]
    fn pretty_print_round_trips(spec in spec()) {
        let m = build(&spec);
        let again = parse(&pretty(&m)).unwrap();
        prop_assert_eq!(&m, &again);
        prop_assert_eq!(pretty(&m), pretty(&again));
    }

    #[test]
    fn checking_is_deterministic(spec in spec()) {
        let m = build(&spec);
        let opts = CheckOptions { deadlock: true, ..CheckOptions::default() };
        prop_assert_eq!(explorer::check(&m, &opts), explorer::check(&m, &opts));
        let dot = |m: &Model| explorer::export_dot(&reachable(m).unwrap(), None);
        prop_assert_eq!(dot(&m), dot(&m));
    }

    #[test]
    fn parse_never_panics_on_arbitrary_text(text in "\\PC{0,200}") {
        let _ = parse(&text);
    }

    #[test]
    fn parse_never_panics_on_token_soup(words in prop::collection::vec(prop::sample::select(vec![
        "const", "enum", "var", "init", "action", "when", "invariant", "liveness", "fairness",
        "weak", "if", "then", "else", "in", "true", "x", "y", "A", "0", "1", "3", "-", "+",
        "..", ":", "=", "!=", "<", "<=", "&&", "||", "=>", "!", "'", "~>", "{", "}", "(", ")",
        ",", "\n", "\\*",
    ]), 0..60)) {
        let text = words.join(" ");
        if let Err(errors) = parse(&text) {
            prop_assert!(!errors.is_empty());
            prop_assert!(errors.windows(2).all(|w| w[0].span <= w[1].span));
        }
    }
}

#[test]
fn builtins_round_trip_and_match_expectations() {
    for e in BUILTINS {
        let m = parse(e.source).unwrap();
        assert_eq!(parse(&pretty(&m)).unwrap(), m, "{}", e.name);
        let r = explorer::check(&m, &CheckOptions::default()).unwrap();
        for (prop, want) in e.expected() {
            assert_eq!(
                r.result(prop).unwrap().verdict.kind(),
                want,
                "{} {prop}",
                e.name
            );
        }
        assert_eq!(r.results.len(), e.expected().len(), "{}", e.name);
    }
}

#[test]
fn builtins_match_oracles() {
    for e in BUILTINS {
        let m = parse(e.source).unwrap();
        let g = reachable(&m).unwrap();
        let ours: BTreeSet<_> = g.states().cloned().collect();
        assert_eq!(ours, common::closure(&m), "{}", e.name);
        let fair = common::fair_indices(&m);
        for l in &m.liveness {
            let r = leads_to_result(&g, l, &FairnessSet::declared(&m));
            assert_eq!(
                matches!(r.verdict, Verdict::Violated(_)),
                common::leads_to_violated(&m, &l.p, &l.q, &fair),
                "{} {}",
                e.name,
                l.name
            );
        }
    }
}
