//! Evaluation of expressions and the step relation of a model.

use thiserror::Error;

use super::model::{Action, BinOp, EffectRhs, Expr, Model, SetExpr, State, Value};

/// Domain products larger than this are not enumerated for initial states.
pub const MAX_INIT_PRODUCT: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("primed variable `{0}` used without a next state")]
    MissingNext(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("integer overflow")]
    Overflow,
    #[error("reference to undeclared variable or constant #{0}")]
    Dangling(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("action {action} assigns {var}' = {value}, outside the domain of {var}")]
    RangeViolation {
        action: String,
        var: String,
        value: String,
        state: State,
    },
    #[error("action {action}: {source}")]
    Eval {
        action: String,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("no state satisfies the initial predicate")]
    EmptyInit,
    #[error("domain product has {0} assignments, too many to enumerate initial states")]
    TooLarge(u128),
    #[error("initial predicate: {0}")]
    Eval(#[from] EvalError),
}

/// Evaluates `expr` at `current`; primed variables read from `next`.
pub fn eval(
    model: &Model,
    expr: &Expr,
    current: &[Value],
    next: Option<&[Value]>,
) -> Result<Value, EvalError> {
    Evaluator {
        model,
        current,
        next,
    }
    .eval(expr)
}

/// Evaluates a predicate, requiring a boolean result.
pub fn holds(model: &Model, expr: &Expr, s: &State) -> Result<bool, EvalError> {
    let v = eval(model, expr, s.values(), None)?;
    v.as_bool()
        .ok_or_else(|| EvalError::TypeMismatch("predicate is not boolean".into()))
}

pub fn enabled(model: &Model, action: &Action, s: &State) -> Result<bool, EvalError> {
    holds(model, &action.guard, s)
}

/// All successors of `s` under `action`, assuming it is enabled.
///
/// Effects are applied in written order against a working copy of `s`, so a
/// primed reference on a right-hand side sees earlier assignments and the
/// frame value for everything else. Duplicates are dropped, keeping the
/// first occurrence.
pub fn apply(model: &Model, action: &Action, s: &State) -> Result<Vec<State>, StepError> {
    let mut out = Vec::new();
    let mut work = s.values().to_vec();
    expand(model, action, s, 0, &mut work, &mut out)?;
    Ok(out)
}

fn expand(
    model: &Model,
    action: &Action,
    s: &State,
    idx: usize,
    work: &mut Vec<Value>,
    out: &mut Vec<State>,
) -> Result<(), StepError> {
    let Some(effect) = action.effects.get(idx) else {
        let st = State::new(work.clone());
        if !out.contains(&st) {
            out.push(st);
        }
        return Ok(());
    };
    let eval_err = |source| StepError::Eval {
        action: action.name.clone(),
        source,
    };
    let choices = match &effect.rhs {
        EffectRhs::Assign(e) => vec![eval(model, e, s.values(), Some(work)).map_err(eval_err)?],
        EffectRhs::Choose(set) => eval_set(model, set, s.values(), Some(work)).map_err(eval_err)?,
    };
    let saved = work[effect.target];
    for v in choices {
        if !model.in_domain(effect.target, v) {
            return Err(StepError::RangeViolation {
                action: action.name.clone(),
                var: model.vars[effect.target].name.clone(),
                value: model.display_value(v).to_string(),
                state: s.clone(),
            });
        }
        work[effect.target] = v;
        expand(model, action, s, idx + 1, work, out)?;
    }
    work[effect.target] = saved;
    Ok(())
}

/// Members of a set expression in written order (ranges ascending),
/// without duplicates.
pub fn eval_set(
    model: &Model,
    set: &SetExpr,
    current: &[Value],
    next: Option<&[Value]>,
) -> Result<Vec<Value>, EvalError> {
    Evaluator {
        model,
        current,
        next,
    }
    .set(set)
}

/// All states of the domain product satisfying `init`, first variable most
/// significant.
pub fn initial_states(model: &Model) -> Result<Vec<State>, InitError> {
    let size = model.state_space_size().unwrap_or(u128::MAX);
    if size > MAX_INIT_PRODUCT {
        return Err(InitError::TooLarge(size));
    }
    let mut out = Vec::new();
    for_each_assignment(model, |values| {
        let v = eval(model, &model.init, values, None)?;
        match v {
            Value::Bool(true) => out.push(State::new(values.to_vec())),
            Value::Bool(false) => {}
            _ => return Err(EvalError::TypeMismatch("init is not boolean".into())),
        }
        Ok(())
    })?;
    if out.is_empty() {
        return Err(InitError::EmptyInit);
    }
    Ok(out)
}

/// Calls `f` on every assignment of the domain product in canonical order.
pub fn for_each_assignment<E>(
    model: &Model,
    mut f: impl FnMut(&[Value]) -> Result<(), E>,
) -> Result<(), E> {
    let domains: Vec<Vec<Value>> = (0..model.vars.len())
        .map(|v| model.domain_values(v))
        .collect();
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(());
    }
    let mut digits = vec![0usize; domains.len()];
    let mut values: Vec<Value> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&values)?;
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < domains[pos].len() {
                values[pos] = domains[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            values[pos] = domains[pos][0];
        }
    }
}

struct Evaluator<'a> {
    model: &'a Model,
    current: &'a [Value],
    next: Option<&'a [Value]>,
}

impl Evaluator<'_> {
    fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Lit(v) => Ok(*v),
            Expr::Const(c) => self
                .model
                .constants
                .get(*c)
                .map(|c| Value::Int(c.value))
                .ok_or(EvalError::Dangling(*c)),
            Expr::Var { id, primed: false } => self
                .current
                .get(*id)
                .copied()
                .ok_or(EvalError::Dangling(*id)),
            Expr::Var { id, primed: true } => {
                let next = self.next.ok_or_else(|| {
                    EvalError::MissingNext(
                        self.model
                            .vars
                            .get(*id)
                            .map_or_else(|| format!("#{id}"), |v| v.name.clone()),
                    )
                })?;
                next.get(*id).copied().ok_or(EvalError::Dangling(*id))
            }
            Expr::Not(a) => Ok(Value::Bool(!self.bool(a)?)),
            Expr::Neg(a) => self
                .int(a)?
                .checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow),
            Expr::Binary(op, a, b) => self.binary(*op, a, b),
            Expr::In(x, set) => {
                let v = self.eval(x)?;
                let hit = match set {
                    SetExpr::List(items) => {
                        let mut hit = false;
                        for item in items {
                            if self.eval(item)? == v {
                                hit = true;
                                break;
                            }
                        }
                        hit
                    }
                    SetExpr::Range(lo, hi) => {
                        let i = v.as_int().ok_or_else(|| {
                            EvalError::TypeMismatch("range membership of non-integer".into())
                        })?;
                        self.int(lo)? <= i && i <= self.int(hi)?
                    }
                };
                Ok(Value::Bool(hit))
            }
            Expr::If(c, a, b) => {
                if self.bool(c)? {
                    self.eval(a)
                } else {
                    self.eval(b)
                }
            }
        }
    }

    fn bool(&self, e: &Expr) -> Result<bool, EvalError> {
        self.eval(e)?
            .as_bool()
            .ok_or_else(|| EvalError::TypeMismatch("expected a boolean".into()))
    }

    fn int(&self, e: &Expr) -> Result<i64, EvalError> {
        self.eval(e)?
            .as_int()
            .ok_or_else(|| EvalError::TypeMismatch("expected an integer".into()))
    }

    fn binary(&self, op: BinOp, a: &Expr, b: &Expr) -> Result<Value, EvalError> {
        let v = match op {
            BinOp::And => Value::Bool(self.bool(a)? && self.bool(b)?),
            BinOp::Or => Value::Bool(self.bool(a)? || self.bool(b)?),
            BinOp::Implies => Value::Bool(!self.bool(a)? || self.bool(b)?),
            BinOp::Eq | BinOp::Ne => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                if x.ty() != y.ty() {
                    return Err(EvalError::TypeMismatch(
                        "comparison between different types".into(),
                    ));
                }
                Value::Bool((x == y) == (op == BinOp::Eq))
            }
            BinOp::Lt => Value::Bool(self.int(a)? < self.int(b)?),
            BinOp::Le => Value::Bool(self.int(a)? <= self.int(b)?),
            BinOp::Gt => Value::Bool(self.int(a)? > self.int(b)?),
            BinOp::Ge => Value::Bool(self.int(a)? >= self.int(b)?),
            BinOp::Add => Value::Int(
                self.int(a)?
                    .checked_add(self.int(b)?)
                    .ok_or(EvalError::Overflow)?,
            ),
            BinOp::Sub => Value::Int(
                self.int(a)?
                    .checked_sub(self.int(b)?)
                    .ok_or(EvalError::Overflow)?,
            ),
        };
        Ok(v)
    }

    fn set(&self, set: &SetExpr) -> Result<Vec<Value>, EvalError> {
        match set {
            SetExpr::List(items) => {
                let mut out: Vec<Value> = Vec::with_capacity(items.len());
                for item in items {
                    let v = self.eval(item)?;
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
                Ok(out)
            }
            SetExpr::Range(lo, hi) => {
                let (lo, hi) = (self.int(lo)?, self.int(hi)?);
                Ok((lo..=hi).map(Value::Int).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::builtin;
    use crate::parser::parse;

    fn mw(name: &str) -> Model {
        parse(builtin(name).unwrap().source).unwrap()
    }

    fn st(m: &Model, door: &str, rad: &str, t: i64) -> State {
        State::new(vec![
            m.member(door).unwrap(),
            m.member(rad).unwrap(),
            Value::Int(t),
        ])
    }

    #[test]
    fn door_safety_evaluation() {
        let m = mw("microwave-v2");
        let inv = &m.invariants[0].expr;
        assert!(holds(&m, inv, &st(&m, "OPEN", "OFF", 3)).unwrap());
        assert!(!holds(&m, inv, &st(&m, "OPEN", "ON", 3)).unwrap());
    }

    #[test]
    fn conditional_folds() {
        let m = mw("microwave-v2");
        let off = m.member("OFF").unwrap();
        let on = m.member("ON").unwrap();
        let e = Expr::If(
            Box::new(Expr::bin(
                BinOp::Eq,
                Expr::bin(BinOp::Sub, Expr::int(1), Expr::int(1)),
                Expr::int(0),
            )),
            Box::new(Expr::Lit(off)),
            Box::new(Expr::Lit(on)),
        );
        assert_eq!(eval(&m, &e, &[], None).unwrap(), off);
    }

    #[test]
    fn primed_without_next_is_an_error() {
        let m = mw("microwave-v2");
        let s = st(&m, "OPEN", "OFF", 0);
        let e = Expr::bin(BinOp::Eq, Expr::primed(1), Expr::var(1));
        assert!(matches!(
            eval(&m, &e, s.values(), None),
            Err(EvalError::MissingNext(v)) if v == "radiation"
        ));
        assert_eq!(
            eval(&m, &e, s.values(), Some(s.values())).unwrap(),
            Value::Bool(true)
        );
    }

    #[test]
    fn intermediate_arithmetic_is_unbounded() {
        let m = mw("microwave-v2");
        let s = st(&m, "OPEN", "OFF", 0);
        // 0 - 5 lies outside 0..MAXTIME but is only an intermediate value
        let e = Expr::bin(
            BinOp::Lt,
            Expr::bin(BinOp::Sub, Expr::var(2), Expr::int(5)),
            Expr::int(0),
        );
        assert_eq!(eval(&m, &e, s.values(), None).unwrap(), Value::Bool(true));
    }

    #[test]
    fn tick_enabledness_and_effects() {
        let m = mw("microwave-v2");
        let tick = m.action("Tick").unwrap();
        assert!(enabled(&m, tick, &st(&m, "CLOSED", "ON", 1)).unwrap());
        assert!(!enabled(&m, tick, &st(&m, "CLOSED", "OFF", 1)).unwrap());
        assert_eq!(
            apply(&m, tick, &st(&m, "CLOSED", "ON", 1)).unwrap(),
            vec![st(&m, "CLOSED", "OFF", 0)]
        );
        assert_eq!(
            apply(&m, tick, &st(&m, "CLOSED", "ON", 2)).unwrap(),
            vec![st(&m, "CLOSED", "ON", 1)]
        );
    }

    #[test]
    fn refined_actions() {
        let m = mw("microwave-v2");
        let start = m.action("Start").unwrap();
        assert!(!enabled(&m, start, &st(&m, "OPEN", "OFF", 3)).unwrap());
        let open = m.action("OpenDoor").unwrap();
        assert_eq!(
            apply(&m, open, &st(&m, "CLOSED", "ON", 3)).unwrap(),
            vec![st(&m, "OPEN", "OFF", 3)]
        );
    }

    #[test]
    fn microwave_initial_states() {
        let m = mw("microwave-v2");
        assert_eq!(
            initial_states(&m).unwrap(),
            vec![st(&m, "OPEN", "OFF", 0), st(&m, "CLOSED", "OFF", 0)]
        );
    }

    #[test]
    fn small_initial_states() {
        let m = parse("var x : 0..3\ninit { x = 0 }").unwrap();
        assert_eq!(
            initial_states(&m).unwrap(),
            vec![State::new(vec![Value::Int(0)])]
        );
        let m = parse("var x : 0..3\ninit { false }").unwrap();
        assert_eq!(initial_states(&m), Err(InitError::EmptyInit));
    }

    #[test]
    fn range_violation_names_action_and_state() {
        let m = parse("var x : 0..1\ninit { x = 1 }\naction Up { x' = x + 1 }").unwrap();
        let s = State::new(vec![Value::Int(1)]);
        let err = apply(&m, &m.actions[0], &s).unwrap_err();
        match err {
            StepError::RangeViolation {
                action,
                var,
                value,
                state,
            } => {
                assert_eq!(
                    (action.as_str(), var.as_str(), value.as_str()),
                    ("Up", "x", "2")
                );
                assert_eq!(state, s);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn membership_effects_enumerate_in_written_order() {
        let m = parse(
            "enum C { R, G, B }\nvar c : C\nvar n : 0..3\ninit { c = R && n = 0 }\n\
             action Pick { c' in {B, R, B} n' in 1..2 }",
        )
        .unwrap();
        let s = initial_states(&m).unwrap().remove(0);
        let succ = apply(&m, &m.actions[0], &s).unwrap();
        let shown: Vec<String> = succ.iter().map(|s| m.state_tuple(s)).collect();
        assert_eq!(shown, ["(B,1)", "(B,2)", "(R,1)", "(R,2)"]);
    }

    #[test]
    fn primed_rhs_sees_earlier_assignment() {
        let m = parse(
            "var a : 0..3\nvar b : 0..3\ninit { a = 0 && b = 0 }\n\
             action Go { a' in 1..2 b' = a' + 1 }",
        )
        .unwrap();
        let s = initial_states(&m).unwrap().remove(0);
        let succ = apply(&m, &m.actions[0], &s).unwrap();
        let shown: Vec<String> = succ.iter().map(|s| m.state_tuple(s)).collect();
        assert_eq!(shown, ["(1,2)", "(2,3)"]);
    }
}
