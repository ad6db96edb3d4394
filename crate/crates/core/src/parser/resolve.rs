//! Name resolution from the syntax tree to a [`Model`].

use std::collections::HashMap;

use super::syntax::{Item, Name, SynBound, SynDomain, SynEffect, SynExpr, SynKind, SynSet};
use super::{ErrorKind, ParseError, SourceSpan};
use crate::kernel::{
    Action, Bound, Constant, Domain, Effect, EffectRhs, EnumDecl, Expr, Invariant, LeadsTo, Model,
    SetExpr, SourceMap, Value, VarDecl,
};

enum Symbol {
    Var(usize),
    Const(usize),
    Member(Value),
}

struct Scope {
    symbols: HashMap<String, Symbol>,
    consts: HashMap<String, usize>,
    enums: HashMap<String, usize>,
}

/// `missing_init_at` is where to report an absent `init` block; `None`
/// suppresses that error.
pub fn resolve(items: Vec<Item>, missing_init_at: Option<SourceSpan>) -> (Model, Vec<ParseError>) {
    let mut errors = Vec::new();
    let mut map = SourceMap::default();
    let mut constants = Vec::new();
    let mut enums = Vec::new();
    let mut scope = Scope {
        symbols: HashMap::new(),
        consts: HashMap::new(),
        enums: HashMap::new(),
    };

    // constants and enums first so that declarations may appear in any order
    for item in &items {
        match item {
            Item::Const { name, value, .. } => {
                let id = constants.len();
                constants.push(Constant {
                    name: name.text.clone(),
                    value: *value,
                });
                map.consts.push(name.span);
                scope.consts.entry(name.text.clone()).or_insert(id);
                scope
                    .symbols
                    .entry(name.text.clone())
                    .or_insert(Symbol::Const(id));
            }
            Item::Enum { name, members, .. } => {
                let ty = enums.len();
                enums.push(EnumDecl {
                    name: name.text.clone(),
                    members: members.iter().map(|m| m.text.clone()).collect(),
                });
                map.enums.push(name.span);
                scope.enums.entry(name.text.clone()).or_insert(ty);
                for (member, m) in members.iter().enumerate() {
                    scope
                        .symbols
                        .entry(m.text.clone())
                        .or_insert(Symbol::Member(Value::Enum { ty, member }));
                }
            }
            _ => {}
        }
    }

    let mut vars = Vec::new();
    for item in &items {
        if let Item::Var { name, domain, .. } = item {
            let domain = resolve_domain(&scope, domain, &mut errors);
            let id = vars.len();
            vars.push(VarDecl {
                name: name.text.clone(),
                domain,
            });
            map.vars.push(name.span);
            // variables shadow nothing: a clash is reported by validation
            scope
                .symbols
                .entry(name.text.clone())
                .or_insert(Symbol::Var(id));
        }
    }

    let mut init = None;
    let mut actions = Vec::new();
    let mut invariants = Vec::new();
    let mut liveness = Vec::new();
    let mut fairness = Vec::new();
    for item in items {
        match item {
            Item::Init { expr, span } => {
                let e = resolve_expr(&scope, &expr, &mut errors);
                if init.is_some() {
                    errors.push(ParseError::new(
                        span,
                        ErrorKind::Syntactic,
                        "duplicate `init` block".to_string(),
                    ));
                } else {
                    init = Some(e);
                    map.init = Some(span);
                }
            }
            Item::Action {
                name,
                guard,
                effects,
                ..
            } => {
                let guard = guard
                    .map(|g| resolve_expr(&scope, &g, &mut errors))
                    .unwrap_or_else(Expr::tt);
                let effects = effects
                    .into_iter()
                    .filter_map(|eff| resolve_effect(&scope, eff, &mut errors))
                    .collect();
                actions.push(Action {
                    name: name.text,
                    guard,
                    effects,
                });
                map.actions.push(name.span);
            }
            Item::Invariant { name, expr, .. } => {
                invariants.push(Invariant {
                    name: name.text,
                    expr: resolve_expr(&scope, &expr, &mut errors),
                });
                map.invariants.push(name.span);
            }
            Item::Liveness { name, p, q, .. } => {
                liveness.push(LeadsTo {
                    name: name.text,
                    p: resolve_expr(&scope, &p, &mut errors),
                    q: resolve_expr(&scope, &q, &mut errors),
                });
                map.liveness.push(name.span);
            }
            Item::Fairness { names, .. } => {
                for n in names {
                    fairness.push(n.text);
                    map.fairness.push(n.span);
                }
            }
            Item::Const { .. } | Item::Enum { .. } | Item::Var { .. } => {}
        }
    }

    let init = init.unwrap_or_else(|| {
        if let Some(span) = missing_init_at {
            errors.push(ParseError::new(
                span,
                ErrorKind::Syntactic,
                "missing `init { ... }` block".to_string(),
            ));
        }
        Expr::tt()
    });

    let model = Model {
        constants,
        enums,
        vars,
        init,
        actions,
        invariants,
        liveness,
        fairness,
        source_map: map,
    };
    (model, errors)
}

fn resolve_domain(scope: &Scope, d: &SynDomain, errors: &mut Vec<ParseError>) -> Domain {
    match d {
        SynDomain::Named(n) => match n.text.as_str() {
            "bool" | "BOOLEAN" => Domain::Bool,
            other => match scope.enums.get(other) {
                Some(&e) => Domain::Enum(e),
                None => {
                    errors.push(unknown(n, "type"));
                    Domain::Bool
                }
            },
        },
        SynDomain::Range(lo, hi) => Domain::Range {
            lo: resolve_bound(scope, lo, errors),
            hi: resolve_bound(scope, hi, errors),
        },
    }
}

fn resolve_bound(scope: &Scope, b: &SynBound, errors: &mut Vec<ParseError>) -> Bound {
    match b {
        SynBound::Int(i) => Bound::Lit(*i),
        SynBound::Name(n) => match scope.consts.get(&n.text) {
            Some(&c) => Bound::Const(c),
            None => {
                errors.push(unknown(n, "constant"));
                Bound::Lit(0)
            }
        },
    }
}

fn resolve_effect(scope: &Scope, eff: SynEffect, errors: &mut Vec<ParseError>) -> Option<Effect> {
    let (target, rhs) = match eff {
        SynEffect::Assign(t, e) => (t, EffectRhs::Assign(resolve_expr(scope, &e, errors))),
        SynEffect::Choose(t, s) => (t, EffectRhs::Choose(resolve_set(scope, &s, errors))),
    };
    match scope.symbols.get(&target.text) {
        Some(Symbol::Var(id)) => Some(Effect { target: *id, rhs }),
        _ => {
            errors.push(unknown(&target, "variable"));
            None
        }
    }
}

fn resolve_set(scope: &Scope, s: &SynSet, errors: &mut Vec<ParseError>) -> SetExpr {
    match s {
        SynSet::List(items) => SetExpr::List(
            items
                .iter()
                .map(|e| resolve_expr(scope, e, errors))
                .collect(),
        ),
        SynSet::Range(lo, hi) => SetExpr::Range(
            Box::new(resolve_expr(scope, lo, errors)),
            Box::new(resolve_expr(scope, hi, errors)),
        ),
    }
}

fn resolve_expr(scope: &Scope, e: &SynExpr, errors: &mut Vec<ParseError>) -> Expr {
    let rec = |x: &SynExpr, errors: &mut Vec<ParseError>| Box::new(resolve_expr(scope, x, errors));
    match &e.kind {
        SynKind::Bool(b) => Expr::Lit(Value::Bool(*b)),
        SynKind::Int(i) => Expr::Lit(Value::Int(*i)),
        SynKind::Name { name, primed } => match (scope.symbols.get(name), primed) {
            (Some(Symbol::Var(id)), _) => Expr::Var {
                id: *id,
                primed: *primed,
            },
            (Some(_), true) => {
                errors.push(ParseError::new(
                    e.span,
                    ErrorKind::NameResolution,
                    format!("`{name}` is not a variable and cannot be primed"),
                ));
                Expr::tt()
            }
            (Some(Symbol::Const(c)), false) => Expr::Const(*c),
            (Some(Symbol::Member(v)), false) => Expr::Lit(*v),
            (None, _) => {
                errors.push(ParseError::new(
                    e.span,
                    ErrorKind::NameResolution,
                    format!("unknown identifier `{name}`"),
                ));
                Expr::tt()
            }
        },
        SynKind::Not(a) => Expr::Not(rec(a, errors)),
        SynKind::Neg(a) => Expr::Neg(rec(a, errors)),
        SynKind::Binary(op, a, b) => Expr::Binary(*op, rec(a, errors), rec(b, errors)),
        SynKind::In(a, s) => Expr::In(rec(a, errors), resolve_set(scope, s, errors)),
        SynKind::If(c, a, b) => Expr::If(rec(c, errors), rec(a, errors), rec(b, errors)),
    }
}

fn unknown(n: &Name, what: &str) -> ParseError {
    ParseError::new(
        n.span,
        ErrorKind::NameResolution,
        format!("unknown {what} `{}`", n.text),
    )
}
