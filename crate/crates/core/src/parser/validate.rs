//! Static checks that every [`Model`] handed to the checker must pass.

use std::collections::{HashMap, HashSet};

use super::pretty::expr_to_string;
use super::{ErrorKind, ParseError, SourceSpan};
use crate::kernel::{BinOp, Bound, Domain, EffectRhs, Expr, Model, SetExpr, Type, Value, VarId};

/// Reserved trace label for stuttering steps.
pub const STUTTER: &str = "stutter";

/// Checks typing, name uniqueness, fairness references and the rule that
/// primed variables only appear on effect right-hand sides.
pub fn validate(model: &Model) -> Result<(), Vec<ParseError>> {
    let mut v = Validator {
        model,
        errors: Vec::new(),
    };
    v.run();
    let mut errors = v.errors;
    if errors.is_empty() {
        return Ok(());
    }
    errors.sort_by_key(|e| (e.span.line, e.span.column));
    errors.dedup();
    Err(errors)
}

struct Validator<'a> {
    model: &'a Model,
    errors: Vec<ParseError>,
}

fn span_at(spans: &[SourceSpan], i: usize) -> SourceSpan {
    spans.get(i).copied().unwrap_or_default()
}

/// Where primed variables may occur.
enum Primes<'a> {
    Forbidden,
    /// Effect right-hand side; only these variables may be primed.
    Allowed(&'a HashSet<VarId>),
}

impl Validator<'_> {
    fn err(&mut self, span: SourceSpan, kind: ErrorKind, message: String) {
        self.errors.push(ParseError::new(span, kind, message));
    }

    fn run(&mut self) {
        let m = self.model;
        let map = &m.source_map;

        // one namespace for constants, enum members and variables
        let mut values: HashMap<&str, &'static str> = HashMap::new();
        for (i, c) in m.constants.iter().enumerate() {
            self.claim(&mut values, &c.name, "constant", span_at(&map.consts, i));
        }
        let mut enum_names = HashSet::new();
        for (i, e) in m.enums.iter().enumerate() {
            let span = span_at(&map.enums, i);
            if !enum_names.insert(e.name.as_str()) || matches!(e.name.as_str(), "bool" | "BOOLEAN")
            {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("type `{}` is declared more than once", e.name),
                );
            }
            if e.members.is_empty() {
                self.err(
                    span,
                    ErrorKind::Type,
                    format!("enum `{}` has no members", e.name),
                );
            }
            for member in &e.members {
                self.claim(&mut values, member, "enum member", span);
            }
        }
        for (i, var) in m.vars.iter().enumerate() {
            let span = span_at(&map.vars, i);
            self.claim(&mut values, &var.name, "variable", span);
            self.check_domain(i, span);
        }
        if m.state_space_size().is_none() {
            self.err(
                SourceSpan::default(),
                ErrorKind::Type,
                "the state space is too large to represent".to_string(),
            );
        }

        let init_span = map.init.unwrap_or_default();
        self.predicate(&m.init, init_span, "the initial predicate");

        let mut action_names = HashSet::new();
        for (i, a) in m.actions.iter().enumerate() {
            let span = span_at(&map.actions, i);
            if a.name == STUTTER {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("`{STUTTER}` is reserved for stuttering steps"),
                );
            }
            if !action_names.insert(a.name.as_str()) {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("action `{}` is declared more than once", a.name),
                );
            }
            self.predicate(&a.guard, span, &format!("the guard of `{}`", a.name));

            let mut assigned = HashSet::new();
            for (k, eff) in a.effects.iter().enumerate() {
                if eff.target >= m.vars.len() {
                    self.err(
                        span,
                        ErrorKind::NameResolution,
                        format!("effect in `{}` targets an undeclared variable", a.name),
                    );
                    continue;
                }
                let target = m.vars[eff.target].name.as_str();
                if !assigned.insert(eff.target) {
                    self.err(
                        span,
                        ErrorKind::Type,
                        format!("`{target}'` is assigned more than once in `{}`", a.name),
                    );
                }
                // primed reads are allowed for earlier targets and untouched variables
                let later: HashSet<VarId> = a.effects[k..].iter().map(|e| e.target).collect();
                let allowed: HashSet<VarId> =
                    (0..m.vars.len()).filter(|v| !later.contains(v)).collect();
                let want = m.var_type(eff.target);
                let ctx = format!("the effect on `{target}'` in `{}`", a.name);
                match &eff.rhs {
                    EffectRhs::Assign(e) => {
                        self.primes(e, span, &Primes::Allowed(&allowed), &ctx);
                        if let Some(t) = self.type_of(e, span) {
                            if t != want {
                                self.mismatch(span, &ctx, want, t, e);
                            }
                        }
                    }
                    EffectRhs::Choose(s) => {
                        self.set_primes(s, span, &Primes::Allowed(&allowed), &ctx);
                        if let Some(t) = self.set_type(s, span) {
                            if t != want {
                                self.err(
                                    span,
                                    ErrorKind::Type,
                                    format!(
                                        "{ctx}: set elements are {} but `{target}` is {}",
                                        self.type_name(t),
                                        self.type_name(want)
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }

        let mut property_names = HashSet::new();
        for (i, inv) in m.invariants.iter().enumerate() {
            let span = span_at(&map.invariants, i);
            if !property_names.insert(inv.name.as_str()) {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("property `{}` is declared more than once", inv.name),
                );
            }
            self.predicate(&inv.expr, span, &format!("invariant `{}`", inv.name));
        }
        for (i, l) in m.liveness.iter().enumerate() {
            let span = span_at(&map.liveness, i);
            if !property_names.insert(l.name.as_str()) {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("property `{}` is declared more than once", l.name),
                );
            }
            self.predicate(&l.p, span, &format!("the left side of `{}`", l.name));
            self.predicate(&l.q, span, &format!("the right side of `{}`", l.name));
        }

        let mut fair = HashSet::new();
        for (i, name) in m.fairness.iter().enumerate() {
            let span = span_at(&map.fairness, i);
            if m.action(name).is_none() {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("fairness refers to undeclared action `{name}`"),
                );
            } else if !fair.insert(name.as_str()) {
                self.err(
                    span,
                    ErrorKind::NameResolution,
                    format!("action `{name}` is listed under fairness more than once"),
                );
            }
        }
    }

    fn claim<'m>(
        &mut self,
        values: &mut HashMap<&'m str, &'static str>,
        name: &'m str,
        what: &'static str,
        span: SourceSpan,
    ) {
        if let Some(prev) = values.insert(name, what) {
            self.err(
                span,
                ErrorKind::NameResolution,
                format!("`{name}` is already declared as a {prev}"),
            );
        }
    }

    fn check_domain(&mut self, var: usize, span: SourceSpan) {
        let m = self.model;
        let name = &m.vars[var].name;
        match m.vars[var].domain {
            Domain::Bool => {}
            Domain::Enum(e) => {
                if e >= m.enums.len() {
                    self.err(
                        span,
                        ErrorKind::NameResolution,
                        format!("`{name}` has an undeclared enum type"),
                    );
                }
            }
            Domain::Range { lo, hi } => {
                for b in [lo, hi] {
                    if let Bound::Const(c) = b {
                        if c >= m.constants.len() {
                            self.err(
                                span,
                                ErrorKind::NameResolution,
                                format!("range of `{name}` uses an undeclared constant"),
                            );
                            return;
                        }
                    }
                }
                let (lo, hi) = (m.bound_value(lo), m.bound_value(hi));
                if lo > hi {
                    self.err(
                        span,
                        ErrorKind::Type,
                        format!("range {lo}..{hi} of `{name}` is empty"),
                    );
                }
            }
        }
    }

    /// A boolean state predicate without primes.
    fn predicate(&mut self, e: &Expr, span: SourceSpan, ctx: &str) {
        self.primes(e, span, &Primes::Forbidden, ctx);
        if let Some(t) = self.type_of(e, span) {
            if t != Type::Bool {
                self.mismatch(span, ctx, Type::Bool, t, e);
            }
        }
    }

    fn mismatch(&mut self, span: SourceSpan, ctx: &str, want: Type, got: Type, e: &Expr) {
        let msg = format!(
            "{ctx}: expected {}, found {} in `{}`",
            self.type_name(want),
            self.type_name(got),
            expr_to_string(self.model, e)
        );
        self.err(span, ErrorKind::Type, msg);
    }

    fn primes(&mut self, e: &Expr, span: SourceSpan, rule: &Primes, ctx: &str) {
        let mut found = Vec::new();
        e.primed_vars(&mut found);
        self.report_primes(found, span, rule, ctx);
    }

    fn set_primes(&mut self, s: &SetExpr, span: SourceSpan, rule: &Primes, ctx: &str) {
        let mut found = Vec::new();
        match s {
            SetExpr::List(items) => items.iter().for_each(|e| e.primed_vars(&mut found)),
            SetExpr::Range(lo, hi) => {
                lo.primed_vars(&mut found);
                hi.primed_vars(&mut found);
            }
        }
        self.report_primes(found, span, rule, ctx);
    }

    fn report_primes(&mut self, found: Vec<VarId>, span: SourceSpan, rule: &Primes, ctx: &str) {
        for id in found {
            let name = self
                .model
                .vars
                .get(id)
                .map_or_else(|| format!("#{id}"), |v| v.name.clone());
            match rule {
                Primes::Forbidden => self.err(
                    span,
                    ErrorKind::Type,
                    format!("primed variable `{name}'` is not allowed in {ctx}"),
                ),
                Primes::Allowed(ok) if !ok.contains(&id) => self.err(
                    span,
                    ErrorKind::Type,
                    format!(
                        "{ctx}: `{name}'` is read before it is assigned; \
                         only earlier effects or unassigned variables may be primed"
                    ),
                ),
                Primes::Allowed(_) => {}
            }
        }
    }

    fn type_name(&self, t: Type) -> String {
        match t {
            Type::Bool => "a boolean".to_string(),
            Type::Int => "an integer".to_string(),
            Type::Enum(e) => match self.model.enums.get(e) {
                Some(d) => format!("a {}", d.name),
                None => "an undeclared enum".to_string(),
            },
        }
    }

    /// Infers the type of `e`, reporting the first mismatch inside it.
    fn type_of(&mut self, e: &Expr, span: SourceSpan) -> Option<Type> {
        let m = self.model;
        match e {
            Expr::Lit(v) => {
                if let Value::Enum { ty, member } = v {
                    if m.enums.get(*ty).is_none_or(|d| *member >= d.members.len()) {
                        self.err(span, ErrorKind::Type, "undeclared enum value".to_string());
                        return None;
                    }
                }
                Some(v.ty())
            }
            Expr::Const(c) => {
                if *c >= m.constants.len() {
                    self.err(
                        span,
                        ErrorKind::NameResolution,
                        format!("reference to undeclared constant #{c}"),
                    );
                    return None;
                }
                Some(Type::Int)
            }
            Expr::Var { id, .. } => {
                if *id >= m.vars.len() {
                    self.err(
                        span,
                        ErrorKind::NameResolution,
                        format!("reference to undeclared variable #{id}"),
                    );
                    return None;
                }
                Some(m.var_type(*id))
            }
            Expr::Not(a) => {
                self.expect(a, Type::Bool, span, e)?;
                Some(Type::Bool)
            }
            Expr::Neg(a) => {
                self.expect(a, Type::Int, span, e)?;
                Some(Type::Int)
            }
            Expr::Binary(op, a, b) => match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    let x = self.expect(a, Type::Bool, span, e);
                    let y = self.expect(b, Type::Bool, span, e);
                    x.and(y).map(|_| Type::Bool)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let x = self.expect(a, Type::Int, span, e);
                    let y = self.expect(b, Type::Int, span, e);
                    x.and(y).map(|_| Type::Bool)
                }
                BinOp::Add | BinOp::Sub => {
                    let x = self.expect(a, Type::Int, span, e);
                    let y = self.expect(b, Type::Int, span, e);
                    x.and(y).map(|_| Type::Int)
                }
                BinOp::Eq | BinOp::Ne => {
                    let x = self.type_of(a, span)?;
                    let y = self.type_of(b, span)?;
                    if x != y {
                        let msg = format!(
                            "cannot compare {} with {} in `{}`",
                            self.type_name(x),
                            self.type_name(y),
                            expr_to_string(m, e)
                        );
                        self.err(span, ErrorKind::Type, msg);
                        return None;
                    }
                    Some(Type::Bool)
                }
            },
            Expr::In(a, s) => {
                let x = self.type_of(a, span)?;
                let y = self.set_type(s, span)?;
                if x != y {
                    let msg = format!(
                        "membership of {} in a set of {} in `{}`",
                        self.type_name(x),
                        self.type_name(y),
                        expr_to_string(m, e)
                    );
                    self.err(span, ErrorKind::Type, msg);
                    return None;
                }
                Some(Type::Bool)
            }
            Expr::If(c, a, b) => {
                self.expect(c, Type::Bool, span, e)?;
                let x = self.type_of(a, span)?;
                let y = self.type_of(b, span)?;
                if x != y {
                    let msg = format!(
                        "branches have different types ({} and {}) in `{}`",
                        self.type_name(x),
                        self.type_name(y),
                        expr_to_string(m, e)
                    );
                    self.err(span, ErrorKind::Type, msg);
                    return None;
                }
                Some(x)
            }
        }
    }

    fn expect(&mut self, sub: &Expr, want: Type, span: SourceSpan, whole: &Expr) -> Option<()> {
        let got = self.type_of(sub, span)?;
        if got != want {
            let msg = format!(
                "expected {}, found {} `{}` in `{}`",
                self.type_name(want),
                self.type_name(got),
                expr_to_string(self.model, sub),
                expr_to_string(self.model, whole)
            );
            self.err(span, ErrorKind::Type, msg);
            return None;
        }
        Some(())
    }

    fn set_type(&mut self, s: &SetExpr, span: SourceSpan) -> Option<Type> {
        match s {
            SetExpr::Range(lo, hi) => {
                let x = self.type_of(lo, span);
                let y = self.type_of(hi, span);
                for t in [x, y].into_iter().flatten() {
                    if t != Type::Int {
                        self.err(
                            span,
                            ErrorKind::Type,
                            format!("range bounds must be integers, found {}", self.type_name(t)),
                        );
                        return None;
                    }
                }
                x.and(y).map(|_| Type::Int)
            }
            SetExpr::List(items) => {
                let mut ty = None;
                for item in items {
                    let t = self.type_of(item, span)?;
                    match ty {
                        None => ty = Some(t),
                        Some(prev) if prev != t => {
                            let msg = format!(
                                "set mixes {} and {}",
                                self.type_name(prev),
                                self.type_name(t)
                            );
                            self.err(span, ErrorKind::Type, msg);
                            return None;
                        }
                        Some(_) => {}
                    }
                }
                ty
            }
        }
    }
}
