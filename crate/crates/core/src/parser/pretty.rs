//! Renders a [`Model`] back to source text that reparses to an equal model.

use std::fmt::Write;

use crate::kernel::{BinOp, Bound, Domain, EffectRhs, Expr, Model, SetExpr, Value};

pub fn pretty(model: &Model) -> String {
    let mut out = String::new();
    for c in &model.constants {
        let _ = writeln!(out, "const {} = {}", c.name, c.value);
    }
    for e in &model.enums {
        let _ = writeln!(out, "enum {} {{ {} }}", e.name, e.members.join(", "));
    }
    for v in &model.vars {
        let domain = match v.domain {
            Domain::Bool => "bool".to_string(),
            Domain::Range { lo, hi } => format!("{}..{}", bound(model, lo), bound(model, hi)),
            Domain::Enum(e) => model
                .enums
                .get(e)
                .map_or_else(|| format!("#{e}"), |e| e.name.clone()),
        };
        let _ = writeln!(out, "var {} : {}", v.name, domain);
    }
    let _ = writeln!(out, "init {{ {} }}", expr_to_string(model, &model.init));
    for a in &model.actions {
        let _ = writeln!(out, "action {} {{", a.name);
        if a.guard != Expr::tt() {
            let _ = writeln!(out, "  when {}", expr_to_string(model, &a.guard));
        }
        for eff in &a.effects {
            let target = var_name(model, eff.target);
            match &eff.rhs {
                EffectRhs::Assign(e) => {
                    let _ = writeln!(out, "  {target}' = {}", expr_to_string(model, e));
                }
                EffectRhs::Choose(s) => {
                    let mut buf = String::new();
                    set(model, s, &mut buf);
                    let _ = writeln!(out, "  {target}' in {buf}");
                }
            }
        }
        out.push_str("}\n");
    }
    for inv in &model.invariants {
        let _ = writeln!(
            out,
            "invariant {} {{ {} }}",
            inv.name,
            expr_to_string(model, &inv.expr)
        );
    }
    for l in &model.liveness {
        let _ = writeln!(
            out,
            "liveness {} {{ {} ~> {} }}",
            l.name,
            expr_to_string(model, &l.p),
            expr_to_string(model, &l.q)
        );
    }
    if !model.fairness.is_empty() {
        let _ = writeln!(out, "fairness weak {}", model.fairness.join(", "));
    }
    out
}

pub fn expr_to_string(model: &Model, e: &Expr) -> String {
    let mut out = String::new();
    expr(model, e, &mut out);
    out
}

fn bound(model: &Model, b: Bound) -> String {
    match b {
        Bound::Lit(i) => i.to_string(),
        Bound::Const(c) => model
            .constants
            .get(c)
            .map_or_else(|| format!("#{c}"), |c| c.name.clone()),
    }
}

fn var_name(model: &Model, id: usize) -> String {
    model
        .vars
        .get(id)
        .map_or_else(|| format!("#{id}"), |v| v.name.clone())
}

// binding strength; higher binds tighter
const IF: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const ADD: u8 = 6;
const NEG: u8 = 7;
const ATOM: u8 = 8;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::If(..) => IF,
        Expr::Binary(op, ..) => match op {
            BinOp::Implies => IMPLIES,
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Add | BinOp::Sub => ADD,
            _ => CMP,
        },
        Expr::In(..) => CMP,
        Expr::Not(_) => NOT,
        Expr::Neg(_) => NEG,
        // a negative literal prints as `-n`
        Expr::Lit(Value::Int(i)) if *i < 0 => NEG,
        _ => ATOM,
    }
}

/// Prints `e` as an operand that must bind at least as tightly as `min`.
fn operand(model: &Model, e: &Expr, min: u8, out: &mut String) {
    let l = level(e);
    if l == IF || l < min {
        out.push('(');
        expr(model, e, out);
        out.push(')');
    } else {
        expr(model, e, out);
    }
}

fn expr(model: &Model, e: &Expr, out: &mut String) {
    match e {
        Expr::Lit(v) => {
            let _ = write!(out, "{}", model.display_value(*v));
        }
        Expr::Const(c) => out.push_str(&bound(model, Bound::Const(*c))),
        Expr::Var { id, primed } => {
            out.push_str(&var_name(model, *id));
            if *primed {
                out.push('\'');
            }
        }
        Expr::Not(a) => {
            out.push('!');
            operand(model, a, NOT, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            // `-(3)` keeps a negation of a literal distinct from `-3`
            if matches!(**a, Expr::Lit(Value::Int(_))) {
                out.push('(');
                expr(model, a, out);
                out.push(')');
            } else {
                operand(model, a, NEG, out);
            }
        }
        Expr::Binary(op, a, b) => {
            let l = level(e);
            let (lmin, rmin) = match op {
                BinOp::Implies => (l + 1, l),
                BinOp::And | BinOp::Or | BinOp::Add | BinOp::Sub => (l, l + 1),
                _ => (l + 1, l + 1),
            };
            operand(model, a, lmin, out);
            let _ = write!(out, " {} ", op.symbol());
            operand(model, b, rmin, out);
        }
        Expr::In(a, s) => {
            operand(model, a, CMP + 1, out);
            out.push_str(" in ");
            set(model, s, out);
        }
        Expr::If(c, a, b) => {
            out.push_str("if ");
            expr(model, c, out);
            out.push_str(" then ");
            expr(model, a, out);
            out.push_str(" else ");
            expr(model, b, out);
        }
    }
}

fn set(model: &Model, s: &SetExpr, out: &mut String) {
    match s {
        SetExpr::List(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(model, item, out);
            }
            out.push('}');
        }
        SetExpr::Range(lo, hi) => {
            operand(model, lo, ADD, out);
            out.push_str("..");
            operand(model, hi, ADD, out);
        }
    }
}
