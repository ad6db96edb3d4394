//! Domain types for guarded-action models: values, states, expressions,
//! actions and the model itself.

use std::fmt;

use crate::parser::SourceSpan;

/// Index of an enum declaration in [`Model::enums`].
pub type EnumId = usize;
/// Index of a variable declaration in [`Model::vars`].
pub type VarId = usize;
/// Index of a constant declaration in [`Model::constants`].
pub type ConstId = usize;

/// A single variable value.
///
/// Enum values are stored as (enum, member) indices; the model carries the
/// names needed to render them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum { ty: EnumId, member: usize },
}

impl Value {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn ty(self) -> Type {
        match self {
            Value::Bool(_) => Type::Bool,
            Value::Int(_) => Type::Int,
            Value::Enum { ty, .. } => Type::Enum(ty),
        }
    }
}

/// Static type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Int,
    Enum(EnumId),
}

/// A total assignment of values to the model's variables, in declaration
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Box<[Value]>);

impl State {
    pub fn new(values: impl Into<Box<[Value]>>) -> Self {
        State(values.into())
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, var: VarId) -> Value {
        self.0[var]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Integer bound appearing in a range domain: a literal or a named constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lit(i64),
    Const(ConstId),
}

/// The finite set of values a variable may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Bool,
    Range { lo: Bound, hi: Bound },
    Enum(EnumId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "=>",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
        }
    }
}

/// Resolved expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Value),
    Const(ConstId),
    Var { id: VarId, primed: bool },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    In(Box<Expr>, SetExpr),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Lit(Value::Bool(true))
    }

    pub fn var(id: VarId) -> Expr {
        Expr::Var { id, primed: false }
    }

    pub fn primed(id: VarId) -> Expr {
        Expr::Var { id, primed: true }
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    pub fn member(ty: EnumId, member: usize) -> Expr {
        Expr::Lit(Value::Enum { ty, member })
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Visits every primed variable reference in the tree.
    pub fn primed_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Expr::Var { id, primed: true } => out.push(*id),
            Expr::Lit(_) | Expr::Const(_) | Expr::Var { .. } => {}
            Expr::Not(e) | Expr::Neg(e) => e.primed_vars(out),
            Expr::Binary(_, a, b) => {
                a.primed_vars(out);
                b.primed_vars(out);
            }
            Expr::In(e, set) => {
                e.primed_vars(out);
                set.primed_vars(out);
            }
            Expr::If(c, a, b) => {
                c.primed_vars(out);
                a.primed_vars(out);
                b.primed_vars(out);
            }
        }
    }

    pub fn has_primes(&self) -> bool {
        let mut v = Vec::new();
        self.primed_vars(&mut v);
        !v.is_empty()
    }
}

/// Set expression used by `in`: an explicit list or an integer range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    List(Vec<Expr>),
    Range(Box<Expr>, Box<Expr>),
}

impl SetExpr {
    fn primed_vars(&self, out: &mut Vec<VarId>) {
        match self {
            SetExpr::List(items) => items.iter().for_each(|e| e.primed_vars(out)),
            SetExpr::Range(lo, hi) => {
                lo.primed_vars(out);
                hi.primed_vars(out);
            }
        }
    }
}

/// Right-hand side of an effect entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffectRhs {
    /// `x' = e`
    Assign(Expr),
    /// `x' in S`: one successor per member, in written order.
    Choose(SetExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub target: VarId,
    pub rhs: EffectRhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub guard: Expr,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constant {
    pub name: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invariant {
    pub name: String,
    pub expr: Expr,
}

/// A leads-to property `p ~> q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadsTo {
    pub name: String,
    pub p: Expr,
    pub q: Expr,
}

/// Declaration sites, used for diagnostics only.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub consts: Vec<SourceSpan>,
    pub enums: Vec<SourceSpan>,
    pub vars: Vec<SourceSpan>,
    pub init: Option<SourceSpan>,
    pub actions: Vec<SourceSpan>,
    pub invariants: Vec<SourceSpan>,
    pub liveness: Vec<SourceSpan>,
    pub fairness: Vec<SourceSpan>,
}

/// A guarded-action model.
///
/// Equality is structural and ignores the source map.
#[derive(Debug, Clone)]
pub struct Model {
    pub constants: Vec<Constant>,
    pub enums: Vec<EnumDecl>,
    pub vars: Vec<VarDecl>,
    pub init: Expr,
    pub actions: Vec<Action>,
    pub invariants: Vec<Invariant>,
    pub liveness: Vec<LeadsTo>,
    /// Actions under weak fairness, in declaration order.
    pub fairness: Vec<String>,
    pub source_map: SourceMap,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.constants == other.constants
            && self.enums == other.enums
            && self.vars == other.vars
            && self.init == other.init
            && self.actions == other.actions
            && self.invariants == other.invariants
            && self.liveness == other.liveness
            && self.fairness == other.fairness
    }
}

impl Eq for Model {}

impl Model {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn action_id(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Looks up an enum member by name across all enums.
    pub fn member(&self, name: &str) -> Option<Value> {
        self.enums.iter().enumerate().find_map(|(ty, e)| {
            e.members
                .iter()
                .position(|m| m == name)
                .map(|member| Value::Enum { ty, member })
        })
    }

    pub fn bound_value(&self, b: Bound) -> i64 {
        match b {
            Bound::Lit(v) => v,
            Bound::Const(c) => self.constants[c].value,
        }
    }

    /// Inclusive integer bounds of a range domain.
    pub fn range_of(&self, var: VarId) -> Option<(i64, i64)> {
        match self.vars[var].domain {
            Domain::Range { lo, hi } => Some((self.bound_value(lo), self.bound_value(hi))),
            _ => None,
        }
    }

    pub fn var_type(&self, var: VarId) -> Type {
        match self.vars[var].domain {
            Domain::Bool => Type::Bool,
            Domain::Range { .. } => Type::Int,
            Domain::Enum(e) => Type::Enum(e),
        }
    }

    /// All values of a variable's domain in declaration order.
    pub fn domain_values(&self, var: VarId) -> Vec<Value> {
        match self.vars[var].domain {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Range { lo, hi } => (self.bound_value(lo)..=self.bound_value(hi))
                .map(Value::Int)
                .collect(),
            Domain::Enum(ty) => (0..self.enums[ty].members.len())
                .map(|member| Value::Enum { ty, member })
                .collect(),
        }
    }

    /// Whether `v` is a member of the variable's domain.
    pub fn in_domain(&self, var: VarId, v: Value) -> bool {
        match (self.vars[var].domain, v) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Range { lo, hi }, Value::Int(i)) => {
                self.bound_value(lo) <= i && i <= self.bound_value(hi)
            }
            (Domain::Enum(e), Value::Enum { ty, member }) => {
                e == ty && member < self.enums[e].members.len()
            }
            _ => false,
        }
    }

    /// Size of the full domain product, or `None` on overflow.
    pub fn state_space_size(&self) -> Option<u128> {
        self.vars.iter().enumerate().try_fold(1u128, |acc, (i, _)| {
            let n = match self.vars[i].domain {
                Domain::Bool => 2u128,
                Domain::Range { lo, hi } => {
                    let (lo, hi) = (self.bound_value(lo), self.bound_value(hi));
                    if hi < lo {
                        0
                    } else {
                        (hi as i128 - lo as i128 + 1) as u128
                    }
                }
                Domain::Enum(e) => self.enums[e].members.len() as u128,
            };
            acc.checked_mul(n)
        })
    }

    pub fn display_value(&self, v: Value) -> ValueDisplay<'_> {
        ValueDisplay {
            model: self,
            value: v,
        }
    }

    /// Renders `var=value` pairs separated by single spaces.
    pub fn display_state<'a>(&'a self, s: &'a State) -> StateDisplay<'a> {
        StateDisplay {
            model: self,
            state: s,
            sep: " ",
        }
    }

    /// Compact tuple rendering, e.g. `(CLOSED,ON,1)`.
    pub fn state_tuple(&self, s: &State) -> String {
        let parts: Vec<String> = s
            .values()
            .iter()
            .map(|v| self.display_value(*v).to_string())
            .collect();
        format!("({})", parts.join(","))
    }
}

pub struct ValueDisplay<'a> {
    model: &'a Model,
    value: Value,
}

impl fmt::Display for ValueDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Enum { ty, member } => {
                match self.model.enums.get(ty).and_then(|e| e.members.get(member)) {
                    Some(name) => f.write_str(name),
                    None => write!(f, "<enum {ty}:{member}>"),
                }
            }
        }
    }
}

pub struct StateDisplay<'a> {
    model: &'a Model,
    state: &'a State,
    sep: &'a str,
}

impl<'a> StateDisplay<'a> {
    pub fn with_separator(mut self, sep: &'a str) -> Self {
        self.sep = sep;
        self
    }
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (decl, v)) in self.model.vars.iter().zip(self.state.values()).enumerate() {
            if i > 0 {
                f.write_str(self.sep)?;
            }
            write!(f, "{}={}", decl.name, self.model.display_value(*v))?;
        }
        Ok(())
    }
}
