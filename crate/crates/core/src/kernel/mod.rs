//! Expression and action semantics for guarded-action models.

mod model;
mod semantics;

pub use model::{
    Action, BinOp, Bound, ConstId, Constant, Domain, Effect, EffectRhs, EnumDecl, EnumId, Expr,
    Invariant, LeadsTo, Model, SetExpr, SourceMap, State, StateDisplay, Type, Value, VarDecl,
    VarId,
};
pub use semantics::{
    apply, enabled, eval, eval_set, for_each_assignment, holds, initial_states, EvalError,
    InitError, StepError, MAX_INIT_PRODUCT,
};
