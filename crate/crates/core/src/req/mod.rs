//! Round-based requirements engine.
//!
//! A [`RequirementsModel`] holds a data dictionary, named definitions and
//! template-typed requirements. [`fire_round`] evaluates one round over
//! start/end snapshots and [`run_reqs`] iterates rounds.

pub mod engine;
pub mod expr;
pub mod model;
pub mod text;

pub use engine::{
    fire_round, run_reqs, Env, Fired, HaltPolicy, Obligation, ReqRun, RoundResult, RunEnd,
};
pub use expr::{BinOp, EvalCtx, EvalError, Expr, ModeQuery, TimePoint, Value};
pub use model::{
    CaseBranch, ConstantDef, DataDictionary, Definition, Effect, ModeDef, ModelError, Requirement,
    RequirementsModel, Response, SignalDef, Template, TypeDef, TypeKind,
};
pub use text::{parse_req, serialize_req, ReqLoadError};
