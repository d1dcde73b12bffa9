use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::engine::Env;
use super::model::{Record, RequirementsModel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Enumeration literal.
    Sym(String),
    Nil,
}

impl Value {
    pub fn sym(s: impl Into<String>) -> Value {
        Value::Sym(s.into())
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "'{s}'"),
            Value::Nil => f.write_str("nil"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TimePoint {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeQuery {
    /// `is (in)active at the start/end of the round`
    At(TimePoint),
    /// Status holds at the start of this round but did not at the start of the previous one.
    Becomes,
    /// Status has held at some round boundary so far.
    Ever,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "implies",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Nil,
    Sym(String),
    /// A signal, constant, definition or function parameter.
    Ref(String),
    /// Start-of-round value of a signal, usable inside required conditions.
    Old(String),
    Call(String, Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Mode {
        component: String,
        mode: String,
        query: ModeQuery,
        active: bool,
    },
}

impl Expr {
    pub fn r(name: impl Into<String>) -> Expr {
        Expr::Ref(name.into())
    }

    pub fn sym(s: impl Into<String>) -> Expr {
        Expr::Sym(s.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::And, l, r)
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Or, l, r)
    }

    pub fn implies(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Implies, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Eq, l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn all(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::Bool(true))
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn any(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::or)
            .unwrap_or(Expr::Bool(false))
    }

    pub fn mode_at(component: &str, mode: &str, at: TimePoint) -> Expr {
        Expr::Mode {
            component: component.to_owned(),
            mode: mode.to_owned(),
            query: ModeQuery::At(at),
            active: true,
        }
    }

    /// Visits every sub-expression, including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Not(e) | Expr::Neg(e) => e.walk(f),
            Expr::Bin(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    /// Splits a left-nested conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Bin(BinOp::And, l, r) => {
                let mut v = l.conjuncts();
                v.extend(r.conjuncts());
                v
            }
            e => vec![e],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("end-of-round read outside a required condition: {0}")]
    IllegalEndOfRoundRead(String),
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("division by zero")]
    DivByZero,
}

/// Evaluation context for one phase of a round.
///
/// Guards are evaluated with `end = None`; required conditions get the end
/// snapshot, and bare signal reads then see end-of-round values.
pub struct EvalCtx<'a> {
    pub model: &'a RequirementsModel,
    pub start: &'a Env,
    pub prev: Option<&'a Env>,
    pub end: Option<&'a Env>,
    cache: RefCell<HashMap<&'a str, Value>>,
}

impl<'a> EvalCtx<'a> {
    pub fn guard(model: &'a RequirementsModel, start: &'a Env, prev: Option<&'a Env>) -> Self {
        EvalCtx {
            model,
            start,
            prev,
            end: None,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn required(
        model: &'a RequirementsModel,
        start: &'a Env,
        prev: Option<&'a Env>,
        end: &'a Env,
    ) -> Self {
        EvalCtx {
            model,
            start,
            prev,
            end: Some(end),
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        self.eval_in(e, &[])
    }

    pub fn eval_bool(&self, e: &Expr) -> Result<bool, EvalError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            v => Err(EvalError::TypeMismatch(format!(
                "expected a boolean, got {v}"
            ))),
        }
    }

    fn signal(&self, env: &Env, name: &str) -> Result<Value, EvalError> {
        env.signals
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::Unknown(name.to_owned()))
    }

    fn eval_in(&self, e: &Expr, scope: &[(&'a str, Value)]) -> Result<Value, EvalError> {
        match e {
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Int(i) => Ok(Value::Int(*i)),
            Expr::Nil => Ok(Value::Nil),
            Expr::Sym(s) => Ok(Value::Sym(s.clone())),
            Expr::Ref(name) => {
                if let Some((_, v)) = scope.iter().rev().find(|(n, _)| *n == name.as_str()) {
                    return Ok(v.clone());
                }
                match self.model.record(name) {
                    Some(Record::Signal(_)) => self.signal(self.end.unwrap_or(self.start), name),
                    Some(Record::Constant(c)) => Ok(c.value.clone()),
                    _ => match self.model.definition(name) {
                        Some(def) if def.params.is_empty() => {
                            if let Some(v) = self.cache.borrow().get(name.as_str()) {
                                return Ok(v.clone());
                            }
                            let v = self.eval_in(&def.expr, &[])?;
                            self.cache.borrow_mut().insert(def.id.as_str(), v.clone());
                            Ok(v)
                        }
                        Some(def) => Err(EvalError::Arity {
                            name: name.clone(),
                            expected: def.params.len(),
                            got: 0,
                        }),
                        None => Err(EvalError::Unknown(name.clone())),
                    },
                }
            }
            Expr::Old(name) => self.signal(self.start, name),
            Expr::Call(name, args) => {
                let def = self
                    .model
                    .definition(name)
                    .ok_or_else(|| EvalError::Unknown(name.clone()))?;
                if def.params.len() != args.len() {
                    return Err(EvalError::Arity {
                        name: name.clone(),
                        expected: def.params.len(),
                        got: args.len(),
                    });
                }
                let mut bound = Vec::with_capacity(args.len());
                for (p, a) in def.params.iter().zip(args) {
                    bound.push((p.as_str(), self.eval_in(a, scope)?));
                }
                self.eval_in(&def.expr, &bound)
            }
            Expr::Not(inner) => match self.eval_in(inner, scope)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => Err(EvalError::TypeMismatch(format!("`not` applied to {v}"))),
            },
            Expr::Neg(inner) => match self.eval_in(inner, scope)? {
                Value::Int(i) => Ok(Value::Int(-i)),
                v => Err(EvalError::TypeMismatch(format!("negation applied to {v}"))),
            },
            Expr::Bin(op @ (BinOp::And | BinOp::Or), _, _) => self.eval_chain(*op, e, scope),
            Expr::Bin(op, l, r) => self.eval_bin(*op, l, r, scope),
            Expr::Mode {
                component,
                mode,
                query,
                active,
            } => {
                let holds = |env: &Env| env.mode_active(component, mode) == *active;
                let v = match query {
                    ModeQuery::At(TimePoint::Start) => holds(self.start),
                    ModeQuery::At(TimePoint::End) => match self.end {
                        Some(end) => holds(end),
                        None => {
                            return Err(EvalError::IllegalEndOfRoundRead(format!(
                                "mode({component}.{mode}) at end"
                            )))
                        }
                    },
                    ModeQuery::Becomes => holds(self.start) && !self.prev.is_some_and(holds),
                    ModeQuery::Ever => {
                        self.start
                            .history
                            .contains(&(component.clone(), mode.clone(), *active))
                            || self.end.is_some_and(holds)
                    }
                };
                Ok(Value::Bool(v))
            }
        }
    }

    /// Left-nested `and`/`or` chains, walked iteratively so long generated
    /// disjunctions do not grow the stack.
    fn eval_chain(
        &self,
        op: BinOp,
        e: &Expr,
        scope: &[(&'a str, Value)],
    ) -> Result<Value, EvalError> {
        let mut rights = Vec::new();
        let mut cur = e;
        while let Expr::Bin(o, l, r) = cur {
            if *o != op {
                break;
            }
            rights.push(r.as_ref());
            cur = l;
        }
        let absorbing = op == BinOp::Or;
        for x in std::iter::once(cur).chain(rights.into_iter().rev()) {
            let v = self.eval_in(x, scope)?;
            let b = v.as_bool().ok_or_else(|| {
                EvalError::TypeMismatch(format!("`{}` applied to {v}", op.symbol()))
            })?;
            if b == absorbing {
                return Ok(Value::Bool(absorbing));
            }
        }
        Ok(Value::Bool(!absorbing))
    }

    fn eval_bin(
        &self,
        op: BinOp,
        l: &Expr,
        r: &Expr,
        scope: &[(&'a str, Value)],
    ) -> Result<Value, EvalError> {
        let lv = self.eval_in(l, scope)?;
        let logic = |v: &Value| {
            v.as_bool()
                .ok_or_else(|| EvalError::TypeMismatch(format!("`{}` applied to {v}", op.symbol())))
        };
        match op {
            BinOp::And | BinOp::Or | BinOp::Implies => {
                let lb = logic(&lv)?;
                let short = match op {
                    BinOp::And => (!lb).then_some(false),
                    BinOp::Or => lb.then_some(true),
                    _ => (!lb).then_some(true),
                };
                if let Some(v) = short {
                    return Ok(Value::Bool(v));
                }
                let rv = self.eval_in(r, scope)?;
                Ok(Value::Bool(logic(&rv)?))
            }
            BinOp::Eq => Ok(Value::Bool(lv == self.eval_in(r, scope)?)),
            BinOp::Ne => Ok(Value::Bool(lv != self.eval_in(r, scope)?)),
            _ => {
                let rv = self.eval_in(r, scope)?;
                let (Value::Int(a), Value::Int(b)) = (&lv, &rv) else {
                    return Err(EvalError::TypeMismatch(format!(
                        "`{}` needs integers, got {lv} and {rv}",
                        op.symbol()
                    )));
                };
                let (a, b) = (*a, *b);
                Ok(match op {
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    BinOp::Add => Value::Int(a + b),
                    BinOp::Sub => Value::Int(a - b),
                    BinOp::Mul => Value::Int(a * b),
                    BinOp::Div => {
                        if b == 0 {
                            return Err(EvalError::DivByZero);
                        }
                        Value::Int(a / b)
                    }
                    _ => unreachable!("logical and equality operators handled above"),
                })
            }
        }
    }
}
