use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use super::expr::{Expr, ModeQuery, TimePoint, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TypeKind {
    Bool,
    Int { min: Option<i64>, max: Option<i64> },
    Enum(Vec<String>),
    Array { element: String, len: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeDef {
    pub name: String,
    pub kind: TypeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstantDef {
    pub name: String,
    pub ty: String,
    pub value: Value,
    pub min: Option<i64>,
    pub max: Option<i64>,
    pub tolerance: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignalDef {
    pub name: String,
    pub ty: String,
    pub min: Option<i64>,
    pub max: Option<i64>,
    pub initial: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeDef {
    pub component: String,
    pub modes: Vec<String>,
    /// Modes active before round 0.
    pub initial: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DataDictionary {
    pub types: Vec<TypeDef>,
    pub constants: Vec<ConstantDef>,
    pub signals: Vec<SignalDef>,
    pub modes: Vec<ModeDef>,
}

impl DataDictionary {
    /// Number of records: types, constants, signals and mode components.
    pub fn record_count(&self) -> usize {
        self.types.len() + self.constants.len() + self.signals.len() + self.modes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Definition {
    pub id: String,
    pub text: String,
    pub params: Vec<String>,
    pub expr: Expr,
}

impl Definition {
    pub fn new(id: impl Into<String>, text: impl Into<String>, expr: Expr) -> Self {
        Definition {
            id: id.into(),
            text: text.into(),
            params: Vec::new(),
            expr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Effect {
    Assign {
        target: String,
        value: Expr,
    },
    Activate {
        component: String,
        mode: String,
    },
    Deactivate {
        component: String,
        mode: String,
    },
    /// Copies the end-of-round value of `source` into `target`.
    Sync {
        target: String,
        source: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Response {
    Effects(Vec<Effect>),
    Require(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseBranch {
    pub condition: Expr,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Template {
    Every {
        required: Expr,
    },
    When {
        guard: Expr,
        required: Expr,
    },
    TriggerOnEvent {
        trigger: Expr,
        response: Response,
        within: Option<u32>,
        at_some_point: bool,
    },
    Latch {
        signal: String,
        value: Expr,
        condition: Expr,
    },
    /// A monitor unless `effects` is non-empty.
    TriggerOnChange {
        signal: String,
        required: Expr,
        effects: Vec<Effect>,
    },
    ModeSet {
        component: String,
        exclusive: bool,
    },
    Case {
        guard: Expr,
        branches: Vec<CaseBranch>,
        total: bool,
    },
}

impl Template {
    pub fn name(&self) -> &'static str {
        match self {
            Template::Every { .. } => "EVERY",
            Template::When { .. } => "WHEN",
            Template::TriggerOnEvent { .. } => "TRIGGER",
            Template::Latch { .. } => "LATCH",
            Template::TriggerOnChange { .. } => "ONCHANGE",
            Template::ModeSet { .. } => "MODESET",
            Template::Case { .. } => "CASE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Requirement {
    pub id: String,
    pub title: String,
    pub template: Template,
}

#[derive(Debug, Clone, Copy)]
pub enum Record<'a> {
    Signal(&'a SignalDef),
    Constant(&'a ConstantDef),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("`{owner}` uses unknown type `{ty}`")]
    UnknownType { owner: String, ty: String },
    #[error("`{owner}` references unknown name `{name}`")]
    UnknownReference { owner: String, name: String },
    #[error("`{owner}` calls `{name}` with {got} argument(s), expected {expected}")]
    Arity {
        owner: String,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("definition cycle: {}", .0.join(" -> "))]
    DefinitionCycle(Vec<String>),
    #[error("`{0}` reads an end-of-round value in a guard")]
    IllegalEndOfRoundRead(String),
    #[error("`{requirement}` must name a raw signal, not `{name}`")]
    RawSignalRequired { requirement: String, name: String },
    #[error("array type `{0}` has a mode element type")]
    ArrayOfMode(String),
    #[error("array type `{ty}` has non-scalar element type `{element}`")]
    NonScalarElement { ty: String, element: String },
    #[error("`{0}` uses a sync effect without `within 0`")]
    SyncRequiresWithinZero(String),
    #[error("`{owner}` references unknown mode `{component}.{mode}`")]
    UnknownMode {
        owner: String,
        component: String,
        mode: String,
    },
    #[error("signal `{0}` has an initial value outside its type")]
    BadInitial(String),
}

/// Data dictionary, definitions and requirements, validated on construction.
#[derive(Debug, Clone, Serialize)]
pub struct RequirementsModel {
    dictionary: DataDictionary,
    definitions: Vec<Definition>,
    requirements: Vec<Requirement>,
    #[serde(skip)]
    index: Index,
}

#[derive(Debug, Clone, Default)]
struct Index {
    signals: HashMap<String, usize>,
    constants: HashMap<String, usize>,
    definitions: HashMap<String, usize>,
    requirements: HashMap<String, usize>,
    types: HashMap<String, usize>,
}

impl PartialEq for RequirementsModel {
    fn eq(&self, other: &Self) -> bool {
        self.dictionary == other.dictionary
            && self.definitions == other.definitions
            && self.requirements == other.requirements
    }
}

impl RequirementsModel {
    pub fn new(
        dictionary: DataDictionary,
        definitions: Vec<Definition>,
        requirements: Vec<Requirement>,
    ) -> Result<Self, ModelError> {
        let mut m = RequirementsModel {
            dictionary,
            definitions,
            requirements,
            index: Index::default(),
        };
        m.build_index()?;
        m.validate()?;
        Ok(m)
    }

    pub fn empty() -> Self {
        Self::new(DataDictionary::default(), Vec::new(), Vec::new()).expect("empty model is valid")
    }

    pub fn dictionary(&self) -> &DataDictionary {
        &self.dictionary
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.definitions
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn into_parts(self) -> (DataDictionary, Vec<Definition>, Vec<Requirement>) {
        (self.dictionary, self.definitions, self.requirements)
    }

    pub fn record(&self, name: &str) -> Option<Record<'_>> {
        if let Some(&i) = self.index.signals.get(name) {
            return Some(Record::Signal(&self.dictionary.signals[i]));
        }
        self.index
            .constants
            .get(name)
            .map(|&i| Record::Constant(&self.dictionary.constants[i]))
    }

    pub fn signal(&self, name: &str) -> Option<&SignalDef> {
        self.index
            .signals
            .get(name)
            .map(|&i| &self.dictionary.signals[i])
    }

    pub fn definition(&self, id: &str) -> Option<&Definition> {
        self.index
            .definitions
            .get(id)
            .map(|&i| &self.definitions[i])
    }

    pub fn requirement(&self, id: &str) -> Option<&Requirement> {
        self.index
            .requirements
            .get(id)
            .map(|&i| &self.requirements[i])
    }

    pub fn type_def(&self, name: &str) -> Option<&TypeDef> {
        self.index
            .types
            .get(name)
            .map(|&i| &self.dictionary.types[i])
    }

    pub fn mode_def(&self, component: &str) -> Option<&ModeDef> {
        self.dictionary
            .modes
            .iter()
            .find(|m| m.component == component)
    }

    /// Effective integer bounds of a signal: its own bounds, else its type's.
    pub fn bounds(&self, signal: &SignalDef) -> (Option<i64>, Option<i64>) {
        let (tmin, tmax) = match self.type_def(&signal.ty).map(|t| &t.kind) {
            Some(TypeKind::Int { min, max }) => (*min, *max),
            _ => (None, None),
        };
        (signal.min.or(tmin), signal.max.or(tmax))
    }

    /// Whether `v` is admissible for `signal`. Nil is admissible everywhere.
    pub fn admits(&self, signal: &SignalDef, v: &Value) -> bool {
        match v {
            Value::Nil => true,
            Value::Bool(_) => self.scalar_kind(&signal.ty) == Some(ScalarKind::Bool),
            Value::Int(i) => {
                if self.scalar_kind(&signal.ty) != Some(ScalarKind::Int) {
                    return false;
                }
                let (lo, hi) = self.bounds(signal);
                lo.is_none_or(|lo| *i >= lo) && hi.is_none_or(|hi| *i <= hi)
            }
            Value::Sym(s) => match self.type_def(&signal.ty).map(|t| &t.kind) {
                Some(TypeKind::Enum(vs)) => vs.contains(s),
                _ => false,
            },
        }
    }

    fn scalar_kind(&self, ty: &str) -> Option<ScalarKind> {
        match ty {
            "bool" => Some(ScalarKind::Bool),
            "int" => Some(ScalarKind::Int),
            _ => match &self.type_def(ty)?.kind {
                TypeKind::Bool => Some(ScalarKind::Bool),
                TypeKind::Int { .. } => Some(ScalarKind::Int),
                TypeKind::Enum(_) => Some(ScalarKind::Enum),
                TypeKind::Array { .. } => None,
            },
        }
    }

    fn build_index(&mut self) -> Result<(), ModelError> {
        let mut names = BTreeSet::new();
        let mut claim = |n: &str| {
            if names.insert(n.to_owned()) {
                Ok(())
            } else {
                Err(ModelError::Duplicate(n.to_owned()))
            }
        };
        let d = &self.dictionary;
        for (i, t) in d.types.iter().enumerate() {
            claim(&t.name)?;
            self.index.types.insert(t.name.clone(), i);
        }
        for (i, c) in d.constants.iter().enumerate() {
            claim(&c.name)?;
            self.index.constants.insert(c.name.clone(), i);
        }
        for (i, s) in d.signals.iter().enumerate() {
            claim(&s.name)?;
            self.index.signals.insert(s.name.clone(), i);
        }
        for m in &d.modes {
            claim(&m.component)?;
        }
        for (i, def) in self.definitions.iter().enumerate() {
            claim(&def.id)?;
            self.index.definitions.insert(def.id.clone(), i);
        }
        let mut ids = BTreeSet::new();
        for (i, r) in self.requirements.iter().enumerate() {
            if !ids.insert(r.id.as_str()) {
                return Err(ModelError::Duplicate(r.id.clone()));
            }
            self.index.requirements.insert(r.id.clone(), i);
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ModelError> {
        let d = &self.dictionary;
        for t in &d.types {
            if let TypeKind::Array { element, .. } = &t.kind {
                if self.mode_def(element).is_some() {
                    return Err(ModelError::ArrayOfMode(t.name.clone()));
                }
                if self.scalar_kind(element).is_none() {
                    return Err(ModelError::NonScalarElement {
                        ty: t.name.clone(),
                        element: element.clone(),
                    });
                }
            }
        }
        for s in &d.signals {
            self.check_type(&s.name, &s.ty)?;
            if !self.admits(s, &s.initial) {
                return Err(ModelError::BadInitial(s.name.clone()));
            }
        }
        for c in &d.constants {
            self.check_type(&c.name, &c.ty)?;
        }
        for m in &d.modes {
            for init in &m.initial {
                if !m.modes.contains(init) {
                    return Err(ModelError::UnknownMode {
                        owner: m.component.clone(),
                        component: m.component.clone(),
                        mode: init.clone(),
                    });
                }
            }
        }
        for def in &self.definitions {
            self.check_refs(&def.id, &def.expr, &def.params)?;
        }
        self.check_acyclic()?;
        for r in &self.requirements {
            self.validate_requirement(r)?;
        }
        Ok(())
    }

    fn check_type(&self, owner: &str, ty: &str) -> Result<(), ModelError> {
        if ty == "bool" || ty == "int" || self.type_def(ty).is_some() {
            Ok(())
        } else {
            Err(ModelError::UnknownType {
                owner: owner.to_owned(),
                ty: ty.to_owned(),
            })
        }
    }

    fn check_mode(&self, owner: &str, component: &str, mode: &str) -> Result<(), ModelError> {
        match self.mode_def(component) {
            Some(m) if m.modes.iter().any(|x| x == mode) => Ok(()),
            _ => Err(ModelError::UnknownMode {
                owner: owner.to_owned(),
                component: component.to_owned(),
                mode: mode.to_owned(),
            }),
        }
    }

    fn check_refs(&self, owner: &str, e: &Expr, params: &[String]) -> Result<(), ModelError> {
        let mut result = Ok(());
        e.walk(&mut |sub| {
            if result.is_err() {
                return;
            }
            let unknown = |name: &str| ModelError::UnknownReference {
                owner: owner.to_owned(),
                name: name.to_owned(),
            };
            result = match sub {
                Expr::Ref(n) => {
                    if params.contains(n) || self.record(n).is_some() {
                        Ok(())
                    } else {
                        match self.definition(n) {
                            Some(d) if d.params.is_empty() => Ok(()),
                            Some(d) => Err(ModelError::Arity {
                                owner: owner.to_owned(),
                                name: n.clone(),
                                expected: d.params.len(),
                                got: 0,
                            }),
                            None => Err(unknown(n)),
                        }
                    }
                }
                Expr::Old(n) => match self.signal(n) {
                    Some(_) => Ok(()),
                    None => Err(unknown(n)),
                },
                Expr::Call(n, args) => match self.definition(n) {
                    Some(d) if d.params.len() == args.len() => Ok(()),
                    Some(d) => Err(ModelError::Arity {
                        owner: owner.to_owned(),
                        name: n.clone(),
                        expected: d.params.len(),
                        got: args.len(),
                    }),
                    None => Err(unknown(n)),
                },
                Expr::Mode {
                    component, mode, ..
                } => self.check_mode(owner, component, mode),
                _ => Ok(()),
            };
        });
        result
    }

    fn def_deps<'a>(&'a self, def: &'a Definition) -> Vec<&'a str> {
        let mut deps = Vec::new();
        def.expr.walk(&mut |sub| match sub {
            Expr::Ref(n) | Expr::Call(n, _)
                if self.definition(n).is_some() && !def.params.contains(n) =>
            {
                deps.push(n.as_str())
            }
            _ => {}
        });
        deps
    }

    fn check_acyclic(&self) -> Result<(), ModelError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut marks = vec![Mark::New; self.definitions.len()];
        let mut path: Vec<usize> = Vec::new();
        for root in 0..self.definitions.len() {
            if marks[root] != Mark::New {
                continue;
            }
            let mut stack: Vec<(usize, Vec<usize>)> = vec![(root, self.dep_indices(root))];
            marks[root] = Mark::Active;
            path.push(root);
            while let Some((_, pending)) = stack.last_mut() {
                match pending.pop() {
                    Some(next) => match marks[next] {
                        Mark::Done => {}
                        Mark::Active => {
                            let start = path.iter().position(|&p| p == next).unwrap_or(0);
                            let mut cycle: Vec<String> = path[start..]
                                .iter()
                                .map(|&i| self.definitions[i].id.clone())
                                .collect();
                            cycle.push(self.definitions[next].id.clone());
                            return Err(ModelError::DefinitionCycle(cycle));
                        }
                        Mark::New => {
                            marks[next] = Mark::Active;
                            path.push(next);
                            stack.push((next, self.dep_indices(next)));
                        }
                    },
                    None => {
                        let (done, _) = stack.pop().expect("non-empty stack");
                        marks[done] = Mark::Done;
                        path.pop();
                    }
                }
            }
        }
        Ok(())
    }

    fn dep_indices(&self, i: usize) -> Vec<usize> {
        self.def_deps(&self.definitions[i])
            .into_iter()
            .map(|n| self.index.definitions[n])
            .collect()
    }

    /// Whether `e` reads an end-of-round mode status, directly or through definitions.
    pub fn reads_end(&self, e: &Expr) -> bool {
        let mut seen = BTreeSet::new();
        self.reads_end_inner(e, &mut seen)
    }

    fn reads_end_inner<'a>(&'a self, e: &'a Expr, seen: &mut BTreeSet<&'a str>) -> bool {
        let mut found = false;
        let mut defs = Vec::new();
        e.walk(&mut |sub| match sub {
            Expr::Mode {
                query: ModeQuery::At(TimePoint::End),
                ..
            } => found = true,
            Expr::Ref(n) | Expr::Call(n, _) => {
                if let Some(d) = self.definition(n) {
                    defs.push(d);
                }
            }
            _ => {}
        });
        found
            || defs
                .into_iter()
                .any(|d| seen.insert(d.id.as_str()) && self.reads_end_inner(&d.expr, seen))
    }

    fn guard(&self, id: &str, e: &Expr) -> Result<(), ModelError> {
        self.check_refs(id, e, &[])?;
        if self.reads_end(e) {
            return Err(ModelError::IllegalEndOfRoundRead(id.to_owned()));
        }
        Ok(())
    }

    fn effects(&self, id: &str, effects: &[Effect], allow_sync: bool) -> Result<(), ModelError> {
        for eff in effects {
            match eff {
                Effect::Assign { target, value } => {
                    self.raw_signal(id, target)?;
                    self.guard(id, value)?;
                }
                Effect::Activate { component, mode } | Effect::Deactivate { component, mode } => {
                    self.check_mode(id, component, mode)?
                }
                Effect::Sync { target, source } => {
                    if !allow_sync {
                        return Err(ModelError::SyncRequiresWithinZero(id.to_owned()));
                    }
                    self.raw_signal(id, target)?;
                    self.raw_signal(id, source)?;
                }
            }
        }
        Ok(())
    }

    fn raw_signal(&self, id: &str, name: &str) -> Result<(), ModelError> {
        if self.signal(name).is_some() {
            Ok(())
        } else {
            Err(ModelError::RawSignalRequired {
                requirement: id.to_owned(),
                name: name.to_owned(),
            })
        }
    }

    fn validate_requirement(&self, r: &Requirement) -> Result<(), ModelError> {
        let id = r.id.as_str();
        match &r.template {
            Template::Every { required } => self.check_refs(id, required, &[]),
            Template::When { guard, required } => {
                self.guard(id, guard)?;
                self.check_refs(id, required, &[])
            }
            Template::TriggerOnEvent {
                trigger,
                response,
                within,
                ..
            } => {
                self.guard(id, trigger)?;
                match response {
                    Response::Effects(effs) => self.effects(id, effs, *within == Some(0)),
                    Response::Require(c) => self.check_refs(id, c, &[]),
                }
            }
            Template::Latch {
                signal,
                value,
                condition,
            } => {
                self.raw_signal(id, signal)?;
                self.guard(id, value)?;
                self.guard(id, condition)
            }
            Template::TriggerOnChange {
                signal,
                required,
                effects,
            } => {
                self.raw_signal(id, signal)?;
                self.check_refs(id, required, &[])?;
                self.effects(id, effects, false)
            }
            Template::ModeSet { component, .. } => match self.mode_def(component) {
                Some(_) => Ok(()),
                None => Err(ModelError::UnknownReference {
                    owner: id.to_owned(),
                    name: component.clone(),
                }),
            },
            Template::Case {
                guard, branches, ..
            } => {
                self.guard(id, guard)?;
                for b in branches {
                    self.guard(id, &b.condition)?;
                    self.effects(id, &b.effects, false)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarKind {
    Bool,
    Int,
    Enum,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> DataDictionary {
        DataDictionary {
            types: vec![TypeDef {
                name: "Count".into(),
                kind: TypeKind::Int {
                    min: Some(0),
                    max: Some(2),
                },
            }],
            constants: vec![],
            signals: vec![SignalDef {
                name: "n".into(),
                ty: "Count".into(),
                min: None,
                max: None,
                initial: Value::Int(0),
            }],
            modes: vec![ModeDef {
                component: "A".into(),
                modes: vec!["X".into(), "Y".into()],
                initial: vec!["X".into()],
            }],
        }
    }

    fn req(id: &str, template: Template) -> Requirement {
        Requirement {
            id: id.into(),
            title: id.into(),
            template,
        }
    }

    #[test]
    fn type_bounds_apply_to_signals() {
        let m = RequirementsModel::new(dict(), vec![], vec![]).unwrap();
        let n = m.signal("n").unwrap();
        assert_eq!(m.bounds(n), (Some(0), Some(2)));
        assert!(m.admits(n, &Value::Int(2)));
        assert!(!m.admits(n, &Value::Int(3)));
        assert!(!m.admits(n, &Value::Bool(true)));
    }

    #[test]
    fn rejects_array_of_mode() {
        let mut d = dict();
        d.types.push(TypeDef {
            name: "Arr".into(),
            kind: TypeKind::Array {
                element: "A".into(),
                len: 2,
            },
        });
        assert_eq!(
            RequirementsModel::new(d, vec![], vec![]).unwrap_err(),
            ModelError::ArrayOfMode("Arr".into())
        );
    }

    #[test]
    fn rejects_cycles() {
        let defs = vec![
            Definition::new("a", "", Expr::r("b")),
            Definition::new("b", "", Expr::r("a")),
        ];
        assert!(matches!(
            RequirementsModel::new(dict(), defs, vec![]),
            Err(ModelError::DefinitionCycle(_))
        ));
    }

    #[test]
    fn rejects_end_read_in_guard_through_definition() {
        let defs = vec![Definition::new(
            "endx",
            "",
            Expr::mode_at("A", "X", TimePoint::End),
        )];
        let r = req(
            "W",
            Template::When {
                guard: Expr::r("endx"),
                required: Expr::Bool(true),
            },
        );
        assert_eq!(
            RequirementsModel::new(dict(), defs.clone(), vec![r]).unwrap_err(),
            ModelError::IllegalEndOfRoundRead("W".into())
        );
        let ok = req(
            "W",
            Template::When {
                guard: Expr::Bool(true),
                required: Expr::r("endx"),
            },
        );
        assert!(RequirementsModel::new(dict(), defs, vec![ok]).is_ok());
    }

    #[test]
    fn latch_needs_raw_signal() {
        let defs = vec![Definition::new("d", "", Expr::Bool(true))];
        let r = req(
            "L",
            Template::Latch {
                signal: "d".into(),
                value: Expr::Int(1),
                condition: Expr::Bool(true),
            },
        );
        assert!(matches!(
            RequirementsModel::new(dict(), defs, vec![r]),
            Err(ModelError::RawSignalRequired { .. })
        ));
    }

    #[test]
    fn sync_needs_within_zero() {
        let mut d = dict();
        d.signals.push(SignalDef {
            name: "m".into(),
            ty: "Count".into(),
            min: None,
            max: None,
            initial: Value::Int(0),
        });
        let mk = |within| {
            req(
                "S",
                Template::TriggerOnEvent {
                    trigger: Expr::Bool(true),
                    response: Response::Effects(vec![Effect::Sync {
                        target: "n".into(),
                        source: "m".into(),
                    }]),
                    within,
                    at_some_point: false,
                },
            )
        };
        assert_eq!(
            RequirementsModel::new(d.clone(), vec![], vec![mk(None)]).unwrap_err(),
            ModelError::SyncRequiresWithinZero("S".into())
        );
        assert!(RequirementsModel::new(d, vec![], vec![mk(Some(0))]).is_ok());
    }

    #[test]
    fn duplicate_names_rejected() {
        let defs = vec![Definition::new("n", "", Expr::Bool(true))];
        assert_eq!(
            RequirementsModel::new(dict(), defs, vec![]).unwrap_err(),
            ModelError::Duplicate("n".into())
        );
    }
}
