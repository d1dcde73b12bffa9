use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::expr::{EvalCtx, EvalError, Expr, Value};
use super::model::{Effect, RequirementsModel, Response, Template};
use crate::violation::{Violation, ViolationCode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub requirement: String,
    pub condition: Expr,
    pub registered: u32,
    /// Last round by which the condition must hold; `None` means end of run.
    pub due: Option<u32>,
}

/// Record values at a round boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Env {
    pub round: u32,
    pub signals: BTreeMap<String, Value>,
    pub modes: BTreeMap<String, BTreeSet<String>>,
    /// Every (component, mode, active) status held at some boundary so far.
    pub history: BTreeSet<(String, String, bool)>,
    pub pending: Vec<Obligation>,
}

impl Env {
    /// Initial values from the dictionary, round 0.
    pub fn initial(model: &RequirementsModel) -> Env {
        let d = model.dictionary();
        let mut env = Env {
            round: 0,
            signals: d
                .signals
                .iter()
                .map(|s| (s.name.clone(), s.initial.clone()))
                .collect(),
            modes: d
                .modes
                .iter()
                .map(|m| (m.component.clone(), m.initial.iter().cloned().collect()))
                .collect(),
            history: BTreeSet::new(),
            pending: Vec::new(),
        };
        env.record_history(model);
        env
    }

    pub fn mode_active(&self, component: &str, mode: &str) -> bool {
        self.modes.get(component).is_some_and(|s| s.contains(mode))
    }

    /// Sole active mode of `component`, if exactly one is active.
    pub fn sole_mode(&self, component: &str) -> Option<&str> {
        let set = self.modes.get(component)?;
        if set.len() == 1 {
            set.iter().next().map(String::as_str)
        } else {
            None
        }
    }

    pub fn set_mode(&mut self, component: &str, mode: &str) {
        self.modes
            .insert(component.to_owned(), BTreeSet::from([mode.to_owned()]));
    }

    pub fn set_signal(&mut self, name: &str, v: Value) {
        self.signals.insert(name.to_owned(), v);
    }

    pub fn signal(&self, name: &str) -> &Value {
        self.signals.get(name).unwrap_or(&Value::Nil)
    }

    fn record_history(&mut self, model: &RequirementsModel) {
        for m in &model.dictionary().modes {
            for mode in &m.modes {
                let active = self.mode_active(&m.component, mode);
                self.history
                    .insert((m.component.clone(), mode.clone(), active));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fired {
    pub requirement: String,
    pub records: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundResult {
    pub end_env: Env,
    pub fired: Vec<Fired>,
    pub violations: Vec<Violation>,
    /// For each record whose value changed: the requirements responsible,
    /// updater first.
    pub changes: BTreeMap<String, Vec<String>>,
}

fn eval_violation(id: &str, e: EvalError) -> Violation {
    Violation::new(ViolationCode::Eval, e.to_string()).with_requirements([id])
}

#[derive(Default)]
struct Proposals {
    assigns: BTreeMap<String, Vec<(Value, String)>>,
    activate: BTreeMap<String, Vec<(String, String)>>,
    deactivate: BTreeMap<String, Vec<(String, String)>>,
    syncs: Vec<(String, String, String)>,
}

impl Proposals {
    fn apply(
        &mut self,
        ctx: &EvalCtx<'_>,
        id: &str,
        effects: &[Effect],
        touched: &mut Vec<String>,
        violations: &mut Vec<Violation>,
    ) {
        for eff in effects {
            match eff {
                Effect::Assign { target, value } => match ctx.eval(value) {
                    Ok(v) => {
                        self.assigns
                            .entry(target.clone())
                            .or_default()
                            .push((v, id.to_owned()));
                        touched.push(target.clone());
                    }
                    Err(e) => violations.push(eval_violation(id, e)),
                },
                Effect::Activate { component, mode } => {
                    self.activate
                        .entry(component.clone())
                        .or_default()
                        .push((mode.clone(), id.to_owned()));
                    touched.push(component.clone());
                }
                Effect::Deactivate { component, mode } => {
                    self.deactivate
                        .entry(component.clone())
                        .or_default()
                        .push((mode.clone(), id.to_owned()));
                    touched.push(component.clone());
                }
                Effect::Sync { target, source } => {
                    self.syncs
                        .push((target.clone(), source.clone(), id.to_owned()));
                    touched.push(target.clone());
                }
            }
        }
    }
}

fn dedup(ids: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for id in ids {
        if !out.contains(&id) {
            out.push(id);
        }
    }
    out
}

/// Evaluates one round.
///
/// Guards and effect expressions read the start snapshot `env`; monitors,
/// mode-set checks and obligations read the resulting end snapshot.
pub fn fire_round(model: &RequirementsModel, env: &Env, prev: Option<&Env>) -> RoundResult {
    let round = env.round;
    let gctx = EvalCtx::guard(model, env, prev);
    let mut props = Proposals::default();
    let mut monitors: Vec<(&str, &Expr)> = Vec::new();
    let mut new_obligations: Vec<Obligation> = Vec::new();
    let mut fired: Vec<Fired> = Vec::new();
    let mut violations: Vec<Violation> = Vec::new();
    let mut exclusive: Vec<(&str, &str)> = Vec::new();

    let check = |id: &str, e: &Expr, violations: &mut Vec<Violation>| match gctx.eval_bool(e) {
        Ok(b) => b,
        Err(err) => {
            violations.push(eval_violation(id, err));
            false
        }
    };

    for r in model.requirements() {
        let id = r.id.as_str();
        let mut touched = Vec::new();
        let active = match &r.template {
            Template::Every { required } => {
                monitors.push((id, required));
                false
            }
            Template::When { guard, required } => {
                let on = check(id, guard, &mut violations);
                if on {
                    monitors.push((id, required));
                }
                on
            }
            Template::TriggerOnEvent {
                trigger,
                response,
                within,
                at_some_point,
            } => {
                let on = check(id, trigger, &mut violations);
                if on {
                    match response {
                        Response::Effects(effs) => {
                            props.apply(&gctx, id, effs, &mut touched, &mut violations);
                            for eff in effs {
                                if let Effect::Sync { target, source } = eff {
                                    new_obligations.push(Obligation {
                                        requirement: id.to_owned(),
                                        condition: Expr::eq(Expr::r(target), Expr::r(source)),
                                        registered: round,
                                        due: Some(round),
                                    });
                                }
                            }
                        }
                        Response::Require(cond) => new_obligations.push(Obligation {
                            requirement: id.to_owned(),
                            condition: cond.clone(),
                            registered: round,
                            due: match (within, at_some_point) {
                                (Some(n), _) => Some(round + n),
                                (None, true) => None,
                                (None, false) => Some(round),
                            },
                        }),
                    }
                }
                on
            }
            Template::Latch {
                signal,
                value,
                condition,
            } => {
                let on = check(id, condition, &mut violations);
                if on {
                    let eff = [Effect::Assign {
                        target: signal.clone(),
                        value: value.clone(),
                    }];
                    props.apply(&gctx, id, &eff, &mut touched, &mut violations);
                }
                on
            }
            Template::TriggerOnChange {
                signal,
                required,
                effects,
            } => {
                let on = prev.is_some_and(|p| p.signal(signal) != env.signal(signal));
                if on {
                    if effects.is_empty() {
                        monitors.push((id, required));
                    } else {
                        props.apply(&gctx, id, effects, &mut touched, &mut violations);
                    }
                }
                on
            }
            Template::ModeSet {
                component,
                exclusive: ex,
            } => {
                if *ex {
                    exclusive.push((component, id));
                }
                false
            }
            Template::Case {
                guard,
                branches,
                total,
            } => {
                let on = check(id, guard, &mut violations);
                if on {
                    match branches
                        .iter()
                        .find(|b| check(id, &b.condition, &mut violations))
                    {
                        Some(b) => {
                            props.apply(&gctx, id, &b.effects, &mut touched, &mut violations)
                        }
                        None if *total => violations.push(
                            Violation::new(ViolationCode::CaseUnmatched, "no branch matched")
                                .with_requirements([id]),
                        ),
                        None => {}
                    }
                }
                on
            }
        };
        if active {
            fired.push(Fired {
                requirement: id.to_owned(),
                records: dedup(touched),
            });
        }
    }

    let mut end = env.clone();
    end.round = round + 1;
    let mut writers: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for (signal, proposals) in &props.assigns {
        let ids = dedup(proposals.iter().map(|(_, id)| id.clone()));
        let distinct: BTreeSet<&Value> = proposals.iter().map(|(v, _)| v).collect();
        if distinct.len() > 1 {
            violations.push(
                Violation::new(
                    ViolationCode::Conflict,
                    format!("conflicting values for `{signal}`"),
                )
                .with_requirements(ids),
            );
            continue;
        }
        let v = proposals[0].0.clone();
        if let Some(def) = model.signal(signal) {
            if !model.admits(def, &v) {
                violations.push(
                    Violation::new(ViolationCode::Range, format!("`{signal}` cannot hold {v}"))
                        .with_requirements(ids),
                );
                continue;
            }
        }
        end.set_signal(signal, v);
        writers.insert(signal.clone(), ids);
    }

    let components: BTreeSet<&String> = props
        .activate
        .keys()
        .chain(props.deactivate.keys())
        .collect();
    for comp in components {
        let acts = props.activate.get(comp).map(Vec::as_slice).unwrap_or(&[]);
        let deacts = props.deactivate.get(comp).map(Vec::as_slice).unwrap_or(&[]);
        let ids = dedup(acts.iter().chain(deacts).map(|(_, id)| id.clone()));
        let is_exclusive = exclusive.iter().any(|(c, _)| *c == comp.as_str());
        let targets: BTreeSet<&String> = acts.iter().map(|(m, _)| m).collect();
        let clash = acts.iter().any(|(m, _)| deacts.iter().any(|(d, _)| d == m));
        if clash || (is_exclusive && targets.len() > 1) {
            violations.push(
                Violation::new(
                    ViolationCode::Conflict,
                    format!("conflicting modes for `{comp}`"),
                )
                .with_requirements(ids),
            );
            continue;
        }
        let set = end.modes.entry(comp.clone()).or_default();
        if is_exclusive && !targets.is_empty() {
            set.clear();
        }
        for (m, _) in deacts {
            set.remove(m);
        }
        for m in targets {
            set.insert(m.clone());
        }
        writers.insert(comp.clone(), ids);
    }

    for (target, source, id) in &props.syncs {
        let v = end.signal(source).clone();
        if let Some(existing) = props.assigns.get(target) {
            if existing.iter().any(|(x, _)| *x != v) {
                let ids = dedup(existing.iter().map(|(_, i)| i.clone()).chain([id.clone()]));
                violations.push(
                    Violation::new(
                        ViolationCode::Conflict,
                        format!("conflicting values for `{target}`"),
                    )
                    .with_requirements(ids),
                );
                continue;
            }
        }
        if let Some(def) = model.signal(target) {
            if !model.admits(def, &v) {
                violations.push(
                    Violation::new(ViolationCode::Range, format!("`{target}` cannot hold {v}"))
                        .with_requirements([id.clone()]),
                );
                continue;
            }
        }
        end.set_signal(target, v);
        let mut ids = writers.get(source).cloned().unwrap_or_default();
        ids.push(id.clone());
        let entry = writers.entry(target.clone()).or_default();
        *entry = dedup(entry.drain(..).chain(ids));
    }

    let ectx = EvalCtx::required(model, env, prev, &end);
    for (id, required) in monitors {
        match ectx.eval_bool(required) {
            Ok(true) => {}
            Ok(false) => violations.push(
                Violation::new(ViolationCode::Monitor, "required condition does not hold")
                    .with_requirements([id]),
            ),
            Err(e) => violations.push(eval_violation(id, e)),
        }
    }

    for (comp, id) in &exclusive {
        let n = end.modes.get(*comp).map_or(0, BTreeSet::len);
        if n != 1 {
            violations.push(
                Violation::new(
                    ViolationCode::ModeSet,
                    format!("`{comp}` has {n} active modes"),
                )
                .with_requirements([*id]),
            );
        }
    }

    let mut pending = Vec::new();
    for ob in env.pending.iter().cloned().chain(new_obligations) {
        match ectx.eval_bool(&ob.condition) {
            Ok(true) => {}
            Ok(false) if ob.due.is_some_and(|d| d <= round) => violations.push(
                Violation::new(
                    ViolationCode::Obligation,
                    format!("obligation registered in round {} expired", ob.registered),
                )
                .with_requirements([ob.requirement.clone()]),
            ),
            Ok(false) => pending.push(ob),
            Err(e) => violations.push(eval_violation(&ob.requirement, e)),
        }
    }
    drop(ectx);
    end.pending = pending;
    end.record_history(model);

    let mut changes = BTreeMap::new();
    for (name, v) in &end.signals {
        if env.signals.get(name) != Some(v) {
            changes.insert(name.clone(), writers.get(name).cloned().unwrap_or_default());
        }
    }
    for (comp, set) in &end.modes {
        if env.modes.get(comp) != Some(set) {
            changes.insert(comp.clone(), writers.get(comp).cloned().unwrap_or_default());
        }
    }

    RoundResult {
        end_env: end,
        fired,
        violations,
        changes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltPolicy {
    /// Stop after the first round that records a violation.
    Halt,
    /// Keep running and collect every violation.
    Collect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunEnd {
    Stopped,
    Budget,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReqRun {
    /// `envs[0]` is the initial environment; `envs[r]` the end of round `r`.
    pub envs: Vec<Env>,
    /// `changes[r - 1]` attributes the differences between `envs[r - 1]` and `envs[r]`.
    pub changes: Vec<BTreeMap<String, Vec<String>>>,
    pub violations: Vec<Violation>,
    pub end: RunEnd,
}

/// Iterates [`fire_round`] from `init`. At most `max_rounds` environments are
/// recorded, counting the initial one. Unbounded obligations still pending
/// at the end are reported as violations.
pub fn run_reqs(
    model: &RequirementsModel,
    init: Env,
    stop: impl Fn(&Env) -> bool,
    max_rounds: u32,
    policy: HaltPolicy,
) -> ReqRun {
    let mut envs = vec![init];
    let mut changes = Vec::new();
    let mut violations = Vec::new();
    let end = loop {
        let cur = envs.last().expect("non-empty");
        if stop(cur) {
            break RunEnd::Stopped;
        }
        if envs.len() as u32 >= max_rounds {
            break RunEnd::Budget;
        }
        let prev = envs.len().checked_sub(2).map(|i| &envs[i]);
        let result = fire_round(model, cur, prev);
        let halt = !result.violations.is_empty() && policy == HaltPolicy::Halt;
        violations.extend(result.violations);
        changes.push(result.changes);
        envs.push(result.end_env);
        if halt {
            break RunEnd::Violation;
        }
    };
    if let Some(last) = envs.last() {
        for ob in &last.pending {
            violations.push(
                Violation::new(
                    ViolationCode::Obligation,
                    format!(
                        "obligation registered in round {} never satisfied",
                        ob.registered
                    ),
                )
                .with_requirements([ob.requirement.clone()]),
            );
        }
    }
    ReqRun {
        envs,
        changes,
        violations,
        end,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::req::expr::{BinOp, ModeQuery, TimePoint};
    use crate::req::model::*;

    fn dict() -> DataDictionary {
        DataDictionary {
            types: vec![],
            constants: vec![],
            signals: vec![
                SignalDef {
                    name: "x".into(),
                    ty: "int".into(),
                    min: Some(0),
                    max: Some(5),
                    initial: Value::Int(0),
                },
                SignalDef {
                    name: "y".into(),
                    ty: "int".into(),
                    min: None,
                    max: None,
                    initial: Value::Int(0),
                },
            ],
            modes: vec![ModeDef {
                component: "A".into(),
                modes: vec!["X".into(), "Y".into()],
                initial: vec!["X".into()],
            }],
        }
    }

    fn model(reqs: Vec<Requirement>) -> RequirementsModel {
        RequirementsModel::new(dict(), vec![], reqs).unwrap()
    }

    fn trig(id: &str, effects: Vec<Effect>) -> Requirement {
        Requirement {
            id: id.into(),
            title: id.into(),
            template: Template::TriggerOnEvent {
                trigger: Expr::Bool(true),
                response: Response::Effects(effects),
                within: None,
                at_some_point: false,
            },
        }
    }

    fn assign(target: &str, v: i64) -> Effect {
        Effect::Assign {
            target: target.into(),
            value: Expr::Int(v),
        }
    }

    fn becomes(mode: &str) -> Expr {
        Expr::Mode {
            component: "A".into(),
            mode: mode.into(),
            query: ModeQuery::Becomes,
            active: true,
        }
    }

    #[test]
    fn becomes_compares_consecutive_starts() {
        let m = model(vec![]);
        let prev = Env::initial(&m);
        let mut now = prev.clone();
        now.set_mode("A", "Y");
        let ctx = EvalCtx::guard(&m, &now, Some(&prev));
        assert!(ctx.eval_bool(&becomes("Y")).unwrap());
        let ctx = EvalCtx::guard(&m, &now, Some(&now));
        assert!(!ctx.eval_bool(&becomes("Y")).unwrap());
        let ctx = EvalCtx::guard(&m, &prev, None);
        assert!(ctx.eval_bool(&becomes("X")).unwrap());
        assert!(!ctx.eval_bool(&becomes("Y")).unwrap());
    }

    #[test]
    fn end_read_in_guard_context_errors() {
        let m = model(vec![]);
        let env = Env::initial(&m);
        let ctx = EvalCtx::guard(&m, &env, None);
        assert!(matches!(
            ctx.eval(&Expr::mode_at("A", "X", TimePoint::End)),
            Err(EvalError::IllegalEndOfRoundRead(_))
        ));
    }

    #[test]
    fn transition_effect() {
        let r = Requirement {
            id: "1.01".into(),
            title: "X to Y".into(),
            template: Template::TriggerOnEvent {
                trigger: Expr::mode_at("A", "X", TimePoint::Start),
                response: Response::Effects(vec![Effect::Activate {
                    component: "A".into(),
                    mode: "Y".into(),
                }]),
                within: None,
                at_some_point: false,
            },
        };
        let ms = Requirement {
            id: "MS".into(),
            title: "A exclusive".into(),
            template: Template::ModeSet {
                component: "A".into(),
                exclusive: true,
            },
        };
        let m = model(vec![r, ms]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.end_env.sole_mode("A"), Some("Y"));
        assert_eq!(out.changes["A"], vec!["1.01".to_string()]);
    }

    #[test]
    fn conflict_names_both_and_keeps_start() {
        let m = model(vec![
            trig("R1", vec![assign("x", 1)]),
            trig("R2", vec![assign("x", 2)]),
        ]);
        let env = Env::initial(&m);
        let out = fire_round(&m, &env, None);
        assert_eq!(out.violations.len(), 1);
        assert_eq!(out.violations[0].code, ViolationCode::Conflict);
        assert_eq!(out.violations[0].requirements, vec!["R1", "R2"]);
        assert_eq!(out.end_env.signal("x"), &Value::Int(0));
    }

    #[test]
    fn same_value_is_not_a_conflict() {
        let m = model(vec![
            trig("R1", vec![assign("x", 1)]),
            trig("R2", vec![assign("x", 1)]),
        ]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert!(out.violations.is_empty());
        assert_eq!(out.changes["x"], vec!["R1", "R2"]);
    }

    #[test]
    fn range_violation() {
        let m = model(vec![trig("R", vec![assign("x", 6)])]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert_eq!(out.violations[0].code, ViolationCode::Range);
        assert_eq!(out.end_env.signal("x"), &Value::Int(0));
    }

    #[test]
    fn empty_mode_set_violates_exclusivity() {
        let deact = trig(
            "D",
            vec![Effect::Deactivate {
                component: "A".into(),
                mode: "X".into(),
            }],
        );
        let ms = Requirement {
            id: "MS".into(),
            title: "".into(),
            template: Template::ModeSet {
                component: "A".into(),
                exclusive: true,
            },
        };
        let m = model(vec![deact, ms]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert_eq!(out.violations[0].code, ViolationCode::ModeSet);
    }

    #[test]
    fn sync_copies_end_value_and_attributes_both() {
        let up = trig(
            "UP",
            vec![Effect::Assign {
                target: "y".into(),
                value: Expr::bin(BinOp::Add, Expr::r("x"), Expr::Int(3)),
            }],
        );
        let commit = Requirement {
            id: "CM".into(),
            title: "".into(),
            template: Template::TriggerOnEvent {
                trigger: Expr::Bool(true),
                response: Response::Effects(vec![Effect::Sync {
                    target: "x".into(),
                    source: "y".into(),
                }]),
                within: Some(0),
                at_some_point: false,
            },
        };
        let m = model(vec![up, commit]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.end_env.signal("x"), &Value::Int(3));
        assert_eq!(out.changes["x"], vec!["UP", "CM"]);
    }

    #[test]
    fn within_zero_obligation_reported_same_round() {
        let r = Requirement {
            id: "OB".into(),
            title: "".into(),
            template: Template::TriggerOnEvent {
                trigger: Expr::Bool(true),
                response: Response::Require(Expr::eq(Expr::r("x"), Expr::Int(1))),
                within: Some(0),
                at_some_point: false,
            },
        };
        let m = model(vec![r]);
        let out = fire_round(&m, &Env::initial(&m), None);
        assert_eq!(out.violations[0].code, ViolationCode::Obligation);
        assert!(out.end_env.pending.is_empty());
    }

    #[test]
    fn within_two_obligation_waits() {
        let r = Requirement {
            id: "OB".into(),
            title: "".into(),
            template: Template::When {
                guard: Expr::eq(Expr::r("y"), Expr::Int(0)),
                required: Expr::Bool(true),
            },
        };
        let t = Requirement {
            id: "T".into(),
            title: "".into(),
            template: Template::TriggerOnEvent {
                trigger: Expr::eq(Expr::r("x"), Expr::Int(0)),
                response: Response::Require(Expr::eq(Expr::r("x"), Expr::Int(9))),
                within: Some(2),
                at_some_point: false,
            },
        };
        let m = model(vec![r, t]);
        let e0 = Env::initial(&m);
        let r0 = fire_round(&m, &e0, None);
        assert!(r0.violations.is_empty());
        assert_eq!(r0.end_env.pending.len(), 1);
        let run = run_reqs(&m, e0, |_| false, 4, HaltPolicy::Collect);
        assert_eq!(run.end, RunEnd::Budget);
        assert_eq!(run.violations.len(), 3);
        assert!(run
            .violations
            .iter()
            .all(|v| v.code == ViolationCode::Obligation));
    }

    #[test]
    fn empty_model_is_constant() {
        let m = model(vec![]);
        let run = run_reqs(&m, Env::initial(&m), |_| false, 10, HaltPolicy::Halt);
        assert_eq!(run.envs.len(), 10);
        for w in run.envs.windows(2) {
            assert_eq!(w[0].signals, w[1].signals);
            assert_eq!(w[0].modes, w[1].modes);
        }
        assert!(run.changes.iter().all(BTreeMap::is_empty));
    }

    #[test]
    fn stop_predicate_halts_at_flag_round() {
        let m = model(vec![
            Requirement {
                id: "INC".into(),
                title: "".into(),
                template: Template::Every {
                    required: Expr::Bool(true),
                },
            },
            trig(
                "UP",
                vec![Effect::Assign {
                    target: "y".into(),
                    value: Expr::bin(BinOp::Add, Expr::r("y"), Expr::Int(1)),
                }],
            ),
        ]);
        let run = run_reqs(
            &m,
            Env::initial(&m),
            |e| e.signal("y") == &Value::Int(4),
            100,
            HaltPolicy::Halt,
        );
        assert_eq!(run.end, RunEnd::Stopped);
        assert_eq!(run.envs.len(), 5);
    }

    #[test]
    fn ever_is_monotone() {
        let m = model(vec![trig(
            "toY",
            vec![Effect::Activate {
                component: "A".into(),
                mode: "Y".into(),
            }],
        )]);
        let ever_y = Expr::Mode {
            component: "A".into(),
            mode: "Y".into(),
            query: ModeQuery::Ever,
            active: true,
        };
        let run = run_reqs(&m, Env::initial(&m), |_| false, 4, HaltPolicy::Halt);
        let seen: Vec<bool> = run
            .envs
            .iter()
            .map(|e| EvalCtx::guard(&m, e, None).eval_bool(&ever_y).unwrap())
            .collect();
        assert_eq!(seen, vec![false, true, true, true]);
    }
}
