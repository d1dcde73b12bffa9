use std::fmt;

use serde::Serialize;

/// Identifies the rule a [`Violation`] reports against.
///
/// The structural FSM catalogue comes first so that sorting by code yields
/// `C1.1 .. C1.8, C2 .. C12` rather than string order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationCode {
    C1_1,
    C1_2,
    C1_3,
    C1_4,
    C1_5,
    C1_6,
    C1_7,
    C1_8,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
    C10,
    C11,
    C12,
    Totality,
    Roster,
    /// Two requirements assigned different values to one record in a round.
    Conflict,
    /// An exclusive mode component ended a round without exactly one active mode.
    ModeSet,
    /// A monitored condition (Every, When, Trigger On Change) was breached.
    Monitor,
    /// A Within-N obligation expired unsatisfied.
    Obligation,
    /// A bounded integer record was assigned outside its range.
    Range,
    /// A total Case requirement matched no branch.
    CaseUnmatched,
    /// An expression failed to evaluate at run time.
    Eval,
    /// An operational step broke its post-condition contract.
    PostCondition,
}

impl ViolationCode {
    /// The structural constraints checked against a transition table.
    pub const CATALOGUE: [ViolationCode; 19] = [
        Self::C1_1,
        Self::C1_2,
        Self::C1_3,
        Self::C1_4,
        Self::C1_5,
        Self::C1_6,
        Self::C1_7,
        Self::C1_8,
        Self::C2,
        Self::C3,
        Self::C4,
        Self::C5,
        Self::C6,
        Self::C7,
        Self::C8,
        Self::C9,
        Self::C10,
        Self::C11,
        Self::C12,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::C1_1 => "C1.1",
            Self::C1_2 => "C1.2",
            Self::C1_3 => "C1.3",
            Self::C1_4 => "C1.4",
            Self::C1_5 => "C1.5",
            Self::C1_6 => "C1.6",
            Self::C1_7 => "C1.7",
            Self::C1_8 => "C1.8",
            Self::C2 => "C2",
            Self::C3 => "C3",
            Self::C4 => "C4",
            Self::C5 => "C5",
            Self::C6 => "C6",
            Self::C7 => "C7",
            Self::C8 => "C8",
            Self::C9 => "C9",
            Self::C10 => "C10",
            Self::C11 => "C11",
            Self::C12 => "C12",
            Self::Totality => "TOTALITY",
            Self::Roster => "ROSTER",
            Self::Conflict => "CONFLICT",
            Self::ModeSet => "MODESET",
            Self::Monitor => "MONITOR",
            Self::Obligation => "OBLIGATION",
            Self::Range => "RANGE",
            Self::CaseUnmatched => "CASE",
            Self::Eval => "EVAL",
            Self::PostCondition => "POST",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::CATALOGUE
            .iter()
            .chain(&[
                Self::Totality,
                Self::Roster,
                Self::Conflict,
                Self::ModeSet,
                Self::Monitor,
                Self::Obligation,
                Self::Range,
                Self::CaseUnmatched,
                Self::Eval,
                Self::PostCondition,
            ])
            .copied()
            .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A uniform report item. Checkers never abort on the first finding; they
/// return every violation as data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub event: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    /// Requirement ids involved, for violations raised by the requirements engine.
    pub requirements: Vec<String>,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Violation {
            code,
            event: None,
            from: None,
            to: None,
            requirements: Vec::new(),
            message: message.into(),
        }
    }

    pub fn at(mut self, event: Option<&str>, from: Option<&str>, to: Option<&str>) -> Self {
        self.event = event.map(str::to_owned);
        self.from = from.map(str::to_owned);
        self.to = to.map(str::to_owned);
        self
    }

    pub fn with_requirements<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.requirements = ids.into_iter().map(Into::into).collect();
        self
    }

    /// Ordering key used to make violation lists reproducible.
    pub fn sort_key(&self) -> (ViolationCode, Option<&str>, Option<&str>) {
        (self.code, self.event.as_deref(), self.from.as_deref())
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.code)?;
        if let Some(e) = &self.event {
            write!(f, " event={e}")?;
        }
        if let Some(s) = &self.from {
            write!(f, " from={s}")?;
        }
        if let Some(t) = &self.to {
            write!(f, " to={t}")?;
        }
        if !self.requirements.is_empty() {
            write!(f, " reqs={}", self.requirements.join(","))?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Sorts violations by (code, event, from) in place.
pub fn sort_violations(v: &mut [Violation]) {
    v.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}
