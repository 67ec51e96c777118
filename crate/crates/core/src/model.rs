use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Reserved name for the silent offer used when splitting lazy transitions.
/// It is the only offer that may be urgent (see [`Msca::validate`]).
pub const SILENT_OFFER: &str = "τ";

/// A single component action of a label.
///
/// Variant order matters: the derived `Ord` must agree with the rendered
/// form, where `"!x" < "-" < "?x"` ('!' < '-' < '?' in ASCII).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Offer(String),
    Idle,
    Request(String),
}

impl Action {
    pub fn name(&self) -> Option<&str> {
        match self {
            Action::Offer(n) | Action::Request(n) => Some(n),
            Action::Idle => None,
        }
    }

    pub fn is_idle(&self) -> bool {
        matches!(self, Action::Idle)
    }

    /// Complementary request/offer pair on the same name.
    pub fn matches(&self, other: &Action) -> bool {
        match (self, other) {
            (Action::Request(a), Action::Offer(b)) | (Action::Offer(a), Action::Request(b)) => {
                a == b
            }
            _ => false,
        }
    }

    pub fn parse(s: &str) -> Result<Action, LabelError> {
        if s == "-" {
            return Ok(Action::Idle);
        }
        let (prefix, name) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        if name.is_empty() {
            return Err(LabelError::BadAction(s.to_owned()));
        }
        match prefix {
            "?" => Ok(Action::Request(name.to_owned())),
            "!" => Ok(Action::Offer(name.to_owned())),
            _ => Err(LabelError::BadAction(s.to_owned())),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Offer(n) => write!(f, "!{n}"),
            Action::Idle => write!(f, "-"),
            Action::Request(n) => write!(f, "?{n}"),
        }
    }
}

/// The three admissible label shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LabelClass {
    Request,
    Offer,
    Match,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("bad action {0:?} (expected \"?name\", \"!name\" or \"-\")")]
    BadAction(String),
    #[error("no non-idle action")]
    AllIdle,
    #[error("actions {0} and {1} are not a complementary request/offer pair")]
    UnmatchedPair(Action, Action),
    #[error("{0} non-idle actions (at most one matching pair allowed)")]
    TooManyActions(usize),
}

/// A rank-n vector of actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub Vec<Action>);

impl Label {
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// The unique class of a well-formed label: exactly one request, one
    /// offer, or one complementary pair, everything else idle.
    pub fn classify(&self) -> Result<LabelClass, LabelError> {
        let non_idle: Vec<&Action> = self.0.iter().filter(|a| !a.is_idle()).collect();
        match non_idle.as_slice() {
            [] => Err(LabelError::AllIdle),
            [Action::Request(_)] => Ok(LabelClass::Request),
            [Action::Offer(_)] => Ok(LabelClass::Offer),
            [a, b] if a.matches(b) => Ok(LabelClass::Match),
            [a, b] => Err(LabelError::UnmatchedPair((*a).clone(), (*b).clone())),
            more => Err(LabelError::TooManyActions(more.len())),
        }
    }

    /// Index of the unique request component, if any.
    pub fn requester(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|a| matches!(a, Action::Request(_)))
    }

    /// Index of the unique offer component, if any.
    pub fn offerer(&self) -> Option<usize> {
        self.0.iter().position(|a| matches!(a, Action::Offer(_)))
    }

    /// Name of the action performed (request name, offer name, or the
    /// matched name).
    pub fn action_name(&self) -> Option<&str> {
        self.0.iter().find_map(|a| a.name())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// A rank-n vector of basic states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateVec(pub Vec<String>);

impl StateVec {
    pub fn rank(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(","))
    }
}

impl<S: Into<String>> FromIterator<S> for StateVec {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StateVec(iter.into_iter().map(Into::into).collect())
    }
}

/// Transition modality. Optional transitions are controllable, urgent ones
/// uncontrollable, lazy ones semi-controllable.
///
/// Variant order gives the derived `Ord` used by the canonical ordering,
/// which sorts the serialized names ("lazy" < "optional" < "urgent").
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Lazy,
    Optional,
    Urgent,
}

impl Modality {
    pub fn is_necessary(self) -> bool {
        matches!(self, Modality::Urgent | Modality::Lazy)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Lazy => "lazy",
            Modality::Optional => "optional",
            Modality::Urgent => "urgent",
        }
    }

    /// Figure-style suffix: nothing for optional, box-u / box-l otherwise.
    pub fn suffix(self) -> &'static str {
        match self {
            Modality::Optional => "",
            Modality::Urgent => "□u",
            Modality::Lazy => "□l",
        }
    }

    pub fn parse(s: &str) -> Option<Modality> {
        match s {
            "lazy" => Some(Modality::Lazy),
            "optional" => Some(Modality::Optional),
            "urgent" => Some(Modality::Urgent),
            _ => None,
        }
    }
}

/// Field order matters: the derived `Ord` is the canonical transition
/// ordering (source, label, target, modality).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateVec,
    pub label: Label,
    pub target: StateVec,
    pub modality: Modality,
}

impl Transition {
    pub fn new(source: StateVec, label: Label, target: StateVec, modality: Modality) -> Self {
        Transition {
            source,
            label,
            target,
            modality,
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} --{}{}--> {}",
            self.source,
            self.label,
            self.modality.suffix(),
            self.target
        )
    }
}

/// A modal service contract automaton of rank n.
///
/// `initial` is `None` only for the distinguished empty automaton (no
/// states), which represents "no orchestration". `operands` is non-empty
/// only for automata built by composition; it is carried along so that
/// principals need not be re-derived by projection.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Msca {
    pub rank: usize,
    pub states: BTreeSet<StateVec>,
    pub initial: Option<StateVec>,
    pub finals: BTreeSet<StateVec>,
    pub transitions: BTreeSet<Transition>,
    pub operands: Vec<Msca>,
}

impl Msca {
    /// The distinguished empty automaton of the given rank.
    pub fn empty(rank: usize) -> Msca {
        Msca {
            rank,
            ..Msca::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn request_alphabet(&self) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .flat_map(|t| t.label.0.iter())
            .filter_map(|a| match a {
                Action::Request(n) => Some(n.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn offer_alphabet(&self) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .flat_map(|t| t.label.0.iter())
            .filter_map(|a| match a {
                Action::Offer(n) => Some(n.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Outgoing transitions of `state`, in canonical order.
    pub fn outgoing<'a>(&'a self, state: &'a StateVec) -> impl Iterator<Item = &'a Transition> {
        self.transitions.iter().filter(move |t| t.source == *state)
    }

    pub fn lazy_transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions
            .iter()
            .filter(|t| t.modality == Modality::Lazy)
    }

    pub fn necessary_transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions
            .iter()
            .filter(|t| t.modality.is_necessary())
    }

    /// Structural well-formedness check. Returns every violation found;
    /// an empty report means the automaton is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();

        if self.is_empty() {
            // The empty automaton is legal but must be uniformly empty.
            if self.initial.is_some() {
                report.push(Violation::InitialNotAState(self.initial.clone().unwrap()));
            }
            for q in &self.finals {
                report.push(Violation::FinalNotAState(q.clone()));
            }
            for t in &self.transitions {
                report.push(Violation::EndpointNotAState(t.clone()));
            }
            return report;
        }

        match &self.initial {
            None => report.push(Violation::MissingInitial),
            Some(q) => {
                if !self.states.contains(q) {
                    report.push(Violation::InitialNotAState(q.clone()));
                }
            }
        }
        for q in &self.states {
            if q.rank() != self.rank {
                report.push(Violation::StateRank(q.clone(), self.rank));
            }
        }
        for q in &self.finals {
            if !self.states.contains(q) {
                report.push(Violation::FinalNotAState(q.clone()));
            }
        }
        for t in &self.transitions {
            if !self.states.contains(&t.source) || !self.states.contains(&t.target) {
                report.push(Violation::EndpointNotAState(t.clone()));
            }
            if t.label.rank() != self.rank {
                report.push(Violation::LabelRank(t.clone(), self.rank));
            }
            for a in &t.label.0 {
                if a.name() == Some("") {
                    report.push(Violation::EmptyActionName(t.clone()));
                }
            }
            match t.label.classify() {
                Err(e) => report.push(Violation::IllFormedLabel(t.clone(), e)),
                Ok(LabelClass::Offer) => {
                    // Offers must be optional; the one exception is the
                    // reserved urgent silent offer produced by split_lazy.
                    let silent_urgent = t.label.action_name() == Some(SILENT_OFFER)
                        && t.modality == Modality::Urgent;
                    if t.modality != Modality::Optional && !silent_urgent {
                        report.push(Violation::NecessaryOffer(t.clone()));
                    }
                }
                Ok(_) => {}
            }
            for (i, a) in t.label.0.iter().enumerate() {
                if a.is_idle()
                    && t.source.0.get(i) != t.target.0.get(i)
                    && t.source.rank() == self.rank
                    && t.target.rank() == self.rank
                {
                    report.push(Violation::IdleComponentMoves(t.clone(), i));
                }
            }
        }
        report
    }

    pub fn is_well_formed(&self) -> bool {
        self.validate().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("missing initial state")]
    MissingInitial,
    #[error("initial state {0} is not in the state set")]
    InitialNotAState(StateVec),
    #[error("final state {0} is not in the state set")]
    FinalNotAState(StateVec),
    #[error("transition endpoint not in the state set: {0}")]
    EndpointNotAState(Transition),
    #[error("state {0} has rank different from {1}")]
    StateRank(StateVec, usize),
    #[error("label of {0} has rank different from {1}")]
    LabelRank(Transition, usize),
    #[error("empty action name in {0}")]
    EmptyActionName(Transition),
    #[error("ill-formed label in {0}: {1}")]
    IllFormedLabel(Transition, LabelError),
    #[error("offer must be optional: {0}")]
    NecessaryOffer(Transition),
    #[error("idle component {1} must not change state: {0}")]
    IdleComponentMoves(Transition, usize),
}
