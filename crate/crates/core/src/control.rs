use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::compose::{project, ComposeError};
use crate::model::{Action, LabelClass, Modality, Msca, StateVec, Transition};
use crate::reach::{dangling, reachable_via_idle_with_paths};

/// The four controllability notions a synthesis run can be driven by.
///
/// Under `Original` a lazy transition is controllable when a necessary
/// match on the same request exists anywhere live; `Refined` additionally
/// demands the match be reachable from the transition's source while the
/// requester idles; `Forall` asks for one anchor state from which every
/// lazy request the principal could make at that local state is served;
/// `Mpc` treats every necessary transition as urgent, yielding the most
/// permissive controller for fully uncontrollable requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Semantics {
    Original,
    Refined,
    Forall,
    Mpc,
}

impl Semantics {
    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Original => "original",
            Semantics::Refined => "refined",
            Semantics::Forall => "forall",
            Semantics::Mpc => "mpc",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Semantics::Original),
            "refined" => Ok(Semantics::Refined),
            "forall" => Ok(Semantics::Forall),
            "mpc" => Ok(Semantics::Mpc),
            other => Err(format!(
                "unknown semantics {other:?} (expected original, refined, forall or mpc)"
            )),
        }
    }
}

/// One matching transition justifying controllability, with the idle
/// prefix that reaches it where the semantics requires one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchWitness {
    pub witness_transition: Transition,
    pub idle_path: Option<Vec<Transition>>,
}

/// Justification attached to a controllable verdict on a lazy transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Anchor state the matches are reached from (forall only).
    pub anchor: Option<StateVec>,
    /// One entry under original/refined; one per required request name
    /// under forall (possibly none when nothing is required).
    pub matches: Vec<MatchWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllabilityVerdict {
    pub controllable: bool,
    pub witness: Option<Witness>,
}

impl ControllabilityVerdict {
    fn uncontrollable() -> Self {
        ControllabilityVerdict {
            controllable: false,
            witness: None,
        }
    }

    fn controllable(witness: Option<Witness>) -> Self {
        ControllabilityVerdict {
            controllable: true,
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("transition not in the automaton: {0}")]
    TransitionNotInAutomaton(Transition),
    #[error("not a sub-automaton: {0} transition(s) missing from the reference automaton")]
    NotSubAutomaton(usize),
    #[error("expected {expected} rank-1 principals, got {got}")]
    InvalidPrincipals { expected: usize, got: usize },
    #[error(transparent)]
    Projection(#[from] ComposeError),
}

/// Decide whether transition `t` of `a` is controllable within the
/// sub-automaton `a_prime`. `principals` is consulted only by the forall
/// semantics; when absent, principals come from the operands recorded at
/// composition time, or failing that from projection.
pub fn is_controllable(
    t: &Transition,
    a: &Msca,
    a_prime: &Msca,
    principals: Option<&[Msca]>,
    sem: Semantics,
) -> Result<ControllabilityVerdict, ControlError> {
    if !a.transitions.contains(t) {
        return Err(ControlError::TransitionNotInAutomaton(t.clone()));
    }
    let missing = a_prime.transitions.difference(&a.transitions).count();
    if missing > 0 {
        return Err(ControlError::NotSubAutomaton(missing));
    }

    match t.modality {
        Modality::Optional => Ok(ControllabilityVerdict::controllable(None)),
        Modality::Urgent => Ok(ControllabilityVerdict::uncontrollable()),
        Modality::Lazy => match sem {
            Semantics::Mpc => Ok(ControllabilityVerdict::uncontrollable()),
            Semantics::Original => Ok(original(t, a_prime)),
            Semantics::Refined => Ok(refined(t, a_prime)),
            Semantics::Forall => forall(t, a, a_prime, principals),
        },
    }
}

/// A matching transition serves `t` when it is a match on the same
/// request name, taken from the same local state of the requester.
fn serves(t2: &Transition, j: usize, local: &str, name: &str) -> bool {
    t2.label.classify() == Ok(LabelClass::Match)
        && t2.source.0.get(j).is_some_and(|q| q == local)
        && t2.label.0.get(j) == Some(&Action::Request(name.to_owned()))
}

fn original(t: &Transition, a_prime: &Msca) -> ControllabilityVerdict {
    let Some(j) = t.label.requester() else {
        return ControllabilityVerdict::uncontrollable();
    };
    let local = &t.source.0[j];
    let name = t.label.0[j].name().unwrap();
    let bad = dangling(a_prime);
    // Canonical set order makes the first hit the least witness.
    for t2 in a_prime.necessary_transitions() {
        if serves(t2, j, local, name) && !bad.contains(&t2.source) && !bad.contains(&t2.target) {
            return ControllabilityVerdict::controllable(Some(Witness {
                anchor: None,
                matches: vec![MatchWitness {
                    witness_transition: t2.clone(),
                    idle_path: None,
                }],
            }));
        }
    }
    ControllabilityVerdict::uncontrollable()
}

fn refined(t: &Transition, a_prime: &Msca) -> ControllabilityVerdict {
    let Some(j) = t.label.requester() else {
        return ControllabilityVerdict::uncontrollable();
    };
    let local = &t.source.0[j];
    let name = t.label.0[j].name().unwrap();
    let reachable = reachable_via_idle_with_paths(a_prime, &t.source, j, &BTreeSet::new());
    for (t2, path) in &reachable {
        if t2.modality == Modality::Lazy && serves(t2, j, local, name) {
            return ControllabilityVerdict::controllable(Some(Witness {
                anchor: None,
                matches: vec![MatchWitness {
                    witness_transition: t2.clone(),
                    idle_path: Some(path.clone()),
                }],
            }));
        }
    }
    ControllabilityVerdict::uncontrollable()
}

fn forall(
    t: &Transition,
    a: &Msca,
    a_prime: &Msca,
    principals: Option<&[Msca]>,
) -> Result<ControllabilityVerdict, ControlError> {
    let Some(j) = t.label.requester() else {
        return Ok(ControllabilityVerdict::uncontrollable());
    };
    let local = &t.source.0[j];
    let principal = resolve_principal(a, principals, j)?;

    // Every request the principal may lazily make from this local state
    // must be served from one common anchor.
    let required: BTreeSet<&str> = principal
        .transitions
        .iter()
        .filter(|pt| {
            pt.modality == Modality::Lazy
                && pt.source.0[0] == *local
                && matches!(pt.label.0[0], Action::Request(_))
        })
        .filter_map(|pt| pt.label.action_name())
        .collect();

    let bad = dangling(a_prime);
    for anchor in a_prime.states.iter().filter(|q| !bad.contains(*q)) {
        let reachable = reachable_via_idle_with_paths(a_prime, anchor, j, &BTreeSet::new());
        let mut matches = Vec::with_capacity(required.len());
        for name in &required {
            let found = reachable.iter().find(|(t2, _)| {
                t2.modality == Modality::Lazy && serves(t2, j, local, name)
            });
            match found {
                Some((t2, path)) => matches.push(MatchWitness {
                    witness_transition: t2.clone(),
                    idle_path: Some(path.clone()),
                }),
                None => break,
            }
        }
        if matches.len() == required.len() {
            return Ok(ControllabilityVerdict::controllable(Some(Witness {
                anchor: Some(anchor.clone()),
                matches,
            })));
        }
    }
    Ok(ControllabilityVerdict::uncontrollable())
}

fn resolve_principal(
    a: &Msca,
    principals: Option<&[Msca]>,
    j: usize,
) -> Result<Msca, ControlError> {
    if let Some(ps) = principals {
        if ps.len() != a.rank || ps.iter().any(|p| p.rank != 1) {
            return Err(ControlError::InvalidPrincipals {
                expected: a.rank,
                got: ps.len(),
            });
        }
        return Ok(ps[j].clone());
    }
    if a.operands.len() == a.rank && a.operands.iter().all(|o| o.rank == 1) {
        return Ok(a.operands[j].clone());
    }
    Ok(project(a, j)?)
}
