use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::control::{is_controllable, ControlError, Semantics};
use crate::model::{
    Action, Label, LabelClass, Modality, Msca, StateVec, Transition, Violation, SILENT_OFFER,
};
use crate::reach::dangling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ForbiddenReason {
    Uncontrollable,
    Dangling,
}

impl ForbiddenReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ForbiddenReason::Uncontrollable => "uncontrollable",
            ForbiddenReason::Dangling => "dangling",
        }
    }
}

/// One consulted controllability verdict. Under mpc the verdict records
/// whether the necessary transition is still part of the candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    pub transition: Transition,
    pub controllable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub index: usize,
    pub removed_transitions: BTreeSet<Transition>,
    pub newly_forbidden: BTreeMap<StateVec, ForbiddenReason>,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrimRecord {
    pub removed_states: BTreeSet<StateVec>,
    pub removed_transitions: BTreeSet<Transition>,
}

/// Full record of a synthesis run: what each iteration removed and
/// forbade, where the fixpoint was reached, and what the final trim
/// discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisTrace {
    pub semantics: Semantics,
    pub initial_forbidden: BTreeSet<StateVec>,
    pub iterations: Vec<IterationRecord>,
    pub fixpoint_index: usize,
    pub final_trim: TrimRecord,
    pub empty_result: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("input is ill-formed: {0}")]
    IllFormed(Box<Violation>),
    #[error("urgent transitions are not supported under the {0} semantics: {1}")]
    UrgentNotSupported(Semantics, Transition),
    #[error("the reserved silent offer name {SILENT_OFFER:?} is already in the alphabet")]
    ReservedNameInUse,
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Orchestration synthesis: iteratively prune requests and transitions
/// into forbidden states, forbid sources of uncontrollable necessary
/// transitions and dangling states, and on reaching the fixpoint cut the
/// forbidden states out. Returns the empty automaton when the initial
/// state itself ends up forbidden.
pub fn synthesize(a: &Msca, sem: Semantics) -> Result<(Msca, SynthesisTrace), SynthError> {
    if let Some(v) = a.validate().into_iter().next() {
        return Err(SynthError::IllFormed(Box::new(v)));
    }
    if sem != Semantics::Mpc {
        if let Some(t) = a
            .transitions
            .iter()
            .find(|t| t.modality == Modality::Urgent)
        {
            return Err(SynthError::UrgentNotSupported(sem, t.clone()));
        }
    }

    let initial_forbidden = dangling(a);
    let mut forbidden = initial_forbidden.clone();
    let mut kept = a.transitions.clone();
    let mut iterations: Vec<IterationRecord> = Vec::new();

    let fixpoint_index = loop {
        let index = iterations.len() + 1;
        let next_kept: BTreeSet<Transition> = kept
            .iter()
            .filter(|t| {
                !forbidden.contains(&t.target) && t.label.classify() != Ok(LabelClass::Request)
            })
            .cloned()
            .collect();
        let removed_transitions: BTreeSet<Transition> =
            kept.difference(&next_kept).cloned().collect();

        let candidate = Msca {
            rank: a.rank,
            states: a.states.clone(),
            initial: a.initial.clone(),
            finals: a.finals.clone(),
            transitions: next_kept.clone(),
            operands: a.operands.clone(),
        };

        let mut checks = Vec::new();
        let mut newly_forbidden: BTreeMap<StateVec, ForbiddenReason> = BTreeMap::new();
        if sem == Semantics::Mpc {
            // The controller may not block a necessary transition, so a
            // pruned necessary transition forbids its source instead.
            for t in a.necessary_transitions() {
                let still_present = next_kept.contains(t);
                checks.push(CheckRecord {
                    transition: t.clone(),
                    controllable: still_present,
                });
                if !still_present && !forbidden.contains(&t.source) {
                    newly_forbidden.insert(t.source.clone(), ForbiddenReason::Uncontrollable);
                }
            }
        } else {
            // Every lazy transition of the original automaton is re-judged
            // against the current candidate, pruned ones included.
            for t in a.lazy_transitions() {
                let verdict = is_controllable(t, a, &candidate, None, sem)?;
                checks.push(CheckRecord {
                    transition: t.clone(),
                    controllable: verdict.controllable,
                });
                if !verdict.controllable && !forbidden.contains(&t.source) {
                    newly_forbidden.insert(t.source.clone(), ForbiddenReason::Uncontrollable);
                }
            }
        }
        for q in dangling(&candidate) {
            if !forbidden.contains(&q) {
                newly_forbidden
                    .entry(q)
                    .or_insert(ForbiddenReason::Dangling);
            }
        }

        let at_fixpoint = next_kept == kept && newly_forbidden.is_empty();
        kept = next_kept;
        forbidden.extend(newly_forbidden.keys().cloned());
        iterations.push(IterationRecord {
            index,
            removed_transitions,
            newly_forbidden,
            checks,
        });
        if at_fixpoint {
            break index;
        }
    };

    let blocked = match &a.initial {
        None => true,
        Some(q0) => forbidden.contains(q0),
    };
    let (result, final_trim) = if blocked {
        let trim = TrimRecord {
            removed_states: a.states.clone(),
            removed_transitions: kept.clone(),
        };
        (Msca::empty(a.rank), trim)
    } else {
        let survivors: BTreeSet<Transition> = kept
            .iter()
            .filter(|t| !forbidden.contains(&t.source) && !forbidden.contains(&t.target))
            .cloned()
            .collect();
        let mut live = Msca::empty(a.rank);
        live.initial = a.initial.clone();
        live.states = [a.initial.clone().unwrap()].into();
        live.transitions = survivors;
        // Keep only the part still reachable from the initial state.
        let mut queue: VecDeque<StateVec> = [a.initial.clone().unwrap()].into();
        while let Some(q) = queue.pop_front() {
            let next: Vec<StateVec> = live
                .transitions
                .iter()
                .filter(|t| t.source == q)
                .map(|t| t.target.clone())
                .collect();
            for target in next {
                if live.states.insert(target.clone()) {
                    queue.push_back(target);
                }
            }
        }
        live.transitions = live
            .transitions
            .iter()
            .filter(|t| live.states.contains(&t.source))
            .cloned()
            .collect();
        live.finals = a.finals.intersection(&live.states).cloned().collect();
        let trim = TrimRecord {
            removed_states: a.states.difference(&live.states).cloned().collect(),
            removed_transitions: kept.difference(&live.transitions).cloned().collect(),
        };
        (live, trim)
    };

    let trace = SynthesisTrace {
        semantics: sem,
        initial_forbidden,
        iterations,
        fixpoint_index,
        empty_result: result.is_empty(),
        final_trim,
    };
    Ok((result, trace))
}

/// Split every lazy transition t = (q⃗, a⃗, q⃗′) with requester j into an
/// urgent silent step t₁ = (q⃗, [!τ at j], ı⃗) and an optional completion
/// t₂ = (ı⃗, a⃗, q⃗′), where ı⃗ is a fresh non-final state differing from q⃗
/// only at component j.
pub fn split_lazy(a: &Msca) -> Result<Msca, SynthError> {
    if let Some(v) = a.validate().into_iter().next() {
        return Err(SynthError::IllFormed(Box::new(v)));
    }
    if a.request_alphabet().contains(SILENT_OFFER) || a.offer_alphabet().contains(SILENT_OFFER) {
        return Err(SynthError::ReservedNameInUse);
    }

    let mut out = a.clone();
    out.operands = Vec::new();
    let mut counter = 0usize;
    for t in a.lazy_transitions() {
        let Some(j) = t.label.requester() else {
            continue;
        };
        let intermediate = loop {
            let mut q = t.source.clone();
            q.0[j] = format!("{}+lz{}", t.source.0[j], counter);
            counter += 1;
            if !a.states.contains(&q) && !out.states.contains(&q) {
                break q;
            }
        };
        let mut silent = vec![Action::Idle; a.rank];
        silent[j] = Action::Offer(SILENT_OFFER.to_owned());
        out.transitions.remove(t);
        out.transitions.insert(Transition::new(
            t.source.clone(),
            Label(silent),
            intermediate.clone(),
            Modality::Urgent,
        ));
        out.transitions.insert(Transition::new(
            intermediate.clone(),
            t.label.clone(),
            t.target.clone(),
            Modality::Optional,
        ));
        out.states.insert(intermediate);
    }
    Ok(out)
}

/// Structural difference between two automata, plus a canonical-form
/// equality check of their reachable parts. Stored operands are not
/// compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub rank_mismatch: Option<(usize, usize)>,
    pub initial_differs: Option<(Option<StateVec>, Option<StateVec>)>,
    pub states_only_in_a: BTreeSet<StateVec>,
    pub states_only_in_b: BTreeSet<StateVec>,
    pub finals_only_in_a: BTreeSet<StateVec>,
    pub finals_only_in_b: BTreeSet<StateVec>,
    pub transitions_only_in_a: BTreeSet<Transition>,
    pub transitions_only_in_b: BTreeSet<Transition>,
    pub isomorphic_after_renaming: bool,
}

impl DiffReport {
    pub fn is_identical(&self) -> bool {
        self.rank_mismatch.is_none()
            && self.initial_differs.is_none()
            && self.states_only_in_a.is_empty()
            && self.states_only_in_b.is_empty()
            && self.finals_only_in_a.is_empty()
            && self.finals_only_in_b.is_empty()
            && self.transitions_only_in_a.is_empty()
            && self.transitions_only_in_b.is_empty()
    }
}

/// Reachable part with states renamed to BFS discovery numbers; equal
/// canonical forms mean the automata differ only by state names.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CanonicalForm {
    rank: usize,
    finals: BTreeSet<usize>,
    transitions: BTreeSet<(usize, Label, usize, Modality)>,
}

fn canonical_form(a: &Msca) -> CanonicalForm {
    let mut number: BTreeMap<StateVec, usize> = BTreeMap::new();
    if let Some(q0) = &a.initial {
        let mut queue: VecDeque<StateVec> = [q0.clone()].into();
        number.insert(q0.clone(), 0);
        while let Some(q) = queue.pop_front() {
            for t in a.outgoing(&q) {
                if !number.contains_key(&t.target) {
                    number.insert(t.target.clone(), number.len());
                    queue.push_back(t.target.clone());
                }
            }
        }
    }
    CanonicalForm {
        rank: a.rank,
        finals: a
            .finals
            .iter()
            .filter_map(|q| number.get(q).copied())
            .collect(),
        transitions: a
            .transitions
            .iter()
            .filter_map(|t| {
                let s = number.get(&t.source)?;
                let g = number.get(&t.target)?;
                Some((*s, t.label.clone(), *g, t.modality))
            })
            .collect(),
    }
}

pub fn compare(a: &Msca, b: &Msca) -> DiffReport {
    DiffReport {
        rank_mismatch: (a.rank != b.rank).then_some((a.rank, b.rank)),
        initial_differs: (a.initial != b.initial)
            .then(|| (a.initial.clone(), b.initial.clone())),
        states_only_in_a: a.states.difference(&b.states).cloned().collect(),
        states_only_in_b: b.states.difference(&a.states).cloned().collect(),
        finals_only_in_a: a.finals.difference(&b.finals).cloned().collect(),
        finals_only_in_b: b.finals.difference(&a.finals).cloned().collect(),
        transitions_only_in_a: a.transitions.difference(&b.transitions).cloned().collect(),
        transitions_only_in_b: b.transitions.difference(&a.transitions).cloned().collect(),
        isomorphic_after_renaming: a.rank == b.rank && canonical_form(a) == canonical_form(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::compose;

    fn sv(parts: &[&str]) -> StateVec {
        parts.iter().copied().collect()
    }

    fn tr(source: &[&str], l: &[&str], target: &[&str], m: Modality) -> Transition {
        Transition::new(
            sv(source),
            Label(l.iter().map(|s| Action::parse(s).unwrap()).collect()),
            sv(target),
            m,
        )
    }

    fn principal(states: &[&str], initial: &str, finals: &[&str], ts: &[Transition]) -> Msca {
        Msca {
            rank: 1,
            states: states.iter().map(|s| sv(&[s])).collect(),
            initial: Some(sv(&[initial])),
            finals: finals.iter().map(|s| sv(&[s])).collect(),
            transitions: ts.iter().cloned().collect(),
            operands: vec![],
        }
    }

    /// Client1 of the bundled corpus: optional request, both states final.
    fn client(modality: Modality) -> Msca {
        principal(
            &["0", "1"],
            "0",
            &["0", "1"],
            &[
                tr(&["0"], &["!b"], &["0"], Modality::Optional),
                tr(&["0"], &["?a"], &["1"], modality),
            ],
        )
    }

    #[test]
    fn optional_clients_keep_their_offer_loops() {
        let a = compose(&[client(Modality::Optional), client(Modality::Optional)]).unwrap();
        let (o, trace) = synthesize(&a, Semantics::Original).unwrap();
        assert_eq!(o.states, [sv(&["0", "0"])].into());
        assert_eq!(o.finals, [sv(&["0", "0"])].into());
        let labels: Vec<String> = o.transitions.iter().map(|t| t.label.to_string()).collect();
        assert_eq!(labels, ["[!b,-]", "[-,!b]"]);
        assert!(!trace.empty_result);
    }

    #[test]
    fn unmatched_necessary_requests_kill_the_orchestration() {
        let a = compose(&[client(Modality::Lazy), client(Modality::Lazy)]).unwrap();
        let (o, trace) = synthesize(&a, Semantics::Original).unwrap();
        assert!(o.is_empty());
        assert!(trace.empty_result);
        assert_eq!(o.rank, 2);
    }

    #[test]
    fn urgent_inputs_are_rejected_outside_mpc() {
        let a = compose(&[client(Modality::Urgent), client(Modality::Urgent)]).unwrap();
        for sem in [Semantics::Original, Semantics::Refined, Semantics::Forall] {
            assert!(matches!(
                synthesize(&a, sem),
                Err(SynthError::UrgentNotSupported(s, _)) if s == sem
            ));
        }
        assert!(synthesize(&a, Semantics::Mpc).is_ok());
    }

    #[test]
    fn mpc_forbids_sources_of_pruned_urgent_transitions() {
        let a = compose(&[client(Modality::Urgent), client(Modality::Urgent)]).unwrap();
        let (o, trace) = synthesize(&a, Semantics::Mpc).unwrap();
        assert!(o.is_empty());
        // The urgent requests are pruned in iteration 1, forbidding their
        // sources, among them the initial state.
        let reasons = &trace.iterations[0].newly_forbidden;
        assert_eq!(
            reasons.get(&sv(&["0", "0"])),
            Some(&ForbiddenReason::Uncontrollable)
        );
    }

    #[test]
    fn trace_counts_iterations_from_one_and_marks_the_fixpoint() {
        let a = compose(&[client(Modality::Optional), client(Modality::Optional)]).unwrap();
        let (_, trace) = synthesize(&a, Semantics::Original).unwrap();
        assert_eq!(trace.iterations[0].index, 1);
        assert_eq!(trace.fixpoint_index, trace.iterations.len());
        let last = trace.iterations.last().unwrap();
        assert!(last.removed_transitions.is_empty());
        assert!(last.newly_forbidden.is_empty());
        assert!(trace.fixpoint_index <= a.transitions.len() + a.states.len() + 1);
    }

    #[test]
    fn synthesizing_the_empty_automaton_stays_empty() {
        let (o, trace) = synthesize(&Msca::empty(2), Semantics::Original).unwrap();
        assert!(o.is_empty());
        assert!(trace.empty_result);
        assert_eq!(trace.fixpoint_index, 1);
    }

    #[test]
    fn split_lazy_produces_an_urgent_silent_step_and_an_optional_completion() {
        let a = principal(
            &["0", "1"],
            "0",
            &["1"],
            &[tr(&["0"], &["?a"], &["1"], Modality::Lazy)],
        );
        let split = split_lazy(&a).unwrap();
        assert!(split.is_well_formed());
        assert_eq!(split.states.len(), a.states.len() + 1);
        assert_eq!(split.lazy_transitions().count(), 0);
        let t1 = tr(&["0"], &["!τ"], &["0+lz0"], Modality::Urgent);
        let t2 = tr(&["0+lz0"], &["?a"], &["1"], Modality::Optional);
        assert!(split.transitions.contains(&t1));
        assert!(split.transitions.contains(&t2));
        assert!(!split.finals.contains(&sv(&["0+lz0"])));
    }

    #[test]
    fn split_lazy_is_identity_without_lazy_transitions() {
        let a = client(Modality::Optional);
        let split = split_lazy(&a).unwrap();
        assert_eq!(split.transitions, a.transitions);
        assert_eq!(split.states, a.states);
    }

    #[test]
    fn split_lazy_rejects_a_used_silent_name() {
        let a = principal(
            &["0", "1"],
            "0",
            &["1"],
            &[tr(&["0"], &["!τ"], &["1"], Modality::Optional)],
        );
        assert_eq!(split_lazy(&a), Err(SynthError::ReservedNameInUse));
    }

    #[test]
    fn compare_is_empty_on_equal_automata_and_ignores_operands() {
        let a = compose(&[client(Modality::Optional), client(Modality::Optional)]).unwrap();
        let mut b = a.clone();
        b.operands = vec![];
        let report = compare(&a, &b);
        assert!(report.is_identical());
        assert!(report.isomorphic_after_renaming);
    }

    #[test]
    fn compare_reports_directional_differences() {
        let a = client(Modality::Optional);
        let mut b = a.clone();
        let extra = tr(&["1"], &["!c"], &["1"], Modality::Optional);
        b.transitions.insert(extra.clone());
        let report = compare(&a, &b);
        assert!(!report.is_identical());
        assert_eq!(report.transitions_only_in_b, [extra].into());
        assert!(report.transitions_only_in_a.is_empty());
        assert!(!report.isomorphic_after_renaming);
    }

    #[test]
    fn renamed_states_are_isomorphic_but_not_identical() {
        let a = client(Modality::Optional);
        let b = principal(
            &["x", "y"],
            "x",
            &["x", "y"],
            &[
                tr(&["x"], &["!b"], &["x"], Modality::Optional),
                tr(&["x"], &["?a"], &["y"], Modality::Optional),
            ],
        );
        let report = compare(&a, &b);
        assert!(!report.is_identical());
        assert!(report.isomorphic_after_renaming);
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let a = client(Modality::Optional);
        let b = compose(&[client(Modality::Optional), client(Modality::Optional)]).unwrap();
        let report = compare(&a, &b);
        assert_eq!(report.rank_mismatch, Some((1, 2)));
        assert!(!report.isomorphic_after_renaming);
    }
}
