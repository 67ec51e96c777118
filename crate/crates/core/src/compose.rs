use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{Action, Label, Modality, Msca, StateVec, Transition, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("compose requires at least one operand")]
    NoOperands,
    #[error("operand {0} is ill-formed: {1}")]
    IllFormedOperand(usize, Box<Violation>),
    #[error("component index {j} out of range for rank {rank}")]
    IndexOutOfRange { j: usize, rank: usize },
}

/// The single non-idle action of a label, if there is exactly one.
fn single_non_idle(l: &Label) -> Option<(usize, &Action)> {
    let mut found = None;
    for (i, a) in l.0.iter().enumerate() {
        if !a.is_idle() {
            if found.is_some() {
                return None;
            }
            found = Some((i, a));
        }
    }
    found
}

fn match_modality(a: Modality, b: Modality) -> Modality {
    if a == Modality::Urgent || b == Modality::Urgent {
        Modality::Urgent
    } else if a == Modality::Lazy || b == Modality::Lazy {
        Modality::Lazy
    } else {
        Modality::Optional
    }
}

/// Synchronous product of the operands, restricted to its reachable part.
///
/// Complementary request/offer pairs of two distinct operands synchronize
/// into match transitions; a lone move of a transition is excluded exactly
/// when another operand enables a complementary counterpart at the same
/// product state (the match is forced). A product state is final iff every
/// component is final in its operand. The operand list is recorded on the
/// result so principals remain available without re-projection.
pub fn compose(operands: &[Msca]) -> Result<Msca, ComposeError> {
    if operands.is_empty() {
        return Err(ComposeError::NoOperands);
    }
    for (i, op) in operands.iter().enumerate() {
        if let Some(v) = op.validate().into_iter().next() {
            return Err(ComposeError::IllFormedOperand(i, Box::new(v)));
        }
    }

    let rank: usize = operands.iter().map(|o| o.rank).sum();
    let mut offsets = Vec::with_capacity(operands.len());
    let mut acc = 0;
    for op in operands {
        offsets.push(acc);
        acc += op.rank;
    }

    let mut result = Msca::empty(rank);
    result.operands = operands.to_vec();
    if operands.iter().any(|o| o.is_empty()) {
        return Ok(result);
    }

    let slice = |q: &StateVec, i: usize| -> StateVec {
        q.0[offsets[i]..offsets[i] + operands[i].rank]
            .iter()
            .cloned()
            .collect()
    };
    let splice = |q: &StateVec, i: usize, local: &StateVec| -> StateVec {
        let mut out = q.clone();
        out.0[offsets[i]..offsets[i] + operands[i].rank].clone_from_slice(&local.0);
        out
    };

    let initial: StateVec = operands
        .iter()
        .flat_map(|o| o.initial.as_ref().unwrap().0.iter().cloned())
        .collect();

    let mut states: BTreeSet<StateVec> = [initial.clone()].into();
    let mut transitions: BTreeSet<Transition> = BTreeSet::new();
    let mut queue: VecDeque<StateVec> = [initial.clone()].into();

    while let Some(q) = queue.pop_front() {
        let enabled: Vec<(usize, &Transition)> = operands
            .iter()
            .enumerate()
            .flat_map(|(i, op)| {
                let local = slice(&q, i);
                op.transitions
                    .iter()
                    .filter(move |t| t.source == local)
                    .map(move |t| (i, t))
            })
            .collect();

        let mut moves: Vec<Transition> = Vec::new();

        for (n, &(i, ti)) in enabled.iter().enumerate() {
            let Some((pi, ai)) = single_non_idle(&ti.label) else {
                continue;
            };
            for &(k, tk) in &enabled[n + 1..] {
                if k == i {
                    continue;
                }
                let Some((pk, ak)) = single_non_idle(&tk.label) else {
                    continue;
                };
                if ai.matches(ak) {
                    let mut label = vec![Action::Idle; rank];
                    label[offsets[i] + pi] = ai.clone();
                    label[offsets[k] + pk] = ak.clone();
                    let target = splice(&splice(&q, i, &ti.target), k, &tk.target);
                    moves.push(Transition::new(
                        q.clone(),
                        Label(label),
                        target,
                        match_modality(ti.modality, tk.modality),
                    ));
                }
            }
        }

        for &(i, ti) in &enabled {
            if let Some((_, act)) = single_non_idle(&ti.label) {
                let forced = enabled.iter().any(|&(k, tk)| {
                    k != i && single_non_idle(&tk.label).is_some_and(|(_, other)| act.matches(other))
                });
                if forced {
                    continue;
                }
            }
            // Lone move: the operand's components fire, everyone else idles.
            // Operand-internal match labels always interleave.
            let mut label = vec![Action::Idle; rank];
            for (p, a) in ti.label.0.iter().enumerate() {
                label[offsets[i] + p] = a.clone();
            }
            moves.push(Transition::new(
                q.clone(),
                Label(label),
                splice(&q, i, &ti.target),
                ti.modality,
            ));
        }

        for t in moves {
            if states.insert(t.target.clone()) {
                queue.push_back(t.target.clone());
            }
            transitions.insert(t);
        }
    }

    result.finals = states
        .iter()
        .filter(|q| {
            operands
                .iter()
                .enumerate()
                .all(|(i, op)| op.finals.contains(&slice(q, i)))
        })
        .cloned()
        .collect();
    result.initial = Some(initial);
    result.states = states;
    result.transitions = transitions;
    Ok(result)
}

/// Projection onto the j-th principal: keep the j-th component of every
/// state, and every transition whose label is non-idle at j.
///
/// Projected offers are always optional — a lazy match projects to a lazy
/// request on the requester side but to a plain optional offer on the
/// offerer side, matching the principals the composition was built from.
pub fn project(a: &Msca, j: usize) -> Result<Msca, ComposeError> {
    if j >= a.rank {
        return Err(ComposeError::IndexOutOfRange { j, rank: a.rank });
    }
    let local = |q: &StateVec| -> StateVec { [q.0[j].clone()].into_iter().collect() };
    let mut out = Msca::empty(1);
    out.states = a.states.iter().map(&local).collect();
    out.initial = a.initial.as_ref().map(&local);
    out.finals = a.finals.iter().map(&local).collect();
    out.transitions = a
        .transitions
        .iter()
        .filter(|t| !t.label.0[j].is_idle())
        .map(|t| {
            let action = t.label.0[j].clone();
            let modality = match action {
                Action::Offer(_) => Modality::Optional,
                _ => t.modality,
            };
            Transition::new(
                local(&t.source),
                Label(vec![action]),
                local(&t.target),
                modality,
            )
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(parts: &[&str]) -> StateVec {
        parts.iter().copied().collect()
    }

    fn label(parts: &[&str]) -> Label {
        Label(parts.iter().map(|s| Action::parse(s).unwrap()).collect())
    }

    fn tr(source: &[&str], l: &[&str], target: &[&str], m: Modality) -> Transition {
        Transition::new(sv(source), label(l), sv(target), m)
    }

    /// One-state principal with an offer loop !x.
    fn offerer(x: &str) -> Msca {
        Msca {
            rank: 1,
            states: [sv(&["0"])].into(),
            initial: Some(sv(&["0"])),
            finals: [sv(&["0"])].into(),
            transitions: [tr(&["0"], &[&format!("!{x}")], &["0"], Modality::Optional)].into(),
            operands: vec![],
        }
    }

    /// Two-state principal requesting ?x with the given modality.
    fn requester(x: &str, m: Modality) -> Msca {
        Msca {
            rank: 1,
            states: [sv(&["0"]), sv(&["1"])].into(),
            initial: Some(sv(&["0"])),
            finals: [sv(&["1"])].into(),
            transitions: [tr(&["0"], &[&format!("?{x}")], &["1"], m)].into(),
            operands: vec![],
        }
    }

    #[test]
    fn rank_is_additive_and_operands_are_stored() {
        let a = compose(&[offerer("a"), requester("a", Modality::Lazy), offerer("b")]).unwrap();
        assert_eq!(a.rank, 3);
        assert_eq!(a.operands.len(), 3);
    }

    #[test]
    fn forced_match_excludes_lone_moves() {
        let a = compose(&[offerer("a"), requester("a", Modality::Lazy)]).unwrap();
        // At [0,0] both halves of the pair are enabled: only the match
        // fires there. The lone offer reappears at [0,1], where the
        // requester is done and nothing forces it.
        let at_initial: BTreeSet<String> = a
            .outgoing(&sv(&["0", "0"]))
            .map(|t| t.label.to_string())
            .collect();
        assert_eq!(at_initial, ["[!a,?a]".to_owned()].into());
        let at_final: BTreeSet<String> = a
            .outgoing(&sv(&["0", "1"]))
            .map(|t| t.label.to_string())
            .collect();
        assert_eq!(at_final, ["[!a,-]".to_owned()].into());
        // The match inherits the necessary modality of the request.
        let m = a
            .transitions
            .iter()
            .find(|t| t.label.to_string() == "[!a,?a]")
            .unwrap();
        assert_eq!(m.modality, Modality::Lazy);
    }

    #[test]
    fn unmatchable_moves_interleave() {
        let a = compose(&[offerer("a"), requester("b", Modality::Optional)]).unwrap();
        let labels: BTreeSet<String> = a.transitions.iter().map(|t| t.label.to_string()).collect();
        assert!(labels.contains("[!a,-]"));
        assert!(labels.contains("[-,?b]"));
        assert!(!labels.contains("[!a,?b]"));
    }

    #[test]
    fn urgent_wins_match_modality() {
        let a = compose(&[offerer("a"), requester("a", Modality::Urgent)]).unwrap();
        let m = a.transitions.iter().next().unwrap();
        assert_eq!(m.modality, Modality::Urgent);
        assert_eq!(match_modality(Modality::Lazy, Modality::Urgent), Modality::Urgent);
        assert_eq!(match_modality(Modality::Lazy, Modality::Optional), Modality::Lazy);
        assert_eq!(
            match_modality(Modality::Optional, Modality::Optional),
            Modality::Optional
        );
    }

    #[test]
    fn finals_are_componentwise() {
        let a = compose(&[offerer("a"), requester("a", Modality::Lazy)]).unwrap();
        // [0,0] is not final (requester's 0 is not final); [0,1] is.
        assert_eq!(a.finals, [sv(&["0", "1"])].into());
    }

    #[test]
    fn only_reachable_product_states_appear() {
        let a = compose(&[requester("a", Modality::Optional), requester("b", Modality::Optional)])
            .unwrap();
        // No offers anywhere: both requests interleave freely.
        assert_eq!(a.states.len(), 4);
        let b = compose(&[offerer("a"), requester("a", Modality::Lazy)]).unwrap();
        assert_eq!(b.states, [sv(&["0", "0"]), sv(&["0", "1"])].into());
    }

    #[test]
    fn composing_with_an_empty_operand_is_empty() {
        let a = compose(&[offerer("a"), Msca::empty(2)]).unwrap();
        assert!(a.is_empty());
        assert_eq!(a.rank, 3);
    }

    #[test]
    fn empty_operand_list_is_rejected() {
        assert_eq!(compose(&[]), Err(ComposeError::NoOperands));
    }

    #[test]
    fn ill_formed_operand_is_rejected() {
        let mut bad = offerer("a");
        bad.transitions = [tr(&["0"], &["!a"], &["0"], Modality::Lazy)].into();
        assert!(matches!(
            compose(&[bad]),
            Err(ComposeError::IllFormedOperand(0, _))
        ));
    }

    #[test]
    fn project_is_identity_on_reachable_principals() {
        let p = requester("a", Modality::Lazy);
        let mut projected = project(&p, 0).unwrap();
        projected.operands = p.operands.clone();
        assert_eq!(projected, p);
    }

    #[test]
    fn project_keeps_request_modality_and_normalizes_offers() {
        let a = compose(&[offerer("a"), requester("a", Modality::Lazy)]).unwrap();
        let requests = project(&a, 1).unwrap();
        let t = requests.transitions.iter().next().unwrap();
        assert_eq!(t.label.to_string(), "[?a]");
        assert_eq!(t.modality, Modality::Lazy);
        let offers = project(&a, 0).unwrap();
        let t = offers.transitions.iter().next().unwrap();
        assert_eq!(t.label.to_string(), "[!a]");
        assert_eq!(t.modality, Modality::Optional);
    }

    #[test]
    fn project_deduplicates_transitions() {
        let two_requesters = compose(&[
            offerer("a"),
            requester("a", Modality::Lazy),
            requester("a", Modality::Lazy),
        ])
        .unwrap();
        let server_side = project(&two_requesters, 0).unwrap();
        // Both matches project to the same local offer transition.
        let offers: Vec<&Transition> = server_side
            .transitions
            .iter()
            .filter(|t| t.label.to_string() == "[!a]")
            .collect();
        assert_eq!(offers.len(), 1);
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        let p = offerer("a");
        assert_eq!(
            project(&p, 1),
            Err(ComposeError::IndexOutOfRange { j: 1, rank: 1 })
        );
    }
}
