use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{LabelClass, Msca, StateVec, Transition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Draw uniformly over the outgoing transitions (ChaCha8 PRNG, seeded).
    Random,
    /// Take the i-th outgoing transition (canonical order) at each step;
    /// the walk stops when the script runs out.
    Scripted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("cannot walk the empty automaton")]
    EmptyAutomaton,
    #[error("script index {index} at step {step} has no matching outgoing transition ({available} available)")]
    ScriptIndexOutOfRange {
        step: usize,
        index: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkReport {
    pub steps: usize,
    pub seed: u64,
    pub policy: Policy,
    pub trace: Vec<Transition>,
    /// Number of request-labeled transitions taken; an orchestration in
    /// agreement never lets this rise above zero.
    pub requests_seen: usize,
    /// Whether the walk's last state is final or could still reach a
    /// final state within the unused step budget.
    pub ended_in_final: bool,
}

/// Walk up to `steps` transitions from the initial state. Deterministic
/// for a fixed (seed, policy).
pub fn walk(a: &Msca, steps: usize, seed: u64, policy: &Policy) -> Result<WalkReport, WalkError> {
    let Some(initial) = &a.initial else {
        return Err(WalkError::EmptyAutomaton);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at = initial.clone();
    let mut trace: Vec<Transition> = Vec::new();

    while trace.len() < steps {
        let outgoing: Vec<&Transition> = a.outgoing(&at).collect();
        if outgoing.is_empty() {
            break;
        }
        let taken = match policy {
            Policy::Random => outgoing[rng.gen_range(0..outgoing.len())],
            Policy::Scripted(script) => {
                let step = trace.len();
                let Some(&index) = script.get(step) else {
                    break;
                };
                *outgoing
                    .get(index)
                    .ok_or(WalkError::ScriptIndexOutOfRange {
                        step,
                        index,
                        available: outgoing.len(),
                    })?
            }
        };
        trace.push(taken.clone());
        at = taken.target.clone();
    }

    let budget = steps - trace.len();
    let requests_seen = trace
        .iter()
        .filter(|t| t.label.classify() == Ok(LabelClass::Request))
        .count();
    Ok(WalkReport {
        steps,
        seed,
        policy: policy.clone(),
        requests_seen,
        ended_in_final: final_within(a, &at, budget),
        trace,
    })
}

/// Breadth-first search bounded by `budget` steps.
fn final_within(a: &Msca, from: &StateVec, budget: usize) -> bool {
    if a.finals.contains(from) {
        return true;
    }
    let mut seen: BTreeSet<&StateVec> = [from].into();
    let mut frontier: VecDeque<(&StateVec, usize)> = [(from, 0usize)].into();
    while let Some((q, depth)) = frontier.pop_front() {
        if depth == budget {
            continue;
        }
        for t in a.outgoing(q) {
            if a.finals.contains(&t.target) {
                return true;
            }
            if seen.insert(&t.target) {
                frontier.push_back((&t.target, depth + 1));
            }
        }
    }
    false
}
