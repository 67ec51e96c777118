use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{Msca, StateVec, Transition};

/// States reachable from the initial state by following transitions forward.
pub fn forward_reachable(a: &Msca) -> BTreeSet<StateVec> {
    let Some(initial) = &a.initial else {
        return BTreeSet::new();
    };
    let mut seen: BTreeSet<StateVec> = [initial.clone()].into();
    let mut queue: VecDeque<StateVec> = [initial.clone()].into();
    while let Some(q) = queue.pop_front() {
        for t in a.outgoing(&q) {
            if seen.insert(t.target.clone()) {
                queue.push_back(t.target.clone());
            }
        }
    }
    seen
}

/// States from which some final state is reachable.
pub fn backward_reachable(a: &Msca) -> BTreeSet<StateVec> {
    let mut rev: BTreeMap<&StateVec, Vec<&StateVec>> = BTreeMap::new();
    for t in &a.transitions {
        rev.entry(&t.target).or_default().push(&t.source);
    }
    let mut seen: BTreeSet<StateVec> = a.finals.iter().cloned().collect();
    let mut queue: VecDeque<&StateVec> = a.finals.iter().collect();
    while let Some(q) = queue.pop_front() {
        for &p in rev.get(q).into_iter().flatten() {
            if seen.insert(p.clone()) {
                queue.push_back(p);
            }
        }
    }
    seen
}

/// States that are unreachable from the initial state or cannot reach any
/// final state. Empty automaton: no states, so no dangling states.
pub fn dangling(a: &Msca) -> BTreeSet<StateVec> {
    let forward = forward_reachable(a);
    let backward = backward_reachable(a);
    a.states
        .iter()
        .filter(|q| !forward.contains(*q) || !backward.contains(*q))
        .cloned()
        .collect()
}

/// States reachable from `from` by a (possibly empty) sequence of
/// transitions idle at component `j`, never touching `bad` states.
fn idle_closure(a: &Msca, from: &StateVec, j: usize, bad: &BTreeSet<StateVec>) -> BTreeSet<StateVec> {
    if bad.contains(from) {
        return BTreeSet::new();
    }
    let mut seen: BTreeSet<StateVec> = [from.clone()].into();
    let mut queue: VecDeque<StateVec> = [from.clone()].into();
    while let Some(q) = queue.pop_front() {
        for t in a.outgoing(&q) {
            let idle_at_j = t.label.0.get(j).is_some_and(|x| x.is_idle());
            if idle_at_j && !bad.contains(&t.target) && seen.insert(t.target.clone()) {
                queue.push_back(t.target.clone());
            }
        }
    }
    seen
}

/// Transitions t′ of `a` departing from some state reachable from `from`
/// via transitions idle at component `j`. Every state on the way — the
/// idle prefix and t′'s own endpoints — must avoid `forbidden` and
/// `dangling(a)`. The empty prefix is allowed, so t′ may leave `from`.
pub fn reachable_via_idle(
    a: &Msca,
    from: &StateVec,
    j: usize,
    forbidden: &BTreeSet<StateVec>,
) -> BTreeSet<Transition> {
    let mut bad = dangling(a);
    bad.extend(forbidden.iter().cloned());
    let sources = idle_closure(a, from, j, &bad);
    a.transitions
        .iter()
        .filter(|t| sources.contains(&t.source) && !bad.contains(&t.target))
        .cloned()
        .collect()
}

/// Like [`reachable_via_idle`] but pairs every reachable transition with
/// its witness prefix: the shortest idle path from `from` to its source,
/// ties broken by the canonical transition ordering.
pub fn reachable_via_idle_with_paths(
    a: &Msca,
    from: &StateVec,
    j: usize,
    forbidden: &BTreeSet<StateVec>,
) -> BTreeMap<Transition, Vec<Transition>> {
    let mut bad = dangling(a);
    bad.extend(forbidden.iter().cloned());
    if bad.contains(from) {
        return BTreeMap::new();
    }

    // Unit-weight Dijkstra keyed by (length, path): popping the least
    // entry settles each state with its shortest, lexicographically
    // least idle path.
    let mut settled: BTreeMap<StateVec, Vec<Transition>> = BTreeMap::new();
    let mut frontier: BTreeSet<(usize, Vec<Transition>, StateVec)> =
        [(0, Vec::new(), from.clone())].into();
    while let Some((len, path, q)) = frontier.pop_first() {
        if settled.contains_key(&q) {
            continue;
        }
        for t in a.outgoing(&q) {
            let idle_at_j = t.label.0.get(j).is_some_and(|x| x.is_idle());
            if idle_at_j && !bad.contains(&t.target) && !settled.contains_key(&t.target) {
                let mut next = path.clone();
                next.push(t.clone());
                frontier.insert((len + 1, next, t.target.clone()));
            }
        }
        settled.insert(q, path);
    }

    a.transitions
        .iter()
        .filter(|t| !bad.contains(&t.target))
        .filter_map(|t| {
            settled
                .get(&t.source)
                .map(|path| (t.clone(), path.clone()))
        })
        .collect()
}
