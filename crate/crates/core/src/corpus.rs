//! Bundled example automata: the principals of the worked examples and
//! the four expected orchestrations, transcribed from the figures.

use std::collections::BTreeSet;

use crate::model::{Action, Label, Modality, Msca, StateVec, Transition};

const NAMES: &[&str] = &[
    "client1",
    "client2",
    "server",
    "alice",
    "bob",
    "carl",
    "dealer",
    "player",
    "adrian",
    "bruce",
    "client2-urgent",
    "fig1-orchestration",
    "fig2-orchestration",
    "fig4-orchestration",
    "fig8-orchestration",
];

/// Names accepted by [`get`], in listing order.
pub fn names() -> &'static [&'static str] {
    NAMES
}

pub fn get(name: &str) -> Option<Msca> {
    match name {
        "client1" => Some(client(Modality::Optional)),
        "client2" => Some(client(Modality::Lazy)),
        "client2-urgent" => Some(client(Modality::Urgent)),
        "server" => Some(server()),
        "alice" => Some(alice()),
        "bob" => Some(bob()),
        "carl" => Some(carl()),
        "dealer" => Some(dealer()),
        "player" => Some(player()),
        "adrian" => Some(adrian()),
        "bruce" => Some(bruce()),
        "fig1-orchestration" => Some(fig1_orchestration()),
        "fig2-orchestration" => Some(fig2_orchestration()),
        "fig4-orchestration" => Some(fig4_orchestration()),
        "fig8-orchestration" => Some(fig8_orchestration()),
        _ => None,
    }
}

fn state(s: &str) -> StateVec {
    s.split(',').collect()
}

fn transition(source: &str, label: &str, target: &str, modality: Modality) -> Transition {
    Transition::new(
        state(source),
        Label(
            label
                .split(',')
                .map(|a| Action::parse(a).expect("corpus action"))
                .collect(),
        ),
        state(target),
        modality,
    )
}

fn automaton(rank: usize, initial: &str, finals: &[&str], transitions: Vec<Transition>) -> Msca {
    let mut states: BTreeSet<StateVec> = [state(initial)].into();
    states.extend(finals.iter().map(|s| state(s)));
    for t in &transitions {
        states.insert(t.source.clone());
        states.insert(t.target.clone());
    }
    Msca {
        rank,
        states,
        initial: Some(state(initial)),
        finals: finals.iter().map(|s| state(s)).collect(),
        transitions: transitions.into_iter().collect(),
        operands: vec![],
    }
}

use Modality::{Lazy, Optional};

/// Client1 as drawn; the request modality distinguishes the variants.
fn client(request: Modality) -> Msca {
    automaton(
        1,
        "0",
        &["0", "1"],
        vec![
            transition("0", "!b", "0", Optional),
            transition("0", "?a", "1", request),
        ],
    )
}

fn server() -> Msca {
    automaton(
        1,
        "0",
        &["0", "3"],
        vec![
            transition("0", "!a", "1", Optional),
            transition("1", "!τ", "2", Optional),
            transition("2", "!a", "3", Optional),
        ],
    )
}

fn alice() -> Msca {
    automaton(
        1,
        "a0",
        &["a5", "a6"],
        vec![
            transition("a0", "!a", "a1", Optional),
            transition("a1", "!c", "a3", Optional),
            transition("a3", "!e", "a5", Optional),
            transition("a0", "!b", "a2", Optional),
            transition("a2", "!d", "a4", Optional),
            transition("a4", "!f", "a6", Optional),
        ],
    )
}

fn bob() -> Msca {
    automaton(
        1,
        "b0",
        &["b1", "b2"],
        vec![
            transition("b0", "?c", "b1", Lazy),
            transition("b0", "?d", "b2", Lazy),
        ],
    )
}

fn carl() -> Msca {
    automaton(
        1,
        "c0",
        &["c1", "c2"],
        vec![
            transition("c0", "?e", "c1", Lazy),
            transition("c0", "?f", "c2", Lazy),
        ],
    )
}

fn dealer() -> Msca {
    automaton(
        1,
        "Dealing",
        &["Cards21", "Cards31", "Cards32", "Cards41", "Cards42", "Cards43"],
        vec![
            transition("Dealing", "?pair1", "P1", Optional),
            transition("Dealing", "?pair2", "P2", Optional),
            transition("P1", "?pair2", "Collecting", Optional),
            transition("P1", "?pair3", "Collecting", Optional),
            transition("P2", "?pair3", "Collecting", Optional),
            transition("Collecting", "!2", "Card2", Optional),
            transition("Collecting", "!3", "Card3", Optional),
            transition("Collecting", "!4", "Card4", Optional),
            transition("Card2", "!1", "Cards21", Optional),
            transition("Card3", "!1", "Cards31", Optional),
            transition("Card3", "!2", "Cards32", Optional),
            transition("Card4", "!1", "Cards41", Optional),
            transition("Card4", "!2", "Cards42", Optional),
            transition("Card4", "!3", "Cards43", Optional),
        ],
    )
}

fn player() -> Msca {
    automaton(
        1,
        "Waiting",
        &[
            "Pair1Card1",
            "Pair1Card3",
            "Pair2Card2",
            "Pair2Card4",
            "Pair3Card2",
            "Pair3Card3",
        ],
        vec![
            transition("Waiting", "!pair1", "Pair1", Optional),
            transition("Waiting", "!pair2", "Pair2", Optional),
            transition("Waiting", "!pair3", "Pair3", Optional),
            transition("Pair1", "?1", "Pair1Card1", Lazy),
            transition("Pair1", "?3", "Pair1Card3", Lazy),
            transition("Pair2", "?2", "Pair2Card2", Lazy),
            transition("Pair2", "?4", "Pair2Card4", Lazy),
            transition("Pair3", "?2", "Pair3Card2", Lazy),
            transition("Pair3", "?3", "Pair3Card3", Lazy),
        ],
    )
}

fn adrian() -> Msca {
    automaton(
        1,
        "0",
        &["1"],
        vec![
            transition("0", "!b", "0", Optional),
            transition("0", "?a", "1", Lazy),
        ],
    )
}

fn bruce() -> Msca {
    automaton(
        1,
        "0",
        &["2"],
        vec![
            transition("0", "?b", "1", Lazy),
            transition("1", "!a", "2", Optional),
        ],
    )
}

fn fig1_orchestration() -> Msca {
    automaton(
        2,
        "0,0",
        &["0,0"],
        vec![
            transition("0,0", "!b,-", "0,0", Optional),
            transition("0,0", "-,!b", "0,0", Optional),
        ],
    )
}

fn fig2_orchestration() -> Msca {
    automaton(
        3,
        "0,0,0",
        &["0,0,0", "3,1,1"],
        vec![
            transition("0,0,0", "!a,-,?a", "1,0,1", Lazy),
            transition("0,0,0", "!a,?a,-", "1,1,0", Lazy),
            transition("0,0,0", "-,!b,-", "0,0,0", Optional),
            transition("0,0,0", "-,-,!b", "0,0,0", Optional),
            transition("1,0,1", "!τ,-,-", "2,0,1", Optional),
            transition("1,0,1", "-,!b,-", "1,0,1", Optional),
            transition("2,0,1", "!a,?a,-", "3,1,1", Lazy),
            transition("2,0,1", "-,!b,-", "2,0,1", Optional),
            transition("1,1,0", "!τ,-,-", "2,1,0", Optional),
            transition("1,1,0", "-,-,!b", "1,1,0", Optional),
            transition("2,1,0", "!a,-,?a", "3,1,1", Lazy),
            transition("2,1,0", "-,-,!b", "2,1,0", Optional),
        ],
    )
}

fn fig4_orchestration() -> Msca {
    automaton(
        3,
        "a0,b0,c0",
        &["a5,b1,c1", "a6,b2,c2"],
        vec![
            transition("a0,b0,c0", "!a,-,-", "a1,b0,c0", Optional),
            transition("a1,b0,c0", "!c,?c,-", "a3,b1,c0", Lazy),
            transition("a3,b1,c0", "!e,-,?e", "a5,b1,c1", Lazy),
            transition("a0,b0,c0", "!b,-,-", "a2,b0,c0", Optional),
            transition("a2,b0,c0", "!d,?d,-", "a4,b2,c0", Lazy),
            transition("a4,b2,c0", "!f,-,?f", "a6,b2,c2", Lazy),
        ],
    )
}

fn fig8_orchestration() -> Msca {
    automaton(
        3,
        "Dealing,Waiting,Waiting",
        &[
            "Cards21,Pair1Card1,Pair2Card2",
            "Cards32,Pair1Card3,Pair2Card2",
            "Cards41,Pair1Card1,Pair2Card4",
            "Cards43,Pair1Card3,Pair2Card4",
            "Cards21,Pair2Card2,Pair1Card1",
            "Cards32,Pair2Card2,Pair1Card3",
            "Cards41,Pair2Card4,Pair1Card1",
            "Cards43,Pair2Card4,Pair1Card3",
        ],
        vec![
            transition(
                "Dealing,Waiting,Waiting",
                "?pair1,!pair1,-",
                "P1,Pair1,Waiting",
                Optional,
            ),
            transition(
                "Dealing,Waiting,Waiting",
                "?pair1,-,!pair1",
                "P1,Waiting,Pair1",
                Optional,
            ),
            transition(
                "P1,Pair1,Waiting",
                "?pair2,-,!pair2",
                "Collecting,Pair1,Pair2",
                Optional,
            ),
            transition(
                "P1,Waiting,Pair1",
                "?pair2,!pair2,-",
                "Collecting,Pair2,Pair1",
                Optional,
            ),
            transition(
                "Collecting,Pair1,Pair2",
                "!4,-,?4",
                "Card4,Pair1,Pair2Card4",
                Lazy,
            ),
            transition(
                "Collecting,Pair1,Pair2",
                "!3,?3,-",
                "Card3,Pair1Card3,Pair2",
                Lazy,
            ),
            transition(
                "Collecting,Pair1,Pair2",
                "!2,-,?2",
                "Card2,Pair1,Pair2Card2",
                Lazy,
            ),
            transition(
                "Card2,Pair1,Pair2Card2",
                "!1,?1,-",
                "Cards21,Pair1Card1,Pair2Card2",
                Lazy,
            ),
            transition(
                "Card3,Pair1Card3,Pair2",
                "!2,-,?2",
                "Cards32,Pair1Card3,Pair2Card2",
                Lazy,
            ),
            transition(
                "Card4,Pair1,Pair2Card4",
                "!1,?1,-",
                "Cards41,Pair1Card1,Pair2Card4",
                Lazy,
            ),
            transition(
                "Card4,Pair1,Pair2Card4",
                "!3,?3,-",
                "Cards43,Pair1Card3,Pair2Card4",
                Lazy,
            ),
            transition(
                "Collecting,Pair2,Pair1",
                "!4,?4,-",
                "Card4,Pair2Card4,Pair1",
                Lazy,
            ),
            transition(
                "Collecting,Pair2,Pair1",
                "!3,-,?3",
                "Card3,Pair2,Pair1Card3",
                Lazy,
            ),
            transition(
                "Collecting,Pair2,Pair1",
                "!2,?2,-",
                "Card2,Pair2Card2,Pair1",
                Lazy,
            ),
            transition(
                "Card2,Pair2Card2,Pair1",
                "!1,-,?1",
                "Cards21,Pair2Card2,Pair1Card1",
                Lazy,
            ),
            transition(
                "Card3,Pair2,Pair1Card3",
                "!2,?2,-",
                "Cards32,Pair2Card2,Pair1Card3",
                Lazy,
            ),
            transition(
                "Card4,Pair2Card4,Pair1",
                "!1,-,?1",
                "Cards41,Pair2Card4,Pair1Card1",
                Lazy,
            ),
            transition(
                "Card4,Pair2Card4,Pair1",
                "!3,-,?3",
                "Cards43,Pair2Card4,Pair1Card3",
                Lazy,
            ),
        ],
    )
}
