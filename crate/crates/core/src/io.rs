use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::Semantics;
use crate::model::{Action, Label, Modality, Msca, StateVec, Transition, Violation};
use crate::simulate::{Policy, WalkReport};
use crate::synth::{
    CheckRecord, ForbiddenReason, IterationRecord, SynthesisTrace, TrimRecord,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("ill-formed automaton: {}", join_violations(.0))]
    Validation(Vec<Violation>),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => IoError::Schema(e.to_string()),
        _ => IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------
// Automaton document
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct Doc {
    format_version: u32,
    rank: usize,
    states: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<String>>,
    finals: Vec<Vec<String>>,
    transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    operands: Vec<Doc>,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    source: Vec<String>,
    label: Vec<String>,
    target: Vec<String>,
    modality: String,
}

fn transition_to_doc(t: &Transition) -> TransitionDoc {
    TransitionDoc {
        source: t.source.0.clone(),
        label: t.label.0.iter().map(|a| a.to_string()).collect(),
        target: t.target.0.clone(),
        modality: t.modality.as_str().to_owned(),
    }
}

fn transition_from_doc(doc: &TransitionDoc, path: &str) -> Result<Transition, IoError> {
    let mut actions = Vec::with_capacity(doc.label.len());
    for (i, s) in doc.label.iter().enumerate() {
        let action = Action::parse(s)
            .map_err(|e| IoError::Schema(format!("{path}.label[{i}]: {e}")))?;
        actions.push(action);
    }
    let modality = Modality::parse(&doc.modality).ok_or_else(|| {
        IoError::Schema(format!(
            "{path}.modality: unknown modality {:?} (expected \"optional\", \"urgent\" or \"lazy\")",
            doc.modality
        ))
    })?;
    Ok(Transition {
        source: StateVec(doc.source.clone()),
        label: Label(actions),
        target: StateVec(doc.target.clone()),
        modality,
    })
}

fn msca_to_doc(a: &Msca) -> Doc {
    Doc {
        format_version: FORMAT_VERSION,
        rank: a.rank,
        states: a.states.iter().map(|q| q.0.clone()).collect(),
        initial: a.initial.as_ref().map(|q| q.0.clone()),
        finals: a.finals.iter().map(|q| q.0.clone()).collect(),
        transitions: a.transitions.iter().map(transition_to_doc).collect(),
        operands: a.operands.iter().map(msca_to_doc).collect(),
    }
}

fn msca_from_doc(doc: &Doc, path: &str) -> Result<Msca, IoError> {
    if doc.format_version != FORMAT_VERSION {
        return Err(IoError::Schema(format!(
            "{path}.format_version: unsupported version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let mut transitions = BTreeSet::new();
    for (i, t) in doc.transitions.iter().enumerate() {
        transitions.insert(transition_from_doc(t, &format!("{path}.transitions[{i}]"))?);
    }
    let mut operands = Vec::with_capacity(doc.operands.len());
    for (i, op) in doc.operands.iter().enumerate() {
        operands.push(msca_from_doc(op, &format!("{path}.operands[{i}]"))?);
    }
    Ok(Msca {
        rank: doc.rank,
        states: doc.states.iter().map(|q| StateVec(q.clone())).collect(),
        initial: doc.initial.as_ref().map(|q| StateVec(q.clone())),
        finals: doc.finals.iter().map(|q| StateVec(q.clone())).collect(),
        transitions,
        operands,
    })
}

/// Canonical textual form: JSON with two-space indentation, trailing
/// newline, states and transitions in canonical order.
pub fn save(a: &Msca) -> String {
    to_pretty_json(&msca_to_doc(a))
}

/// Parse and validate an automaton document.
pub fn load(text: &str) -> Result<Msca, IoError> {
    let a = load_lenient(text)?;
    let violations = a.validate();
    if violations.is_empty() {
        Ok(a)
    } else {
        Err(IoError::Validation(violations))
    }
}

/// Parse an automaton document without the well-formedness check, so that
/// diagnostic commands can inspect broken automata.
pub fn load_lenient(text: &str) -> Result<Msca, IoError> {
    let doc: Doc = from_json(text)?;
    msca_from_doc(&doc, "$")
}

// ---------------------------------------------------------------------
// Trace documents
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SynthesisTraceDoc {
    kind: String,
    semantics: String,
    initial_forbidden: Vec<Vec<String>>,
    iterations: Vec<IterationDoc>,
    fixpoint_index: usize,
    final_trim: TrimDoc,
    empty_result: bool,
}

#[derive(Serialize, Deserialize)]
struct IterationDoc {
    index: usize,
    removed_transitions: Vec<TransitionDoc>,
    newly_forbidden: Vec<ForbiddenDoc>,
    checks: Vec<CheckDoc>,
}

#[derive(Serialize, Deserialize)]
struct ForbiddenDoc {
    state: Vec<String>,
    reason: String,
}

#[derive(Serialize, Deserialize)]
struct CheckDoc {
    transition: TransitionDoc,
    verdict: String,
}

#[derive(Serialize, Deserialize)]
struct TrimDoc {
    removed_states: Vec<Vec<String>>,
    removed_transitions: Vec<TransitionDoc>,
}

pub fn save_synthesis_trace(trace: &SynthesisTrace) -> String {
    let doc = SynthesisTraceDoc {
        kind: "synthesis".to_owned(),
        semantics: trace.semantics.to_string(),
        initial_forbidden: trace.initial_forbidden.iter().map(|q| q.0.clone()).collect(),
        iterations: trace
            .iterations
            .iter()
            .map(|it| IterationDoc {
                index: it.index,
                removed_transitions: it.removed_transitions.iter().map(transition_to_doc).collect(),
                newly_forbidden: it
                    .newly_forbidden
                    .iter()
                    .map(|(q, reason)| ForbiddenDoc {
                        state: q.0.clone(),
                        reason: reason.as_str().to_owned(),
                    })
                    .collect(),
                checks: it
                    .checks
                    .iter()
                    .map(|c| CheckDoc {
                        transition: transition_to_doc(&c.transition),
                        verdict: if c.controllable {
                            "controllable".to_owned()
                        } else {
                            "uncontrollable".to_owned()
                        },
                    })
                    .collect(),
            })
            .collect(),
        fixpoint_index: trace.fixpoint_index,
        final_trim: TrimDoc {
            removed_states: trace.final_trim.removed_states.iter().map(|q| q.0.clone()).collect(),
            removed_transitions: trace
                .final_trim
                .removed_transitions
                .iter()
                .map(transition_to_doc)
                .collect(),
        },
        empty_result: trace.empty_result,
    };
    to_pretty_json(&doc)
}

pub fn load_synthesis_trace(text: &str) -> Result<SynthesisTrace, IoError> {
    let doc: SynthesisTraceDoc = from_json(text)?;
    if doc.kind != "synthesis" {
        return Err(IoError::Schema(format!(
            "$.kind: expected \"synthesis\", got {:?}",
            doc.kind
        )));
    }
    let semantics: Semantics = doc
        .semantics
        .parse()
        .map_err(|e| IoError::Schema(format!("$.semantics: {e}")))?;
    let mut iterations = Vec::with_capacity(doc.iterations.len());
    for (i, it) in doc.iterations.iter().enumerate() {
        let path = format!("$.iterations[{i}]");
        let mut removed_transitions = BTreeSet::new();
        for (k, t) in it.removed_transitions.iter().enumerate() {
            removed_transitions
                .insert(transition_from_doc(t, &format!("{path}.removed_transitions[{k}]"))?);
        }
        let mut newly_forbidden = std::collections::BTreeMap::new();
        for (k, f) in it.newly_forbidden.iter().enumerate() {
            let reason = match f.reason.as_str() {
                "uncontrollable" => ForbiddenReason::Uncontrollable,
                "dangling" => ForbiddenReason::Dangling,
                other => {
                    return Err(IoError::Schema(format!(
                        "{path}.newly_forbidden[{k}].reason: unknown reason {other:?}"
                    )))
                }
            };
            newly_forbidden.insert(StateVec(f.state.clone()), reason);
        }
        let mut checks = Vec::with_capacity(it.checks.len());
        for (k, c) in it.checks.iter().enumerate() {
            let controllable = match c.verdict.as_str() {
                "controllable" => true,
                "uncontrollable" => false,
                other => {
                    return Err(IoError::Schema(format!(
                        "{path}.checks[{k}].verdict: unknown verdict {other:?}"
                    )))
                }
            };
            checks.push(CheckRecord {
                transition: transition_from_doc(
                    &c.transition,
                    &format!("{path}.checks[{k}].transition"),
                )?,
                controllable,
            });
        }
        iterations.push(IterationRecord {
            index: it.index,
            removed_transitions,
            newly_forbidden,
            checks,
        });
    }
    let mut removed_transitions = BTreeSet::new();
    for (k, t) in doc.final_trim.removed_transitions.iter().enumerate() {
        removed_transitions.insert(transition_from_doc(
            t,
            &format!("$.final_trim.removed_transitions[{k}]"),
        )?);
    }
    Ok(SynthesisTrace {
        semantics,
        initial_forbidden: doc
            .initial_forbidden
            .iter()
            .map(|q| StateVec(q.clone()))
            .collect(),
        iterations,
        fixpoint_index: doc.fixpoint_index,
        final_trim: TrimRecord {
            removed_states: doc
                .final_trim
                .removed_states
                .iter()
                .map(|q| StateVec(q.clone()))
                .collect(),
            removed_transitions,
        },
        empty_result: doc.empty_result,
    })
}

#[derive(Serialize, Deserialize)]
struct WalkDoc {
    kind: String,
    steps: usize,
    seed: u64,
    policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    script: Option<Vec<usize>>,
    trace: Vec<TransitionDoc>,
    requests_seen: usize,
    ended_in_final: bool,
}

pub fn save_walk(report: &WalkReport) -> String {
    let (policy, script) = match &report.policy {
        Policy::Random => ("random".to_owned(), None),
        Policy::Scripted(s) => ("scripted".to_owned(), Some(s.clone())),
    };
    let doc = WalkDoc {
        kind: "walk".to_owned(),
        steps: report.steps,
        seed: report.seed,
        policy,
        script,
        trace: report.trace.iter().map(transition_to_doc).collect(),
        requests_seen: report.requests_seen,
        ended_in_final: report.ended_in_final,
    };
    to_pretty_json(&doc)
}

// ---------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------

fn dot_quote(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

/// Graphviz rendering following the figure conventions: double circles
/// for final states, an arrow-in point for the initial state, edge labels
/// carrying the action vector and a modality suffix.
pub fn export_dot(a: &Msca) -> String {
    let mut out = String::from("digraph msca {\n");
    if a.is_empty() {
        out.push_str("  // empty orchestration\n}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n  node [shape=ellipse];\n");
    if let Some(q0) = &a.initial {
        out.push_str("  \"__initial\" [shape=point, label=\"\"];\n");
        let _ = writeln!(out, "  \"__initial\" -> {};", dot_quote(&q0.to_string()));
    }
    for q in &a.states {
        let node = dot_quote(&q.to_string());
        if a.finals.contains(q) {
            let _ = writeln!(out, "  {node} [peripheries=2];");
        } else {
            let _ = writeln!(out, "  {node};");
        }
    }
    for t in &a.transitions {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            dot_quote(&t.source.to_string()),
            dot_quote(&t.target.to_string()),
            dot_quote(&format!("{}{}", t.label, t.modality.suffix()))
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, PartialEq, Eq)]
enum DotToken {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Equals,
    Semi,
    Comma,
    Arrow,
}

fn dot_tokens(text: &str) -> Result<Vec<DotToken>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.next() != Some('/') {
                    return Err("stray '/' (only // comments are recognized)".into());
                }
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err("unterminated string literal".into()),
                        Some('\\') => match chars.next() {
                            None => return Err("unterminated escape".into()),
                            Some(e) => {
                                s.push('\\');
                                s.push(e);
                            }
                        },
                        Some('"') => break,
                        Some(other) => s.push(other),
                    }
                }
                tokens.push(DotToken::Id(s));
            }
            '{' => {
                chars.next();
                tokens.push(DotToken::LBrace);
            }
            '}' => {
                chars.next();
                tokens.push(DotToken::RBrace);
            }
            '[' => {
                chars.next();
                tokens.push(DotToken::LBracket);
            }
            ']' => {
                chars.next();
                tokens.push(DotToken::RBracket);
            }
            '=' => {
                chars.next();
                tokens.push(DotToken::Equals);
            }
            ';' => {
                chars.next();
                tokens.push(DotToken::Semi);
            }
            ',' => {
                chars.next();
                tokens.push(DotToken::Comma);
            }
            '-' => {
                chars.next();
                if chars.next() != Some('>') {
                    return Err("expected '->'".into());
                }
                tokens.push(DotToken::Arrow);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(DotToken::Id(s));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(tokens)
}

/// Minimal structural check of a DOT digraph document: brace/bracket
/// balance, statement shapes (node, edge, attribute assignment), and
/// well-formed attribute lists.
pub fn check_dot(text: &str) -> Result<(), String> {
    let tokens = dot_tokens(text)?;
    let mut pos = 0;
    let id = |t: &DotToken| matches!(t, DotToken::Id(_));

    if !matches!(tokens.first(), Some(DotToken::Id(k)) if k == "digraph") {
        return Err("document must start with 'digraph'".into());
    }
    pos += 1;
    if tokens.get(pos).is_some_and(id) {
        pos += 1;
    }
    if tokens.get(pos) != Some(&DotToken::LBrace) {
        return Err("expected '{' after digraph header".into());
    }
    pos += 1;

    // attrs := '[' (ID '=' ID ','?)* ']'
    let parse_attrs = |pos: &mut usize| -> Result<(), String> {
        *pos += 1;
        loop {
            match tokens.get(*pos) {
                Some(DotToken::RBracket) => {
                    *pos += 1;
                    return Ok(());
                }
                Some(t) if id(t) => {
                    *pos += 1;
                    if tokens.get(*pos) != Some(&DotToken::Equals) {
                        return Err("expected '=' in attribute".into());
                    }
                    *pos += 1;
                    if !tokens.get(*pos).is_some_and(id) {
                        return Err("expected attribute value".into());
                    }
                    *pos += 1;
                    if tokens.get(*pos) == Some(&DotToken::Comma) {
                        *pos += 1;
                    }
                }
                _ => return Err("unterminated attribute list".into()),
            }
        }
    };

    loop {
        match tokens.get(pos) {
            Some(DotToken::RBrace) => {
                pos += 1;
                break;
            }
            Some(t) if id(t) => {
                pos += 1;
                match tokens.get(pos) {
                    // attribute assignment: ID '=' ID
                    Some(DotToken::Equals) => {
                        pos += 1;
                        if !tokens.get(pos).is_some_and(id) {
                            return Err("expected value after '='".into());
                        }
                        pos += 1;
                    }
                    // edge: ID '->' ID attrs?
                    Some(DotToken::Arrow) => {
                        pos += 1;
                        if !tokens.get(pos).is_some_and(id) {
                            return Err("expected edge target".into());
                        }
                        pos += 1;
                        if tokens.get(pos) == Some(&DotToken::LBracket) {
                            parse_attrs(&mut pos)?;
                        }
                    }
                    // node: ID attrs?
                    Some(DotToken::LBracket) => parse_attrs(&mut pos)?,
                    _ => {}
                }
                if tokens.get(pos) == Some(&DotToken::Semi) {
                    pos += 1;
                }
            }
            Some(_) => return Err("unexpected token in statement position".into()),
            None => return Err("missing closing '}'".into()),
        }
    }
    if pos != tokens.len() {
        return Err("trailing tokens after closing '}'".into());
    }
    Ok(())
}
