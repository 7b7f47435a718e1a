//! The line-oriented text format for models.
//!
//! ```text
//! mdp 3            # states 0..2
//! initial 0
//! target 1
//! action 0 flip
//! to 1 0.5
//! to 2 0.5
//! action 1 stay
//! to 1 1.0
//! action 2 stay
//! to 2 1.0
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{validate_mdp, Distribution, Mdp, StateId, StateSet, PROB_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("first directive must be `mdp <n>`")]
    MissingHeader,
    #[error("duplicate `initial` directive")]
    DuplicateInitial,
    #[error("no `initial` directive")]
    MissingInitial,
    #[error("state {state} out of range for a model with {num_states} states")]
    DanglingState { state: usize, num_states: usize },
    #[error("duplicate action label `{label}` in state {state}")]
    DuplicateLabel { label: String, state: usize },
    #[error("probabilities of the action sum to {sum}")]
    ProbabilitySum { sum: f64 },
    #[error("probability {0} is outside (0, 1]")]
    ProbabilityRange(String),
    #[error("state {0} has no actions")]
    NoActions(usize),
    #[error("model invalid: {0}")]
    Invalid(String),
}

struct Block {
    line: usize,
    owner: usize,
    label: String,
    entries: Vec<(StateId, f64)>,
    sum: f64,
}

struct Parser {
    num_states: Option<(usize, usize)>,
    initial: Option<usize>,
    targets: StateSet,
    labels: BTreeMap<usize, BTreeSet<String>>,
    actions: Vec<(StateId, String, Distribution)>,
    open: Option<Block>,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Syntax(msg.into()))
}

fn parse_count(line: usize, tok: &str) -> Result<usize, ParseError> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, format!("expected a non-negative integer, found `{tok}`")));
    }
    tok.parse()
        .map_err(|_| syntax(line, format!("integer `{tok}` is too large")))
}

fn parse_probability(line: usize, tok: &str) -> Result<f64, ParseError> {
    let bytes = tok.as_bytes();
    let well_formed = !bytes.is_empty()
        && (bytes[0].is_ascii_digit() || bytes[0] == b'.')
        && bytes
            .iter()
            .all(|&b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    let p: f64 = match tok.parse() {
        Ok(p) if well_formed => p,
        _ => return Err(syntax(line, format!("expected a decimal probability, found `{tok}`"))),
    };
    if !(p > 0.0 && p <= 1.0) {
        return Err(err(line, ParseErrorKind::ProbabilityRange(tok.to_string())));
    }
    Ok(p)
}

impl Parser {
    fn states(&self, line: usize) -> Result<usize, ParseError> {
        self.num_states
            .map(|(n, _)| n)
            .ok_or_else(|| err(line, ParseErrorKind::MissingHeader))
    }

    fn state(&self, line: usize, tok: &str) -> Result<usize, ParseError> {
        let n = self.states(line)?;
        let s = parse_count(line, tok)?;
        if s >= n {
            return Err(err(
                line,
                ParseErrorKind::DanglingState {
                    state: s,
                    num_states: n,
                },
            ));
        }
        Ok(s)
    }

    fn close_block(&mut self) -> Result<(), ParseError> {
        if let Some(b) = self.open.take() {
            if b.entries.is_empty() {
                return Err(syntax(b.line, "action without `to` lines"));
            }
            if (b.sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(err(b.line, ParseErrorKind::ProbabilitySum { sum: b.sum }));
            }
            let dist = Distribution::from_entries_unchecked(b.entries);
            self.actions.push((StateId(b.owner), b.label, dist));
        }
        Ok(())
    }

    fn directive(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        let keyword = tokens[0];
        if keyword != "to" {
            self.close_block()?;
        }
        if self.num_states.is_none() && keyword != "mdp" {
            return Err(err(line, ParseErrorKind::MissingHeader));
        }
        let arity = |k: usize| {
            if tokens.len() == k + 1 {
                Ok(())
            } else {
                Err(syntax(line, format!("`{keyword}` takes {k} argument(s)")))
            }
        };
        match keyword {
            "mdp" => {
                arity(1)?;
                if self.num_states.is_some() {
                    return Err(syntax(line, "duplicate `mdp` directive"));
                }
                let n = parse_count(line, tokens[1])?;
                if n == 0 {
                    return Err(syntax(line, "a model needs at least one state"));
                }
                self.num_states = Some((n, line));
            }
            "initial" => {
                arity(1)?;
                let s = self.state(line, tokens[1])?;
                if self.initial.is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateInitial));
                }
                self.initial = Some(s);
            }
            "target" => {
                arity(1)?;
                let s = self.state(line, tokens[1])?;
                self.targets.insert(StateId(s));
            }
            "action" => {
                arity(2)?;
                let s = self.state(line, tokens[1])?;
                let label = tokens[2].to_string();
                if !self.labels.entry(s).or_default().insert(label.clone()) {
                    return Err(err(line, ParseErrorKind::DuplicateLabel { label, state: s }));
                }
                self.open = Some(Block {
                    line,
                    owner: s,
                    label,
                    entries: Vec::new(),
                    sum: 0.0,
                });
            }
            "to" => {
                arity(2)?;
                let s = self.state(line, tokens[1])?;
                let p = parse_probability(line, tokens[2])?;
                let block = self
                    .open
                    .as_mut()
                    .ok_or_else(|| syntax(line, "`to` outside an action block"))?;
                block.entries.push((StateId(s), p));
                block.sum += p;
                if block.sum > 1.0 + PROB_TOLERANCE {
                    return Err(err(line, ParseErrorKind::ProbabilitySum { sum: block.sum }));
                }
            }
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
        Ok(())
    }

    fn finish(mut self, last_line: usize) -> Result<Mdp, ParseError> {
        self.close_block()?;
        let (n, header_line) = self
            .num_states
            .ok_or_else(|| err(last_line.max(1), ParseErrorKind::MissingHeader))?;
        let initial = self
            .initial
            .ok_or_else(|| err(header_line, ParseErrorKind::MissingInitial))?;
        let mut has_action = vec![false; n];
        for (s, _, _) in &self.actions {
            has_action[s.0] = true;
        }
        if let Some(s) = has_action.iter().position(|&b| !b) {
            return Err(err(header_line, ParseErrorKind::NoActions(s)));
        }
        let m = Mdp::from_parts_unchecked(n, self.actions, StateId(initial), self.targets);
        validate_mdp(&m).map_err(|v| err(header_line, ParseErrorKind::Invalid(v[0].to_string())))?;
        Ok(m)
    }
}

/// Parses a model. Every error carries the 1-based line it refers to.
pub fn parse_model(text: &str) -> Result<Mdp, ParseError> {
    let mut p = Parser {
        num_states: None,
        initial: None,
        targets: StateSet::new(),
        labels: BTreeMap::new(),
        actions: Vec::new(),
        open: None,
    };
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        p.directive(line, &tokens)?;
    }
    p.finish(last_line)
}

fn sanitize_label(label: &str) -> String {
    let cleaned: String = label
        .chars()
        .map(|c| if c.is_whitespace() || c == '#' { '_' } else { c })
        .collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

/// Writes a model in the text format. Probabilities use the shortest
/// representation that reads back to the same double.
pub fn serialize_model(m: &Mdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mdp {}", m.num_states());
    let _ = writeln!(out, "initial {}", m.initial().0);
    for t in m.targets() {
        let _ = writeln!(out, "target {}", t.0);
    }
    for a in m.actions() {
        let _ = writeln!(out, "action {} {}", m.owner(a).0, sanitize_label(m.label(a)));
        for (s, p) in m.transition(a).iter() {
            let _ = writeln!(out, "to {} {}", s.0, p);
        }
    }
    out
}
