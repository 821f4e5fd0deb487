//! Reading and writing the Aldebaran (AUT) interchange format.
//!
//! The header is `des (initial, #transitions, #states)` followed by one
//! `(src,"label",dst)` line per transition. Labels use the canonical
//! rendering of [`MultiActionValue`], so writing and re-reading a system
//! preserves every label string exactly.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{ActionValue, Lts, MultiActionValue, Transition};
use crate::data::{EnumSort, Value};

#[derive(Debug, Error)]
pub enum AutError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed aut file at line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn malformed(line: usize, message: impl Into<String>) -> AutError {
    AutError::Malformed {
        line,
        message: message.into(),
    }
}

/// Writes an LTS in AUT format, newline-terminated, transitions in stored
/// order.
pub fn write_aut<W: Write>(lts: &Lts, mut sink: W) -> io::Result<()> {
    writeln!(
        sink,
        "des ({}, {}, {})",
        lts.initial,
        lts.transitions.len(),
        lts.num_states
    )?;
    for t in &lts.transitions {
        writeln!(sink, "({},\"{}\",{})", t.src, t.label, t.dst)?;
    }
    Ok(())
}

/// Renders an LTS as an AUT document in memory.
pub fn to_aut_string(lts: &Lts) -> String {
    let mut buf = Vec::new();
    write_aut(lts, &mut buf).expect("writing to a vector cannot fail");
    String::from_utf8(buf).expect("aut output is utf-8")
}

/// Parses an AUT document back into an [`Lts`].
///
/// Label strings are parsed structurally: `true`/`false` become booleans,
/// digit sequences naturals, and anything else an enumeration constructor of
/// an anonymous sort, which compares equal to the constructor it was
/// rendered from.
pub fn read_aut<R: BufRead>(source: R) -> Result<Lts, AutError> {
    let mut lines = source.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(1, "empty input, expected des header"))?;
    let header = header?;
    let (initial, declared_transitions, num_states) = parse_header(header.trim())
        .ok_or_else(|| malformed(1, "expected 'des (initial, #transitions, #states)'"))?;

    let mut transitions = Vec::with_capacity(declared_transitions);
    for (index, line) in lines {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (src, label, dst) = parse_transition(trimmed)
            .ok_or_else(|| malformed(line_no, "expected '(src,\"label\",dst)'"))?;
        if src >= num_states || dst >= num_states {
            return Err(malformed(line_no, "state id outside declared range"));
        }
        let label = parse_label(&label).map_err(|m| malformed(line_no, m))?;
        transitions.push(Transition::new(src, label, dst));
    }
    if transitions.len() != declared_transitions {
        return Err(malformed(
            1,
            format!(
                "header declares {} transitions, found {}",
                declared_transitions,
                transitions.len()
            ),
        ));
    }
    if initial >= num_states.max(1) {
        return Err(malformed(1, "initial state outside declared range"));
    }
    Ok(Lts::new(num_states, initial, transitions))
}

fn parse_header(line: &str) -> Option<(usize, usize, usize)> {
    let rest = line.strip_prefix("des")?.trim();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    let mut parts = inner.split(',');
    let initial = parts.next()?.trim().parse().ok()?;
    let transitions = parts.next()?.trim().parse().ok()?;
    let states = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((initial, transitions, states))
}

fn parse_transition(line: &str) -> Option<(usize, String, usize)> {
    let inner = line.strip_prefix('(')?.strip_suffix(')')?;
    let open = inner.find('"')?;
    let close = inner.rfind('"')?;
    if close <= open {
        return None;
    }
    let src = inner[..open].trim().strip_suffix(',')?.trim().parse().ok()?;
    let label = inner[open + 1..close].to_string();
    let dst = inner[close + 1..].trim().strip_prefix(',')?.trim().parse().ok()?;
    Some((src, label, dst))
}

fn parse_label(text: &str) -> Result<MultiActionValue, String> {
    if text == "tau" {
        return Ok(MultiActionValue::silent());
    }
    let mut factors = Vec::new();
    for part in split_top_level(text, '|') {
        factors.push(parse_factor(part.trim())?);
    }
    Ok(MultiActionValue::from_factors(factors))
}

fn parse_factor(text: &str) -> Result<ActionValue, String> {
    if text.is_empty() {
        return Err("empty action".into());
    }
    match text.find('(') {
        None => {
            check_label(text)?;
            Ok(ActionValue::plain(text))
        }
        Some(open) => {
            let label = &text[..open];
            check_label(label)?;
            let args_text = text[open..]
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| format!("unbalanced parentheses in '{text}'"))?;
            let mut args = Vec::new();
            for arg in split_top_level(args_text, ',') {
                args.push(parse_value(arg.trim())?);
            }
            Ok(ActionValue::new(label, args))
        }
    }
}

fn check_label(label: &str) -> Result<(), String> {
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return Err(format!("invalid action label '{label}'"));
    }
    Ok(())
}

fn parse_value(text: &str) -> Result<Value, String> {
    match text {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if text.chars().all(|c| c.is_ascii_digit()) && !text.is_empty() {
        return text
            .parse()
            .map(Value::Nat)
            .map_err(|_| format!("natural number '{text}' out of range"));
    }
    check_label(text).map_err(|_| format!("invalid data value '{text}'"))?;
    // Constructor of a sort we do not know here; equality is by name.
    let sort = EnumSort::new(format!("_{text}"), [text]).expect("singleton enum");
    Ok(Value::Ctor(sort, 0))
}

// Splits on a separator, ignoring separators inside parentheses.
fn split_top_level(text: &str, separator: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == separator && depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}
