//! Text and JSON encodings of set systems.
//!
//! Text form: the first line holds `n`, every further non-empty line holds
//! one member as a lowercase hexadecimal mask. JSON form:
//! `{"n": 4, "sets": [0, 1, 3]}`. Repeated members are rejected in both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SetSystem, SubsetMask, MAX_N};

#[derive(Debug, Serialize, Deserialize)]
struct JsonSystem {
    n: usize,
    sets: Vec<u64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn checked_n(n: usize, line: usize) -> Result<usize> {
    if n == 0 || n > MAX_N {
        return Err(parse_err(line, format!("ground size {n} outside 1..={MAX_N}")));
    }
    Ok(n)
}

pub fn parse_text(input: &str) -> Result<SetSystem> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (first_no, first) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(1, "missing ground size"))?;
    let n: usize = first
        .parse()
        .map_err(|_| parse_err(first_no, format!("expected ground size, found {first:?}")))?;
    let mut system = SetSystem::empty(checked_n(n, first_no)?)?;
    for (no, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let mask = u64::from_str_radix(line, 16)
            .map_err(|_| parse_err(no, format!("{line:?} is not a hexadecimal mask")))?;
        if n < 64 && mask >> n != 0 {
            return Err(parse_err(no, format!("mask {line} has bits beyond n = {n}")));
        }
        if !system.insert(SubsetMask(mask as u32)) {
            return Err(parse_err(no, format!("duplicate set {line}")));
        }
    }
    Ok(system)
}

pub fn to_text(system: &SetSystem) -> String {
    let mut out = format!("{}\n", system.n());
    for s in system.iter() {
        out.push_str(&format!("{:x}\n", s.bits()));
    }
    out
}

pub fn parse_json(input: &str) -> Result<SetSystem> {
    let raw: JsonSystem =
        serde_json::from_str(input).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let mut system = SetSystem::empty(checked_n(raw.n, 1)?)?;
    for mask in raw.sets {
        if raw.n < 64 && mask >> raw.n != 0 {
            return Err(parse_err(1, format!("mask {mask} has bits beyond n = {}", raw.n)));
        }
        if !system.insert(SubsetMask(mask as u32)) {
            return Err(parse_err(1, format!("duplicate set {mask}")));
        }
    }
    Ok(system)
}

pub fn to_json(system: &SetSystem) -> String {
    let raw = JsonSystem { n: system.n(), sets: system.iter().map(|s| s.bits() as u64).collect() };
    serde_json::to_string(&raw).expect("plain struct serializes")
}

/// Parses either encoding, choosing JSON when the input starts with `{`.
pub fn parse_any(input: &str) -> Result<SetSystem> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let s = SetSystem::from_sets(4, &[&[], &[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]])
            .unwrap();
        let text = to_text(&s);
        assert_eq!(text, "4\n0\n1\n2\n3\n7\nb\nf\n");
        assert_eq!(parse_text(&text).unwrap(), s);
        assert_eq!(parse_any(&to_json(&s)).unwrap(), s);
    }

    #[test]
    fn rejects_bad_text() {
        assert!(parse_text("").is_err());
        assert!(parse_text("x\n").is_err());
        assert!(parse_text("2\n1\n1\n").is_err());
        assert!(parse_text("2\n4\n").is_err());
        assert!(parse_text("2\nzz\n").is_err());
        assert!(parse_text("0\n").is_err());
        match parse_text("3\n1\n\n1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_json() {
        assert!(parse_json(r#"{"n": 2, "sets": [1, 1]}"#).is_err());
        assert!(parse_json(r#"{"n": 2, "sets": [4]}"#).is_err());
        assert!(parse_json(r#"{"n": 2}"#).is_err());
        assert_eq!(parse_json(r#"{"n": 2, "sets": []}"#).unwrap().len(), 0);
    }

    #[test]
    fn blank_lines_ignored() {
        let s = parse_text("\n3\n\n0\n7\n\n").unwrap();
        assert_eq!(s.len(), 2);
    }
}
