//! Text formats.
//!
//! | value | format |
//! |---|---|
//! | chain | `open\|closed <angles over C,S> [colors over H,P]`, `-` for an empty angle list |
//! | segments | `open\|closed 1,2,1,1,2,1` |
//! | turns | `LRLRL` |
//! | configuration | header `open\|closed`, then one `x y` per line |
//! | formula | DIMACS CNF |
//! | drawing | `v <id> <row> <x>` and `c <id> <row> <x>` lines, ids 1-based |
//! | assignment | `<var>=0\|1` lines, vars 1-based |
//! | artifact | blueprint JSON |
//!
//! Parsers skip blank lines and lines starting with `#` (DIMACS uses `c`
//! comments instead). Every emitter's output parses back to the same value.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fold::{LatticeConfiguration, Point};
use crate::model::{Angle, Color, FixedAngleChain, SegmentDecomposition, Topology, Turn, TurnSequence};
use crate::reduction::{CnfFormula, GridPos, LeveledDrawing, Literal, ReductionArtifact};

/// Parse failure with a 1-based position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl fmt::Display) -> Self {
        ParseError { line, col, message: message.to_string() }
    }
}

/// A whitespace-separated token with its 1-based line and column.
#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Tok<'a> {
    fn err(&self, message: impl fmt::Display) -> ParseError {
        ParseError::new(self.line, self.col, message)
    }

    fn int<T: std::str::FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.text.parse().map_err(|_| self.err(format!("expected {what}, got `{}`", self.text)))
    }
}

fn tokens(line: &str, lineno: usize) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Tok { text: &line[s..i], line: lineno, col: line[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Non-blank lines, `#` comments dropped, tokenized.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<Tok<'_>>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim_start();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, tokens(l, i + 1)))
        }
    })
}

fn end_of_input(text: &str) -> ParseError {
    ParseError::new(text.lines().count().max(1), 1, "unexpected end of input")
}

fn topology(tok: &Tok<'_>) -> Result<Topology, ParseError> {
    tok.text.parse().map_err(|e: String| tok.err(e))
}

fn single_record<'a>(text: &'a str, what: &str) -> Result<Vec<Tok<'a>>, ParseError> {
    let mut lines = content_lines(text);
    let (_, toks) = lines.next().ok_or_else(|| end_of_input(text))?;
    if let Some((l, extra)) = lines.next() {
        return Err(ParseError::new(l, extra[0].col, format!("unexpected second {what} record")));
    }
    Ok(toks)
}

// --------------------------------------------------------------- chains

pub fn emit_chain(chain: &FixedAngleChain) -> String {
    let angles = if chain.angles().is_empty() { "-".to_string() } else { chain.angle_string() };
    let mut s = format!("{} {angles}", chain.topology());
    if let Some(c) = chain.colors() {
        s.push(' ');
        s.extend(c.iter().map(|c| c.symbol()));
    }
    s.push('\n');
    s
}

pub fn parse_chain(text: &str) -> Result<FixedAngleChain, ParseError> {
    let toks = single_record(text, "chain")?;
    let top = topology(&toks[0])?;
    let at = toks.get(1).ok_or_else(|| toks[0].err("missing angle string"))?;
    let angles = if at.text == "-" {
        Vec::new()
    } else {
        at.text
            .chars()
            .enumerate()
            .map(|(i, ch)| match ch {
                'C' => Ok(Angle::Corner),
                'S' => Ok(Angle::Straight),
                _ => Err(ParseError::new(at.line, at.col + i, format!("expected C or S, got {ch:?}"))),
            })
            .collect::<Result<_, _>>()?
    };
    let colors = match toks.get(2) {
        None => None,
        Some(ct) => Some(
            ct.text
                .chars()
                .enumerate()
                .map(|(i, ch)| match ch {
                    'H' => Ok(Color::H),
                    'P' => Ok(Color::P),
                    _ => Err(ParseError::new(ct.line, ct.col + i, format!("expected H or P, got {ch:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    if let Some(t) = toks.get(3) {
        return Err(t.err("trailing input"));
    }
    FixedAngleChain::new(top, angles, colors).map_err(|e| toks[0].err(e))
}

// ------------------------------------------------------------- segments

pub fn emit_segments(seg: &SegmentDecomposition) -> String {
    let lens: Vec<String> = seg.lengths.iter().map(u64::to_string).collect();
    format!("{} {}\n", seg.topology, lens.join(","))
}

pub fn parse_segments(text: &str) -> Result<SegmentDecomposition, ParseError> {
    let toks = single_record(text, "segment")?;
    let top = topology(&toks[0])?;
    let lt = toks.get(1).ok_or_else(|| toks[0].err("missing segment lengths"))?;
    if let Some(t) = toks.get(2) {
        return Err(t.err("trailing input"));
    }
    let mut lengths = Vec::new();
    let mut col = lt.col;
    for part in lt.text.split(',') {
        let v: u64 = part.parse().map_err(|_| ParseError::new(lt.line, col, format!("expected a length, got `{part}`")))?;
        if v == 0 {
            return Err(ParseError::new(lt.line, col, "segment length must be positive"));
        }
        lengths.push(v);
        col += part.chars().count() + 1;
    }
    SegmentDecomposition::new(top, lengths).map_err(|e| lt.err(e))
}

// ---------------------------------------------------------------- turns

pub fn emit_turns(turns: &TurnSequence) -> String {
    format!("{turns}\n")
}

/// An empty file (or a lone `-`) is the empty sequence.
pub fn parse_turns(text: &str) -> Result<TurnSequence, ParseError> {
    let Some((_, toks)) = content_lines(text).next() else { return Ok(TurnSequence::default()) };
    if let Some((l, extra)) = content_lines(text).nth(1) {
        return Err(ParseError::new(l, extra[0].col, "unexpected second turn record"));
    }
    let t = &toks[0];
    if let Some(x) = toks.get(1) {
        return Err(x.err("trailing input"));
    }
    if t.text == "-" {
        return Ok(TurnSequence::default());
    }
    t.text
        .chars()
        .enumerate()
        .map(|(i, ch)| match ch {
            'L' => Ok(Turn::Left),
            'R' => Ok(Turn::Right),
            _ => Err(ParseError::new(t.line, t.col + i, format!("expected L or R, got {ch:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(TurnSequence)
}

// -------------------------------------------------------- configurations

pub fn emit_configuration(c: &LatticeConfiguration) -> String {
    let mut s = format!("{}\n", c.topology);
    for p in &c.points {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    s
}

pub fn parse_configuration(text: &str) -> Result<LatticeConfiguration, ParseError> {
    let mut lines = content_lines(text);
    let (_, head) = lines.next().ok_or_else(|| end_of_input(text))?;
    let top = topology(&head[0])?;
    if let Some(t) = head.get(1) {
        return Err(t.err("header takes no arguments"));
    }
    let mut points = Vec::new();
    for (l, toks) in lines {
        if toks.len() != 2 {
            let t = toks.get(2).unwrap_or(&toks[0]);
            return Err(ParseError::new(l, t.col, format!("expected `x y`, got {} fields", toks.len())));
        }
        points.push(Point::new(toks[0].int("an integer x")?, toks[1].int("an integer y")?));
    }
    Ok(LatticeConfiguration { topology: top, points })
}

// --------------------------------------------------------------- formula

pub fn emit_dimacs(f: &CnfFormula) -> String {
    let mut s = format!("p cnf {} {}\n", f.num_vars, f.num_clauses());
    for c in &f.clauses {
        for l in c {
            let _ = write!(s, "{} ", l.to_dimacs());
        }
        s.push_str("0\n");
    }
    s
}

/// DIMACS CNF. Clauses may span lines; each ends with `0`.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current = Vec::new();
    let mut last = Tok { text: "", line: 1, col: 1 };
    for (i, l) in text.lines().enumerate() {
        let toks = tokens(l, i + 1);
        let Some(first) = toks.first() else { continue };
        if first.text == "c" || first.text.starts_with('%') {
            continue;
        }
        if first.text == "p" {
            if header.is_some() {
                return Err(first.err("duplicate problem line"));
            }
            if toks.len() != 4 || toks[1].text != "cnf" {
                return Err(first.err("expected `p cnf <vars> <clauses>`"));
            }
            header = Some((toks[2].int("a variable count")?, toks[3].int("a clause count")?));
            continue;
        }
        let (n, _) = header.ok_or_else(|| first.err("clause before the `p cnf` line"))?;
        for t in toks {
            let v: i64 = t.int("a literal")?;
            if v == 0 {
                if current.is_empty() {
                    return Err(t.err("empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if v.unsigned_abs() as usize > n {
                    return Err(t.err(format!("variable {} out of range 1..={n}", v.abs())));
                }
                current.push(Literal { var: v.unsigned_abs() as usize - 1, positive: v > 0 });
            }
            last = t;
        }
    }
    let (n, m) = header.ok_or_else(|| end_of_input(text))?;
    if !current.is_empty() {
        return Err(last.err("last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(ParseError::new(last.line, last.col, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(n, clauses).map_err(|e| ParseError::new(last.line, 1, e))
}

pub fn emit_drawing(d: &LeveledDrawing) -> String {
    let mut s = String::new();
    for (i, p) in d.vars.iter().enumerate() {
        let _ = writeln!(s, "v {} {} {}", i + 1, p.row, p.x);
    }
    for (i, p) in d.clauses.iter().enumerate() {
        let _ = writeln!(s, "c {} {} {}", i + 1, p.row, p.x);
    }
    s
}

/// Drawing sidecar. Ids must cover `1..=count` for each kind, in any order.
pub fn parse_drawing(text: &str) -> Result<LeveledDrawing, ParseError> {
    let mut vars: Vec<Option<GridPos>> = Vec::new();
    let mut clauses: Vec<Option<GridPos>> = Vec::new();
    let mut last = Tok { text: "", line: 1, col: 1 };
    for (_, toks) in content_lines(text) {
        let t = &toks[0];
        let slot = match t.text {
            "v" => &mut vars,
            "c" => &mut clauses,
            _ => return Err(t.err(format!("expected `v` or `c`, got `{}`", t.text))),
        };
        if toks.len() != 4 {
            return Err(t.err(format!("expected `{} <id> <row> <x>`", t.text)));
        }
        let id: usize = toks[1].int("a positive id")?;
        if id == 0 {
            return Err(toks[1].err("ids start at 1"));
        }
        let pos = GridPos { row: toks[2].int("a row")?, x: toks[3].int("an x position")? };
        if slot.len() < id {
            slot.resize(id, None);
        }
        if slot[id - 1].replace(pos).is_some() {
            return Err(toks[1].err(format!("duplicate id {id}")));
        }
        last = toks[0];
    }
    let finish = |v: Vec<Option<GridPos>>, kind: &str| {
        v.iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| last.err(format!("missing {kind} {}", i + 1))))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(LeveledDrawing { vars: finish(vars, "variable")?, clauses: finish(clauses, "clause")? })
}

// ------------------------------------------------------------ assignment

pub fn emit_assignment(a: &[bool]) -> String {
    a.iter().enumerate().map(|(i, &v)| format!("{}={}\n", i + 1, u8::from(v))).collect()
}

/// Every variable `1..=n` must appear exactly once.
pub fn parse_assignment(text: &str) -> Result<Vec<bool>, ParseError> {
    let mut vals: Vec<Option<bool>> = Vec::new();
    let mut last = Tok { text: "", line: 1, col: 1 };
    for (_, toks) in content_lines(text) {
        for t in toks {
            let (var, val) = t.text.split_once('=').ok_or_else(|| t.err("expected `<var>=0|1`"))?;
            let id: usize = var.parse().ok().filter(|&i| i > 0).ok_or_else(|| t.err(format!("bad variable `{var}`")))?;
            let v = match val {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(ParseError::new(t.line, t.col + var.len() + 1, format!("expected 0 or 1, got `{val}`")));
                }
            };
            if vals.len() < id {
                vals.resize(id, None);
            }
            if vals[id - 1].replace(v).is_some() {
                return Err(t.err(format!("variable {id} assigned twice")));
            }
            last = t;
        }
    }
    vals.iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| last.err(format!("variable {} missing", i + 1))))
        .collect()
}

// -------------------------------------------------------------- artifact

pub fn emit_artifact(a: &ReductionArtifact) -> String {
    let mut s = serde_json::to_string(a).expect("artifact serializes");
    s.push('\n');
    s
}

pub fn parse_artifact(text: &str) -> Result<ReductionArtifact, ParseError> {
    let a: ReductionArtifact = serde_json::from_str(text).map_err(|e| ParseError::new(e.line(), e.column(), &e))?;
    a.check_version().map_err(|e| ParseError::new(1, 1, e))?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::segments_of;
    use proptest::prelude::*;

    #[test]
    fn bowtie_chain_text() {
        let c = parse_chain("closed CCSCCCSC").unwrap();
        assert!(c.is_closed());
        assert_eq!(c.vertex_count(), 8);
        assert_eq!(segments_of(&c).unwrap().canonical_lengths(), vec![1, 1, 2, 1, 1, 2]);
        assert_eq!(emit_chain(&c), "closed CCSCCCSC\n");
    }

    #[test]
    fn colored_and_empty_chains() {
        for s in ["open SCS HPPPH\n", "open - HH\n", "open -\n", "closed C\n"] {
            assert_eq!(emit_chain(&parse_chain(s).unwrap()), s);
        }
    }

    #[test]
    fn turns_round_trip() {
        let t = parse_turns("LRLRL").unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(emit_turns(&t), "LRLRL\n");
        assert_eq!(parse_turns(&emit_turns(&t)).unwrap(), t);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_chain("# header\nclosed CCXC").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        let e = parse_turns("LLQ").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
        let e = parse_segments("open 1,0,2").unwrap_err();
        assert_eq!((e.line, e.col), (1, 8));
        let e = parse_configuration("open\n0 0\n1 x\n").unwrap_err();
        assert_eq!((e.line, e.col), (3, 3));
        let e = parse_dimacs("p cnf 2 1\n1 -3 0\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_assignment("1=1\n2=2\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_drawing("v 1 0 0\nq 1 0 0\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.to_string().starts_with("line 2, column 1:"));
    }

    #[test]
    fn four_clause_dimacs_and_sidecar() {
        let cnf = "c leveled instance\np cnf 4 4\n-2 -3 -4 0\n4 3 -1 0\n-3 1 0\n1 2 3 0\n";
        let f = parse_dimacs(cnf).unwrap();
        assert_eq!(f.num_vars, 4);
        assert_eq!(f.clauses[0], vec![Literal::neg(1), Literal::neg(2), Literal::neg(3)]);
        assert!(f.eval(&[true, false, true, true]));
        let side = "v 1 5 1\nv 2 3 2\nv 3 3 1\nv 4 3 0\nc 1 2 1\nc 2 4 0\nc 3 4 1\nc 4 4 2\n";
        let d = parse_drawing(side).unwrap();
        d.validate(&f).unwrap();
        assert_eq!(emit_drawing(&d), side);
        assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn dimacs_rejects_bad_counts() {
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n1\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 -1 0\n").is_err());
    }

    #[test]
    fn assignment_needs_every_variable() {
        assert_eq!(parse_assignment("2=0\n1=1\n").unwrap(), vec![true, false]);
        assert!(parse_assignment("2=0\n").is_err());
        assert!(parse_assignment("1=0\n1=1\n").is_err());
    }

    fn turn() -> impl Strategy<Value = Turn> {
        prop_oneof![Just(Turn::Left), Just(Turn::Right)]
    }

    proptest! {
        #[test]
        fn chain_round_trip(
            closed in any::<bool>(),
            angles in prop::collection::vec(prop_oneof![Just(Angle::Corner), Just(Angle::Straight)], 1..40),
            colored in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let top = if closed { Topology::Closed } else { Topology::Open };
            let c = FixedAngleChain::new(top, angles, None).unwrap();
            let c = if colored {
                let cols = (0..c.vertex_count()).map(|i| if seed >> (i % 64) & 1 == 1 { Color::H } else { Color::P }).collect();
                c.with_colors(cols).unwrap()
            } else {
                c
            };
            let s = emit_chain(&c);
            let back = parse_chain(&s).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(emit_chain(&back), s);
        }

        #[test]
        fn turns_and_segments_round_trip(t in prop::collection::vec(turn(), 0..50), lens in prop::collection::vec(1u64..1_000_000_000, 1..30), closed in any::<bool>()) {
            let t = TurnSequence(t);
            prop_assert_eq!(parse_turns(&emit_turns(&t)).unwrap(), t);
            let top = if closed { Topology::Closed } else { Topology::Open };
            let seg = SegmentDecomposition::new(top, lens).unwrap();
            let back = parse_segments(&emit_segments(&seg)).unwrap();
            prop_assert_eq!(&back.lengths, &seg.lengths);
            prop_assert_eq!(back.topology, seg.topology);
        }

        #[test]
        fn configuration_round_trip(pts in prop::collection::vec((-1000i64..1000, -1000i64..1000), 0..40), closed in any::<bool>()) {
            let c = LatticeConfiguration {
                topology: if closed { Topology::Closed } else { Topology::Open },
                points: pts.into_iter().map(|(x, y)| Point::new(x, y)).collect(),
            };
            prop_assert_eq!(parse_configuration(&emit_configuration(&c)).unwrap(), c);
        }

        #[test]
        fn assignment_round_trip(a in prop::collection::vec(any::<bool>(), 0..30)) {
            prop_assert_eq!(parse_assignment(&emit_assignment(&a)).unwrap(), a);
        }
    }
}
