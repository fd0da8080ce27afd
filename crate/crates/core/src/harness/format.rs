//! Line-oriented text formats for instances, pattern families and transcripts.
//!
//! ```text
//! # comment
//! COVER <rows> <cols>
//! <rows lines of <cols> 0/1 characters>
//! R <rowmask> <colmask>          one per rectangle
//! COST <bits>                    optional
//! META <key> <value>             optional, any number
//! END
//!
//! DECOMPOSITION <rows> <cols> <depth> <m>
//! PART <cost>                    m times, each followed by its leaves
//! L <rowmask> <colmask> <label>
//!
//! TRIPARTITE <a> <b> <c>
//! Z <z>                          c times, each followed by a lines of b bits
//!
//! PATTERNS <m>
//! P <bitstring>
//!
//! TRANSCRIPT
//! F <round> <step> <bits>        bits like A1B0B1, `-` when empty
//! ```
//!
//! Masks and bit strings list index 0 first. `depth` is the largest part
//! cost. Every document ends with `END`, so truncation is always detected.
//! `META` keys that can be recomputed from the payload are checked on parse.

use crate::bits::{index_width, Mask, Pattern};
use crate::error::{Error, Result};
use crate::instance::BipartiteInstance;
use crate::partition::{Leaf, MonochromaticPartition};
use crate::patterns::{effective_k, CellPatterns, Decomposition, PatternFamily};
use crate::rect::{Rectangle, RectangleCover};
use crate::threeparty::{canonical_one_way, TripartiteInstance};
use crate::transcript::{Bit, Frame, Party, Transcript};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Cover(RectangleCover),
    Decomposition(Decomposition),
    Tripartite(TripartiteInstance),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Cover(_) => "cover",
            Payload::Decomposition(_) => "decomposition",
            Payload::Tripartite(_) => "tripartite",
        }
    }
}

/// An instance plus free-form metadata. Derived keys (see [`derived_meta`])
/// must agree with the payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceBundle {
    pub payload: Payload,
    pub meta: BTreeMap<String, String>,
}

impl InstanceBundle {
    /// Bundles `payload` with its derived metadata.
    pub fn new(payload: Payload) -> Result<Self> {
        let meta = derived_meta(&payload)?;
        Ok(InstanceBundle { payload, meta })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    /// Recomputes every derived key and compares.
    pub fn check_meta(&self) -> Result<()> {
        for (k, v) in derived_meta(&self.payload)? {
            if let Some(stated) = self.meta.get(&k) {
                if *stated != v {
                    return Err(Error::input(format!("META {k} says {stated}, recomputed {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Metadata recomputable from the payload: dims, `m`, costs, `|Γ|`, effective
/// `k` and, for tripartite instances, `ℓ`.
pub fn derived_meta(payload: &Payload) -> Result<BTreeMap<String, String>> {
    let mut meta = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        meta.insert(k.to_string(), v);
    };
    match payload {
        Payload::Cover(c) => {
            let gamma = CellPatterns::of_cover(c)?.family().len();
            put("dims", format!("{}x{}", c.instance().rows(), c.instance().cols()));
            put("rects", c.rects().len().to_string());
            put("cost", c.declared_cost().to_string());
            put("gamma", gamma.to_string());
            put("effective_k", effective_k(c.declared_cost(), gamma).to_string());
        }
        Payload::Decomposition(d) => {
            let gamma = CellPatterns::of_decomposition(d)?.family().len();
            put("dims", format!("{}x{}", d.rows(), d.cols()));
            put("m", d.m().to_string());
            put("k", d.max_cost().to_string());
            put("gamma", gamma.to_string());
            put("effective_k", effective_k(d.max_cost(), gamma).to_string());
        }
        Payload::Tripartite(g) => {
            let (a, b, c) = g.dims();
            let catalog = canonical_one_way(g);
            put("dims", format!("{a}x{b}x{c}"));
            put("catalog", catalog.len().to_string());
            put("ell", catalog.ell().to_string());
        }
    }
    Ok(meta)
}

fn matrix_lines(out: &mut String, rows: usize, cols: usize, value: impl Fn(usize, usize) -> bool) {
    for x in 0..rows {
        out.extend((0..cols).map(|y| if value(x, y) { '1' } else { '0' }));
        out.push('\n');
    }
}

pub fn serialize_bundle(bundle: &InstanceBundle) -> String {
    let mut out = String::new();
    match &bundle.payload {
        Payload::Cover(c) => {
            let inst = c.instance();
            let _ = writeln!(out, "COVER {} {}", inst.rows(), inst.cols());
            matrix_lines(&mut out, inst.rows(), inst.cols(), |x, y| inst.value(x, y));
            for r in c.rects() {
                let _ = writeln!(out, "R {} {}", r.rows, r.cols);
            }
            if c.declared_cost() != index_width(c.rects().len()) {
                let _ = writeln!(out, "COST {}", c.declared_cost());
            }
        }
        Payload::Decomposition(d) => {
            let _ = writeln!(out, "DECOMPOSITION {} {} {} {}", d.rows(), d.cols(), d.max_cost(), d.m());
            for p in d.parts() {
                let _ = writeln!(out, "PART {}", p.declared_cost());
                for leaf in p.leaves() {
                    let _ = writeln!(out, "L {} {} {}", leaf.rect.rows, leaf.rect.cols, leaf.label as u8);
                }
            }
        }
        Payload::Tripartite(g) => {
            let (a, b, c) = g.dims();
            let _ = writeln!(out, "TRIPARTITE {a} {b} {c}");
            for z in 0..c {
                let _ = writeln!(out, "Z {z}");
                matrix_lines(&mut out, a, b, |x, y| g.value(x, y, z));
            }
        }
    }
    for (k, v) in &bundle.meta {
        let _ = writeln!(out, "META {k} {v}");
    }
    out.push_str("END\n");
    out
}

pub fn serialize_patterns(family: &PatternFamily) -> String {
    let mut out = format!("PATTERNS {}\n", family.universe());
    for p in family.patterns() {
        let _ = writeln!(out, "P {}", p.to_bitstring(family.universe()));
    }
    out.push_str("END\n");
    out
}

pub fn serialize_transcript(t: &Transcript) -> String {
    let mut out = String::from("TRANSCRIPT\n");
    for f in t.frames() {
        let bits: String = f.bits.iter().flat_map(|b| [b.from.letter(), if b.value { '1' } else { '0' }]).collect();
        let step = if f.step.is_empty() { "-" } else { &f.step };
        let _ = writeln!(out, "F {} {} {}", f.round, step, if bits.is_empty() { "-" } else { &bits });
    }
    out.push_str("END\n");
    out
}

/// Significant lines with their 1-based numbers.
struct Lines<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut last = 0;
        let lines = text
            .lines()
            .enumerate()
            .inspect(|(i, _)| last = i + 1)
            .filter_map(|(i, l)| {
                let l = l.split('#').next().unwrap_or("").trim();
                (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
            })
            .collect();
        Lines { lines, pos: 0, last }
    }

    /// A document cut short lacks its final `END`; report the cut before any
    /// structural error it would otherwise cause.
    fn ensure_terminated(&self) -> Result<()> {
        match self.lines.last() {
            Some((_, toks)) if toks[0] == "END" => Ok(()),
            _ => Err(Error::Parse { line: self.last + 1, message: "unexpected end of file".into() }),
        }
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let item = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or(Error::Parse { line: self.last + 1, message: "unexpected end of file".into() })?;
        self.pos += 1;
        Ok(item)
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|(_, t)| t[0])
    }

    fn expect(&mut self, keyword: &str, arity: usize) -> Result<(usize, Vec<&'a str>)> {
        let (line, toks) = self.next()?;
        if toks[0] != keyword || toks.len() != arity + 1 {
            return Err(err(line, format!("expected `{keyword}` with {arity} fields, found `{}`", toks.join(" "))));
        }
        Ok((line, toks))
    }

    fn finish(&mut self) -> Result<()> {
        self.expect("END", 0)?;
        match self.lines.get(self.pos) {
            Some((line, _)) => Err(err(*line, "content after END")),
            None => Ok(()),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn num(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| err(line, format!("`{tok}` is not a non-negative integer")))
}

fn mask(line: usize, tok: &str, len: usize) -> Result<Mask> {
    match Mask::parse(tok) {
        Some(m) if m.len() == len => Ok(m),
        _ => Err(err(line, format!("`{tok}` is not a bit string of length {len}"))),
    }
}

fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => err(line, other.to_string()),
    }
}

fn matrix(lines: &mut Lines, rows: usize, cols: usize, into: &mut Vec<bool>) -> Result<()> {
    for _ in 0..rows {
        let (line, toks) = lines.next()?;
        if toks.len() != 1 {
            return Err(err(line, "expected one matrix row"));
        }
        let row = mask(line, toks[0], cols)?;
        into.extend((0..cols).map(|y| row.get(y)));
    }
    Ok(())
}

fn meta(lines: &mut Lines, bundle: &mut BTreeMap<String, String>) -> Result<()> {
    while lines.peek_keyword() == Some("META") {
        let (line, toks) = lines.next()?;
        if toks.len() < 3 {
            return Err(err(line, "META needs a key and a value"));
        }
        bundle.insert(toks[1].to_string(), toks[2..].join(" "));
    }
    Ok(())
}

pub fn parse_bundle(text: &str) -> Result<InstanceBundle> {
    let mut lines = Lines::new(text);
    lines.ensure_terminated()?;
    let (hline, head) = lines.next()?;
    let payload = match head[0] {
        "COVER" if head.len() == 3 => {
            let (rows, cols) = (num(hline, head[1])?, num(hline, head[2])?);
            let mut table = Vec::new();
            matrix(&mut lines, rows, cols, &mut table)?;
            let instance = BipartiteInstance::new(rows, cols, table).map_err(at_line(hline))?;
            let mut rects = Vec::new();
            while lines.peek_keyword() == Some("R") {
                let (line, t) = lines.expect("R", 2)?;
                rects.push(Rectangle::new(mask(line, t[1], rows)?, mask(line, t[2], cols)?));
            }
            let mut cover = RectangleCover::new(instance, rects).map_err(at_line(hline))?;
            if lines.peek_keyword() == Some("COST") {
                let (line, t) = lines.expect("COST", 1)?;
                cover = cover.with_declared_cost(num(line, t[1])? as u32);
            }
            Payload::Cover(cover)
        }
        "DECOMPOSITION" if head.len() == 5 => {
            let (rows, cols) = (num(hline, head[1])?, num(hline, head[2])?);
            let (depth, m) = (num(hline, head[3])?, num(hline, head[4])?);
            let mut parts = Vec::with_capacity(m);
            for _ in 0..m {
                let (pline, t) = lines.expect("PART", 1)?;
                let cost = num(pline, t[1])? as u32;
                let mut leaves = Vec::new();
                while lines.peek_keyword() == Some("L") {
                    let (line, t) = lines.expect("L", 3)?;
                    let label = match t[3] {
                        "0" => false,
                        "1" => true,
                        other => return Err(err(line, format!("leaf label `{other}` is not 0 or 1"))),
                    };
                    leaves.push(Leaf { rect: Rectangle::new(mask(line, t[1], rows)?, mask(line, t[2], cols)?), label });
                }
                parts.push(MonochromaticPartition::from_leaves(rows, cols, leaves, cost).map_err(at_line(pline))?);
            }
            let d = Decomposition::new(rows, cols, parts).map_err(at_line(hline))?;
            if d.max_cost() as usize != depth {
                return Err(err(hline, format!("depth {depth} but the largest part cost is {}", d.max_cost())));
            }
            Payload::Decomposition(d)
        }
        "TRIPARTITE" if head.len() == 4 => {
            let (a, b, c) = (num(hline, head[1])?, num(hline, head[2])?, num(hline, head[3])?);
            let mut layers = Vec::with_capacity(c);
            for z in 0..c {
                let (line, t) = lines.expect("Z", 1)?;
                if num(line, t[1])? != z {
                    return Err(err(line, format!("expected layer Z {z}")));
                }
                let mut layer = Vec::new();
                matrix(&mut lines, a, b, &mut layer)?;
                layers.push(layer);
            }
            let g = TripartiteInstance::from_fn(a, b, c, |x, y, z| layers[z][x * b + y]).map_err(at_line(hline))?;
            Payload::Tripartite(g)
        }
        _ => return Err(err(hline, format!("unknown or malformed header `{}`", head.join(" ")))),
    };
    let mut bundle = InstanceBundle { payload, meta: BTreeMap::new() };
    meta(&mut lines, &mut bundle.meta)?;
    lines.finish()?;
    bundle.check_meta().map_err(at_line(hline))?;
    Ok(bundle)
}

pub fn parse_patterns(text: &str) -> Result<PatternFamily> {
    let mut lines = Lines::new(text);
    lines.ensure_terminated()?;
    let (hline, head) = lines.expect("PATTERNS", 1)?;
    let m = num(hline, head[1])?;
    let mut patterns = Vec::new();
    while lines.peek_keyword() == Some("P") {
        let (line, t) = lines.expect("P", 1)?;
        match Pattern::parse(t[1]) {
            Some(p) if t[1].len() == m => patterns.push(p),
            _ => return Err(err(line, format!("`{}` is not a pattern over {m} witnesses", t[1]))),
        }
    }
    lines.finish()?;
    PatternFamily::new(m, patterns).map_err(at_line(hline))
}

pub fn parse_transcript(text: &str) -> Result<Transcript> {
    let mut lines = Lines::new(text);
    lines.ensure_terminated()?;
    lines.expect("TRANSCRIPT", 0)?;
    let mut frames = Vec::new();
    while lines.peek_keyword() == Some("F") {
        let (line, t) = lines.expect("F", 3)?;
        let round = num(line, t[1])?;
        let step = if t[2] == "-" { String::new() } else { t[2].to_string() };
        let mut bits = Vec::new();
        if t[3] != "-" {
            let chars: Vec<char> = t[3].chars().collect();
            if !chars.len().is_multiple_of(2) {
                return Err(err(line, "bits come in sender/value pairs"));
            }
            for pair in chars.chunks(2) {
                let from =
                    Party::from_letter(pair[0]).ok_or_else(|| err(line, format!("unknown sender `{}`", pair[0])))?;
                let value = match pair[1] {
                    '0' => false,
                    '1' => true,
                    c => return Err(err(line, format!("bit value `{c}`"))),
                };
                bits.push(Bit { from, value });
            }
        }
        frames.push(Frame { round, step, bits });
    }
    lines.finish()?;
    Ok(Transcript::from_frames(frames))
}
