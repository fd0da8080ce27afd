//! Attributed bit transcripts and the session that produces or replays them.
//!
//! Protocol code never reads the private inputs directly. It asks the
//! [`Session`] for a bit from Alice or Bob by passing a closure over that
//! player's input. A live session evaluates the closure and records the bit;
//! a replay session ignores the closure and reads the next recorded bit. The
//! public state of a run is therefore a function of the transcript alone.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn letter(self) -> char {
        match self {
            Party::Alice => 'A',
            Party::Bob => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'A' => Some(Party::Alice),
            'B' => Some(Party::Bob),
            _ => None,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bit {
    pub from: Party,
    pub value: bool,
}

/// Bits exchanged during one step of one round.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    pub round: usize,
    pub step: String,
    pub bits: Vec<Bit>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    frames: Vec<Frame>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_frames(frames: Vec<Frame>) -> Self {
        Transcript { frames }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn total_bits(&self) -> usize {
        self.frames.iter().map(|f| f.bits.len()).sum()
    }

    pub fn bits_from(&self, party: Party) -> usize {
        self.bits().filter(|b| b.from == party).count()
    }

    pub fn bits(&self) -> impl Iterator<Item = &Bit> {
        self.frames.iter().flat_map(|f| f.bits.iter())
    }

    /// Total bits over frames whose step tag starts with `prefix`.
    pub fn bits_in(&self, prefix: &str) -> usize {
        self.frames.iter().filter(|f| f.step.starts_with(prefix)).map(|f| f.bits.len()).sum()
    }

    /// The bit string alone, e.g. `"1011"`.
    pub fn bitstring(&self) -> String {
        self.bits().map(|b| if b.value { '1' } else { '0' }).collect()
    }

    fn push_frame(&mut self, round: usize, step: String) {
        self.frames.push(Frame { round, step, bits: Vec::new() });
    }

    fn push_bit(&mut self, bit: Bit) {
        match self.frames.last_mut() {
            Some(frame) => frame.bits.push(bit),
            None => self.frames.push(Frame { round: 0, step: String::new(), bits: vec![bit] }),
        }
    }
}

enum Mode {
    Live { x: usize, y: usize },
    Replay { source: Transcript, flat: Vec<Bit>, pos: usize },
}

/// A protocol execution context; see the module docs.
pub struct Session {
    mode: Mode,
    transcript: Transcript,
    scope: Vec<String>,
}

impl Session {
    pub fn live(x: usize, y: usize) -> Self {
        Session { mode: Mode::Live { x, y }, transcript: Transcript::new(), scope: Vec::new() }
    }

    pub fn replay(source: &Transcript) -> Self {
        let flat = source.bits().copied().collect();
        Session {
            mode: Mode::Replay { source: source.clone(), flat, pos: 0 },
            transcript: Transcript::new(),
            scope: Vec::new(),
        }
    }

    pub fn is_replay(&self) -> bool {
        matches!(self.mode, Mode::Replay { .. })
    }

    /// Bits exchanged so far in this session.
    pub fn bits_so_far(&self) -> usize {
        self.transcript.total_bits()
    }

    /// Opens a new frame; subsequent bits are attributed to it.
    pub fn begin(&mut self, round: usize, step: &str) {
        let tag = if self.scope.is_empty() { step.to_string() } else { format!("{}/{}", self.scope.join("/"), step) };
        self.transcript.push_frame(round, tag);
    }

    /// Runs `f` with `tag` prefixed to every frame it opens.
    pub fn scoped<R>(&mut self, tag: impl Into<String>, f: impl FnOnce(&mut Self) -> R) -> R {
        self.scope.push(tag.into());
        let out = f(self);
        self.scope.pop();
        out
    }

    fn send(&mut self, from: Party, value: impl FnOnce(usize, usize) -> bool) -> Result<bool> {
        let value = match &mut self.mode {
            Mode::Live { x, y } => value(*x, *y),
            Mode::Replay { flat, pos, .. } => {
                let bit = flat
                    .get(*pos)
                    .copied()
                    .ok_or_else(|| Error::Replay(format!("transcript exhausted after {pos} bits")))?;
                if bit.from != from {
                    return Err(Error::Replay(format!(
                        "bit {pos} was sent by {} but the protocol expects {from}",
                        bit.from
                    )));
                }
                *pos += 1;
                bit.value
            }
        };
        self.transcript.push_bit(Bit { from, value });
        Ok(value)
    }

    /// One bit computed by Alice from her input.
    pub fn alice(&mut self, f: impl FnOnce(usize) -> bool) -> Result<bool> {
        self.send(Party::Alice, |x, _| f(x))
    }

    /// One bit computed by Bob from his input.
    pub fn bob(&mut self, f: impl FnOnce(usize) -> bool) -> Result<bool> {
        self.send(Party::Bob, |_, y| f(y))
    }

    /// A `width`-bit unsigned value from `party`, most significant bit first.
    pub fn word(&mut self, party: Party, width: u32, f: impl FnOnce(usize) -> usize) -> Result<usize> {
        let value = match &self.mode {
            Mode::Live { x, y } => {
                let v = f(if party == Party::Alice { *x } else { *y });
                if width < usize::BITS && v >> width != 0 {
                    return Err(Error::invariant(format!("value {v} does not fit in {width} bits")));
                }
                Some(v)
            }
            Mode::Replay { .. } => None,
        };
        let mut out = 0usize;
        for k in (0..width).rev() {
            let b = match value {
                Some(v) => self.send(party, |_, _| v >> k & 1 == 1)?,
                None => self.send(party, |_, _| unreachable!())?,
            };
            out = out << 1 | b as usize;
        }
        Ok(out)
    }

    /// Finishes the session. A replay must consume the whole source and
    /// reproduce its framing exactly.
    pub fn finish(self) -> Result<Transcript> {
        if let Mode::Replay { source, flat, pos } = &self.mode {
            if *pos != flat.len() {
                return Err(Error::Replay(format!("protocol halted after {pos} of {} recorded bits", flat.len())));
            }
            if *source != self.transcript {
                return Err(Error::Replay("frame structure differs from the recorded transcript".into()));
            }
        }
        Ok(self.transcript)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(session: &mut Session) -> Result<(bool, usize)> {
        session.begin(1, "ask");
        let a = session.alice(|x| x % 2 == 1)?;
        let w = session.word(Party::Bob, 3, |y| y)?;
        Ok((a, w))
    }

    #[test]
    fn live_then_replay_agree() {
        let mut live = Session::live(3, 5);
        let out = toy(&mut live).unwrap();
        let t = live.finish().unwrap();
        assert_eq!(out, (true, 5));
        assert_eq!(t.total_bits(), 4);
        assert_eq!(t.bitstring(), "1101");
        assert_eq!(t.bits_from(Party::Bob), 3);

        let mut replay = Session::replay(&t);
        assert_eq!(toy(&mut replay).unwrap(), out);
        assert_eq!(replay.finish().unwrap(), t);
    }

    #[test]
    fn replay_detects_sender_mismatch_and_leftovers() {
        let t = Transcript::from_frames(vec![Frame {
            round: 1,
            step: "ask".into(),
            bits: vec![Bit { from: Party::Bob, value: true }],
        }]);
        let mut s = Session::replay(&t);
        s.begin(1, "ask");
        assert!(matches!(s.alice(|_| true), Err(Error::Replay(_))));

        let s = Session::replay(&t);
        assert!(matches!(s.finish(), Err(Error::Replay(_))));
    }

    #[test]
    fn scoped_tags() {
        let mut s = Session::live(0, 0);
        s.scoped("outer", |s| {
            s.begin(2, "inner");
            s.bob(|_| false).unwrap();
        });
        let t = s.finish().unwrap();
        assert_eq!(t.frames()[0].step, "outer/inner");
        assert_eq!(t.bits_in("outer"), 1);
    }
}
