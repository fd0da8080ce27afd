//! Deterministic simulation of a rectangle cover with few accepting patterns.
//!
//! Both players track the live sub-domain `A_j × B_j` and its pattern family
//! `Γ_j`. Each round one of three public rules picks a rectangle (heavy
//! rectangle, Alice-side shrink, Bob-side shrink) and at most
//! `3 + 2·ceil(log2 |R|)` bits test membership of `(x, y)` in it. A ⊤ answer is
//! always backed by a rectangle containing the input; every continuing round
//! drops at least a third of `Γ_j`.
//!
//! Framing per round:
//! - heavy rectangle (`phi.step3`): Alice sends `[x ∈ r_A]`, Bob `[y ∈ r_B]`.
//! - Alice shrink (`phi.step4`): Alice sends a found bit, then the index of her
//!   rectangle in the public candidate list; Bob replies `[y ∈ r_B]`.
//! - Bob shrink (`phi.step5`): the mirror image.
//! - otherwise the answer is ⊥ and nothing is sent.
//!
//! A shrink step whose candidate list is empty is skipped without sending
//! its found bit, since both players already know it would be zero.

use crate::bits::{ceil_log2, ceil_log_three_halves, index_width, Mask, Pattern};
use crate::error::{Error, Result};
use crate::patterns::{CellPatterns, PatternFamily};
use crate::rect::{Rectangle, RectangleCover};
use crate::transcript::{Party, Session, Transcript};

/// What a round did. Rectangle indices refer to the cover's canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PhiAction {
    Heavy { rect: usize, x_in: bool, y_in: bool },
    AliceShrink { rect: usize, y_in: bool },
    BobShrink { rect: usize, x_in: bool },
    Reject,
}

/// Public state at the start of a round, with the action it led to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhiState {
    pub round: usize,
    pub rows: Mask,
    pub cols: Mask,
    pub family: PatternFamily,
    pub action: PhiAction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiRun {
    pub verdict: bool,
    /// Rectangle found to contain the input when the verdict is ⊤.
    pub witness: Option<usize>,
    pub transcript: Transcript,
    pub trace: Vec<PhiState>,
}

impl PhiRun {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }
}

/// `ceil(log_{3/2} |Γ|) + 1`, the proven round bound.
pub fn round_bound(family_size: usize) -> usize {
    ceil_log_three_halves(family_size) as usize + 1
}

/// `rounds · (3 + 2·ceil(log2 max(|R|, 2)))`
pub fn bit_bound(rounds: usize, rects: usize) -> usize {
    rounds * (3 + 2 * index_width(rects) as usize)
}

pub fn run_phi(cover: &RectangleCover, x: usize, y: usize) -> Result<PhiRun> {
    cover.instance().check_cell(x, y)?;
    let mut session = Session::live(x, y);
    let (verdict, witness, trace) = drive(cover, &mut session)?;
    Ok(PhiRun { verdict, witness, transcript: session.finish()?, trace })
}

/// Reconstructs a run from its transcript alone.
pub fn replay_phi(cover: &RectangleCover, transcript: &Transcript) -> Result<PhiRun> {
    let mut session = Session::replay(transcript);
    let (verdict, witness, trace) = drive(cover, &mut session)?;
    Ok(PhiRun { verdict, witness, transcript: session.finish()?, trace })
}

/// For each pattern, the rows lying in every one of its rectangles.
fn common_rows(rects: &[Rectangle], family: &PatternFamily, rows: usize) -> Vec<Mask> {
    family.patterns().iter().map(|p| p.iter().fold(Mask::ones(rows), |acc, i| acc.and(&rects[i].rows))).collect()
}

fn common_cols(rects: &[Rectangle], family: &PatternFamily, cols: usize) -> Vec<Mask> {
    family.patterns().iter().map(|p| p.iter().fold(Mask::ones(cols), |acc, i| acc.and(&rects[i].cols))).collect()
}

/// Patterns `γ` such that no live row of `side ∩ live` lies in all of `γ`'s
/// rectangles, i.e. `γ` cannot occur anywhere in `(live ∩ side) × …`.
fn excluded_count(live: &Mask, side: &Mask, common: &[Mask]) -> usize {
    let inner = live.and(side);
    common.iter().filter(|c| !c.intersects(&inner)).count()
}

fn drive(cover: &RectangleCover, session: &mut Session) -> Result<(bool, Option<usize>, Vec<PhiState>)> {
    let cells = CellPatterns::of_cover(cover)?;
    let rects = cover.rects();
    let (nrows, ncols) = (cover.instance().rows(), cover.instance().cols());
    let guard = ceil_log_three_halves(cells.family().len()) as usize + 2;

    let mut rows = Mask::ones(nrows);
    let mut cols = Mask::ones(ncols);
    let mut trace = Vec::new();

    for round in 1.. {
        if round > guard {
            return Err(Error::invariant(format!("Φ exceeded its round guard of {guard}")));
        }
        let family = cells.restricted(&rows, &cols);
        let n = family.len();
        let heavy = |count: usize| n > 0 && 3 * count >= n;
        let mut state = PhiState { round, rows: rows.clone(), cols: cols.clone(), family, action: PhiAction::Reject };

        if let Some(r) = (0..rects.len()).find(|&r| heavy(state.family.count_containing(r))) {
            let rect = &rects[r];
            session.begin(round, "phi.step3");
            let x_in = session.alice(|x| rect.rows.get(x))?;
            let y_in = session.bob(|y| rect.cols.get(y))?;
            state.action = PhiAction::Heavy { rect: r, x_in, y_in };
            trace.push(state);
            if x_in && y_in {
                return Ok((true, Some(r), trace));
            }
            if !x_in {
                rows = rows.and_not(&rect.rows);
            }
            if !y_in {
                cols = cols.and_not(&rect.cols);
            }
            continue;
        }

        let common_r = common_rows(rects, &state.family, nrows);
        let alice_list: Vec<usize> =
            (0..rects.len()).filter(|&r| heavy(excluded_count(&rows, &rects[r].rows, &common_r))).collect();
        if !alice_list.is_empty() {
            session.begin(round, "phi.step4");
            let pick = |x: usize| alice_list.iter().position(|&r| rects[r].rows.get(x));
            if session.alice(|x| pick(x).is_some())? {
                let idx = session.word(Party::Alice, ceil_log2(alice_list.len()), |x| pick(x).unwrap_or(0))?;
                let r =
                    *alice_list.get(idx).ok_or_else(|| Error::Replay(format!("candidate index {idx} out of range")))?;
                let y_in = session.bob(|y| rects[r].cols.get(y))?;
                state.action = PhiAction::AliceShrink { rect: r, y_in };
                trace.push(state);
                if y_in {
                    return Ok((true, Some(r), trace));
                }
                rows = rows.and(&rects[r].rows);
                continue;
            }
        }

        let common_c = common_cols(rects, &state.family, ncols);
        let bob_list: Vec<usize> =
            (0..rects.len()).filter(|&r| heavy(excluded_count(&cols, &rects[r].cols, &common_c))).collect();
        if !bob_list.is_empty() {
            session.begin(round, "phi.step5");
            let pick = |y: usize| bob_list.iter().position(|&r| rects[r].cols.get(y));
            if session.bob(|y| pick(y).is_some())? {
                let idx = session.word(Party::Bob, ceil_log2(bob_list.len()), |y| pick(y).unwrap_or(0))?;
                let r =
                    *bob_list.get(idx).ok_or_else(|| Error::Replay(format!("candidate index {idx} out of range")))?;
                let x_in = session.alice(|x| rects[r].rows.get(x))?;
                state.action = PhiAction::BobShrink { rect: r, x_in };
                trace.push(state);
                if x_in {
                    return Ok((true, Some(r), trace));
                }
                cols = cols.and(&rects[r].cols);
                continue;
            }
        }

        trace.push(state);
        return Ok((false, None, trace));
    }
    unreachable!()
}

/// Re-derives the ⊥ argument at a rejecting state for the true input.
///
/// Rejecting is meant to be safe because, for any `r ∋ (x, y)`, every pattern
/// avoiding `r` should be excluded on Alice's side or on Bob's side, forcing
/// one of the three counts to reach a third of `Γ`. That split does not
/// always hold: the empty pattern, for one, is never excluded. A rejection
/// at a cell inside some `r` is reported as a claim violation, naming the
/// pattern that escapes both sides when there is one.
pub fn audit_reject(cover: &RectangleCover, state: &PhiState, x: usize, y: usize) -> Result<()> {
    let rects = cover.rects();
    let fam = &state.family;
    let n = fam.len();
    let common_r = common_rows(rects, fam, state.rows.len());
    let common_c = common_cols(rects, fam, state.cols.len());
    if let Some((ri, r)) = rects.iter().enumerate().find(|(_, r)| r.contains(x, y)) {
        let avoid: Vec<usize> = (0..n).filter(|&g| !fam.patterns()[g].contains(ri)).collect();
        let in_a = |g: usize| !common_r[g].intersects(&state.rows.and(&r.rows));
        let in_b = |g: usize| !common_c[g].intersects(&state.cols.and(&r.cols));
        if let Some(g) = avoid.iter().find(|&&g| !in_a(g) && !in_b(g)) {
            return Err(Error::ClaimViolation(format!(
                "pattern {:?} avoids rectangle {ri} but is excluded on neither side",
                fam.patterns()[*g]
            )));
        }
        let heavy = n - avoid.len();
        let a = (0..n).filter(|&g| in_a(g)).count();
        let b = (0..n).filter(|&g| in_b(g)).count();
        return Err(Error::ClaimViolation(format!(
            "rejected at round {} although rectangle {ri} contains ({x},{y}); counts {heavy}/{a}/{b} of {n}",
            state.round
        )));
    }
    Ok(())
}

/// Checks the per-round laws of a finished run: `(x, y)` stays live, the
/// family is the restricted family, it shrinks to at most two thirds each
/// continuing round, and the round and bit bounds hold.
pub fn check_run(cover: &RectangleCover, run: &PhiRun, x: usize, y: usize) -> Result<()> {
    let cells = CellPatterns::of_cover(cover)?;
    let total = cells.family().len();
    if run.rounds() > round_bound(total) {
        return Err(Error::invariant(format!("{} rounds exceed the bound {}", run.rounds(), round_bound(total))));
    }
    if run.transcript.total_bits() > bit_bound(run.rounds(), cover.rects().len()) {
        return Err(Error::invariant("transcript exceeds the per-round bit budget"));
    }
    for (j, s) in run.trace.iter().enumerate() {
        if !(s.rows.get(x) && s.cols.get(y)) {
            return Err(Error::invariant(format!("input left the live domain in round {}", s.round)));
        }
        if s.family != cells.restricted(&s.rows, &s.cols) {
            return Err(Error::invariant(format!("family mismatch in round {}", s.round)));
        }
        if let Some(next) = run.trace.get(j + 1) {
            if !next.family.is_subfamily_of(&s.family) || 3 * next.family.len() > 2 * s.family.len() {
                return Err(Error::invariant(format!(
                    "family went from {} to {} patterns in round {}",
                    s.family.len(),
                    next.family.len(),
                    s.round
                )));
            }
        }
    }
    match (run.verdict, run.witness) {
        (true, Some(r)) if cover.rects()[r].contains(x, y) => Ok(()),
        (true, _) => Err(Error::invariant("⊤ without a rectangle containing the input")),
        (false, _) => audit_reject(cover, run.trace.last().expect("non-empty trace"), x, y),
    }
}

/// Patterns of a cover's family that contain rectangle `r`.
pub fn patterns_with(family: &PatternFamily, r: usize) -> Vec<Pattern> {
    family.patterns().iter().copied().filter(|p| p.contains(r)).collect()
}
