//! Exhaustive witness search: the full set `{i : f_i(x, y) = ⊤}`.
//!
//! Both players track a family `Γ_j` known to contain the true pattern. Parts
//! lying in at least half of `Γ_j` form `W⁺`, the rest `W⁻`. A witness-finding
//! run on `⋁_{i∈W⁻} f_i` either finds some `i_0 ∈ W⁻` that is true, or a run on
//! `⋁_{i∈W⁺} ¬f_i` finds some `i_0 ∈ W⁺` that is false; either answer halves
//! `Γ_j`. When both runs reject the answer is exactly `W⁺`.

use crate::bits::{floor_log2, Pattern};
use crate::error::{Error, Result};
use crate::patterns::{CellPatterns, Decomposition, PatternFamily};
use crate::psi::PsiPlan;
use crate::transcript::{Session, Transcript};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Summary of one embedded witness-finding run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InnerCall {
    /// Parts of the probed decomposition, in the outer numbering.
    pub parts: Pattern,
    /// `|Γ|` of the probed decomposition after pruning.
    pub family_size: usize,
    pub verdict: bool,
    /// Outer index of the part found.
    pub witness: Option<usize>,
    pub rounds: usize,
    pub bits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XiRound {
    pub round: usize,
    pub family: PatternFamily,
    pub w_plus: Pattern,
    /// Probe of `⋁_{i∈W⁻} f_i`.
    pub positive: InnerCall,
    /// Probe of `⋁_{i∈W⁺} ¬f_i`, run only when the first one rejects.
    pub negative: Option<InnerCall>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiRun {
    pub answer: Pattern,
    pub transcript: Transcript,
    pub trace: Vec<XiRound>,
}

impl XiRun {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }

    pub fn inner_calls(&self) -> impl Iterator<Item = &InnerCall> {
        self.trace.iter().flat_map(|r| std::iter::once(&r.positive).chain(r.negative.as_ref()))
    }
}

/// Per-decomposition data shared across runs, including the witness-finding
/// plans for every probed sub-decomposition.
pub struct XiPlan {
    decomposition: Decomposition,
    cells: CellPatterns,
    gamma1: PatternFamily,
    probes: Mutex<HashMap<(bool, Pattern), Arc<PsiPlan>>>,
}

impl XiPlan {
    pub fn new(d: &Decomposition) -> Result<Self> {
        let cells = CellPatterns::of_decomposition(d)?;
        let gamma1 = cells.family();
        Ok(XiPlan { decomposition: d.clone(), cells, gamma1, probes: Mutex::new(HashMap::new()) })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    /// `Γ_1`
    pub fn family(&self) -> &PatternFamily {
        &self.gamma1
    }

    /// `floor(log2 |Γ_1|) + 1`
    pub fn round_bound(&self) -> usize {
        floor_log2(self.gamma1.len()) as usize + 1
    }

    fn probe(&self, negated: bool, parts: Pattern) -> Result<Arc<PsiPlan>> {
        if let Some(p) = self.probes.lock().unwrap().get(&(negated, parts)) {
            return Ok(p.clone());
        }
        let idx: Vec<usize> = parts.iter().collect();
        let sub = if negated { self.decomposition.select_negated(&idx) } else { self.decomposition.select(&idx) };
        let plan = Arc::new(PsiPlan::new(&sub)?);
        self.probes.lock().unwrap().insert((negated, parts), plan.clone());
        Ok(plan)
    }

    pub fn run(&self, x: usize, y: usize) -> Result<XiRun> {
        let d = &self.decomposition;
        if x >= d.rows() || y >= d.cols() {
            return Err(Error::input(format!("cell ({x},{y}) outside the {}x{} domain", d.rows(), d.cols())));
        }
        let mut session = Session::live(x, y);
        let (answer, trace) = self.run_in(&mut session)?;
        Ok(XiRun { answer, transcript: session.finish()?, trace })
    }

    pub fn replay(&self, transcript: &Transcript) -> Result<XiRun> {
        let mut session = Session::replay(transcript);
        let (answer, trace) = self.run_in(&mut session)?;
        Ok(XiRun { answer, transcript: session.finish()?, trace })
    }

    /// Runs inside an existing session; frames are tagged `xi.r{j}.step3` and
    /// `xi.r{j}.step4`.
    pub fn run_in(&self, session: &mut Session) -> Result<(Pattern, Vec<XiRound>)> {
        let m = self.decomposition.m();
        let guard = self.round_bound() + 1;
        let mut family = self.gamma1.clone();
        let mut trace = Vec::new();

        for round in 1.. {
            if round > guard {
                return Err(Error::invariant(format!("Ξ exceeded its round guard of {guard}")));
            }
            if family.is_empty() {
                return Err(Error::invariant(format!("Γ became empty in round {round}")));
            }
            let n = family.len();
            let w_plus = Pattern::from_indices((0..m).filter(|&i| 2 * family.count_containing(i) >= n));
            let w_minus = Pattern::from_indices((0..m).filter(|&i| !w_plus.contains(i)));

            let positive = self.call(session, format!("xi.r{round}.step3"), false, w_minus)?;
            let negative = if positive.verdict {
                None
            } else {
                Some(self.call(session, format!("xi.r{round}.step4"), true, w_plus)?)
            };
            let next = match (&positive, &negative) {
                (InnerCall { witness: Some(i), .. }, _) => Some(family.filter(|g| g.contains(*i))),
                (_, Some(InnerCall { witness: Some(i), .. })) => Some(family.filter(|g| !g.contains(*i))),
                _ => None,
            };
            trace.push(XiRound { round, family: family.clone(), w_plus, positive, negative });
            match next {
                Some(f) => family = f,
                None => return Ok((w_plus, trace)),
            }
        }
        unreachable!()
    }

    fn call(&self, session: &mut Session, tag: String, negated: bool, parts: Pattern) -> Result<InnerCall> {
        let plan = self.probe(negated, parts)?;
        let before = session.bits_so_far();
        let (verdict, witness, trace) = session.scoped(tag, |s| plan.run_in(s))?;
        let outer: Vec<usize> = parts.iter().collect();
        Ok(InnerCall {
            parts,
            family_size: plan.family().len(),
            verdict,
            witness: witness.map(|w| outer[w]),
            rounds: trace.len(),
            bits: session.bits_so_far() - before,
        })
    }
}

pub fn run_xi(d: &Decomposition, x: usize, y: usize) -> Result<XiRun> {
    XiPlan::new(d)?.run(x, y)
}

/// Reconstructs a run from its transcript alone.
pub fn replay_xi(d: &Decomposition, transcript: &Transcript) -> Result<XiRun> {
    XiPlan::new(d)?.replay(transcript)
}

/// Checks exactness, the round bound, halving, and that the true pattern
/// stays in `Γ_j`.
pub fn check_xi(plan: &XiPlan, run: &XiRun, x: usize, y: usize) -> Result<()> {
    let truth = plan.cells.at(x, y);
    if run.answer != truth {
        return Err(Error::invariant(format!("Ξ answered {:?}, truth is {truth:?} at ({x},{y})", run.answer)));
    }
    if run.rounds() > plan.round_bound() {
        return Err(Error::invariant(format!("{} rounds exceed the bound {}", run.rounds(), plan.round_bound())));
    }
    for (j, r) in run.trace.iter().enumerate() {
        if !r.family.contains(truth) {
            return Err(Error::invariant(format!("true pattern missing from Γ in round {}", r.round)));
        }
        if let Some(next) = run.trace.get(j + 1) {
            if next.family.len() > r.family.len() / 2 {
                return Err(Error::invariant(format!(
                    "Γ went from {} to {} in round {}",
                    r.family.len(),
                    next.family.len(),
                    r.round
                )));
            }
        }
    }
    Ok(())
}

/// Baseline: find witnesses one at a time, excluding each found part from the
/// next probe, until a probe rejects. Returns the set and the total bits.
pub fn repeated_witness_baseline(d: &Decomposition, x: usize, y: usize) -> Result<(Pattern, Transcript)> {
    let mut session = Session::live(x, y);
    let mut found = Pattern::EMPTY;
    for probe in 1.. {
        let rest: Vec<usize> = (0..d.m()).filter(|&i| !found.contains(i)).collect();
        let plan = PsiPlan::new(&d.select(&rest))?;
        let (verdict, witness, _) = session.scoped(format!("baseline.p{probe}"), |s| plan.run_in(s))?;
        match (verdict, witness) {
            (true, Some(w)) => found = found.with(rest[w]),
            _ => break,
        }
    }
    Ok((found, session.finish()?))
}
