//! Bench runner: every protocol on every cell of every instance, each run
//! checked against the oracle, its own round laws, and its replay.
//!
//! Instances run in parallel; rows are merged by `(id, protocol)` so the
//! table is identical for any thread count.

use super::format::{InstanceBundle, Payload};
use super::gen::{gen_instance, GenParams};
use super::oracle::{oracle_eval, OracleValue};
use crate::error::{Error, Result};
use crate::patterns::{effective_k, CellPatterns, Decomposition};
use crate::phi::{check_run, replay_phi, run_phi};
use crate::psi::{check_psi, PsiPlan};
use crate::rect::RectangleCover;
use crate::threeparty::{CheapestBuilder, ThreePartyCompiler, TripartiteInstance};
use crate::xi::{check_xi, repeated_witness_baseline, XiPlan};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub protocol: &'static str,
    pub dims: String,
    pub m: usize,
    pub gamma: usize,
    pub k: u32,
    pub cells: usize,
    pub max_bits: usize,
    pub mean_bits: f64,
    pub max_rounds: usize,
    /// Largest per-run count; zero for protocols without epochs.
    pub s_changes: usize,
    pub sigma_changes: usize,
    pub step8: usize,
    pub oracle_ok: bool,
    pub bounds_ok: bool,
    pub replay_ok: bool,
    /// First failure, with its cell.
    pub failure: Option<String>,
}

impl BenchRow {
    fn new(id: &str, protocol: &'static str, dims: String, m: usize, gamma: usize, k: u32) -> Self {
        BenchRow {
            id: id.to_string(),
            protocol,
            dims,
            m,
            gamma,
            k,
            cells: 0,
            max_bits: 0,
            mean_bits: 0.0,
            max_rounds: 0,
            s_changes: 0,
            sigma_changes: 0,
            step8: 0,
            oracle_ok: true,
            bounds_ok: true,
            replay_ok: true,
            failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.oracle_ok && self.bounds_ok && self.replay_ok
    }

    fn record(&mut self, bits: usize, rounds: usize) {
        self.cells += 1;
        self.max_bits = self.max_bits.max(bits);
        self.mean_bits += bits as f64;
        self.max_rounds = self.max_rounds.max(rounds);
    }

    fn fail(&mut self, which: Flag, cell: &[usize], why: impl std::fmt::Display) {
        match which {
            Flag::Oracle => self.oracle_ok = false,
            Flag::Bounds => self.bounds_ok = false,
            Flag::Replay => self.replay_ok = false,
        }
        if self.failure.is_none() {
            self.failure = Some(format!("{cell:?}: {why}"));
        }
    }

    fn finish(mut self) -> Self {
        if self.cells > 0 {
            self.mean_bits /= self.cells as f64;
        }
        self
    }
}

#[derive(Clone, Copy)]
enum Flag {
    Oracle,
    Bounds,
    Replay,
}

fn cells(rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..rows).flat_map(move |x| (0..cols).map(move |y| (x, y)))
}

fn oracle_bool(bundle: &InstanceBundle, cell: &[usize]) -> Result<bool> {
    match oracle_eval(bundle, cell)? {
        OracleValue::Bool(b) => Ok(b),
        OracleValue::Set(s) => Ok(!s.is_empty()),
    }
}

pub fn bench_cover(id: &str, bundle: &InstanceBundle, cover: &RectangleCover) -> Result<BenchRow> {
    let inst = cover.instance();
    let gamma = CellPatterns::of_cover(cover)?.family().len();
    let k = effective_k(cover.declared_cost(), gamma);
    let mut row = BenchRow::new(id, "phi", format!("{}x{}", inst.rows(), inst.cols()), cover.rects().len(), gamma, k);
    for (x, y) in cells(inst.rows(), inst.cols()) {
        let run = run_phi(cover, x, y)?;
        row.record(run.transcript.total_bits(), run.rounds());
        if run.verdict != oracle_bool(bundle, &[x, y])? {
            row.fail(Flag::Oracle, &[x, y], format!("Φ answered {}", run.verdict));
        }
        if let Err(e) = check_run(cover, &run, x, y) {
            row.fail(Flag::Bounds, &[x, y], e);
        }
        match replay_phi(cover, &run.transcript) {
            Ok(again) if again == run => {}
            Ok(_) => row.fail(Flag::Replay, &[x, y], "replay diverged"),
            Err(e) => row.fail(Flag::Replay, &[x, y], e),
        }
    }
    Ok(row.finish())
}

fn decomposition_row(id: &str, protocol: &'static str, d: &Decomposition) -> Result<BenchRow> {
    let gamma = CellPatterns::of_decomposition(d)?.family().len();
    let k = effective_k(d.max_cost(), gamma);
    Ok(BenchRow::new(id, protocol, format!("{}x{}", d.rows(), d.cols()), d.m(), gamma, k))
}

pub fn bench_psi(id: &str, bundle: &InstanceBundle, d: &Decomposition) -> Result<BenchRow> {
    let plan = PsiPlan::new(d)?;
    let mut row = decomposition_row(id, "psi", d)?;
    for (x, y) in cells(d.rows(), d.cols()) {
        let run = plan.run(x, y)?;
        row.record(run.transcript.total_bits(), run.rounds());
        row.s_changes = row.s_changes.max(run.ledger.s_changes);
        row.sigma_changes = row.sigma_changes.max(run.ledger.sigma_changes.iter().copied().max().unwrap_or(0));
        row.step8 = row.step8.max(run.ledger.max_consecutive_step8);
        let truth = oracle_bool(bundle, &[x, y])?;
        let witness_ok = run.witness.is_none_or(|i| d.parts()[i].instance().value(x, y));
        if run.verdict != truth || !witness_ok {
            row.fail(Flag::Oracle, &[x, y], format!("Ψ answered {} with witness {:?}", run.verdict, run.witness));
        }
        if let Err(e) = check_psi(&plan, d, &run, x, y) {
            row.fail(Flag::Bounds, &[x, y], e);
        }
        match plan.replay(&run.transcript) {
            Ok(again) if again == run => {}
            Ok(_) => row.fail(Flag::Replay, &[x, y], "replay diverged"),
            Err(e) => row.fail(Flag::Replay, &[x, y], e),
        }
    }
    Ok(row.finish())
}

pub fn bench_xi(id: &str, bundle: &InstanceBundle, d: &Decomposition) -> Result<BenchRow> {
    let plan = XiPlan::new(d)?;
    let mut row = decomposition_row(id, "xi", d)?;
    for (x, y) in cells(d.rows(), d.cols()) {
        let run = plan.run(x, y)?;
        row.record(run.transcript.total_bits(), run.rounds());
        if oracle_eval(bundle, &[x, y])? != OracleValue::Set(run.answer) {
            row.fail(Flag::Oracle, &[x, y], format!("Ξ answered {:?}", run.answer));
        }
        if let Err(e) = check_xi(&plan, &run, x, y) {
            row.fail(Flag::Bounds, &[x, y], e);
        }
        match plan.replay(&run.transcript) {
            Ok(again) if again == run => {}
            Ok(_) => row.fail(Flag::Replay, &[x, y], "replay diverged"),
            Err(e) => row.fail(Flag::Replay, &[x, y], e),
        }
    }
    Ok(row.finish())
}

/// One Ψ call per witness; the cost Ξ is compared against.
pub fn bench_baseline(id: &str, bundle: &InstanceBundle, d: &Decomposition) -> Result<BenchRow> {
    let mut row = decomposition_row(id, "baseline", d)?;
    for (x, y) in cells(d.rows(), d.cols()) {
        let (answer, transcript) = repeated_witness_baseline(d, x, y)?;
        row.record(transcript.total_bits(), answer.len() + 1);
        if oracle_eval(bundle, &[x, y])? != OracleValue::Set(answer) {
            row.fail(Flag::Oracle, &[x, y], format!("baseline answered {answer:?}"));
        }
    }
    Ok(row.finish())
}

/// Bits are the merged Alice/Bob total including the final message; rounds
/// are the search rounds.
pub fn bench_tripartite(id: &str, bundle: &InstanceBundle, g: &TripartiteInstance) -> Result<BenchRow> {
    let compiler = ThreePartyCompiler::new(g, &CheapestBuilder)?;
    let (a, b, c) = g.dims();
    let gamma = compiler.search().family().len();
    let k = effective_k(compiler.slices().k, gamma);
    let mut row = BenchRow::new(id, "three-party", format!("{a}x{b}x{c}"), c, gamma, k);
    let ell = compiler.catalog().ell() as usize;
    for (x, y) in cells(a, b) {
        for z in 0..c {
            let cell = [x, y, z];
            let run = compiler.run(x, y, z)?;
            row.record(run.transcript.total_bits(), run.search_trace.len());
            if run.answer != oracle_bool(bundle, &cell)? || run.set != g.slice(x, y) {
                row.fail(Flag::Oracle, &cell, format!("answered {} via {:?}", run.answer, run.set));
            }
            if run.message_bits() != ell || compiler.catalog().message_for(run.set).is_none() {
                row.fail(Flag::Bounds, &cell, format!("final message of {} bits, ℓ = {ell}", run.message_bits()));
            }
            match compiler.replay(&run.transcript, z) {
                Ok(again) if again == run => {}
                Ok(_) => row.fail(Flag::Replay, &cell, "replay diverged"),
                Err(e) => row.fail(Flag::Replay, &cell, e),
            }
        }
    }
    Ok(row.finish())
}

/// All rows for one instance: Φ for covers; Ψ, Ξ and the baseline for
/// decompositions; the compiler for tripartite instances.
pub fn bench_bundle(id: &str, bundle: &InstanceBundle) -> Result<Vec<BenchRow>> {
    match &bundle.payload {
        Payload::Cover(c) => Ok(vec![bench_cover(id, bundle, c)?]),
        Payload::Decomposition(d) => {
            Ok(vec![bench_psi(id, bundle, d)?, bench_xi(id, bundle, d)?, bench_baseline(id, bundle, d)?])
        }
        Payload::Tripartite(g) => Ok(vec![bench_tripartite(id, bundle, g)?]),
    }
}

/// Runs every bundle in parallel and sorts the rows by `(id, protocol)`.
pub fn run_bench(bundles: &[(String, InstanceBundle)]) -> Result<Vec<BenchRow>> {
    let nested: Vec<Vec<BenchRow>> = bundles.par_iter().map(|(id, b)| bench_bundle(id, b)).collect::<Result<_>>()?;
    let mut rows: Vec<BenchRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| (&a.id, a.protocol).cmp(&(&b.id, b.protocol)));
    Ok(rows)
}

/// Instances for seeds `first..first + count`, ids `s<seed>`.
pub fn generate_suite(first: u64, count: u64, params: &GenParams) -> Result<Vec<(String, InstanceBundle)>> {
    (first..first + count)
        .into_par_iter()
        .map(|seed| Ok((format!("s{seed:05}"), gen_instance(seed, params)?)))
        .collect()
}

pub const TSV_HEADER: &str = "id\tprotocol\tdims\tm\tgamma\tk\tcells\tmax_bits\tmean_bits\tmax_rounds\t\
s_changes\tsigma_changes\tstep8_run\toracle\tbounds\treplay\tfailure";

pub fn format_tsv(rows: &[BenchRow]) -> String {
    let flag = |b: bool| if b { "ok" } else { "FAIL" };
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id,
            r.protocol,
            r.dims,
            r.m,
            r.gamma,
            r.k,
            r.cells,
            r.max_bits,
            r.mean_bits,
            r.max_rounds,
            r.s_changes,
            r.sigma_changes,
            r.step8,
            flag(r.oracle_ok),
            flag(r.bounds_ok),
            flag(r.replay_ok),
            r.failure.as_deref().unwrap_or("-").replace(['\t', '\n'], " "),
        );
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BenchSummary {
    pub rows: usize,
    pub runs: usize,
    pub oracle_failures: usize,
    pub bound_failures: usize,
    pub replay_failures: usize,
    pub max_s_changes: usize,
    pub max_sigma_changes: usize,
    pub max_step8_run: usize,
}

impl BenchSummary {
    pub fn of(rows: &[BenchRow]) -> Self {
        let mut s = BenchSummary { rows: rows.len(), ..Default::default() };
        for r in rows {
            s.runs += r.cells;
            s.oracle_failures += usize::from(!r.oracle_ok);
            s.bound_failures += usize::from(!r.bounds_ok);
            s.replay_failures += usize::from(!r.replay_ok);
            s.max_s_changes = s.max_s_changes.max(r.s_changes);
            s.max_sigma_changes = s.max_sigma_changes.max(r.sigma_changes);
            s.max_step8_run = s.max_step8_run.max(r.step8);
        }
        s
    }

    pub fn clean(&self) -> bool {
        self.oracle_failures + self.bound_failures + self.replay_failures == 0
    }

    /// `Err(ClaimViolation)` naming the counts when any row failed.
    pub fn into_result(self) -> Result<Self> {
        if self.clean() {
            Ok(self)
        } else {
            Err(Error::ClaimViolation(format!(
                "{} oracle, {} bound and {} replay failures",
                self.oracle_failures, self.bound_failures, self.replay_failures
            )))
        }
    }
}

impl std::fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "rows\t{}", self.rows)?;
        writeln!(f, "runs\t{}", self.runs)?;
        writeln!(f, "oracle_failures\t{}", self.oracle_failures)?;
        writeln!(f, "bound_failures\t{}", self.bound_failures)?;
        writeln!(f, "replay_failures\t{}", self.replay_failures)?;
        writeln!(f, "max_s_changes\t{}", self.max_s_changes)?;
        writeln!(f, "max_sigma_changes\t{}", self.max_sigma_changes)?;
        write!(f, "max_step8_run\t{}", self.max_step8_run)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::Kind;

    #[test]
    fn small_suites_pass() {
        for (kind, m) in [(Kind::Cover, 4), (Kind::Decomposition, 3), (Kind::Tripartite, 3)] {
            let suite = generate_suite(0, 4, &GenParams::new(kind, 6, 6, m, 3).budget(32)).unwrap();
            let rows = run_bench(&suite).unwrap();
            for r in &rows {
                assert!(r.passed(), "{r:?}");
            }
            assert!(BenchSummary::of(&rows).clean());
        }
    }

    #[test]
    fn table_is_sorted_and_stable() {
        let suite = generate_suite(10, 3, &GenParams::new(Kind::Decomposition, 4, 4, 2, 2)).unwrap();
        let a = format_tsv(&run_bench(&suite).unwrap());
        let mut reversed = suite.clone();
        reversed.reverse();
        assert_eq!(a, format_tsv(&run_bench(&reversed).unwrap()));
        let ids: Vec<_> = a.lines().skip(1).map(|l| l.split('\t').take(2).collect::<Vec<_>>()).collect();
        assert_eq!(ids.len(), 9);
        assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn failures_surface() {
        let mut row = BenchRow::new("x", "phi", "1x1".into(), 1, 1, 1);
        row.fail(Flag::Replay, &[0, 0], "boom");
        let s = BenchSummary::of(&[row]);
        assert_eq!(s.replay_failures, 1);
        assert!(matches!(s.into_result(), Err(Error::ClaimViolation(_))));
    }
}
