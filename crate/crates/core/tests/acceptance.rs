//! The eight acceptance criteria. Each prints one `PASS`/`FAIL` line; the
//! test fails if any criterion does.
//!
//! Every verdict is compared with a direct truth-table lookup, never with
//! another protocol.

use commproto::bits::Pattern;
use commproto::harness::format::{
    parse_bundle, parse_transcript, serialize_bundle, serialize_transcript, InstanceBundle, Payload,
};
use commproto::harness::gen::{gen_instance, GenParams, Kind};
use commproto::harness::oracle::{oracle_eval, OracleValue};
use commproto::hitting::{find_hitting_set, sample_hit_rate};
use commproto::patterns::{CellPatterns, Decomposition, PatternFamily};
use commproto::phi::{replay_phi, round_bound, run_phi};
use commproto::psi::{check_psi, PsiPlan};
use commproto::rect::RectangleCover;
use commproto::threeparty::{CheapestBuilder, ThreePartyCompiler};
use commproto::xi::{check_xi, XiPlan};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use std::time::Instant;

/// Counts of checks and failures, with the first failure kept for the report.
#[derive(Default)]
struct Tally {
    instances: usize,
    checks: usize,
    failures: usize,
    first: Option<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.checks += other.checks;
        self.failures += other.failures;
        if self.first.is_none() {
            self.first = other.first;
        }
        self.notes.extend(other.notes);
        self
    }
}

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn record(&mut self, n: usize, title: &str, tally: &Tally, extra: bool, started: Instant) {
        let ok = tally.failures == 0 && extra;
        let mut line = format!(
            "criterion {n}: {} {title}: {} instances, {} checks, {} failures, {:.1}s",
            if ok { "PASS" } else { "FAIL" },
            tally.instances,
            tally.checks,
            tally.failures,
            started.elapsed().as_secs_f64()
        );
        if let Some(first) = &tally.first {
            line.push_str(&format!("; first: {first}"));
        }
        for note in &tally.notes {
            line.push_str(&format!("; {note}"));
        }
        println!("{line}");
        if !ok {
            self.failed.push(n);
        }
    }
}

fn cover_suite() -> Vec<(u64, RectangleCover)> {
    let dims = [(8, 8), (12, 16), (16, 16), (32, 32)];
    (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let (rows, cols) = dims[seed as usize % dims.len()];
            let m = 4 + seed as usize % 9;
            let params = GenParams::new(Kind::Cover, rows, cols, m, 4).budget(64);
            let Payload::Cover(c) = gen_instance(seed, &params).unwrap().payload else { unreachable!() };
            (seed, c)
        })
        .collect()
}

fn decomposition_suite() -> Vec<(u64, InstanceBundle)> {
    let dims = [(8, 8), (12, 12), (16, 16), (8, 24)];
    (1000..1200u64)
        .into_par_iter()
        .map(|seed| {
            let (rows, cols) = dims[seed as usize % dims.len()];
            let m = 2 + seed as usize % 5;
            let depth = 3 + (seed as u32 / 4) % 2;
            (seed, gen_instance(seed, &GenParams::new(Kind::Decomposition, rows, cols, m, depth).budget(64)).unwrap())
        })
        .collect()
}

fn decomposition(bundle: &InstanceBundle) -> &Decomposition {
    match &bundle.payload {
        Payload::Decomposition(d) => d,
        _ => unreachable!(),
    }
}

/// Criteria 1 and 2 over one cover.
fn phi_instance(seed: u64, cover: &RectangleCover) -> (Tally, Tally) {
    let (mut eq, mut laws) =
        (Tally { instances: 1, ..Default::default() }, Tally { instances: 1, ..Default::default() });
    let inst = cover.instance();
    let gamma = CellPatterns::of_cover(cover).unwrap().family().len();
    for x in 0..inst.rows() {
        for y in 0..inst.cols() {
            let run = run_phi(cover, x, y).unwrap();
            let truth = inst.value(x, y);
            eq.check(run.verdict == truth, || {
                format!("seed {seed} cell ({x},{y}): Φ says {}, truth {truth}", run.verdict)
            });
            let witness_ok = !run.verdict || run.witness.is_some_and(|r| cover.rects()[r].contains(x, y));
            eq.check(witness_ok, || format!("seed {seed} cell ({x},{y}): ⊤ without a containing rectangle"));

            laws.check(run.rounds() <= round_bound(gamma), || {
                format!("seed {seed} cell ({x},{y}): {} rounds > {}", run.rounds(), round_bound(gamma))
            });
            for w in run.trace.windows(2) {
                let (a, b) = (&w[0].family, &w[1].family);
                laws.check(b.is_subfamily_of(a) && 3 * b.len() <= 2 * a.len(), || {
                    format!("seed {seed} cell ({x},{y}) round {}: |Γ| {} -> {}", w[0].round, a.len(), b.len())
                });
            }
        }
    }
    (eq, laws)
}

/// Criteria 3, 4 and 6 over one decomposition.
fn decomposition_instance(seed: u64, bundle: &InstanceBundle) -> [Tally; 3] {
    let d = decomposition(bundle);
    let psi = PsiPlan::new(d).unwrap();
    let xi = XiPlan::new(d).unwrap();
    let mut t = [(); 3].map(|_| Tally { instances: 1, ..Default::default() });
    for x in 0..d.rows() {
        for y in 0..d.cols() {
            let OracleValue::Set(truth) = oracle_eval(bundle, &[x, y]).unwrap() else { unreachable!() };

            let run = psi.run(x, y).unwrap();
            t[0].check(run.verdict == !truth.is_empty(), || {
                format!("seed {seed} cell ({x},{y}): Ψ says {}, truth {truth:?}", run.verdict)
            });
            t[0].check(run.witness.is_none_or(|i| truth.contains(i)) && run.verdict == run.witness.is_some(), || {
                format!("seed {seed} cell ({x},{y}): witness {:?} not in {truth:?}", run.witness)
            });
            let ledger = run.ledger.violations();
            t[1].check(ledger.is_empty(), || format!("seed {seed} cell ({x},{y}): {}", ledger[0]));
            let laws = check_psi(&psi, d, &run, x, y);
            t[1].check(laws.is_ok(), || format!("seed {seed} cell ({x},{y}): {}", laws.unwrap_err()));

            let run = xi.run(x, y).unwrap();
            t[2].check(run.answer == truth, || {
                format!("seed {seed} cell ({x},{y}): Ξ says {:?}, truth {truth:?}", run.answer)
            });
            let laws = check_xi(&xi, &run, x, y);
            t[2].check(laws.is_ok(), || format!("seed {seed} cell ({x},{y}): {}", laws.unwrap_err()));
        }
    }
    t
}

fn random_family(rng: &mut Xoshiro256StarStar) -> (PatternFamily, usize) {
    let m: usize = rng.random_range(2..=12);
    let t = rng.random_range((m / 4).max(1)..=m.div_ceil(2));
    let count = rng.random_range(1..=64);
    let patterns = (0..count)
        .map(|_| {
            // Half the draws are large, so most families have many.
            let low = if rng.random_bool(0.5) { t.min(m) } else { 0 };
            let size = rng.random_range(low..=(2 * t).min(m));
            Pattern::from_indices(rand::seq::index::sample(rng, m, size))
        })
        .collect();
    (PatternFamily::new(m, patterns).unwrap(), t)
}

#[test]
fn acceptance() {
    let mut report = Report { failed: Vec::new() };

    // 1, 2: Φ against the truth table, and its round and shrink laws.
    let started = Instant::now();
    let covers = cover_suite();
    let (eq, laws) = covers
        .par_iter()
        .map(|(seed, c)| phi_instance(*seed, c))
        .reduce(|| (Tally::default(), Tally::default()), |a, b| (a.0.merge(b.0), a.1.merge(b.1)));
    let bad_instances = covers.par_iter().filter(|(seed, c)| phi_instance(*seed, c).0.failures > 0).count();
    let mut eq = eq;
    eq.notes.push(format!("{bad_instances} of {} covers have a wrong cell", covers.len()));
    report.record(1, "Φ equals the truth table", &eq, true, started);
    report.record(2, "Φ round bound and 2/3 shrink", &laws, true, started);

    // 5: hitting sets on random families.
    let started = Instant::now();
    let mut hit = Tally::default();
    let mut rng = Xoshiro256StarStar::seed_from_u64(5);
    let mut rates = Vec::new();
    for n in 0..100 {
        let (family, t) = random_family(&mut rng);
        hit.instances += 1;
        match find_hitting_set(&family, t) {
            Ok(cert) => {
                let verified = cert.verify(&family);
                let ok = verified.is_ok()
                    && 2 * cert.hit_count >= cert.large_count
                    && (cert.max_intersection as f64) <= cert.threshold;
                hit.check(ok, || format!("family {n}: certificate rejected ({verified:?})"));
            }
            Err(e) => hit.check(false, || format!("family {n}: {e}")),
        }
        rates.push(sample_hit_rate(&family, t, 400, &mut rng));
    }
    let worst = rates.iter().copied().fold(1.0, f64::min);
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    hit.notes.push(format!("random-σ success rate min {worst:.3}, mean {mean:.3}"));
    if worst < 0.5 {
        hit.notes.push("warning: a family's sampled rate is below 1/2".into());
    }
    report.record(5, "hitting-set certificates", &hit, worst > 0.4, started);

    // 3, 4, 6: Ψ and Ξ on one decomposition suite.
    let started = Instant::now();
    let suite = decomposition_suite();
    let [psi, ledger, xi] = suite.par_iter().map(|(seed, b)| decomposition_instance(*seed, b)).reduce(
        || [(); 3].map(|_| Tally::default()),
        |[a0, a1, a2], [b0, b1, b2]| [a0.merge(b0), a1.merge(b1), a2.merge(b2)],
    );
    report.record(3, "Ψ verdict and witness", &psi, true, started);
    report.record(4, "Ψ epoch ledger", &ledger, true, started);
    report.record(6, "Ξ exact set, round bound, halving", &xi, true, started);

    // 7: the three-party compiler.
    let started = Instant::now();
    let dims = [(4, 4, 3), (8, 8, 4), (12, 12, 6), (16, 16, 8)];
    let three = (0..52u64)
        .into_par_iter()
        .map(|seed| {
            let (a, b, c) = dims[seed as usize % dims.len()];
            let bundle = gen_instance(7000 + seed, &GenParams::new(Kind::Tripartite, a, b, c, 3)).unwrap();
            let Payload::Tripartite(g) = &bundle.payload else { unreachable!() };
            let compiler = ThreePartyCompiler::new(g, &CheapestBuilder).unwrap();
            let ell = compiler.catalog().ell() as usize;
            let mut t = Tally { instances: 1, ..Default::default() };
            for x in 0..a {
                for y in 0..b {
                    for z in 0..c {
                        let run = compiler.run(x, y, z).unwrap();
                        let OracleValue::Bool(truth) = oracle_eval(&bundle, &[x, y, z]).unwrap() else {
                            unreachable!()
                        };
                        t.check(run.answer == truth, || {
                            format!("seed {seed} cell ({x},{y},{z}): answered {}", run.answer)
                        });
                        t.check(run.message_bits() == ell, || {
                            format!("seed {seed}: final message of {} bits, ℓ = {ell}", run.message_bits())
                        });
                        t.check(run.set == g.slice(x, y) && compiler.catalog().message_for(run.set).is_some(), || {
                            format!("seed {seed} cell ({x},{y}): S = {:?} outside the catalog", run.set)
                        });
                    }
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    report.record(7, "three-party compiler equals g with ℓ-bit messages", &three, true, started);

    // 8: determinism and replay.
    let started = Instant::now();
    let mut det = Tally::default();
    for (kind, m) in [(Kind::Cover, 6), (Kind::Decomposition, 4), (Kind::Tripartite, 4)] {
        for seed in 0..5 {
            let params = GenParams::new(kind, 8, 8, m, 3).budget(64);
            let a = serialize_bundle(&gen_instance(seed, &params).unwrap());
            let b = serialize_bundle(&gen_instance(seed, &params).unwrap());
            det.instances += 1;
            det.check(a == b, || format!("{kind} seed {seed}: generator is not deterministic"));
            let bundle = parse_bundle(&a).unwrap();
            det.check(serialize_bundle(&bundle) == a, || format!("{kind} seed {seed}: round trip changed bytes"));
            replay_all(&bundle, &mut det, &format!("{kind} seed {seed}"));
        }
    }
    for (seed, bundle) in suite.iter().take(20) {
        det.instances += 1;
        replay_all(bundle, &mut det, &format!("decomposition seed {seed}"));
    }
    report.record(8, "determinism and transcript replay", &det, true, started);

    assert!(report.failed.is_empty(), "failed criteria: {:?}", report.failed);
}

/// Runs every cell twice, replays each transcript through text, and
/// requires identical answers and traces.
fn replay_all(bundle: &InstanceBundle, t: &mut Tally, label: &str) {
    let through_text = |tr: &commproto::transcript::Transcript| parse_transcript(&serialize_transcript(tr)).unwrap();
    match &bundle.payload {
        Payload::Cover(c) => {
            for (x, y) in c.instance().cells_iter() {
                let run = run_phi(c, x, y).unwrap();
                t.check(run == run_phi(c, x, y).unwrap(), || format!("{label} ({x},{y}): Φ rerun differs"));
                let again = replay_phi(c, &through_text(&run.transcript));
                t.check(again.as_ref() == Ok(&run), || format!("{label} ({x},{y}): Φ replay differs"));
            }
        }
        Payload::Decomposition(d) => {
            let (psi, xi) = (PsiPlan::new(d).unwrap(), XiPlan::new(d).unwrap());
            for x in 0..d.rows() {
                for y in 0..d.cols() {
                    let run = psi.run(x, y).unwrap();
                    t.check(run == psi.run(x, y).unwrap(), || format!("{label} ({x},{y}): Ψ rerun differs"));
                    let again = psi.replay(&through_text(&run.transcript));
                    t.check(again.as_ref() == Ok(&run), || format!("{label} ({x},{y}): Ψ replay differs"));
                    let run = xi.run(x, y).unwrap();
                    t.check(run == xi.run(x, y).unwrap(), || format!("{label} ({x},{y}): Ξ rerun differs"));
                    let again = xi.replay(&through_text(&run.transcript));
                    t.check(again.as_ref() == Ok(&run), || format!("{label} ({x},{y}): Ξ replay differs"));
                }
            }
        }
        Payload::Tripartite(g) => {
            let compiler = ThreePartyCompiler::new(g, &CheapestBuilder).unwrap();
            let (a, b, c) = g.dims();
            for x in 0..a {
                for y in 0..b {
                    for z in 0..c {
                        let run = compiler.run(x, y, z).unwrap();
                        let again = compiler.replay(&through_text(&run.transcript), z);
                        t.check(again.as_ref() == Ok(&run), || format!("{label} ({x},{y},{z}): replay differs"));
                    }
                }
            }
        }
    }
}
