//! Ψ on a generated decomposition: the verdict, the witness part, and the
//! epoch counters of one run.

use commproto::harness::format::Payload;
use commproto::harness::gen::{gen_instance, GenParams, Kind};
use commproto::psi::{check_psi, PsiPlan};

fn main() -> commproto::Result<()> {
    let bundle = gen_instance(7, &GenParams::new(Kind::Decomposition, 8, 8, 4, 3).budget(32))?;
    let Payload::Decomposition(d) = &bundle.payload else { unreachable!() };
    let plan = PsiPlan::new(d)?;
    println!("m = {}, kept after pruning = {:?}, |Γ_1| = {}", d.m(), plan.kept(), plan.family().len());

    let (x, y) = (3, 5);
    let run = plan.run(x, y)?;
    check_psi(&plan, d, &run, x, y)?;
    println!(
        "f({x},{y}) = {}  witness {:?}  {} bits in {} rounds",
        run.verdict,
        run.witness,
        run.transcript.total_bits(),
        run.rounds()
    );
    for r in &run.trace {
        println!("  round {}: |Γ| {} s {} t {} |Π| {} -> {:?}", r.round, r.family_size, r.s, r.t, r.pi, r.action);
    }
    let l = &run.ledger;
    println!("s changes {}, σ changes per s-epoch {:?}, Step 8 rounds {}", l.s_changes, l.sigma_changes, l.step8);
    Ok(())
}
