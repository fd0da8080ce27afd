//! Ξ against the one-witness-at-a-time baseline, worst case over all cells.

use commproto::harness::format::Payload;
use commproto::harness::gen::{gen_instance, GenParams, Kind};
use commproto::xi::{check_xi, repeated_witness_baseline, XiPlan};

fn main() -> commproto::Result<()> {
    println!("seed  m  |Γ|  xi_max  baseline_max");
    for seed in 0..8 {
        let bundle = gen_instance(seed, &GenParams::new(Kind::Decomposition, 8, 8, 5, 3))?;
        let Payload::Decomposition(d) = &bundle.payload else { unreachable!() };
        let plan = XiPlan::new(d)?;
        let (mut xi, mut base) = (0, 0);
        for x in 0..d.rows() {
            for y in 0..d.cols() {
                let run = plan.run(x, y)?;
                check_xi(&plan, &run, x, y)?;
                let (set, t) = repeated_witness_baseline(d, x, y)?;
                assert_eq!(set, run.answer);
                xi = xi.max(run.transcript.total_bits());
                base = base.max(t.total_bits());
            }
        }
        println!("{seed:>4}  {}  {:>3}  {xi:>6}  {base:>12}", d.m(), plan.family().len());
    }
    Ok(())
}
