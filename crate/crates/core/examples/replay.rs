//! A transcript written to text, read back, and replayed without the inputs.

use commproto::harness::format::{parse_transcript, serialize_transcript, Payload};
use commproto::harness::gen::{gen_instance, GenParams, Kind};
use commproto::xi::XiPlan;

fn main() -> commproto::Result<()> {
    let bundle = gen_instance(3, &GenParams::new(Kind::Decomposition, 8, 8, 3, 3))?;
    let Payload::Decomposition(d) = &bundle.payload else { unreachable!() };
    let plan = XiPlan::new(d)?;

    let run = plan.run(6, 1)?;
    let text = serialize_transcript(&run.transcript);
    print!("{text}");

    let again = plan.replay(&parse_transcript(&text)?)?;
    assert_eq!(again, run);
    println!("replayed answer {:?} with identical trace ({} rounds)", again.answer, again.rounds());
    Ok(())
}
