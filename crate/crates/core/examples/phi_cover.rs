//! Φ on equality over 2-bit strings, covered by its four diagonal cells.

use commproto::instance::BipartiteInstance;
use commproto::patterns::pattern_family_of_cover;
use commproto::phi::{check_run, round_bound, run_phi};
use commproto::rect::{Rectangle, RectangleCover};

fn main() -> commproto::Result<()> {
    let eq = BipartiteInstance::equality(2);
    let rects = (0..4).map(|i| Rectangle::from_indices(4, 4, [i], [i])).collect();
    let cover = RectangleCover::new_valid(eq, rects)?;
    let gamma = pattern_family_of_cover(&cover)?.len();
    println!("|R| = {}, |Γ| = {gamma}, round bound {}", cover.rects().len(), round_bound(gamma));

    for x in 0..4 {
        let mut line = Vec::new();
        for y in 0..4 {
            let run = run_phi(&cover, x, y)?;
            check_run(&cover, &run, x, y)?;
            assert_eq!(run.verdict, x == y);
            line.push(format!("{}:{}b/{}r", u8::from(run.verdict), run.transcript.total_bits(), run.rounds()));
        }
        println!("{}", line.join("  "));
    }
    Ok(())
}
