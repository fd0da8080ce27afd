//! Three players: Charlie holds a coordinate z, Alice and Bob hold 3-bit
//! strings, and g(x, y, z) = x_z ∧ y_z.

use commproto::threeparty::{CheapestBuilder, ThreePartyCompiler, TripartiteInstance};

fn main() -> commproto::Result<()> {
    let g = TripartiteInstance::from_fn(8, 8, 3, |x, y, z| (x & y) >> z & 1 == 1)?;
    let compiler = ThreePartyCompiler::new(&g, &CheapestBuilder)?;
    println!(
        "catalog {} slices, ℓ = {} bits, k = {}, |Γ_1| = {}",
        compiler.catalog().len(),
        compiler.catalog().ell(),
        compiler.slices().k,
        compiler.search().family().len()
    );

    let (x, y) = (0b110, 0b011);
    for z in 0..3 {
        let run = compiler.run(x, y, z)?;
        assert_eq!(run.answer, g.value(x, y, z));
        println!(
            "z = {z}: answer {}  (slice {:?}, {} broadcast bits + {} message bits)",
            u8::from(run.answer),
            run.set,
            run.broadcast_bits(),
            run.message_bits()
        );
    }
    Ok(())
}
