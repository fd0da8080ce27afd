//! Generate a seeded suite of each kind and print the bench table. Rows
//! marked FAIL name the first failing cell.

use commproto::harness::bench::{format_tsv, generate_suite, run_bench, BenchSummary};
use commproto::harness::gen::{GenParams, Kind};

fn main() -> commproto::Result<()> {
    let mut suite = generate_suite(0, 4, &GenParams::new(Kind::Cover, 12, 12, 8, 4).budget(64))?;
    suite.extend(generate_suite(100, 4, &GenParams::new(Kind::Decomposition, 12, 12, 4, 4).budget(64))?);
    suite.extend(generate_suite(200, 4, &GenParams::new(Kind::Tripartite, 8, 8, 4, 3))?);
    let rows = run_bench(&suite)?;
    print!("{}", format_tsv(&rows));
    let summary = BenchSummary::of(&rows);
    println!("\n{summary}");
    if let Err(e) = summary.into_result() {
        println!("{e}");
    }
    Ok(())
}
