use clap::{Args, Parser, Subcommand};
use commproto::bits::Pattern;
use commproto::harness::bench::{format_tsv, generate_suite, run_bench, BenchSummary};
use commproto::harness::format::{
    parse_bundle, parse_patterns, serialize_bundle, serialize_patterns, serialize_transcript, InstanceBundle, Payload,
};
use commproto::harness::gen::{gen_instance, GenParams, Kind};
use commproto::hitting::find_hitting_set;
use commproto::patterns::{effective_k, CellPatterns};
use commproto::phi::{check_run, run_phi};
use commproto::psi::{check_psi, PsiPlan};
use commproto::threeparty::{CheapestBuilder, ThreePartyCompiler};
use commproto::transcript::Transcript;
use commproto::xi::{check_xi, XiPlan};
use commproto::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Communication protocols over explicit truth tables.
#[derive(Parser)]
#[command(name = "commproto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance.
    Gen {
        #[command(flatten)]
        params: GenArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse an instance, recheck its metadata and structure.
    Validate { file: PathBuf },
    /// Print the pattern family of a cover or decomposition.
    Patterns { file: PathBuf },
    /// Hitting set for a pattern family with sizes at most 2t.
    Hit {
        file: PathBuf,
        #[arg(long)]
        t: usize,
    },
    /// Φ on a cover at (x, y): verdict, bits, rounds.
    RunPhi {
        file: PathBuf,
        x: usize,
        y: usize,
        #[arg(long)]
        trace: bool,
    },
    /// Ψ on a decomposition at (x, y): verdict, witness, bits, epoch counters.
    RunPsi {
        file: PathBuf,
        x: usize,
        y: usize,
        #[arg(long)]
        trace: bool,
    },
    /// Ξ on a decomposition at (x, y): the full witness set.
    RunXi {
        file: PathBuf,
        x: usize,
        y: usize,
        #[arg(long)]
        trace: bool,
    },
    /// The three-party protocol at (x, y, z).
    #[command(name = "run-3party")]
    RunThreeParty {
        file: PathBuf,
        x: usize,
        y: usize,
        z: usize,
        #[arg(long)]
        trace: bool,
    },
    /// Print ℓ, k, |Γ₁| and the bits spent at every (x, y).
    #[command(name = "compile-3party")]
    CompileThreeParty { file: PathBuf },
    /// Run every protocol on every cell of the given files, or of a seeded
    /// suite when no files are given.
    Bench {
        files: Vec<PathBuf>,
        #[command(flatten)]
        params: GenArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// Write the table here; the summary still goes to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "decomposition")]
    kind: Kind,
    #[arg(long, default_value_t = 8)]
    rows: usize,
    #[arg(long, default_value_t = 8)]
    cols: usize,
    /// Parts, rectangles, or |C|.
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// Largest accepted |Γ| (slice catalog for tripartite instances).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 500)]
    max_attempts: usize,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            kind: self.kind,
            rows: self.rows,
            cols: self.cols,
            m: self.m,
            depth: self.depth,
            budget: self.budget,
            max_attempts: self.max_attempts,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<InstanceBundle> {
    parse_bundle(&read(path)?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A failed run check is a finding about the protocol, not a crash.
fn as_violation(e: Error) -> Error {
    match e {
        Error::Invariant(m) => Error::ClaimViolation(m),
        e => e,
    }
}

fn wrong_kind(bundle: &InstanceBundle, want: &str) -> Error {
    Error::Input(format!("expected a {want}, found a {}", bundle.payload.kind()))
}

fn show(p: Pattern) -> String {
    let items: Vec<String> = p.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn print_transcript(t: &Transcript) {
    print!("{}", serialize_transcript(t));
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { params, seed, out } => {
            let bundle = gen_instance(seed, &params.params())?;
            write_or_print(out.as_deref(), &serialize_bundle(&bundle))
        }
        Command::Validate { file } => {
            let bundle = load(&file)?;
            bundle.check_meta()?;
            if let Payload::Cover(c) = &bundle.payload {
                let report = c.validate();
                if !report.is_ok() {
                    return Err(Error::ClaimViolation(format!("cover does not compute its table: {report:?}")));
                }
            }
            println!("ok {}", bundle.payload.kind());
            for (k, v) in &bundle.meta {
                println!("{k}\t{v}");
            }
            Ok(())
        }
        Command::Patterns { file } => {
            let bundle = load(&file)?;
            let cells = match &bundle.payload {
                Payload::Cover(c) => CellPatterns::of_cover(c)?,
                Payload::Decomposition(d) => CellPatterns::of_decomposition(d)?,
                Payload::Tripartite(_) => return Err(wrong_kind(&bundle, "cover or decomposition")),
            };
            print!("{}", serialize_patterns(&cells.family()));
            Ok(())
        }
        Command::Hit { file, t } => {
            let family = parse_patterns(&read(&file)?)?;
            let cert = find_hitting_set(&family, t)?;
            cert.verify(&family)?;
            println!("sigma\t{}", show(cert.sigma));
            println!("size\t{} (target {})", cert.sigma.len(), cert.target_size);
            println!("hit\t{} of {} large patterns", cert.hit_count, cert.large_count);
            println!("max_intersection\t{} (threshold {:.3})", cert.max_intersection, cert.threshold);
            println!("fallback\t{}", cert.fallback);
            Ok(())
        }
        Command::RunPhi { file, x, y, trace } => {
            let bundle = load(&file)?;
            let Payload::Cover(cover) = &bundle.payload else { return Err(wrong_kind(&bundle, "cover")) };
            let run = run_phi(cover, x, y)?;
            let checked = check_run(cover, &run, x, y).map_err(as_violation);
            println!("verdict\t{}", run.verdict);
            println!("witness\t{}", run.witness.map_or("-".into(), |r| r.to_string()));
            println!("total_bits\t{}", run.transcript.total_bits());
            println!("rounds\t{}", run.rounds());
            if trace {
                for s in &run.trace {
                    println!(
                        "round {}\trows {}\tcols {}\t|Γ| {}\t{:?}",
                        s.round,
                        s.rows,
                        s.cols,
                        s.family.len(),
                        s.action
                    );
                }
                print_transcript(&run.transcript);
            }
            checked
        }
        Command::RunPsi { file, x, y, trace } => {
            let bundle = load(&file)?;
            let Payload::Decomposition(d) = &bundle.payload else { return Err(wrong_kind(&bundle, "decomposition")) };
            let plan = PsiPlan::new(d)?;
            let run = plan.run(x, y)?;
            let checked = check_psi(&plan, d, &run, x, y).map_err(as_violation);
            let l = &run.ledger;
            println!("verdict\t{}", run.verdict);
            println!("witness\t{}", run.witness.map_or("-".into(), |i| i.to_string()));
            println!("total_bits\t{}", run.transcript.total_bits());
            println!("rounds\t{}", run.rounds());
            println!("s_changes\t{}", l.s_changes);
            println!("sigma_changes\t{:?}", l.sigma_changes);
            println!("step8_rounds\t{} (longest run {})", l.step8, l.max_consecutive_step8);
            if trace {
                for r in &run.trace {
                    println!(
                        "round {}\t|Γ| {}\ts {}\tσ {}{}\tt {}\t|Π| {} (A {}, B {})\t{:?}",
                        r.round,
                        r.family_size,
                        r.s,
                        show(r.sigma),
                        if r.sigma_rechosen { "*" } else { "" },
                        r.t,
                        r.pi,
                        r.pi_a,
                        r.pi_b,
                        r.action
                    );
                }
                print_transcript(&run.transcript);
            }
            checked
        }
        Command::RunXi { file, x, y, trace } => {
            let bundle = load(&file)?;
            let Payload::Decomposition(d) = &bundle.payload else { return Err(wrong_kind(&bundle, "decomposition")) };
            let plan = XiPlan::new(d)?;
            let run = plan.run(x, y)?;
            let checked = check_xi(&plan, &run, x, y).map_err(as_violation);
            let calls: Vec<_> = run.inner_calls().collect();
            println!("answer\t{}", show(run.answer));
            println!("total_bits\t{}", run.transcript.total_bits());
            println!("rounds\t{}", run.rounds());
            println!("inner_calls\t{}", calls.len());
            println!("inner_max_bits\t{}", calls.iter().map(|c| c.bits).max().unwrap_or(0));
            println!("inner_max_rounds\t{}", calls.iter().map(|c| c.rounds).max().unwrap_or(0));
            if trace {
                for r in &run.trace {
                    println!("round {}\t|Γ| {}\tW+ {}", r.round, r.family.len(), show(r.w_plus));
                    for (sign, c) in std::iter::once(("+", &r.positive)).chain(r.negative.as_ref().map(|c| ("-", c))) {
                        println!(
                            "  {sign} parts {}\t|Γ| {}\tverdict {}\twitness {}\tbits {}\trounds {}",
                            show(c.parts),
                            c.family_size,
                            c.verdict,
                            c.witness.map_or("-".into(), |i| i.to_string()),
                            c.bits,
                            c.rounds
                        );
                    }
                }
                print_transcript(&run.transcript);
            }
            checked
        }
        Command::RunThreeParty { file, x, y, z, trace } => {
            let bundle = load(&file)?;
            let Payload::Tripartite(g) = &bundle.payload else { return Err(wrong_kind(&bundle, "tripartite")) };
            let compiler = ThreePartyCompiler::new(g, &CheapestBuilder)?;
            let run = compiler.run(x, y, z)?;
            println!("answer\t{}", u8::from(run.answer));
            println!("slice\t{}", show(run.set));
            println!("message\t{}", run.message);
            println!("broadcast_bits\t{}", run.broadcast_bits());
            println!("message_bits\t{}", run.message_bits());
            println!("total_bits\t{}", run.transcript.total_bits());
            if trace {
                print_transcript(&run.transcript);
            }
            Ok(())
        }
        Command::CompileThreeParty { file } => {
            let bundle = load(&file)?;
            let Payload::Tripartite(g) = &bundle.payload else { return Err(wrong_kind(&bundle, "tripartite")) };
            let compiler = ThreePartyCompiler::new(g, &CheapestBuilder)?;
            let gamma1 = compiler.search().family().len();
            println!("ell\t{}", compiler.catalog().ell());
            println!("catalog\t{}", compiler.catalog().len());
            println!("k\t{}", compiler.slices().k);
            println!("effective_k\t{}", effective_k(compiler.slices().k, gamma1));
            println!("gamma1\t{gamma1}");
            let (a, b, _) = g.dims();
            println!("# total bits at (x, y); rows are x");
            for x in 0..a {
                let row: Vec<String> = (0..b)
                    .map(|y| compiler.run(x, y, 0).map(|r| r.transcript.total_bits().to_string()))
                    .collect::<Result<_>>()?;
                println!("{}", row.join("\t"));
            }
            Ok(())
        }
        Command::Bench { files, params, seed, count, out } => {
            let suite = if files.is_empty() {
                generate_suite(seed, count, &params.params())?
            } else {
                files.iter().map(|f| Ok((f.display().to_string(), load(f)?))).collect::<Result<_>>()?
            };
            let rows = run_bench(&suite)?;
            write_or_print(out.as_deref(), &format_tsv(&rows))?;
            let summary = BenchSummary::of(&rows);
            eprintln!("{summary}");
            summary.into_result().map(|_| ())
        }
    }
}
