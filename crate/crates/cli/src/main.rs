//! Command-line driver for split Kummer surface arithmetic.
//!
//! Subcommands: `mul` (y-coordinate scalar multiplication via the surface
//! ladder), `project` (map a pair of curve points to the surface), `verify`
//! (identity suite plus, on small primes, the exhaustive exceptional-point
//! scan), and `bench` (field-operation counts per code section).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 arithmetic exception (non-square, exceptional point, and similar).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::RandBigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use splitkummer::field::parse_uint;
use splitkummer::kummer1::project;
use splitkummer::kummer2::{project_pair, triple_to_p3p1};
use splitkummer::verify::{random_k2_point, run_identity_suite_with_fault};
use splitkummer::{
    count_ops, scalar_mul_ladder, scan_exceptional, Coverage, CurveParams, EdwardsPoint, Error,
    Field, K1Point, OpCount, Section, SectionInput,
};

#[derive(Parser)]
#[command(
    name = "splitkummer",
    version,
    about = "Arithmetic on the split Kummer surface of an Edwards curve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Field prime, decimal or 0x-prefixed hex
    #[arg(long, value_name = "PRIME")]
    p: String,

    /// Curve constant d, hex field element (not 0 or 1)
    #[arg(long, value_name = "D")]
    d: String,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable text
    Text,
    /// One self-describing JSON object per line
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Compute y(n*P) from y(P) with the Montgomery ladder on the surface
    Mul {
        #[command(flatten)]
        common: Common,

        /// Scalar, decimal or 0x-prefixed hex; must be at least 1
        #[arg(long, value_name = "N")]
        n: String,

        /// y-coordinate of the base point as "y0:y1" in hex
        #[arg(long, value_name = "Y")]
        y: String,
    },

    /// Project a pair of curve points to the surface
    Project {
        #[command(flatten)]
        common: Common,

        /// First point as "X0:X1:X2:X3" in hex
        #[arg(value_name = "P")]
        p_point: String,

        /// Second point as "X0:X1:X2:X3" in hex
        #[arg(value_name = "Q")]
        q_point: String,
    },

    /// Run the identity suite; on primes of at most 13 bits, also the
    /// exhaustive exceptional-point scan
    Verify {
        #[command(flatten)]
        common: Common,

        /// Check every point, pair, and surface point (small primes only)
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,

        /// Random samples per identity
        #[arg(long, value_name = "COUNT", default_value_t = 1000,
              value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,

        /// Seed for the sample generator
        #[arg(long, value_name = "SEED", default_value_t = 0)]
        seed: u64,

        /// Append a deliberately false identity (failure-reporting check)
        #[arg(long, hide = true)]
        inject_fault: bool,
    },

    /// Measure field-operation counts for each code section
    Bench {
        #[command(flatten)]
        common: Common,

        /// Bit length of the scalar used for the ladder row
        #[arg(long, value_name = "BITS", default_value_t = 64,
              value_parser = clap::value_parser!(u64).range(1..=4096))]
        n_bits: u64,

        /// Seed for input generation
        #[arg(long, value_name = "SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

/// 2 for bad input, 3 for arithmetic exceptions reached with valid input.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::NotOnCurve
        | Error::InvalidPoint(_)
        | Error::ZeroScalar
        | Error::UnknownSection(_) => 2,
        _ => 3,
    }
}

fn curve(common: &Common) -> Result<CurveParams, Error> {
    let field = Field::new(parse_uint(&common.p)?)?;
    let d = field.from_hex(&common.d)?;
    CurveParams::new(field, d)
}

fn run(command: &Command) -> Result<bool, Error> {
    match command {
        Command::Mul { common, n, y } => {
            let params = curve(common)?;
            let n = parse_uint(n)?;
            let y = K1Point::parse(params.field(), y)?;
            let result = scalar_mul_ladder(&params, &n, &y)?.normalized();
            match common.format {
                Format::Text => println!("{result}"),
                Format::Records => println!(
                    "{}",
                    json!({
                        "kind": "result",
                        "command": "mul",
                        "prime": params.field().modulus().to_string(),
                        "d": params.d().to_hex(),
                        "n": n.to_string(),
                        "y": result.to_string(),
                    })
                ),
            }
            Ok(true)
        }
        Command::Project {
            common,
            p_point,
            q_point,
        } => {
            let params = curve(common)?;
            let p = EdwardsPoint::parse(&params, p_point)?;
            let q = EdwardsPoint::parse(&params, q_point)?;
            let result = triple_to_p3p1(&params, &project_pair(&params, &p, &q)?).normalized();
            match common.format {
                Format::Text => println!("{result}"),
                Format::Records => println!(
                    "{}",
                    json!({
                        "kind": "result",
                        "command": "project",
                        "prime": params.field().modulus().to_string(),
                        "d": params.d().to_hex(),
                        "point": result.to_string(),
                    })
                ),
            }
            Ok(true)
        }
        Command::Verify {
            common,
            exhaustive,
            samples,
            seed,
            inject_fault,
        } => {
            let params = curve(common)?;
            let coverage = if *exhaustive {
                Coverage::Exhaustive
            } else {
                Coverage::Random {
                    samples: *samples,
                    seed: *seed,
                }
            };
            let report = run_identity_suite_with_fault(&params, coverage, *inject_fault)?;
            let scan = if params.field().modulus().bits() <= 13 {
                Some(scan_exceptional(&params)?)
            } else {
                None
            };
            let passed = report.passing() && scan.as_ref().is_none_or(|s| s.passing());
            match common.format {
                Format::Text => {
                    print!("{}", report.render_text());
                    if let Some(scan) = &scan {
                        print!("{}", scan.render_text());
                    }
                    println!("result: {}", if passed { "PASS" } else { "FAIL" });
                }
                Format::Records => {
                    for line in report.record_lines() {
                        println!("{line}");
                    }
                    if let Some(scan) = &scan {
                        for line in scan.record_lines() {
                            println!("{line}");
                        }
                    }
                }
            }
            Ok(passed)
        }
        Command::Bench {
            common,
            n_bits,
            seed,
        } => {
            let params = curve(common)?;
            bench(&params, common.format, *n_bits, *seed)?;
            Ok(true)
        }
    }
}

fn bench(params: &CurveParams, format: Format, n_bits: u64, seed: u64) -> Result<(), Error> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pair = (params.random_point(&mut rng), params.random_point(&mut rng));
    let point = params.random_point(&mut rng);
    let line = project(&params.random_point(&mut rng));
    let surface = random_k2_point(params, &mut rng);
    let ladder_y = project(&params.random_point(&mut rng));
    let mut n = rng.gen_biguint(n_bits);
    n.set_bit(n_bits - 1, true);

    let mut rows: Vec<(String, OpCount)> = Vec::new();
    for section in Section::ALL {
        let input = match section {
            Section::EdwardsAdd => SectionInput::Pair(pair.0.clone(), pair.1.clone()),
            Section::EdwardsDouble => SectionInput::Point(point.clone()),
            Section::Duplicate => SectionInput::Line(line.clone()),
            Section::Rho
            | Section::Tau
            | Section::Phi0
            | Section::Phi1
            | Section::RhoSegre
            | Section::LadderStep0
            | Section::LadderStep1 => SectionInput::Surface(surface.clone()),
            Section::Ladder => SectionInput::Ladder {
                n: n.clone(),
                y: ladder_y.clone(),
            },
        };
        rows.push((section.name().to_owned(), count_ops(params, section, &input)?));
    }

    // Marginal cost of one scalar bit: the same ladder with the scalar
    // shifted one bit longer, minus the original run.
    let longer = &n << 1;
    let full = rows.last().expect("ladder row").1;
    let extended = count_ops(
        params,
        Section::Ladder,
        &SectionInput::Ladder {
            n: longer,
            y: ladder_y.clone(),
        },
    )?;
    rows.push((
        "ladder_per_bit".to_owned(),
        OpCount {
            mul: extended.mul - full.mul,
            sqr: extended.sqr - full.sqr,
            add_sub: extended.add_sub - full.add_sub,
            mul_by_d: extended.mul_by_d - full.mul_by_d,
            inv: extended.inv - full.inv,
        },
    ));

    match format {
        Format::Text => {
            println!(
                "bench over p = {}, d = 0x{} (seed {}, ladder scalar {} bits)",
                params.field().modulus(),
                params.d().to_hex(),
                seed,
                n_bits
            );
            println!(
                "{:<16} {:>8} {:>8} {:>8} {:>9} {:>6} {:>8}",
                "section", "mul", "sqr", "add_sub", "mul_by_d", "inv", "total"
            );
            for (name, ops) in &rows {
                println!(
                    "{:<16} {:>8} {:>8} {:>8} {:>9} {:>6} {:>8}",
                    name,
                    ops.mul,
                    ops.sqr,
                    ops.add_sub,
                    ops.mul_by_d,
                    ops.inv,
                    ops.total()
                );
            }
        }
        Format::Records => {
            println!(
                "{}",
                json!({
                    "kind": "bench",
                    "prime": params.field().modulus().to_string(),
                    "d": params.d().to_hex(),
                    "seed": seed,
                    "n_bits": n_bits,
                })
            );
            for (name, ops) in &rows {
                println!(
                    "{}",
                    json!({
                        "kind": "opcount",
                        "section": name,
                        "mul": ops.mul,
                        "sqr": ops.sqr,
                        "add_sub": ops.add_sub,
                        "mul_by_d": ops.mul_by_d,
                        "inv": ops.inv,
                        "total": ops.total(),
                    })
                );
            }
        }
    }
    Ok(())
}
