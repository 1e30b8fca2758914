use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polyimage::io::{self, ParseError};
use polyimage::oracle::{verify_image, verify_preimage, SampleSpec, VerificationReport};
use polyimage::{image, preimage, Error, HPolyhedron, ImageOptions, LinMap};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_SURJECTIVE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Exact images and preimages of H-polyhedra under linear maps.
#[derive(Parser)]
#[command(name = "polyimage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Sampling {
    /// Sampling seed for verification
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half-width of the sampling box
    #[arg(long, default_value_t = 4)]
    radius: u64,
    /// Emit the verification report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Image of a polyhedron under a surjective linear map
    Image {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        map: String,
        /// Drop redundant rows after every elimination and from the result
        #[arg(long)]
        minimize: bool,
        /// Attach a certificate to every output row
        #[arg(long)]
        certificates: bool,
        /// Verify the result on this many samples; report goes to stderr
        #[arg(long, value_name = "N")]
        verify: Option<usize>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Preimage of a polyhedron under a linear map
    Preimage {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        map: String,
        /// Verify the result on this many samples; report goes to stderr
        #[arg(long, value_name = "N")]
        verify: Option<usize>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Membership test for a comma-separated point
    Member {
        #[arg(long)]
        poly: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Emptiness test
    Empty {
        #[arg(long)]
        poly: String,
    },
    /// Canonical form of a polyhedron
    Normalize {
        #[arg(long)]
        poly: String,
    },
    /// Audit a claimed image against the sampling oracle
    Verify {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        map: String,
        #[arg(long)]
        result: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Domain(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn with_path(path: &str) -> impl Fn(ParseError) -> Failure + '_ {
    move |e| Failure::Input(format!("{path}: {e}"))
}

fn load_poly(path: &str) -> Result<HPolyhedron, Failure> {
    io::parse_polyhedron(&read(path)?).map_err(with_path(path))
}

fn load_map(path: &str) -> Result<LinMap, Failure> {
    io::parse_linmap(&read(path)?).map_err(with_path(path))
}

fn spec(samples: usize, s: &Sampling) -> Result<SampleSpec, Failure> {
    SampleSpec::new(s.seed, samples, s.radius).map_err(|e| Failure::Input(e.to_string()))
}

fn render(report: &VerificationReport, json: bool) -> String {
    if json {
        report.to_json()
    } else {
        report.to_text()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Image {
            poly,
            map,
            minimize,
            certificates,
            verify,
            sampling,
        } => {
            let a = load_poly(&poly)?;
            let t = load_map(&map)?;
            let opts = if minimize {
                ImageOptions::minimized()
            } else {
                ImageOptions::default()
            };
            let out = image(&t, &a, &opts)?;
            if certificates {
                print!("{}", io::write_certified(&out));
            } else {
                print!("{}", io::write_polyhedron(&out.polyhedron));
            }
            if let Some(n) = verify {
                let report = verify_image(
                    &t,
                    &a,
                    &out.polyhedron,
                    Some(&out.certificates),
                    &spec(n, &sampling)?,
                );
                eprint!("{}", render(&report, sampling.json));
                if !report.passed() {
                    return Err(Failure::Verification);
                }
            }
        }
        Command::Preimage {
            poly,
            map,
            verify,
            sampling,
        } => {
            let b = load_poly(&poly)?;
            let t = load_map(&map)?;
            let out = preimage(&t, &b)?;
            print!("{}", io::write_polyhedron(&out));
            if let Some(n) = verify {
                let report = verify_preimage(&t, &b, &out, &spec(n, &sampling)?);
                eprint!("{}", render(&report, sampling.json));
                if !report.passed() {
                    return Err(Failure::Verification);
                }
            }
        }
        Command::Member { poly, point } => {
            let p = load_poly(&poly)?;
            let x = io::parse_point(&point).map_err(|e| Failure::Input(format!("--point: {e}")))?;
            println!("{}", p.contains(&x)?);
        }
        Command::Empty { poly } => {
            println!("{}", load_poly(&poly)?.is_empty());
        }
        Command::Normalize { poly } => {
            print!("{}", io::write_polyhedron(&load_poly(&poly)?.normalize_rows()));
        }
        Command::Verify {
            poly,
            map,
            result,
            samples,
            sampling,
        } => {
            let a = load_poly(&poly)?;
            let t = load_map(&map)?;
            let r = load_poly(&result)?;
            let report = verify_image(&t, &a, &r, None, &spec(samples, &sampling)?);
            print!("{}", render(&report, sampling.json));
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Domain(e @ Error::NotSurjective { .. })) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_NOT_SURJECTIVE)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Verification) => ExitCode::from(EXIT_VERIFY),
    }
}
