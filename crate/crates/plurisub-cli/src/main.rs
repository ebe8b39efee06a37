use clap::{Args, Parser, Subcommand};
use plurisub_cli::commands::{self, EXIT_CONFIG};
use plurisub_cli::config::Overrides;
use plurisub_cli::{fixtures, resolve_domain};
use std::path::PathBuf;
use std::process::ExitCode;

/// Construct and verify plurisubharmonic defining functions for domains
/// in C^2 given by a symbolic boundary equation.
#[derive(Parser)]
#[command(name = "plurisub", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Built-in domain name (ball, example-2-3, example-2-3-fixed) or a
    /// path to a JSON config
    domain: Option<String>,
    /// Path to a JSON config (alternative to the positional argument)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and the CSV dumps
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sampling seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Hessian slack override
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exhaustion exponent override (collapses the sweep to one value)
    #[arg(long)]
    eta: Option<f64>,
    /// Print the report JSON to stdout instead of a summary line
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classify boundary samples and tabulate obstruction values
    Classify(RunArgs),
    /// Verify the interior and exterior Hessian lower bounds
    Verify(RunArgs),
    /// Sweep the exhaustion exponent grid on both sides
    DfExponent(RunArgs),
    /// Run the invariant suite over built-in (or given) domains
    Selftest {
        /// Domain to test; defaults to every built-in
        domain: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn resolve(args: &RunArgs) -> anyhow::Result<(String, plurisub_cli::config::DomainConfig)> {
    let (name, mut cfg) = match (&args.domain, &args.config) {
        (Some(_), Some(_)) => anyhow::bail!("give either a domain argument or --config, not both"),
        (Some(domain), None) => resolve_domain(domain)?,
        (None, Some(path)) => resolve_domain(&path.to_string_lossy())?,
        (None, None) => anyhow::bail!(
            "no domain given; pick one of {} or pass --config",
            fixtures::FIXTURE_NAMES.join(", ")
        ),
    };
    let overrides = Overrides {
        seed: args.seed,
        epsilon: args.epsilon,
        eta: args.eta,
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok((name, cfg))
}

fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Classify(args) => match resolve(args) {
            Ok((name, cfg)) => commands::cmd_classify(&name, &cfg, &args.out, args.json),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        Command::Verify(args) => match resolve(args) {
            Ok((name, cfg)) => commands::cmd_verify(&name, &cfg, &args.out, args.json),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        Command::DfExponent(args) => match resolve(args) {
            Ok((name, cfg)) => commands::cmd_df_exponent(&name, &cfg, &args.out, args.json),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        Command::Selftest {
            domain,
            config,
            json,
        } => {
            let domains = match (domain, config) {
                (Some(_), Some(_)) => {
                    eprintln!("error: give either a domain argument or --config, not both");
                    return EXIT_CONFIG;
                }
                (Some(d), None) => match resolve_domain(d) {
                    Ok(pair) => vec![pair],
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_CONFIG;
                    }
                },
                (None, Some(path)) => match resolve_domain(&path.to_string_lossy()) {
                    Ok(pair) => vec![pair],
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_CONFIG;
                    }
                },
                (None, None) => fixtures::FIXTURE_NAMES
                    .iter()
                    .map(|n| (n.to_string(), fixtures::fixture(n).expect("built-in")))
                    .collect(),
            };
            commands::cmd_selftest(&domains, *json)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run() as u8)
}
