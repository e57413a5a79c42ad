//! Command-line front end: separation queries, graph construction, axiom
//! closure, exact counterexamples, and verification sweeps.
//!
//! Exit status is a stable contract: 0 and 1 carry the semantic verdict
//! (separated/derivable/pass vs. not), 2 flags malformed input, and 3 flags
//! an exceeded size or search limit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Zero};

use graphoid::{
    all_dags, armstrong_sweep, closure, completeness_sweep_dags, construct_witness,
    construction_claims, d_separated, derives, id_separated, perfectmap_sweep_dags,
    render_witness_report, requisite_nodes, soundness_sweep, theorem2_sweep, verify_witness,
    CausalInputList, CiStatement, Dag, Error, NodeId, NodeSet, Result, SeparationVerdict,
    StatementSet, SweepOutcome,
};

#[derive(Parser)]
#[command(
    name = "graphoid",
    version,
    about = "Conditional-independence queries, closures, and exact counterexamples over causal graphs"
)]
struct Cli {
    /// Output style: prose for people, stable line-oriented text for scripts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a statement is graphically verified in a graph file
    /// (exit 0 = separated, 1 = not, with a witness path).
    Dsep(QueryArgs),
    /// Like dsep, but treats nodes functionally determined by the
    /// conditioning set as observed.
    Idsep(QueryArgs),
    /// Build the graph a causal input list induces and print it in the
    /// graph file format.
    Build {
        /// Causal input list file.
        list: PathBuf,
    },
    /// Close a statement set under the derivation axioms and print it in
    /// the statement-set file format.
    Closure {
        /// Statement-set file (`universe ...` line, then one statement per line).
        set: PathBuf,
    },
    /// Decide whether a goal statement is derivable from a statement set
    /// (exit 0 = derivable, 1 = not).
    Derives {
        /// Statement-set file.
        set: PathBuf,
        /// Goal statement literal, e.g. `I(3 ; 1,2,4 ; 5)`.
        goal: String,
    },
    /// Construct an exact correlation counterexample for a statement the
    /// graph does not verify, and print its full verification report.
    Counterexample {
        /// Graph file.
        dag: PathBuf,
        /// The dependency to exhibit, e.g. `I(2 ; 1,5 ; 3)`.
        statement: String,
        /// Correlation strength, a fraction strictly between 0 and 1.
        #[arg(long, default_value = "1/2")]
        rho: String,
    },
    /// Run a verification sweep (exit 0 = all cases pass, 1 = failures).
    Verify {
        #[command(subcommand)]
        sweep: SweepCommand,
    },
    /// List the nodes whose values can influence a query between x and y.
    Requisite {
        /// Graph file.
        dag: PathBuf,
        /// Comma-separated query nodes.
        #[arg(long)]
        x: String,
        /// Comma-separated query nodes.
        #[arg(long)]
        y: String,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Graph file.
    dag: PathBuf,
    /// Statement literal `I(X ; Z ; Y)`; omit when using --batch.
    #[arg(required_unless_present = "batch")]
    statement: Option<String>,
    /// File with one statement per line ('#' comments allowed); prints one
    /// verdict line per statement and exits 1 if any is not separated.
    #[arg(long, conflicts_with = "statement")]
    batch: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Random graphs and table seeds: every verified statement must hold
    /// exactly in a distribution factorizing along the graph.
    Soundness {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random graphs: the axiom closure of the causal input list must equal
    /// the graphically verified set.
    Theorem2 {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random distribution pairs: independence in the combination must be
    /// the conjunction of independence in the factors.
    Armstrong {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Number of binary variables.
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every graph up to the node limit, every unverified triple: the
    /// correlation witness must verify and satisfy its structural claims.
    Completeness {
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        #[arg(long, default_value = "1/2")]
        rho: String,
    },
    /// Every graph up to the node limit: the constructed distribution's
    /// exact independence set must equal the graphically verified set.
    Perfectmap {
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Dsep(args) => query(cli.format, args, d_separated),
        Command::Idsep(args) => query(cli.format, args, id_separated),
        Command::Build { list } => {
            let list = CausalInputList::parse_text(&read(list)?)?;
            print!("{}", list.build_dag().to_text());
            Ok(0)
        }
        Command::Closure { set } => {
            let set = StatementSet::parse_text(&read(set)?)?;
            print!("{}", closure(&set)?.to_text());
            Ok(0)
        }
        Command::Derives { set, goal } => {
            let set = StatementSet::parse_text(&read(set)?)?;
            let goal = CiStatement::parse(goal)?;
            let yes = derives(&set, &goal)?;
            match cli.format {
                Format::Human => println!(
                    "{goal} is {}derivable from the given statements",
                    if yes { "" } else { "not " }
                ),
                Format::Structured => {
                    println!("verdict {}", if yes { "derivable" } else { "underivable" })
                }
            }
            Ok(if yes { 0 } else { 1 })
        }
        Command::Counterexample {
            dag,
            statement,
            rho,
        } => {
            let dag = Dag::parse_text(&read(dag)?)?;
            let sigma = CiStatement::parse(statement)?;
            let rho = parse_rho(rho)?;
            let witness = construct_witness(&dag, &sigma, rho)?;
            let report = verify_witness(&dag, &witness)?;
            let claims = construction_claims(&witness);
            print!("{}", render_witness_report(&witness, &report));
            Ok(if report.passed() && claims.all_hold() {
                0
            } else {
                1
            })
        }
        Command::Verify { sweep } => {
            let outcome = run_sweep(sweep)?;
            match cli.format {
                Format::Human => {
                    println!("{}", outcome.summary());
                    for failure in outcome.failures() {
                        println!("  {failure}");
                    }
                }
                Format::Structured => {
                    println!("sweep {}", outcome.label());
                    println!("cases {}", outcome.cases());
                    println!("failures {}", outcome.failures().len());
                    for failure in outcome.failures() {
                        println!("failure {failure}");
                    }
                }
            }
            Ok(if outcome.passed() { 0 } else { 1 })
        }
        Command::Requisite { dag, x, y } => {
            let dag = Dag::parse_text(&read(dag)?)?;
            let x = parse_nodes(x)?;
            let y = parse_nodes(y)?;
            let nodes = requisite_nodes(&dag, &x, &y)?;
            let joined = nodes
                .iter()
                .map(NodeId::as_str)
                .collect::<Vec<_>>()
                .join(",");
            match cli.format {
                Format::Human => println!("requisite nodes: {joined}"),
                Format::Structured => println!("requisite {joined}"),
            }
            Ok(0)
        }
    }
}

type QueryFn = fn(&Dag, &NodeSet, &NodeSet, &NodeSet) -> Result<SeparationVerdict>;

fn query(format: Format, args: &QueryArgs, decide: QueryFn) -> Result<u8> {
    let dag = Dag::parse_text(&read(&args.dag)?)?;
    if let Some(batch) = &args.batch {
        let mut all_separated = true;
        let mut out = String::new();
        for (line_no, raw) in read(batch)?.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let statement = CiStatement::parse(line).map_err(|e| e.at_line(line_no + 1))?;
            let verdict = decide(&dag, statement.x(), statement.z(), statement.y())?;
            all_separated &= verdict.separated();
            let _ = writeln!(out, "{statement} : {}", verdict_word(&verdict));
        }
        print!("{out}");
        return Ok(if all_separated { 0 } else { 1 });
    }
    let literal = args.statement.as_deref().expect("clap enforces presence");
    let statement = CiStatement::parse(literal)?;
    let verdict = decide(&dag, statement.x(), statement.z(), statement.y())?;
    match format {
        Format::Human => match verdict.witness() {
            None => println!("separated"),
            Some(path) => println!("not separated; witness path: {path}"),
        },
        Format::Structured => println!("verdict {}", verdict_word(&verdict)),
    }
    Ok(if verdict.separated() { 0 } else { 1 })
}

/// One-token verdict plus the witness path when connected; shared by batch
/// lines and structured single queries so the two are grep-compatible.
fn verdict_word(verdict: &SeparationVerdict) -> String {
    match verdict.witness() {
        None => "separated".into(),
        Some(path) => format!("connected {path}"),
    }
}

fn run_sweep(sweep: &SweepCommand) -> Result<SweepOutcome> {
    match sweep {
        SweepCommand::Soundness {
            cases,
            max_nodes,
            seed,
        } => soundness_sweep(*cases, *max_nodes, *seed),
        SweepCommand::Theorem2 {
            cases,
            max_nodes,
            seed,
        } => theorem2_sweep(*cases, *max_nodes, *seed),
        SweepCommand::Armstrong {
            cases,
            max_nodes,
            seed,
        } => armstrong_sweep(*cases, *max_nodes, *seed),
        SweepCommand::Completeness { max_nodes, rho } => {
            let rho = parse_rho(rho)?;
            completeness_sweep_dags(&all_dags(*max_nodes)?, &rho)
        }
        SweepCommand::Perfectmap { max_nodes, seed } => {
            perfectmap_sweep_dags(&all_dags(*max_nodes)?, *seed)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_rho(text: &str) -> Result<BigRational> {
    let rho: BigRational = text
        .parse()
        .map_err(|_| Error::Input(format!("rho must be a fraction p/q, got {text:?}")))?;
    if rho <= BigRational::zero() || rho >= BigRational::one() {
        return Err(Error::Input(format!(
            "rho must lie strictly between 0 and 1, got {rho}"
        )));
    }
    Ok(rho)
}

fn parse_nodes(text: &str) -> Result<NodeSet> {
    let nodes: NodeSet = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(NodeId::from)
        .collect();
    if nodes.is_empty() {
        return Err(Error::Input(format!(
            "expected a comma-separated node list, got {text:?}"
        )));
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_parses_fractions_and_rejects_out_of_range() {
        assert_eq!(
            parse_rho("1/2").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_rho("3/7").unwrap(),
            BigRational::new(3.into(), 7.into())
        );
        assert!(parse_rho("0/1").is_err());
        assert!(parse_rho("1/1").is_err());
        assert!(parse_rho("5/3").is_err());
        assert!(parse_rho("-1/2").is_err());
        assert!(parse_rho("half").is_err());
    }

    #[test]
    fn node_lists_parse_with_spaces_and_reject_emptiness() {
        let set = parse_nodes("2, 1").unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&NodeId::from("1")));
        assert!(parse_nodes("").is_err());
        assert!(parse_nodes(" , ").is_err());
    }

    #[test]
    fn cli_declares_a_consistent_interface() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
