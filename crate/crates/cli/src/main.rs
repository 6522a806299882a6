use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::{CliError, Report};

/// Second-order sentences over finite structures: parse, normalize,
/// classify, transform, model-check, reduce and probe closure properties.
#[derive(Parser, Debug)]
#[command(name = "pohammer", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Game-tree node budget for model checking.
    #[arg(long, global = true, default_value_t = pohammer_core::model_check::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Clause cap for CNF/DNF conversion.
    #[arg(long, global = true, default_value_t = pohammer_core::normalize::DEFAULT_SIZE_CAP)]
    pub size_cap: usize,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized modes (required by `sample`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for model checking and closure search.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Structure,
    Formula,
    Qcsp,
    Qbf3,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Sentence,
    Structure,
    Qcsp,
    Qbf3,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a file and print its canonical form.
    Parse {
        file: String,
        /// Input format; guessed from the extension when absent.
        #[arg(long = "as", value_enum)]
        kind: Option<InputKind>,
        /// Template structure (QCSP instances only).
        #[arg(long)]
        template: Option<String>,
    },
    /// Rewrite a sentence into a normal form.
    #[command(group(ArgGroup::new("mode").required(true).args(["nnf", "prenex", "cnf", "dnf", "dual"])))]
    Normalize {
        file: String,
        #[arg(long)]
        nnf: bool,
        #[arg(long)]
        prenex: bool,
        #[arg(long)]
        cnf: bool,
        #[arg(long)]
        dnf: bool,
        /// Negate and dualize the SO prefix.
        #[arg(long)]
        dual: bool,
    },
    /// Run a syntactic class recognizer.
    Classify {
        file: String,
        /// positive | negative | exists-guarded | forall-restricted
        #[arg(long)]
        class: String,
    },
    /// Apply a source-to-source transformation.
    Transform {
        file: String,
        /// sup | shom | restrict:NAME | hammer
        #[arg(long)]
        kind: String,
        /// Skip the recognizer check before hammering.
        #[arg(long)]
        force: bool,
    },
    /// Model-check a sentence on a structure.
    Mc {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        formula: String,
    },
    /// Decide a QCSP instance over a template by brute force.
    SolveQcsp {
        file: String,
        #[arg(long)]
        template: String,
    },
    /// Decide a quantified 3-CNF by brute force.
    SolveQbf3 { file: String },
    /// Build the MSO sentence for bounded-alternation QCSP over a template.
    BuildPhib {
        #[arg(long)]
        template: String,
        /// Quantifier pattern such as `AE` or `forall exists`.
        #[arg(long)]
        prefix: String,
        /// Build the displayed formula without the at-most-one-value constraint.
        #[arg(long)]
        verbatim: bool,
        /// Write the kit to this directory.
        #[arg(long)]
        out: Option<String>,
    },
    /// Build the MSO sentence for (∀∃)^n quantified 3-CNF.
    BuildPhistar {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        verbatim: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Encode an instance as a finite structure.
    #[command(group(ArgGroup::new("instance").required(true).args(["qcsp", "qbf3"])))]
    Encode {
        #[arg(long)]
        qcsp: Option<String>,
        #[arg(long)]
        qbf3: Option<String>,
        #[arg(long, required_if_eq("instance", "qcsp"))]
        template: Option<String>,
    },
    /// Run an instance through the direct oracle and both reduction legs.
    #[command(group(ArgGroup::new("instance").required(true).args(["qcsp", "qbf3"])))]
    Pipeline {
        #[arg(long)]
        qcsp: Option<String>,
        #[arg(long)]
        qbf3: Option<String>,
        #[arg(long)]
        template: Option<String>,
        #[arg(long)]
        verbatim: bool,
    },
    /// Search a bounded family of structures for a closure counterexample.
    VerifyClosure {
        file: String,
        /// Closure kind, e.g. disjoint-unions or inverse-homomorphisms.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        max_size: usize,
        #[arg(long, default_value_t = 0)]
        min_size: usize,
        /// Sample COUNT random structures from SEED instead of enumerating.
        #[arg(long, num_args = 2, value_names = ["SEED", "COUNT"])]
        random: Option<Vec<u64>>,
        /// Signature of the family, e.g. `P/1,E/2` (default: the symbols of the sentence).
        #[arg(long)]
        sig: Option<String>,
        /// Keep one structure per isomorphism class.
        #[arg(long)]
        dedup: bool,
    },
    /// Print seeded random inputs in the text formats.
    Sample {
        #[arg(long, value_enum)]
        what: SampleKind,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Signature for sentences and structures (default `P/1,E/2`).
        #[arg(long)]
        sig: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json = cli.global.json;
    let name = commands::name(&cli.command);
    match commands::run(&cli) {
        Ok(report) => emit(&report, json),
        Err(e) => {
            let report = Report::from_error(name, &e);
            if json {
                println!("{}", report.json);
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(report: &Report, json: bool) -> ExitCode {
    if json {
        println!("{}", report.json);
    } else {
        print!("{}", report.text);
    }
    ExitCode::from(report.code)
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Budget(_) | CliError::Cap(_) => 3,
        _ => 2,
    }
}
