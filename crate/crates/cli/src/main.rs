mod commands;
mod report;

use std::ffi::OsString;
use std::panic;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::{classify, RunReport, Status};

/// Iteration-free PDL with intersection and tests.
#[derive(Parser, Debug)]
#[command(name = "pdlkit", version, about)]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for model search (1 runs serially).
    #[arg(long, global = true, env = "PDLKIT_JOBS")]
    pub jobs: Option<usize>,
    /// Print the formula and program grammar and exit.
    #[arg(long)]
    pub ascii_help: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Text given inline, from a file, or `-` for standard input.
#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Inline text (`-` reads standard input).
    pub text: Option<String>,
    /// Read the text from a file instead.
    #[arg(long, short = 'f', conflicts_with = "text")]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Largest world count to search.
    #[arg(long, default_value_t = 3)]
    pub max_worlds: usize,
    /// Sample this many random structures instead of searching exhaustively.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Seed for --samples; generated and printed when omitted.
    #[arg(long, requires = "samples")]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and pretty-print a formula, program or judgement.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Read a program instead of a formula.
        #[arg(long, conflicts_with = "judgement")]
        program: bool,
        /// Read a program judgement `a => b` or `a <=> b`.
        #[arg(long)]
        judgement: bool,
        /// Print the core syntax (no derived connectives).
        #[arg(long)]
        core: bool,
    },
    /// Evaluate a formula in a structure.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: PathBuf,
        /// World to evaluate at; all satisfying worlds are listed otherwise.
        #[arg(long)]
        world: Option<String>,
    },
    /// Print the relation a program denotes in a structure.
    Relation {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: PathBuf,
    },
    /// Enumerate witness graphs for a transition.
    Witness {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Largest number of graphs to enumerate.
        #[arg(long, default_value_t = pdlkit::semantics::DEFAULT_CAP)]
        cap: usize,
        /// Keep only minimal graphs.
        #[arg(long)]
        minimal: bool,
        /// Print Graphviz instead of the graph list.
        #[arg(long)]
        dot: bool,
    },
    /// Split a program at an articulation node of a minimal witness graph.
    Gateway {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// The articulation node.
        #[arg(long)]
        via: String,
        /// Also check `b1;b2 => program` on every structure up to this size.
        #[arg(long)]
        verify: Option<usize>,
    },
    /// Rewrite a formula into normal form.
    Normalize {
        #[command(flatten)]
        input: Input,
        /// List the rewrite steps.
        #[arg(long)]
        trace: bool,
    },
    /// Check a proof file.
    CheckProof {
        /// Proof JSON (`-` reads standard input).
        file: PathBuf,
    },
    /// Large-program operations.
    Large {
        #[command(subcommand)]
        command: LargeCommand,
    },
    /// Search for a model of a formula.
    Sat {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Search for a countermodel of a formula.
    Valid {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: SearchArgs,
        /// Shrink the countermodel.
        #[arg(long)]
        minimize: bool,
    },
    /// Check a program judgement `a => b` or `a <=> b` on small structures.
    Pjudge {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Sweep every scheme, rule and mutant over small structures.
    AxiomsTest {
        /// Depth of the random formula and program pool.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        /// Terms per sort in the pool.
        #[arg(long, default_value_t = 600)]
        pool: usize,
        /// Instances per scheme.
        #[arg(long, default_value_t = 500)]
        instances: usize,
        /// Instances per rule.
        #[arg(long, default_value_t = 500)]
        rule_instances: usize,
        /// Instances per mutant.
        #[arg(long, default_value_t = 100)]
        mutant_instances: usize,
        #[arg(long)]
        no_mutants: bool,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Pool seed; generated and printed when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the shipped example fixtures.
    Fixtures {
        /// World bound for the cyclic-test search.
        #[arg(long, default_value_t = 4)]
        cyclic_worlds: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum LargeCommand {
    /// Consistency of a labelled transition `{"left", "program", "right"}`,
    /// or of a loop `{"loop": body, "phi": [...]}`.
    CheckTransition {
        #[command(flatten)]
        input: Input,
    },
    /// Enumerate the instances of a large program (JSON).
    Instances {
        #[command(flatten)]
        input: Input,
        /// Print at most this many.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Formulae missing from each test set for saturation.
    Gap {
        #[command(flatten)]
        input: Input,
    },
    /// Turn an ordinary program into a large one with singleton tests.
    Lift {
        #[command(flatten)]
        input: Input,
    },
    /// Whether every instance of the first large program is one of the second.
    Leq {
        /// JSON file with `[l1, l2]`.
        #[command(flatten)]
        input: Input,
    },
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs.filter(|&n| n > 1) {
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parse `argv`, run the command, and return the exit code and the text
/// that would be printed to stdout and stderr.
pub fn run<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    if cli.ascii_help {
        return (0, pdlkit::syntax::GRAMMAR.to_string(), String::new());
    }
    let Some(command) = cli.command else {
        return (2, String::new(), "no subcommand given; see --help\n".into());
    };
    configure_jobs(cli.jobs);
    let parallel = cli.jobs != Some(1);
    let start = Instant::now();
    let prev = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(panic::AssertUnwindSafe(|| commands::dispatch(command, parallel)));
    panic::set_hook(prev);
    let (mut report, err) = match outcome {
        Ok(Ok(r)) => (r, String::new()),
        Ok(Err(e)) => {
            let status = classify(&e);
            let msg = format!("{e:#}");
            (RunReport::new(status, serde_json::json!({"error": msg}), String::new()), format!("error: {msg}\n"))
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (
                RunReport::new(Status::Internal, serde_json::json!({"error": msg}), String::new()),
                format!("internal error: {msg}\n"),
            )
        }
    };
    report.timing_ms = start.elapsed().as_millis();
    let mut out = report.render(cli.json);
    out.push('\n');
    (report.status.exit_code(), out, err)
}

fn main() {
    let (code, out, err) = run(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    std::process::exit(code);
}
