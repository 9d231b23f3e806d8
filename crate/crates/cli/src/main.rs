mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Report, Settings};

/// Typed metagraph rewriting: evaluate, encode and compare programs.
#[derive(Parser, Debug)]
#[command(name = "mettagraph", version)]
struct Cli {
    /// Step budget for evaluation, full evaluation and exploration.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Seed for sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pure type system specification file.
    #[arg(long, global = true, value_name = "FILE")]
    pts_spec: Option<PathBuf>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the compared systems as DOT files into DIR.
    #[arg(long, global = true, value_name = "DIR", num_args = 0..=1, default_missing_value = ".")]
    emit_dot: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Encode a term and run the rewrite engine to its normal forms.
    Eval(EvalArgs),
    /// Exact distribution over normal forms of a probabilistic term.
    FullEval(InputArgs),
    /// Follow one randomly chosen reduction path.
    Sample(SampleArgs),
    /// Type a term.
    Typecheck(TermArgs),
    /// Print the atoms encoding a term.
    Encode(TermArgs),
    /// Compare two transition systems given as JSON files.
    Bisim(BisimArgs),
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCmd,
    },
    /// Dispatch on --mode.
    Run(RunArgs),
}

#[derive(Subcommand, Debug)]
enum DemoCmd {
    /// Engine against case analysis on the small v1/v2/f1 system.
    Minisys(MinisysArgs),
}

#[derive(Args, Debug, Clone)]
struct MinisysArgs {
    /// Make f1 the identity, which must break the bisimulation.
    #[arg(long)]
    mutate: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// Read the input from FILE ("-" for stdin).
    #[arg(short, long, value_name = "FILE")]
    file: Option<PathBuf>,
    /// Input text; stdin when absent.
    text: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lang {
    /// Probabilistic constructs select pdts, declarations stlc, a PTS
    /// spec pts, pointed atoms atoms, anything else untyped.
    #[default]
    Auto,
    Stlc,
    Untyped,
    Pts,
    Pdts,
    Atoms,
}

#[derive(Args, Debug, Clone)]
struct TermArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Lang::Auto)]
    lang: Lang,
}

#[derive(Args, Debug, Clone)]
struct EvalArgs {
    #[command(flatten)]
    term: TermArgs,
    /// Print one JSON line per engine step to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of samples, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
}

#[derive(Args, Debug, Clone)]
struct BisimArgs {
    /// First system (JSON).
    first: PathBuf,
    /// Second system (JSON).
    second: PathBuf,
    /// Start state of the first system; its first state by default.
    #[arg(long)]
    start1: Option<String>,
    /// Start state of the second system.
    #[arg(long)]
    start2: Option<String>,
    /// Compare as weighted systems.
    #[arg(long)]
    prob: bool,
    /// Weight tolerance for --prob.
    #[arg(long, default_value_t = mettagraph::lts::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Eval,
    FullEval,
    Sample,
    Bisim,
    Typecheck,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DemoName {
    Minisys,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Run a built-in demonstration (bisim mode).
    #[arg(long, value_enum)]
    demo: Option<DemoName>,
    /// Two transition system files (bisim mode).
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    lts: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Lang::Auto)]
    lang: Lang,
    #[command(flatten)]
    input: InputArgs,
}

fn dispatch(cli: &Cli, set: &Settings) -> Result<Report, commands::CliError> {
    match &cli.cmd {
        Cmd::Eval(a) => commands::eval(set, &a.term.input, a.term.lang, a.trace),
        Cmd::FullEval(i) => commands::full_eval(set, i),
        Cmd::Sample(a) => commands::sample(set, &a.input, a.runs),
        Cmd::Typecheck(a) => commands::typecheck(set, &a.input, a.lang),
        Cmd::Encode(a) => commands::encode(set, &a.input, a.lang),
        Cmd::Bisim(a) => commands::bisim(set, &a.first, &a.second, a.start1.as_deref(), a.start2.as_deref(), a.prob.then_some(a.tol)),
        Cmd::Demo {
            which: DemoCmd::Minisys(m),
        } => commands::minisys(set, m.mutate),
        Cmd::Run(r) => match r.mode {
            Mode::Eval => commands::eval(set, &r.input, r.lang, false),
            Mode::FullEval => commands::full_eval(set, &r.input),
            Mode::Sample => commands::sample(set, &r.input, 1),
            Mode::Typecheck => commands::typecheck(set, &r.input, r.lang),
            Mode::Bisim => match (r.demo, r.lts.as_slice()) {
                (Some(DemoName::Minisys), _) => commands::minisys(set, false),
                (None, [a, b]) => commands::bisim(set, a, b, None, None, None),
                _ => Err(commands::CliError::Config(
                    "bisim mode needs --demo minisys or --lts FIRST SECOND".into(),
                )),
            },
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let set = Settings {
        budget: cli.budget as usize,
        seed: cli.seed,
        pts_spec: cli.pts_spec.clone(),
        json: cli.json,
        emit_dot: cli.emit_dot.clone(),
    };
    match dispatch(&cli, &set) {
        Ok(report) => {
            report.print(set.json);
            ExitCode::from(report.code)
        }
        Err(e) => {
            if set.json {
                println!("{}", commands::error_json(&e));
            }
            eprintln!("error: {e}");
            ExitCode::from(commands::EXIT_ERROR)
        }
    }
}
