use std::fmt::Write as _;
use std::io::{IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use msca_core::{
    compare, compose, corpus, io, project, synthesize, walk, DiffReport, LabelClass, Msca,
    Policy, Semantics,
};

const EXIT_ERROR: u8 = 1;
const EXIT_EMPTY: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "msca",
    version,
    about = "Compose modal service contract automata and synthesize orchestrations",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compose automata into their product ("-" reads one operand from stdin)
    Compose {
        /// Input automata, composed left to right
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file (defaults to stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesize an orchestration; exits 2 when it is empty
    Synth {
        /// Controllability semantics: original, refined, forall or mpc
        #[arg(long, value_parser = parse_semantics)]
        semantics: Semantics,
        input: PathBuf,
        /// Output file (defaults to stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the synthesis trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Validate a document and report structure, label classes and dangling states
    Check { input: PathBuf },
    /// Project a composition onto one principal
    Project {
        /// Component index, 0-based
        #[arg(short = 'j', long = "component")]
        j: usize,
        input: PathBuf,
        /// Output file (defaults to stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export GraphViz DOT
    Dot {
        input: PathBuf,
        /// Output file (defaults to stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two automata; exits 0 only when they are identical
    Diff { a: PathBuf, b: PathBuf },
    /// Walk an automaton and report the trace as JSON
    Simulate {
        /// Maximum number of steps
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// PRNG seed for the random policy
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated outgoing-transition indices; overrides the random policy
        #[arg(long)]
        script: Option<String>,
        input: PathBuf,
    },
    /// Bundled automata from the worked examples
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// List the bundled automata
    List,
    /// Write one bundled automaton to <dir>/<name>.msca.json ("-o -" prints it)
    Emit {
        name: String,
        /// Target directory, or "-" for stdout
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

fn parse_semantics(s: &str) -> Result<Semantics, String> {
    s.parse()
}

enum Failure {
    /// Caller mistake: bad arguments, unknown names, missing input files.
    Usage(String),
    /// The environment failed us: unreadable or unwritable streams.
    Io(String),
    /// The data was bad or the operation legitimately refused it.
    Error(String),
    /// Synthesis succeeded but the orchestration is empty.
    EmptyOrchestration,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Error(_) => EXIT_ERROR,
            Failure::EmptyOrchestration => EXIT_EMPTY,
        }
    }
}

/// ANSI escapes for one output stream; all empty when color is off.
#[derive(Clone, Copy)]
struct Palette {
    red: &'static str,
    green: &'static str,
    yellow: &'static str,
    bold: &'static str,
    reset: &'static str,
}

impl Palette {
    fn new(enabled: bool) -> Palette {
        if enabled {
            Palette {
                red: "\x1b[31m",
                green: "\x1b[32m",
                yellow: "\x1b[33m",
                bold: "\x1b[1m",
                reset: "\x1b[0m",
            }
        } else {
            Palette {
                red: "",
                green: "",
                yellow: "",
                bold: "",
                reset: "",
            }
        }
    }

    fn for_stdout() -> Palette {
        Palette::new(std::env::var_os("MSCA_NO_COLOR").is_none() && std::io::stdout().is_terminal())
    }

    fn for_stderr() -> Palette {
        Palette::new(std::env::var_os("MSCA_NO_COLOR").is_none() && std::io::stderr().is_terminal())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let p = Palette::for_stderr();
            match &failure {
                Failure::Usage(m) | Failure::Io(m) | Failure::Error(m) => {
                    eprintln!("{}error:{} {m}", p.red, p.reset);
                }
                Failure::EmptyOrchestration => {
                    eprintln!("{}empty orchestration{}", p.yellow, p.reset);
                }
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Compose { inputs, output } => cmd_compose(&inputs, output.as_deref()),
        Command::Synth {
            semantics,
            input,
            output,
            trace,
        } => cmd_synth(semantics, &input, output.as_deref(), trace.as_deref()),
        Command::Check { input } => cmd_check(&input),
        Command::Project { j, input, output } => cmd_project(j, &input, output.as_deref()),
        Command::Dot { input, output } => cmd_dot(&input, output.as_deref()),
        Command::Diff { a, b } => cmd_diff(&a, &b),
        Command::Simulate {
            steps,
            seed,
            script,
            input,
        } => cmd_simulate(steps, seed, script.as_deref(), &input),
        Command::Corpus { command } => match command {
            CorpusCommand::List => cmd_corpus_list(),
            CorpusCommand::Emit { name, output } => cmd_corpus_emit(&name, &output),
        },
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| {
        let shown = path.display();
        if e.kind() == std::io::ErrorKind::NotFound {
            Failure::Usage(format!("{shown}: no such file"))
        } else {
            Failure::Io(format!("{shown}: {e}"))
        }
    })
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        None => {
            std::io::stdout()
                .write_all(contents.as_bytes())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))?;
        }
        Some(p) if p == Path::new("-") => {
            return write_output(None, contents);
        }
        Some(p) => {
            std::fs::write(p, contents).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        }
    }
    Ok(())
}

fn load_automaton(path: &Path) -> Result<Msca, Failure> {
    let text = read_input(path)?;
    io::load(&text).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn cmd_compose(inputs: &[PathBuf], output: Option<&Path>) -> Result<(), Failure> {
    if inputs.iter().filter(|p| *p == Path::new("-")).count() > 1 {
        return Err(Failure::Usage("stdin (\"-\") may be used for at most one operand".into()));
    }
    let operands: Vec<Msca> = inputs
        .iter()
        .map(|p| load_automaton(p))
        .collect::<Result<_, _>>()?;
    let composed = compose(&operands).map_err(|e| Failure::Error(e.to_string()))?;
    write_output(output, &io::save(&composed))
}

fn cmd_synth(
    semantics: Semantics,
    input: &Path,
    output: Option<&Path>,
    trace_path: Option<&Path>,
) -> Result<(), Failure> {
    let a = load_automaton(input)?;
    let (orchestration, trace) =
        synthesize(&a, semantics).map_err(|e| Failure::Error(e.to_string()))?;
    write_output(output, &io::save(&orchestration))?;
    if let Some(p) = trace_path {
        write_output(Some(p), &io::save_synthesis_trace(&trace))?;
    }
    let p = Palette::for_stderr();
    if orchestration.is_empty() {
        return Err(Failure::EmptyOrchestration);
    }
    eprintln!(
        "{}orchestration:{} {} states, {} transitions (semantics: {semantics})",
        p.green,
        p.reset,
        orchestration.states.len(),
        orchestration.transitions.len()
    );
    Ok(())
}

fn cmd_check(input: &Path) -> Result<(), Failure> {
    let text = read_input(input)?;
    let a = io::load_lenient(&text).map_err(|e| Failure::Error(format!("{}: {e}", input.display())))?;
    let violations = a.validate();
    let p = Palette::for_stdout();
    let mut report = String::new();

    let _ = writeln!(report, "{}rank:{} {}", p.bold, p.reset, a.rank);
    let _ = writeln!(
        report,
        "{}states:{} {} ({} final)",
        p.bold,
        p.reset,
        a.states.len(),
        a.finals.len()
    );
    match &a.initial {
        Some(q) => {
            let _ = writeln!(report, "{}initial:{} {q}", p.bold, p.reset);
        }
        None => {
            let _ = writeln!(report, "{}initial:{} none", p.bold, p.reset);
        }
    }
    let (mut requests, mut offers, mut matches) = (0usize, 0usize, 0usize);
    for t in &a.transitions {
        match t.label.classify() {
            Ok(LabelClass::Request) => requests += 1,
            Ok(LabelClass::Offer) => offers += 1,
            Ok(LabelClass::Match) => matches += 1,
            Err(_) => {}
        }
    }
    let _ = writeln!(
        report,
        "{}transitions:{} {} ({requests} request, {offers} offer, {matches} match)",
        p.bold,
        p.reset,
        a.transitions.len()
    );
    let necessary = a.necessary_transitions().count();
    let lazy = a.lazy_transitions().count();
    let _ = writeln!(
        report,
        "{}modalities:{} {} optional, {} lazy, {} urgent",
        p.bold,
        p.reset,
        a.transitions.len() - necessary,
        lazy,
        necessary - lazy
    );
    let dangling = msca_core::dangling(&a);
    if dangling.is_empty() {
        let _ = writeln!(report, "{}dangling:{} none", p.bold, p.reset);
    } else {
        let list: Vec<String> = dangling.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(
            report,
            "{}dangling:{} {} ({})",
            p.bold,
            p.reset,
            dangling.len(),
            list.join(", ")
        );
    }
    if violations.is_empty() {
        let _ = writeln!(report, "{}well-formed{}", p.green, p.reset);
        print!("{report}");
        Ok(())
    } else {
        let _ = writeln!(
            report,
            "{}{} violation(s):{}",
            p.red,
            violations.len(),
            p.reset
        );
        for v in &violations {
            let _ = writeln!(report, "  - {v}");
        }
        print!("{report}");
        Err(Failure::Error("automaton is not well-formed".into()))
    }
}

fn cmd_project(j: usize, input: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let a = load_automaton(input)?;
    let principal = project(&a, j).map_err(|e| Failure::Usage(e.to_string()))?;
    write_output(output, &io::save(&principal))
}

fn cmd_dot(input: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let a = load_automaton(input)?;
    write_output(output, &io::export_dot(&a))
}

fn render_diff(report: &DiffReport, p: Palette) -> String {
    let mut out = String::new();
    if let Some((ra, rb)) = report.rank_mismatch {
        let _ = writeln!(out, "{}rank:{} {ra} vs {rb}", p.red, p.reset);
    }
    if let Some((ia, ib)) = &report.initial_differs {
        let show = |i: &Option<msca_core::StateVec>| {
            i.as_ref().map_or("none".to_owned(), |q| q.to_string())
        };
        let _ = writeln!(out, "{}initial:{} {} vs {}", p.red, p.reset, show(ia), show(ib));
    }
    for (title, set) in [
        ("state only in left", &report.states_only_in_a),
        ("state only in right", &report.states_only_in_b),
        ("final only in left", &report.finals_only_in_a),
        ("final only in right", &report.finals_only_in_b),
    ] {
        for q in set.iter() {
            let _ = writeln!(out, "{}{title}:{} {q}", p.yellow, p.reset);
        }
    }
    for t in &report.transitions_only_in_a {
        let _ = writeln!(out, "{}transition only in left:{}  {t}", p.yellow, p.reset);
    }
    for t in &report.transitions_only_in_b {
        let _ = writeln!(out, "{}transition only in right:{} {t}", p.yellow, p.reset);
    }
    let _ = writeln!(
        out,
        "isomorphic after renaming: {}",
        report.isomorphic_after_renaming
    );
    out
}

fn cmd_diff(a_path: &Path, b_path: &Path) -> Result<(), Failure> {
    let a = load_automaton(a_path)?;
    let b = load_automaton(b_path)?;
    let report = compare(&a, &b);
    let p = Palette::for_stdout();
    if report.is_identical() {
        println!("{}identical{}", p.green, p.reset);
        Ok(())
    } else {
        print!("{}", render_diff(&report, p));
        Err(Failure::Error("automata differ".into()))
    }
}

fn cmd_simulate(steps: usize, seed: u64, script: Option<&str>, input: &Path) -> Result<(), Failure> {
    let a = load_automaton(input)?;
    let policy = match script {
        None => Policy::Random,
        Some(text) => {
            let indices: Result<Vec<usize>, _> =
                text.split(',').map(|part| part.trim().parse::<usize>()).collect();
            Policy::Scripted(indices.map_err(|_| {
                Failure::Usage(format!(
                    "--script expects comma-separated transition indices, got {text:?}"
                ))
            })?)
        }
    };
    let report = walk(&a, steps, seed, &policy).map_err(|e| Failure::Error(e.to_string()))?;
    write_output(None, &io::save_walk(&report))
}

fn cmd_corpus_list() -> Result<(), Failure> {
    for name in corpus::names() {
        println!("{name}");
    }
    Ok(())
}

fn cmd_corpus_emit(name: &str, output: &Path) -> Result<(), Failure> {
    let a = corpus::get(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown corpus automaton {name:?} (try `msca corpus list`)"
        ))
    })?;
    let text = io::save(&a);
    if output == Path::new("-") {
        return write_output(None, &text);
    }
    std::fs::create_dir_all(output)
        .map_err(|e| Failure::Io(format!("{}: {e}", output.display())))?;
    let path = output.join(format!("{name}.msca.json"));
    std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(())
}
