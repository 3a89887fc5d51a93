//! Terminal front end: batch query runs, an interactive top level, dataset
//! loading with selectable indexing, and benchmark timing.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use natlog::db::{ConstIndexer, DbFormat, FactDb, PathIndexer};
use natlog::neural::{NeuralIndexer, TrainConfig};
use natlog::syntax::Query;
use natlog::{Natlog, Solver};

#[derive(Parser)]
#[command(name = "natlog", version, about = "Logic programming over nested-tuple terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a program, run one query, print every answer.
    Run {
        /// Program file (.nat)
        program: PathBuf,
        /// Query text, e.g. "tc Who is animal ?"
        query: String,
        #[command(flatten)]
        opts: SessionOpts,
    },
    /// Interactive top level; `halt.` exits.
    Repl {
        /// Program file to preload
        program: Option<PathBuf>,
        #[command(flatten)]
        opts: SessionOpts,
    },
    /// Run a bundled benchmark to exhaustion and report count and time.
    Bench {
        #[arg(value_enum)]
        name: BenchName,
    },
}

#[derive(Args)]
struct SessionOpts {
    /// Fact database file
    #[arg(long)]
    db: Option<PathBuf>,
    /// Database file format (default: by extension)
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    db_format: FormatArg,
    /// Candidate retrieval strategy for `~` goals
    #[arg(long, value_enum, default_value_t = IndexerArg::Const)]
    indexer: IndexerArg,
    /// Shape-prefilter candidates (const and path indexers)
    #[arg(long)]
    skeleton_prefilter: bool,
    /// Unify with the occurs check
    #[arg(long)]
    occurs_check: bool,
    /// Stop after this many answers
    #[arg(long)]
    max_answers: Option<usize>,
    /// Print elapsed wall time
    #[arg(long)]
    timing: bool,
    /// Neural indexer: hidden layer size (default max(16, facts))
    #[arg(long)]
    hidden: Option<usize>,
    /// Neural indexer: training epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Neural indexer: learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Neural indexer: prediction threshold in (0,1)
    #[arg(long)]
    threshold: Option<f64>,
    /// Neural indexer: weight init seed
    #[arg(long)]
    seed: Option<u64>,
    /// Neural indexer: write trained weights to this file
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Neural indexer: read weights instead of training
    #[arg(long)]
    load_model: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Auto,
    Nat,
    Csv,
    Tsv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexerArg {
    Const,
    Path,
    Neural,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchName {
    Queens10,
    Perm,
    Tc,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { program, query, opts } => run(&program, &query, &opts),
        Command::Repl { program, opts } => repl(program.as_deref(), &opts),
        Command::Bench { name } => bench(name),
    }
}

/// Exit code 1: configuration, parse or load problems.
fn load_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

/// Exit code 2: a runtime error in the answer stream.
fn stream_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn build_session(program: Option<&Path>, opts: &SessionOpts) -> Result<Natlog, String> {
    let neural_overrides = opts.hidden.is_some()
        || opts.epochs.is_some()
        || opts.lr.is_some()
        || opts.threshold.is_some()
        || opts.seed.is_some()
        || opts.save_model.is_some()
        || opts.load_model.is_some();
    if neural_overrides && opts.indexer != IndexerArg::Neural {
        return Err("neural options require --indexer neural".into());
    }
    if opts.skeleton_prefilter && opts.indexer == IndexerArg::Neural {
        return Err("--skeleton-prefilter applies to the const and path indexers".into());
    }

    let mut session = match program {
        Some(path) => Natlog::from_file(path)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => Natlog::from_text("").expect("empty program"),
    };
    session = session.with_occurs_check(opts.occurs_check);

    let Some(db_path) = &opts.db else {
        if opts.indexer != IndexerArg::Const || opts.skeleton_prefilter {
            return Err("an indexer selection needs a database (--db)".into());
        }
        return Ok(session);
    };

    let format = match opts.db_format {
        FormatArg::Auto => None,
        FormatArg::Nat => Some(DbFormat::Nat),
        FormatArg::Csv => Some(DbFormat::Csv),
        FormatArg::Tsv => Some(DbFormat::Tsv),
        FormatArg::Json => Some(DbFormat::Json),
    };
    let mut db = FactDb::new();
    db.load_path(db_path, format).map_err(|e| format!("{}: {e}", db_path.display()))?;

    match opts.indexer {
        IndexerArg::Const => {
            if opts.skeleton_prefilter {
                db.build_skeletons();
            }
            let indexer = ConstIndexer { skeleton_prefilter: opts.skeleton_prefilter };
            Ok(session.with_db(db).with_indexer(indexer))
        }
        IndexerArg::Path => {
            db.build_path_index();
            if opts.skeleton_prefilter {
                db.build_skeletons();
            }
            let indexer = PathIndexer { skeleton_prefilter: opts.skeleton_prefilter };
            Ok(session.with_db(db).with_indexer(indexer))
        }
        IndexerArg::Neural => {
            let cfg = TrainConfig {
                hidden_size: opts.hidden,
                epochs: opts.epochs.unwrap_or_else(|| TrainConfig::default().epochs),
                learning_rate: opts.lr.unwrap_or_else(|| TrainConfig::default().learning_rate),
                threshold: opts.threshold.unwrap_or_else(|| TrainConfig::default().threshold),
                seed: opts.seed.unwrap_or_else(|| TrainConfig::default().seed),
            };
            let indexer = match &opts.load_model {
                Some(path) => NeuralIndexer::load(path, &db)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                None => {
                    let t0 = Instant::now();
                    let (indexer, loss) =
                        NeuralIndexer::train(&db, &cfg).map_err(|e| e.to_string())?;
                    eprintln!(
                        "trained neural indexer: loss = {loss:.6}, {} epochs, {:.3}s",
                        cfg.epochs,
                        t0.elapsed().as_secs_f64()
                    );
                    indexer
                }
            };
            if let Some(path) = &opts.save_model {
                indexer.save(path).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(session.with_db(db).with_indexer(indexer))
        }
    }
}

fn goal_banner(query: &Query) -> String {
    let mut out = String::from("(");
    for (i, goal) in query.goals.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(goal.tag.sigil());
        out.push_str(&goal.term.to_string());
    }
    if query.goals.len() == 1 {
        out.push(',');
    }
    out.push(')');
    out
}

/// Prints answers until exhaustion, an error, or the answer cap.
/// Returns the count, or the stream error message.
fn print_answers(solver: Solver, max_answers: Option<usize>) -> Result<usize, String> {
    let mut count = 0;
    for answer in solver {
        match answer {
            Ok(answer) => {
                println!("ANSWER: {answer}");
                count += 1;
                if max_answers.is_some_and(|cap| count >= cap) {
                    break;
                }
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(count)
}

fn run(program: &Path, query_text: &str, opts: &SessionOpts) -> ExitCode {
    let session = match build_session(Some(program), opts) {
        Ok(s) => s,
        Err(e) => return load_error(e),
    };
    let query = match natlog::parse_query(query_text) {
        Ok(q) => q,
        Err(e) => return load_error(format!("query: {e}")),
    };
    println!("GOAL PARSED: {}", goal_banner(&query));
    let started = Instant::now();
    let outcome = print_answers(session.solve_query(&query), opts.max_answers);
    if opts.timing {
        println!("TIME: {:.3}s", started.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => stream_error(e),
    }
}

fn repl(program: Option<&Path>, opts: &SessionOpts) -> ExitCode {
    let mut session = match build_session(program, opts) {
        Ok(s) => s,
        Err(e) => return load_error(e),
    };
    println!("natlog: `?` queries, `.` adds clauses, halt. exits");
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("?- ");
        let _ = std::io::stdout().flush();
        let Some(Ok(line)) = lines.next() else { break };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "halt." {
            break;
        }
        // a failed query must leave the loaded program and db usable
        if line.ends_with('?') {
            match session.solve(line) {
                Ok(solver) => {
                    let started = Instant::now();
                    match print_answers(solver, opts.max_answers) {
                        Ok(count) => println!("{count} answer(s)"),
                        Err(e) => eprintln!("error: {e}"),
                    }
                    if opts.timing {
                        println!("TIME: {:.3}s", started.elapsed().as_secs_f64());
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            }
        } else {
            match session.add_clauses(line) {
                Ok(n) => println!("added {n} clause(s)"),
                Err(e) => eprintln!("error: {e}"),
            }
        }
    }
    ExitCode::SUCCESS
}

fn bench(name: BenchName) -> ExitCode {
    let (label, program, query) = match name {
        BenchName::Queens10 => ("queens10", natlog::programs::QUEENS, "goal10 Qs?"),
        BenchName::Perm => ("perm", natlog::programs::PERM, "perm (a (b (c (d (e (f ())))))) P?"),
        BenchName::Tc => ("tc", natlog::programs::TC, "tc Who is animal ?"),
    };
    let session = match Natlog::from_text(program) {
        Ok(s) => s,
        Err(e) => return load_error(e),
    };
    let solver = match session.solve(query) {
        Ok(s) => s,
        Err(e) => return load_error(e),
    };
    let started = Instant::now();
    let mut count = 0usize;
    for answer in solver {
        match answer {
            Ok(_) => count += 1,
            Err(e) => return stream_error(e),
        }
    }
    println!("BENCH {label}: answers = {count}, time = {:.3}s", started.elapsed().as_secs_f64());
    ExitCode::SUCCESS
}
