//! Command-line driver.
//!
//! Exit codes: 0 when every selected property holds, 1 when one is violated,
//! 2 for usage, file and parse errors, 3 for model errors and the state cap.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value as Json};

use crate::examples::{self, BUILTINS};
use crate::explorer::{
    self, CheckError, CheckOptions, CheckReport, Counterexample, Trace, Verdict, DEFAULT_MAX_STATES,
};
use crate::kernel::{self, Model, State, StepError, Value};
use crate::liveness::Lasso;
use crate::parser::{self, STUTTER};

#[derive(Debug, Parser)]
#[command(
    name = "mcc",
    version,
    about = "Explicit-state model checker for .mc models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check invariants and liveness properties
    Check(CheckArgs),
    /// Step through a model interactively, from a script, or at random
    Simulate(SimulateArgs),
    /// List or print the built-in models
    #[command(subcommand)]
    Examples(ExamplesCommand),
    /// Print the reachable state graph in Graphviz DOT format
    Dot(DotArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Model file
    file: Option<PathBuf>,
    /// Built-in model name (see `mcc examples list`)
    #[arg(long)]
    example: Option<String>,
}

#[derive(Debug, Args)]
struct Limit {
    /// Maximum number of reachable states to explore
    #[arg(
        long,
        env = "MCC_MAX_STATES",
        value_parser = clap::value_parser!(u64).range(1..),
    )]
    max_states: Option<u64>,
}

impl Limit {
    fn get(&self) -> usize {
        self.max_states.map_or(DEFAULT_MAX_STATES, |n| {
            usize::try_from(n).unwrap_or(usize::MAX)
        })
    }
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    input: Input,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
    /// Also write the state graph to this DOT file
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Skip leads-to properties
    #[arg(long)]
    no_liveness: bool,
    /// Report reachable states where no action is enabled
    #[arg(long)]
    deadlock: bool,
    #[command(flatten)]
    limit: Limit,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: Input,
    /// Read choices from this file instead of standard input
    #[arg(long, value_name = "PATH", conflicts_with = "seed")]
    script: Option<PathBuf>,
    /// Initial state: its number in the list of initial states (from 1), or
    /// `var=value,...`
    #[arg(long, value_name = "STATE")]
    init: Option<String>,
    /// Take random steps with this seed instead of reading choices
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random steps
    #[arg(long, default_value_t = 20, requires = "seed")]
    steps: usize,
}

#[derive(Debug, Subcommand)]
enum ExamplesCommand {
    /// List built-in models
    List,
    /// Print the source of a built-in model
    Show { name: String },
}

#[derive(Debug, Args)]
struct DotArgs {
    #[command(flatten)]
    input: Input,
    /// Write to this file instead of standard output
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(flatten)]
    limit: Limit,
}

/// A terminating condition: exit code plus a message for stderr.
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Exit {
            code: 2,
            message: message.into(),
        }
    }

    fn model(message: impl Into<String>) -> Self {
        Exit {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit::usage(format!("i/o error: {e}"))
    }
}

type Outcome = Result<i32, Exit>;

/// Runs the command line `args` (without the program name).
pub fn run(
    args: &[String],
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli =
        match Cli::try_parse_from(std::iter::once("mcc".to_string()).chain(args.iter().cloned())) {
            Ok(cli) => cli,
            Err(e) => {
                use clap::error::ErrorKind;
                let text = e.render().to_string();
                return match e.kind() {
                    ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                        let _ = stdout.write_all(text.as_bytes());
                        0
                    }
                    _ => {
                        let _ = stderr.write_all(text.as_bytes());
                        2
                    }
                };
            }
        };
    let outcome = match cli.command {
        Command::Check(a) => check(&a, stdout),
        Command::Simulate(a) => simulate(&a, stdin, stdout),
        Command::Examples(ExamplesCommand::List) => list(stdout),
        Command::Examples(ExamplesCommand::Show { name }) => show(&name, stdout),
        Command::Dot(a) => dot(&a, stdout),
    };
    let _ = stdout.flush();
    match outcome {
        Ok(code) => code,
        Err(exit) => {
            let _ = writeln!(stderr, "error: {}", exit.message);
            exit.code
        }
    }
}

/// Display name and parsed model.
fn load(input: &Input) -> Result<(String, Model), Exit> {
    let (name, source) = match (&input.example, &input.file) {
        (Some(name), _) => {
            let entry = examples::builtin(name).map_err(|e| Exit::usage(e.to_string()))?;
            (entry.name.to_string(), entry.source.to_string())
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Exit::usage(format!("cannot read `{}`: {e}", path.display())))?;
            (path.display().to_string(), text)
        }
        (None, None) => return Err(Exit::usage("no model given")),
    };
    match parser::parse(&source) {
        Ok(m) => Ok((name, m)),
        Err(errors) => {
            let mut msg = format!("{} error(s) in {name}", errors.len());
            for e in &errors {
                let _ = write!(msg, "\n{name}:{e}");
            }
            Err(Exit::usage(msg))
        }
    }
}

fn model_error(model: &Model, e: CheckError) -> Exit {
    let mut msg = e.to_string();
    if let CheckError::Step { source, trace } = &e {
        msg.push('\n');
        msg.push_str(&render_trace(model, trace, 0));
        if let StepError::RangeViolation { action, .. } = &**source {
            let _ = write!(msg, "--{action}--> (out of range)");
        }
    }
    Exit::model(msg)
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Outcome {
    let (name, model) = load(&a.input)?;
    let g = explorer::reachable_with_limit(&model, a.limit.get())
        .map_err(|e| model_error(&model, e))?;
    let opts = CheckOptions {
        liveness: !a.no_liveness,
        deadlock: a.deadlock,
        max_states: a.limit.get(),
    };
    let report = explorer::check_graph(&g, &opts);

    if let Some(path) = &a.dot {
        let highlight = report.results.iter().find_map(|r| match &r.verdict {
            Verdict::Violated(Counterexample::Trace(t)) => Some(t),
            Verdict::Violated(Counterexample::Lasso(l)) => Some(&l.stem),
            _ => None,
        });
        fs::write(path, explorer::export_dot(&g, highlight))
            .map_err(|e| Exit::usage(format!("cannot write `{}`: {e}", path.display())))?;
    }

    if a.json {
        let doc = report_json(&name, &model, &report);
        let text = serde_json::to_string_pretty(&doc).expect("json values serialize");
        writeln!(out, "{text}")?;
    } else {
        out.write_all(render_report(&name, &model, &report).as_bytes())?;
    }

    let violated = report
        .results
        .iter()
        .any(|r| matches!(r.verdict, Verdict::Violated(_)));
    let errored = report
        .results
        .iter()
        .any(|r| matches!(r.verdict, Verdict::Error(_)));
    Ok(if errored {
        3
    } else if violated {
        1
    } else {
        0
    })
}

/// Human-readable report.
pub fn render_report(name: &str, model: &Model, report: &CheckReport) -> String {
    let mut out = String::new();
    let s = report.stats;
    let _ = writeln!(out, "model {name}");
    let _ = writeln!(
        out,
        "{} states, {} edges, diameter {}",
        s.states, s.edges, s.diameter
    );
    for r in &report.results {
        let _ = write!(
            out,
            "\n{} {}: {}",
            r.kind.as_str(),
            r.property,
            r.verdict.kind()
        );
        match &r.verdict {
            Verdict::Holds => out.push('\n'),
            Verdict::Error(msg) => {
                let _ = writeln!(out, ": {msg}");
            }
            Verdict::Violated(Counterexample::Trace(t)) => {
                out.push('\n');
                out.push_str(&render_trace(model, t, 0));
            }
            Verdict::Violated(Counterexample::Lasso(l)) => {
                out.push('\n');
                out.push_str(&render_lasso(model, l));
            }
        }
    }
    let violated = report
        .results
        .iter()
        .filter(|r| matches!(r.verdict, Verdict::Violated(_)))
        .count();
    let _ = writeln!(
        out,
        "\n{} propert{} checked, {violated} violated",
        report.results.len(),
        if report.results.len() == 1 {
            "y"
        } else {
            "ies"
        }
    );
    out
}

fn state_line(model: &Model, k: usize, s: &State) -> String {
    format!("#{k}  {}\n", model.display_state(s))
}

/// One line per state, numbered from `first`, with `--Action-->` lines
/// between them.
pub fn render_trace(model: &Model, t: &Trace, first: usize) -> String {
    let mut out = String::new();
    for (k, s) in t.states.iter().enumerate() {
        if k > 0 {
            let _ = writeln!(out, "--{}-->", t.actions[k - 1]);
        }
        out.push_str(&state_line(model, first + k, s));
    }
    out
}

/// The stem as a trace, then a `loop:` section that walks the cycle and
/// returns to its entry state.
pub fn render_lasso(model: &Model, l: &Lasso) -> String {
    let mut out = render_trace(model, &l.stem, 0);
    let entry = l.stem.len().saturating_sub(1);
    out.push_str("loop:\n");
    let n = l.cycle.states.len();
    for (i, s) in l.cycle.states.iter().enumerate() {
        let k = if i == 0 { entry } else { entry + i };
        out.push_str(&state_line(model, k, s));
        let _ = writeln!(out, "--{}-->", l.cycle.actions[i]);
        if i + 1 == n {
            out.push_str(&state_line(model, entry, &l.cycle.states[0]));
        }
    }
    out
}

fn value_json(model: &Model, v: Value) -> Json {
    match v {
        Value::Bool(b) => Json::Bool(b),
        Value::Int(i) => Json::from(i),
        Value::Enum { .. } => Json::String(model.display_value(v).to_string()),
    }
}

fn state_json(model: &Model, s: &State) -> Json {
    let map: Map<String, Json> = model
        .vars
        .iter()
        .zip(s.values())
        .map(|(d, v)| (d.name.clone(), value_json(model, *v)))
        .collect();
    Json::Object(map)
}

fn steps_json(model: &Model, states: &[State], actions: &[String]) -> Json {
    json!({
        "states": states.iter().map(|s| state_json(model, s)).collect::<Vec<_>>(),
        "actions": actions,
    })
}

/// JSON report: `{model, stats: {states, edges, diameter}, results: [...]}`.
/// Each result has `property`, `kind` and `verdict`, plus `trace`, `lasso`
/// or `message` as applicable.
pub fn report_json(name: &str, model: &Model, report: &CheckReport) -> Json {
    let results: Vec<Json> = report
        .results
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            obj.insert("property".into(), json!(r.property));
            obj.insert("kind".into(), json!(r.kind.as_str()));
            obj.insert("verdict".into(), json!(r.verdict.kind().to_string()));
            match &r.verdict {
                Verdict::Holds => {}
                Verdict::Error(msg) => {
                    obj.insert("message".into(), json!(msg));
                }
                Verdict::Violated(Counterexample::Trace(t)) => {
                    obj.insert("trace".into(), steps_json(model, &t.states, &t.actions));
                }
                Verdict::Violated(Counterexample::Lasso(l)) => {
                    obj.insert(
                        "lasso".into(),
                        json!({
                            "stem": steps_json(model, &l.stem.states, &l.stem.actions),
                            "cycle": steps_json(model, &l.cycle.states, &l.cycle.actions),
                        }),
                    );
                }
            }
            Json::Object(obj)
        })
        .collect();
    json!({
        "model": name,
        "stats": {
            "states": report.stats.states,
            "edges": report.stats.edges,
            "diameter": report.stats.diameter,
        },
        "results": results,
    })
}

fn list(out: &mut dyn Write) -> Outcome {
    let width = BUILTINS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    for e in BUILTINS {
        writeln!(out, "{:width$}  {}", e.name, e.blurb)?;
    }
    Ok(0)
}

fn show(name: &str, out: &mut dyn Write) -> Outcome {
    let entry = examples::builtin(name).map_err(|e| Exit::usage(e.to_string()))?;
    out.write_all(entry.source.as_bytes())?;
    Ok(0)
}

fn dot(a: &DotArgs, out: &mut dyn Write) -> Outcome {
    let (_, model) = load(&a.input)?;
    let g = explorer::reachable_with_limit(&model, a.limit.get())
        .map_err(|e| model_error(&model, e))?;
    let text = explorer::export_dot(&g, None);
    match &a.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Exit::usage(format!("cannot write `{}`: {e}", path.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

/// Choices separated by commas or newlines.
struct Choices<'a> {
    input: &'a mut dyn BufRead,
    pending: std::collections::VecDeque<String>,
    echo: bool,
}

impl Choices<'_> {
    fn next(&mut self) -> io::Result<Option<String>> {
        loop {
            if let Some(t) = self.pending.pop_front() {
                return Ok(Some(t));
            }
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            self.pending.extend(
                line.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(String::from),
            );
        }
    }

    /// Prompts and reads one choice; `None` at end of input.
    fn ask(&mut self, out: &mut dyn Write) -> io::Result<Option<String>> {
        write!(out, "> ")?;
        out.flush()?;
        let choice = self.next()?;
        if self.echo {
            match &choice {
                Some(c) => writeln!(out, "{c}")?,
                None => writeln!(out)?,
            }
        }
        Ok(choice)
    }
}

fn is_quit(token: &str) -> bool {
    matches!(token, "quit" | "q" | "exit")
}

fn simulate(a: &SimulateArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Outcome {
    let (_, model) = load(&a.input)?;
    let inits = kernel::initial_states(&model).map_err(|e| Exit::model(e.to_string()))?;

    let mut file_reader;
    let mut choices = match &a.script {
        Some(path) => {
            let f = fs::File::open(path)
                .map_err(|e| Exit::usage(format!("cannot read `{}`: {e}", path.display())))?;
            file_reader = BufReader::new(f);
            Choices {
                input: &mut file_reader,
                pending: Default::default(),
                echo: true,
            }
        }
        None => Choices {
            input: stdin,
            pending: Default::default(),
            echo: false,
        },
    };

    let start = match &a.init {
        Some(spec) => select_init(&model, &inits, spec).map_err(Exit::usage)?,
        None if inits.len() == 1 || a.seed.is_some() => inits[0].clone(),
        None => {
            writeln!(out, "initial states:")?;
            for (i, s) in inits.iter().enumerate() {
                writeln!(out, "  {}. {}", i + 1, model.display_state(s))?;
            }
            loop {
                let Some(tok) = choices.ask(out)? else {
                    return Ok(0);
                };
                if is_quit(&tok) {
                    return Ok(0);
                }
                match tok.parse::<usize>() {
                    Ok(i) if (1..=inits.len()).contains(&i) => break inits[i - 1].clone(),
                    _ => writeln!(out, "invalid choice `{tok}`")?,
                }
            }
        }
    };

    match a.seed {
        Some(seed) => random_walk(&model, start, seed, a.steps, out),
        None => interactive(&model, start, &mut choices, out),
    }
}

fn select_init(model: &Model, inits: &[State], spec: &str) -> Result<State, String> {
    if let Ok(i) = spec.trim().parse::<usize>() {
        return i
            .checked_sub(1)
            .and_then(|i| inits.get(i))
            .cloned()
            .ok_or_else(|| format!("there are {} initial states; got {i}", inits.len()));
    }
    let mut wanted = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected var=value, got `{part}`"))?;
        let id = model
            .var_id(var.trim())
            .ok_or_else(|| format!("unknown variable `{}`", var.trim()))?;
        wanted.push((id, value.trim().to_string()));
    }
    inits
        .iter()
        .find(|s| {
            wanted
                .iter()
                .all(|(id, v)| model.display_value(s.get(*id)).to_string() == *v)
        })
        .cloned()
        .ok_or_else(|| format!("no initial state matches `{spec}`"))
}

/// Enabled actions at `s` in declaration order, with their successors.
fn options(model: &Model, s: &State) -> Result<Vec<(usize, Vec<State>)>, Exit> {
    let mut opts = Vec::new();
    for (i, a) in model.actions.iter().enumerate() {
        let on =
            kernel::enabled(model, a, s).map_err(|e| Exit::model(format!("{}: {e}", a.name)))?;
        if on {
            let succ = kernel::apply(model, a, s).map_err(|e| Exit::model(e.to_string()))?;
            opts.push((i, succ));
        }
    }
    Ok(opts)
}

fn interactive(
    model: &Model,
    start: State,
    choices: &mut Choices<'_>,
    out: &mut dyn Write,
) -> Outcome {
    let mut cur = start;
    let mut k = 0;
    out.write_all(state_line(model, k, &cur).as_bytes())?;
    loop {
        let opts = options(model, &cur)?;
        writeln!(out, "enabled:")?;
        for (n, (i, _)) in opts.iter().enumerate() {
            writeln!(out, "  {}. {}", n + 1, model.actions[*i].name)?;
        }
        writeln!(out, "  {}. {STUTTER}", opts.len() + 1)?;

        let Some(tok) = choices.ask(out)? else {
            return Ok(0);
        };
        if is_quit(&tok) {
            return Ok(0);
        }
        let picked = match tok.parse::<usize>() {
            Ok(n) if (1..=opts.len() + 1).contains(&n) => Some(n - 1),
            Ok(_) => None,
            Err(_) if tok == STUTTER => Some(opts.len()),
            Err(_) => opts.iter().position(|(i, _)| model.actions[*i].name == tok),
        };
        let Some(p) = picked else {
            writeln!(out, "invalid choice `{tok}`")?;
            continue;
        };

        let (label, next) = if p == opts.len() {
            (STUTTER.to_string(), cur.clone())
        } else {
            let (i, succ) = &opts[p];
            let name = model.actions[*i].name.clone();
            let next = match succ.len() {
                0 => {
                    writeln!(out, "{name} has no successor here")?;
                    continue;
                }
                1 => succ[0].clone(),
                _ => {
                    writeln!(out, "successors:")?;
                    for (n, s) in succ.iter().enumerate() {
                        writeln!(out, "  {}. {}", n + 1, model.display_state(s))?;
                    }
                    loop {
                        let Some(t) = choices.ask(out)? else {
                            return Ok(0);
                        };
                        if is_quit(&t) {
                            return Ok(0);
                        }
                        match t.parse::<usize>() {
                            Ok(n) if (1..=succ.len()).contains(&n) => break succ[n - 1].clone(),
                            _ => writeln!(out, "invalid choice `{t}`")?,
                        }
                    }
                }
            };
            (name, next)
        };
        k += 1;
        writeln!(out, "--{label}-->")?;
        out.write_all(state_line(model, k, &next).as_bytes())?;
        cur = next;
    }
}

fn random_walk(
    model: &Model,
    start: State,
    seed: u64,
    steps: usize,
    out: &mut dyn Write,
) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = start;
    out.write_all(state_line(model, 0, &cur).as_bytes())?;
    for k in 1..=steps {
        let moves: Vec<(usize, State)> = options(model, &cur)?
            .into_iter()
            .flat_map(|(i, succ)| succ.into_iter().map(move |s| (i, s)))
            .collect();
        let Some((i, next)) = moves.choose(&mut rng).cloned() else {
            writeln!(out, "deadlock: no action is enabled")?;
            break;
        };
        writeln!(out, "--{}-->", model.actions[i].name)?;
        out.write_all(state_line(model, k, &next).as_bytes())?;
        cur = next;
    }
    Ok(0)
}
