//! Command dispatch for the `paflow` binary. Every subcommand is a thin
//! adapter: it parses JSON inputs, calls one library operation and prints a
//! [`Report`] whose payload is that operation's output serialized.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use paflow::{
    build_flow_graph, enumerate_spines, is_transitive, normalize_matrix, orientation_classes, periodic_words,
    spec_census, spec_equivalent, validate_itinerary, validate_spec, CensusOptions, EquivalenceMode, Error, Finding,
    GluingMatrix, ItineraryWord, ModelFlowSpec,
};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "paflow", version, about = "Model totally periodic pseudo-Anosov flows on graph manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Accepted for reproducible scripting; every subcommand is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every condition on a spec and itemize the findings.
    Validate { spec: PathBuf },
    /// Build the quotient graph and its augmentation.
    BuildGraph { spec: PathBuf },
    /// Decide strong connectivity of the quotient graph.
    Transitive { spec: PathBuf },
    /// Enumerate the orientation classes.
    Orient { spec: PathBuf },
    /// Decide equivalence of two specs and print the witness.
    Equiv(EquivArgs),
    /// Check an itinerary word, or list periodic words up to `--max-len`.
    Itinerary(ItineraryArgs),
    /// Enumerate spines and the specs glued from them.
    Census {
        #[arg(long, default_value_t = 4)]
        max_edges: usize,
    },
    /// Normal form of a gluing matrix under twists and basis flips.
    NormalizeMatrix { matrix: PathBuf },
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::IsotopyWithTwists)]
    pub mode: ModeArg,
    /// Also try orientation-reversing fat-graph isomorphisms.
    #[arg(long)]
    pub allow_reflection: bool,
}

#[derive(Args, Debug)]
pub struct ItineraryArgs {
    pub spec: PathBuf,
    /// Itinerary word to check; omit together with `--max-len` to list periodic words.
    pub word: Option<PathBuf>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Isotopy,
    IsotopyWithTwists,
}

impl From<ModeArg> for EquivalenceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => EquivalenceMode::Exact,
            ModeArg::Isotopy => EquivalenceMode::Isotopy,
            ModeArg::IsotopyWithTwists => EquivalenceMode::IsotopyWithTwists,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_TRUE,
            Status::Fail => EXIT_FALSE,
            Status::Error => EXIT_ERROR,
        }
    }
}

/// Result of one command. `text` is the human-readable rendering.
#[derive(Debug, Serialize)]
pub struct Report {
    pub status: Status,
    pub findings: Vec<Finding>,
    pub payload: Value,
    #[serde(skip)]
    text: String,
}

impl Report {
    fn new(status: Status, payload: impl Serialize, text: String) -> Report {
        let payload = serde_json::to_value(payload).expect("library outputs serialize");
        Report { status, findings: Vec::new(), payload, text }
    }

    fn verdict(holds: bool, payload: impl Serialize, text: String) -> Report {
        Report::new(if holds { Status::Pass } else { Status::Fail }, payload, text)
    }
}

/// An error already rendered for standard error.
#[derive(Debug)]
pub struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

/// Runs one command line, writing the report to `out` and errors to `err`.
/// Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_TRUE };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let rendered = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
                Format::Text => report.text.clone(),
            };
            let _ = out.write_all(rendered.as_bytes());
            report.status.exit_code()
        }
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

/// Reads and deserializes a JSON file, locating failures by line and JSON pointer.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let locate = |pointer: String, e: &serde_json::Error| {
        let pointer = if pointer.is_empty() { "/".to_string() } else { pointer };
        let (line, column) = (e.line(), e.column());
        let message = e.to_string();
        let message = message.trim_end_matches(&format!(" at line {line} column {column}"));
        Failure(format!("{}:{line}:{column}: at {pointer}: {message}", path.display()))
    };
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| locate(json_pointer(e.path()), e.inner()))?;
    de.end().map_err(|e| locate(String::new(), &e))?;
    Ok(value)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        let token = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
            Segment::Enum { variant } => variant.clone(),
            Segment::Unknown => "?".to_string(),
        };
        out.push('/');
        out.push_str(&token);
    }
    out
}

/// Spec that passed validation; otherwise the itemized failure.
fn read_valid_spec(path: &Path) -> Result<Result<ModelFlowSpec, Report>, Failure> {
    let spec: ModelFlowSpec = read_json(path)?;
    let report = validate_spec(&spec);
    if report.passed() {
        return Ok(Ok(spec));
    }
    let mut text = format!("{}: invalid spec\n", path.display());
    for f in report.failures() {
        let _ = writeln!(text, "fail {} {}: {}", f.check, f.subject, f.detail);
    }
    let mut r = Report::new(Status::Error, Value::Null, text);
    r.findings = report.failures().cloned().collect();
    Ok(Err(r))
}

macro_rules! valid_spec {
    ($path:expr) => {
        match read_valid_spec($path)? {
            Ok(s) => s,
            Err(report) => return Ok(report),
        }
    };
}

pub fn execute(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Validate { spec } => {
            let s: ModelFlowSpec = read_json(spec)?;
            let report = validate_spec(&s);
            let mut text = String::new();
            for f in &report.findings {
                let verdict = if f.passed { "pass" } else { "fail" };
                let _ = write!(text, "{verdict} {}", f.check);
                if !f.subject.is_empty() {
                    let _ = write!(text, " {}", f.subject);
                }
                let _ = if f.detail.is_empty() { writeln!(text) } else { writeln!(text, ": {}", f.detail) };
            }
            let mut r = Report::verdict(report.passed(), Value::Null, text);
            r.findings = report.findings;
            Ok(r)
        }
        Command::BuildGraph { spec } => {
            let s = valid_spec!(spec);
            let g = build_flow_graph(&s, &s.orientation()?)?;
            Ok(Report::new(Status::Pass, g.export(), g.edge_list_text()))
        }
        Command::Transitive { spec } => {
            let s = valid_spec!(spec);
            let g = build_flow_graph(&s, &s.orientation()?)?;
            let t = is_transitive(&g);
            Ok(Report::verdict(t, json!({ "transitive": t }), format!("transitive: {t}\n")))
        }
        Command::Orient { spec } => {
            let s = valid_spec!(spec);
            let classes = orientation_classes(&s)?;
            let mut text = format!("{} orientation classes\n", classes.count);
            for o in &classes.representatives {
                let parts: Vec<String> = o
                    .iter()
                    .map(|(id, a)| format!("{id}:{}", a.0.iter().map(|s| s.to_string()).collect::<String>()))
                    .collect();
                let _ = writeln!(text, "{}", parts.join(" "));
            }
            Ok(Report::new(Status::Pass, &classes, text))
        }
        Command::Equiv(args) => {
            let s1 = valid_spec!(&args.first);
            let s2 = valid_spec!(&args.second);
            let mode = EquivalenceMode::from(args.mode);
            let w = spec_equivalent(&s1, &s2, mode, args.allow_reflection)?;
            let text = match &w {
                Some(w) => format!(
                    "equivalent ({mode})\n{}\n",
                    serde_json::to_string(w).expect("witnesses serialize")
                ),
                None => format!("not equivalent ({mode})\n"),
            };
            let payload = json!({ "equivalent": w.is_some(), "mode": mode, "witness": w });
            Ok(Report::verdict(w.is_some(), payload, text))
        }
        Command::Itinerary(args) => {
            let s = valid_spec!(&args.spec);
            let g = build_flow_graph(&s, &s.orientation()?)?;
            match (&args.word, args.max_len) {
                (Some(path), None) => {
                    let w: ItineraryWord = read_json(path)?;
                    let valid = validate_itinerary(&g, &w)?;
                    Ok(Report::verdict(valid, json!({ "valid": valid }), format!("valid: {valid}\n")))
                }
                (None, Some(n)) => {
                    let words = periodic_words(&g, n)?;
                    let mut text = String::new();
                    for w in &words.words {
                        let tori: Vec<String> = w.tori(&g).iter().map(|t| t.to_string()).collect();
                        let _ = writeln!(text, "{}", tori.join(" "));
                    }
                    Ok(Report::new(Status::Pass, &words, text))
                }
                _ => Err(Failure("itinerary takes either a word file or --max-len".into())),
            }
        }
        Command::Census { max_edges } => {
            let spines = enumerate_spines(*max_edges)?;
            let specs = spec_census(CensusOptions { max_edges: *max_edges, max_pieces: 2 })?;
            let text = format!("{} spines, {} specs\n", spines.len(), specs.len());
            Ok(Report::new(Status::Pass, json!({ "spines": spines, "specs": specs }), text))
        }
        Command::NormalizeMatrix { matrix } => {
            let m: GluingMatrix = read_json(matrix)?;
            let n = normalize_matrix(&m)?;
            Ok(Report::new(Status::Pass, n, format!("{n} (det {})\n", n.det)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_escapes_keys() {
        #[derive(serde::Deserialize, Debug)]
        #[allow(dead_code)]
        struct Row {
            x: std::collections::BTreeMap<String, Vec<u8>>,
        }
        let text = r#"{"x": {"a/b~c": [1, 300]}}"#;
        let err = serde_path_to_error::deserialize::<_, Row>(&mut serde_json::Deserializer::from_str(text)).unwrap_err();
        assert_eq!(json_pointer(err.path()), "/x/a~1b~0c/1");
    }

    #[test]
    fn modes_map_one_to_one() {
        let modes: Vec<EquivalenceMode> =
            [ModeArg::Exact, ModeArg::Isotopy, ModeArg::IsotopyWithTwists].into_iter().map(Into::into).collect();
        assert_eq!(modes, EquivalenceMode::ALL.to_vec());
    }
}
