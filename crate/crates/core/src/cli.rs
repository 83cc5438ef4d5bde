//! Command-line front end. Everything runs in-process through [`run`] so
//! tests can drive it without spawning the binary.
//!
//! Exit codes: 0 equivalent / success, 1 not equivalent (or a failed
//! round trip), 2 node capacity exhausted, 3 usage or input error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bdd::{VarOrder, DEFAULT_CAPACITY};
use crate::bdd_circuit::{expand_to_circuit, roundtrip_verify, ExpandError, ExpansionMode};
use crate::circuit::Circuit;
use crate::equivalence::{check_equivalence, MiterError, Verdict};
use crate::gen::{array_multiplier, random_tree};
use crate::netlist::{parse, serialize};
use crate::sim::{check_poly_bound, simulate, PolyBoundConfig, SimError, SimOptions, SimStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFERENT: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bddcheck", version, about = "BDD-based symbolic simulation and equivalence checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check two netlists for equivalence through a miter.
    Verify {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Symbolically simulate a netlist and write the per-signal trace.
    Simulate {
        circuit: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        poly: PolyArgs,
    },
    /// Print a random fanout-free netlist.
    GenTree {
        /// Number of primary inputs.
        #[arg(long, short)]
        n: usize,
        /// Maximum number of gates on any path.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an unsigned array multiplier netlist.
    GenMultiplier {
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the output BDDs of a netlist, emit them as a MUX netlist, and
    /// check the round trip.
    ExpandBdd {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Mux)]
        mode: ModeArg,
        /// Where to write the round-trip report (JSON); standard error if absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `dfs`, `declared`, or `file:PATH` listing input names top to bottom.
    #[arg(long, default_value = "dfs")]
    pub order: String,
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    pub capacity: usize,
    /// Recorded in reports.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PolyArgs {
    #[arg(long)]
    pub poly_degree: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub poly_coeff: f64,
    #[arg(long, default_value_t = 1)]
    pub poly_gap: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Mux,
    Gates,
}

impl From<ModeArg> for ExpansionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mux => ExpansionMode::Mux,
            ModeArg::Gates => ExpansionMode::Gates,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        source: crate::netlist::ParseError,
    },
    #[error("order: {0}")]
    Order(String),
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &Path) -> Result<Circuit, CliError> {
    parse(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// Resolve `--order` against the circuit's inputs.
fn resolve_order(spec: &str, c: &Circuit) -> Result<VarOrder, CliError> {
    match spec {
        "dfs" => Ok(c.dfs_variable_order()),
        "declared" => Ok(c.declared_order()),
        _ => {
            let Some(path) = spec.strip_prefix("file:") else {
                return Err(CliError::Order(format!("expected dfs, declared or file:PATH, got `{spec}`")));
            };
            let text = read(Path::new(path))?;
            let mut levels = Vec::with_capacity(c.input_count());
            for name in text.split_whitespace() {
                let idx = c
                    .inputs()
                    .iter()
                    .position(|i| i == name)
                    .ok_or_else(|| CliError::Order(format!("`{name}` is not a primary input")))?;
                if levels.contains(&idx) {
                    return Err(CliError::Order(format!("`{name}` is listed twice")));
                }
                levels.push(idx);
            }
            if levels.len() != c.input_count() {
                return Err(CliError::Order(format!(
                    "lists {} of {} primary inputs",
                    levels.len(),
                    c.input_count()
                )));
            }
            VarOrder::from_levels(levels).map_err(|e| CliError::Order(e.to_string()))
        }
    }
}

/// Provenance block shared by every report: tool version, the resolved
/// configuration, and a hash of it.
fn provenance(command: &str, config: Value) -> Value {
    let canonical = serde_json::to_string(&config).expect("config serializes");
    let hash = Sha256::digest(canonical.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    json!({
        "tool": "bddcheck",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "config_hash": hex,
    })
}

fn common_config(common: &Common, order: &VarOrder, c: &Circuit) -> Value {
    let names: Vec<&str> = order.levels().iter().map(|&i| c.inputs()[i].as_str()).collect();
    json!({
        "order": common.order,
        "order_used": names,
        "capacity": common.capacity,
        "seed": common.seed,
    })
}

fn emit(out_path: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match out_path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Parse `args` (including the program name) and execute. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Verify { left, right, common } => cmd_verify(&left, &right, &common, stdout),
        Command::Simulate { circuit, common, poly } => cmd_simulate(&circuit, &common, &poly, stdout),
        Command::GenTree { n, depth, seed, out } => {
            let c = random_tree(n, depth, seed).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(out.as_deref(), stdout, &serialize(&c))?;
            Ok(EXIT_OK)
        }
        Command::GenMultiplier { bits, out } => {
            let c = array_multiplier(bits).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(out.as_deref(), stdout, &serialize(&c))?;
            Ok(EXIT_OK)
        }
        Command::ExpandBdd {
            circuit,
            mode,
            report,
            common,
        } => cmd_expand_bdd(&circuit, mode.into(), report.as_deref(), &common, stdout, stderr),
    }
}

fn cmd_verify(left: &Path, right: &Path, common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let c1 = load(left)?;
    let c2 = load(right)?;
    let order = resolve_order(&common.order, &c1)?;
    let opts = SimOptions::with_capacity(common.capacity);
    let outcome = check_equivalence(&c1, &c2, &order, &opts).map_err(|e: MiterError| CliError::Usage(e.to_string()))?;
    let mut config = common_config(common, &order, &c1);
    config["left"] = json!(left.display().to_string());
    config["right"] = json!(right.display().to_string());
    let cex: Option<Value> = outcome.counterexample.as_ref().map(|a| {
        let m: serde_json::Map<String, Value> = c1.inputs().iter().zip(a).map(|(n, &b)| (n.clone(), json!(u8::from(b)))).collect();
        Value::Object(m)
    });
    let code = match outcome.verdict {
        Verdict::Equivalent => EXIT_OK,
        Verdict::NotEquivalent => EXIT_DIFFERENT,
        Verdict::Aborted => EXIT_CAPACITY,
    };
    let text = match common.format.unwrap_or(Format::Text) {
        Format::Json => {
            let mut report = provenance("verify", config);
            report["verdict"] = json!(outcome.verdict);
            report["counterexample"] = cex.unwrap_or(Value::Null);
            report["failing_signal"] = json!(outcome.failing_signal);
            report["stats"] = outcome.stats.to_json();
            pretty(&report)
        }
        Format::Csv => outcome.stats.to_csv(),
        Format::Text => {
            let mut s = String::new();
            let verdict = match outcome.verdict {
                Verdict::Equivalent => "equivalent",
                Verdict::NotEquivalent => "not equivalent",
                Verdict::Aborted => "aborted",
            };
            let _ = writeln!(s, "verdict: {verdict}");
            if let Some(a) = &outcome.counterexample {
                let assignment: Vec<String> = c1.inputs().iter().zip(a).map(|(n, &b)| format!("{n}={}", u8::from(b))).collect();
                let _ = writeln!(s, "counterexample: {}", assignment.join(" "));
            }
            if let Some(sig) = &outcome.failing_signal {
                let _ = writeln!(s, "capacity {} exhausted at: {sig}", common.capacity);
            }
            let _ = writeln!(s, "nodes created: {}", outcome.stats.created_total);
            let _ = writeln!(s, "peak live nodes: {}", outcome.stats.peak_live);
            s
        }
    };
    emit(common.out.as_deref(), stdout, &text)?;
    Ok(code)
}

fn poly_config(poly: &PolyArgs) -> Option<PolyBoundConfig> {
    poly.poly_degree.map(|d| PolyBoundConfig::new(d, poly.poly_coeff, poly.poly_gap))
}

fn render_stats(format: Format, stats: &SimStats, header: Value, extra: &[(&str, Value)]) -> String {
    match format {
        Format::Csv => {
            let mut s = stats.to_csv();
            for (k, v) in extra {
                let _ = writeln!(s, "# {k}: {v}");
            }
            s
        }
        Format::Json => {
            let mut report = header;
            report["stats"] = stats.to_json();
            for (k, v) in extra {
                report[*k] = v.clone();
            }
            pretty(&report)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "inputs: {}", stats.inputs);
            let _ = writeln!(s, "completed: {}", stats.completed);
            if let Some(f) = &stats.failing_signal {
                let _ = writeln!(s, "failing signal: {f}");
            }
            let _ = writeln!(s, "signals simulated: {}", stats.signals.len());
            let _ = writeln!(s, "nodes created: {}", stats.created_total);
            let _ = writeln!(s, "peak live nodes: {}", stats.peak_live);
            let _ = writeln!(s, "ite entries: {}", stats.ite_entries_total);
            for o in &stats.outputs {
                if let Some(r) = stats.record(o) {
                    let _ = writeln!(s, "output {o}: {} nodes", r.signal_size);
                }
            }
            for (k, v) in extra {
                let _ = writeln!(s, "{k}: {v}");
            }
            s
        }
    }
}

fn cmd_simulate(path: &Path, common: &Common, poly: &PolyArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let c = load(path)?;
    let order = resolve_order(&common.order, &c)?;
    let mut config = common_config(common, &order, &c);
    config["circuit"] = json!(path.display().to_string());
    let bound_cfg = poly_config(poly);
    config["poly_bound"] = json!(bound_cfg);
    let header = provenance("simulate", config);
    let format = common.format.unwrap_or(Format::Csv);
    let opts = SimOptions::with_capacity(common.capacity);
    let (stats, code) = match simulate(&c, &order, &opts) {
        Ok(r) => (r.stats, EXIT_OK),
        Err(SimError::Capacity { stats, .. }) => (*stats, EXIT_CAPACITY),
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let mut extra = Vec::new();
    if let Some(cfg) = &bound_cfg {
        if stats.completed {
            let rep = check_poly_bound(&stats, cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            extra.push(("poly_bound", serde_json::to_value(rep).expect("json")));
        }
    }
    emit(common.out.as_deref(), stdout, &render_stats(format, &stats, header, &extra))?;
    Ok(code)
}

fn cmd_expand_bdd(
    path: &Path,
    mode: ExpansionMode,
    report_path: Option<&Path>,
    common: &Common,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let c = load(path)?;
    let order = resolve_order(&common.order, &c)?;
    let opts = SimOptions::with_capacity(common.capacity);
    let sim = match simulate(&c, &order, &opts) {
        Ok(r) => r,
        Err(SimError::Capacity { signal, limit, .. }) => {
            let _ = writeln!(stderr, "capacity {limit} exhausted at `{signal}`");
            return Ok(EXIT_CAPACITY);
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let roots = sim.output_bdds();
    let names = c.inputs().to_vec();
    let to_cli = |e: ExpandError| match e {
        ExpandError::Sim(SimError::Capacity { .. }) => None,
        other => Some(CliError::Usage(other.to_string())),
    };
    let (generated, _) = match expand_to_circuit(sim.manager(), &roots, &names, mode) {
        Ok(x) => x,
        Err(e) => return to_cli(e).map_or(Ok(EXIT_CAPACITY), Err),
    };
    let report = match roundtrip_verify(sim.manager(), &roots, &names, mode, &opts) {
        Ok(r) => r,
        Err(e) => return to_cli(e).map_or(Ok(EXIT_CAPACITY), Err),
    };
    emit(common.out.as_deref(), stdout, &serialize(&generated))?;

    let mut config = common_config(common, &order, &c);
    config["circuit"] = json!(path.display().to_string());
    config["mode"] = json!(mode);
    let mut doc = provenance("expand-bdd", config);
    doc["roundtrip"] = serde_json::to_value(&report).expect("json");
    doc["passed"] = json!(report.passed());
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json | Format::Csv => pretty(&doc),
        Format::Text => format!(
            "round trip: {}\nbdd size: {}\ngates: {}\nmax internal size: {}\nnodes created: {} (envelope {})\nviolations: {}\n",
            if report.passed() { "pass" } else { "FAIL" },
            report.bdd_size,
            report.gate_count,
            report.max_internal_size,
            report.created_total,
            report.creation_envelope,
            report.violations.len()
        ),
    };
    match report_path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => {
            let _ = stderr.write_all(text.as_bytes());
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_DIFFERENT })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["bddcheck"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["verify", "/nonexistent/a.net", "/nonexistent/b.net"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--version"]).0, EXIT_OK);
    }

    #[test]
    fn order_resolution() {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path();
        let c = parse(".inputs a b c\n.outputs f\n.gate and f c a b\n.end\n").unwrap();
        assert_eq!(resolve_order("dfs", &c).unwrap().levels(), &[2, 0, 1]);
        assert_eq!(resolve_order("declared", &c).unwrap().levels(), &[0, 1, 2]);
        let good = write(d, "good.ord", "b c\na\n");
        assert_eq!(resolve_order(&format!("file:{good}"), &c).unwrap().levels(), &[1, 2, 0]);
        for bad in ["b c", "a a b", "a b z"] {
            let p = write(d, "bad.ord", bad);
            assert!(matches!(resolve_order(&format!("file:{p}"), &c), Err(CliError::Order(_))));
        }
        assert!(resolve_order("bfs", &c).is_err());
    }

    #[test]
    fn provenance_hash_is_stable() {
        let a = provenance("x", json!({"k": 1}));
        let b = provenance("x", json!({"k": 1}));
        let c = provenance("x", json!({"k": 2}));
        assert_eq!(a["config_hash"], b["config_hash"]);
        assert_ne!(a["config_hash"], c["config_hash"]);
        assert_eq!(a["config_hash"].as_str().unwrap().len(), 64);
    }
}
