//! The `bcn` command line. [`run`] parses arguments, dispatches to the
//! library and renders a report; the binary only prints it.
//!
//! Exit codes: 0 success or feasible, 1 infeasible or verdict false,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::combinatorics::{brute_force_structure_count, count_structures, total_networks, DEFAULT_BRUTE_FORCE_BUDGET};
use crate::decoupling::{
    dd_output_equation_check, dd_output_feedback_synthesize, dd_synthesize, rank_condition_dd,
    stabilization_synthesize, verify_dd_with_budget, BlockCriterion, DdMode, StabilizationTarget, SynthesisResult,
    DEFAULT_VERIFY_BUDGET,
};
use crate::dynamics::{apply_feedback, attractors_of_map, simulate, FeedbackKind, FeedbackLaw, InputSource};
use crate::equivalence::{
    check_equivalence, search_equivalence_feedback, Criterion, DisturbanceMode, EquivalenceQuery, Regime,
    DEFAULT_SEARCH_BUDGET,
};
use crate::error::{Error, Result};
use crate::fault::{
    dd_ifd_synthesize, ifd_synthesize, observer_run, parse_observation_log, reconstruction_feedback,
    verify_fault_detection, DetectionMode, ObserverPolicy,
};
use crate::network::{fingerprint, read_network_file, BooleanControlNetwork, BooleanNetwork};
use crate::reachability::{
    build_reachability_graph, clean_reach, clean_reach_output, invariant_set_decomposition, layer_digraph,
    layers_to_dot, reach_query, ReachKind, VertexMode,
};
use crate::stp::LogicalMatrix;

#[derive(Parser, Debug)]
#[command(name = "bcn", version, about = "Analysis and controller synthesis for Boolean control networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Emit the structured JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Largest search or enumeration to attempt.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Steps to simulate or verify.
    #[arg(long, global = true)]
    horizon: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimensions, output sets and fingerprint.
    Info { network: PathBuf },
    /// Cycles and basins of the (closed-loop) network.
    Attractors {
        network: PathBuf,
        /// Feedback law, e.g. `state:2,1,2,1`, `output:1,2` or `pin:1`.
        #[arg(long)]
        law: Option<String>,
    },
    /// One trajectory.
    Simulate {
        network: PathBuf,
        #[arg(long)]
        x0: usize,
        #[arg(long)]
        law: Option<String>,
        /// Comma-separated input sequence.
        #[arg(long, conflicts_with = "law")]
        inputs: Option<String>,
        #[arg(long)]
        disturbances: Option<String>,
        #[arg(long)]
        faults: Option<String>,
    },
    /// Behavioural equivalence between a network and a control network.
    Equiv {
        /// The control network.
        network: PathBuf,
        /// The autonomous reference network.
        #[arg(long)]
        bn: PathBuf,
        #[arg(long, value_enum, default_value = "state")]
        criterion: CriterionArg,
        #[arg(long)]
        law: Option<String>,
        #[arg(long, value_enum, default_value = "none")]
        disturbance: DisturbanceArg,
        /// Search every feedback of this kind instead of checking one.
        #[arg(long, value_enum, conflicts_with = "law")]
        search: Option<SearchKind>,
    },
    /// Reachability graphs and queries.
    Reach {
        network: PathBuf,
        #[arg(long, value_enum, default_value = "definite")]
        kind: ReachArg,
        #[arg(long, value_enum, default_value = "substates")]
        vertices: VertexArg,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Disturbance decoupling.
    Dd {
        #[command(subcommand)]
        command: DdCommand,
    },
    /// Output feedback stabilization.
    #[command(group(ArgGroup::new("goal").required(true).args(["state", "set", "behavior"])))]
    Stabilize {
        network: PathBuf,
        #[arg(long)]
        state: Option<usize>,
        /// Comma-separated states of the target cycle.
        #[arg(long)]
        set: Option<String>,
        /// Comma-separated columns of the target closed loop.
        #[arg(long)]
        behavior: Option<String>,
    },
    /// Instantaneous fault detection.
    Ifd {
        #[command(subcommand)]
        command: SynthOnly,
    },
    /// Disturbance decoupling with instantaneous fault detection.
    Ddifd {
        #[command(subcommand)]
        command: SynthOnly,
    },
    /// Exhaustive check of a controller.
    Verify {
        network: PathBuf,
        #[arg(long)]
        law: String,
        /// Defaults to `fault` when the network has faults, else `dd`.
        #[arg(long, value_enum)]
        check: Option<CheckArg>,
        #[arg(long, value_enum, default_value = "state-known")]
        mode: ModeArg,
    },
    /// Replays an input/output log through the set-membership observer.
    Observe {
        network: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// `auto`, `open`, `reconstruct` or `output:<cols>`.
        #[arg(long, default_value = "open")]
        policy: String,
    },
    /// Network and structure counts.
    Count {
        /// Count all networks on N variables.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        sc: usize,
        #[arg(long)]
        sr: Option<usize>,
        /// Also enumerate the structures.
        #[arg(long, requires = "sr")]
        brute: bool,
    },
    /// Graphviz rendering of a reachability graph or the layer digraph.
    ExportDot {
        network: PathBuf,
        #[arg(long, value_enum, default_value = "reach")]
        graph: GraphArg,
        #[arg(long, value_enum, default_value = "definite")]
        kind: ReachArg,
        #[arg(long, value_enum, default_value = "substates")]
        vertices: VertexArg,
    },
}

#[derive(Subcommand, Debug)]
enum DdCommand {
    /// Block conditions on a closed loop.
    Check {
        network: PathBuf,
        #[arg(long)]
        law: Option<String>,
        /// Every sub-block has rank one.
        #[arg(long, conflicts_with = "output_eq")]
        baseline: bool,
        /// Every block lands in one output group (default).
        #[arg(long)]
        output_eq: bool,
    },
    /// Controller sets for a decoupling mode.
    Synth {
        network: PathBuf,
        #[arg(long, value_enum, default_value = "mapping")]
        mode: DdModeArg,
        /// Output index for the reachability modes.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, value_enum, default_value = "groups")]
        criterion: CriterionBlockArg,
    },
}

#[derive(Subcommand, Debug)]
enum SynthOnly {
    Synth { network: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CriterionArg {
    State,
    Output,
    Attractor,
    Steady,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DisturbanceArg {
    None,
    Bcn,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SearchKind {
    State,
    Output,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReachArg {
    Clean,
    Definite,
    Indefinite,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VertexArg {
    Substates,
    Outputs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DdModeArg {
    Mapping,
    Invariant,
    Clean,
    Definite,
    Indefinite,
    Iteration,
    OutputFeedback,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CriterionBlockArg {
    Groups,
    Rank,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckArg {
    Dd,
    Fault,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    StateKnown,
    OutputOnly,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GraphArg {
    Reach,
    Layers,
}

/// What [`run`] produced: the exit code and the two output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Result of one command before rendering.
struct Response {
    ok: bool,
    network: Option<Value>,
    result: Value,
    text: String,
    /// Emitted verbatim in text mode (DOT).
    raw: bool,
}

impl Response {
    fn new(ok: bool, net: Option<&BooleanControlNetwork>, result: impl Serialize, text: String) -> Result<Self> {
        let result = serde_json::to_value(result).map_err(|e| Error::Schema(e.to_string()))?;
        Ok(Self { ok, network: net.map(network_summary), result, text, raw: false })
    }
}

fn network_summary(net: &BooleanControlNetwork) -> Value {
    let d = net.dims();
    json!({
        "name": net.name(),
        "n": d.n, "m": d.m, "d": d.d, "t": d.t, "p": d.p, "s": d.s,
        "hash": fingerprint(net),
    })
}

/// Runs `bcn` on `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let response = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => return Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let code = if response.ok { 0 } else { 1 };
    let body = render(&cli.common, &echo.join(" "), &response);
    match &cli.common.out {
        Some(path) => match std::fs::write(path, &body) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: body, stderr: String::new() },
    }
}

fn render(common: &Common, command: &str, r: &Response) -> String {
    let status = if r.ok { "ok" } else { "false" };
    if common.json {
        let doc = json!({
            "command": command,
            "network": r.network,
            "result": r.result,
            "status": status,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
        s.push('\n');
        return s;
    }
    if r.raw {
        return r.text.clone();
    }
    let mut out = format!("command: {command}\n");
    if let Some(n) = &r.network {
        let _ = writeln!(
            out,
            "network: {} (n={} m={} d={} t={} p={} s={}) {}",
            n["name"].as_str().unwrap_or(""),
            n["n"],
            n["m"],
            n["d"],
            n["t"],
            n["p"],
            n["s"],
            n["hash"].as_str().unwrap_or("")
        );
    }
    out.push_str(&r.text);
    let _ = writeln!(out, "status: {status}");
    out
}

fn load(path: &Path) -> Result<BooleanControlNetwork> {
    read_network_file(path)
}

fn list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Schema(format!("bad {what} list `{s}`"))))
        .collect()
}

/// `state:c1,c2,…`, `output:c1,…` or `pin:u`.
pub fn parse_law(text: &str, net: &BooleanControlNetwork) -> Result<FeedbackLaw> {
    let (kind, cols) =
        text.split_once(':').ok_or_else(|| Error::Schema(format!("law `{text}` must look like kind:cols")))?;
    let m = LogicalMatrix::new(net.input_count(), list(cols, "law")?)?;
    let law = match kind {
        "state" => FeedbackLaw::state(m),
        "output" => FeedbackLaw::output(m),
        "pin" => FeedbackLaw { kind: FeedbackKind::Pinning, m },
        other => return Err(Error::Schema(format!("unknown law kind `{other}`"))),
    };
    law.validate(net)?;
    Ok(law)
}

fn delta(m: &LogicalMatrix) -> String {
    let cols: Vec<String> = m.cols().iter().map(usize::to_string).collect();
    format!("δ_{}[{}]", m.rows(), cols.join(" "))
}

fn set_text(s: &[usize]) -> String {
    let items: Vec<String> = s.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn sets_text(sets: &[Vec<usize>]) -> String {
    sets.iter().map(|s| set_text(s)).collect::<Vec<_>>().join(" ")
}

fn dispatch(cli: &Cli) -> Result<Response> {
    let common = &cli.common;
    match &cli.command {
        Command::Info { network } => info(&load(network)?),
        Command::Attractors { network, law } => attractors(&load(network)?, law.as_deref()),
        Command::Simulate { network, x0, law, inputs, disturbances, faults } => {
            let net = load(network)?;
            let source = match (law, inputs) {
                (Some(l), _) => InputSource::Feedback(parse_law(l, &net)?),
                (None, Some(i)) => InputSource::Sequence(list(i, "input")?),
                (None, None) => InputSource::Sequence(Vec::new()),
            };
            let seq = |s: &Option<String>, what| s.as_deref().map_or(Ok(Vec::new()), |s| list(s, what));
            let tr = simulate(
                &net,
                *x0,
                &source,
                &seq(disturbances, "disturbance")?,
                &seq(faults, "fault")?,
                common.horizon.unwrap_or(10),
            )?;
            let text = format!(
                "states:  {}\noutputs: {}\ninputs:  {}\n",
                join(&tr.states),
                join(&tr.outputs),
                join(&tr.inputs)
            );
            Response::new(true, Some(&net), tr, text)
        }
        Command::Equiv { network, bn, criterion, law, disturbance, search } => {
            let bcn = load(network)?;
            let reference = load(bn)?;
            if reference.input_count() != 1 || !reference.is_full() {
                return Err(Error::DimensionMismatch("--bn must be an autonomous network with a full L".into()));
            }
            let bn = BooleanNetwork::new(reference.l().clone())?;
            let criterion = match criterion {
                CriterionArg::State => Criterion::StateTransition,
                CriterionArg::Output => Criterion::OutputSequence,
                CriterionArg::Attractor => Criterion::Attractor,
                CriterionArg::Steady => Criterion::OutputSteadyState,
            };
            let mode = match disturbance {
                DisturbanceArg::None => DisturbanceMode::None,
                DisturbanceArg::Bcn => DisturbanceMode::BcnOnly,
                DisturbanceArg::Both => DisturbanceMode::Both,
            };
            if let Some(kind) = search {
                let kind = match kind {
                    SearchKind::State => FeedbackKind::State,
                    SearchKind::Output => FeedbackKind::Output,
                };
                let laws = search_equivalence_feedback(
                    &bn,
                    &bcn,
                    criterion,
                    kind,
                    mode,
                    common.budget.unwrap_or(DEFAULT_SEARCH_BUDGET),
                )?;
                let mut text = format!("{} equivalent laws\n", laws.len());
                for l in &laws {
                    let _ = writeln!(text, "  {}", delta(&l.m));
                }
                return Response::new(!laws.is_empty(), Some(&bcn), json!({ "laws": laws }), text);
            }
            let regime = match law.as_deref().map(|l| parse_law(l, &bcn)).transpose()? {
                None => Regime::AllInputs,
                Some(l) if l.kind == FeedbackKind::Output => Regime::OutputFeedback(l.m),
                Some(l) => Regime::StateFeedback(l.expand(&bcn)?),
            };
            let report =
                check_equivalence(&bn, &bcn, &EquivalenceQuery::new(criterion, regime).with_disturbance(mode))?;
            let mut text = format!("equivalent: {}\n", report.verdict);
            if let Some(w) = report.witness {
                let _ = writeln!(text, "witness: state {} input {:?} step {}", w.state, w.input, w.step);
            }
            if !report.details.is_empty() {
                let _ = writeln!(text, "{}", report.details);
            }
            Response::new(report.verdict, Some(&bcn), report, text)
        }
        Command::Reach { network, kind, vertices, from, to } => reach(&load(network)?, *kind, *vertices, *from, *to),
        Command::Dd { command } => match command {
            DdCommand::Check { network, law, baseline, .. } => dd_check(&load(network)?, law.as_deref(), *baseline),
            DdCommand::Synth { network, mode, target, criterion } => {
                dd_synth(&load(network)?, *mode, *target, *criterion, common)
            }
        },
        Command::Stabilize { network, state, set, behavior } => {
            let net = load(network)?;
            let target = match (state, set, behavior) {
                (Some(x), _, _) => StabilizationTarget::State(*x),
                (_, Some(s), _) => StabilizationTarget::Set(list(s, "state")?),
                (_, _, Some(b)) => {
                    StabilizationTarget::Behavior(LogicalMatrix::new(net.state_count(), list(b, "column")?)?)
                }
                _ => unreachable!("clap requires one target"),
            };
            let laws = stabilization_synthesize(&net, &target, common.budget.unwrap_or(DEFAULT_SEARCH_BUDGET))?;
            let mut rows = Vec::new();
            let mut text = format!("{} output feedback laws\n", laws.len());
            for l in &laws {
                let lt = apply_feedback(&net, l)?;
                let _ = writeln!(text, "  M_y = {}  closed loop {}", delta(&l.m), delta(&lt));
                rows.push(json!({ "law": l, "closed_loop": lt }));
            }
            Response::new(!laws.is_empty(), Some(&net), json!({ "target": target, "laws": rows }), text)
        }
        Command::Ifd { command: SynthOnly::Synth { network } } => {
            let net = load(network)?;
            synthesis_response(&net, ifd_synthesize(&net)?)
        }
        Command::Ddifd { command: SynthOnly::Synth { network } } => {
            let net = load(network)?;
            synthesis_response(&net, dd_ifd_synthesize(&net)?)
        }
        Command::Verify { network, law, check, mode } => {
            let net = load(network)?;
            let law = parse_law(law, &net)?;
            let check = check.unwrap_or(if net.dims().t > 0 { CheckArg::Fault } else { CheckArg::Dd });
            match check {
                CheckArg::Dd => {
                    let v = verify_dd_with_budget(
                        &net,
                        &law,
                        common.horizon.unwrap_or(8),
                        common.budget.unwrap_or(DEFAULT_VERIFY_BUDGET),
                        0,
                    )?;
                    let mut text = format!("decoupled: {}\nk*: {:?}\n", v.verdict, v.k_star);
                    if let Some(c) = &v.counterexample {
                        let _ = writeln!(text, "counterexample at step {}: {:?}", c.step, c.runs);
                    }
                    if !v.coverage.exhaustive {
                        let _ = writeln!(text, "sampled {:.3} of the runs", v.coverage.fraction);
                    }
                    Response::new(v.verdict, Some(&net), v, text)
                }
                CheckArg::Fault => {
                    let mode = match mode {
                        ModeArg::StateKnown => DetectionMode::StateKnown,
                        ModeArg::OutputOnly => DetectionMode::OutputOnly,
                    };
                    let v = verify_fault_detection(&net, &law, mode)?;
                    let mut text = format!("detects faults: {}\n", v.verdict);
                    if let Some(w) = &v.witness {
                        let _ = writeln!(
                            text,
                            "witness: state {} input {} disturbances {:?} faults {:?} outputs {:?}",
                            w.state, w.input, w.disturbances, w.faults, w.outputs
                        );
                    }
                    Response::new(v.verdict, Some(&net), v, text)
                }
            }
        }
        Command::Observe { network, log, policy } => {
            let net = load(network)?;
            let text = std::fs::read_to_string(log).map_err(|e| Error::Schema(format!("{}: {e}", log.display())))?;
            let obs = parse_observation_log(&text)?;
            let policy = match policy.as_str() {
                "auto" => ObserverPolicy::Auto,
                "open" => ObserverPolicy::Open,
                "reconstruct" => ObserverPolicy::OutputFeedback(reconstruction_feedback(&net)?.m),
                other => match other.strip_prefix("output:") {
                    Some(cols) => {
                        ObserverPolicy::OutputFeedback(LogicalMatrix::new(net.input_count(), list(cols, "law")?)?)
                    }
                    None => return Err(Error::Schema(format!("unknown policy `{other}`"))),
                },
            };
            let trace = observer_run(&net, &policy, &obs)?;
            let mut text = String::new();
            for (k, s) in trace.states.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "step {k}: possible {}{}{}",
                    set_text(&s.possible),
                    if s.reconstructed { " reconstructed" } else { "" },
                    if s.fault_flag { " FAULT" } else { "" }
                );
            }
            Response::new(trace.fault_at.is_none(), Some(&net), trace, text)
        }
        Command::Count { n, sc, sr, brute } => {
            let mut result = serde_json::Map::new();
            let mut text = String::new();
            if let Some(n) = n {
                let total = total_networks(*n);
                let _ = writeln!(text, "networks on {n} variables: {total}");
                result.insert("total_networks".into(), json!(total.to_string()));
            }
            if let Some(sr) = sr {
                let report = count_structures(*sc, *sr);
                let _ = writeln!(
                    text,
                    "S_c={} S_r={}: N_mod={} N_mod_inv={} N_1={} N_mod_c={} N_T={}",
                    sc, sr, report.n_mod, report.n_mod_inv, report.n_1, report.n_mod_c, report.n_t
                );
                result.insert("structures".into(), serde_json::to_value(&report).expect("reports serialize"));
                if *brute {
                    let exact = brute_force_structure_count(*sr, common.budget.unwrap_or(DEFAULT_BRUTE_FORCE_BUDGET))?;
                    let _ = writeln!(text, "enumerated: {exact}");
                    result.insert("enumerated".into(), json!(exact.to_string()));
                }
            }
            if result.is_empty() {
                return Err(Error::Schema("count needs --n or --sr".into()));
            }
            Response::new(true, None, Value::Object(result), text)
        }
        Command::ExportDot { network, graph, kind, vertices } => {
            let net = load(network)?;
            let dot = match graph {
                GraphArg::Reach => {
                    let kind = match kind {
                        ReachArg::Indefinite => ReachKind::Indefinite,
                        ReachArg::Definite => ReachKind::Definite,
                        ReachArg::Clean => return Err(Error::Schema("clean reachability has no graph".into())),
                    };
                    build_reachability_graph(&net, kind, vertex_mode(*vertices)).to_dot()
                }
                GraphArg::Layers => {
                    let layers = invariant_set_decomposition(&net);
                    layers_to_dot(&layers, &layer_digraph(&net, &layers))
                }
            };
            let mut r = Response::new(true, Some(&net), json!({ "dot": dot }), dot.clone())?;
            r.raw = true;
            Ok(r)
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn vertex_mode(v: VertexArg) -> VertexMode {
    match v {
        VertexArg::Substates => VertexMode::Substates,
        VertexArg::Outputs => VertexMode::OutputSets,
    }
}

fn info(net: &BooleanControlNetwork) -> Result<Response> {
    let d = net.dims();
    let outputs = net.output_sets();
    let mut text = format!(
        "states {} inputs {} disturbances {} faults {} outputs {}\nL: {}x{}{}\n",
        net.state_count(),
        net.input_count(),
        net.disturbance_count(),
        net.fault_count(),
        net.output_count(),
        net.l().rows(),
        net.l().ncols(),
        if net.is_full() { "" } else { " (subsystem)" }
    );
    let _ = writeln!(text, "output sets: {}", sets_text(&outputs.sets));
    let result = json!({
        "dims": d,
        "order": net.order().labels(),
        "full": net.is_full(),
        "L": net.l(),
        "H": net.h(),
        "output_sets": outputs.sets,
    });
    Response::new(true, Some(net), result, text)
}

fn attractors(net: &BooleanControlNetwork, law: Option<&str>) -> Result<Response> {
    if !net.is_full() {
        return Err(Error::DimensionMismatch("attractors need the full transition matrix".into()));
    }
    let law = match law {
        Some(l) => parse_law(l, net)?,
        None if net.input_count() == 1 => FeedbackLaw::pinning(1, 1)?,
        None => return Err(Error::Schema("network has inputs; pass --law".into())),
    };
    let lt = apply_feedback(net, &law)?;
    let w = net.tail_count();
    let report = attractors_of_map(net.state_count(), |x| lt.col((x - 1) * w + 1));
    let mut text = String::new();
    for (i, a) in report.attractors.iter().enumerate() {
        let basin = report.basin.iter().filter(|&&b| b == i + 1).count();
        let _ = writeln!(text, "attractor {}: {} basin {}", i + 1, set_text(a), basin);
    }
    Response::new(true, Some(net), report, text)
}

fn reach(
    net: &BooleanControlNetwork,
    kind: ReachArg,
    vertices: VertexArg,
    from: Option<usize>,
    to: Option<usize>,
) -> Result<Response> {
    let kind = match kind {
        ReachArg::Clean => {
            let (Some(b), Some(a)) = (from, to) else {
                return Err(Error::Schema("clean reachability needs --from and --to".into()));
            };
            let inputs = match vertices {
                VertexArg::Substates => clean_reach(net, b, a)?,
                VertexArg::Outputs => clean_reach_output(net, b, a)?,
            };
            let text = format!("inputs: {}\n", set_text(&inputs.iter().copied().collect::<Vec<_>>()));
            return Response::new(!inputs.is_empty(), Some(net), json!({ "from": b, "to": a, "inputs": inputs }), text);
        }
        ReachArg::Definite => ReachKind::Definite,
        ReachArg::Indefinite => ReachKind::Indefinite,
    };
    let g = build_reachability_graph(net, kind, vertex_mode(vertices));
    let mut text = String::new();
    for e in &g.edges {
        let _ = writeln!(text, "{} -> {} via {}", g.label(e.from), g.label(e.to), set_text(&e.inputs));
    }
    match (from, to) {
        (Some(a), Some(b)) => {
            let path = reach_query(&g, a, b)?;
            match &path {
                Some(p) => {
                    let labels: Vec<String> = p.iter().map(|&v| g.label(v)).collect();
                    let _ = writeln!(text, "path: {}", labels.join(" -> "));
                }
                None => text.push_str("path: none\n"),
            }
            Response::new(path.is_some(), Some(net), json!({ "graph": g, "path": path }), text)
        }
        (None, None) => Response::new(true, Some(net), json!({ "graph": g }), text),
        _ => Err(Error::Schema("--from and --to go together".into())),
    }
}

fn dd_check(net: &BooleanControlNetwork, law: Option<&str>, baseline: bool) -> Result<Response> {
    let closed = match law {
        Some(l) => {
            let law = parse_law(l, net)?;
            net.closed_loop(apply_feedback(net, &law)?)?
        }
        None if net.input_count() == 1 || baseline => net.clone(),
        None => return Err(Error::Schema("network has inputs; pass --law".into())),
    };
    if baseline {
        let r = rank_condition_dd(&closed);
        let text = format!("rank-one sub-blocks: {}\ninputs: {}\n", r.verdict, sets_text(&r.inputs));
        return Response::new(r.verdict, Some(net), json!({ "check": "baseline", "report": r }), text);
    }
    let r = dd_output_equation_check(&closed, closed.l())?;
    let text =
        format!("single output group per block: {}\nblock outputs: {}\n", r.verdict, sets_text(&r.block_outputs));
    Response::new(r.verdict, Some(net), json!({ "check": "output_equation", "report": r }), text)
}

fn synthesis_text(r: &SynthesisResult) -> String {
    let mut text = format!(
        "feasible: {}\nsets: {}\ncontrollers: {}\n",
        r.feasible,
        sets_text(&r.candidates.sets),
        r.controller_count()
    );
    if let Some(s) = &r.sample {
        let _ = writeln!(text, "sample: M_x = {}", delta(&s.m));
    }
    if let Some(l) = &r.layers {
        for (i, layer) in l.layers.iter().enumerate() {
            let _ = writeln!(text, "S_{}: {}", i + 1, set_text(layer));
        }
        if !l.remainder.is_empty() {
            let _ = writeln!(text, "unclassified: {}", set_text(&l.remainder));
        }
    }
    if let Some(inv) = &r.invariant {
        let _ = writeln!(text, "invariant sets: {} ({} controllers)", sets_text(&inv.sets), inv.controller_count());
    }
    for d in &r.diagnostics {
        let _ = writeln!(text, "slot {}: {}", d.substate, d.reason);
    }
    if r.online_only {
        text.push_str("inputs must be chosen online\n");
    }
    text
}

fn synthesis_response(net: &BooleanControlNetwork, r: SynthesisResult) -> Result<Response> {
    let text = synthesis_text(&r);
    Response::new(r.feasible, Some(net), r, text)
}

fn dd_synth(
    net: &BooleanControlNetwork,
    mode: DdModeArg,
    target: Option<usize>,
    criterion: CriterionBlockArg,
    common: &Common,
) -> Result<Response> {
    let target = || target.ok_or_else(|| Error::Schema("this mode needs --target".into()));
    let mode = match mode {
        DdModeArg::Mapping => DdMode::Mapping,
        DdModeArg::Invariant => DdMode::Invariant,
        DdModeArg::Clean => DdMode::CleanReach(target()?),
        DdModeArg::Definite => DdMode::DefiniteReach(target()?),
        DdModeArg::Indefinite => DdMode::IndefiniteReach(target()?),
        DdModeArg::Iteration => DdMode::Iteration,
        DdModeArg::OutputFeedback => {
            let criterion = match criterion {
                CriterionBlockArg::Groups => BlockCriterion::OutputGroups,
                CriterionBlockArg::Rank => BlockCriterion::BlockRank,
            };
            let laws = dd_output_feedback_synthesize(net, criterion, common.budget.unwrap_or(DEFAULT_SEARCH_BUDGET))?;
            let mut rows = Vec::new();
            let mut text = format!("{} output feedback laws\n", laws.len());
            for l in &laws {
                let lt = apply_feedback(net, l)?;
                let _ = writeln!(text, "  M_y = {}  closed loop {}", delta(&l.m), delta(&lt));
                rows.push(json!({ "law": l, "closed_loop": lt }));
            }
            return Response::new(!laws.is_empty(), Some(net), json!({ "criterion": criterion, "laws": rows }), text);
        }
    };
    let r = dd_synthesize(net, mode)?;
    let mut text = synthesis_text(&r);
    let mut value = serde_json::to_value(&r).map_err(|e| Error::Schema(e.to_string()))?;
    if let Some(layers) = &r.layers {
        let edges = layer_digraph(net, layers);
        let shown: Vec<String> = edges.iter().map(|(a, b)| format!("S_{a}->S_{b}")).collect();
        let _ = writeln!(text, "layer edges: {}", shown.join(" "));
        value["layer_edges"] = json!(edges);
    }
    Response::new(r.feasible, Some(net), value, text)
}
