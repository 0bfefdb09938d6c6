//! Disturbance decoupling: block conditions, controller synthesis for the
//! mapping / invariant / reachability modes and for iteration, output
//! feedback variants, stabilization, and brute-force verification.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::candidates::{ControlCandidateSets, Slot};
use crate::dynamics::{apply_feedback, attractors_of_map, FeedbackLaw};
use crate::error::{Error, Result};
use crate::graph;
use crate::network::BooleanControlNetwork;
use crate::reachability::{
    build_reachability_graph, decomposition_controllers, invariant_controllers, invariant_set_decomposition,
    DecompositionLayers, ReachKind, VertexMode,
};
use crate::stp::LogicalMatrix;

/// Per substate, the inputs whose sub-block has rank one (all columns equal).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub verdict: bool,
    pub inputs: Vec<Vec<usize>>,
}

/// Baseline condition: some input makes every sub-block rank one.
pub fn rank_condition_dd(net: &BooleanControlNetwork) -> RankReport {
    let inputs: Vec<Vec<usize>> = (1..=net.substate_count())
        .map(|k| {
            (1..=net.input_count())
                .filter(|&i| {
                    let mut rows =
                        net.states_of_substate(k).flat_map(|x| (1..=net.tail_count()).map(move |j| net.next(i, x, j)));
                    let first = rows.next().expect("blocks are nonempty");
                    rows.all(|r| r == first)
                })
                .collect()
        })
        .collect();
    RankReport { verdict: inputs.iter().all(|s| !s.is_empty()), inputs }
}

/// Whether every block of `width` consecutive columns is constant.
pub fn blocks_have_rank_one(m: &LogicalMatrix, width: usize) -> bool {
    width > 0 && m.ncols().is_multiple_of(width) && m.cols().chunks(width).all(|b| b.iter().all(|&c| c == b[0]))
}

/// Output groups hit by each of the `2^s` blocks of a closed loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputEquationReport {
    pub verdict: bool,
    pub block_outputs: Vec<Vec<usize>>,
}

/// Each of the `2^s` blocks of `ltilde` (width `2^{n-s+d+t}`) must land in
/// a single output group.
pub fn dd_output_equation_check(net: &BooleanControlNetwork, ltilde: &LogicalMatrix) -> Result<OutputEquationReport> {
    let want = net.state_count() * net.tail_count();
    if ltilde.ncols() != want || ltilde.rows() != net.l().rows() {
        return Err(Error::DimensionMismatch(format!(
            "closed loop must be {}×{want}, got {}×{}",
            net.l().rows(),
            ltilde.rows(),
            ltilde.ncols()
        )));
    }
    let block_outputs: Vec<Vec<usize>> = ltilde
        .blocks(net.substate_count())
        .into_iter()
        .map(|b| b.iter().map(|&c| net.output_of_row(c)).collect::<BTreeSet<_>>().into_iter().collect())
        .collect();
    Ok(OutputEquationReport { verdict: block_outputs.iter().all(|o| o.len() == 1), block_outputs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "mode", content = "target")]
pub enum DdMode {
    /// Next output is a single group.
    Mapping,
    /// Next output is the current one.
    Invariant,
    /// Next output is `target`.
    CleanReach(usize),
    /// Next output is the following vertex on a shortest certain path to `target`.
    DefiniteReach(usize),
    /// Next output may be the following vertex on a shortest possible path.
    IndefiniteReach(usize),
    /// Layered decomposition: reach the invariant core, then stay.
    Iteration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub substate: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthesisResult {
    pub feasible: bool,
    pub candidates: ControlCandidateSets,
    /// Smallest admissible controller, over all `2^n` states.
    pub sample: Option<FeedbackLaw>,
    pub diagnostics: Vec<Diagnostic>,
    /// The controller has to be chosen while running, not planned.
    pub online_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<DecompositionLayers>,
    /// Iteration mode: the sets the sample is drawn from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant: Option<ControlCandidateSets>,
}

impl SynthesisResult {
    pub(crate) fn from_sets(sets: ControlCandidateSets, reason: impl Fn(usize) -> String) -> Self {
        let diagnostics: Vec<Diagnostic> =
            sets.empty_slots().into_iter().map(|k| Diagnostic { substate: k, reason: reason(k) }).collect();
        let sample = sets.sample_law();
        Self {
            feasible: diagnostics.is_empty(),
            candidates: sets,
            sample,
            diagnostics,
            online_only: false,
            layers: None,
            invariant: None,
        }
    }

    pub fn controller_count(&self) -> &BigUint {
        self.candidates.controller_count()
    }
}

/// `O_{k+}^i`: outputs of the possible successors of substate `k` under `i`.
pub fn successor_outputs(net: &BooleanControlNetwork) -> Vec<Vec<BTreeSet<usize>>> {
    net.successor_table()
        .into_iter()
        .map(|row| row.into_iter().map(|s| s.into_iter().map(|k| net.output_of_substate(k)).collect()).collect())
        .collect()
}

/// Next vertex toward `target` along shortest paths; the smallest among
/// equally short choices. The target itself keeps a self-loop if present.
fn next_vertex(g: &crate::reachability::ReachabilityGraph, target: usize) -> Vec<Option<usize>> {
    let n = g.vertices;
    let mut rev = vec![Vec::new(); n + 1];
    for e in &g.edges {
        rev[e.to].push(e.from);
    }
    let mut dist = vec![usize::MAX; n + 1];
    dist[target] = 0;
    let mut queue = std::collections::VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &w in &rev[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let adj = g.adjacency();
    (0..=n)
        .map(|v| {
            if v == 0 {
                return None;
            }
            adj[v].iter().copied().filter(|&w| dist[w] != usize::MAX).min_by_key(|&w| (dist[w], w))
        })
        .collect()
}

fn check_output(net: &BooleanControlNetwork, target: usize) -> Result<()> {
    if target == 0 || target > net.output_count() {
        return Err(Error::IndexOutOfRange { what: "output", index: target, bound: net.output_count() });
    }
    Ok(())
}

pub fn dd_synthesize(net: &BooleanControlNetwork, mode: DdMode) -> Result<SynthesisResult> {
    if mode == DdMode::Iteration {
        return Ok(dd_synthesize_iteration(net));
    }
    let outs = successor_outputs(net);
    let single = |o: &BTreeSet<usize>, v: usize| o.len() == 1 && o.contains(&v);
    let next = match mode {
        DdMode::DefiniteReach(t) | DdMode::IndefiniteReach(t) => {
            check_output(net, t)?;
            let kind =
                if matches!(mode, DdMode::DefiniteReach(_)) { ReachKind::Definite } else { ReachKind::Indefinite };
            next_vertex(&build_reachability_graph(net, kind, VertexMode::OutputSets), t)
        }
        DdMode::CleanReach(t) => {
            check_output(net, t)?;
            Vec::new()
        }
        _ => Vec::new(),
    };
    let sets: Vec<Vec<usize>> = (1..=net.substate_count())
        .map(|k| {
            let here = net.output_of_substate(k);
            (1..=net.input_count())
                .filter(|&i| {
                    let o = &outs[k - 1][i - 1];
                    match mode {
                        DdMode::Mapping => o.len() == 1,
                        DdMode::Invariant => single(o, here),
                        DdMode::CleanReach(t) => single(o, t),
                        DdMode::DefiniteReach(_) => next[here].is_some_and(|v| single(o, v)),
                        DdMode::IndefiniteReach(_) => next[here].is_some_and(|v| o.contains(&v)),
                        DdMode::Iteration => unreachable!("handled above"),
                    }
                })
                .collect()
        })
        .collect();
    let reason = |k: usize| {
        let here = net.output_of_substate(k);
        match mode {
            DdMode::Mapping => "every input leads to several output groups".to_string(),
            DdMode::Invariant => format!("no input keeps the output at {here} with certainty"),
            DdMode::CleanReach(t) => format!("no input reaches output {t} with certainty"),
            DdMode::DefiniteReach(t) | DdMode::IndefiniteReach(t) if next[here].is_none() => {
                format!("output {here} has no path to output {t}")
            }
            _ => "no input follows the chosen path".to_string(),
        }
    };
    let mut result = SynthesisResult::from_sets(ControlCandidateSets::per_substate(net, sets, true), reason);
    result.online_only = matches!(mode, DdMode::IndefiniteReach(_));
    Ok(result)
}

/// Layered decomposition. `candidates` follows the rank-one rule in `S_1`
/// with independent choices per completion; the sample is drawn from the
/// `invariant` sets, whose controllers never leave `S_1`.
pub fn dd_synthesize_iteration(net: &BooleanControlNetwork) -> SynthesisResult {
    let layers = invariant_set_decomposition(net);
    let (candidates, invariant) = match (decomposition_controllers(net, &layers), invariant_controllers(net, &layers)) {
        (Ok(c), Ok(i)) => (c, i),
        _ => {
            let empty = vec![Vec::new(); net.substate_count()];
            let mut sets = empty.clone();
            for (&k, w) in &layers.witness {
                sets[k - 1] = w.clone();
            }
            let c = ControlCandidateSets::per_substate(net, sets, false);
            (c.clone(), c)
        }
    };
    let diagnostics = layers
        .remainder
        .iter()
        .map(|&k| Diagnostic { substate: k, reason: "not steerable into the invariant core".into() })
        .collect::<Vec<_>>();
    SynthesisResult {
        feasible: diagnostics.is_empty() && invariant.is_feasible(),
        sample: if diagnostics.is_empty() { invariant.sample_law() } else { None },
        candidates,
        diagnostics,
        online_only: false,
        layers: Some(layers),
        invariant: Some(invariant),
    }
}

/// How a closed-loop block is judged in output-feedback decoupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BlockCriterion {
    /// All columns of the block land in one output group.
    #[default]
    OutputGroups,
    /// All columns of the block are equal.
    BlockRank,
}

/// Inputs acceptable at each full state: the block of `(u, x)` over all
/// disturbance values satisfies `criterion`.
pub fn admissible_inputs(net: &BooleanControlNetwork, criterion: BlockCriterion) -> Vec<Vec<usize>> {
    (1..=net.state_count())
        .map(|x| {
            (1..=net.input_count())
                .filter(|&u| {
                    let rows: Vec<usize> = (1..=net.tail_count()).map(|j| net.next(u, x, j)).collect();
                    match criterion {
                        BlockCriterion::BlockRank => rows.iter().all(|&r| r == rows[0]),
                        BlockCriterion::OutputGroups => {
                            rows.iter().all(|&r| net.output_of_row(r) == net.output_of_row(rows[0]))
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Output feedback laws whose closed loop decouples the disturbance: each
/// output group takes an input admissible at all of its states.
pub fn dd_output_feedback_synthesize(
    net: &BooleanControlNetwork,
    criterion: BlockCriterion,
    budget: u64,
) -> Result<Vec<FeedbackLaw>> {
    net.require_h()?;
    let per_state = admissible_inputs(net, criterion);
    let groups = net.output_sets();
    let sets: Vec<Vec<usize>> = groups
        .sets
        .iter()
        .map(|states| {
            (1..=net.input_count()).filter(|u| states.iter().all(|&x| per_state[x - 1].contains(u))).collect()
        })
        .collect();
    let space = ControlCandidateSets::new(Slot::State, sets, 1, true, net.input_count());
    Ok(space.all(budget)?.into_iter().map(FeedbackLaw::output).collect())
}

/// What the closed loop should settle to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StabilizationTarget {
    /// A fixed point reached from everywhere.
    State(usize),
    /// A single cycle over exactly these states, reached from everywhere.
    Set(Vec<usize>),
    /// An exact closed-loop transition matrix.
    Behavior(LogicalMatrix),
}

/// Output feedback laws achieving `target`, in lexicographic order.
pub fn stabilization_synthesize(
    net: &BooleanControlNetwork,
    target: &StabilizationTarget,
    budget: u64,
) -> Result<Vec<FeedbackLaw>> {
    net.require_h()?;
    if net.tail_count() != 1 || !net.is_full() {
        return Err(Error::DimensionMismatch("stabilization needs an undisturbed full transition matrix".into()));
    }
    let n = net.state_count();
    let inputs = net.input_count();
    let groups = net.output_sets();
    // Inputs allowed per output group before any composition.
    let mut allowed: Vec<Vec<usize>> = vec![(1..=inputs).collect(); groups.len()];
    match target {
        StabilizationTarget::Behavior(b) => {
            if b.rows() != n || b.ncols() != n {
                return Err(Error::DimensionMismatch(format!("target must be {n}×{n}")));
            }
            for (g, states) in groups.sets.iter().enumerate() {
                allowed[g].retain(|&u| states.iter().all(|&x| net.next(u, x, 1) == b.col(x)));
            }
        }
        StabilizationTarget::State(_) | StabilizationTarget::Set(_) => {
            let set: BTreeSet<usize> = match target {
                StabilizationTarget::State(x) => BTreeSet::from([*x]),
                StabilizationTarget::Set(s) => s.iter().copied().collect(),
                StabilizationTarget::Behavior(_) => unreachable!(),
            };
            if let Some(&bad) = set.iter().find(|&&s| s == 0 || s > n) {
                return Err(Error::IndexOutOfRange { what: "state", index: bad, bound: n });
            }
            if set.is_empty() {
                return Err(Error::DimensionMismatch("empty target set".into()));
            }
            // A member must move inside the set.
            for &s in &set {
                let g = net.output_of_state(s) - 1;
                allowed[g].retain(|&u| set.contains(&net.next(u, s, 1)));
            }
        }
    }
    let space = ControlCandidateSets::new(Slot::State, allowed, 1, true, inputs);
    let mut out = Vec::new();
    for m in space.all(budget)? {
        let law = FeedbackLaw::output(m);
        let lt = apply_feedback(net, &law)?;
        let ok = match target {
            StabilizationTarget::Behavior(b) => &lt == b,
            StabilizationTarget::State(x) => single_attractor(&lt, &[*x]),
            StabilizationTarget::Set(s) => single_attractor(&lt, s),
        };
        if ok {
            out.push(law);
        }
    }
    Ok(out)
}

/// The functional graph of `lt` has one attractor, whose states are `set`.
pub fn single_attractor(lt: &LogicalMatrix, set: &[usize]) -> bool {
    let report = attractors_of_map(lt.ncols(), |x| lt.col(x));
    let want: BTreeSet<usize> = set.iter().copied().collect();
    report.attractors.len() == 1 && report.attractors[0].iter().copied().collect::<BTreeSet<_>>() == want
}

/// Two disturbance values giving different next outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Full state, or the smallest state of the substate when `L` is a
    /// subsystem matrix.
    pub state: usize,
    pub step: usize,
    /// `(state, tail, next output)` for the two runs.
    pub runs: [(usize, usize, usize); 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub exhaustive: bool,
    /// Fraction of initial-state / disturbance-word pairs examined.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdVerification {
    /// Decoupled from step `k_star` on, within the horizon.
    pub verdict: bool,
    /// First step after which the next output never depends on the disturbance.
    pub k_star: Option<usize>,
    pub counterexample: Option<Counterexample>,
    /// Outputs still possible once decoupled.
    pub steady_outputs: Vec<usize>,
    pub coverage: Coverage,
}

/// Exhaustive budget: `2^{n+d+t}·horizon` examined transitions.
pub const DEFAULT_VERIFY_BUDGET: u64 = 1 << 26;

/// Checks a state feedback against all initial states and disturbance words.
///
/// Starting from every state, the reachable set `R_t` after `t` steps is
/// tracked; `k*` is the first `t` at which every member's next output is
/// fixed regardless of the disturbance (and of unmodelled variables when `L`
/// only gives the substate). `R_t` shrinks monotonically, so this holds from
/// `k*` on.
pub fn verify_dd(net: &BooleanControlNetwork, law: &FeedbackLaw, horizon: usize) -> Result<DdVerification> {
    verify_dd_with_budget(net, law, horizon, DEFAULT_VERIFY_BUDGET, 0)
}

pub fn verify_dd_with_budget(
    net: &BooleanControlNetwork,
    law: &FeedbackLaw,
    horizon: usize,
    budget: u64,
    seed: u64,
) -> Result<DdVerification> {
    law.validate(net)?;
    let work = (net.state_count() as u128) * (net.tail_count() as u128) * (horizon.max(1) as u128);
    if work > budget as u128 {
        return Ok(sample_dd(net, law, horizon, budget, seed));
    }
    // Group full states that must agree: singletons, or a substate's completions.
    let group = |x: usize| {
        if net.is_full() {
            x
        } else {
            net.substate_of_state(x)
        }
    };
    let members = |g: usize| {
        if net.is_full() {
            g..=g
        } else {
            net.states_of_substate(g)
        }
    };
    let mut reach: BTreeSet<usize> =
        (1..=if net.is_full() { net.state_count() } else { net.substate_count() }).collect();
    let mut k_star = None;
    let mut counterexample = None;
    for t in 0..=horizon {
        let bad = reach.iter().find_map(|&g| conflict(net, law, members(g)));
        match bad {
            None => {
                k_star = Some(t);
                break;
            }
            Some(runs) => {
                counterexample = Some(Counterexample { state: runs[0].0, step: t, runs });
            }
        }
        let mut next = BTreeSet::new();
        for &g in &reach {
            for x in members(g) {
                let u = law.input_at(net, x);
                for j in 1..=net.tail_count() {
                    let row = net.next(u, x, j);
                    next.extend(net.states_of_row(row).map(group));
                }
            }
        }
        reach = next;
    }
    // Steady outputs: iterate the reachable set until it repeats.
    let mut steady = BTreeSet::new();
    if k_star.is_some() {
        let mut seen = Vec::new();
        let mut cur = reach;
        while !seen.contains(&cur) {
            seen.push(cur.clone());
            let mut next = BTreeSet::new();
            for &g in &cur {
                for x in members(g) {
                    let u = law.input_at(net, x);
                    for j in 1..=net.tail_count() {
                        next.extend(net.states_of_row(net.next(u, x, j)).map(group));
                    }
                }
            }
            cur = next;
        }
        let start = seen.iter().position(|s| s == &cur).expect("loop ends on a repeat");
        for s in &seen[start..] {
            steady.extend(s.iter().map(|&g| net.output_of_state(*members(g).start())));
        }
    }
    Ok(DdVerification {
        verdict: k_star.is_some(),
        counterexample: if k_star.is_some() { None } else { counterexample },
        k_star,
        steady_outputs: steady.into_iter().collect(),
        coverage: Coverage { exhaustive: true, fraction: 1.0 },
    })
}

/// Two members of a group whose next outputs differ, as `(state, tail, output)`.
fn conflict(
    net: &BooleanControlNetwork,
    law: &FeedbackLaw,
    members: std::ops::RangeInclusive<usize>,
) -> Option<[(usize, usize, usize); 2]> {
    let mut first: Option<(usize, usize, usize)> = None;
    for x in members {
        let u = law.input_at(net, x);
        for j in 1..=net.tail_count() {
            let y = net.output_of_row(net.next(u, x, j));
            match first {
                None => first = Some((x, j, y)),
                Some(f) if f.2 != y => return Some([f, (x, j, y)]),
                _ => {}
            }
        }
    }
    None
}

/// Random runs when exhaustive checking is over budget. The verdict only
/// covers the sampled runs.
fn sample_dd(net: &BooleanControlNetwork, law: &FeedbackLaw, horizon: usize, budget: u64, seed: u64) -> DdVerification {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let runs = (budget / (horizon.max(1) as u64 * net.tail_count() as u64)).max(1);
    let mut last_bad: Option<(usize, Counterexample)> = None;
    let mut k_star = 0;
    for _ in 0..runs {
        let mut x = rng.gen_range(1..=net.state_count());
        for t in 0..=horizon {
            let u = law.input_at(net, x);
            let outs: Vec<usize> = (1..=net.tail_count()).map(|j| net.output_of_row(net.next(u, x, j))).collect();
            if let Some(j) = outs.iter().position(|&y| y != outs[0]) {
                k_star = k_star.max(t + 1);
                if last_bad.as_ref().is_none_or(|(s, _)| t >= *s) {
                    let runs = [(x, 1, outs[0]), (x, j + 1, outs[j])];
                    last_bad = Some((t, Counterexample { state: x, step: t, runs }));
                }
            }
            let j = rng.gen_range(1..=net.tail_count());
            let row = net.next(u, x, j);
            x = rng.gen_range(*net.states_of_row(row).start()..=*net.states_of_row(row).end());
        }
    }
    let total = (net.state_count() as f64) * (net.tail_count() as f64).powi(horizon as i32);
    let verdict = k_star <= horizon;
    DdVerification {
        verdict,
        k_star: verdict.then_some(k_star),
        counterexample: if verdict { None } else { last_bad.map(|(_, c)| c) },
        steady_outputs: Vec::new(),
        coverage: Coverage { exhaustive: false, fraction: (runs as f64 / total).min(1.0) },
    }
}

/// Smallest `k` with every run certain to be inside `layers[0]` after `k`
/// steps, or `None`. Used to cross-check iteration controllers.
pub fn steps_to_core(net: &BooleanControlNetwork, law: &FeedbackLaw, core: &[usize], limit: usize) -> Option<usize> {
    let core: BTreeSet<usize> = core.iter().copied().collect();
    let mut reach: BTreeSet<usize> = (1..=net.state_count()).collect();
    for t in 0..=limit {
        if reach.iter().all(|&x| core.contains(&net.substate_of_state(x))) {
            return Some(t);
        }
        reach = crate::reachability::closed_loop_post(net, law, &reach);
    }
    None
}

/// Every state reaches `target` in the functional graph of `lt`, and
/// `target` is a fixed point.
pub fn stabilizes_to(lt: &LogicalMatrix, target: usize) -> bool {
    let mut adj = vec![Vec::new(); lt.ncols() + 1];
    for x in 1..=lt.ncols() {
        adj[lt.col(x)].push(x);
    }
    lt.col(target) == target && graph::reachable(&adj, [target]).iter().skip(1).all(|&r| r)
}
