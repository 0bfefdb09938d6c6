//! Behavioural equivalence between an autonomous network and a control
//! network, and exhaustive search for feedback laws that achieve it.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::candidates::{ControlCandidateSets, Slot};
use crate::dynamics::{attractors_of_map, AttractorReport, FeedbackKind, FeedbackLaw};
use crate::error::{Error, Result};
use crate::network::{BooleanControlNetwork, BooleanNetwork};
use crate::stp::LogicalMatrix;

/// Default ceiling on enumerated feedback laws.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Criterion {
    StateTransition,
    OutputSequence,
    Attractor,
    OutputSteadyState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Regime {
    AllInputs,
    StateFeedback(LogicalMatrix),
    OutputFeedback(LogicalMatrix),
}

/// Where disturbances (and faults) act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum DisturbanceMode {
    /// Neither network has a disturbance.
    #[default]
    None,
    /// Only the control network is disturbed; every value must be harmless.
    BcnOnly,
    /// Both networks see the same disturbance value at each step.
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceQuery {
    pub criterion: Criterion,
    pub regime: Regime,
    pub disturbance_mode: DisturbanceMode,
}

impl EquivalenceQuery {
    pub fn new(criterion: Criterion, regime: Regime) -> Self {
        Self { criterion, regime, disturbance_mode: DisturbanceMode::None }
    }

    pub fn with_disturbance(mut self, mode: DisturbanceMode) -> Self {
        self.disturbance_mode = mode;
        self
    }
}

/// First violation found: initial state, the control network's input at
/// the violating step (if it has inputs) and the 1-based step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub state: usize,
    pub input: Option<usize>,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: bool,
    pub witness: Option<Witness>,
    pub details: String,
}

impl EquivalenceReport {
    fn holds() -> Self {
        Self { verdict: true, witness: None, details: String::new() }
    }

    fn fails(witness: Witness, details: String) -> Self {
        Self { verdict: false, witness: Some(witness), details }
    }
}

/// Checked pairing of the two networks.
struct Pair<'a> {
    bn: &'a BooleanNetwork,
    bcn: &'a BooleanControlNetwork,
    mode: DisturbanceMode,
    law: Option<FeedbackLaw>,
}

impl Pair<'_> {
    /// Inputs the control network may use at `x`.
    fn inputs(&self, x: usize) -> Vec<usize> {
        match &self.law {
            Some(law) => vec![law.input_at(self.bcn, x)],
            None => (1..=self.bcn.input_count()).collect(),
        }
    }

    /// `(input, bn tail, bcn tail)` choices at `x`.
    fn choices(&self, x: usize) -> Vec<(usize, usize, usize)> {
        let tails = self.bcn.tail_count();
        let mut out = Vec::new();
        for u in self.inputs(x) {
            for j in 1..=tails {
                let bn_tail = if self.mode == DisturbanceMode::Both { j } else { 1 };
                out.push((u, bn_tail, j));
            }
        }
        out
    }

    fn input_label(&self, u: usize) -> Option<usize> {
        (self.bcn.dims().m > 0).then_some(u)
    }
}

fn pair<'a>(bn: &'a BooleanNetwork, bcn: &'a BooleanControlNetwork, q: &EquivalenceQuery) -> Result<Pair<'a>> {
    if bn.n() != bcn.dims().n {
        return Err(Error::DimensionMismatch(format!("network sizes differ: {} vs {}", bn.n(), bcn.dims().n)));
    }
    if !bcn.is_full() {
        return Err(Error::DimensionMismatch("equivalence needs the full transition matrix".into()));
    }
    let w = bcn.dims().d + bcn.dims().t;
    match q.disturbance_mode {
        DisturbanceMode::None if w > 0 || bn.tail_bits() > 0 => {
            return Err(Error::DimensionMismatch("disturbed network under disturbance mode none".into()))
        }
        DisturbanceMode::BcnOnly if bn.tail_bits() > 0 => {
            return Err(Error::DimensionMismatch("bcnOnly expects an undisturbed reference network".into()))
        }
        DisturbanceMode::Both if bn.tail_bits() != w => {
            return Err(Error::DimensionMismatch(format!(
                "reference network has {} disturbance bits, control network {w}",
                bn.tail_bits()
            )))
        }
        _ => {}
    }
    if matches!(q.criterion, Criterion::Attractor | Criterion::OutputSteadyState) && w > 0 {
        return Err(Error::Unsupported("attractor criteria need undisturbed dynamics".into()));
    }
    if matches!(q.criterion, Criterion::OutputSequence | Criterion::OutputSteadyState) {
        bcn.require_h()?;
    }
    let law = match &q.regime {
        Regime::AllInputs => None,
        Regime::StateFeedback(m) => Some(FeedbackLaw::state(m.clone())),
        Regime::OutputFeedback(m) => Some(FeedbackLaw::output(m.clone())),
    };
    if let Some(law) = &law {
        law.validate(bcn)?;
    }
    Ok(Pair { bn, bcn, mode: q.disturbance_mode, law })
}

pub fn check_equivalence(
    bn: &BooleanNetwork,
    bcn: &BooleanControlNetwork,
    q: &EquivalenceQuery,
) -> Result<EquivalenceReport> {
    let p = pair(bn, bcn, q)?;
    Ok(match q.criterion {
        Criterion::StateTransition => state_transition(&p),
        Criterion::OutputSequence => output_sequence(&p),
        Criterion::Attractor | Criterion::OutputSteadyState => steady(&p, q.criterion),
    })
}

fn state_transition(p: &Pair) -> EquivalenceReport {
    for x in 1..=p.bn.state_count() {
        for (u, bt, ct) in p.choices(x) {
            let (want, got) = (p.bn.next(x, bt), p.bcn.next(u, x, ct));
            if want != got {
                return EquivalenceReport::fails(
                    Witness { state: x, input: p.input_label(u), step: 1 },
                    format!("state {x}: reference moves to {want}, control network to {got}"),
                );
            }
        }
    }
    EquivalenceReport::holds()
}

/// Breadth-first search over state pairs from each diagonal start. The pair
/// space is finite, so agreement on every reachable pair is agreement
/// forever.
fn output_sequence(p: &Pair) -> EquivalenceReport {
    let n = p.bn.state_count();
    let y = |x: usize| p.bcn.output_of_state(x);
    for x0 in 1..=n {
        let mut seen = BTreeSet::from([(x0, x0)]);
        let mut queue = VecDeque::from([(x0, x0, 0usize)]);
        while let Some((a, b, depth)) = queue.pop_front() {
            for (u, bt, ct) in p.choices(b) {
                let (na, nb) = (p.bn.next(a, bt), p.bcn.next(u, b, ct));
                if y(na) != y(nb) {
                    return EquivalenceReport::fails(
                        Witness { state: x0, input: p.input_label(u), step: depth + 1 },
                        format!(
                            "from state {x0}, output {} of the reference vs {} at step {}",
                            y(na),
                            y(nb),
                            depth + 1
                        ),
                    );
                }
                if seen.insert((na, nb)) {
                    queue.push_back((na, nb, depth + 1));
                }
            }
        }
    }
    EquivalenceReport::holds()
}

/// Output sequence along the attractor reached from `x`, reduced to its
/// primitive period and rotated to the lexicographically smallest phase.
fn output_cycle(report: &AttractorReport, y: impl Fn(usize) -> usize, x: usize) -> Vec<usize> {
    let outs: Vec<usize> = report.attractor_of(x).iter().map(|&s| y(s)).collect();
    let len = outs.len();
    let period = (1..=len).find(|&q| len.is_multiple_of(q) && (0..len).all(|i| outs[i] == outs[i % q])).unwrap_or(len);
    let base = &outs[..period];
    (0..period).map(|r| base[r..].iter().chain(&base[..r]).copied().collect::<Vec<_>>()).min().unwrap_or_default()
}

fn steady(p: &Pair, criterion: Criterion) -> EquivalenceReport {
    let n = p.bn.state_count();
    let reference = attractors_of_map(n, |x| p.bn.next(x, 1));
    // Without a feedback law, each constant input is a separate closed loop.
    let pins: Vec<Option<usize>> = match p.law {
        Some(_) => vec![None],
        None => (1..=p.bcn.input_count()).map(Some).collect(),
    };
    for pin in pins {
        let input = |x: usize| pin.unwrap_or_else(|| p.inputs(x)[0]);
        let closed = attractors_of_map(n, |x| p.bcn.next(input(x), x, 1));
        for x in 1..=n {
            let (ok, what) = match criterion {
                Criterion::Attractor => (
                    reference.attractor_of(x) == closed.attractor_of(x),
                    format!("attractor {:?} vs {:?}", reference.attractor_of(x), closed.attractor_of(x)),
                ),
                _ => {
                    let y = |s: usize| p.bcn.output_of_state(s);
                    let (a, b) = (output_cycle(&reference, y, x), output_cycle(&closed, y, x));
                    (a == b, format!("steady outputs {a:?} vs {b:?}"))
                }
            };
            if !ok {
                return EquivalenceReport::fails(
                    Witness { state: x, input: pin.or_else(|| p.input_label(input(x))), step: 0 },
                    format!("from state {x}: {what}"),
                );
            }
        }
    }
    EquivalenceReport::holds()
}

/// Every feedback law of `kind` under which the networks are equivalent for
/// `criterion`, in lexicographic column order.
pub fn search_equivalence_feedback(
    bn: &BooleanNetwork,
    bcn: &BooleanControlNetwork,
    criterion: Criterion,
    kind: FeedbackKind,
    mode: DisturbanceMode,
    budget: u64,
) -> Result<Vec<FeedbackLaw>> {
    let cols = match kind {
        FeedbackKind::State => bcn.state_count(),
        FeedbackKind::Output => {
            bcn.require_h()?;
            bcn.output_count()
        }
        FeedbackKind::Pinning => 1,
    };
    let inputs = bcn.input_count();
    let all = vec![(1..=inputs).collect::<Vec<_>>(); cols];
    let space = ControlCandidateSets::new(Slot::State, all, 1, true, inputs);
    if space.controller_count() > &num_bigint::BigUint::from(budget) {
        return Err(Error::SearchSpaceTooLarge { candidates: space.controller_count().to_string(), budget });
    }
    let wrap = |m: LogicalMatrix| match kind {
        FeedbackKind::State => FeedbackLaw::state(m),
        FeedbackKind::Output => FeedbackLaw::output(m),
        FeedbackKind::Pinning => FeedbackLaw { kind, m },
    };
    let regime = |m: &LogicalMatrix| match kind {
        FeedbackKind::Output => Regime::OutputFeedback(m.clone()),
        _ => Regime::StateFeedback(expand_pinning(m, bcn.state_count())),
    };
    // Validate the pairing once so errors surface even with no candidates.
    let probe = LogicalMatrix::new(inputs, vec![1; cols])?;
    pair(bn, bcn, &EquivalenceQuery::new(criterion, regime(&probe)).with_disturbance(mode))?;

    let space = if criterion == Criterion::StateTransition && kind == FeedbackKind::State {
        // Columns are independent: keep the inputs that match per state.
        let per_state = (1..=bcn.state_count())
            .map(|x| {
                (1..=inputs)
                    .filter(|&u| {
                        (1..=bcn.tail_count()).all(|j| {
                            let bt = if mode == DisturbanceMode::Both { j } else { 1 };
                            bcn.next(u, x, j) == bn.next(x, bt)
                        })
                    })
                    .collect()
            })
            .collect();
        ControlCandidateSets::new(Slot::State, per_state, 1, true, inputs)
    } else {
        space
    };
    let mut out = Vec::new();
    for m in space.iter() {
        let q = EquivalenceQuery::new(criterion, regime(&m)).with_disturbance(mode);
        if check_equivalence(bn, bcn, &q)?.verdict {
            out.push(wrap(m));
        }
    }
    Ok(out)
}

fn expand_pinning(m: &LogicalMatrix, states: usize) -> LogicalMatrix {
    if m.ncols() == 1 {
        LogicalMatrix::new(m.rows(), vec![m.col(1); states]).expect("same input range")
    } else {
        m.clone()
    }
}
