//! Closed loops, simulation, matrix powers and attractors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{BooleanControlNetwork, BooleanNetwork, NOMINAL};
use crate::stp::{log2_exact, LogicalMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackKind {
    State,
    Output,
    Pinning,
}

/// `u = M_x x`, `u = M_y y` or a constant input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeedbackLaw {
    pub kind: FeedbackKind,
    pub m: LogicalMatrix,
}

impl FeedbackLaw {
    pub fn state(m: LogicalMatrix) -> Self {
        Self { kind: FeedbackKind::State, m }
    }

    pub fn output(m: LogicalMatrix) -> Self {
        Self { kind: FeedbackKind::Output, m }
    }

    pub fn pinning(inputs: usize, u: usize) -> Result<Self> {
        Ok(Self { kind: FeedbackKind::Pinning, m: LogicalMatrix::new(inputs, vec![u])? })
    }

    /// Checks the law's shape against `net`.
    pub fn validate(&self, net: &BooleanControlNetwork) -> Result<()> {
        let mismatch = |what: String| Err(Error::DimensionMismatch(what));
        if self.m.rows() != net.input_count() {
            return mismatch(format!("law has {} rows, network has {} inputs", self.m.rows(), net.input_count()));
        }
        match self.kind {
            FeedbackKind::State => {
                if self.m.ncols() != net.state_count() && self.m.ncols() != net.substate_count() {
                    return mismatch(format!(
                        "state feedback needs {} (or {}) columns, got {}",
                        net.state_count(),
                        net.substate_count(),
                        self.m.ncols()
                    ));
                }
            }
            FeedbackKind::Output => {
                net.require_h()?;
                if self.m.ncols() != net.output_count() {
                    return mismatch(format!(
                        "output feedback needs {} columns, got {}",
                        net.output_count(),
                        self.m.ncols()
                    ));
                }
            }
            FeedbackKind::Pinning => {
                if self.m.ncols() != 1 {
                    return mismatch("pinning control has one column".into());
                }
            }
        }
        Ok(())
    }

    /// Input chosen at full state `x`. Assumes [`validate`](Self::validate) passed.
    pub fn input_at(&self, net: &BooleanControlNetwork, x: usize) -> usize {
        match self.kind {
            FeedbackKind::State if self.m.ncols() == net.state_count() => self.m.col(x),
            FeedbackKind::State => self.m.col(net.substate_of_state(x)),
            FeedbackKind::Output => self.m.col(net.output_of_state(x)),
            FeedbackKind::Pinning => self.m.col(1),
        }
    }

    /// The equivalent state feedback over all `2^n` states.
    pub fn expand(&self, net: &BooleanControlNetwork) -> Result<LogicalMatrix> {
        self.validate(net)?;
        let cols = (1..=net.state_count()).map(|x| self.input_at(net, x)).collect();
        LogicalMatrix::new(net.input_count(), cols)
    }
}

/// Closed loop `L̃` over `(x, tail)`: column `(x, j)` is the column of `L`
/// at `(law(x), x, j)`.
pub fn apply_feedback(net: &BooleanControlNetwork, law: &FeedbackLaw) -> Result<LogicalMatrix> {
    law.validate(net)?;
    let w = net.tail_count();
    let mut cols = Vec::with_capacity(net.state_count() * w);
    for x in 1..=net.state_count() {
        let u = law.input_at(net, x);
        for j in 1..=w {
            cols.push(net.next(u, x, j));
        }
    }
    LogicalMatrix::new(net.l().rows(), cols)
}

pub fn apply_state_feedback(net: &BooleanControlNetwork, law: &FeedbackLaw) -> Result<LogicalMatrix> {
    if law.kind != FeedbackKind::State {
        return Err(Error::DimensionMismatch("expected a state feedback law".into()));
    }
    apply_feedback(net, law)
}

pub fn apply_output_feedback(net: &BooleanControlNetwork, law: &FeedbackLaw) -> Result<LogicalMatrix> {
    if law.kind != FeedbackKind::Output {
        return Err(Error::DimensionMismatch("expected an output feedback law".into()));
    }
    apply_feedback(net, law)
}

/// `(L̃)^k` over `x_0` and the disturbance word `ξ_0 ξ_1 … ξ_{k-1}`, with
/// `ξ_0` the most significant part of the column index.
pub fn closed_loop_power(ltilde: &LogicalMatrix, k: usize) -> Result<LogicalMatrix> {
    let rows = ltilde.rows();
    if !ltilde.ncols().is_multiple_of(rows) || log2_exact(ltilde.ncols() / rows).is_none() {
        return Err(Error::DimensionMismatch(format!(
            "closed loop with {} rows needs rows·2^w columns, got {}",
            rows,
            ltilde.ncols()
        )));
    }
    if k == 0 {
        return Err(Error::DimensionMismatch("power must be at least 1".into()));
    }
    let w = ltilde.ncols() / rows;
    let word_len = w
        .checked_pow(k as u32)
        .filter(|&c| c.saturating_mul(rows) <= 1 << 26)
        .ok_or_else(|| Error::BudgetExceeded(format!("(L̃)^{k} would have more than 2^26 columns")))?;
    let mut cols = Vec::with_capacity(rows * word_len);
    for x0 in 1..=rows {
        for word in 0..word_len {
            let mut x = x0;
            for step in 0..k {
                let tail = (word / w.pow((k - 1 - step) as u32)) % w + 1;
                x = ltilde.col((x - 1) * w + tail);
            }
            cols.push(x);
        }
    }
    LogicalMatrix::new(rows, cols)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Sequence(Vec<usize>),
    Feedback(FeedbackLaw),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub outputs: Vec<usize>,
    pub inputs: Vec<usize>,
    pub disturbances: Vec<usize>,
    pub faults: Vec<usize>,
}

/// Runs `horizon` steps from `x0`. Empty disturbance or fault sequences
/// mean the nominal value throughout.
pub fn simulate(
    net: &BooleanControlNetwork,
    x0: usize,
    inputs: &InputSource,
    disturbances: &[usize],
    faults: &[usize],
    horizon: usize,
) -> Result<Trajectory> {
    if !net.is_full() {
        return Err(Error::DimensionMismatch("simulation needs the full transition matrix".into()));
    }
    if x0 == 0 || x0 > net.state_count() {
        return Err(Error::IndexOutOfRange { what: "state", index: x0, bound: net.state_count() });
    }
    let pick = |seq: &[usize], k: usize, bound: usize, what: &'static str| -> Result<usize> {
        let v = if seq.is_empty() {
            NOMINAL
        } else {
            *seq.get(k).ok_or_else(|| Error::DimensionMismatch(format!("{what} sequence shorter than horizon")))?
        };
        if v == 0 || v > bound {
            return Err(Error::IndexOutOfRange { what, index: v, bound });
        }
        Ok(v)
    };
    if let InputSource::Feedback(law) = inputs {
        law.validate(net)?;
    }
    let mut tr = Trajectory {
        states: vec![x0],
        outputs: vec![net.output_of_state(x0)],
        inputs: Vec::new(),
        disturbances: Vec::new(),
        faults: Vec::new(),
    };
    let mut x = x0;
    for k in 0..horizon {
        let u = match inputs {
            InputSource::Sequence(seq) => pick(seq, k, net.input_count(), "input")?,
            InputSource::Feedback(law) => law.input_at(net, x),
        };
        let dist = pick(disturbances, k, net.disturbance_count(), "disturbance")?;
        let fault = pick(faults, k, net.fault_count(), "fault")?;
        x = net.next(u, x, net.tail_index(dist, fault));
        tr.inputs.push(u);
        tr.disturbances.push(dist);
        tr.faults.push(fault);
        tr.states.push(x);
        tr.outputs.push(net.output_of_state(x));
    }
    Ok(tr)
}

/// Cycle decomposition of an autonomous network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttractorReport {
    /// Cycles, each rotated to start at its smallest state, sorted by that state.
    pub attractors: Vec<Vec<usize>>,
    /// `basin[x-1]` = 1-based attractor id reached from `x`.
    pub basin: Vec<usize>,
    /// `distance[x-1]` = steps from `x` to its attractor.
    pub distance: Vec<usize>,
}

impl AttractorReport {
    pub fn attractor_of(&self, x: usize) -> &[usize] {
        &self.attractors[self.basin[x - 1] - 1]
    }

    pub fn is_on_cycle(&self, x: usize) -> bool {
        self.distance[x - 1] == 0
    }
}

/// Attractors of the map `x ↦ next(x)` on `1..=count`.
pub fn attractors_of_map(count: usize, next: impl Fn(usize) -> usize) -> AttractorReport {
    const NEW: u8 = 0;
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;
    let mut mark = vec![NEW; count + 1];
    let mut distance = vec![0usize; count + 1];
    let mut root = vec![0usize; count + 1]; // smallest state of the reached cycle
    let mut cycles = Vec::new();
    for start in 1..=count {
        if mark[start] != NEW {
            continue;
        }
        let mut path = Vec::new();
        let mut x = start;
        while mark[x] == NEW {
            mark[x] = ON_PATH;
            path.push(x);
            x = next(x);
        }
        let mut tail_len = path.len();
        if mark[x] == ON_PATH {
            let pos = path.iter().position(|&p| p == x).expect("x is on the path");
            let cycle = &path[pos..];
            let min_pos = (0..cycle.len()).min_by_key(|&i| cycle[i]).expect("nonempty cycle");
            let rotated: Vec<usize> = cycle[min_pos..].iter().chain(&cycle[..min_pos]).copied().collect();
            for &c in &rotated {
                mark[c] = DONE;
                distance[c] = 0;
                root[c] = rotated[0];
            }
            cycles.push(rotated);
            tail_len = pos;
        }
        for &p in path[..tail_len].iter().rev() {
            let q = next(p);
            distance[p] = distance[q] + 1;
            root[p] = root[q];
            mark[p] = DONE;
        }
    }
    cycles.sort_by_key(|c| c[0]);
    let id_of = |r: usize| cycles.iter().position(|c| c[0] == r).expect("root is a cycle head") + 1;
    let basin = (1..=count).map(|x| id_of(root[x])).collect();
    AttractorReport { attractors: cycles, basin, distance: distance[1..].to_vec() }
}

pub fn attractors(bn: &BooleanNetwork) -> Result<AttractorReport> {
    if bn.tail_bits() != 0 {
        return Err(Error::DimensionMismatch("attractors need a square transition matrix".into()));
    }
    Ok(attractors_of_map(bn.state_count(), |x| bn.l().col(x)))
}
