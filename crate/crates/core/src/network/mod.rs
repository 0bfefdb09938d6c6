//! Boolean networks and Boolean control networks in algebraic form.
//!
//! A control network evolves as `x⁺ = L ⋉ u ⋉ x ⋉ ξ_d ⋉ ξ_f` (tail order per
//! [`SignalOrder`]) and observes `y = H ⋉ x`. The first `s` state variables
//! are the output-friendly ones; `L` may be the full transition matrix
//! (`2^n` rows) or the subsystem matrix over those `s` variables only.
//!
//! Disturbance and fault index 1 (`δ^1`) is read as "nominal": no
//! disturbance, no fault.

mod compile;
pub mod expr;
mod file;

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

pub use compile::{compile_algebraic_form, UpdateRuleSet};
pub use file::{fingerprint, parse_network_file, read_network_file, write_network_file};

use crate::error::{Error, Result};
use crate::stp::{log2_exact, pow2, LogicalMatrix};

/// Largest accepted `n + m + d + t`.
pub const MAX_VARIABLES: usize = 24;

/// Index of the nominal disturbance or fault value.
pub const NOMINAL: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub t: usize,
    pub p: usize,
    pub s: usize,
}

impl Dims {
    /// Full-state network with no outputs, disturbances or faults.
    pub fn new(n: usize, m: usize) -> Self {
        Dims { n, m, d: 0, t: 0, p: 0, s: n }
    }

    pub fn with_disturbance(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_fault(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn with_outputs(mut self, p: usize) -> Self {
        self.p = p;
        self
    }

    pub fn with_substate(mut self, s: usize) -> Self {
        self.s = s;
        self
    }
}

/// Where disturbance and fault sit after `u ⋉ x` in the column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SignalOrder {
    /// `u x ξ_d ξ_f`
    #[default]
    DisturbanceFirst,
    /// `u x ξ_f ξ_d`
    FaultFirst,
}

impl SignalOrder {
    pub fn labels(self) -> [&'static str; 4] {
        match self {
            SignalOrder::DisturbanceFirst => ["u", "x", "d", "f"],
            SignalOrder::FaultFirst => ["u", "x", "f", "d"],
        }
    }

    pub fn from_labels(labels: &[String]) -> Result<Self> {
        let l: Vec<&str> = labels.iter().map(String::as_str).collect();
        match l.as_slice() {
            ["u", "x", "d", "f"] => Ok(SignalOrder::DisturbanceFirst),
            ["u", "x", "f", "d"] => Ok(SignalOrder::FaultFirst),
            _ => Err(Error::Schema(format!("signal_order must be [u,x,d,f] or [u,x,f,d], got {labels:?}"))),
        }
    }
}

/// Autonomous network `x⁺ = L x`, or `x⁺ = L x ξ` when `L` has more
/// columns than rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanNetwork {
    n: usize,
    l: LogicalMatrix,
}

impl BooleanNetwork {
    pub fn new(l: LogicalMatrix) -> Result<Self> {
        let n =
            log2_exact(l.rows()).ok_or_else(|| Error::Schema(format!("rows = {} is not a power of 2", l.rows())))?;
        if !l.ncols().is_multiple_of(l.rows()) || log2_exact(l.ncols() / l.rows()).is_none() {
            return Err(Error::DimensionMismatch(format!(
                "a network over {} states needs 2^n·2^w columns, got {}",
                l.rows(),
                l.ncols()
            )));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> &LogicalMatrix {
        &self.l
    }

    pub fn state_count(&self) -> usize {
        self.l.rows()
    }

    /// Bits of the disturbance tail, 0 for a plain network.
    pub fn tail_bits(&self) -> usize {
        log2_exact(self.l.ncols() / self.l.rows()).unwrap_or(0)
    }

    /// Successor of state `x` under tail `tail` (both 1-based).
    pub fn next(&self, x: usize, tail: usize) -> usize {
        let w = self.l.ncols() / self.l.rows();
        self.l.col((x - 1) * w + tail)
    }
}

/// States producing each output, `sets[i-1] = O_si` in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputPartition {
    pub sets: Vec<Vec<usize>>,
}

impl OutputPartition {
    pub fn get(&self, output: usize) -> &[usize] {
        &self.sets[output - 1]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Decoded column: input, state, disturbance, fault (all 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signals {
    pub u: usize,
    pub x: usize,
    pub dist: usize,
    pub fault: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanControlNetwork {
    name: String,
    dims: Dims,
    order: SignalOrder,
    l: LogicalMatrix,
    h: Option<LogicalMatrix>,
    rules: Option<UpdateRuleSet>,
    permutation: Option<Vec<usize>>,
}

impl BooleanControlNetwork {
    pub fn new(dims: Dims, order: SignalOrder, l: LogicalMatrix, h: Option<LogicalMatrix>) -> Result<Self> {
        let Dims { n, m, d, t, p, s } = dims;
        if n == 0 {
            return Err(Error::Schema("n must be at least 1".into()));
        }
        if n + m + d + t > MAX_VARIABLES {
            return Err(Error::Schema(format!("n+m+d+t = {} exceeds the supported {MAX_VARIABLES}", n + m + d + t)));
        }
        if s == 0 || s > n {
            return Err(Error::Schema(format!("s = {s} must lie in 1..={n}")));
        }
        if log2_exact(l.rows()).is_none() {
            return Err(Error::Schema(format!("L rows = {} is not a power of 2", l.rows())));
        }
        if l.rows() != pow2(n) && l.rows() != pow2(s) {
            return Err(Error::DimensionMismatch(format!(
                "L has {} rows, expected 2^n = {} or 2^s = {}",
                l.rows(),
                pow2(n),
                pow2(s)
            )));
        }
        if l.ncols() != pow2(m + n + d + t) {
            return Err(Error::DimensionMismatch(format!(
                "L has {} columns, expected 2^(m+n+d+t) = {}",
                l.ncols(),
                pow2(m + n + d + t)
            )));
        }
        if let Some(h) = &h {
            if log2_exact(h.rows()).is_none() {
                return Err(Error::Schema(format!("H rows = {} is not a power of 2", h.rows())));
            }
            if h.rows() != pow2(p) {
                return Err(Error::DimensionMismatch(format!("H has {} rows, expected 2^p = {}", h.rows(), pow2(p))));
            }
            if h.ncols() != pow2(n) && h.ncols() != pow2(s) {
                return Err(Error::DimensionMismatch(format!(
                    "H has {} columns, expected 2^n = {} or 2^s = {}",
                    h.ncols(),
                    pow2(n),
                    pow2(s)
                )));
            }
            if h.ncols() == pow2(n) && s < n {
                let width = pow2(n - s);
                for block in h.cols().chunks(width) {
                    if block.iter().any(|&c| c != block[0]) {
                        return Err(Error::Schema(format!("H depends on state variables beyond the first s = {s}")));
                    }
                }
            }
        }
        Ok(Self { name: String::new(), dims, order, l, h, rules: None, permutation: None })
    }

    /// Plain control network `x⁺ = L u x`, `y = H x`.
    pub fn control(n: usize, m: usize, l: LogicalMatrix, h: Option<LogicalMatrix>) -> Result<Self> {
        let p = match &h {
            Some(h) => log2_exact(h.rows()).unwrap_or(0),
            None => 0,
        };
        Self::new(Dims::new(n, m).with_outputs(p), SignalOrder::default(), l, h)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the output matrix, keeping everything else.
    pub fn with_output(self, h: LogicalMatrix) -> Result<Self> {
        let mut dims = self.dims;
        dims.p = log2_exact(h.rows()).ok_or_else(|| Error::Schema("H rows must be a power of 2".into()))?;
        let mut out = Self::new(dims, self.order, self.l, Some(h))?;
        out.name = self.name;
        out.permutation = self.permutation;
        Ok(out)
    }

    /// Same shape and outputs, inputs removed, transitions from `ltilde`.
    pub fn closed_loop(&self, ltilde: LogicalMatrix) -> Result<Self> {
        let mut dims = self.dims;
        dims.m = 0;
        let mut out = Self::new(dims, self.order, ltilde, self.h.clone())?;
        out.name = self.name.clone();
        Ok(out)
    }

    pub(crate) fn set_rules(&mut self, rules: UpdateRuleSet, permutation: Option<Vec<usize>>) {
        self.rules = Some(rules);
        self.permutation = permutation;
    }

    pub(crate) fn set_permutation(&mut self, permutation: Option<Vec<usize>>) {
        self.permutation = permutation;
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn order(&self) -> SignalOrder {
        self.order
    }

    pub fn l(&self) -> &LogicalMatrix {
        &self.l
    }

    pub fn h(&self) -> Option<&LogicalMatrix> {
        self.h.as_ref()
    }

    pub fn require_h(&self) -> Result<&LogicalMatrix> {
        self.h.as_ref().ok_or(Error::MissingOutput)
    }

    pub fn rules(&self) -> Option<&UpdateRuleSet> {
        self.rules.as_ref()
    }

    /// `permutation[i]` is the original index of state variable `i + 1`
    /// after output-referenced variables were moved to the front.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    pub fn state_count(&self) -> usize {
        pow2(self.dims.n)
    }

    pub fn substate_count(&self) -> usize {
        pow2(self.dims.s)
    }

    pub fn input_count(&self) -> usize {
        pow2(self.dims.m)
    }

    pub fn disturbance_count(&self) -> usize {
        pow2(self.dims.d)
    }

    pub fn fault_count(&self) -> usize {
        pow2(self.dims.t)
    }

    /// Number of `(ξ_d, ξ_f)` combinations per `(u, x)`.
    pub fn tail_count(&self) -> usize {
        pow2(self.dims.d + self.dims.t)
    }

    /// Full states per substate, `2^{n-s}`.
    pub fn completions(&self) -> usize {
        pow2(self.dims.n - self.dims.s)
    }

    /// True when `L` maps to full states rather than substates.
    pub fn is_full(&self) -> bool {
        self.l.rows() == self.state_count()
    }

    /// Number of distinct outputs: `2^p` with `H`, otherwise the substates.
    pub fn output_count(&self) -> usize {
        match &self.h {
            Some(h) => h.rows(),
            None => self.substate_count(),
        }
    }

    pub fn tail_index(&self, dist: usize, fault: usize) -> usize {
        match self.order {
            SignalOrder::DisturbanceFirst => (dist - 1) * self.fault_count() + fault,
            SignalOrder::FaultFirst => (fault - 1) * self.disturbance_count() + dist,
        }
    }

    /// Inverse of [`tail_index`](Self::tail_index).
    pub fn split_tail(&self, tail: usize) -> (usize, usize) {
        let k = tail - 1;
        match self.order {
            SignalOrder::DisturbanceFirst => (k / self.fault_count() + 1, k % self.fault_count() + 1),
            SignalOrder::FaultFirst => (k % self.disturbance_count() + 1, k / self.disturbance_count() + 1),
        }
    }

    /// 1-based column of `L` for `(u, x, tail)`.
    pub fn column_of_tail(&self, u: usize, x: usize, tail: usize) -> usize {
        (u - 1) * self.state_count() * self.tail_count() + (x - 1) * self.tail_count() + tail
    }

    pub fn column(&self, s: Signals) -> usize {
        self.column_of_tail(s.u, s.x, self.tail_index(s.dist, s.fault))
    }

    pub fn decompose_column(&self, c: usize) -> Signals {
        let k = c - 1;
        let per_u = self.state_count() * self.tail_count();
        let (u, rest) = (k / per_u + 1, k % per_u);
        let (x, tail) = (rest / self.tail_count() + 1, rest % self.tail_count() + 1);
        let (dist, fault) = self.split_tail(tail);
        Signals { u, x, dist, fault }
    }

    /// Row value of `L` for `(u, x, tail)`.
    pub fn next(&self, u: usize, x: usize, tail: usize) -> usize {
        self.l.col(self.column_of_tail(u, x, tail))
    }

    pub fn substate_of_state(&self, x: usize) -> usize {
        (x - 1) / self.completions() + 1
    }

    /// Substate of a row value of `L`.
    pub fn substate_of_row(&self, c: usize) -> usize {
        (c - 1) / (self.l.rows() / self.substate_count()) + 1
    }

    pub fn states_of_substate(&self, k: usize) -> RangeInclusive<usize> {
        let w = self.completions();
        (k - 1) * w + 1..=k * w
    }

    /// Full states a row value of `L` may stand for.
    pub fn states_of_row(&self, c: usize) -> RangeInclusive<usize> {
        if self.is_full() {
            c..=c
        } else {
            self.states_of_substate(c)
        }
    }

    pub fn output_of_substate(&self, k: usize) -> usize {
        match &self.h {
            None => k,
            Some(h) if h.ncols() == self.substate_count() => h.col(k),
            Some(h) => h.col(*self.states_of_substate(k).start()),
        }
    }

    pub fn output_of_state(&self, x: usize) -> usize {
        self.output_of_substate(self.substate_of_state(x))
    }

    pub fn output_of_row(&self, c: usize) -> usize {
        self.output_of_substate(self.substate_of_row(c))
    }

    /// `H` expanded to all `2^n` states.
    pub fn full_output_matrix(&self) -> Result<LogicalMatrix> {
        self.require_h()?;
        let cols = (1..=self.state_count()).map(|x| self.output_of_state(x)).collect();
        LogicalMatrix::new(self.output_count(), cols)
    }

    /// `O_si` over full states.
    pub fn output_sets(&self) -> OutputPartition {
        let mut sets = vec![Vec::new(); self.output_count()];
        for x in 1..=self.state_count() {
            sets[self.output_of_state(x) - 1].push(x);
        }
        OutputPartition { sets }
    }

    /// `O_si` over substates.
    pub fn substate_output_sets(&self) -> OutputPartition {
        let mut sets = vec![Vec::new(); self.output_count()];
        for k in 1..=self.substate_count() {
            sets[self.output_of_substate(k) - 1].push(k);
        }
        OutputPartition { sets }
    }

    fn check(&self, what: &'static str, index: usize, bound: usize) -> Result<()> {
        if index == 0 || index > bound {
            return Err(Error::IndexOutOfRange { what, index, bound });
        }
        Ok(())
    }

    /// Substates reachable in one step from substate `k` under input `i`,
    /// over every non-output completion and every disturbance/fault value.
    pub fn subsystem_successors(&self, k: usize, i: usize) -> Result<BTreeSet<usize>> {
        self.check("substate", k, self.substate_count())?;
        self.check("input", i, self.input_count())?;
        Ok(self.successors_where(k, i, |_| true))
    }

    /// As [`subsystem_successors`](Self::subsystem_successors), restricted
    /// to tails accepted by `keep`.
    pub fn successors_where(&self, k: usize, i: usize, keep: impl Fn(usize) -> bool) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for x in self.states_of_substate(k) {
            for tail in 1..=self.tail_count() {
                if keep(tail) {
                    out.insert(self.substate_of_row(self.next(i, x, tail)));
                }
            }
        }
        out
    }

    /// `table[k-1][i-1]` = successors of substate `k` under input `i`.
    pub fn successor_table(&self) -> Vec<Vec<BTreeSet<usize>>> {
        (1..=self.substate_count())
            .map(|k| (1..=self.input_count()).map(|i| self.successors_where(k, i, |_| true)).collect())
            .collect()
    }
}
