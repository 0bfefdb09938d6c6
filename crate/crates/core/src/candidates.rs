//! Admissible-input sets and the state-feedback matrices they generate.

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::dynamics::FeedbackLaw;
use crate::error::{Error, Result};
use crate::network::BooleanControlNetwork;
use crate::stp::LogicalMatrix;

/// What each candidate set is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Substate,
    State,
}

/// `C_k` per slot, plus how the sets expand to full-state feedback.
///
/// With `shared`, all full states of a substate take the same input;
/// otherwise each completion chooses independently from `C_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlCandidateSets {
    pub slot: Slot,
    pub sets: Vec<Vec<usize>>,
    pub completions: usize,
    pub shared: bool,
    pub inputs: usize,
    #[serde(serialize_with = "as_decimal", rename = "controller_count")]
    count: BigUint,
}

fn as_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl ControlCandidateSets {
    pub fn new(slot: Slot, sets: Vec<Vec<usize>>, completions: usize, shared: bool, inputs: usize) -> Self {
        let sets: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let completions = if slot == Slot::State { 1 } else { completions };
        let exp = if shared { 1 } else { completions as u32 };
        let count = sets.iter().map(|s| BigUint::from(s.len()).pow(exp)).product();
        Self { slot, sets, completions, shared, inputs, count }
    }

    /// Sets over substates of `net`.
    pub fn per_substate(net: &BooleanControlNetwork, sets: Vec<Vec<usize>>, shared: bool) -> Self {
        Self::new(Slot::Substate, sets, net.completions(), shared, net.input_count())
    }

    /// Sets over the full states of `net`.
    pub fn per_state(net: &BooleanControlNetwork, sets: Vec<Vec<usize>>) -> Self {
        Self::new(Slot::State, sets, 1, true, net.input_count())
    }

    /// Number of distinct full-state feedback matrices, `N_tc`.
    pub fn controller_count(&self) -> &BigUint {
        &self.count
    }

    pub fn get(&self, k: usize) -> &[usize] {
        &self.sets[k - 1]
    }

    pub fn is_feasible(&self) -> bool {
        self.sets.iter().all(|s| !s.is_empty())
    }

    /// Slots with no admissible input.
    pub fn empty_slots(&self) -> Vec<usize> {
        (1..=self.sets.len()).filter(|&k| self.sets[k - 1].is_empty()).collect()
    }

    fn state_count(&self) -> usize {
        self.sets.len() * self.completions
    }

    /// Degrees of freedom of the enumeration: `(slot, completion)` pairs
    /// that choose independently.
    fn choices(&self) -> Vec<&[usize]> {
        if self.shared {
            self.sets.iter().map(Vec::as_slice).collect()
        } else {
            self.sets.iter().flat_map(|s| std::iter::repeat_n(s.as_slice(), self.completions)).collect()
        }
    }

    fn assemble(&self, picks: &[usize]) -> LogicalMatrix {
        let cols: Vec<usize> = if self.shared {
            picks.iter().flat_map(|&u| std::iter::repeat_n(u, self.completions)).collect()
        } else {
            picks.to_vec()
        };
        LogicalMatrix::new(self.inputs, cols).expect("candidate inputs are in range")
    }

    /// Smallest admissible input everywhere, over all `2^n` states.
    pub fn sample(&self) -> Option<LogicalMatrix> {
        let picks: Option<Vec<usize>> = self.choices().iter().map(|s| s.first().copied()).collect();
        picks.map(|p| self.assemble(&p))
    }

    pub fn sample_law(&self) -> Option<FeedbackLaw> {
        self.sample().map(FeedbackLaw::state)
    }

    /// Every controller in lexicographic order of `(state, input)`.
    pub fn iter(&self) -> Controllers<'_> {
        let choices = self.choices();
        let done = choices.iter().any(|s| s.is_empty());
        Controllers { sets: self, pos: vec![0; choices.len()], choices, done }
    }

    /// Whether the full-state matrix `m` is one of the generated controllers.
    pub fn contains(&self, m: &LogicalMatrix) -> bool {
        if m.rows() != self.inputs || m.ncols() != self.state_count() {
            return false;
        }
        self.sets.iter().enumerate().all(|(k, set)| {
            let block = &m.cols()[k * self.completions..(k + 1) * self.completions];
            block.iter().all(|u| set.contains(u)) && (!self.shared || block.iter().all(|&u| u == block[0]))
        })
    }

    /// Enumerates everything, refusing beyond `budget` controllers.
    pub fn all(&self, budget: u64) -> Result<Vec<LogicalMatrix>> {
        if self.count > BigUint::from(budget) {
            return Err(Error::SearchSpaceTooLarge { candidates: self.count.to_string(), budget });
        }
        Ok(self.iter().collect())
    }
}

/// Lexicographic controller enumeration; see [`ControlCandidateSets::iter`].
pub struct Controllers<'a> {
    sets: &'a ControlCandidateSets,
    choices: Vec<&'a [usize]>,
    pos: Vec<usize>,
    done: bool,
}

impl Iterator for Controllers<'_> {
    type Item = LogicalMatrix;

    fn next(&mut self) -> Option<LogicalMatrix> {
        if self.done {
            return None;
        }
        let picks: Vec<usize> = self.pos.iter().zip(&self.choices).map(|(&p, s)| s[p]).collect();
        let out = self.sets.assemble(&picks);
        // Odometer with the last position least significant.
        let mut i = self.pos.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.pos[i] += 1;
            if self.pos[i] < self.choices[i].len() {
                break;
            }
            self.pos[i] = 0;
        }
        Some(out)
    }
}
