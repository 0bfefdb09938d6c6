//! Instantaneous fault detection: reflective/redundant block checks,
//! impossible output transitions, controller synthesis with and without
//! disturbance decoupling, brute-force verification, and the
//! set-membership observer.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::candidates::ControlCandidateSets;
use crate::decoupling::SynthesisResult;
use crate::dynamics::{apply_feedback, FeedbackLaw};
use crate::error::{Error, Result};
use crate::network::{BooleanControlNetwork, NOMINAL};
use crate::stp::{log2_exact, pow2, LogicalMatrix};

fn all_distinct(cols: &[usize]) -> bool {
    let mut seen = BTreeSet::new();
    cols.iter().all(|c| seen.insert(*c))
}

/// Block test on the structure matrix `m_g` of `G: D^n → D^k`.
///
/// The first `r` variables are fixed, the next `redundant` must never
/// change the value and the remaining ones must all be reflective. With
/// `redundant = 0` this is the full-column-rank test per block.
pub fn reflective_check(m_g: &LogicalMatrix, r: usize, redundant: usize) -> Result<bool> {
    let n = log2_exact(m_g.ncols())
        .ok_or_else(|| Error::DimensionMismatch(format!("{} columns is not a power of two", m_g.ncols())))?;
    if r + redundant > n {
        return Err(Error::DimensionMismatch(format!("r + s = {} exceeds n = {n}", r + redundant)));
    }
    let width = pow2(n - r - redundant);
    Ok(m_g.cols().chunks(pow2(n - r)).all(|block| {
        let first = &block[..width];
        all_distinct(first) && block.chunks(width).all(|sub| sub == first)
    }))
}

/// `I_m(O_si)` per output `i`: outputs that can never follow `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpossibleOutputMap {
    pub sets: Vec<Vec<usize>>,
}

impl ImpossibleOutputMap {
    pub fn get(&self, output: usize) -> &[usize] {
        &self.sets[output - 1]
    }

    pub fn is_impossible(&self, from: usize, to: usize) -> bool {
        self.sets[from - 1].contains(&to)
    }
}

/// Impossible output transitions of the closed loop `ltilde` (columns
/// over `(x, tail)`), using only fault-free tails and every disturbance.
pub fn impossible_output_sets(net: &BooleanControlNetwork, ltilde: &LogicalMatrix) -> Result<ImpossibleOutputMap> {
    let w = net.tail_count();
    if ltilde.ncols() != net.state_count() * w || ltilde.rows() != net.l().rows() {
        return Err(Error::DimensionMismatch(format!(
            "closed loop must be {}x{}, got {}x{}",
            net.l().rows(),
            net.state_count() * w,
            ltilde.rows(),
            ltilde.ncols()
        )));
    }
    let p = net.output_count();
    let mut possible = vec![vec![false; p]; p];
    for x in 1..=net.state_count() {
        for dist in 1..=net.disturbance_count() {
            let c = ltilde.col((x - 1) * w + net.tail_index(dist, NOMINAL));
            possible[net.output_of_state(x) - 1][net.output_of_row(c) - 1] = true;
        }
    }
    let sets = possible.iter().map(|row| (1..=p).filter(|&j| !row[j - 1]).collect()).collect();
    Ok(ImpossibleOutputMap { sets })
}

/// Next output per `(state, input, disturbance)` as a function of the fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultOutputMap {
    /// `outputs[x-1][u-1][dist-1][fault-1]`.
    pub outputs: Vec<Vec<Vec<Vec<usize>>>>,
}

impl FaultOutputMap {
    pub fn new(net: &BooleanControlNetwork) -> Self {
        let outputs = (1..=net.state_count())
            .map(|x| {
                (1..=net.input_count())
                    .map(|u| {
                        (1..=net.disturbance_count())
                            .map(|d| {
                                (1..=net.fault_count())
                                    .map(|f| net.output_of_row(net.next(u, x, net.tail_index(d, f))))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { outputs }
    }

    pub fn get(&self, x: usize, u: usize, dist: usize) -> &[usize] {
        &self.outputs[x - 1][u - 1][dist - 1]
    }

    /// Distinct faults give distinct next outputs, for every disturbance.
    pub fn is_injective(&self, x: usize, u: usize) -> bool {
        self.outputs[x - 1][u - 1].iter().all(|f| all_distinct(f))
    }

    /// The block of `M^O = H L̃` for state `x` under input `u`, with
    /// columns ordered disturbance-major.
    pub fn block(&self, x: usize, u: usize, output_count: usize) -> LogicalMatrix {
        let cols = self.outputs[x - 1][u - 1].concat();
        LogicalMatrix::new(output_count, cols).expect("outputs are in range")
    }
}

/// Columns of `L` for `(u, x)` in disturbance-major order.
fn l_block(net: &BooleanControlNetwork, u: usize, x: usize) -> LogicalMatrix {
    let cols = (1..=net.disturbance_count())
        .flat_map(|d| (1..=net.fault_count()).map(move |f| net.next(u, x, net.tail_index(d, f))))
        .collect();
    LogicalMatrix::new(net.l().rows(), cols).expect("rows of L are in range")
}

fn synthesize(net: &BooleanControlNetwork, redundant: usize) -> Result<SynthesisResult> {
    let map = FaultOutputMap::new(net);
    let p = net.output_count();
    let sets: Vec<Vec<usize>> = (1..=net.state_count())
        .map(|x| {
            (1..=net.input_count())
                .filter(|&u| {
                    reflective_check(&map.block(x, u, p), 0, redundant).expect("block width is a power of two")
                })
                .collect()
        })
        .collect();
    let raw: Vec<bool> = (1..=net.state_count())
        .map(|x| {
            (1..=net.input_count())
                .any(|u| reflective_check(&l_block(net, u, x), 0, redundant).expect("block width is a power of two"))
        })
        .collect();
    let sets = ControlCandidateSets::per_state(net, sets);
    Ok(SynthesisResult::from_sets(sets, |x| {
        if raw[x - 1] {
            "fault is not reflected injectively in the output".into()
        } else if redundant > 0 {
            "no input gives identical full-rank divisions".into()
        } else {
            "no input gives a full-rank sub-block".into()
        }
    }))
}

/// Per full state, the inputs whose width-`2^t` sub-block has distinct
/// columns and maps faults injectively to next outputs.
pub fn ifd_synthesize(net: &BooleanControlNetwork) -> Result<SynthesisResult> {
    if net.dims().t == 0 {
        return Err(Error::Unsupported("fault detection needs at least one fault variable".into()));
    }
    if net.dims().d > 0 {
        return Err(Error::Unsupported("network has disturbances; use dd_ifd_synthesize".into()));
    }
    synthesize(net, 0)
}

/// As [`ifd_synthesize`] over sub-blocks of width `2^{d+t}`: the `2^d`
/// divisions must be identical and each must have distinct columns.
pub fn dd_ifd_synthesize(net: &BooleanControlNetwork) -> Result<SynthesisResult> {
    synthesize(net, net.dims().d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// The current state is known (state feedback or converged observer).
    StateKnown,
    /// Only the current output is known.
    OutputOnly,
}

/// Two runs from the same state whose next outputs break the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultWitness {
    pub state: usize,
    pub input: usize,
    pub disturbances: [usize; 2],
    pub faults: [usize; 2],
    pub outputs: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultVerification {
    pub verdict: bool,
    pub witness: Option<FaultWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impossible: Option<ImpossibleOutputMap>,
}

/// Exhaustive check of instantaneous detection under `law`.
///
/// `StateKnown`: the disturbance never changes the next output and distinct
/// faults always give distinct next outputs. `OutputOnly`: every faulty
/// next output is impossible after the current output.
pub fn verify_fault_detection(
    net: &BooleanControlNetwork,
    law: &FeedbackLaw,
    mode: DetectionMode,
) -> Result<FaultVerification> {
    law.validate(net)?;
    let out = |u: usize, x: usize, d: usize, f: usize| net.output_of_row(net.next(u, x, net.tail_index(d, f)));
    let (dists, faults) = (net.disturbance_count(), net.fault_count());
    match mode {
        DetectionMode::StateKnown => {
            for x in 1..=net.state_count() {
                let u = law.input_at(net, x);
                for f in 1..=faults {
                    for d in 2..=dists {
                        let (a, b) = (out(u, x, 1, f), out(u, x, d, f));
                        if a != b {
                            let witness = FaultWitness {
                                state: x,
                                input: u,
                                disturbances: [1, d],
                                faults: [f, f],
                                outputs: [a, b],
                            };
                            return Ok(FaultVerification { verdict: false, witness: Some(witness), impossible: None });
                        }
                    }
                }
                for d in 1..=dists {
                    for f1 in 1..=faults {
                        for f2 in f1 + 1..=faults {
                            let (a, b) = (out(u, x, d, f1), out(u, x, d, f2));
                            if a == b {
                                let witness = FaultWitness {
                                    state: x,
                                    input: u,
                                    disturbances: [d, d],
                                    faults: [f1, f2],
                                    outputs: [a, b],
                                };
                                return Ok(FaultVerification {
                                    verdict: false,
                                    witness: Some(witness),
                                    impossible: None,
                                });
                            }
                        }
                    }
                }
            }
            Ok(FaultVerification { verdict: true, witness: None, impossible: None })
        }
        DetectionMode::OutputOnly => {
            let im = impossible_output_sets(net, &apply_feedback(net, law)?)?;
            for x in 1..=net.state_count() {
                let u = law.input_at(net, x);
                let y = net.output_of_state(x);
                for d in 1..=dists {
                    for f in 2..=faults {
                        let b = out(u, x, d, f);
                        if !im.is_impossible(y, b) {
                            let witness = FaultWitness {
                                state: x,
                                input: u,
                                disturbances: [d, d],
                                faults: [NOMINAL, f],
                                outputs: [out(u, x, d, NOMINAL), b],
                            };
                            return Ok(FaultVerification {
                                verdict: false,
                                witness: Some(witness),
                                impossible: Some(im),
                            });
                        }
                    }
                }
            }
            Ok(FaultVerification { verdict: true, witness: None, impossible: Some(im) })
        }
    }
}

/// Observer estimate after an update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObserverState {
    pub possible: Vec<usize>,
    pub last_input: Option<usize>,
    pub reconstructed: bool,
    pub fault_flag: bool,
}

/// How the observer picks the input applied after each observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObserverPolicy {
    /// Minimize the worst-case size of the next estimate; ties go to the
    /// smallest input.
    Auto,
    /// `u = M_y y`.
    OutputFeedback(LogicalMatrix),
    /// Use the logged inputs.
    Open,
}

/// One line of an observation log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub step: usize,
    pub input: Option<usize>,
    pub output: usize,
}

/// Reads `step input output` lines; `-` marks an unknown input and `#`
/// starts a comment.
pub fn parse_observation_log(text: &str) -> Result<Vec<Observation>> {
    let mut out: Vec<Observation> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let syntax = |column: usize, message: String| Error::Syntax { line: i + 1, column, message };
        let fields: Vec<(usize, &str)> =
            line.split_whitespace().map(|f| (f.as_ptr() as usize - line.as_ptr() as usize + 1, f)).collect();
        if fields.len() != 3 {
            return Err(syntax(1, format!("expected `step input output`, got {} fields", fields.len())));
        }
        let num = |(col, f): (usize, &str), what: &str| -> Result<usize> {
            f.parse().map_err(|_| syntax(col, format!("bad {what} `{f}`")))
        };
        let step = num(fields[0], "step")?;
        let input = if fields[1].1 == "-" { None } else { Some(num(fields[1], "input")?) };
        let output = num(fields[2], "output")?;
        if let Some(prev) = out.last() {
            if step != prev.step + 1 {
                return Err(syntax(fields[0].0, format!("step {step} does not follow {}", prev.step)));
            }
        }
        out.push(Observation { step, input, output });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObserverTrace {
    pub states: Vec<ObserverState>,
    /// Index into `states` of the first singleton estimate.
    pub reconstructed_at: Option<usize>,
    /// Index into `states` of the update that found no consistent state.
    pub fault_at: Option<usize>,
}

/// Fault-free successors of a state set under `u`, over every disturbance.
pub fn observer_successors(net: &BooleanControlNetwork, possible: &[usize], u: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &x in possible {
        for d in 1..=net.disturbance_count() {
            out.extend(net.states_of_row(net.next(u, x, net.tail_index(d, NOMINAL))));
        }
    }
    out
}

/// Largest next estimate over the possible next outputs.
fn worst_case(net: &BooleanControlNetwork, possible: &[usize], u: usize) -> usize {
    let mut per_output = vec![0usize; net.output_count()];
    for x in observer_successors(net, possible, u) {
        per_output[net.output_of_state(x) - 1] += 1;
    }
    per_output.into_iter().max().unwrap_or(0)
}

fn best_input(net: &BooleanControlNetwork, possible: &[usize]) -> usize {
    (1..=net.input_count()).min_by_key(|&u| (worst_case(net, possible, u), u)).expect("at least one input")
}

/// Static output feedback for reconstruction: for each output `y`, the
/// input whose successors of `O_s(y)` split into the smallest worst-case
/// estimate.
pub fn reconstruction_feedback(net: &BooleanControlNetwork) -> Result<FeedbackLaw> {
    net.require_h()?;
    let sets = net.output_sets();
    let cols = (1..=net.output_count()).map(|y| best_input(net, sets.get(y))).collect();
    Ok(FeedbackLaw::output(LogicalMatrix::new(net.input_count(), cols)?))
}

/// Replays `log` through the observer. The run stops at the first empty
/// intersection, which sets the fault flag and keeps the last estimate.
pub fn observer_run(
    net: &BooleanControlNetwork,
    policy: &ObserverPolicy,
    log: &[Observation],
) -> Result<ObserverTrace> {
    let first = log.first().ok_or_else(|| Error::InconsistentTrace { step: 0, message: "empty log".into() })?;
    let p = net.output_count();
    for o in log {
        if o.output == 0 || o.output > p {
            return Err(Error::IndexOutOfRange { what: "output", index: o.output, bound: p });
        }
        if let Some(u) = o.input {
            if u == 0 || u > net.input_count() {
                return Err(Error::IndexOutOfRange { what: "input", index: u, bound: net.input_count() });
            }
        }
    }
    if let ObserverPolicy::OutputFeedback(m) = policy {
        FeedbackLaw::output(m.clone()).validate(net)?;
    }
    let mut possible: Vec<usize> = net.output_sets().get(first.output).to_vec();
    let state = |possible: &[usize], last_input, fault_flag| ObserverState {
        possible: possible.to_vec(),
        last_input,
        reconstructed: possible.len() == 1,
        fault_flag,
    };
    let mut trace = ObserverTrace {
        states: vec![state(&possible, None, possible.is_empty())],
        reconstructed_at: None,
        fault_at: None,
    };
    if possible.is_empty() {
        trace.fault_at = Some(0);
        return Ok(trace);
    }
    if possible.len() == 1 {
        trace.reconstructed_at = Some(0);
    }
    for (k, pair) in log.windows(2).enumerate() {
        let (now, next) = (pair[0], pair[1]);
        let chosen = match policy {
            ObserverPolicy::Auto => Some(best_input(net, &possible)),
            ObserverPolicy::OutputFeedback(m) => Some(m.col(now.output)),
            ObserverPolicy::Open => None,
        };
        let u = match (chosen, now.input) {
            (Some(c), Some(given)) if c != given => {
                return Err(Error::InconsistentTrace {
                    step: now.step,
                    message: format!("policy selects input {c}, log has {given}"),
                })
            }
            (Some(c), _) => c,
            (None, Some(given)) => given,
            (None, None) => {
                return Err(Error::InconsistentTrace {
                    step: now.step,
                    message: "input unknown under open policy".into(),
                })
            }
        };
        let outs = net.output_sets();
        let allowed: BTreeSet<usize> = outs.get(next.output).iter().copied().collect();
        let estimate: Vec<usize> = observer_successors(net, &possible, u).intersection(&allowed).copied().collect();
        if estimate.is_empty() {
            trace.states.push(state(&possible, Some(u), true));
            trace.fault_at = Some(k + 1);
            return Ok(trace);
        }
        possible = estimate;
        trace.states.push(state(&possible, Some(u), false));
        if possible.len() == 1 && trace.reconstructed_at.is_none() {
            trace.reconstructed_at = Some(k + 1);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, InputSource};
    use crate::fixtures;
    use crate::network::{Dims, SignalOrder};
    use crate::stp::decode_index;
    use proptest::prelude::*;

    fn d(rows: usize, cols: &[usize]) -> LogicalMatrix {
        LogicalMatrix::delta(rows, cols)
    }

    #[test]
    fn reflective_examples() {
        assert!(reflective_check(&d(2, &[1, 2, 1, 2]), 1, 0).unwrap());
        assert!(!reflective_check(&d(2, &[1, 1, 2, 2]), 1, 0).unwrap());
        assert!(reflective_check(&d(2, &[1, 2, 1, 2]), 0, 1).unwrap());
        assert!(!reflective_check(&d(2, &[1, 2, 2, 1]), 0, 1).unwrap());
        assert!(reflective_check(&d(2, &[1, 2, 1]), 0, 0).is_err());
        assert!(reflective_check(&d(2, &[1, 2]), 1, 1).is_err());
    }

    /// Variables `r+1..=r+s` never change the value; the rest are jointly
    /// reflective. Checked on explicit assignments.
    fn brute_force(m_g: &LogicalMatrix, r: usize, s: usize) -> bool {
        let n = log2_exact(m_g.ncols()).unwrap();
        let index = |bits: &[bool]| bits.iter().fold(0, |acc, &b| acc * 2 + usize::from(!b)) + 1;
        let value = |bits: &[bool]| m_g.col(index(bits));
        let all: Vec<Vec<bool>> = (1..=pow2(n)).map(|i| decode_index(i, n)).collect();
        all.iter().all(|a| {
            all.iter().all(|b| {
                let same_fixed = a[..r] == b[..r];
                let same_tail = a[r + s..] == b[r + s..];
                if !same_fixed {
                    return true;
                }
                if same_tail {
                    value(a) == value(b)
                } else {
                    // Different reflective parts under any redundant values.
                    value(a) != value(b)
                }
            })
        })
    }

    proptest! {
        #[test]
        fn reflective_check_matches_definition(
            n in 1usize..=4,
            k in 1usize..=3,
            seed in any::<u64>(),
            split in any::<(u8, u8)>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = split.0 as usize % (n + 1);
            let s = split.1 as usize % (n - r + 1);
            let rows = pow2(k);
            // Bias towards structured matrices so both verdicts occur.
            let cols: Vec<usize> = if rng.gen_bool(0.5) {
                let width = pow2(n - r - s);
                let mut cols = Vec::new();
                for _ in 0..pow2(r) {
                    let sub: Vec<usize> = (0..width).map(|_| rng.gen_range(1..=rows)).collect();
                    for _ in 0..pow2(s) {
                        cols.extend(&sub);
                    }
                }
                cols
            } else {
                (0..pow2(n)).map(|_| rng.gen_range(1..=rows)).collect()
            };
            let m = d(rows, &cols);
            prop_assert_eq!(reflective_check(&m, r, s).unwrap(), brute_force(&m, r, s));
        }
    }

    fn closed_two_layer() -> BooleanControlNetwork {
        fixtures::two_layer().with_output(d(2, &[1, 1, 2, 2])).unwrap()
    }

    #[test]
    fn impossible_sets() {
        let net = closed_two_layer();
        let lt = d(4, &[3, 4, 3, 4, 4, 4, 3, 3]);
        let im = impossible_output_sets(&net, &lt).unwrap();
        assert_eq!(im.get(1), &[1]);
        assert_eq!(im.get(2), &[1]);

        let id = BooleanControlNetwork::control(2, 0, d(4, &[1, 2, 3, 4]), None).unwrap();
        let im = impossible_output_sets(&id, id.l()).unwrap();
        assert_eq!(im.sets, vec![vec![2, 3, 4], vec![1, 3, 4], vec![1, 2, 4], vec![1, 2, 3]]);

        let wide = BooleanControlNetwork::new(
            Dims::new(1, 0).with_disturbance(1),
            SignalOrder::default(),
            d(2, &[1, 2, 1, 2]),
            None,
        )
        .unwrap();
        let im = impossible_output_sets(&wide, wide.l()).unwrap();
        assert!(im.sets.iter().all(Vec::is_empty));
        assert!(impossible_output_sets(&net, &d(4, &[1, 2])).is_err());
    }

    #[test]
    fn fault_detection_sets() {
        let net = fixtures::fault_detection();
        let r = ifd_synthesize(&net).unwrap();
        assert!(r.feasible);
        let expected: Vec<Vec<usize>> =
            vec![vec![1, 2, 3, 4], vec![1, 3], vec![1, 3], vec![1, 3], vec![3, 4], vec![2], vec![1], vec![3, 4]];
        assert_eq!(r.candidates.sets, expected);
        assert_eq!(r.controller_count().to_string(), "128");
        let given = d(4, &[4, 3, 3, 3, 4, 2, 1, 4]);
        assert!(r.candidates.contains(&given));
        let v = verify_fault_detection(&net, &FeedbackLaw::state(given), DetectionMode::StateKnown).unwrap();
        assert!(v.verdict, "{v:?}");
        for m in r.candidates.iter() {
            assert!(verify_fault_detection(&net, &FeedbackLaw::state(m), DetectionMode::StateKnown).unwrap().verdict);
        }
    }

    #[test]
    fn collapsed_sub_block_is_caught() {
        let net = fixtures::fault_detection();
        let bad = d(4, &[4, 3, 3, 3, 4, 1, 1, 4]);
        let v = verify_fault_detection(&net, &FeedbackLaw::state(bad), DetectionMode::StateKnown).unwrap();
        assert!(!v.verdict);
        let w = v.witness.unwrap();
        assert_eq!((w.state, w.input, w.faults, w.outputs), (6, 1, [1, 2], [1, 1]));
    }

    #[test]
    fn dd_fault_detection_sets() {
        let net = fixtures::dd_with_fault_detection();
        let r = dd_ifd_synthesize(&net).unwrap();
        assert_eq!(r.candidates.sets, vec![vec![1], vec![1, 3], vec![3], vec![4]]);
        let all = r.candidates.all(16).unwrap();
        assert_eq!(all, vec![d(4, &[1, 1, 3, 4]), d(4, &[1, 3, 3, 4])]);
        let map = FaultOutputMap::new(&net);
        for m in all {
            for x in 1..=4 {
                assert!(map.is_injective(x, m.col(x)));
            }
            assert!(verify_fault_detection(&net, &FeedbackLaw::state(m), DetectionMode::StateKnown).unwrap().verdict);
        }
        assert!(ifd_synthesize(&net).is_err());
    }

    #[test]
    fn degenerate_and_infeasible_cases() {
        // No disturbance: combined synthesis equals plain fault detection.
        let net = fixtures::fault_detection();
        assert_eq!(dd_ifd_synthesize(&net).unwrap(), ifd_synthesize(&net).unwrap());

        // Constant sub-block 1 under every input.
        let flat = BooleanControlNetwork::new(
            Dims::new(1, 1).with_fault(1),
            SignalOrder::default(),
            d(2, &[1, 1, 1, 2, 2, 2, 1, 2]),
            None,
        )
        .unwrap();
        let r = ifd_synthesize(&flat).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.diagnostics.iter().map(|x| x.substate).collect::<Vec<_>>(), vec![1]);

        // Input 1 separates faults everywhere.
        let uniform = BooleanControlNetwork::new(
            Dims::new(1, 1).with_fault(1),
            SignalOrder::default(),
            d(2, &[1, 2, 2, 1, 1, 1, 2, 2]),
            None,
        )
        .unwrap();
        assert!(ifd_synthesize(&uniform).unwrap().candidates.sets.iter().all(|s| s.contains(&1)));

        // No faults: identical width-1 divisions are the rank-one condition.
        let dd = BooleanControlNetwork::new(
            Dims::new(1, 1).with_disturbance(1),
            SignalOrder::default(),
            d(2, &[1, 1, 1, 2, 2, 2, 2, 2]),
            None,
        )
        .unwrap();
        assert_eq!(dd_ifd_synthesize(&dd).unwrap().candidates.sets, vec![vec![1, 2], vec![2]]);
        assert!(ifd_synthesize(&dd).is_err());
    }

    #[test]
    fn output_only_detection() {
        // Fault-free: state 1 → 2 → 1; the fault sends both states to 1.
        let net = BooleanControlNetwork::new(
            Dims::new(1, 1).with_fault(1),
            SignalOrder::default(),
            d(2, &[2, 1, 1, 1, 2, 2, 1, 2]),
            None,
        )
        .unwrap();
        let law = FeedbackLaw::pinning(2, 1).unwrap();
        let v = verify_fault_detection(&net, &law, DetectionMode::OutputOnly).unwrap();
        assert!(!v.verdict);
        let w = v.witness.unwrap();
        assert_eq!((w.state, w.outputs), (2, [1, 1]));
        assert_eq!(v.impossible.unwrap().sets, vec![vec![1], vec![2]]);

        let swap = BooleanControlNetwork::new(
            Dims::new(1, 1).with_fault(1),
            SignalOrder::default(),
            d(2, &[2, 1, 1, 2, 1, 1, 1, 1]),
            None,
        )
        .unwrap();
        assert!(verify_fault_detection(&swap, &law, DetectionMode::OutputOnly).unwrap().verdict);
    }

    #[test]
    fn disturbance_changing_output_fails_state_known() {
        let net = fixtures::dd_with_fault_detection();
        let v =
            verify_fault_detection(&net, &FeedbackLaw::state(d(4, &[2, 1, 3, 4])), DetectionMode::StateKnown).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.state, w.disturbances, w.faults, w.outputs), (1, [1, 2], [2, 2], [3, 2]));
    }

    fn log(pairs: &[(Option<usize>, usize)]) -> Vec<Observation> {
        pairs.iter().enumerate().map(|(k, &(input, output))| Observation { step: k, input, output }).collect()
    }

    #[test]
    fn observer_examples() {
        // H a permutation: the first output identifies the state.
        let net =
            BooleanControlNetwork::control(2, 1, d(4, &[2, 3, 4, 1, 1, 1, 1, 1]), Some(d(4, &[3, 1, 4, 2]))).unwrap();
        let t = observer_run(&net, &ObserverPolicy::Auto, &log(&[(None, 1)])).unwrap();
        assert_eq!(t.states[0].possible, vec![2]);
        assert_eq!(t.reconstructed_at, Some(0));

        let reach = fixtures::two_output_reach();
        let t = observer_run(&reach, &ObserverPolicy::Open, &log(&[(Some(1), 2), (None, 1)])).unwrap();
        assert_eq!(t.states[0].possible, vec![1, 3]);
        assert_eq!(t.states[1].possible, vec![2, 4]);
        assert!(!t.states[1].reconstructed);

        let closed = closed_two_layer().closed_loop(d(4, &[3, 4, 3, 4, 4, 4, 3, 3])).unwrap();
        let t = observer_run(&closed, &ObserverPolicy::Open, &log(&[(Some(1), 1), (None, 1)])).unwrap();
        assert!(t.states[1].fault_flag);
        assert_eq!(t.fault_at, Some(1));
        assert_eq!(t.states[1].possible, vec![1, 2]);
    }

    #[test]
    fn observer_policy_conflicts() {
        let reach = fixtures::two_output_reach();
        let m = d(2, &[2, 2]);
        let err = observer_run(&reach, &ObserverPolicy::OutputFeedback(m), &log(&[(Some(1), 2), (None, 1)]));
        assert!(matches!(err, Err(Error::InconsistentTrace { step: 0, .. })));
        let err = observer_run(&reach, &ObserverPolicy::Open, &log(&[(None, 2), (None, 1)]));
        assert!(matches!(err, Err(Error::InconsistentTrace { .. })));
        assert!(observer_run(&reach, &ObserverPolicy::Auto, &[]).is_err());
        let law = reconstruction_feedback(&reach).unwrap();
        assert_eq!(law.m.ncols(), 2);
    }

    #[test]
    fn log_parsing() {
        let text = "# step input output\n0 1 2\n1 - 1  # tail comment\n\n2 2 2\n";
        let obs = parse_observation_log(text).unwrap();
        assert_eq!(obs.len(), 3);
        assert_eq!(obs[1], Observation { step: 1, input: None, output: 1 });
        assert!(matches!(parse_observation_log("0 1\n"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_observation_log("0 1 1\n2 1 1\n"), Err(Error::Syntax { line: 2, column: 1, .. })));
        assert!(matches!(parse_observation_log("0 x 1\n"), Err(Error::Syntax { column: 3, .. })));
    }

    fn fault_free_words(net: &BooleanControlNetwork, len: usize) -> Vec<Vec<usize>> {
        let dn = net.disturbance_count();
        (0..dn.pow(len as u32)).map(|w| (0..len).map(|k| (w / dn.pow(k as u32)) % dn + 1).collect()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn observer_is_sound(n in 1usize..=3, m in 0usize..=1, dist in 0usize..=1, p in 1usize..=2, seed in any::<u64>()) {
            let net = fixtures::random_network(Dims::new(n, m).with_disturbance(dist).with_outputs(p.min(n)), seed);
            let horizon = 3;
            for x0 in 1..=net.state_count() {
                for word in fault_free_words(&net, horizon) {
                    let inputs: Vec<usize> = (0..horizon).map(|k| (x0 + k) % net.input_count() + 1).collect();
                    let tr = simulate(&net, x0, &InputSource::Sequence(inputs.clone()), &word, &[], horizon).unwrap();
                    let obs: Vec<Observation> = (0..=horizon)
                        .map(|k| Observation { step: k, input: inputs.get(k).copied(), output: tr.outputs[k] })
                        .collect();
                    let t = observer_run(&net, &ObserverPolicy::Open, &obs).unwrap();
                    prop_assert_eq!(t.fault_at, None);
                    for (k, st) in t.states.iter().enumerate() {
                        prop_assert!(st.possible.contains(&tr.states[k]));
                        prop_assert_eq!(st.reconstructed, st.possible.len() == 1);
                    }
                }
            }
        }

        #[test]
        fn observer_flags_faults_once_reconstructed(seed in any::<u64>(), n in 1usize..=2) {
            // Outputs identify states, so the estimate is exact from step 0.
            let net = fixtures::random_network(Dims::new(n, 1).with_fault(1).with_outputs(n), seed);
            let h = d(pow2(n), &(1..=pow2(n)).collect::<Vec<_>>());
            let net = net.with_output(h).unwrap();
            let r = ifd_synthesize(&net).unwrap();
            prop_assume!(r.feasible);
            let law = r.sample.unwrap();
            for x0 in 1..=net.state_count() {
                for at in 0..2 {
                    let faults: Vec<usize> = (0..3).map(|k| if k == at { 2 } else { 1 }).collect();
                    let tr = simulate(&net, x0, &InputSource::Feedback(law.clone()), &[], &faults, 3).unwrap();
                    let obs: Vec<Observation> = (0..=3)
                        .map(|k| Observation { step: k, input: tr.inputs.get(k).copied(), output: tr.outputs[k] })
                        .collect();
                    let t = observer_run(&net, &ObserverPolicy::Open, &obs).unwrap();
                    prop_assert_eq!(t.fault_at, Some(at + 1));
                }
            }
        }

        #[test]
        fn synthesis_is_sound_and_complete(
            n in 1usize..=2,
            m in 0usize..=1,
            dist in 0usize..=1,
            p in 0usize..=2,
            seed in any::<u64>(),
        ) {
            let dims = Dims::new(n, m).with_disturbance(dist).with_fault(1).with_outputs(p.min(n));
            let net = fixtures::random_network(dims, seed);
            let r = dd_ifd_synthesize(&net).unwrap();
            let map = FaultOutputMap::new(&net);
            let all_controllers = ControlCandidateSets::per_state(
                &net,
                vec![(1..=net.input_count()).collect(); net.state_count()],
            );
            for mx in all_controllers.iter() {
                let ok = verify_fault_detection(&net, &FeedbackLaw::state(mx.clone()), DetectionMode::StateKnown)
                    .unwrap()
                    .verdict;
                prop_assert_eq!(ok, r.candidates.contains(&mx));
                if ok {
                    for x in 1..=net.state_count() {
                        prop_assert!(map.is_injective(x, mx.col(x)));
                    }
                }
            }
        }
    }
}
