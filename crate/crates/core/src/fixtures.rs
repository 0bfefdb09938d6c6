//! Small reference networks with hand-checked results, shared by the tests,
//! the runnable examples and the JSON files under `fixtures/`.
//!
//! Each constructor documents the quantities it is known to reproduce.

use crate::network::{BooleanControlNetwork, Dims, SignalOrder};
use crate::stp::{pow2, LogicalMatrix};

fn build(
    dims: Dims,
    order: SignalOrder,
    l: LogicalMatrix,
    h: Option<LogicalMatrix>,
    name: &str,
) -> BooleanControlNetwork {
    BooleanControlNetwork::new(dims, order, l, h).expect("fixture is well formed").with_name(name)
}

const STABILIZE_L: [usize; 32] =
    [2, 3, 4, 4, 6, 7, 8, 4, 1, 4, 3, 5, 4, 2, 3, 3, 1, 1, 3, 4, 5, 2, 7, 8, 3, 3, 4, 4, 5, 5, 7, 7];

/// `n = 3, m = 2`, four outputs. `M_y = δ_4[1 3 4 2]` closes the loop to
/// `δ_8[2 3 3 4 5 5 3 3]`.
pub fn output_stabilization() -> BooleanControlNetwork {
    build(
        Dims::new(3, 2).with_outputs(2),
        SignalOrder::default(),
        LogicalMatrix::delta(8, &STABILIZE_L),
        Some(LogicalMatrix::delta(4, &[1, 1, 2, 2, 3, 3, 4, 4])),
        "output_stabilization",
    )
}

/// `n = 3, m = 1`, output reads `x3`. `M_y = δ_2[2 1]` gives
/// `δ_8[1 3 3 4 4 7 3 4]`.
pub fn single_input_stabilization() -> BooleanControlNetwork {
    build(
        Dims::new(3, 1).with_outputs(1),
        SignalOrder::default(),
        LogicalMatrix::delta(8, &[2, 3, 4, 4, 6, 7, 8, 4, 1, 4, 3, 5, 4, 2, 3, 3]),
        Some(LogicalMatrix::delta(2, &[1, 2, 1, 2, 1, 2, 1, 2])),
        "single_input_stabilization",
    )
}

/// Same dynamics as [`output_stabilization`] with a coarser output map;
/// [`UNREACHABLE_BEHAVIOR`] is not achievable by any output feedback.
pub fn unreachable_behavior() -> BooleanControlNetwork {
    build(
        Dims::new(3, 2).with_outputs(2),
        SignalOrder::default(),
        LogicalMatrix::delta(8, &STABILIZE_L),
        Some(LogicalMatrix::delta(4, &[1, 3, 4, 1, 2, 3, 1, 4])),
        "unreachable_behavior",
    )
}

/// Target closed loop for [`unreachable_behavior`].
pub const UNREACHABLE_BEHAVIOR: [usize; 8] = [3, 3, 3, 5, 6, 7, 3, 3];

/// `n = s = 2, m = 1, d = 1`, outputs `O_1 = {2,4}`, `O_2 = {1,3}`.
/// Input 1 lands in `{2,4}` from everywhere.
pub fn two_output_reach() -> BooleanControlNetwork {
    build(
        Dims::new(2, 1).with_disturbance(1).with_outputs(1),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &[2, 4, 2, 4, 2, 4, 4, 2, 3, 4, 4, 1, 4, 3, 4, 3]),
        Some(LogicalMatrix::delta(2, &[2, 1, 2, 1])),
        "two_output_reach",
    )
}

/// `n = 3, s = 2, m = 2, d = 1`, subsystem matrix over the first two
/// variables. Mapping-mode sets `{4} {2} {1,3} {2,4}`.
pub fn dd_modes() -> BooleanControlNetwork {
    #[rustfmt::skip]
    let l = [
        1, 2, 1, 2, 3, 4, 3, 4, 2, 4, 4, 4, 3, 1, 3, 2,
        2, 3, 2, 2, 4, 2, 4, 2, 1, 3, 4, 1, 3, 3, 3, 1,
        1, 4, 1, 2, 3, 4, 3, 4, 1, 3, 3, 1, 3, 2, 2, 1,
        2, 4, 2, 2, 4, 1, 4, 4, 1, 3, 3, 2, 4, 4, 4, 2,
    ];
    build(
        Dims::new(3, 2).with_disturbance(1).with_outputs(1).with_substate(2),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &l),
        Some(LogicalMatrix::delta(2, &[2, 1, 2, 1])),
        "dd_modes",
    )
}

/// `n = s = 2, m = 1, d = 1`. Layers `{3,4}`, `{1,2}`; `M_x = δ_2[2 1 2 1]`.
pub fn two_layer() -> BooleanControlNetwork {
    build(
        Dims::new(2, 1).with_disturbance(1),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &[1, 2, 3, 4, 1, 2, 3, 3, 3, 4, 1, 3, 4, 4, 2, 3]),
        None,
        "two_layer",
    )
}

/// `n = s = 2, m = 1, d = 1`. Layers `{3}`, `{1,2}`, `{4}`; `M_x = δ_2[1 2 2 1]`.
pub fn three_layer() -> BooleanControlNetwork {
    build(
        Dims::new(2, 1).with_disturbance(1),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &[3, 3, 3, 4, 1, 2, 1, 2, 3, 4, 3, 3, 3, 3, 2, 4]),
        None,
        "three_layer",
    )
}

/// Closed-loop subsystem over `x1 … x4` with `s = 2`: no sub-block has rank
/// one, yet every sub-block stays inside a single output group.
pub fn output_equation_only() -> BooleanControlNetwork {
    build(
        Dims::new(4, 0).with_outputs(1).with_substate(2),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &[1, 3, 1, 1, 2, 4, 4, 2, 3, 1, 3, 3, 2, 2, 2, 4]),
        Some(LogicalMatrix::delta(2, &[1, 2, 1, 2])),
        "output_equation_only",
    )
}

const OUTPUT_DD_L: [usize; 32] =
    [2, 2, 4, 4, 6, 6, 8, 8, 1, 4, 3, 5, 4, 2, 3, 3, 1, 1, 3, 4, 5, 5, 8, 8, 3, 3, 4, 4, 5, 5, 7, 7];

/// `n = 3, m = 1, d = 1`, one output reading `x1`. `M_y = δ_2[1 2]`
/// decouples the disturbance.
pub fn output_feedback_dd_coarse() -> BooleanControlNetwork {
    build(
        Dims::new(3, 1).with_disturbance(1).with_outputs(1).with_substate(1),
        SignalOrder::default(),
        LogicalMatrix::delta(8, &OUTPUT_DD_L),
        Some(LogicalMatrix::delta(2, &[1, 1, 1, 1, 2, 2, 2, 2])),
        "output_feedback_dd_coarse",
    )
}

/// As [`output_feedback_dd_coarse`] with outputs reading `x1, x2`;
/// `M_y = δ_2[1 1 2 2]` yields the same closed loop.
pub fn output_feedback_dd_fine() -> BooleanControlNetwork {
    build(
        Dims::new(3, 1).with_disturbance(1).with_outputs(2).with_substate(2),
        SignalOrder::default(),
        LogicalMatrix::delta(8, &OUTPUT_DD_L),
        Some(LogicalMatrix::delta(4, &[1, 1, 2, 2, 3, 3, 4, 4])),
        "output_feedback_dd_fine",
    )
}

/// Decoupled closed loop shared by both output-feedback variants.
pub const OUTPUT_DD_CLOSED_LOOP: [usize; 16] = [2, 2, 4, 4, 6, 6, 8, 8, 3, 3, 4, 4, 5, 5, 7, 7];

/// `n = 3, s = 2, m = 2, t = 1`. Fault-detection sets
/// `{1,2,3,4} {1,3} {1,3} {1,3} {3,4} {2} {1} {3,4}`, 128 controllers.
pub fn fault_detection() -> BooleanControlNetwork {
    #[rustfmt::skip]
    let l = [
        1, 2, 1, 2, 3, 4, 3, 4, 1, 1, 1, 1, 3, 1, 3, 3,
        2, 3, 2, 2, 4, 4, 4, 4, 1, 1, 1, 2, 3, 3, 3, 3,
        1, 4, 1, 2, 3, 4, 3, 4, 1, 3, 1, 1, 3, 3, 4, 3,
        2, 4, 2, 2, 4, 4, 4, 4, 1, 3, 1, 1, 3, 3, 3, 4,
    ];
    build(
        Dims::new(3, 2).with_fault(1).with_substate(2),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &l),
        None,
        "fault_detection",
    )
}

/// `n = s = 2, m = 2, d = 1, t = 1`, order `u x d f`. Exactly two
/// controllers decouple the disturbance and detect the fault.
pub fn dd_with_fault_detection() -> BooleanControlNetwork {
    #[rustfmt::skip]
    let l = [
        1, 2, 1, 2, 3, 4, 3, 4, 1, 1, 1, 1, 3, 3, 3, 3,
        2, 3, 2, 2, 4, 4, 4, 4, 1, 1, 1, 1, 3, 3, 3, 3,
        1, 4, 1, 2, 3, 4, 3, 4, 1, 3, 1, 3, 3, 3, 3, 3,
        2, 4, 2, 2, 4, 4, 4, 4, 1, 3, 1, 1, 2, 4, 2, 4,
    ];
    build(
        Dims::new(2, 2).with_disturbance(1).with_fault(1),
        SignalOrder::DisturbanceFirst,
        LogicalMatrix::delta(4, &l),
        None,
        "dd_with_fault_detection",
    )
}

/// `n = 3, s = 2, m = 2, d = 1`. Layers `{2,3,4}`, `{1}`; 1024 controllers.
pub fn partial_two_layer() -> BooleanControlNetwork {
    #[rustfmt::skip]
    let l = [
        1, 2, 1, 2, 3, 4, 3, 4, 2, 2, 2, 2, 3, 3, 3, 3,
        2, 3, 2, 2, 4, 4, 4, 4, 1, 1, 1, 1, 3, 3, 3, 3,
        1, 4, 1, 2, 3, 4, 3, 4, 1, 3, 1, 1, 3, 3, 3, 3,
        2, 4, 2, 2, 4, 4, 4, 4, 1, 3, 1, 1, 3, 3, 3, 3,
    ];
    build(
        Dims::new(3, 2).with_disturbance(1).with_substate(2),
        SignalOrder::default(),
        LogicalMatrix::delta(4, &l),
        None,
        "partial_two_layer",
    )
}

/// Uniformly random network of shape `dims`, reproducible from `seed`.
/// `L` has `2^s` rows when `s < n`; `H` is drawn over substates when `p > 0`.
pub fn random_network(dims: Dims, seed: u64) -> BooleanControlNetwork {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dims = Dims { s: if dims.s == 0 { dims.n } else { dims.s }, ..dims };
    let rows = pow2(dims.s);
    let cols = (0..pow2(dims.m + dims.n + dims.d + dims.t)).map(|_| rng.gen_range(1..=rows)).collect();
    let h = (dims.p > 0).then(|| {
        let cols = (0..rows).map(|_| rng.gen_range(1..=pow2(dims.p))).collect();
        LogicalMatrix::new(pow2(dims.p), cols).expect("in range")
    });
    let l = LogicalMatrix::new(rows, cols).expect("in range");
    build(dims, SignalOrder::default(), l, h, "random")
}

/// Every fixture with its file stem.
pub fn all() -> Vec<(&'static str, BooleanControlNetwork)> {
    vec![
        ("output_stabilization", output_stabilization()),
        ("single_input_stabilization", single_input_stabilization()),
        ("unreachable_behavior", unreachable_behavior()),
        ("two_output_reach", two_output_reach()),
        ("dd_modes", dd_modes()),
        ("two_layer", two_layer()),
        ("three_layer", three_layer()),
        ("output_equation_only", output_equation_only()),
        ("output_feedback_dd_coarse", output_feedback_dd_coarse()),
        ("output_feedback_dd_fine", output_feedback_dd_fine()),
        ("fault_detection", fault_detection()),
        ("dd_with_fault_detection", dd_with_fault_detection()),
        ("partial_two_layer", partial_two_layer()),
    ]
}
