// Output feedback: stabilization to a given closed loop and disturbance
// decoupling when only outputs are measured.

use std::error::Error;

use bcn::decoupling::{dd_output_feedback_synthesize, stabilization_synthesize, BlockCriterion, StabilizationTarget};
use bcn::dynamics::apply_feedback;
use bcn::equivalence::DEFAULT_SEARCH_BUDGET;
use bcn::fixtures;
use bcn::LogicalMatrix;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::output_stabilization();
    let target = StabilizationTarget::Behavior(LogicalMatrix::delta(8, &[2, 3, 3, 4, 5, 5, 3, 3]));
    let laws = stabilization_synthesize(&net, &target, DEFAULT_SEARCH_BUDGET)?;
    for l in &laws {
        println!("M_y = {:?}", l.m.cols());
    }

    let net = fixtures::unreachable_behavior();
    let target = StabilizationTarget::Behavior(LogicalMatrix::delta(8, &fixtures::UNREACHABLE_BEHAVIOR));
    let laws = stabilization_synthesize(&net, &target, DEFAULT_SEARCH_BUDGET)?;
    println!("unreachable target: {} laws", laws.len());

    for net in [fixtures::output_feedback_dd_coarse(), fixtures::output_feedback_dd_fine()] {
        let laws = dd_output_feedback_synthesize(&net, BlockCriterion::BlockRank, DEFAULT_SEARCH_BUDGET)?;
        for l in &laws {
            println!("{}: M_y = {:?} -> {:?}", net.name(), l.m.cols(), apply_feedback(&net, l)?.cols());
        }
        if !laws
            .iter()
            .any(|l| apply_feedback(&net, l).map(|lt| lt.cols() == fixtures::OUTPUT_DD_CLOSED_LOOP).unwrap_or(false))
        {
            return Err("expected closed loop missing".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
