// Controllers under which every fault shows up in the next output.

use std::error::Error;

use bcn::dynamics::FeedbackLaw;
use bcn::fault::{ifd_synthesize, verify_fault_detection, DetectionMode};
use bcn::fixtures;
use bcn::LogicalMatrix;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::fault_detection();
    let r = ifd_synthesize(&net)?;
    println!("C_j: {:?}", r.candidates.sets);
    println!("{} controllers", r.controller_count());

    let law = FeedbackLaw::state(LogicalMatrix::delta(4, &[4, 3, 3, 3, 4, 2, 1, 4]));
    let v = verify_fault_detection(&net, &law, DetectionMode::StateKnown)?;
    println!("δ_4[4 3 3 3 4 2 1 4] detects every fault: {}", v.verdict);

    let bad = FeedbackLaw::state(LogicalMatrix::delta(4, &[1; 8]));
    let v = verify_fault_detection(&net, &bad, DetectionMode::StateKnown)?;
    println!("constant u=1: {} witness {:?}", v.verdict, v.witness);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
