// Fixed points, cycles and basins of a closed loop.

use std::error::Error;

use bcn::dynamics::{apply_feedback, attractors, FeedbackLaw};
use bcn::fixtures;
use bcn::{BooleanNetwork, LogicalMatrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // A 3-cycle and a fixed point on four states.
    let bn = BooleanNetwork::new(LogicalMatrix::delta(4, &[2, 3, 1, 4]))?;
    let r = attractors(&bn)?;
    for a in &r.attractors {
        println!("attractor {a:?}");
    }
    if r.attractors.len() != 2 {
        return Err("expected two attractors".into());
    }

    let net = fixtures::output_stabilization();
    let lt = apply_feedback(&net, &FeedbackLaw::output(LogicalMatrix::delta(4, &[1, 3, 4, 2])))?;
    let r = attractors(&BooleanNetwork::new(lt.clone())?)?;
    println!("closed loop {:?}: {:?}", lt.cols(), r.attractors);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
