// Decoupling the disturbance while still detecting faults.

use std::error::Error;

use bcn::dynamics::FeedbackLaw;
use bcn::fault::{dd_ifd_synthesize, verify_fault_detection, DetectionMode, FaultOutputMap};
use bcn::fixtures;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::dd_with_fault_detection();
    let r = dd_ifd_synthesize(&net)?;
    println!("C_j: {:?}", r.candidates.sets);
    let map = FaultOutputMap::new(&net);
    for m in r.candidates.all(16)? {
        let law = FeedbackLaw::state(m);
        let v = verify_fault_detection(&net, &law, DetectionMode::StateKnown)?;
        let injective = (1..=net.state_count()).all(|x| map.is_injective(x, law.input_at(&net, x)));
        println!("M_x = {:?}: verified {} injective {}", law.m.cols(), v.verdict, injective);
        if !v.verdict || !injective {
            return Err("emitted controller fails".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
