// The other decoupling modes: mapping, invariant and the reachability
// variants towards a target output.

use std::error::Error;

use bcn::decoupling::{dd_synthesize, DdMode};
use bcn::fixtures;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::dd_modes();
    for (name, mode) in [
        ("mapping", DdMode::Mapping),
        ("invariant", DdMode::Invariant),
        ("clean reach of y=1", DdMode::CleanReach(1)),
        ("definite reach of y=1", DdMode::DefiniteReach(1)),
        ("indefinite reach of y=1", DdMode::IndefiniteReach(1)),
    ] {
        let r = dd_synthesize(&net, mode)?;
        println!("{name}: feasible {} sets {:?} count {}", r.feasible, r.candidates.sets, r.controller_count());
        for d in &r.diagnostics {
            println!("  slot {}: {}", d.substate, d.reason);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
