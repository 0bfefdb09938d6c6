// From update rules to the algebraic form `x(t+1) = L u x`.

use std::error::Error;

use bcn::network::{compile_algebraic_form, write_network_file, UpdateRuleSet};
use bcn::{Dims, LogicalMatrix, SignalOrder};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rules = UpdateRuleSet::new(["x2", "!x1"]);
    let net = compile_algebraic_form(&rules, Dims::new(2, 0), SignalOrder::default())?;
    println!("L = {:?}", net.l().cols());
    if net.l() != &LogicalMatrix::delta(4, &[2, 4, 1, 3]) {
        return Err("unexpected L".into());
    }

    // With an input and an output reading x1.
    let rules = UpdateRuleSet::new(["u1 & x2", "x1 | !x2"]).with_outputs(["x1"]);
    let net = compile_algebraic_form(&rules, Dims::new(2, 1), SignalOrder::default())?;
    println!("{}", write_network_file(&net));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
