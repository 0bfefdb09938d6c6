// Decoupling in finite iteration: layers, candidate sets, a sample
// controller and an exhaustive check of it.

use std::error::Error;

use bcn::decoupling::{dd_synthesize, verify_dd, DdMode};
use bcn::dynamics::{apply_feedback, closed_loop_power};
use bcn::fixtures;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::two_layer();
    let r = dd_synthesize(&net, DdMode::Iteration)?;
    let layers = r.layers.as_ref().ok_or("no layers")?;
    println!("layers {:?}", layers.layers);
    println!("sets {:?}", r.candidates.sets);
    let law = r.sample.clone().ok_or("no controller")?;
    let lt = apply_feedback(&net, &law)?;
    println!("M_x = {:?}  closed loop {:?}", law.m.cols(), lt.cols());
    if lt.cols() != [3, 4, 3, 4, 4, 4, 3, 3] {
        return Err("unexpected closed loop".into());
    }

    let net = fixtures::three_layer();
    let r = dd_synthesize(&net, DdMode::Iteration)?;
    let law = r.sample.ok_or("no controller")?;
    let lt = apply_feedback(&net, &law)?;
    println!("three layers: M_x = {:?}, L² = {:?}", law.m.cols(), closed_loop_power(&lt, 2)?.cols());

    let net = fixtures::partial_two_layer();
    let r = dd_synthesize(&net, DdMode::Iteration)?;
    println!("partial observation: {} controllers", r.controller_count());
    let v = verify_dd(&net, &r.sample.ok_or("no controller")?, 3)?;
    println!("sample decoupled: {} from step {:?}", v.verdict, v.k_star);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
