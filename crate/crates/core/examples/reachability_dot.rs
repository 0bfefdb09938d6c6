// Definite and indefinite reachability of output sets, rendered as DOT.

use std::error::Error;

use bcn::fixtures;
use bcn::reachability::{build_reachability_graph, clean_reach_output, reach_query, ReachKind, VertexMode};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::two_output_reach();
    let definite = build_reachability_graph(&net, ReachKind::Definite, VertexMode::OutputSets);
    print!("{}", definite.to_dot());
    if !definite.has_edge(2, 1) {
        return Err("O_S2 should reach O_S1".into());
    }
    println!("path O_S2 to O_S1: {:?}", reach_query(&definite, 2, 1)?);
    println!("inputs cleanly reaching O_S1 from X_1: {:?}", clean_reach_output(&net, 1, 1)?);

    let indefinite = build_reachability_graph(&net, ReachKind::Indefinite, VertexMode::Substates);
    print!("{}", indefinite.to_dot());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
