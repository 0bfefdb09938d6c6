// Is a controlled network behaviourally equivalent to a reference one?

use std::error::Error;

use bcn::dynamics::FeedbackKind;
use bcn::equivalence::{
    check_equivalence, search_equivalence_feedback, Criterion, DisturbanceMode, EquivalenceQuery, Regime,
    DEFAULT_SEARCH_BUDGET,
};
use bcn::{BooleanControlNetwork, BooleanNetwork, LogicalMatrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let bn = BooleanNetwork::new(LogicalMatrix::delta(4, &[2, 3, 4, 1]))?;
    // Input 1 rotates, input 2 freezes.
    let bcn = BooleanControlNetwork::control(2, 1, LogicalMatrix::delta(4, &[2, 3, 4, 1, 1, 2, 3, 4]), None)?;

    let q = EquivalenceQuery::new(Criterion::StateTransition, Regime::StateFeedback(LogicalMatrix::delta(2, &[1; 4])));
    let r = check_equivalence(&bn, &bcn, &q)?;
    println!("pinned to u=1: {}", r.verdict);

    let q = EquivalenceQuery::new(Criterion::StateTransition, Regime::AllInputs);
    let r = check_equivalence(&bn, &bcn, &q)?;
    println!("every input: {} witness {:?}", r.verdict, r.witness);

    let laws = search_equivalence_feedback(
        &bn,
        &bcn,
        Criterion::Attractor,
        FeedbackKind::State,
        DisturbanceMode::None,
        DEFAULT_SEARCH_BUDGET,
    )?;
    println!("{} state feedbacks give the same attractors and basins", laws.len());
    if laws.is_empty() {
        return Err("the rotating law must be found".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
