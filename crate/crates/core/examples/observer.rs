// Replaying an input/output log through the set-membership observer.

use std::error::Error;

use bcn::dynamics::{simulate, InputSource};
use bcn::fault::{observer_run, parse_observation_log, reconstruction_feedback, ObserverPolicy};
use bcn::fixtures;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = fixtures::output_feedback_dd_fine();
    let law = reconstruction_feedback(&net)?;
    let run = simulate(&net, 6, &InputSource::Feedback(law.clone()), &[2, 1, 2, 1], &[], 4)?;

    let mut log = String::from("# step input output\n");
    for (k, y) in run.outputs.iter().enumerate() {
        match run.inputs.get(k) {
            Some(u) => log.push_str(&format!("{k} {u} {y}\n")),
            None => log.push_str(&format!("{k} - {y}\n")),
        }
    }
    print!("{log}");
    let obs = parse_observation_log(&log)?;
    let trace = observer_run(&net, &ObserverPolicy::OutputFeedback(law.m), &obs)?;
    for (k, s) in trace.states.iter().enumerate() {
        println!("step {k}: true {} possible {:?}", run.states[k], s.possible);
        if !s.possible.contains(&run.states[k]) {
            return Err("observer lost the true state".into());
        }
    }
    println!("reconstructed at {:?}, fault at {:?}", trace.reconstructed_at, trace.fault_at);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
