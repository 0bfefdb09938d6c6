// How many networks are there, and how many reach a fixed core?

use std::error::Error;

use bcn::combinatorics::{brute_force_structure_count, count_structures, total_networks, DEFAULT_BRUTE_FORCE_BUDGET};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in 1..=4 {
        println!("n = {n}: {} networks", total_networks(n));
    }
    for s_r in 0..=5 {
        let r = count_structures(1, s_r);
        let exact = brute_force_structure_count(s_r, DEFAULT_BRUTE_FORCE_BUDGET)?;
        println!("S_r = {s_r}: formula {} enumerated {exact}", r.n_mod_c);
    }
    println!("S_r = 13: {}", count_structures(1, 13).n_mod_c);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
