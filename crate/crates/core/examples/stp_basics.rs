// Semi-tensor products on δ-vectors and logical matrices.
//
// `cargo run --example stp_basics`

use std::error::Error;

use bcn::stp::{encode_state, structure_matrix, Operator};
use bcn::{DeltaVector, LogicalMatrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let t = DeltaVector::new(2, 1)?;
    let f = DeltaVector::new(2, 2)?;
    // δ_2^1 ⋉ δ_2^2 = δ_4^2
    let tf = t.stp(&f);
    println!("T ⋉ F = δ_{}^{}", tf.dim(), tf.index());
    if tf.index() != 2 {
        return Err("product index".into());
    }

    let and = structure_matrix(Operator::Conjunction);
    let v = and.stp(&tf.as_matrix());
    println!("M_c ⋉ T ⋉ F = δ_2^{}", v.col(1));

    // Dimension-mismatched product against the dense definition.
    let a = LogicalMatrix::delta(2, &[1, 2, 2, 2]);
    let b = LogicalMatrix::delta(4, &[3, 1]);
    let fast = a.stp(&b);
    let dense = LogicalMatrix::from_dense(&a.to_dense().stp(&b.to_dense()))?;
    println!("fast {:?} dense {:?}", fast.cols(), dense.cols());
    if fast != dense {
        return Err("fast path disagrees with the dense product".into());
    }

    let x = encode_state(&[true, false, true]);
    println!("(1,0,1) -> δ_8^{}", x.index());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
