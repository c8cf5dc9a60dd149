// Build a QUBO by hand, evaluate energies and use the text format.

use sat2qubo::qubo::{read_qubo, write_qubo, BitVector, Qubo};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Penalise picking two adjacent vertices of a triangle, reward picking any.
    let mut q = Qubo::new(3);
    for i in 0..3 {
        q.add_linear(i, -1.0);
    }
    q.add_quadratic(0, 1, 2.0);
    q.add_quadratic(0, 2, 2.0);
    q.add_quadratic(1, 2, 2.0);

    for mask in 0..8u64 {
        let x = BitVector::from_mask(mask, 3);
        println!("{:?} -> {}", x.bits(), q.energy(&x)?);
    }
    println!("{}", q.graph_stats());

    let text = write_qubo(&q);
    assert_eq!(read_qubo(&text)?, q);
    print!("{text}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
