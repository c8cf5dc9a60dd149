// Reduce one formula with all three encodings and compare their sizes.

use sat2qubo::cnf::{evaluate, parse_dimacs};
use sat2qubo::reduction::{expected_qubit_count, reduce, ReductionParams, Variant};
use sat2qubo::sampler::solve_exhaustive;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_dimacs("p cnf 4 3\n1 -2 3 0\n-1 2 4 0\n2 -3 -4 0\n")?;
    for variant in Variant::ALL {
        let art = reduce(&f, ReductionParams::new(variant))?;
        let stats = art.qubo.graph_stats();
        assert_eq!(stats.nodes, expected_qubit_count(&f, variant));

        let ground = solve_exhaustive(&art.qubo)?;
        let best = ground.lowest().ok_or("no samples")?;
        assert!(art.is_ground(best.energy));
        for s in &ground.samples {
            assert!(evaluate(&f, &art.decode(&s.bits)?)?);
        }
        println!(
            "{:>9}: {} qubits, {} edges, ground {} with {} minimizers, all decode to models",
            variant.label(),
            stats.nodes,
            stats.edges,
            best.energy,
            ground.samples.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
