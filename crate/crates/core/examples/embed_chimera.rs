// Embed a reduced formula into Chimera, flatten it and decode a physical
// ground state back to a satisfying assignment.

use sat2qubo::cnf::{evaluate, parse_dimacs};
use sat2qubo::embedding::{
    build_chimera, default_chain_strength, embed, flatten, unembed, verify_embedding, LogicalGraph,
};
use sat2qubo::reduction::{reduce, ReductionParams, Variant};
use sat2qubo::sampler::{solve_sa, SamplerParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_dimacs("p cnf 4 3\n1 -2 3 0\n-1 2 4 0\n2 -3 -4 0\n")?;
    let art = reduce(&f, ReductionParams::new(Variant::Backbone))?;
    let logical = LogicalGraph::from_qubo(&art.qubo);
    let hw = build_chimera(4, 4, 4);

    let emb = embed(&logical, &hw, 3, 4)?;
    assert!(verify_embedding(&logical, &hw, &emb).is_valid());
    println!("{} logical nodes -> {}", logical.num_nodes(), emb.stats());

    let strength = default_chain_strength(&art.qubo);
    let physical = flatten(&art.qubo, &emb, strength)?;
    let set = solve_sa(&physical, &SamplerParams::new(50, 2000, 9))?;
    let best = set.lowest().ok_or("no samples")?;
    let logical_bits = unembed(&best.bits, &emb)?;
    let energy = art.qubo.energy(&logical_bits.bits)?;
    println!(
        "physical best {}, logical energy {energy}, broken chains {}",
        best.energy,
        logical_bits.broken_chains.len()
    );
    if art.is_ground(energy) {
        assert!(evaluate(&f, &art.decode(&logical_bits.bits)?)?);
        println!("decoded a satisfying assignment");
    }

    let json = emb.to_json();
    assert_eq!(sat2qubo::embedding::Embedding::from_json(&json)?, emb);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
