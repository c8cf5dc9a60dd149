// Simulated annealing on a backbone QUBO: more sweeps, more ground states.

use sat2qubo::cnf::dpll_satisfiable;
use sat2qubo::generate::{generate_instance, derive_seed};
use sat2qubo::reduction::{reduce, ReductionParams, Variant};
use sat2qubo::sampler::{solve_sa, success_probability, SamplerParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut f = generate_instance(1, 7, 21, 3)?;
    let mut attempt = 1;
    while !dpll_satisfiable(&f).is_sat() {
        attempt += 1;
        f = generate_instance(derive_seed(1, &[attempt]), 7, 21, 3)?;
    }
    let art = reduce(&f, ReductionParams::new(Variant::Backbone))?;
    println!("{} bits, ground level {}", art.qubo.num_bits(), art.ground_energy_if_sat);

    for sweeps in [1, 10, 100, 1000] {
        let set = solve_sa(&art.qubo, &SamplerParams::new(100, sweeps, 7))?;
        let best = set.lowest().ok_or("no samples")?;
        println!(
            "{sweeps:>5} sweeps: best {:>6}, success probability {:.2}",
            best.energy,
            success_probability(&set, art.ground_energy_if_sat)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
