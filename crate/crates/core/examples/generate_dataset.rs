// Generate a small random 3-SAT dataset and write it to a directory.

use sat2qubo::cnf::dpll_satisfiable;
use sat2qubo::generate::{format_alpha, generate, load_dataset, parse_alpha, write_dataset, GenSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let alphas = ["2.0", "4.25", "6.0"].iter().map(|a| parse_alpha(a)).collect::<Result<Vec<_>, _>>()?;
    let spec = GenSpec::new(42, alphas, 8, 2024);
    let records = generate(&spec)?;

    for chunk in records.chunks(spec.instances_per_alpha) {
        let sat = chunk.iter().filter(|r| dpll_satisfiable(&r.formula).is_sat()).count();
        println!(
            "alpha {:>5}: {} variables, {sat}/{} satisfiable",
            format_alpha(chunk[0].alpha),
            chunk[0].formula.num_vars(),
            chunk.len()
        );
    }

    let dir = std::env::temp_dir().join(format!("sat2qubo-example-{}", std::process::id()));
    write_dataset(&records, &dir)?;
    let back = load_dataset(&dir)?;
    assert_eq!(back, records);
    println!("wrote and reloaded {} instances under {}", back.len(), dir.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
