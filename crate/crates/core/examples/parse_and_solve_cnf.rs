// Parse a DIMACS formula, decide it with DPLL and check the witness.

use sat2qubo::cnf::{dpll_satisfiable, emit_dimacs, evaluate, parse_dimacs};

const FORMULA: &str = "\
c three clauses over four variables
p cnf 4 3
1 -2 3 0
-1 2 4 0
2 -3 -4 0
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_dimacs(FORMULA)?;
    println!("{} variables, {} clauses, alpha = {}", f.num_vars(), f.num_clauses(), f.alpha());

    let result = dpll_satisfiable(&f);
    let witness = result.witness.ok_or("formula should be satisfiable")?;
    assert!(evaluate(&f, &witness)?);
    println!("satisfying assignment: {:?}", witness.values());

    // round trip through the writer
    assert_eq!(parse_dimacs(&emit_dimacs(&f))?, f);

    let contradiction = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")?;
    assert!(!dpll_satisfiable(&contradiction).is_sat());
    println!("x and not x: unsatisfiable");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
