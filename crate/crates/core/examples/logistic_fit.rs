// Fit a logistic curve to satisfiability against clause density.

use sat2qubo::bench::fit_logistic;
use sat2qubo::cnf::dpll_satisfiable;
use sat2qubo::generate::{alpha_to_f64, generate, parse_alpha, GenSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let alphas = ["2.0", "3.0", "4.0", "4.5", "5.0", "6.0", "7.0"]
        .iter()
        .map(|a| parse_alpha(a))
        .collect::<Result<Vec<_>, _>>()?;
    let records = generate(&GenSpec::new(42, alphas, 20, 5))?;
    let points: Vec<(f64, bool)> = records
        .iter()
        .map(|r| (alpha_to_f64(r.alpha), dpll_satisfiable(&r.formula).is_sat()))
        .collect();
    let fit = fit_logistic(&points)?;
    println!("{fit:?}");
    if let Some(m) = fit.midpoint() {
        println!("satisfiability drops through 1/2 near alpha = {m:.2}");
    }
    for a in [2.0, 4.0, 6.0] {
        println!("P(sat | alpha = {a}) = {:.2}", fit.predict(a));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
