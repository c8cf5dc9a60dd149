//! Brute-force reference implementations shared by the integration tests.
//! They deliberately avoid the library's solvers so they can check them.

#![allow(dead_code)]

use sat2qubo::cnf::CnfFormula;
use sat2qubo::qubo::{BitVector, Qubo};

/// Satisfiability by trying all 2^n assignments.
pub fn brute_sat(f: &CnfFormula) -> bool {
    let n = f.num_vars();
    assert!(n <= 24, "brute_sat is for tiny formulas");
    (0..1u64 << n).any(|mask| {
        f.clauses().iter().all(|c| {
            c.literals()
                .iter()
                .any(|l| ((mask >> (l.var() - 1)) & 1 == 1) != l.is_negated())
        })
    })
}

/// Energy straight from the coefficient lists.
pub fn energy(q: &Qubo, x: &[bool]) -> f64 {
    let lin: f64 = q.linear_terms().filter(|&(i, _)| x[i]).map(|(_, c)| c).sum();
    let quad: f64 = q
        .quadratic_terms()
        .filter(|&((i, j), _)| x[i] && x[j])
        .map(|(_, c)| c)
        .sum();
    lin + quad
}

/// Minimum energy and every minimizer (as bit masks), by enumeration.
pub fn brute_minimizers(q: &Qubo) -> (f64, Vec<u64>) {
    let n = q.num_bits();
    assert!(n <= 24, "brute_minimizers is for tiny QUBOs");
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    for mask in 0..1u64 << n {
        let x: Vec<bool> = (0..n).map(|i| (mask >> i) & 1 == 1).collect();
        let e = energy(q, &x);
        if e < best - 1e-9 {
            best = e;
            arg.clear();
        }
        if (e - best).abs() <= 1e-9 {
            arg.push(mask);
        }
    }
    (best, arg)
}

pub fn mask_of(x: &BitVector) -> u64 {
    x.ones().fold(0u64, |m, i| m | 1 << i)
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    assert!(n > 0);
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}
