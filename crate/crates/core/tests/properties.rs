mod common;

use proptest::prelude::*;

use sat2qubo::cnf::{dpll_satisfiable, emit_dimacs, evaluate, parse_dimacs, CnfFormula};
use sat2qubo::embedding::{build_chimera, embed, flatten, unembed, verify_embedding, Embedding, LogicalGraph};
use sat2qubo::qubo::{read_qubo, write_qubo, BitVector, Qubo};
use sat2qubo::reduction::{reduce, ReductionParams, VarMap, Variant};
use sat2qubo::sampler::{solve_exhaustive, solve_sa, SampleSet, SamplerParams};

use common::{brute_minimizers, brute_sat, mask_of};

/// Formulas over at most 6 variables with clauses of width 1..=3.
fn formula() -> impl Strategy<Value = CnfFormula> {
    (1usize..=6).prop_flat_map(|n| {
        let clause = proptest::sample::subsequence((1..=n as i64).collect::<Vec<_>>(), 1..=n.min(3))
            .prop_flat_map(|vars| {
                let len = vars.len();
                (Just(vars), proptest::collection::vec(any::<bool>(), len))
            })
            .prop_map(|(vars, neg)| {
                vars.into_iter()
                    .zip(neg)
                    .map(|(v, s)| if s { -v } else { v })
                    .collect::<Vec<i64>>()
            });
        (Just(n), proptest::collection::vec(clause, 1..=5)).prop_map(|(n, cs)| {
            let refs: Vec<&[i64]> = cs.iter().map(|c| c.as_slice()).collect();
            CnfFormula::from_dimacs_clauses(n, &refs).unwrap()
        })
    })
}

/// Dense-ish QUBOs with small integer coefficients.
fn qubo(max_bits: usize) -> impl Strategy<Value = Qubo> {
    (1..=max_bits).prop_flat_map(|n| {
        let lin = proptest::collection::vec(-4i32..=4, n);
        let quad = proptest::collection::vec((0..n, 0..n, -4i32..=4), 0..=2 * n);
        (Just(n), lin, quad).prop_map(|(n, lin, quad)| {
            let mut q = Qubo::new(n);
            for (i, c) in lin.into_iter().enumerate() {
                if c != 0 {
                    q.add_linear(i, f64::from(c));
                }
            }
            for (i, j, c) in quad {
                if i != j && c != 0 {
                    q.add_quadratic(i, j, f64::from(c));
                }
            }
            q
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(f in formula()) {
        prop_assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn qubo_text_round_trip(q in qubo(12)) {
        prop_assert_eq!(read_qubo(&write_qubo(&q)).unwrap(), q);
    }

    #[test]
    fn energy_matches_coefficient_sum(q in qubo(12), mask in any::<u64>()) {
        let n = q.num_bits();
        let x = BitVector::from_mask(mask & ((1 << n) - 1), n);
        prop_assert_eq!(q.energy(&x).unwrap(), common::energy(&q, x.bits()));
    }

    #[test]
    fn var_map_json_round_trip(f in formula(), backbone in any::<bool>()) {
        let v = if backbone { Variant::Backbone } else { Variant::ChoiMis };
        let art = reduce(&f, ReductionParams::new(v)).unwrap();
        prop_assert_eq!(VarMap::from_json(&art.map.to_json()).unwrap(), art.map);
    }

    #[test]
    fn dpll_agrees_with_enumeration(f in formula()) {
        let res = dpll_satisfiable(&f);
        prop_assert_eq!(res.is_sat(), brute_sat(&f));
        if let Some(w) = res.witness {
            prop_assert!(evaluate(&f, &w).unwrap());
        }
    }

    #[test]
    fn exhaustive_finds_every_minimizer(q in qubo(12)) {
        let (best, masks) = brute_minimizers(&q);
        let set = solve_exhaustive(&q).unwrap();
        prop_assert!((set.lowest().unwrap().energy - best).abs() < 1e-9);
        let mut got: Vec<u64> = set.samples.iter().map(|s| mask_of(&s.bits)).collect();
        got.sort_unstable();
        prop_assert_eq!(got, masks);
    }

    #[test]
    fn reductions_reach_ground_iff_sat(f in formula()) {
        let sat = brute_sat(&f);
        for v in Variant::ALL {
            let art = reduce(&f, ReductionParams::new(v)).unwrap();
            if art.qubo.num_bits() > 20 {
                continue;
            }
            let (best, _) = brute_minimizers(&art.qubo);
            prop_assert_eq!(art.is_ground(best), sat, "{:?}", v);
        }
    }

    #[test]
    fn annealing_never_beats_exhaustive(q in qubo(10), seed in any::<u64>()) {
        let ground = solve_exhaustive(&q).unwrap().lowest().unwrap().energy;
        let set = solve_sa(&q, &SamplerParams::new(8, 30, seed)).unwrap();
        prop_assert_eq!(set.num_reads(), 8);
        for s in &set.samples {
            prop_assert!(s.energy >= ground - 1e-9);
            prop_assert!((q.energy(&s.bits).unwrap() - s.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_csv_round_trip(q in qubo(10), seed in any::<u64>()) {
        let set = solve_sa(&q, &SamplerParams::new(6, 5, seed)).unwrap();
        let back = SampleSet::from_csv(&set.to_csv(), q.num_bits(), set.sampler_label.clone()).unwrap();
        prop_assert_eq!(back.samples, set.samples);
    }

    #[test]
    fn aligned_chains_keep_logical_energy(q in qubo(9), seed in any::<u64>(), mask in any::<u64>()) {
        let g = LogicalGraph::from_qubo(&q);
        let hw = build_chimera(3, 3, 4);
        let emb = embed(&g, &hw, seed, 4).unwrap();
        prop_assert!(verify_embedding(&g, &hw, &emb).is_valid());
        prop_assert_eq!(Embedding::from_json(&emb.to_json()).unwrap(), emb.clone());

        let n = q.num_bits();
        let x = BitVector::from_mask(mask & ((1 << n) - 1), n);
        let mut p = BitVector::zeros(hw.num_qubits());
        for (node, chain) in emb.chains.iter().enumerate() {
            for &qb in chain {
                p.set(qb, x.get(node));
            }
        }
        let phys = flatten(&q, &emb, 5.0).unwrap();
        prop_assert!((phys.energy(&p).unwrap() - q.energy(&x).unwrap()).abs() < 1e-9);
        let back = unembed(&p, &emb).unwrap();
        prop_assert!(!back.is_broken());
        prop_assert_eq!(back.bits, x);
    }
}
