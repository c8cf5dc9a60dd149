use sat2qubo::bench::{run_on, summarize, DatasetRef, ExperimentSpec, SamplerSetting};
use sat2qubo::cnf::{dpll_satisfiable, evaluate};
use sat2qubo::generate::{alpha_to_f64, default_alpha_grid, generate, parse_alpha, GenSpec};
use sat2qubo::reduction::{reduce, ReductionParams, Variant};
use sat2qubo::sampler::{solve_sa, SamplerParams};

fn spec_for(gen: &GenSpec, grid: Vec<SamplerSetting>) -> ExperimentSpec {
    ExperimentSpec {
        dataset: DatasetRef::Generate(gen.clone()),
        reductions: vec![Variant::ChoiMis, Variant::Backbone],
        grid,
        hw: None,
        repetitions: 2,
        embed_tries: 1,
        seed: gen.seed,
    }
}

#[test]
fn satisfiable_fraction_falls_across_three_bin_windows() {
    let recs = generate(&GenSpec::new(42, default_alpha_grid(), 50, 1)).unwrap();
    let mut fracs: Vec<f64> = Vec::new();
    for chunk in recs.chunks(50) {
        fracs.push(chunk.iter().filter(|r| dpll_satisfiable(&r.formula).is_sat()).count() as f64 / 50.0);
    }
    for i in 0..fracs.len() {
        for j in i + 3..fracs.len() {
            assert!(fracs[j] <= fracs[i], "bin {j} ({}) above bin {i} ({})", fracs[j], fracs[i]);
        }
    }
}

#[test]
fn record_and_summary_invariants() {
    let alphas = ["2.0", "4.0", "6.0"].iter().map(|a| parse_alpha(a).unwrap()).collect();
    let gen = GenSpec::new(21, alphas, 5, 13);
    let instances = generate(&gen).unwrap();
    let spec = spec_for(
        &gen,
        vec![SamplerSetting { sweeps: 5, num_reads: 4 }, SamplerSetting { sweeps: 400, num_reads: 20 }],
    );
    let records = run_on(&spec, &instances, |_, _| {}).unwrap();
    assert_eq!(records.len(), instances.len() * 2 * 2);

    for r in &records {
        let inst = instances.iter().find(|i| i.id == r.instance_id).unwrap();
        let art = reduce(&inst.formula, ReductionParams::new(r.reduction)).unwrap();
        if r.dpll_sat {
            let g = r.ground_energy.unwrap();
            assert!(r.best_energy >= g - 1e-9);
        } else {
            assert_eq!(r.ground_energy, None);
            assert!(!art.is_ground(r.best_energy), "unsat instance reached ground");
            assert_eq!(r.success_prob, 0.0);
        }
        if r.decoded_ok {
            assert!(r.dpll_sat && art.is_ground(r.best_energy));
        }
    }

    let summary = summarize(&records);
    assert_eq!(summary.bins.len(), 3 * 2);
    for b in &summary.bins {
        let ids: Vec<_> = instances.iter().filter(|i| i.alpha == b.alpha).collect();
        let recount = ids.iter().filter(|i| dpll_satisfiable(&i.formula).is_sat()).count() as f64 / ids.len() as f64;
        assert_eq!(b.dpll_fraction, recount);
        assert_eq!(b.instances, ids.len());
    }
}

#[test]
fn decoded_successes_satisfy_their_formula() {
    // mirror one bench job by hand and check the decode path end to end
    let alphas = vec![parse_alpha("3.0").unwrap()];
    let gen = GenSpec::new(21, alphas, 6, 21);
    for inst in generate(&gen).unwrap() {
        if !dpll_satisfiable(&inst.formula).is_sat() {
            continue;
        }
        let art = reduce(&inst.formula, ReductionParams::new(Variant::Backbone)).unwrap();
        let set = solve_sa(&art.qubo, &SamplerParams::new(20, 500, inst.seed_used)).unwrap();
        for s in set.samples.iter().filter(|s| art.is_ground(s.energy)) {
            assert!(evaluate(&inst.formula, &art.decode(&s.bits).unwrap()).unwrap());
        }
    }
}

#[test]
fn more_sweeps_do_not_hurt_backbone_on_average() {
    let alphas = vec![parse_alpha("3.0").unwrap()];
    let gen = GenSpec::new(21, alphas, 8, 8);
    let instances = generate(&gen).unwrap();
    let spec = spec_for(
        &gen,
        vec![SamplerSetting { sweeps: 10, num_reads: 50 }, SamplerSetting { sweeps: 1000, num_reads: 50 }],
    );
    let records = run_on(&spec, &instances, |_, _| {}).unwrap();
    let mean = |sweeps: usize| {
        let ps: Vec<f64> = records
            .iter()
            .filter(|r| r.reduction == Variant::Backbone && r.dpll_sat && r.setting.sweeps == sweeps)
            .map(|r| r.success_prob)
            .collect();
        ps.iter().sum::<f64>() / ps.len() as f64
    };
    assert!(mean(1000) >= mean(10), "{} < {}", mean(1000), mean(10));
    assert!(records.iter().all(|r| alpha_to_f64(r.alpha) == 3.0));
}
