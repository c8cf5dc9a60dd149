// A miniature benchmark: two reductions, two annealing settings, embedding
// into a small Chimera, then per-alpha summaries and plots.

use sat2qubo::bench::{run_experiment, summarize, write_run, ExperimentSpec};
use sat2qubo::generate::format_alpha;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::parse(
        "clauses = 21
         alphas = 2.5,3.5
         per_alpha = 3
         grid = 10x20,500x20
         chimera = 8x8x4
         seed = 1",
    )?;
    let records = run_experiment(&spec)?;
    println!("{} records", records.len());

    let summary = summarize(&records);
    for b in &summary.bins {
        for s in &b.per_reduction {
            println!(
                "alpha {} {}x{} {:>9}: success {:?}, median qubits {:?}",
                format_alpha(b.alpha),
                b.setting.sweeps, b.setting.num_reads, s.reduction.label(), s.success_rate, s.median_physical_qubits
            );
        }
    }

    let out = std::env::temp_dir().join(format!("sat2qubo-bench-{}", std::process::id()));
    let dir = write_run(&out, &spec, &records)?;
    println!("wrote {}", dir.display());
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
