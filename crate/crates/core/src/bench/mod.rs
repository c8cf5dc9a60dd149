//! Experiment harness: sweeps a dataset through reductions, annealing
//! settings and Chimera embedding, then aggregates per alpha bin.

mod logistic;
mod spec;
mod summary;
mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::cnf::{dpll_satisfiable, evaluate};
use crate::embedding::{build_chimera, embed, verify_embedding, ChainStats, ChimeraGraph, LogicalGraph};
use crate::error::{Error, Result};
use crate::generate::{derive_seed, format_alpha, generate, load_dataset, Alpha, InstanceRecord};
use crate::reduction::{reduce, ReductionParams, Variant};
use crate::sampler::{solve_sa, success_probability, SamplerParams};

pub use logistic::{fit_logistic, LogisticFit, GRADIENT_TOLERANCE, MAX_ITERATIONS};
pub use spec::{parse_alpha_list, DatasetRef, ExperimentSpec, SamplerSetting, SPEC_KEYS};
pub use summary::{summarize, BinSummary, CurveFit, ReductionStats, Summary};
pub use svg::{line_plot, Series};

/// Outcome of the embedding step for one (instance, reduction).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedStatus {
    Ok,
    /// The heuristic gave up with chains still overlapping.
    Failed,
    /// An embedding came back but did not verify. Should never happen.
    Invalid,
    /// No hardware graph in the experiment.
    Skipped,
}

impl EmbedStatus {
    pub fn label(self) -> &'static str {
        match self {
            EmbedStatus::Ok => "ok",
            EmbedStatus::Failed => "failed",
            EmbedStatus::Invalid => "invalid",
            EmbedStatus::Skipped => "skipped",
        }
    }
}

impl fmt::Display for EmbedStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub instance_id: String,
    pub alpha: Alpha,
    pub reduction: Variant,
    pub setting: SamplerSetting,
    pub dpll_sat: bool,
    /// `-|C| omega`; unknown (`None`) for unsatisfiable instances.
    pub ground_energy: Option<f64>,
    pub best_energy: f64,
    pub success_prob: f64,
    pub decoded_ok: bool,
    pub logical_qubits: usize,
    pub logical_edges: usize,
    /// `None` unless `embed_status` is `Ok`.
    pub chains: Option<ChainStats>,
    pub embed_status: EmbedStatus,
}

pub const RESULTS_HEADER: [&str; 16] = [
    "instance_id",
    "alpha",
    "reduction",
    "sweeps",
    "num_reads",
    "dpll_sat",
    "ground_energy",
    "best_energy",
    "success_prob",
    "decoded_ok",
    "logical_qubits",
    "logical_edges",
    "physical_qubits",
    "max_chain",
    "median_chain",
    "embed_status",
];

impl ExperimentRecord {
    fn csv_row(&self) -> [String; 16] {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.instance_id.clone(),
            format_alpha(self.alpha),
            self.reduction.label().to_string(),
            self.setting.sweeps.to_string(),
            self.setting.num_reads.to_string(),
            self.dpll_sat.to_string(),
            self.ground_energy.map(|e| e.to_string()).unwrap_or_default(),
            self.best_energy.to_string(),
            self.success_prob.to_string(),
            self.decoded_ok.to_string(),
            self.logical_qubits.to_string(),
            self.logical_edges.to_string(),
            opt(self.chains.map(|c| c.physical_qubits)),
            opt(self.chains.map(|c| c.max_chain)),
            opt(self.chains.map(|c| c.median_chain)),
            self.embed_status.label().to_string(),
        ]
    }

    /// Whether this run counts as a success in the accuracy statistics.
    pub fn succeeded(&self) -> bool {
        self.dpll_sat && self.decoded_ok
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Loads or generates the instances a spec refers to.
pub fn resolve_dataset(spec: &ExperimentSpec) -> Result<Vec<InstanceRecord>> {
    match &spec.dataset {
        DatasetRef::Dir(dir) => load_dataset(dir),
        DatasetRef::Generate(gen) => generate(gen),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let instances = resolve_dataset(spec)?;
    run_on(spec, &instances, |_, _| {})
}

fn variant_tag(v: Variant) -> u64 {
    match v {
        Variant::ChoiMis => 1,
        Variant::ChoiLoosened => 2,
        Variant::Backbone => 3,
    }
}

/// Runs the experiment's reductions, grid and embedding over explicit instances
/// (its dataset field is ignored). `progress(done, total)` is called
/// after each (instance, reduction) job, possibly from worker threads.
///
/// Records come back sorted by instance id, reduction and setting, so the
/// output does not depend on scheduling.
pub fn run_on<F>(spec: &ExperimentSpec, instances: &[InstanceRecord], progress: F) -> Result<Vec<ExperimentRecord>>
where
    F: Fn(usize, usize) + Sync,
{
    let hw = spec.hw.map(|d| build_chimera(d.m, d.n, d.t));
    let sat: Vec<bool> = instances
        .par_iter()
        .map(|inst| dpll_satisfiable(&inst.formula).is_sat())
        .collect();
    let jobs: Vec<(usize, Variant)> = (0..instances.len())
        .flat_map(|i| spec.reductions.iter().map(move |&v| (i, v)))
        .collect();
    let done = AtomicUsize::new(0);
    let per_job: Vec<Vec<ExperimentRecord>> = jobs
        .par_iter()
        .map(|&(i, variant)| {
            let out = run_job(spec, hw.as_ref(), &instances[i], sat[i], variant);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, jobs.len());
            out
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<ExperimentRecord> = per_job.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        (&a.instance_id, a.reduction, a.setting).cmp(&(&b.instance_id, b.reduction, b.setting))
    });
    Ok(records)
}

fn run_job(
    spec: &ExperimentSpec,
    hw: Option<&ChimeraGraph>,
    inst: &InstanceRecord,
    dpll_sat: bool,
    variant: Variant,
) -> Result<Vec<ExperimentRecord>> {
    let artifact = reduce(&inst.formula, ReductionParams::new(variant))?;
    let logical = LogicalGraph::from_qubo(&artifact.qubo);
    let tag = variant_tag(variant);

    let (chains, embed_status) = match hw {
        None => (None, EmbedStatus::Skipped),
        Some(hw) => {
            let seed = derive_seed(spec.seed, &[inst.seed_used, tag, 0x656d_6265]);
            match embed(&logical, hw, seed, spec.embed_tries) {
                Ok(emb) if verify_embedding(&logical, hw, &emb).is_valid() => (Some(emb.stats()), EmbedStatus::Ok),
                Ok(_) => (None, EmbedStatus::Invalid),
                Err(_) => (None, EmbedStatus::Failed),
            }
        }
    };

    let ground = artifact.ground_energy_if_sat;
    let mut records = Vec::with_capacity(spec.grid.len());
    for &setting in &spec.grid {
        let mut best: Option<(f64, crate::qubo::BitVector)> = None;
        let mut hits = 0.0;
        let mut reads = 0usize;
        for rep in 0..spec.repetitions {
            let seed = derive_seed(
                spec.seed,
                &[inst.seed_used, tag, setting.sweeps as u64, setting.num_reads as u64, rep as u64],
            );
            let set = solve_sa(&artifact.qubo, &SamplerParams::new(setting.num_reads, setting.sweeps, seed))?;
            hits += success_probability(&set, ground) * set.num_reads() as f64;
            reads += set.num_reads();
            if let Some(low) = set.lowest() {
                if best.as_ref().map_or(true, |b| low.energy < b.0) {
                    best = Some((low.energy, low.bits.clone()));
                }
            }
        }
        let (best_energy, best_bits) = best.expect("at least one read");
        let decoded_ok = dpll_sat
            && artifact.is_ground(best_energy)
            && evaluate(&inst.formula, &artifact.decode(&best_bits)?)?;
        records.push(ExperimentRecord {
            instance_id: inst.id.clone(),
            alpha: inst.alpha,
            reduction: variant,
            setting,
            dpll_sat,
            ground_energy: dpll_sat.then_some(ground),
            best_energy,
            success_prob: if dpll_sat { hits / reads as f64 } else { 0.0 },
            decoded_ok,
            logical_qubits: artifact.qubo.num_bits(),
            logical_edges: logical.num_edges(),
            chains,
            embed_status,
        });
    }
    Ok(records)
}

/// Directory name for a spec: `run-<first 16 hex digits of its hash>`.
pub fn run_dir_name(spec: &ExperimentSpec) -> String {
    format!("run-{}", spec.hash())
}

/// Writes `spec.txt`, `results.csv`, `summary.csv`, `fits.csv` and the SVG
/// plots under `out_root/run-<hash>/` and returns that directory.
pub fn write_run(out_root: &Path, spec: &ExperimentSpec, records: &[ExperimentRecord]) -> Result<PathBuf> {
    let dir = out_root.join(run_dir_name(spec));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let put = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    put("spec.txt", &spec.to_text())?;
    put("results.csv", &records_to_csv(records)?)?;
    let summary = summarize(records);
    put("summary.csv", &summary.to_csv()?)?;
    put("fits.csv", &summary.fits_to_csv()?)?;
    for (name, svg) in summary.plots() {
        put(&name, &svg)?;
    }
    Ok(dir)
}
