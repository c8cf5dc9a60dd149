use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};

use sat2qubo::bench::{run_on, resolve_dataset, summarize, write_run, DatasetRef, ExperimentSpec, SPEC_KEYS};
use sat2qubo::cnf::{dpll_satisfiable, evaluate, parse_dimacs};
use sat2qubo::embedding::{build_chimera, default_chain_strength, embed, flatten, verify_embedding, ChimeraDims, LogicalGraph};
use sat2qubo::generate::{format_alpha, generate, write_dataset, GenSpec};
use sat2qubo::qubo::{read_qubo, write_qubo, Qubo};
use sat2qubo::reduction::{reduce, ReductionArtifact, ReductionParams, VarMap, Variant};
use sat2qubo::sampler::{solve_exhaustive, solve_sa, success_probability, SampleSet, SamplerParams};

#[derive(Parser)]
#[command(name = "sat2qubo", version, about = "k-SAT to QUBO reductions, annealing and Chimera embedding")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random k-SAT dataset (DIMACS files plus manifest.csv).
    Gen(GenArgs),
    /// Reduce a DIMACS formula to a QUBO and its variable map.
    Reduce(ReduceArgs),
    /// Sample a QUBO with the exhaustive solver or simulated annealing.
    Solve(SolveArgs),
    /// Minor-embed a QUBO into a Chimera graph.
    Embed(EmbedArgs),
    /// Run a benchmark sweep and write results, summary and plots.
    #[command(after_long_help = SPEC_KEYS)]
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 42)]
    clauses: usize,
    /// `start:stop:step` or a comma list.
    #[arg(long, default_value = "1.0:8.0:0.5")]
    alpha_list: String,
    /// Instances per alpha. Without it, 250 instances are spread over the grid.
    #[arg(long, conflicts_with = "instances")]
    per_alpha: Option<usize>,
    /// Total instances spread over the grid.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Defaults to `<out-dir>/dataset`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Choi,
    Loosened,
    Backbone,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Choi => Variant::ChoiMis,
            VariantArg::Loosened => Variant::ChoiLoosened,
            VariantArg::Backbone => Variant::Backbone,
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Defaults to 2 omega for choi and omega otherwise.
    #[arg(long)]
    delta: Option<f64>,
    /// QUBO output; the variable map goes next to it as `<out>.map.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Exact,
    Sa,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sa")]
    sampler: SamplerArg,
    #[arg(long, default_value_t = 100)]
    reads: usize,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Variable map written by `reduce`.
    #[arg(long, requires = "verify")]
    map: Option<PathBuf>,
    /// Formula the QUBO was reduced from.
    #[arg(long)]
    verify: Option<PathBuf>,
    /// The omega used in `reduce`; sets the ground level `-|C| omega`.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Sample CSV; defaults to `<out-dir>/<stem>.samples.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "16x16x4")]
    chimera: ChimeraDims,
    #[arg(long, default_value_t = 4)]
    tries: usize,
    /// Also write the physical QUBO.
    #[arg(long)]
    flatten: bool,
    /// Defaults to 1 + the largest logical coefficient magnitude.
    #[arg(long, requires = "flatten")]
    chain_strength: Option<f64>,
    /// Embedding JSON; defaults to `<out-dir>/<stem>.embedding.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset directory from `gen`; overrides the experiment file's `dataset` key.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Spec file of `key = value` lines (see --help for the keys).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Extra `key=value` overrides applied after the experiment file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a, seed, &cli.out_dir),
        Cmd::Reduce(a) => cmd_reduce(a, &cli.out_dir),
        Cmd::Solve(a) => cmd_solve(a, seed, &cli.out_dir),
        Cmd::Embed(a) => cmd_embed(a, seed, &cli.out_dir),
        Cmd::Bench(a) => cmd_bench(a, cli.seed, &cli.out_dir),
    }
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

fn load_qubo(path: &Path) -> Result<Qubo> {
    read_qubo(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(a: GenArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let alphas = sat2qubo::bench::parse_alpha_list(&a.alpha_list)
        .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, format!("--alpha-list: {e}")));
    let mut spec = GenSpec::new(a.clauses, alphas, a.per_alpha.unwrap_or(0), seed);
    spec.k = a.k;
    if a.per_alpha.is_none() {
        spec.total_instances = Some(a.instances.unwrap_or(250));
    }
    if let Err(e) = spec.validate() {
        usage_error(ErrorKind::ValueValidation, e);
    }
    let records = generate(&spec)?;
    let dir = a.out.unwrap_or_else(|| out_dir.join("dataset"));
    write_dataset(&records, &dir)?;
    let sat = records.iter().filter(|r| dpll_satisfiable(&r.formula).is_sat()).count();
    eprintln!("wrote {} instances to {}", records.len(), dir.display());
    println!("instances {}  satisfiable {}  alphas {}", records.len(), sat, spec.alpha_values.len());
    Ok(())
}

fn cmd_reduce(a: ReduceArgs, out_dir: &Path) -> Result<()> {
    let variant: Variant = a.variant.into();
    let mut params = ReductionParams::with_omega(variant, a.omega);
    if let Some(d) = a.delta {
        params.delta = d;
    }
    if let Err(e) = params.validate() {
        usage_error(ErrorKind::ArgumentConflict, e);
    }
    let formula = parse_dimacs(&read(&a.input)?).with_context(|| format!("parsing {}", a.input.display()))?;
    let art = reduce(&formula, params)?;
    let out = a
        .out
        .unwrap_or_else(|| out_dir.join(format!("{}.{}.qubo", stem(&a.input), variant.label())));
    let map_path = PathBuf::from(format!("{}.map.json", out.display()));
    write(&out, &write_qubo(&art.qubo))?;
    write(&map_path, &art.map.to_json())?;
    eprintln!("wrote {} and {}", out.display(), map_path.display());
    let stats = art.qubo.graph_stats();
    println!("{} qubits, {} edges", stats.nodes, stats.edges);
    Ok(())
}

fn cmd_solve(a: SolveArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let q = load_qubo(&a.input)?;
    let set: SampleSet = match a.sampler {
        SamplerArg::Exact => solve_exhaustive(&q)?,
        SamplerArg::Sa => solve_sa(&q, &SamplerParams::new(a.reads, a.sweeps, seed))?,
    };
    let out = a
        .out
        .unwrap_or_else(|| out_dir.join(format!("{}.samples.csv", stem(&a.input))));
    write(&out, &set.to_csv())?;
    eprintln!("wrote {} ({} reads)", out.display(), set.num_reads());
    let best = set.lowest().context("sampler returned no samples")?;
    println!("min energy {}", best.energy);

    let Some(cnf_path) = a.verify else {
        return Ok(());
    };
    let formula = parse_dimacs(&read(&cnf_path)?).with_context(|| format!("parsing {}", cnf_path.display()))?;
    let ground = -(formula.num_clauses() as f64) * a.omega;
    let artifact = match a.map {
        Some(map_path) => {
            let map = VarMap::from_json(&read(&map_path)?).with_context(|| format!("parsing {}", map_path.display()))?;
            let variant = if map.backbone_bits.is_empty() {
                Variant::ChoiMis
            } else {
                Variant::Backbone
            };
            if map.num_bits() != q.num_bits() {
                bail!("map has {} bits but the QUBO has {}", map.num_bits(), q.num_bits());
            }
            Some(ReductionArtifact {
                qubo: q.clone(),
                map,
                ground_energy_if_sat: ground,
                params: ReductionParams::with_omega(variant, a.omega),
                source: formula.clone(),
            })
        }
        None => None,
    };

    println!("ground level {ground}; success rate {:.4}", success_probability(&set, ground));
    if let Some(art) = artifact {
        let assignment = art.decode(&best.bits)?;
        let sat = evaluate(&formula, &assignment)?;
        let text: Vec<String> = assignment
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if v { format!("{}", i + 1) } else { format!("-{}", i + 1) })
            .collect();
        println!("decoded {}", text.join(" "));
        println!("verified {}", if sat { "SAT" } else { "not satisfying" });
    }
    if matches!(a.sampler, SamplerArg::Exact) && best.energy > ground + 1e-9 {
        println!("ground energy above -|C|ω: UNSAT certificate at exhaustive scale");
    }
    Ok(())
}

fn cmd_embed(a: EmbedArgs, seed: u64, out_dir: &Path) -> Result<()> {
    let q = load_qubo(&a.input)?;
    let logical = LogicalGraph::from_qubo(&q);
    let d = a.chimera;
    let hw = build_chimera(d.m, d.n, d.t);
    let emb = embed(&logical, &hw, seed, a.tries).map_err(|e| anyhow::anyhow!("embedding failed: {e}"))?;
    let report = verify_embedding(&logical, &hw, &emb);
    if !report.is_valid() {
        bail!("embedding did not verify: {report}");
    }
    let out = a
        .out
        .unwrap_or_else(|| out_dir.join(format!("{}.embedding.json", stem(&a.input))));
    write(&out, &emb.to_json())?;
    eprintln!("wrote {}", out.display());
    if a.flatten {
        let strength = a.chain_strength.unwrap_or_else(|| default_chain_strength(&q));
        let phys = flatten(&q, &emb, strength)?;
        let path = out_dir.join(format!("{}.physical.qubo", stem(&a.input)));
        write(&path, &write_qubo(&phys))?;
        eprintln!("wrote {} (chain strength {strength})", path.display());
    }
    println!("{}", emb.stats());
    Ok(())
}

fn cmd_bench(a: BenchArgs, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let mut text = match &a.spec {
        Some(p) => read(p)?,
        None => String::new(),
    };
    for kv in &a.set {
        text.push('\n');
        text.push_str(kv);
    }
    if let Some(s) = seed {
        text.push_str(&format!("\nseed = {s}"));
    }
    if let Some(d) = &a.dataset {
        if !d.is_dir() {
            bail!("dataset {} not found", d.display());
        }
        text.push_str(&format!("\ndataset = {}", d.display()));
    }
    let spec = ExperimentSpec::parse(&text).context("invalid bench spec")?;
    let instances = resolve_dataset(&spec)?;
    let source = match &spec.dataset {
        DatasetRef::Dir(d) => d.display().to_string(),
        DatasetRef::Generate(_) => "generated".into(),
    };
    eprintln!(
        "bench: {} instances ({source}), {} reductions, {} settings",
        instances.len(),
        spec.reductions.len(),
        spec.grid.len()
    );
    let step = (instances.len() * spec.reductions.len() / 20).max(1);
    let records = run_on(&spec, &instances, |done, total| {
        if done % step == 0 || done == total {
            eprintln!("  {done}/{total} jobs");
        }
    })?;
    let dir = write_run(out_dir, &spec, &records)?;
    eprintln!("wrote {}", dir.display());

    let summary = summarize(&records);
    println!("{}", dir.display());
    println!("{:>6} {:>12} {:>6} {:>10} {:>8} {:>8} {:>10}", "alpha", "setting", "sat", "reduction", "success", "diff_pp", "qubits");
    for b in &summary.bins {
        for s in &b.per_reduction {
            let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
            println!(
                "{:>6} {:>12} {:>6.2} {:>10} {:>8} {:>8} {:>10}",
                format_alpha(b.alpha),
                format!("{}x{}", b.setting.sweeps, b.setting.num_reads),
                b.dpll_fraction,
                s.reduction.label(),
                opt(s.success_rate),
                opt(b.diff_pp),
                opt(s.median_physical_qubits),
            );
        }
    }
    Ok(())
}
