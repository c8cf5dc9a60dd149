//! Uniform random k-SAT datasets with a fixed clause count, sweeping the
//! clause/variable ratio by varying the number of variables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cnf::{emit_dimacs, parse_dimacs, Clause, CnfFormula, Literal};
use crate::error::{Error, Result};

pub type Alpha = Ratio<u64>;

/// Whole-instance resampling budget for variable coverage.
pub const MAX_COVERAGE_ATTEMPTS: usize = 1000;

pub const MANIFEST_FILE: &str = "manifest.csv";

/// Parses a non-negative decimal such as `4.25` or a fraction such as `1/3`.
pub fn parse_alpha(s: &str) -> Result<Alpha> {
    let s = s.trim();
    let bad = || Error::InvalidSpec(format!("bad alpha `{s}`"));
    let alpha = if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ratio::new(n, d)
    } else {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 12 || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Ratio::new(int * den + frac, den)
    };
    Ok(alpha)
}

/// Decimal rendering with at least one fractional digit (`4.0`, `4.25`);
/// non-terminating values are cut at six digits.
pub fn format_alpha(a: Alpha) -> String {
    let int = a.to_integer();
    let mut rem = *a.numer() % *a.denom();
    let den = *a.denom();
    let mut out = format!("{int}.");
    if rem == 0 {
        out.push('0');
        return out;
    }
    for _ in 0..6 {
        if rem == 0 {
            break;
        }
        rem *= 10;
        let _ = write!(out, "{}", rem / den);
        rem %= den;
    }
    out
}

pub fn alpha_to_f64(a: Alpha) -> f64 {
    *a.numer() as f64 / *a.denom() as f64
}

/// `round_half_up(num_clauses / alpha)`, computed exactly.
pub fn num_vars_for(num_clauses: usize, alpha: Alpha) -> usize {
    let (n, d) = (*alpha.numer() as u128, *alpha.denom() as u128);
    ((2 * num_clauses as u128 * d + n) / (2 * n)) as usize
}

/// The default sweep `1.0, 1.5, ..., 8.0`.
pub fn default_alpha_grid() -> Vec<Alpha> {
    (2..=16).map(|h| Ratio::new(h, 2)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub num_clauses: usize,
    pub alpha_values: Vec<Alpha>,
    pub instances_per_alpha: usize,
    /// When set, this many instances are spread over the alpha grid instead,
    /// earlier alphas receiving the remainder.
    pub total_instances: Option<usize>,
    pub k: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(num_clauses: usize, alpha_values: Vec<Alpha>, instances_per_alpha: usize, seed: u64) -> Self {
        GenSpec {
            num_clauses,
            alpha_values,
            instances_per_alpha,
            total_instances: None,
            k: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_clauses == 0 {
            return Err(Error::InvalidSpec("num_clauses must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be >= 1".into()));
        }
        if self.alpha_values.is_empty() {
            return Err(Error::InvalidSpec("no alpha values".into()));
        }
        for &a in &self.alpha_values {
            if *a.numer() == 0 {
                return Err(Error::InvalidSpec("alpha must be > 0".into()));
            }
            let v = num_vars_for(self.num_clauses, a);
            if v < self.k {
                return Err(Error::InvalidSpec(format!(
                    "alpha {} gives {v} variables, fewer than k = {}",
                    format_alpha(a),
                    self.k
                )));
            }
            if self.k * self.num_clauses < v {
                return Err(Error::InvalidSpec(format!(
                    "alpha {} gives {v} variables; {} literal slots cannot cover them",
                    format_alpha(a),
                    self.k * self.num_clauses
                )));
            }
        }
        Ok(())
    }

    /// Number of instances generated for each alpha, in grid order.
    pub fn counts(&self) -> Vec<usize> {
        let bins = self.alpha_values.len();
        match self.total_instances {
            Some(total) => (0..bins)
                .map(|b| total / bins + usize::from(b < total % bins))
                .collect(),
            None => vec![self.instances_per_alpha; bins],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub id: String,
    pub formula: CnfFormula,
    /// Nominal alpha of the grid bin; the exact ratio is `formula.alpha()`.
    pub alpha: Alpha,
    pub seed_used: u64,
}

impl InstanceRecord {
    pub fn file_name(&self) -> String {
        format!("{}.cnf", self.id)
    }
}

pub fn instance_id(alpha: Alpha, index: usize) -> String {
    format!("inst_{}_{index}", format_alpha(alpha))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a tuple of indices into an independent seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// One uniform random k-CNF instance: each clause draws k distinct variables
/// uniformly and fair-coin polarities. Instances that leave a variable
/// uncovered are redrawn whole.
pub fn generate_instance(seed: u64, num_vars: usize, num_clauses: usize, k: usize) -> Result<CnfFormula> {
    if k == 0 || num_vars < k {
        return Err(Error::InvalidSpec(format!("need at least k = {k} variables, got {num_vars}")));
    }
    if k * num_clauses < num_vars {
        return Err(Error::InvalidSpec(format!(
            "coverage unreachable: {} literal slots for {num_vars} variables",
            k * num_clauses
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_COVERAGE_ATTEMPTS {
        let mut covered = vec![false; num_vars];
        let clauses = (0..num_clauses)
            .map(|_| {
                let vars = rand::seq::index::sample(&mut rng, num_vars, k);
                let lits: Vec<Literal> = vars
                    .iter()
                    .map(|v| {
                        covered[v] = true;
                        if rng.gen::<bool>() {
                            Literal::negative(v + 1)
                        } else {
                            Literal::positive(v + 1)
                        }
                    })
                    .collect();
                Clause::new(lits).expect("distinct variables")
            })
            .collect();
        if covered.iter().all(|&c| c) {
            return CnfFormula::new(num_vars, clauses);
        }
    }
    Err(Error::InvalidSpec(format!(
        "no instance covering all {num_vars} variables after {MAX_COVERAGE_ATTEMPTS} attempts"
    )))
}

/// Generates the whole dataset. Each instance depends only on
/// `(seed, alpha index, instance index)`, so generation is parallel and still
/// reproducible.
pub fn generate(spec: &GenSpec) -> Result<Vec<InstanceRecord>> {
    spec.validate()?;
    let jobs: Vec<(usize, Alpha, usize)> = spec
        .alpha_values
        .iter()
        .zip(spec.counts())
        .enumerate()
        .flat_map(|(ai, (&a, count))| (0..count).map(move |i| (ai, a, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(ai, alpha, i)| {
            let seed_used = derive_seed(spec.seed, &[ai as u64, i as u64]);
            let num_vars = num_vars_for(spec.num_clauses, alpha);
            let formula = generate_instance(seed_used, num_vars, spec.num_clauses, spec.k)?;
            Ok(InstanceRecord {
                id: instance_id(alpha, i),
                formula,
                alpha,
                seed_used,
            })
        })
        .collect()
}

/// CSV manifest: `id,seed,num_vars,num_clauses,alpha,k`.
pub fn dataset_manifest(records: &[InstanceRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidSpec("empty dataset".into()));
    }
    let mut out = String::from("id,seed,num_vars,num_clauses,alpha,k\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.id,
            r.seed_used,
            r.formula.num_vars(),
            r.formula.num_clauses(),
            format_alpha(r.alpha),
            r.formula.uniform_width().unwrap_or(0)
        );
    }
    Ok(out)
}

/// Writes one DIMACS file per instance plus `manifest.csv` into `dir`.
pub fn write_dataset(records: &[InstanceRecord], dir: &Path) -> Result<()> {
    let manifest = dataset_manifest(records)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in records {
        let path = dir.join(r.file_name());
        fs::write(&path, emit_dimacs(&r.formula)).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

/// A manifest row.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub seed: u64,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub alpha: Alpha,
    pub k: usize,
}

impl ManifestEntry {
    /// Re-runs the generator for this row.
    pub fn regenerate(&self) -> Result<CnfFormula> {
        generate_instance(self.seed, self.num_vars, self.num_clauses, self.k)
    }
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        if rec.len() < 5 {
            return Err(Error::parse(line, "expected id,seed,num_vars,num_clauses,alpha[,k]"));
        }
        let num = |i: usize, what: &str| -> Result<u64> {
            rec[i].trim().parse().map_err(|_| Error::parse(line, format!("bad {what}")))
        };
        out.push(ManifestEntry {
            id: rec[0].to_string(),
            seed: num(1, "seed")?,
            num_vars: num(2, "num_vars")? as usize,
            num_clauses: num(3, "num_clauses")? as usize,
            alpha: parse_alpha(&rec[4]).map_err(|e| Error::parse(line, e.to_string()))?,
            k: if rec.len() > 5 { num(5, "k")? as usize } else { 3 },
        });
    }
    Ok(out)
}

/// Loads a dataset written by [`write_dataset`].
pub fn load_dataset(dir: &Path) -> Result<Vec<InstanceRecord>> {
    let mpath = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    parse_manifest(&text)?
        .into_iter()
        .map(|m| {
            let path = dir.join(format!("{}.cnf", m.id));
            let cnf = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let formula = parse_dimacs(&cnf).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
            Ok(InstanceRecord {
                id: m.id,
                formula,
                alpha: m.alpha,
                seed_used: m.seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{expected_qubit_count, Variant};

    #[test]
    fn alpha_parsing_and_formatting() {
        assert_eq!(parse_alpha("4.25").unwrap(), Ratio::new(17, 4));
        assert_eq!(parse_alpha("1/3").unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_alpha("8").unwrap(), Ratio::new(8, 1));
        assert!(parse_alpha("x").is_err());
        assert!(parse_alpha("1/0").is_err());
        assert_eq!(format_alpha(Ratio::new(4, 1)), "4.0");
        assert_eq!(format_alpha(Ratio::new(21, 5)), "4.2");
        assert_eq!(format_alpha(Ratio::new(1, 3)), "0.333333");
    }

    #[test]
    fn round_half_up() {
        assert_eq!(num_vars_for(42, parse_alpha("4.2").unwrap()), 10);
        assert_eq!(num_vars_for(42, parse_alpha("4.0").unwrap()), 11); // 10.5
        assert_eq!(num_vars_for(42, parse_alpha("8.0").unwrap()), 5); // 5.25
        assert_eq!(num_vars_for(1, Ratio::new(1, 3)), 3);
    }

    #[test]
    fn paper_scale_instance() {
        let spec = GenSpec::new(42, vec![parse_alpha("4.2").unwrap()], 1, 11);
        let recs = generate(&spec).unwrap();
        assert_eq!(recs.len(), 1);
        let f = &recs[0].formula;
        assert_eq!((f.num_vars(), f.num_clauses()), (10, 42));
        assert!(f.uncovered_vars().is_empty());
        assert!(f.clauses().iter().all(|c| c.width() == 3));
        assert_eq!(recs[0].id, "inst_4.2_0");
    }

    #[test]
    fn single_clause_covers_three_vars() {
        let spec = GenSpec::new(1, vec![Ratio::new(1, 3)], 1, 0);
        let f = &generate(&spec).unwrap()[0].formula;
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.num_clauses(), 1);
        assert!(f.uncovered_vars().is_empty());
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = GenSpec::new(20, default_alpha_grid(), 3, 1234);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 1235;
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn invalid_specs() {
        // 42 / 20 rounds to 2 variables < k
        let spec = GenSpec::new(42, vec![Ratio::new(20, 1)], 1, 0);
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
        // 2 clauses, 6 literal slots, 10 variables
        let spec = GenSpec::new(2, vec![Ratio::new(1, 5)], 1, 0);
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
        assert!(GenSpec::new(0, vec![Ratio::new(1, 1)], 1, 0).validate().is_err());
        assert!(GenSpec::new(5, vec![], 1, 0).validate().is_err());
    }

    #[test]
    fn total_instances_spread_over_grid() {
        let mut spec = GenSpec::new(42, default_alpha_grid(), 0, 0);
        spec.total_instances = Some(250);
        let counts = spec.counts();
        assert_eq!(counts.iter().sum::<usize>(), 250);
        assert_eq!(counts[0], 17);
        assert_eq!(counts[14], 16);
    }

    #[test]
    fn choi_size_stable_across_alpha() {
        let spec = GenSpec::new(42, default_alpha_grid(), 4, 5);
        for r in generate(&spec).unwrap() {
            assert_eq!(expected_qubit_count(&r.formula, Variant::ChoiMis), 126);
        }
    }

    #[test]
    fn manifest_and_regeneration() {
        let spec = GenSpec::new(42, vec![Ratio::new(3, 1), Ratio::new(9, 2)], 2, 77);
        let recs = generate(&spec).unwrap();
        let text = dataset_manifest(&recs).unwrap();
        assert_eq!(text.lines().count(), recs.len() + 1);
        for (m, r) in parse_manifest(&text).unwrap().iter().zip(&recs) {
            assert_eq!(m.id, r.id);
            assert_eq!(emit_dimacs(&m.regenerate().unwrap()), emit_dimacs(&r.formula));
        }
        assert!(dataset_manifest(&[]).is_err());
    }
}
