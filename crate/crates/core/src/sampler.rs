//! Samplers over QUBOs: an exhaustive exact solver, single-flip simulated
//! annealing, and the [`Sampler`] trait for plugging in other backends.
//!
//! Simulated annealing stands in for the quantum annealer; its `sweeps`
//! parameter plays the role of anneal time by analogy only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{BitVector, Qubo};

/// Default hard limit on the exhaustive solver.
pub const DEFAULT_BIT_CAP: usize = 30;

/// Reads at most this far above the ground energy count as ground hits.
pub const SUCCESS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub num_reads: usize,
    pub sweeps: usize,
    /// `(initial, final)` inverse temperature; derived from the QUBO when `None`.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl SamplerParams {
    pub fn new(num_reads: usize, sweeps: usize, seed: u64) -> Self {
        SamplerParams {
            num_reads,
            sweeps,
            beta_range: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 || self.sweeps == 0 {
            return Err(Error::InvalidParams("num_reads and sweeps must be >= 1".into()));
        }
        if let Some((b0, b1)) = self.beta_range {
            if !(b0 > 0.0 && b0 < b1 && b1.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "beta range must satisfy 0 < initial < final, got ({b0}, {b1})"
                )));
            }
        }
        Ok(())
    }
}

/// `beta_init = ln 2 / max|c|`, `beta_final = ln(100 n) / min nonzero |c|`.
pub fn default_beta_range(q: &Qubo) -> (f64, f64) {
    let max = q.max_abs_coefficient();
    let Some(min) = q.min_abs_coefficient() else {
        return (0.1, 1.0);
    };
    let b0 = std::f64::consts::LN_2 / max;
    let mut b1 = (100.0 * q.num_bits().max(1) as f64).ln() / min;
    if b1 <= b0 {
        b1 = 2.0 * b0;
    }
    (b0, b1)
}

/// Geometric interpolation from `b0` to `b1`; a single sweep runs at `b1`.
pub fn geometric_beta_schedule(b0: f64, b1: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![b1];
    }
    let (l0, l1) = (b0.ln(), b1.ln());
    let step = (l1 - l0) / (sweeps - 1) as f64;
    (0..sweeps).map(|i| (l0 + step * i as f64).exp()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub bits: BitVector,
    pub energy: f64,
    pub occurrences: usize,
}

/// Samples aggregated by bit vector and sorted by ascending energy.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub sampler_label: String,
    pub params: Option<SamplerParams>,
}

impl SampleSet {
    /// Aggregates raw reads, evaluating each energy exactly.
    pub fn from_reads(
        q: &Qubo,
        reads: impl IntoIterator<Item = BitVector>,
        sampler_label: impl Into<String>,
        params: Option<SamplerParams>,
    ) -> Result<Self> {
        let mut counts: BTreeMap<BitVector, usize> = BTreeMap::new();
        for r in reads {
            if r.len() != q.num_bits() {
                return Err(Error::LengthMismatch {
                    expected: q.num_bits(),
                    got: r.len(),
                });
            }
            *counts.entry(r).or_insert(0) += 1;
        }
        let mut samples: Vec<Sample> = counts
            .into_iter()
            .map(|(bits, occurrences)| Sample {
                energy: q.energy_unchecked(bits.bits()),
                bits,
                occurrences,
            })
            .collect();
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
        Ok(SampleSet {
            samples,
            sampler_label: sampler_label.into(),
            params,
        })
    }

    pub fn num_reads(&self) -> usize {
        self.samples.iter().map(|s| s.occurrences).sum()
    }

    pub fn lowest(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with columns `read_index,energy,occurrences,bits_hex`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("read_index,energy,occurrences,bits_hex\n");
        for (i, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{i},{:?},{},{}", s.energy, s.occurrences, s.bits.to_hex());
        }
        out
    }

    pub fn from_csv(text: &str, num_bits: usize, sampler_label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut samples = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = idx + 2;
            if rec.len() != 4 {
                return Err(Error::parse(line, "expected 4 columns"));
            }
            let energy: f64 = rec[1].parse().map_err(|_| Error::parse(line, "bad energy"))?;
            let occurrences: usize = rec[2].parse().map_err(|_| Error::parse(line, "bad occurrences"))?;
            let bits =
                BitVector::from_hex(&rec[3], num_bits).ok_or_else(|| Error::parse(line, "bad bit string"))?;
            samples.push(Sample {
                bits,
                energy,
                occurrences,
            });
        }
        Ok(SampleSet {
            samples,
            sampler_label: sampler_label.into(),
            params: None,
        })
    }
}

/// Fraction of reads whose energy is within [`SUCCESS_TOLERANCE`] of `ground`.
pub fn success_probability(set: &SampleSet, ground: f64) -> f64 {
    let total = set.num_reads();
    if total == 0 {
        return 0.0;
    }
    let hits: usize = set
        .samples
        .iter()
        .filter(|s| s.energy <= ground + SUCCESS_TOLERANCE)
        .map(|s| s.occurrences)
        .sum();
    hits as f64 / total as f64
}

/// A backend that draws samples from a QUBO.
pub trait Sampler {
    fn label(&self) -> String;
    fn sample(&self, q: &Qubo) -> Result<SampleSet>;
}

#[derive(Clone, Copy, Debug)]
pub struct ExhaustiveSampler {
    pub cap: usize,
}

impl Default for ExhaustiveSampler {
    fn default() -> Self {
        ExhaustiveSampler { cap: DEFAULT_BIT_CAP }
    }
}

impl Sampler for ExhaustiveSampler {
    fn label(&self) -> String {
        "exhaustive".into()
    }

    fn sample(&self, q: &Qubo) -> Result<SampleSet> {
        solve_exhaustive_with_cap(q, self.cap)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimulatedAnnealing {
    pub params: SamplerParams,
}

impl Sampler for SimulatedAnnealing {
    fn label(&self) -> String {
        format!("sa(sweeps={})", self.params.sweeps)
    }

    fn sample(&self, q: &Qubo) -> Result<SampleSet> {
        solve_sa(q, &self.params)
    }
}

/// Compressed adjacency used by the enumeration and annealing loops.
struct Csr {
    linear: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<(usize, f64)>,
}

impl Csr {
    fn new(q: &Qubo) -> Self {
        let adj = q.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let mut nbr = Vec::new();
        start.push(0);
        for list in adj {
            nbr.extend(list);
            start.push(nbr.len());
        }
        Csr {
            linear: (0..q.num_bits()).map(|i| q.linear(i)).collect(),
            start,
            nbr,
        }
    }

    fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.nbr[self.start[i]..self.start[i + 1]]
    }
}

/// Every global minimizer, enumerated in Gray-code order with incremental
/// local fields.
pub fn solve_exhaustive(q: &Qubo) -> Result<SampleSet> {
    solve_exhaustive_with_cap(q, DEFAULT_BIT_CAP)
}

pub fn solve_exhaustive_with_cap(q: &Qubo, cap: usize) -> Result<SampleSet> {
    let n = q.num_bits();
    if n > cap.min(63) {
        return Err(Error::BitCapExceeded { bits: n, cap });
    }
    let csr = Csr::new(q);
    let tol = 1e-7 * q.max_abs_coefficient().max(1.0);

    // field[i] = c_ii + sum_j c_ij x_j
    let mut field = csr.linear.clone();
    let mut state = 0u64;
    let mut energy = 0.0;
    let mut best = 0.0;
    let mut candidates = vec![0u64];

    for step in 1..1u64 << n {
        let k = step.trailing_zeros() as usize;
        state ^= 1 << k;
        let on = state >> k & 1 == 1;
        if on {
            energy += field[k];
        } else {
            energy -= field[k];
        }
        for &(j, c) in csr.neighbors(k) {
            if on {
                field[j] += c;
            } else {
                field[j] -= c;
            }
        }
        if energy < best - tol {
            best = energy;
            candidates.clear();
            candidates.push(state);
        } else if energy <= best + tol {
            candidates.push(state);
        }
    }

    let exact: Vec<(u64, f64)> = candidates
        .into_iter()
        .map(|m| (m, q.energy_unchecked(BitVector::from_mask(m, n).bits())))
        .collect();
    let min = exact.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let eq_tol = 1e-9 * q.max_abs_coefficient().max(1.0);
    let reads = exact
        .into_iter()
        .filter(|&(_, e)| e <= min + eq_tol)
        .map(|(m, _)| BitVector::from_mask(m, n));
    SampleSet::from_reads(q, reads, "exhaustive", None)
}

/// Per-read random stream: ChaCha8 keyed by `seed`, stream number `read`.
fn read_rng(seed: u64, read: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    rng
}

/// Simulated annealing: `num_reads` independent restarts from uniform random
/// states, each running `sweeps` Metropolis sweeps (random permutation order)
/// under a geometric inverse-temperature schedule. Returns final states.
pub fn solve_sa(q: &Qubo, p: &SamplerParams) -> Result<SampleSet> {
    p.validate()?;
    let n = q.num_bits();
    let (b0, b1) = p.beta_range.unwrap_or_else(|| default_beta_range(q));
    let schedule = geometric_beta_schedule(b0, b1, p.sweeps);
    let csr = Csr::new(q);

    let reads = (0..p.num_reads).map(|r| {
        let mut rng = read_rng(p.seed, r);
        let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let mut field = csr.linear.clone();
        for i in 0..n {
            if x[i] {
                for &(j, c) in csr.neighbors(i) {
                    field[j] += c;
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        for &beta in &schedule {
            order.shuffle(&mut rng);
            for &i in &order {
                let delta = if x[i] { -field[i] } else { field[i] };
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    x[i] = !x[i];
                    let sign = if x[i] { 1.0 } else { -1.0 };
                    for &(j, c) in csr.neighbors(i) {
                        field[j] += sign * c;
                    }
                }
            }
        }
        BitVector::new(x)
    });
    let label = format!("sa(sweeps={}, reads={})", p.sweeps, p.num_reads);
    SampleSet::from_reads(q, reads, label, Some(*p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::CnfFormula;
    use crate::reduction::{reduce, ReductionParams, Variant};

    fn fig3() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(4, &[&[-2, -3, 4], &[1, 2, 4], &[-1, 3, -4]]).unwrap()
    }

    fn random_qubo(n: usize, seed: u64) -> Qubo {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = Qubo::new(n);
        for i in 0..n {
            q.add_linear(i, rng.gen_range(-3..=3) as f64);
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    q.add_quadratic(i, j, rng.gen_range(-3..=3) as f64);
                }
            }
        }
        q
    }

    /// Independent dense-matrix enumeration: minimum and minimizer count.
    fn matrix_minimizers(q: &Qubo) -> (f64, usize) {
        let n = q.num_bits();
        let mut m = vec![vec![0.0; n]; n];
        for (i, v) in q.linear_terms() {
            m[i][i] = v;
        }
        for ((i, j), v) in q.quadratic_terms() {
            m[i][j] = v;
        }
        let mut best = f64::INFINITY;
        let mut count = 0;
        for mask in 0..1u64 << n {
            let mut e = 0.0;
            for i in 0..n {
                if mask >> i & 1 == 0 {
                    continue;
                }
                for j in i..n {
                    if mask >> j & 1 == 1 {
                        e += m[i][j];
                    }
                }
            }
            if e < best {
                best = e;
                count = 1;
            } else if e == best {
                count += 1;
            }
        }
        (best, count)
    }

    #[test]
    fn single_bit_minimum() {
        let mut q = Qubo::new(1);
        q.add_linear(0, -1.0);
        let s = solve_exhaustive(&q).unwrap();
        assert_eq!(s.samples.len(), 1);
        assert_eq!(s.samples[0].energy, -1.0);
        assert_eq!(s.samples[0].bits, BitVector::new(vec![true]));
    }

    #[test]
    fn cap_is_enforced() {
        let q = Qubo::new(31);
        assert!(matches!(solve_exhaustive(&q), Err(Error::BitCapExceeded { .. })));
        assert!(matches!(
            solve_exhaustive_with_cap(&Qubo::new(5), 4),
            Err(Error::BitCapExceeded { bits: 5, cap: 4 })
        ));
    }

    #[test]
    fn exhaustive_matches_matrix_enumeration() {
        for seed in 0..40 {
            let n = 1 + (seed as usize % 16);
            let q = random_qubo(n, seed);
            let s = solve_exhaustive(&q).unwrap();
            let (min, count) = matrix_minimizers(&q);
            assert_eq!(s.samples[0].energy, min, "seed {seed}");
            assert_eq!(s.samples.len(), count, "seed {seed}");
            for smp in &s.samples {
                assert_eq!(q.energy(&smp.bits).unwrap(), smp.energy);
            }
        }
    }

    #[test]
    fn choi_example_minimizers_pick_one_literal_per_clause() {
        let f = fig3();
        let a = reduce(&f, ReductionParams::new(Variant::ChoiMis)).unwrap();
        let s = solve_exhaustive(&a.qubo).unwrap();
        assert_eq!(s.samples[0].energy, -3.0);
        for smp in &s.samples {
            for (i, c) in f.clauses().iter().enumerate() {
                let chosen = c
                    .literals()
                    .iter()
                    .filter(|l| smp.bits.get(a.map.literal_bits[&(i, l.var())]))
                    .count();
                assert_eq!(chosen, 1);
            }
            assert!(a.decode_with_diagnostics(&smp.bits).unwrap().conflicted_vars.is_empty());
        }
    }

    #[test]
    fn backbone_contradiction_minimum() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let a = reduce(&f, ReductionParams::new(Variant::Backbone)).unwrap();
        assert_eq!(solve_exhaustive(&a.qubo).unwrap().samples[0].energy, -1.0);
    }

    #[test]
    fn sa_is_deterministic() {
        let q = random_qubo(12, 3);
        let p = SamplerParams::new(1, 1, 99);
        let a = solve_sa(&q, &p).unwrap();
        let b = solve_sa(&q, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_reads(), 1);
    }

    #[test]
    fn sa_finds_choi_ground_state() {
        let a = reduce(&fig3(), ReductionParams::new(Variant::ChoiMis)).unwrap();
        let exact = solve_exhaustive(&a.qubo).unwrap().samples[0].energy;
        let mut rates = Vec::new();
        for seed in 0..20 {
            let s = solve_sa(&a.qubo, &SamplerParams::new(100, 500, seed)).unwrap();
            assert_eq!(s.lowest().unwrap().energy, exact);
            assert_eq!(s.num_reads(), 100);
            rates.push(success_probability(&s, exact));
        }
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        assert!(mean >= 0.9, "mean success {mean}");
    }

    #[test]
    fn sa_never_beats_exhaustive() {
        for seed in 0..20 {
            let q = random_qubo(14, 100 + seed);
            let exact = solve_exhaustive(&q).unwrap().samples[0].energy;
            let s = solve_sa(&q, &SamplerParams::new(20, 50, seed)).unwrap();
            for smp in &s.samples {
                assert!(smp.energy >= exact - 1e-12);
                assert_eq!(q.energy(&smp.bits).unwrap(), smp.energy);
            }
            assert!(s.samples.windows(2).all(|w| w[0].energy <= w[1].energy));
        }
    }

    #[test]
    fn success_probability_counts_reads() {
        let mut q = Qubo::new(1);
        q.add_linear(0, -1.0);
        let mut reads = vec![BitVector::new(vec![true]); 37];
        reads.extend(vec![BitVector::new(vec![false]); 63]);
        let s = SampleSet::from_reads(&q, reads, "test", None).unwrap();
        assert_eq!(success_probability(&s, -1.0), 0.37);
        assert_eq!(success_probability(&s, -5.0), 0.0);
        let all = SampleSet::from_reads(&q, vec![BitVector::new(vec![true]); 4], "t", None).unwrap();
        assert_eq!(success_probability(&all, -1.0), 1.0);
    }

    #[test]
    fn params_validation() {
        assert!(SamplerParams::new(0, 1, 0).validate().is_err());
        let mut p = SamplerParams::new(1, 1, 0);
        p.beta_range = Some((2.0, 1.0));
        assert!(p.validate().is_err());
    }

    #[test]
    fn schedule_is_geometric() {
        let s = geometric_beta_schedule(0.1, 10.0, 3);
        assert!((s[0] - 0.1).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12 && (s[2] - 10.0).abs() < 1e-12);
        assert_eq!(geometric_beta_schedule(0.1, 10.0, 1), vec![10.0]);
    }

    #[test]
    fn csv_round_trip() {
        let q = random_qubo(10, 5);
        let s = solve_sa(&q, &SamplerParams::new(8, 5, 1)).unwrap();
        let text = s.to_csv();
        assert!(text.starts_with("read_index,energy,occurrences,bits_hex\n"));
        let back = SampleSet::from_csv(&text, 10, s.sampler_label.clone()).unwrap();
        assert_eq!(back.samples, s.samples);
    }
}
