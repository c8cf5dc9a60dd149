//! k-SAT to QUBO reductions.
//!
//! Both reductions allocate one bit per literal occurrence `l_ij` (variable
//! `x_j` appearing in clause `i`), laid out clause by clause in literal order.
//!
//! * **Choi / MIS**: `-w` on every literal bit, `+d` between every pair of
//!   bits in the same clause and `+d` between every pair of bits holding
//!   opposite literals of the same variable in different clauses. With
//!   `d > w > 0` this is the maximum-independent-set encoding; `d = w`
//!   ("loosened") keeps the same ground states in terms of satisfiability.
//! * **Backbone**: one extra bit per variable. Same-clause pairs get `+w`. A
//!   positive literal is tied to its variable bit by `-w l x`; a negative one
//!   carries `-w l + w l x`. Selecting a literal is rewarded with `-w` exactly
//!   when the variable bit makes it true, so each clause still contributes
//!   `-n w + C(n, 2) w` for `n` selected true literals.
//!
//! A satisfiable formula with `|C|` clauses has ground energy `-|C| w` under
//! every variant; unsatisfiable formulas stay strictly above it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, CnfFormula};
use crate::error::{Error, Result};
use crate::qubo::{BitVector, Qubo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    ChoiMis,
    ChoiLoosened,
    Backbone,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::ChoiMis, Variant::ChoiLoosened, Variant::Backbone];

    pub fn label(self) -> &'static str {
        match self {
            Variant::ChoiMis => "choi",
            Variant::ChoiLoosened => "loosened",
            Variant::Backbone => "backbone",
        }
    }

    pub fn is_choi(self) -> bool {
        !matches!(self, Variant::Backbone)
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "choi" | "mis" | "choimis" | "choi_mis" => Ok(Variant::ChoiMis),
            "loosened" | "choiloosened" | "choi_loosened" => Ok(Variant::ChoiLoosened),
            "backbone" => Ok(Variant::Backbone),
            other => Err(Error::InvalidParams(format!("unknown reduction `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Penalty weights. `omega` rewards a selected literal, `delta` penalizes
/// clause-mates and conflicts in the Choi variants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub omega: f64,
    pub delta: f64,
    pub variant: Variant,
}

impl ReductionParams {
    /// Defaults: `omega = 1`, `delta = 2` for ChoiMis, `delta = omega` otherwise.
    pub fn new(variant: Variant) -> Self {
        Self::with_omega(variant, 1.0)
    }

    pub fn with_omega(variant: Variant, omega: f64) -> Self {
        let delta = match variant {
            Variant::ChoiMis => 2.0 * omega,
            _ => omega,
        };
        ReductionParams {
            omega,
            delta,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {}", self.omega)));
        }
        match self.variant {
            Variant::ChoiMis if !(self.delta.is_finite() && self.delta > self.omega) => Err(
                Error::InvalidParams(format!(
                    "choi requires delta > omega > 0, got delta={} omega={}",
                    self.delta, self.omega
                )),
            ),
            Variant::ChoiLoosened if self.delta != self.omega => Err(Error::InvalidParams(format!(
                "loosened requires delta = omega, got delta={} omega={}",
                self.delta, self.omega
            ))),
            _ => Ok(()),
        }
    }
}

/// Bidirectional map between QUBO bits and SAT literal occurrences/variables.
///
/// Literal keys are `(clause_index, var)` with 0-based clause index and
/// 1-based variable, as in DIMACS.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarMap {
    pub literal_bits: BTreeMap<(usize, usize), usize>,
    pub backbone_bits: BTreeMap<usize, usize>,
}

#[derive(Serialize, Deserialize)]
struct VarMapJson {
    literal_bits: Vec<[usize; 3]>,
    backbone_bits: Vec<[usize; 2]>,
}

impl VarMap {
    /// JSON sidecar: `{"literal_bits": [[i, j, bit], ...], "backbone_bits": [[j, bit], ...]}`.
    pub fn to_json(&self) -> String {
        let j = VarMapJson {
            literal_bits: self.literal_bits.iter().map(|(&(i, v), &b)| [i, v, b]).collect(),
            backbone_bits: self.backbone_bits.iter().map(|(&v, &b)| [v, b]).collect(),
        };
        serde_json::to_string_pretty(&j).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: VarMapJson = serde_json::from_str(text)?;
        let mut map = VarMap::default();
        for [i, v, b] in j.literal_bits {
            if map.literal_bits.insert((i, v), b).is_some() {
                return Err(Error::InvalidParams(format!("duplicate literal key ({i},{v})")));
            }
        }
        for [v, b] in j.backbone_bits {
            if map.backbone_bits.insert(v, b).is_some() {
                return Err(Error::InvalidParams(format!("duplicate backbone key {v}")));
            }
        }
        Ok(map)
    }

    pub fn num_bits(&self) -> usize {
        self.literal_bits.len() + self.backbone_bits.len()
    }
}

/// A reduced formula together with everything needed to interpret samples.
#[derive(Clone, Debug)]
pub struct ReductionArtifact {
    pub qubo: Qubo,
    pub map: VarMap,
    pub ground_energy_if_sat: f64,
    pub params: ReductionParams,
    pub source: CnfFormula,
}

/// Result of decoding a bit vector, with diagnostics for noisy samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub assignment: Assignment,
    /// Variables for which both polarities were selected (Choi only); the
    /// positive literal wins.
    pub conflicted_vars: Vec<usize>,
}

impl Decoded {
    pub fn is_conflicted(&self) -> bool {
        !self.conflicted_vars.is_empty()
    }
}

impl ReductionArtifact {
    pub fn variant(&self) -> Variant {
        self.params.variant
    }

    pub fn decode(&self, x: &BitVector) -> Result<Assignment> {
        Ok(self.decode_with_diagnostics(x)?.assignment)
    }

    pub fn decode_with_diagnostics(&self, x: &BitVector) -> Result<Decoded> {
        if x.len() != self.qubo.num_bits() {
            return Err(Error::LengthMismatch {
                expected: self.qubo.num_bits(),
                got: x.len(),
            });
        }
        let n = self.source.num_vars();
        if self.params.variant == Variant::Backbone {
            let values = (1..=n).map(|v| x.get(self.map.backbone_bits[&v])).collect();
            return Ok(Decoded {
                assignment: Assignment::new(values),
                conflicted_vars: Vec::new(),
            });
        }
        let mut pos = vec![false; n + 1];
        let mut neg = vec![false; n + 1];
        for (i, c) in self.source.clauses().iter().enumerate() {
            for l in c.literals() {
                if x.get(self.map.literal_bits[&(i, l.var())]) {
                    if l.is_negated() {
                        neg[l.var()] = true;
                    } else {
                        pos[l.var()] = true;
                    }
                }
            }
        }
        let values = (1..=n).map(|v| pos[v]).collect();
        let conflicted_vars = (1..=n).filter(|&v| pos[v] && neg[v]).collect();
        Ok(Decoded {
            assignment: Assignment::new(values),
            conflicted_vars,
        })
    }

    /// Whether `energy` reaches the satisfiable ground level `-|C| omega`.
    pub fn is_ground(&self, energy: f64) -> bool {
        energy <= self.ground_energy_if_sat + GROUND_TOLERANCE * self.params.omega.max(1.0)
    }
}

pub const GROUND_TOLERANCE: f64 = 1e-9;

/// Number of QUBO bits the given variant produces for `f`.
pub fn expected_qubit_count(f: &CnfFormula, variant: Variant) -> usize {
    match variant {
        Variant::Backbone => f.num_literals() + f.num_vars(),
        _ => f.num_literals(),
    }
}

fn literal_layout(f: &CnfFormula) -> Result<VarMap> {
    let mut map = VarMap::default();
    let mut bit = 0;
    for (i, c) in f.clauses().iter().enumerate() {
        for l in c.literals() {
            if map.literal_bits.insert((i, l.var()), bit).is_some() {
                return Err(Error::InvalidFormula(format!("clause {i} repeats variable {}", l.var())));
            }
            bit += 1;
        }
    }
    Ok(map)
}

fn add_clause_penalties(q: &mut Qubo, f: &CnfFormula, map: &VarMap, weight: f64) {
    for (i, c) in f.clauses().iter().enumerate() {
        let bits: Vec<usize> = c.literals().iter().map(|l| map.literal_bits[&(i, l.var())]).collect();
        for (a, &p) in bits.iter().enumerate() {
            for &r in &bits[a + 1..] {
                q.add_quadratic(p, r, weight);
            }
        }
    }
}

pub fn reduce_choi(f: &CnfFormula, params: ReductionParams) -> Result<ReductionArtifact> {
    params.validate()?;
    if !params.variant.is_choi() {
        return Err(Error::InvalidParams(format!(
            "reduce_choi called with variant {}",
            params.variant
        )));
    }
    let map = literal_layout(f)?;
    let mut q = Qubo::new(map.literal_bits.len());
    for &b in map.literal_bits.values() {
        q.add_linear(b, -params.omega);
    }
    add_clause_penalties(&mut q, f, &map, params.delta);

    // conflicts: opposite literals of the same variable in different clauses
    let mut occurrences: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); f.num_vars() + 1];
    for (i, c) in f.clauses().iter().enumerate() {
        for l in c.literals() {
            let b = map.literal_bits[&(i, l.var())];
            let slot = &mut occurrences[l.var()];
            if l.is_negated() {
                slot.1.push(b);
            } else {
                slot.0.push(b);
            }
        }
    }
    for (pos, neg) in &occurrences {
        for &p in pos {
            for &n in neg {
                q.add_quadratic(p, n, params.delta);
            }
        }
    }

    Ok(ReductionArtifact {
        qubo: q,
        map,
        ground_energy_if_sat: -(f.num_clauses() as f64) * params.omega,
        params,
        source: f.clone(),
    })
}

pub fn reduce_backbone(f: &CnfFormula, params: ReductionParams) -> Result<ReductionArtifact> {
    params.validate()?;
    if params.variant != Variant::Backbone {
        return Err(Error::InvalidParams(format!(
            "reduce_backbone called with variant {}",
            params.variant
        )));
    }
    let mut map = literal_layout(f)?;
    let offset = map.literal_bits.len();
    for v in 1..=f.num_vars() {
        map.backbone_bits.insert(v, offset + v - 1);
    }
    let w = params.omega;
    let mut q = Qubo::new(offset + f.num_vars());
    add_clause_penalties(&mut q, f, &map, w);
    for (i, c) in f.clauses().iter().enumerate() {
        for l in c.literals() {
            let lit = map.literal_bits[&(i, l.var())];
            let var = map.backbone_bits[&l.var()];
            if l.is_negated() {
                q.add_linear(lit, -w);
                q.add_quadratic(lit, var, w);
            } else {
                q.add_quadratic(lit, var, -w);
            }
        }
    }

    Ok(ReductionArtifact {
        qubo: q,
        map,
        ground_energy_if_sat: -(f.num_clauses() as f64) * w,
        params,
        source: f.clone(),
    })
}

/// Dispatches on `params.variant`.
pub fn reduce(f: &CnfFormula, params: ReductionParams) -> Result<ReductionArtifact> {
    match params.variant {
        Variant::Backbone => reduce_backbone(f, params),
        _ => reduce_choi(f, params),
    }
}

pub fn decode(artifact: &ReductionArtifact, x: &BitVector) -> Result<Assignment> {
    artifact.decode(x)
}
