use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::embedding::ChimeraDims;
use crate::error::{Error, Result};
use crate::generate::{default_alpha_grid, format_alpha, parse_alpha, Alpha, GenSpec};
use crate::reduction::Variant;

/// Where the instances come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetRef {
    /// A directory written by `write_dataset`.
    Dir(PathBuf),
    /// Generated on the fly.
    Generate(GenSpec),
}

/// One sampler configuration of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SamplerSetting {
    pub sweeps: usize,
    pub num_reads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub dataset: DatasetRef,
    pub reductions: Vec<Variant>,
    pub grid: Vec<SamplerSetting>,
    /// `None` skips embedding.
    pub hw: Option<ChimeraDims>,
    /// Independent annealing runs per setting, pooled into one record.
    pub repetitions: usize,
    pub embed_tries: usize,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    /// 250 instances with 42 clauses spread over alpha 1.0..=8.0 in steps of
    /// 0.5, both main reductions, sweeps {10, 100, 1000} x reads {5, 100},
    /// embedded into a 16x16x4 Chimera.
    fn default() -> Self {
        let mut gen = GenSpec::new(42, default_alpha_grid(), 0, 0);
        gen.total_instances = Some(250);
        ExperimentSpec {
            dataset: DatasetRef::Generate(gen),
            reductions: vec![Variant::ChoiMis, Variant::Backbone],
            grid: cross(&[10, 100, 1000], &[5, 100]),
            hw: Some(ChimeraDims::DW2000Q),
            repetitions: 1,
            embed_tries: 4,
            seed: 0,
        }
    }
}

fn cross(sweeps: &[usize], reads: &[usize]) -> Vec<SamplerSetting> {
    sweeps
        .iter()
        .flat_map(|&s| reads.iter().map(move |&r| SamplerSetting { sweeps: s, num_reads: r }))
        .collect()
}

/// Keys understood by [`ExperimentSpec::parse`], for `--help` output.
pub const SPEC_KEYS: &str = "\
# lines are `key = value`; `#` starts a comment; omitted keys keep defaults
dataset      = generate | <directory with manifest.csv>
clauses      = 42                 # generated datasets only
alphas       = 1.0:8.0:0.5        # start:stop:step, or a comma list
per_alpha    = 50                 # instances per alpha ...
instances    = 250                # ... or a total spread over the alphas
k            = 3
reductions   = choi,backbone      # choi | loosened | backbone
sweeps       = 10,100,1000        # crossed with reads ...
reads        = 5,100
grid         = 10x5,1000x100      # ... or explicit sweeps x reads pairs
chimera      = 16x16x4 | none
repetitions  = 1
embed_tries  = 4
seed         = 0";

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.grid.is_empty() {
            return bad("sampler grid is empty");
        }
        if self.grid.iter().any(|s| s.sweeps == 0 || s.num_reads == 0) {
            return bad("sweeps and reads must be >= 1");
        }
        if self.reductions.is_empty() {
            return bad("no reductions selected");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1");
        }
        if self.hw.is_some() && self.embed_tries == 0 {
            return bad("embed_tries must be >= 1");
        }
        match &self.dataset {
            DatasetRef::Generate(g) => g.validate(),
            DatasetRef::Dir(d) if !d.join(crate::generate::MANIFEST_FILE).is_file() => Err(Error::InvalidSpec(
                format!("dataset {} has no manifest", d.display()),
            )),
            DatasetRef::Dir(_) => Ok(()),
        }
    }

    /// Applies `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let DatasetRef::Generate(mut gen) = spec.dataset.clone() else {
            unreachable!()
        };
        let mut dir: Option<PathBuf> = None;
        let mut sweeps: Option<Vec<usize>> = None;
        let mut reads: Option<Vec<usize>> = None;
        let mut grid: Option<Vec<SamplerSetting>> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let err = |e: Error| Error::parse(line_no, format!("{key}: {e}"));
            let num = |v: &str| -> Result<u64> {
                v.trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("{key}: bad number `{v}`")))
            };
            let list = |v: &str| -> Result<Vec<usize>> {
                v.split(',').map(|x| num(x).map(|n| n as usize)).collect()
            };
            match key {
                "dataset" => {
                    dir = (value != "generate").then(|| PathBuf::from(value));
                }
                "clauses" => gen.num_clauses = num(value)? as usize,
                "alphas" => gen.alpha_values = parse_alpha_list(value).map_err(err)?,
                "per_alpha" => {
                    gen.instances_per_alpha = num(value)? as usize;
                    gen.total_instances = None;
                }
                "instances" => gen.total_instances = Some(num(value)? as usize),
                "k" => gen.k = num(value)? as usize,
                "reductions" => {
                    spec.reductions = value
                        .split(',')
                        .map(|v| v.parse::<Variant>())
                        .collect::<Result<_>>()
                        .map_err(err)?;
                }
                "sweeps" => sweeps = Some(list(value)?),
                "reads" => reads = Some(list(value)?),
                "grid" => {
                    grid = Some(
                        value
                            .split(',')
                            .map(|pair| {
                                let (s, r) = pair
                                    .trim()
                                    .split_once('x')
                                    .ok_or_else(|| Error::parse(line_no, format!("grid: bad pair `{pair}`")))?;
                                Ok(SamplerSetting {
                                    sweeps: num(s)? as usize,
                                    num_reads: num(r)? as usize,
                                })
                            })
                            .collect::<Result<_>>()?,
                    );
                }
                "chimera" => {
                    spec.hw = if value == "none" {
                        None
                    } else {
                        Some(value.parse().map_err(err)?)
                    };
                }
                "repetitions" => spec.repetitions = num(value)? as usize,
                "embed_tries" => spec.embed_tries = num(value)? as usize,
                "seed" => spec.seed = num(value)?,
                other => return Err(Error::parse(line_no, format!("unknown key `{other}`"))),
            }
        }

        spec.grid = match (grid, sweeps, reads) {
            (Some(g), None, None) => g,
            (Some(_), _, _) => {
                return Err(Error::InvalidSpec("use either `grid` or `sweeps`/`reads`, not both".into()))
            }
            (None, s, r) => cross(
                &s.unwrap_or_else(|| vec![10, 100, 1000]),
                &r.unwrap_or_else(|| vec![5, 100]),
            ),
        };
        gen.seed = spec.seed;
        spec.dataset = match dir {
            Some(d) => DatasetRef::Dir(d),
            None => DatasetRef::Generate(gen),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical `key = value` rendering; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.dataset {
            DatasetRef::Dir(d) => {
                let _ = writeln!(out, "dataset = {}", d.display());
            }
            DatasetRef::Generate(g) => {
                let _ = writeln!(out, "dataset = generate");
                let _ = writeln!(out, "clauses = {}", g.num_clauses);
                let alphas: Vec<String> = g.alpha_values.iter().map(|&a| format_alpha(a)).collect();
                let _ = writeln!(out, "alphas = {}", alphas.join(","));
                match g.total_instances {
                    Some(t) => {
                        let _ = writeln!(out, "instances = {t}");
                    }
                    None => {
                        let _ = writeln!(out, "per_alpha = {}", g.instances_per_alpha);
                    }
                }
                let _ = writeln!(out, "k = {}", g.k);
            }
        }
        let reds: Vec<&str> = self.reductions.iter().map(|r| r.label()).collect();
        let _ = writeln!(out, "reductions = {}", reds.join(","));
        let grid: Vec<String> = self.grid.iter().map(|s| format!("{}x{}", s.sweeps, s.num_reads)).collect();
        let _ = writeln!(out, "grid = {}", grid.join(","));
        match self.hw {
            Some(d) => {
                let _ = writeln!(out, "chimera = {d}");
            }
            None => {
                let _ = writeln!(out, "chimera = none");
            }
        }
        let _ = writeln!(out, "repetitions = {}", self.repetitions);
        let _ = writeln!(out, "embed_tries = {}", self.embed_tries);
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }

    /// First 16 hex digits of the SHA-256 of [`to_text`](Self::to_text).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// `a:b:step` (inclusive) or `a,b,c`.
pub fn parse_alpha_list(s: &str) -> Result<Vec<Alpha>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step) = (parse_alpha(parts[0])?, parse_alpha(parts[1])?, parse_alpha(parts[2])?);
        if *step.numer() == 0 || hi < lo {
            return Err(Error::InvalidSpec(format!("bad alpha range `{s}`")));
        }
        let mut out = Vec::new();
        let mut a = lo;
        while a <= hi {
            out.push(a);
            a += step;
        }
        return Ok(out);
    }
    s.split(',').map(parse_alpha).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = ExperimentSpec::default();
        assert_eq!(s.grid.len(), 6);
        let DatasetRef::Generate(g) = &s.dataset else { panic!() };
        assert_eq!(g.alpha_values.len(), 15);
        assert_eq!(g.counts().iter().sum::<usize>(), 250);
        s.validate().unwrap();
    }

    #[test]
    fn parse_overrides_and_round_trips() {
        let text = "
            # tiny run
            clauses = 21
            alphas = 2.5:3.5:0.5
            per_alpha = 4
            reductions = backbone
            grid = 10x100, 1000x100
            chimera = none
            seed = 7
        ";
        let s = ExperimentSpec::parse(text).unwrap();
        assert_eq!(s.reductions, vec![Variant::Backbone]);
        assert_eq!(s.grid[1], SamplerSetting { sweeps: 1000, num_reads: 100 });
        assert_eq!(s.hw, None);
        let DatasetRef::Generate(g) = &s.dataset else { panic!() };
        assert_eq!(g.alpha_values.len(), 3);
        assert_eq!((g.num_clauses, g.instances_per_alpha, g.seed), (21, 4, 7));
        let again = ExperimentSpec::parse(&s.to_text()).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.hash(), s.hash());
        assert_ne!(ExperimentSpec::default().hash(), s.hash());
    }

    #[test]
    fn parse_errors() {
        assert!(ExperimentSpec::parse("nonsense").is_err());
        assert!(ExperimentSpec::parse("colour = blue").is_err());
        assert!(ExperimentSpec::parse("sweeps = 10\ngrid = 10x5").is_err());
        assert!(ExperimentSpec::parse("grid = 0x5").is_err());
        assert!(ExperimentSpec::parse("reductions = foo").is_err());
        assert!(ExperimentSpec::parse("dataset = /definitely/not/here").is_err());
    }
}
