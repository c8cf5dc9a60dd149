use std::collections::BTreeMap;

use super::logistic::{fit_logistic, LogisticFit};
use super::svg::{line_plot, Series};
use super::{EmbedStatus, ExperimentRecord, SamplerSetting};
use crate::error::{Error, Result};
use crate::generate::{alpha_to_f64, format_alpha, Alpha};
use crate::reduction::Variant;

/// Aggregates for one reduction inside one (alpha, setting) bin.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStats {
    pub reduction: Variant,
    pub runs: usize,
    /// Runs on DPLL-satisfiable instances; only these enter the success rate.
    pub sat_runs: usize,
    pub successes: usize,
    /// `successes / sat_runs`, `None` without satisfiable instances.
    pub success_rate: Option<f64>,
    pub mean_success_prob: Option<f64>,
    /// Means skip failed embeddings; medians count them as infinitely large.
    pub mean_physical_qubits: Option<f64>,
    pub median_physical_qubits: Option<f64>,
    pub mean_median_chain: Option<f64>,
    pub median_median_chain: Option<f64>,
    pub mean_max_chain: Option<f64>,
    pub embed_failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinSummary {
    pub alpha: Alpha,
    pub setting: SamplerSetting,
    pub instances: usize,
    pub dpll_fraction: f64,
    pub per_reduction: Vec<ReductionStats>,
    /// Backbone success rate minus Choi success rate, in percentage points.
    /// A reduction absent from the records counts as rate 0.
    pub diff_pp: Option<f64>,
}

impl BinSummary {
    pub fn stats(&self, v: Variant) -> Option<&ReductionStats> {
        self.per_reduction.iter().find(|s| s.reduction == v)
    }
}

/// A logistic curve over alpha. `setting` and `reduction` are `None` for the
/// DPLL satisfiability curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFit {
    pub setting: Option<SamplerSetting>,
    pub reduction: Option<Variant>,
    /// `None` when the data cannot be fitted (fewer than two alphas).
    pub fit: Option<LogisticFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub bins: Vec<BinSummary>,
    pub fits: Vec<CurveFit>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn reduction_stats(reduction: Variant, recs: &[&ExperimentRecord]) -> ReductionStats {
    let sat: Vec<&&ExperimentRecord> = recs.iter().filter(|r| r.dpll_sat).collect();
    let successes = sat.iter().filter(|r| r.succeeded()).count();
    let probs: Vec<f64> = sat.iter().map(|r| r.success_prob).collect();
    let embedded: Vec<&&ExperimentRecord> = recs.iter().filter(|r| r.embed_status != EmbedStatus::Skipped).collect();
    let field = |f: fn(&crate::embedding::ChainStats) -> usize, fail: f64| -> Vec<f64> {
        embedded
            .iter()
            .map(|r| r.chains.as_ref().map_or(fail, |c| f(c) as f64))
            .collect()
    };
    let finite = |v: Vec<f64>| v.into_iter().filter(|x| x.is_finite()).collect::<Vec<_>>();
    ReductionStats {
        reduction,
        runs: recs.len(),
        sat_runs: sat.len(),
        successes,
        success_rate: (!sat.is_empty()).then(|| successes as f64 / sat.len() as f64),
        mean_success_prob: mean(&probs),
        mean_physical_qubits: mean(&finite(field(|c| c.physical_qubits, f64::INFINITY))),
        median_physical_qubits: median(&field(|c| c.physical_qubits, f64::INFINITY)),
        mean_median_chain: mean(&finite(field(|c| c.median_chain, f64::INFINITY))),
        median_median_chain: median(&field(|c| c.median_chain, f64::INFINITY)),
        mean_max_chain: mean(&finite(field(|c| c.max_chain, f64::INFINITY))),
        embed_failures: embedded.iter().filter(|r| r.chains.is_none()).count(),
    }
}

/// Per (alpha, setting) aggregates plus logistic curves over alpha.
pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut by_bin: BTreeMap<(Alpha, SamplerSetting), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        by_bin.entry((r.alpha, r.setting)).or_default().push(r);
    }

    let mut bins = Vec::with_capacity(by_bin.len());
    for ((alpha, setting), recs) in &by_bin {
        let mut sat_by_id: BTreeMap<&str, bool> = BTreeMap::new();
        let mut by_red: BTreeMap<Variant, Vec<&ExperimentRecord>> = BTreeMap::new();
        for r in recs {
            sat_by_id.insert(&r.instance_id, r.dpll_sat);
            by_red.entry(r.reduction).or_default().push(r);
        }
        let per_reduction: Vec<ReductionStats> = by_red.iter().map(|(&v, rs)| reduction_stats(v, rs)).collect();
        let any_sat = per_reduction.iter().any(|s| s.sat_runs > 0);
        let rate = |v: Variant| {
            per_reduction
                .iter()
                .find(|s| s.reduction == v)
                .and_then(|s| s.success_rate)
                .unwrap_or(0.0)
        };
        let choi = if by_red.contains_key(&Variant::ChoiMis) || !by_red.contains_key(&Variant::ChoiLoosened) {
            rate(Variant::ChoiMis)
        } else {
            rate(Variant::ChoiLoosened)
        };
        bins.push(BinSummary {
            alpha: *alpha,
            setting: *setting,
            instances: sat_by_id.len(),
            dpll_fraction: sat_by_id.values().filter(|&&s| s).count() as f64 / sat_by_id.len() as f64,
            diff_pp: any_sat.then(|| 100.0 * (rate(Variant::Backbone) - choi)),
            per_reduction,
        });
    }

    let mut fits = Vec::new();
    let mut dpll: BTreeMap<&str, (f64, bool)> = BTreeMap::new();
    for r in records {
        dpll.insert(&r.instance_id, (alpha_to_f64(r.alpha), r.dpll_sat));
    }
    fits.push(CurveFit {
        setting: None,
        reduction: None,
        fit: fit_logistic(&dpll.into_values().collect::<Vec<_>>()).ok(),
    });
    let mut curves: BTreeMap<(SamplerSetting, Variant), Vec<(f64, bool)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.dpll_sat) {
        curves
            .entry((r.setting, r.reduction))
            .or_default()
            .push((alpha_to_f64(r.alpha), r.succeeded()));
    }
    for ((setting, reduction), pts) in curves {
        fits.push(CurveFit {
            setting: Some(setting),
            reduction: Some(reduction),
            fit: fit_logistic(&pts).ok(),
        });
    }

    Summary { bins, fits }
}

fn num(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_infinite() => "inf".to_string(),
        Some(x) => x.to_string(),
    }
}

pub const SUMMARY_HEADER: [&str; 17] = [
    "alpha",
    "sweeps",
    "num_reads",
    "instances",
    "dpll_fraction",
    "reduction",
    "sat_runs",
    "successes",
    "success_rate",
    "mean_success_prob",
    "diff_pp",
    "mean_physical_qubits",
    "median_physical_qubits",
    "mean_median_chain",
    "median_median_chain",
    "mean_max_chain",
    "embed_failures",
];

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl Summary {
    /// One row per (alpha, setting, reduction); bin-level columns repeat.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_HEADER)?;
        for b in &self.bins {
            for s in &b.per_reduction {
                w.write_record([
                    format_alpha(b.alpha),
                    b.setting.sweeps.to_string(),
                    b.setting.num_reads.to_string(),
                    b.instances.to_string(),
                    b.dpll_fraction.to_string(),
                    s.reduction.label().to_string(),
                    s.sat_runs.to_string(),
                    s.successes.to_string(),
                    num(s.success_rate),
                    num(s.mean_success_prob),
                    num(b.diff_pp),
                    num(s.mean_physical_qubits),
                    num(s.median_physical_qubits),
                    num(s.mean_median_chain),
                    num(s.median_median_chain),
                    num(s.mean_max_chain),
                    s.embed_failures.to_string(),
                ])?;
            }
        }
        finish(w)
    }

    pub fn fits_to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["curve", "sweeps", "num_reads", "intercept", "slope", "midpoint", "separated"])?;
        for f in &self.fits {
            let curve = f.reduction.map_or("dpll", |v| v.label());
            let (sweeps, reads) = f
                .setting
                .map_or((String::new(), String::new()), |s| (s.sweeps.to_string(), s.num_reads.to_string()));
            let (b0, b1, mid, sep) = match f.fit {
                None => (None, None, None, String::new()),
                Some(LogisticFit::Fitted { intercept, slope, midpoint, .. }) => {
                    (Some(intercept), Some(slope), Some(midpoint), "false".into())
                }
                Some(LogisticFit::Separated { boundary, .. }) => (None, None, boundary, "true".into()),
            };
            w.write_record([curve.to_string(), sweeps, reads, num(b0), num(b1), num(mid), sep])?;
        }
        finish(w)
    }

    fn settings(&self) -> Vec<SamplerSetting> {
        let mut s: Vec<SamplerSetting> = self.bins.iter().map(|b| b.setting).collect();
        s.sort();
        s.dedup();
        s
    }

    fn reductions(&self) -> Vec<Variant> {
        let mut v: Vec<Variant> = self
            .bins
            .iter()
            .flat_map(|b| b.per_reduction.iter().map(|s| s.reduction))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    fn curve(&self, setting: SamplerSetting, v: Variant, f: fn(&ReductionStats) -> Option<f64>) -> Vec<(f64, f64)> {
        self.bins
            .iter()
            .filter(|b| b.setting == setting)
            .map(|b| (alpha_to_f64(b.alpha), b.stats(v).and_then(f).unwrap_or(f64::NAN)))
            .collect()
    }

    /// `(file name, svg)` pairs: one success plot per setting, then
    /// `qubits.svg` and `chains.svg`.
    pub fn plots(&self) -> Vec<(String, String)> {
        let settings = self.settings();
        let reductions = self.reductions();
        let mut out = Vec::new();
        for &s in &settings {
            let mut series: Vec<Series> = reductions
                .iter()
                .map(|&v| Series::new(v.label(), self.curve(s, v, |r| r.success_rate)))
                .collect();
            let dpll = self
                .bins
                .iter()
                .filter(|b| b.setting == s)
                .map(|b| (alpha_to_f64(b.alpha), b.dpll_fraction))
                .collect();
            series.push(Series::new("dpll sat", dpll).dashed());
            out.push((
                format!("success_{}x{}.svg", s.sweeps, s.num_reads),
                line_plot(
                    &format!("SA success, {} sweeps x {} reads", s.sweeps, s.num_reads),
                    "alpha",
                    "fraction",
                    &series,
                    Some((0.0, 1.0)),
                ),
            ));
        }
        // embedding does not depend on the sampler setting
        if let Some(&s) = settings.first() {
            let per = |f: fn(&ReductionStats) -> Option<f64>| -> Vec<Series> {
                reductions
                    .iter()
                    .map(|&v| Series::new(v.label(), self.curve(s, v, f)))
                    .collect()
            };
            out.push((
                "qubits.svg".to_string(),
                line_plot(
                    "Physical qubits (median)",
                    "alpha",
                    "qubits",
                    &per(|r| r.median_physical_qubits),
                    None,
                ),
            ));
            out.push((
                "chains.svg".to_string(),
                line_plot(
                    "Chain length (median of per-instance medians)",
                    "alpha",
                    "qubits per chain",
                    &per(|r| r.median_median_chain),
                    None,
                ),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::ChainStats;
    use crate::generate::parse_alpha;

    const S: SamplerSetting = SamplerSetting { sweeps: 100, num_reads: 5 };

    fn rec(id: usize, alpha: &str, v: Variant, sat: bool, ok: bool, qubits: Option<usize>) -> ExperimentRecord {
        ExperimentRecord {
            instance_id: format!("inst_{alpha}_{id}"),
            alpha: parse_alpha(alpha).unwrap(),
            reduction: v,
            setting: S,
            dpll_sat: sat,
            ground_energy: sat.then_some(-8.0),
            best_energy: if ok { -8.0 } else { -7.0 },
            success_prob: if ok { 0.4 } else { 0.0 },
            decoded_ok: ok,
            logical_qubits: 24,
            logical_edges: 40,
            chains: qubits.map(|q| ChainStats { physical_qubits: q, max_chain: 3, median_chain: 2 }),
            embed_status: if qubits.is_some() { EmbedStatus::Ok } else { EmbedStatus::Failed },
        }
    }

    #[test]
    fn thirty_five_point_difference() {
        let mut recs = Vec::new();
        for i in 0..20 {
            recs.push(rec(i, "4.0", Variant::Backbone, true, i < 14, Some(100)));
            recs.push(rec(i, "4.0", Variant::ChoiMis, true, i < 7, Some(200)));
        }
        let s = summarize(&recs);
        assert_eq!(s.bins.len(), 1);
        let b = &s.bins[0];
        assert_eq!(b.stats(Variant::Backbone).unwrap().success_rate, Some(0.7));
        assert_eq!(b.stats(Variant::ChoiMis).unwrap().success_rate, Some(0.35));
        assert!((b.diff_pp.unwrap() - 35.0).abs() < 1e-9);
    }

    #[test]
    fn single_record_is_one_bin() {
        let s = summarize(&[rec(0, "3.0", Variant::ChoiMis, true, true, Some(10))]);
        assert_eq!(s.bins.len(), 1);
        assert_eq!(s.bins[0].diff_pp, Some(-100.0));
        let s = summarize(&[rec(0, "3.0", Variant::Backbone, true, false, Some(10))]);
        assert_eq!(s.bins[0].diff_pp, Some(0.0));
    }

    #[test]
    fn unsat_instances_are_excluded_from_success() {
        let recs = vec![
            rec(0, "6.0", Variant::Backbone, false, false, Some(10)),
            rec(1, "6.0", Variant::Backbone, true, true, Some(10)),
        ];
        let b = &summarize(&recs).bins[0];
        assert_eq!(b.dpll_fraction, 0.5);
        let st = b.stats(Variant::Backbone).unwrap();
        assert_eq!((st.sat_runs, st.successes, st.success_rate), (1, 1, Some(1.0)));
        let all_unsat = summarize(&recs[..1]);
        assert_eq!(all_unsat.bins[0].diff_pp, None);
    }

    #[test]
    fn failed_embeddings_push_the_median() {
        let recs = vec![
            rec(0, "5.0", Variant::ChoiMis, true, false, Some(100)),
            rec(1, "5.0", Variant::ChoiMis, true, false, None),
            rec(2, "5.0", Variant::ChoiMis, true, false, None),
        ];
        let st = summarize(&recs).bins[0].stats(Variant::ChoiMis).unwrap().clone();
        assert_eq!(st.embed_failures, 2);
        assert_eq!(st.mean_physical_qubits, Some(100.0));
        assert_eq!(st.median_physical_qubits, Some(f64::INFINITY));
        assert!(summarize(&recs).to_csv().unwrap().contains(",inf,"));
    }

    #[test]
    fn dpll_fit_spans_bins() {
        let mut recs = Vec::new();
        for (k, alpha) in ["2.0", "3.0", "4.0", "5.0", "6.0"].iter().enumerate() {
            for i in 0..10 {
                let sat = i < 10 - 2 * k || (k == 0 && i == 9);
                recs.push(rec(i, alpha, Variant::Backbone, sat, sat, Some(50)));
            }
        }
        let s = summarize(&recs);
        let dpll = &s.fits[0];
        assert_eq!(dpll.reduction, None);
        let mid = dpll.fit.unwrap().midpoint().unwrap();
        assert!((3.5..=5.0).contains(&mid), "{mid}");
        let fits = s.fits_to_csv().unwrap();
        assert!(fits.starts_with("curve,sweeps,num_reads"));
        assert_eq!(fits.lines().count(), 3);
        let plots = s.plots();
        let names: Vec<&str> = plots.iter().map(|p| p.0.as_str()).collect();
        assert_eq!(names, ["success_100x5.svg", "qubits.svg", "chains.svg"]);
    }
}
