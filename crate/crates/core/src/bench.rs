//! Synthetic two-environment study: random SEMs, one perturbed copy, and the
//! error and UD ratios of each algorithm against the true DAG.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discovery::{
    baseline, lre_from_essential, pc_from_moments, BaselineOptions, LreOptions, SampleOracle, SkeletonOptions,
};
use crate::error::{Error, Result};
use crate::graph::{Dag, MixedGraph};
use crate::invariance::neighbor_corrected_alpha;
use crate::par::par_map;
use crate::sem::{perturb_environment, random_sem, RandomSemConfig};
use crate::stats::Moments;
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PcOnly,
    Lre,
    Baseline,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PcOnly => "pc_only",
            Algorithm::Lre => "lre",
            Algorithm::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pc_only" | "pc" => Ok(Algorithm::PcOnly),
            "lre" => Ok(Algorithm::Lre),
            "baseline" => Ok(Algorithm::Baseline),
            _ => Err(Error::InvalidRequest(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub p: usize,
    pub edge_prob: f64,
    pub coeff_range: (f64, f64),
    pub var_range: (f64, f64),
    /// Samples per environment.
    pub n_samples: usize,
    pub n_models: usize,
    pub i_sizes: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Minimum change of a perturbed noise variance.
    pub min_change: f64,
    /// Keep DOT renderings of every truth and estimate in the report.
    pub keep_graphs: bool,
}

impl BenchConfig {
    /// p = 10, edge probability 0.25, 10⁵ samples, 100 models, |I| = 1..=5.
    pub fn full() -> Self {
        BenchConfig {
            p: 10,
            edge_prob: 0.25,
            coeff_range: (0.1, 2.0),
            var_range: (0.1, 4.0),
            n_samples: 100_000,
            n_models: 100,
            i_sizes: (1..=5).collect(),
            alpha: 0.01,
            seed: 2017,
            algorithms: vec![Algorithm::PcOnly, Algorithm::Lre],
            min_change: 0.1,
            keep_graphs: false,
        }
    }

    /// Quick variant: 10⁴ samples and 20 models. Numbers are noisier and
    /// are not expected to match the full preset.
    pub fn ci() -> Self {
        BenchConfig {
            n_samples: 10_000,
            n_models: 20,
            ..BenchConfig::full()
        }
    }

    pub fn sem_config(&self) -> RandomSemConfig {
        RandomSemConfig {
            p: self.p,
            edge_prob: self.edge_prob,
            coeff_range: self.coeff_range,
            var_range: self.var_range,
            signed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRequest(m));
        self.sem_config().validate()?;
        if self.n_models == 0 {
            return bad("n_models must be positive".into());
        }
        if self.n_samples <= self.p {
            return bad(format!("n_samples must exceed p = {}", self.p));
        }
        if self.i_sizes.is_empty() {
            return bad("i_sizes must not be empty".into());
        }
        if let Some(k) = self.i_sizes.iter().find(|&&k| k > self.p) {
            return bad(format!("|I| = {k} exceeds p = {}", self.p));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if !(self.min_change >= 0.0) {
            return bad("min_change must be nonnegative".into());
        }
        Ok(())
    }
}

/// Link counts of an estimate against the truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCounts {
    pub missing: usize,
    pub extra: usize,
    /// Directed estimates pointing against the true edge.
    pub reversed: usize,
    /// Undirected estimates on true links.
    pub correct_undirected: usize,
    /// Directed estimates that agree with the true edge.
    pub correct_directed: usize,
}

impl LinkCounts {
    pub fn of(estimated: &MixedGraph, truth: &Dag) -> Result<Self> {
        if estimated.p() != truth.p() {
            return Err(Error::Contract(format!(
                "estimate over {} variables, truth over {}",
                estimated.p(),
                truth.p()
            )));
        }
        let t = truth.as_mixed();
        let mut c = LinkCounts::default();
        for a in 0..t.p() {
            for b in (a + 1)..t.p() {
                match (estimated.is_adjacent(a, b), t.is_adjacent(a, b)) {
                    (true, false) => c.extra += 1,
                    (false, true) => c.missing += 1,
                    (true, true) => {
                        if estimated.has_undirected(a, b) {
                            c.correct_undirected += 1;
                        } else if estimated.has_directed(a, b) == t.has_directed(a, b) {
                            c.correct_directed += 1;
                        } else {
                            c.reversed += 1;
                        }
                    }
                    (false, false) => {}
                }
            }
        }
        Ok(c)
    }

    pub fn error_ratio(&self, p: usize) -> f64 {
        let pairs = p * p.saturating_sub(1) / 2;
        if pairs == 0 {
            return 0.0;
        }
        (self.missing + self.extra + self.reversed) as f64 / pairs as f64
    }

    /// `None` when no true link was detected.
    pub fn ud_ratio(&self) -> Option<f64> {
        let den = self.correct_undirected + self.correct_directed;
        (den > 0).then(|| self.correct_undirected as f64 / den as f64)
    }
}

/// Missing plus extra links plus reversed directed edges, over `p(p-1)/2`.
pub fn error_ratio(estimated: &MixedGraph, truth: &Dag) -> Result<f64> {
    Ok(LinkCounts::of(estimated, truth)?.error_ratio(truth.p()))
}

/// Undirected over all correctly detected links; 0 when there are none.
pub fn ud_ratio(estimated: &MixedGraph, truth: &Dag) -> Result<f64> {
    Ok(LinkCounts::of(estimated, truth)?.ud_ratio().unwrap_or(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmScore {
    pub algorithm: Algorithm,
    pub counts: LinkCounts,
    pub error_ratio: f64,
    pub ud_ratio: f64,
    /// UD ratio was undefined and set to 0.
    pub ud_undefined: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub model: usize,
    pub i_size: usize,
    pub changed: VarSet,
    pub n_edges: usize,
    pub scores: Vec<AlgorithmScore>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_dot: Option<String>,
    /// Seconds spent per algorithm, shared stages attributed to each.
    pub seconds: BTreeMap<Algorithm, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub i_size: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub n_ud_undefined: usize,
    pub mean_error_ratio: Option<f64>,
    pub se_error_ratio: Option<f64>,
    pub mean_ud_ratio: Option<f64>,
    pub se_ud_ratio: Option<f64>,
    pub mean_seconds: Option<f64>,
}

/// PC-only minus LRE, per |I|, over models where both succeeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdGap {
    pub i_size: usize,
    pub n_paired: usize,
    /// Difference of mean UD ratios in ratio units.
    pub absolute: Option<f64>,
    /// Paired standard error of `absolute`.
    pub se_absolute: Option<f64>,
    /// `absolute` divided by the PC-only mean.
    pub relative: Option<f64>,
    /// LRE mean error ratio minus PC-only mean error ratio.
    pub error_ratio_diff: Option<f64>,
    pub se_error_ratio_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub provenance: Provenance,
    pub summaries: Vec<Summary>,
    pub ud_gaps: Vec<UdGap>,
    pub runs: Vec<ModelRun>,
    pub total_seconds: f64,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over a combined key.
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs every (model, |I|) combination. The SEM and first environment of a
/// model are shared across |I| values; PC-only and LRE share one PC run.
pub fn run_synthetic(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..config.n_models)
        .flat_map(|m| config.i_sizes.iter().map(move |&k| (m, k)))
        .collect();
    let runs = par_map(&jobs, |&(m, k)| {
        let mut run = ModelRun {
            model: m,
            i_size: k,
            changed: VarSet::EMPTY,
            n_edges: 0,
            scores: Vec::new(),
            error: None,
            truth_dot: None,
            seconds: BTreeMap::new(),
        };
        if let Err(e) = run_one(config, &mut run) {
            log::warn!("model {m}, |I| = {k}: {e}");
            run.error = Some(e.to_string());
            run.scores.clear();
        }
        run
    });
    let summaries = summarize(config, &runs);
    let ud_gaps = gaps(config, &runs);
    Ok(BenchReport {
        config: config.clone(),
        provenance: Provenance {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            threads: threads(),
        },
        summaries,
        ud_gaps,
        runs,
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

fn run_one(config: &BenchConfig, run: &mut ModelRun) -> Result<()> {
    let (m, k) = (run.model as u64, run.i_size as u64);
    let sem = random_sem(&config.sem_config(), mix(config.seed, m, 0))?;
    let truth = sem.dag();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, m, 1 + k));
    let changed: VarSet = sample(&mut rng, config.p, run.i_size).into_iter().collect();
    let sem = perturb_environment(
        &sem,
        changed,
        config.var_range,
        config.min_change,
        mix(config.seed, m, 100 + k),
    )?;
    let envs = [
        sem.sample(0, config.n_samples, mix(config.seed, m, 200))?,
        sem.sample(1, config.n_samples, mix(config.seed, m, 300 + k))?,
    ];
    run.changed = changed;
    run.n_edges = truth.n_edges();
    if config.keep_graphs {
        run.truth_dot = Some(truth.to_dot());
    }

    let wants = |a| config.algorithms.contains(&a);
    let skeleton = SkeletonOptions {
        alpha: config.alpha,
        max_cond: None,
    };
    if wants(Algorithm::PcOnly) || wants(Algorithm::Lre) {
        let t0 = Instant::now();
        let moments: Vec<Moments> = envs.iter().map(Moments::from_data).collect();
        let ess = pc_from_moments(&moments, &skeleton)?.graph;
        let pc_secs = t0.elapsed().as_secs_f64();
        if wants(Algorithm::PcOnly) {
            run.scores
                .push(score(Algorithm::PcOnly, &ess, &truth, config.keep_graphs)?);
            run.seconds.insert(Algorithm::PcOnly, pc_secs);
        }
        if wants(Algorithm::Lre) {
            let t1 = Instant::now();
            let level = neighbor_corrected_alpha(config.alpha, config.p, ess.max_degree());
            let oracle = SampleOracle::from_moments(moments[0].clone(), moments[1].clone(), level);
            let opts = LreOptions {
                alpha: config.alpha,
                skeleton,
                ..Default::default()
            };
            let out = lre_from_essential(&ess, &[((0, 1), oracle)], &opts)?;
            run.scores
                .push(score(Algorithm::Lre, &out.graph, &truth, config.keep_graphs)?);
            run.seconds.insert(Algorithm::Lre, pc_secs + t1.elapsed().as_secs_f64());
        }
    }
    if wants(Algorithm::Baseline) {
        let t0 = Instant::now();
        let opts = BaselineOptions {
            alpha: config.alpha,
            skeleton,
            ..Default::default()
        };
        let out = baseline(&envs, &opts)?;
        run.scores
            .push(score(Algorithm::Baseline, &out.graph, &truth, config.keep_graphs)?);
        run.seconds.insert(Algorithm::Baseline, t0.elapsed().as_secs_f64());
    }
    Ok(())
}

fn score(algorithm: Algorithm, est: &MixedGraph, truth: &Dag, keep: bool) -> Result<AlgorithmScore> {
    let counts = LinkCounts::of(est, truth)?;
    let ud = counts.ud_ratio();
    Ok(AlgorithmScore {
        algorithm,
        counts,
        error_ratio: counts.error_ratio(truth.p()),
        ud_ratio: ud.unwrap_or(0.0),
        ud_undefined: ud.is_none(),
        dot: keep.then(|| est.to_dot()),
    })
}

fn mean_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = xs.len();
    if n == 0 {
        return (None, None);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

fn summarize(config: &BenchConfig, runs: &[ModelRun]) -> Vec<Summary> {
    let mut out = Vec::new();
    for &alg in &config.algorithms {
        for &k in &config.i_sizes {
            let at_k: Vec<&ModelRun> = runs.iter().filter(|r| r.i_size == k).collect();
            let scores: Vec<&AlgorithmScore> = at_k
                .iter()
                .filter_map(|r| r.scores.iter().find(|s| s.algorithm == alg))
                .collect();
            let secs: Vec<f64> = at_k.iter().filter_map(|r| r.seconds.get(&alg).copied()).collect();
            let (me, se) = mean_se(&scores.iter().map(|s| s.error_ratio).collect::<Vec<_>>());
            let (mu, su) = mean_se(&scores.iter().map(|s| s.ud_ratio).collect::<Vec<_>>());
            out.push(Summary {
                algorithm: alg,
                i_size: k,
                n_ok: scores.len(),
                n_failed: at_k.len() - scores.len(),
                n_ud_undefined: scores.iter().filter(|s| s.ud_undefined).count(),
                mean_error_ratio: me,
                se_error_ratio: se,
                mean_ud_ratio: mu,
                se_ud_ratio: su,
                mean_seconds: mean_se(&secs).0,
            });
        }
    }
    out
}

fn gaps(config: &BenchConfig, runs: &[ModelRun]) -> Vec<UdGap> {
    if !(config.algorithms.contains(&Algorithm::PcOnly) && config.algorithms.contains(&Algorithm::Lre)) {
        return Vec::new();
    }
    config
        .i_sizes
        .iter()
        .map(|&k| {
            let mut ud = Vec::new();
            let mut err = Vec::new();
            let mut pc_ud = Vec::new();
            for r in runs.iter().filter(|r| r.i_size == k) {
                let get = |a| r.scores.iter().find(|s| s.algorithm == a);
                if let (Some(pc), Some(l)) = (get(Algorithm::PcOnly), get(Algorithm::Lre)) {
                    ud.push(pc.ud_ratio - l.ud_ratio);
                    err.push(l.error_ratio - pc.error_ratio);
                    pc_ud.push(pc.ud_ratio);
                }
            }
            let (a, sa) = mean_se(&ud);
            let (e, se) = mean_se(&err);
            let base = mean_se(&pc_ud).0;
            UdGap {
                i_size: k,
                n_paired: ud.len(),
                absolute: a,
                se_absolute: sa,
                relative: a.zip(base).filter(|(_, b)| *b > 0.0).map(|(a, b)| a / b),
                error_ratio_diff: e,
                se_error_ratio_diff: se,
            }
        })
        .collect()
}

impl BenchReport {
    pub fn summary(&self, algorithm: Algorithm, i_size: usize) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.algorithm == algorithm && s.i_size == i_size)
    }

    pub fn gap(&self, i_size: usize) -> Option<&UdGap> {
        self.ud_gaps.iter().find(|g| g.i_size == i_size)
    }

    /// Zeroes wall-clock fields so that reports of identical runs compare
    /// equal.
    pub fn without_timing(mut self) -> Self {
        self.total_seconds = 0.0;
        for s in &mut self.summaries {
            s.mean_seconds = None;
        }
        for r in &mut self.runs {
            r.seconds.values_mut().for_each(|v| *v = 0.0);
        }
        self.provenance.threads = 0;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per (algorithm, |I|).
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for s in &self.summaries {
            wr.serialize(s).map_err(|e| Error::InvalidRequest(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes `model{m}_i{k}_truth.dot` and `model{m}_i{k}_{algorithm}.dot`
    /// for runs that kept their graphs.
    pub fn write_dot_dump(&self, dir: &Path) -> Result<usize> {
        std::fs::create_dir_all(dir)?;
        let mut n = 0;
        for r in &self.runs {
            let stem = format!("model{}_i{}", r.model, r.i_size);
            if let Some(dot) = &r.truth_dot {
                std::fs::write(dir.join(format!("{stem}_truth.dot")), dot)?;
                n += 1;
            }
            for s in &r.scores {
                if let Some(dot) = &s.dot {
                    std::fs::write(dir.join(format!("{stem}_{}.dot", s.algorithm.name())), dot)?;
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::essential_graph;

    #[test]
    fn essential_graph_has_no_link_errors() {
        let truth = Dag::new(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let est = essential_graph(&truth);
        assert_eq!(error_ratio(&est, &truth).unwrap(), 0.0);
        let chain = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(error_ratio(&essential_graph(&chain), &chain).unwrap(), 0.0);
        assert_eq!(ud_ratio(&essential_graph(&chain), &chain).unwrap(), 1.0);
    }

    #[test]
    fn reversed_edge_on_two_variables() {
        let truth = Dag::new(2, &[(0, 1)]).unwrap();
        let est = MixedGraph::from_edges(2, &[(1, 0)], &[]).unwrap();
        assert_eq!(error_ratio(&est, &truth).unwrap(), 1.0);
        assert_eq!(ud_ratio(&est, &truth).unwrap(), 0.0);
        assert_eq!(LinkCounts::of(&est, &truth).unwrap().ud_ratio(), None);
    }

    #[test]
    fn spurious_link_over_three_pairs() {
        let truth = Dag::new(3, &[(0, 1)]).unwrap();
        let est = MixedGraph::from_edges(3, &[(0, 1)], &[(0, 2)]).unwrap();
        assert!((error_ratio(&est, &truth).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ud_ratio_arithmetic() {
        let truth = Dag::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let est = MixedGraph::from_edges(5, &[(3, 4)], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(ud_ratio(&est, &truth).unwrap(), 0.75);
        let directed = MixedGraph::from_edges(5, &truth.edges(), &[]).unwrap();
        assert_eq!(ud_ratio(&directed, &truth).unwrap(), 0.0);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let truth = Dag::new(2, &[(0, 1)]).unwrap();
        assert!(error_ratio(&MixedGraph::new(3), &truth).is_err());
    }

    #[test]
    fn validation() {
        assert!(BenchConfig::full().validate().is_ok());
        let bad = [
            BenchConfig {
                n_models: 0,
                ..BenchConfig::ci()
            },
            BenchConfig {
                i_sizes: vec![11],
                ..BenchConfig::ci()
            },
            BenchConfig {
                alpha: 1.0,
                ..BenchConfig::ci()
            },
            BenchConfig {
                algorithms: vec![],
                ..BenchConfig::ci()
            },
        ];
        for c in bad {
            assert!(run_synthetic(&c).is_err(), "{c:?}");
        }
    }

    fn small() -> BenchConfig {
        BenchConfig {
            p: 5,
            edge_prob: 0.4,
            n_samples: 2_000,
            n_models: 3,
            i_sizes: vec![0, 1],
            algorithms: vec![Algorithm::PcOnly, Algorithm::Lre, Algorithm::Baseline],
            keep_graphs: true,
            ..BenchConfig::ci()
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_synthetic(&small()).unwrap().without_timing();
        let b = run_synthetic(&small()).unwrap().without_timing();
        assert_eq!(a, b);
        assert_eq!(a.summaries.len(), 6);
        assert!(a.runs.iter().all(|r| r.error.is_none()));
        for s in &a.summaries {
            assert!((0.0..=1.0).contains(&s.mean_error_ratio.unwrap()));
            assert!((0.0..=1.0).contains(&s.mean_ud_ratio.unwrap()));
        }
    }

    #[test]
    fn no_change_gives_no_gap() {
        let r = run_synthetic(&small()).unwrap();
        let g = r.gap(0).unwrap();
        assert_eq!(g.absolute, Some(0.0));
        assert_eq!(g.error_ratio_diff, Some(0.0));
    }

    #[test]
    fn report_round_trips_and_dumps() {
        let r = run_synthetic(&small()).unwrap();
        assert_eq!(BenchReport::from_json(&r.to_json()).unwrap(), r);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + r.summaries.len());
        assert!(text.starts_with("algorithm,i_size,"));
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(r.write_dot_dump(dir.path()).unwrap(), 6 * 4);
    }
}
