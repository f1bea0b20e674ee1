//! Structure-recovery metrics and simulation experiments.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admg::{mag_projection, random_admg, Admg, GraphClass};
use crate::discovery::{discover, Hyperparams};
use crate::error::{Error, Result};
use crate::linsem::{random_parameters, sample_data, Dataset};
use crate::numfmt::sig12;

/// Edge probabilities of the random bow-free graphs used as targets.
pub const RANDOM_P_DIRECTED: f64 = 0.4;
pub const RANDOM_P_BIDIRECTED: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    /// Items in the true graph.
    pub truth: usize,
    /// Items in the predicted graph.
    pub predicted: usize,
    /// Items in both.
    pub hits: usize,
}

impl Counts {
    pub fn tpr(&self) -> Option<f64> {
        (self.truth > 0).then(|| self.hits as f64 / self.truth as f64)
    }

    pub fn fdr(&self) -> Option<f64> {
        (self.predicted > 0).then(|| (self.predicted - self.hits) as f64 / self.predicted as f64)
    }
}

/// Rates are `None` when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub skeleton_tpr: Option<f64>,
    pub skeleton_fdr: Option<f64>,
    pub arrowhead_tpr: Option<f64>,
    pub arrowhead_fdr: Option<f64>,
    pub tail_tpr: Option<f64>,
    pub tail_fdr: Option<f64>,
    pub skeleton: Counts,
    pub arrowhead: Counts,
    pub tail: Counts,
}

/// `pred` relabeled into the vertex order of `truth`.
fn align(pred: &Admg, truth: &Admg) -> Result<Admg> {
    if pred.d() != truth.d() {
        return Err(Error::InvalidArgument("graphs have different numbers of vertices".into()));
    }
    if pred.names() == truth.names() {
        return Ok(pred.clone());
    }
    let perm = truth
        .names()
        .iter()
        .map(|name| pred.index_of(name))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::InvalidArgument("graphs have different vertex names".into()))?;
    pred.permuted(&perm)
}

fn skeleton_counts(pred: &Admg, truth: &Admg) -> Counts {
    let mut c = Counts::default();
    for i in 0..truth.d() {
        for j in i + 1..truth.d() {
            let (p, t) = (pred.adjacent(i, j), truth.adjacent(i, j));
            c.truth += t as usize;
            c.predicted += p as usize;
            c.hits += (p && t) as usize;
        }
    }
    c
}

/// Adjacency tpr and fdr over unordered vertex pairs.
pub fn skeleton_metrics(pred: &Admg, truth: &Admg) -> Result<(Option<f64>, Option<f64>)> {
    let pred = align(pred, truth)?;
    let c = skeleton_counts(&pred, truth);
    Ok((c.tpr(), c.fdr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Arrow,
    Tail,
}

/// Mark at `j` on the edge between `i` and `j`.
fn mark(g: &Admg, i: usize, j: usize) -> Option<Mark> {
    if g.has_directed(i, j) || g.has_bidirected(i, j) {
        Some(Mark::Arrow)
    } else if g.has_directed(j, i) {
        Some(Mark::Tail)
    } else {
        None
    }
}

/// The MAG of an acyclic graph; cyclic graphs are compared as they are.
fn endpoint_view(g: &Admg) -> Result<Admg> {
    if g.is_acyclic() {
        mag_projection(g)
    } else {
        Ok(g.clone())
    }
}

fn endpoint_counts(pred: &Admg, truth: &Admg) -> Result<(Counts, Counts)> {
    let (p, t) = (endpoint_view(pred)?, endpoint_view(truth)?);
    let mut arrow = Counts::default();
    let mut tail = Counts::default();
    for i in 0..t.d() {
        for j in 0..t.d() {
            if i == j {
                continue;
            }
            let (mp, mt) = (mark(&p, i, j), mark(&t, i, j));
            for (kind, c) in [(Mark::Arrow, &mut arrow), (Mark::Tail, &mut tail)] {
                c.truth += (mt == Some(kind)) as usize;
                c.predicted += (mp == Some(kind)) as usize;
                c.hits += (mt == Some(kind) && mp == Some(kind)) as usize;
            }
        }
    }
    Ok((arrow, tail))
}

/// Arrowhead and tail rates after projecting both graphs to MAGs:
/// `(arrowhead_tpr, arrowhead_fdr, tail_tpr, tail_fdr)`.
pub fn endpoint_metrics(
    pred: &Admg,
    truth: &Admg,
) -> Result<(Option<f64>, Option<f64>, Option<f64>, Option<f64>)> {
    let pred = align(pred, truth)?;
    let (a, t) = endpoint_counts(&pred, truth)?;
    Ok((a.tpr(), a.fdr(), t.tpr(), t.fdr()))
}

pub fn compare(pred: &Admg, truth: &Admg) -> Result<MetricsReport> {
    let pred = align(pred, truth)?;
    let skeleton = skeleton_counts(&pred, truth);
    let (arrowhead, tail) = endpoint_counts(&pred, truth)?;
    Ok(MetricsReport {
        skeleton_tpr: skeleton.tpr(),
        skeleton_fdr: skeleton.fdr(),
        arrowhead_tpr: arrowhead.tpr(),
        arrowhead_fdr: arrowhead.fdr(),
        tail_tpr: tail.tpr(),
        tail_fdr: tail.fdr(),
        skeleton,
        arrowhead,
        tail,
    })
}

/// The three four-variable graphs with Verma constraints: the graph
/// `A → C → D → B, A ↔ B, A ↔ D`, the chain `A → B → C → D` with
/// `B ↔ D`, and the chain with `A ↔ B` in place of `A → B`.
pub fn verma_targets() -> [Admg; 3] {
    let names = ["A", "B", "C", "D"];
    let build = |dir: &[(&str, &str)], bi: &[(&str, &str)]| Admg::from_named_edges(&names, dir, bi).expect("valid");
    [
        build(&[("A", "C"), ("C", "D"), ("D", "B")], &[("A", "B"), ("A", "D")]),
        build(&[("A", "B"), ("B", "C"), ("C", "D")], &[("B", "D")]),
        build(&[("B", "C"), ("C", "D")], &[("A", "B"), ("B", "D")]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VermaOutcome {
    TrueClass,
    SuperModel,
    Wrong,
}

impl VermaOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            VermaOutcome::TrueClass => "true_class",
            VermaOutcome::SuperModel => "super_model",
            VermaOutcome::Wrong => "wrong",
        }
    }
}

fn same_edges(a: &Admg, b: &Admg) -> bool {
    a.directed_edges() == b.directed_edges() && a.bidirected_edges() == b.bidirected_edges()
}

/// Classifies a learned graph against Verma target `target` (index into
/// [`verma_targets`]). Targets 1 and 2 share one class. A graph whose
/// adjacencies strictly contain the true ones is a super-model.
pub fn classify_verma(pred: &Admg, target: usize) -> Result<VermaOutcome> {
    let targets = verma_targets();
    let truth = targets
        .get(target)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown Verma target {target}")))?;
    let pred = align(pred, truth)?;
    let accepted: &[usize] = if target == 0 { &[0] } else { &[1, 2] };
    if accepted.iter().any(|&k| same_edges(&pred, &targets[k])) {
        return Ok(VermaOutcome::TrueClass);
    }
    let c = skeleton_counts(&pred, truth);
    if c.hits == c.truth && c.predicted > c.truth {
        Ok(VermaOutcome::SuperModel)
    } else {
        Ok(VermaOutcome::Wrong)
    }
}

fn run_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VermaRun {
    pub n: usize,
    pub seed: u64,
    pub target: usize,
    pub outcome: VermaOutcome,
    pub converged: bool,
    /// Discovery raised an error; counted as wrong.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VermaSummary {
    pub n: usize,
    pub runs: usize,
    pub true_class: f64,
    pub super_model: f64,
    pub wrong: f64,
    /// Runs that raised an error or did not converge.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VermaReport {
    pub runs: Vec<VermaRun>,
    pub summaries: Vec<VermaSummary>,
}

/// The dataset of one Verma-recovery run: a uniformly chosen target index
/// and `n` samples from random parameters on it.
pub fn verma_dataset(n: usize, seed: u64) -> Result<(usize, Dataset)> {
    let mut rng = run_rng(seed, n as u64);
    let target = rng.random_range(0..3usize);
    let truth = &verma_targets()[target];
    let params = random_parameters(truth, &mut rng)?;
    let data = sample_data(&params, n, Some(truth.names().to_vec()), &mut rng)?;
    Ok((target, data))
}

/// One Verma-recovery run on [`verma_dataset`], with discovery seeded by
/// `seed` (replacing `hp.seed`).
pub fn verma_run(n: usize, seed: u64, hp: &Hyperparams) -> Result<VermaRun> {
    let (target, data) = verma_dataset(n, seed)?;
    let hp = Hyperparams { seed, ..hp.clone() };
    match discover(&data, &hp) {
        Ok(res) => Ok(VermaRun {
            n,
            seed,
            target,
            outcome: classify_verma(&res.graph, target)?,
            converged: res.converged,
            failed: false,
        }),
        Err(e) if e.is_numeric() => {
            log::warn!("discovery failed for n={n}, seed={seed}: {e}");
            Ok(VermaRun { n, seed, target, outcome: VermaOutcome::Wrong, converged: false, failed: true })
        }
        Err(e) => Err(e),
    }
}

/// Runs seeds `hp.seed..hp.seed + seeds` at every sample size in `n_values`.
pub fn verma_recovery_experiment(n_values: &[usize], seeds: u64, hp: &Hyperparams) -> Result<VermaReport> {
    let base = hp.seed;
    let jobs: Vec<(usize, u64)> =
        n_values.iter().flat_map(|&n| (0..seeds).map(move |s| (n, base.wrapping_add(s)))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, s)| verma_run(n, s, hp))
        .collect::<Result<Vec<_>>>()?;
    let summaries = n_values
        .iter()
        .filter(|_| seeds > 0)
        .map(|&n| {
            let rs: Vec<&VermaRun> = runs.iter().filter(|r| r.n == n).collect();
            let frac = |o: VermaOutcome| rs.iter().filter(|r| r.outcome == o).count() as f64 / rs.len() as f64;
            VermaSummary {
                n,
                runs: rs.len(),
                true_class: frac(VermaOutcome::TrueClass),
                super_model: frac(VermaOutcome::SuperModel),
                wrong: frac(VermaOutcome::Wrong),
                failures: rs.iter().filter(|r| r.failed || !r.converged).count(),
            }
        })
        .collect();
    Ok(VermaReport { runs, summaries })
}

fn opt(v: Option<f64>) -> String {
    v.map(sig12).unwrap_or_default()
}

impl VermaReport {
    /// One row per run followed by one aggregate row per sample size.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "kind", "n", "seed", "target", "outcome", "converged", "failed", "true_class", "super_model", "wrong",
            "failures",
        ])?;
        for r in &self.runs {
            wr.write_record([
                "run".to_string(),
                r.n.to_string(),
                r.seed.to_string(),
                r.target.to_string(),
                r.outcome.as_str().to_string(),
                r.converged.to_string(),
                r.failed.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
        for s in &self.summaries {
            wr.write_record([
                "aggregate".to_string(),
                s.n.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                sig12(s.true_class),
                sig12(s.super_model),
                sig12(s.wrong),
                s.failures.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Random target graph of `class` on `d` vertices: bow-free draws are used
/// directly, ancestral targets are MAG projections of bow-free draws, and
/// arid targets are obtained by rejection sampling.
pub fn random_target<R: Rng + ?Sized>(d: usize, class: GraphClass, rng: &mut R) -> Result<Admg> {
    match class {
        GraphClass::BowFree | GraphClass::Arid => random_admg(d, RANDOM_P_DIRECTED, RANDOM_P_BIDIRECTED, class, rng),
        GraphClass::Ancestral => {
            let g = random_admg(d, RANDOM_P_DIRECTED, RANDOM_P_BIDIRECTED, GraphClass::BowFree, rng)?;
            mag_projection(&g)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomRun {
    pub graph: usize,
    pub metrics: Option<MetricsReport>,
    pub converged: bool,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomReport {
    pub class: GraphClass,
    pub d: usize,
    pub n: usize,
    pub runs: Vec<RandomRun>,
    /// Mean of each defined per-run rate.
    pub mean: [Option<f64>; 6],
    pub failures: usize,
}

pub const RATE_NAMES: [&str; 6] =
    ["skeleton_tpr", "skeleton_fdr", "arrowhead_tpr", "arrowhead_fdr", "tail_tpr", "tail_fdr"];

fn rates(m: &MetricsReport) -> [Option<f64>; 6] {
    [m.skeleton_tpr, m.skeleton_fdr, m.arrowhead_tpr, m.arrowhead_fdr, m.tail_tpr, m.tail_fdr]
}

/// One random-graph run for graph index `k`.
pub fn random_run(d: usize, n: usize, k: usize, hp: &Hyperparams) -> Result<RandomRun> {
    let mut rng = run_rng(hp.seed, k as u64);
    let truth = random_target(d, hp.class, &mut rng)?;
    let params = random_parameters(&truth, &mut rng)?;
    let data = sample_data(&params, n, Some(truth.names().to_vec()), &mut rng)?;
    let hp = Hyperparams { seed: hp.seed.wrapping_add(k as u64), ..hp.clone() };
    match discover(&data, &hp) {
        Ok(res) => Ok(RandomRun {
            graph: k,
            metrics: Some(compare(&res.graph, &truth)?),
            converged: res.converged,
            failed: false,
        }),
        Err(e) if e.is_numeric() => {
            log::warn!("discovery failed for graph {k}: {e}");
            Ok(RandomRun { graph: k, metrics: None, converged: false, failed: true })
        }
        Err(e) => Err(e),
    }
}

/// Learns `graphs` random `d`-vertex targets of class `hp.class` from `n`
/// samples each and averages the recovery metrics.
pub fn random_graph_experiment(d: usize, graphs: usize, n: usize, hp: &Hyperparams) -> Result<RandomReport> {
    let runs = (0..graphs)
        .into_par_iter()
        .map(|k| random_run(d, n, k, hp))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = [None; 6];
    for (idx, slot) in mean.iter_mut().enumerate() {
        let vals: Vec<f64> = runs.iter().filter_map(|r| r.metrics.as_ref().and_then(|m| rates(m)[idx])).collect();
        if !vals.is_empty() {
            *slot = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    let failures = runs.iter().filter(|r| r.failed || !r.converged).count();
    Ok(RandomReport { class: hp.class, d, n, runs, mean, failures })
}

impl RandomReport {
    /// One row per graph followed by an aggregate row of mean rates.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["kind", "graph", "class", "converged", "failed"];
        header.extend(RATE_NAMES);
        header.extend([
            "skeleton_true",
            "skeleton_predicted",
            "skeleton_hits",
            "arrowhead_true",
            "arrowhead_predicted",
            "arrowhead_hits",
            "tail_true",
            "tail_predicted",
            "tail_hits",
        ]);
        wr.write_record(&header)?;
        for r in &self.runs {
            let mut row = vec![
                "run".to_string(),
                r.graph.to_string(),
                self.class.to_string(),
                r.converged.to_string(),
                r.failed.to_string(),
            ];
            match &r.metrics {
                Some(m) => {
                    row.extend(rates(m).iter().map(|v| opt(*v)));
                    for c in [m.skeleton, m.arrowhead, m.tail] {
                        row.extend([c.truth.to_string(), c.predicted.to_string(), c.hits.to_string()]);
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), 15)),
            }
            wr.write_record(&row)?;
        }
        let mut agg = vec![
            "aggregate".to_string(),
            String::new(),
            self.class.to_string(),
            String::new(),
            self.failures.to_string(),
        ];
        agg.extend(self.mean.iter().map(|v| opt(*v)));
        agg.extend(std::iter::repeat_n(String::new(), 9));
        wr.write_record(&agg)?;
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(dir: &[(&str, &str)], bi: &[(&str, &str)]) -> Admg {
        Admg::from_named_edges(&["A", "B", "C"], dir, bi).unwrap()
    }

    #[test]
    fn skeleton_examples() {
        let truth = g(&[("A", "B"), ("A", "C")], &[]);
        assert_eq!(skeleton_metrics(&truth, &truth).unwrap(), (Some(1.0), Some(0.0)));
        let pred = g(&[("B", "A")], &[]);
        assert_eq!(skeleton_metrics(&pred, &truth).unwrap(), (Some(0.5), Some(0.0)));
        let empty = g(&[], &[]);
        assert_eq!(skeleton_metrics(&empty, &empty).unwrap(), (None, None));
    }

    #[test]
    fn endpoint_examples() {
        let truth = g(&[], &[("A", "B")]);
        let pred = g(&[("A", "B")], &[]);
        let r = compare(&pred, &truth).unwrap();
        assert_eq!(r.arrowhead, Counts { truth: 2, predicted: 1, hits: 1 });
        assert_eq!(r.tail, Counts { truth: 0, predicted: 1, hits: 0 });
        assert_eq!(r.tail_fdr, Some(1.0));
        assert_eq!(r.tail_tpr, None);
        let same = compare(&truth, &truth).unwrap();
        assert_eq!((same.arrowhead_tpr, same.arrowhead_fdr), (Some(1.0), Some(0.0)));
    }

    #[test]
    fn relabeling_is_handled_by_name() {
        let truth = g(&[("A", "B")], &[("B", "C")]);
        let pred = Admg::from_named_edges(&["C", "B", "A"], &[("A", "B")], &[("B", "C")]).unwrap();
        let r = compare(&pred, &truth).unwrap();
        assert_eq!(r.skeleton_tpr, Some(1.0));
        assert_eq!(r.arrowhead_fdr, Some(0.0));
        let other = Admg::from_named_edges(&["A", "B", "X"], &[], &[]).unwrap();
        assert!(compare(&other, &truth).is_err());
    }

    #[test]
    fn verma_classification() {
        let t = verma_targets();
        assert_eq!(classify_verma(&t[0], 0).unwrap(), VermaOutcome::TrueClass);
        assert_eq!(classify_verma(&t[2], 1).unwrap(), VermaOutcome::TrueClass);
        assert_eq!(classify_verma(&t[1], 2).unwrap(), VermaOutcome::TrueClass);
        let sup = t[1].with_directed(0, 3).unwrap();
        assert_eq!(classify_verma(&sup, 1).unwrap(), VermaOutcome::SuperModel);
        let flipped = Admg::from_named_edges(&["A", "B", "C", "D"], &[("B", "A"), ("B", "C"), ("C", "D")], &[("B", "D")])
            .unwrap();
        assert_eq!(classify_verma(&flipped, 1).unwrap(), VermaOutcome::Wrong);
        let missing = Admg::from_named_edges(&["A", "B", "C", "D"], &[("A", "B"), ("B", "C"), ("C", "D")], &[]).unwrap();
        assert_eq!(classify_verma(&missing, 1).unwrap(), VermaOutcome::Wrong);
        assert_eq!(classify_verma(&t[0], 1).unwrap(), VermaOutcome::Wrong);
    }

    #[test]
    fn zero_seeds_gives_empty_report() {
        let r = verma_recovery_experiment(&[500, 1000], 0, &Hyperparams::new(GraphClass::BowFree)).unwrap();
        assert!(r.runs.is_empty() && r.summaries.is_empty());
    }
}
