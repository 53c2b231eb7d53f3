//! The iterative link-selection/partitioning loop, baseline schemes and the
//! Monte Carlo harness.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::assign::{cluster_ratios, cluster_ues, AlphaRule, ClusterContext};
use crate::channel::{
    optimal_phases, quantize_phases, realize_channels, ris_configuration, ChannelSet, ServedCluster,
};
use crate::partition::{optimal_partition, Partition, PartitionInput};
use crate::sinr::{approx_sinr, exact_sinr, m_constant, noma_sum_rate, oma_sum_rate, InterferenceModel};
use crate::specgraph::{add_ris_link, build_original_graph, reliability, remove_vertices, uav_vertex, ReliabilityScores, WeightedGraph};
use crate::topology::{generate_topology, SimConfig, Topology, WeightUnit};
use crate::util::{linear_to_db, mean_se, stream_rng, trial_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    Traditional,
    SingleRis,
    Exhaustive,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::Traditional, Scheme::SingleRis, Scheme::Exhaustive];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Traditional => "traditional",
            Scheme::SingleRis => "single-ris",
            Scheme::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| Error::Usage(format!("unknown scheme {s:?} (expected proposed, traditional, single-ris or exhaustive)")))
    }
}

/// One RIS-aided link added to the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRecord {
    pub ue: usize,
    pub uav: usize,
    pub ris: usize,
    /// Approximate SIC SINR, linear.
    pub sinr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub scheme: Scheme,
    pub lambda2_mod: f64,
    pub lambda2_org: f64,
    /// Σ over RIS clusters of B·log2(1 + SINR) for served members.
    pub sum_rate_bps: f64,
    pub iterations: usize,
    pub links: Vec<LinkRecord>,
    pub dropped: usize,
    pub wall_s: f64,
    pub graph: WeightedGraph,
}

/// Everything one scheme run needs about a network realization.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub topology: Topology,
    pub channels: ChannelSet,
    pub original: WeightedGraph,
    pub lambda2_org: f64,
    pub reliability: ReliabilityScores,
    pub m: f64,
}

impl Snapshot {
    pub fn new(topology: Topology, config: &SimConfig, seed: u64) -> Result<Self> {
        let channels = realize_channels(&topology, config, seed)?;
        Self::from_channels(topology, channels, config)
    }

    pub fn from_channels(topology: Topology, channels: ChannelSet, config: &SimConfig) -> Result<Self> {
        let original = build_original_graph(&topology, &channels, config)?;
        let lambda2_org = original.fiedler()?;
        let nu = topology.num_ues();
        let uavs: Vec<usize> = (0..topology.num_uavs()).map(|a| uav_vertex(nu, a)).collect();
        let reliability = reliability(&original, &uavs)?;
        let m = m_constant(config.f1, config.f2)?;
        Ok(Self { topology, channels, original, lambda2_org, reliability, m })
    }

    fn threshold(&self, config: &SimConfig, uav: usize) -> f64 {
        self.reliability.get(config.reliability_mode)[uav] * config.gamma_th_ris_linear()
    }

    fn context(&self, config: &SimConfig, c: &ServedCluster) -> ClusterContext {
        ClusterContext { ris: c.ris, uav: c.uav, threshold: self.threshold(config, c.uav) }
    }
}

/// Closed-form partition of a served cluster, with members in the cluster's order.
pub fn partition_cluster(snapshot: &Snapshot, config: &SimConfig, cluster: &ServedCluster) -> Result<Partition> {
    let ctx = snapshot.context(config, cluster);
    let (gt, gh) = cluster_ratios(&snapshot.channels, config, &ctx, &cluster.members);
    let mut input = PartitionInput::new(gt, gh, config.elements, snapshot.m, ctx.threshold);
    input.plus_one = config.plus_one;
    input.sigma2_e_ua = config.sigma2_e_ua;
    input.sigma2_e_ura = config.sigma2_e_ura;
    optimal_partition(&input)
}

/// Outcome of partitioning a set of clusters and adding their links.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub graph: WeightedGraph,
    pub lambda2: f64,
    pub links: Vec<LinkRecord>,
    pub sum_rate_bps: f64,
    pub dropped: usize,
}

/// Partitions every cluster and adds a RIS-aided link for each member that
/// actually receives RIS gain and meets its QoS threshold. The link weight is
/// the SINR in the configured unit; links with non-positive weight are skipped.
pub fn evaluate_clusters(snapshot: &Snapshot, config: &SimConfig, clusters: &[ServedCluster]) -> Result<Evaluation> {
    let nu = snapshot.topology.num_ues();
    let mut graph = snapshot.original.clone();
    let mut links = Vec::new();
    let mut sum_rate_bps = 0.0;
    let mut dropped = 0;
    for c in clusters {
        if c.members.is_empty() {
            continue;
        }
        let part = partition_cluster(snapshot, config, c)?;
        dropped += part.dropped.len();
        let threshold = snapshot.threshold(config, c.uav);
        let served: Vec<f64> = part.order.iter().map(|&i| part.sinr[i]).collect();
        sum_rate_bps += noma_sum_rate(&served, config.bandwidth_hz);
        for &i in &part.order {
            let u = c.members[i];
            let sinr = part.sinr[i];
            let assisted = part.alpha[i] > 0.0 && snapshot.channels.gamma(u, c.ris, c.uav) > 0.0;
            if !assisted || sinr < threshold * (1.0 - 1e-12) {
                continue;
            }
            let weight = match config.weight_unit {
                WeightUnit::Db => linear_to_db(sinr),
                WeightUnit::Linear => sinr,
            };
            if weight > 0.0 && weight.is_finite() {
                graph = add_ris_link(&graph, u, uav_vertex(nu, c.uav), weight)?;
                links.push(LinkRecord { ue: u, uav: c.uav, ris: c.ris, sinr });
            }
        }
    }
    let lambda2 = graph.fiedler()?;
    Ok(Evaluation { graph, lambda2, links, sum_rate_bps, dropped })
}

fn finish(scheme: Scheme, snapshot: &Snapshot, eval: Evaluation, iterations: usize, start: Instant) -> TrialResult {
    TrialResult {
        scheme,
        lambda2_mod: eval.lambda2,
        lambda2_org: snapshot.lambda2_org,
        sum_rate_bps: eval.sum_rate_bps,
        iterations,
        links: eval.links,
        dropped: eval.dropped,
        wall_s: start.elapsed().as_secs_f64(),
        graph: eval.graph,
    }
}

/// Alternates clustering and closed-form partitioning until λ₂ of the
/// modified graph moves by less than `delta` or `max_iters` is reached.
///
/// The first round scores temporary clusters with an equal split; later
/// rounds score them with their closed-form partitions.
pub fn run_proposed(snapshot: &Snapshot, config: &SimConfig) -> Result<TrialResult> {
    let start = Instant::now();
    let rel = snapshot.reliability.get(config.reliability_mode);
    let mut rule = AlphaRule::EqualSplit;
    let mut previous: Option<f64> = None;
    let mut iterations = 0;
    let mut eval = None;
    while iterations < config.max_iters {
        let assignment = cluster_ues(&snapshot.topology, &snapshot.channels, rel, config, snapshot.m, rule)?;
        let current = evaluate_clusters(snapshot, config, &assignment.clusters)?;
        iterations += 1;
        let lambda = current.lambda2;
        eval = Some(current);
        if previous.is_some_and(|p| (lambda - p).abs() < config.delta) {
            break;
        }
        previous = Some(lambda);
        rule = AlphaRule::ClosedForm;
    }
    Ok(finish(Scheme::Proposed, snapshot, eval.expect("max_iters >= 1"), iterations, start))
}

/// The network without any RIS assistance.
pub fn run_traditional(snapshot: &Snapshot) -> TrialResult {
    let start = Instant::now();
    TrialResult {
        scheme: Scheme::Traditional,
        lambda2_mod: snapshot.lambda2_org,
        lambda2_org: snapshot.lambda2_org,
        sum_rate_bps: 0.0,
        iterations: 0,
        links: Vec::new(),
        dropped: 0,
        wall_s: start.elapsed().as_secs_f64(),
        graph: snapshot.original.clone(),
    }
}

/// One large RIS with R·K elements at the first RIS position, clustered and
/// partitioned with the same machinery.
pub fn run_single_ris(snapshot: &Snapshot, config: &SimConfig, seed: u64) -> Result<TrialResult> {
    let start = Instant::now();
    let topology = snapshot.topology.with_first_ris_only();
    let single = SimConfig {
        num_ris: 1,
        elements: config.elements * snapshot.topology.num_ris(),
        ..config.clone()
    };
    let channels = realize_channels(&topology, &single, seed)?;
    let snap = Snapshot {
        topology,
        channels,
        original: snapshot.original.clone(),
        lambda2_org: snapshot.lambda2_org,
        reliability: snapshot.reliability.clone(),
        m: snapshot.m,
    };
    let mut result = run_proposed(&snap, &single)?;
    result.scheme = Scheme::SingleRis;
    result.wall_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Largest instance the exhaustive baseline accepts.
pub const EXHAUSTIVE_LIMITS: (usize, usize, usize, usize) = (8, 3, 2, 8);

/// Enumerates every UAV-RIS matching and every UE-RIS assignment within the
/// cluster-size limit, partitions each with the closed form and keeps the
/// configuration with the largest λ₂.
///
/// Members without cascaded gain through a pair are never enumerated: such
/// a member adds no link and only interferes, so leaving it out never lowers λ₂.
pub fn run_exhaustive(snapshot: &Snapshot, config: &SimConfig) -> Result<TrialResult> {
    let start = Instant::now();
    let (nu, na, nr) = (snapshot.topology.num_ues(), snapshot.topology.num_uavs(), snapshot.topology.num_ris());
    let (mu, mr, mc, ma) = EXHAUSTIVE_LIMITS;
    if nu > mu || nr > mr || config.cluster_size > mc || na > ma {
        return Err(Error::TooLarge(format!(
            "exhaustive search needs U <= {mu}, R <= {mr}, U_r <= {mc}, A <= {ma}; got U={nu}, R={nr}, U_r={}, A={na}",
            config.cluster_size
        )));
    }
    let ch = &snapshot.channels;
    let mut best: Option<Evaluation> = None;
    let mut pairs_for_ris: Vec<Option<usize>> = vec![None; nr];
    let mut used_uav = vec![false; na];

    fn each_matching(
        r: usize,
        nr: usize,
        na: usize,
        ch: &ChannelSet,
        pairs: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[Option<usize>]) -> Result<()>,
    ) -> Result<()> {
        if r == nr {
            return visit(pairs);
        }
        pairs[r] = None;
        each_matching(r + 1, nr, na, ch, pairs, used, visit)?;
        for a in 0..na {
            if !used[a] && ch.h_ra(r, a) > 0.0 {
                used[a] = true;
                pairs[r] = Some(a);
                each_matching(r + 1, nr, na, ch, pairs, used, visit)?;
                used[a] = false;
                pairs[r] = None;
            }
        }
        Ok(())
    }

    fn each_assignment(
        u: usize,
        nu: usize,
        active: &[(usize, usize)],
        ch: &ChannelSet,
        cap: usize,
        members: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(&[Vec<usize>]) -> Result<()>,
    ) -> Result<()> {
        if u == nu {
            return visit(members);
        }
        each_assignment(u + 1, nu, active, ch, cap, members, visit)?;
        for (c, &(r, a)) in active.iter().enumerate() {
            if members[c].len() < cap && ch.gamma(u, r, a) > 0.0 {
                members[c].push(u);
                each_assignment(u + 1, nu, active, ch, cap, members, visit)?;
                members[c].pop();
            }
        }
        Ok(())
    }

    let mut on_matching = |pairs: &[Option<usize>]| -> Result<()> {
        let active: Vec<(usize, usize)> = pairs.iter().enumerate().filter_map(|(r, a)| a.map(|a| (r, a))).collect();
        let mut members = vec![Vec::new(); active.len()];
        let mut on_assignment = |m: &[Vec<usize>]| -> Result<()> {
            let clusters: Vec<ServedCluster> = active
                .iter()
                .zip(m)
                .filter(|(_, mem)| !mem.is_empty())
                .map(|(&(ris, uav), mem)| ServedCluster { ris, uav, members: mem.clone() })
                .collect();
            let eval = evaluate_clusters(snapshot, config, &clusters)?;
            if best.as_ref().is_none_or(|b| eval.lambda2 > b.lambda2) {
                best = Some(eval);
            }
            Ok(())
        };
        each_assignment(0, nu, &active, ch, config.cluster_size, &mut members, &mut on_assignment)
    };
    each_matching(0, nr, na, ch, &mut pairs_for_ris, &mut used_uav, &mut on_matching)?;
    let eval = best.expect("the empty configuration is always visited");
    Ok(finish(Scheme::Exhaustive, snapshot, eval, 1, start))
}

/// Runs one scheme on a snapshot.
pub fn run_scheme(scheme: Scheme, snapshot: &Snapshot, config: &SimConfig, seed: u64) -> Result<TrialResult> {
    match scheme {
        Scheme::Proposed => run_proposed(snapshot, config),
        Scheme::Traditional => Ok(run_traditional(snapshot)),
        Scheme::SingleRis => run_single_ris(snapshot, config, seed),
        Scheme::Exhaustive => run_exhaustive(snapshot, config),
    }
}

/// Removes `count` distinct UAVs chosen uniformly at random.
pub fn fail_uavs<R: Rng + ?Sized>(graph: &WeightedGraph, num_ues: usize, count: usize, rng: &mut R) -> Result<WeightedGraph> {
    let num_uavs = graph.vertex_count() - num_ues;
    if count > num_uavs {
        return Err(Error::domain(format!("cannot fail {count} of {num_uavs} UAVs")));
    }
    let mut order: Vec<usize> = (0..num_uavs).map(|a| uav_vertex(num_ues, a)).collect();
    order.shuffle(rng);
    Ok(remove_vertices(graph, &order[..count]))
}

const FAILURE_STREAM: u64 = 3;

/// λ₂ after removing the first k UAVs of a shared random order, for k = 0..=A.
pub fn failure_curve(graph: &WeightedGraph, num_ues: usize, order: &[usize]) -> Result<Vec<f64>> {
    (0..=order.len())
        .map(|k| {
            let removed: Vec<usize> = order[..k].iter().map(|&a| uav_vertex(num_ues, a)).collect();
            remove_vertices(graph, &removed).fiedler()
        })
        .collect()
}

/// Smallest failure count at which λ₂ reaches zero (A when it never does).
pub fn failures_to_disconnect(curve: &[f64]) -> usize {
    curve.iter().position(|&l| l <= 0.0).unwrap_or(curve.len() - 1)
}

/// Random UAV failure order of a trial.
pub fn failure_order(num_uavs: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, FAILURE_STREAM);
    let mut order: Vec<usize> = (0..num_uavs).collect();
    order.shuffle(&mut rng);
    order
}

/// Per-trial numbers kept for aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub lambda2_mod: f64,
    pub lambda2_org: f64,
    pub sum_rate_bps: f64,
    pub iterations: usize,
    pub dropped: usize,
    pub wall_s: f64,
}

impl From<&TrialResult> for TrialSummary {
    fn from(r: &TrialResult) -> Self {
        Self {
            lambda2_mod: r.lambda2_mod,
            lambda2_org: r.lambda2_org,
            sum_rate_bps: r.sum_rate_bps,
            iterations: r.iterations,
            dropped: r.dropped,
            wall_s: r.wall_s,
        }
    }
}

/// Aggregate of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeStats {
    pub scheme: String,
    pub mean_lambda2: f64,
    pub se_lambda2: f64,
    pub mean_rate_bps: f64,
    pub se_rate_bps: f64,
    pub trials: usize,
    /// Only filled when timing is requested.
    pub mean_wall_s: Option<f64>,
}

impl SchemeStats {
    pub fn from_trials(scheme: &str, trials: &[TrialSummary], timing: bool) -> Self {
        let l: Vec<f64> = trials.iter().map(|t| t.lambda2_mod).collect();
        let r: Vec<f64> = trials.iter().map(|t| t.sum_rate_bps).collect();
        let w: Vec<f64> = trials.iter().map(|t| t.wall_s).collect();
        let (mean_lambda2, se_lambda2) = mean_se(&l);
        let (mean_rate_bps, se_rate_bps) = mean_se(&r);
        Self {
            scheme: scheme.to_string(),
            mean_lambda2,
            se_lambda2,
            mean_rate_bps,
            se_rate_bps,
            trials: trials.len(),
            mean_wall_s: timing.then(|| mean_se(&w).0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub stats: Vec<SchemeStats>,
    /// Per-scheme trial summaries, in trial order.
    pub trials: Vec<(Scheme, Vec<TrialSummary>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSweep {
    pub param: String,
    pub points: Vec<SweepPoint>,
}

/// Swept parameter: a config key and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// A single point that leaves the configuration unchanged.
    pub fn none() -> Self {
        Self { param: "none".into(), values: vec![0.0] }
    }

    pub fn apply(&self, config: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut c = config.clone();
        if self.param != "none" {
            c.set(&self.param, &value.to_string())?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Everything besides the configuration that shapes a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub sweep: SweepSpec,
    pub schemes: Vec<Scheme>,
    /// Fixed deployment used for every trial instead of random placement.
    pub scenario: Option<Topology>,
    pub timing: bool,
}

fn trial_topology(config: &SimConfig, scenario: Option<&Topology>, seed: u64) -> Result<Topology> {
    match scenario {
        Some(t) => Ok(t.clone()),
        None => generate_topology(config, seed),
    }
}

/// Runs every scheme on `trials` independent realizations per sweep point.
///
/// Trial t uses seed `trial_seed(config.seed, t)` at every sweep point, so
/// points share realizations wherever the swept parameter allows.
pub fn monte_carlo(config: &SimConfig, spec: &RunSpec) -> Result<ExperimentSweep> {
    config.validate()?;
    let mut points = Vec::with_capacity(spec.sweep.values.len());
    for &value in &spec.sweep.values {
        let cfg = spec.sweep.apply(config, value)?;
        let per_trial: Vec<Vec<TrialSummary>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(cfg.seed, t);
                let topo = trial_topology(&cfg, spec.scenario.as_ref(), seed)?;
                let snap = Snapshot::new(topo, &cfg, seed)?;
                spec.schemes
                    .iter()
                    .map(|&s| run_scheme(s, &snap, &cfg, seed).map(|r| TrialSummary::from(&r)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let trials: Vec<(Scheme, Vec<TrialSummary>)> = spec
            .schemes
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, per_trial.iter().map(|row| row[i]).collect()))
            .collect();
        let stats = trials
            .iter()
            .map(|(s, t)| SchemeStats::from_trials(s.as_str(), t, spec.timing))
            .collect();
        points.push(SweepPoint { value, stats, trials });
    }
    Ok(ExperimentSweep { param: spec.sweep.param.clone(), points })
}

/// Failure study outcome for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ResilienceCurve {
    pub scheme: Scheme,
    /// Per trial, λ₂ after k = 0..=A failures.
    pub curves: Vec<Vec<f64>>,
    /// Per trial, the first failure count with λ₂ = 0.
    pub failures_to_zero: Vec<usize>,
}

impl ResilienceCurve {
    pub fn mean_failures_to_zero(&self) -> (f64, f64) {
        let v: Vec<f64> = self.failures_to_zero.iter().map(|&k| k as f64).collect();
        mean_se(&v)
    }

    /// Mean and standard error of λ₂ after `k` failures.
    pub fn mean_at(&self, k: usize) -> (f64, f64) {
        let v: Vec<f64> = self.curves.iter().map(|c| c[k]).collect();
        mean_se(&v)
    }
}

/// UAV failure study: each trial draws one random failure order shared by
/// all schemes and removes UAVs from each scheme's final graph in that order.
pub fn resilience(config: &SimConfig, schemes: &[Scheme], scenario: Option<&Topology>) -> Result<Vec<ResilienceCurve>> {
    config.validate()?;
    let per_trial: Vec<Vec<Vec<f64>>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.seed, t);
            let topo = trial_topology(config, scenario, seed)?;
            let snap = Snapshot::new(topo, config, seed)?;
            let order = failure_order(snap.topology.num_uavs(), seed);
            schemes
                .iter()
                .map(|&s| {
                    let r = run_scheme(s, &snap, config, seed)?;
                    failure_curve(&r.graph, snap.topology.num_ues(), &order)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(schemes
        .iter()
        .enumerate()
        .map(|(i, &scheme)| {
            let curves: Vec<Vec<f64>> = per_trial.iter().map(|t| t[i].clone()).collect();
            let failures_to_zero = curves.iter().map(|c| failures_to_disconnect(c)).collect();
            ResilienceCurve { scheme, curves, failures_to_zero }
        })
        .collect())
}

/// Which rate a rate-study series reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSeries {
    /// Closed-form partition, approximate SINR.
    Approximate,
    /// Same partition, exact SINR with optimal continuous phases.
    Exact,
    /// Exact SINR with phases quantized to the given bits.
    ExactQuantized(u32),
    /// Each member alone on B/U_r with the whole surface.
    Oma,
}

impl RateSeries {
    pub fn label(self) -> String {
        match self {
            RateSeries::Approximate => "noma-approx".into(),
            RateSeries::Exact => "noma-exact".into(),
            RateSeries::ExactQuantized(b) => format!("noma-exact-b{b}"),
            RateSeries::Oma => "oma".into(),
        }
    }
}

/// The scripted clusters of the rate-study layout: RIS 0 reflects UEs 1 and 2
/// to UAV 1, RIS 1 reflects UEs 0 and 3 to UAV 0. With a cluster size of one,
/// each RIS keeps only its first listed UE.
pub fn rate_study_clusters(cluster_size: usize) -> Vec<ServedCluster> {
    let full = [
        ServedCluster { ris: 0, uav: 1, members: vec![1, 2] },
        ServedCluster { ris: 1, uav: 0, members: vec![0, 3] },
    ];
    full.into_iter()
        .map(|mut c| {
            c.members.truncate(cluster_size.max(1));
            c
        })
        .collect()
}

/// Sum rate of every series on one channel realization. The QoS target is
/// γ_th^RIS itself (reliability taken as 1).
pub fn rate_realization(channels: &ChannelSet, config: &SimConfig, clusters: &[ServedCluster], series: &[RateSeries]) -> Result<Vec<f64>> {
    let m = m_constant(config.f1, config.f2)?;
    let scale = config.snr_scale();
    let threshold = config.gamma_th_ris_linear();
    let plan = optimal_phases(channels, clusters);
    let mut out = vec![0.0; series.len()];
    for (ci, c) in clusters.iter().enumerate() {
        let ctx = ClusterContext { ris: c.ris, uav: c.uav, threshold };
        let (gt, gh) = cluster_ratios(channels, config, &ctx, &c.members);
        let mut input = PartitionInput::new(gt.clone(), gh.clone(), config.elements, m, threshold);
        input.plus_one = config.plus_one;
        let part = optimal_partition(&input)?;
        let served_sinr: Vec<f64> = part.order.iter().map(|&i| part.sinr[i]).collect();
        for (slot, s) in series.iter().enumerate() {
            out[slot] += match *s {
                RateSeries::Approximate => noma_sum_rate(&served_sinr, config.bandwidth_hz),
                RateSeries::Exact | RateSeries::ExactQuantized(_) => {
                    let thetas = match *s {
                        RateSeries::ExactQuantized(b) => quantize_phases(&plan, b)?.theta.swap_remove(ci),
                        _ => plan.theta[ci].clone(),
                    };
                    // Contiguous element blocks in cluster order, strongest first.
                    let ordered_theta: Vec<Vec<f64>> = part.order.iter().map(|&i| thetas[i].clone()).collect();
                    let counts: Vec<usize> = part.order.iter().map(|&i| part.elements[i]).collect();
                    let phases = ris_configuration(&ordered_theta, &counts);
                    let served = ServedCluster {
                        ris: c.ris,
                        uav: c.uav,
                        members: part.order.iter().map(|&i| c.members[i]).collect(),
                    };
                    if served.members.is_empty() {
                        0.0
                    } else {
                        noma_sum_rate(&exact_sinr(channels, scale, &served, &phases)?, config.bandwidth_hz)
                    }
                }
                RateSeries::Oma => {
                    let snrs: Vec<f64> = (0..c.members.len())
                        .map(|i| {
                            let solo = input_for_member(&gt, &gh, i, config.elements, m);
                            approx_sinr(&solo, 0, InterferenceModel::Sic)
                        })
                        .collect();
                    oma_sum_rate(&snrs, config.bandwidth_hz, c.members.len())
                }
            };
        }
    }
    Ok(out)
}

fn input_for_member(gt: &[f64], gh: &[f64], i: usize, elements: usize, m: f64) -> crate::sinr::SinrInputs {
    crate::sinr::SinrInputs { gamma_tilde: vec![gt[i]], gamma_hat: vec![gh[i]], alpha: vec![1.0], elements, m }
}

/// Mean and standard error of each series' sum rate over `config.trials`
/// realizations of the fixed layout.
pub fn rate_study(config: &SimConfig, scenario: &Topology, series: &[RateSeries]) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    scenario.validate()?;
    let clusters = rate_study_clusters(config.cluster_size);
    let rows: Vec<Vec<f64>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.seed, t);
            let channels = realize_channels(scenario, config, seed)?;
            rate_realization(&channels, config, &clusters, series)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..series.len())
        .map(|s| {
            let v: Vec<f64> = rows.iter().map(|r| r[s]).collect();
            mean_se(&v)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Position;

    fn small_config() -> SimConfig {
        SimConfig {
            num_ues: 6,
            num_uavs: 4,
            num_ris: 2,
            cluster_size: 2,
            elements: 64,
            area_side: 150.0,
            trials: 4,
            ..SimConfig::default()
        }
    }

    fn snapshot(cfg: &SimConfig, seed: u64) -> Snapshot {
        Snapshot::new(generate_topology(cfg, seed).unwrap(), cfg, seed).unwrap()
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("sdp".parse::<Scheme>().is_err());
    }

    #[test]
    fn proposed_never_lowers_connectivity() {
        let cfg = small_config();
        for seed in 0..20 {
            let snap = snapshot(&cfg, seed);
            let p = run_proposed(&snap, &cfg).unwrap();
            let t = run_traditional(&snap);
            assert_eq!(t.lambda2_mod, p.lambda2_org);
            assert!(p.lambda2_mod >= p.lambda2_org - 1e-9);
            assert!(p.iterations >= 1 && p.iterations <= cfg.max_iters);
        }
    }

    #[test]
    fn exhaustive_bounds_proposed() {
        let cfg = small_config();
        for seed in 0..5 {
            let snap = snapshot(&cfg, seed);
            let p = run_proposed(&snap, &cfg).unwrap();
            let e = run_exhaustive(&snap, &cfg).unwrap();
            assert!(e.lambda2_mod >= p.lambda2_mod - 1e-9, "seed {seed}: {} < {}", e.lambda2_mod, p.lambda2_mod);
        }
        let big = SimConfig { num_ues: 9, ..cfg };
        let snap = snapshot(&big, 0);
        assert!(matches!(run_exhaustive(&snap, &big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn single_ris_with_one_ris_matches_proposed() {
        let cfg = SimConfig { num_ris: 1, ..small_config() };
        let snap = snapshot(&cfg, 3);
        let p = run_proposed(&snap, &cfg).unwrap();
        let s = run_single_ris(&snap, &cfg, 3).unwrap();
        assert_eq!(p.lambda2_mod, s.lambda2_mod);
        assert_eq!(p.links, s.links);
    }

    #[test]
    fn failure_examples() {
        let cfg = small_config();
        let snap = snapshot(&cfg, 1);
        let mut rng = stream_rng(1, 99);
        let g = fail_uavs(&snap.original, cfg.num_ues, 0, &mut rng).unwrap();
        assert_eq!(g, snap.original);
        let g = fail_uavs(&snap.original, cfg.num_ues, cfg.num_uavs, &mut rng).unwrap();
        assert_eq!(g.fiedler().unwrap(), 0.0);
        assert!(fail_uavs(&snap.original, cfg.num_ues, cfg.num_uavs + 1, &mut rng).is_err());
        assert_eq!(failures_to_disconnect(&[3.0, 1.0, 0.0, 0.0]), 2);
        assert_eq!(failures_to_disconnect(&[3.0, 1.0]), 1);
    }

    #[test]
    fn removing_a_pendant_vertex_can_raise_connectivity() {
        // A path a-b-c plus pendant UE on c: removing the UE's UAV neighbour
        // is fatal, but removing a leaf UAV raises λ₂.
        use crate::specgraph::{Edge, EdgeKind};
        let e = |a, b| Edge { a, b, weight: 1.0, kind: EdgeKind::UavUav };
        let g = WeightedGraph::from_edges(4, &[e(1, 2), e(2, 3), e(0, 3)]).unwrap();
        let full = g.fiedler().unwrap();
        let without_leaf = remove_vertices(&g, &[1]).fiedler().unwrap();
        assert!(without_leaf > full);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = SimConfig { trials: 2, ..small_config() };
        let spec = RunSpec {
            sweep: SweepSpec { param: "K".into(), values: vec![32.0, 64.0] },
            schemes: vec![Scheme::Proposed, Scheme::Traditional],
            scenario: None,
            timing: false,
        };
        let strip = |mut s: ExperimentSweep| {
            for p in &mut s.points {
                for (_, t) in &mut p.trials {
                    t.iter_mut().for_each(|x| x.wall_s = 0.0);
                }
            }
            s
        };
        let a = strip(monte_carlo(&cfg, &spec).unwrap());
        let b = strip(monte_carlo(&cfg, &spec).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 2);
        assert_eq!(a.points[0].stats[1].mean_lambda2, a.points[1].stats[1].mean_lambda2);
    }

    #[test]
    fn rate_series_on_fixed_layout() {
        let scenario = Topology::rate_study_scenario();
        let cfg = SimConfig {
            num_ues: 4,
            num_uavs: 2,
            num_ris: 2,
            cluster_size: 1,
            elements: 32,
            r_ur: 1e9,
            r_ra: 1e9,
            trials: 3,
            ..SimConfig::default()
        };
        let r = rate_study(&cfg, &scenario, &[RateSeries::Approximate, RateSeries::Oma]).unwrap();
        assert_eq!(r[0].0, r[1].0);
        assert!(r[0].0 > 0.0);
        assert_eq!(rate_study_clusters(2)[0].members, vec![1, 2]);
    }

    #[test]
    fn isolated_ue_is_reconnected_through_a_ris() {
        let topo = Topology {
            ue_positions: vec![Position::new(0.0, 0.0, 0.0), Position::new(10.0, 0.0, 0.0)],
            uav_positions: vec![Position::new(20.0, 0.0, 200.0), Position::new(40.0, 0.0, 200.0)],
            ris_positions: vec![Position::new(5.0, 0.0, 120.0)],
            blocked: vec![(0, 0), (0, 1)],
        };
        let cfg = SimConfig {
            num_ues: 2,
            num_uavs: 2,
            num_ris: 1,
            cluster_size: 1,
            elements: 100,
            gamma_th_ue_db: 60.0,
            ..SimConfig::default()
        };
        let snap = Snapshot::new(topo, &cfg, 2).unwrap();
        assert_eq!(snap.lambda2_org, 0.0);
        let p = run_proposed(&snap, &cfg).unwrap();
        assert!(p.lambda2_mod > 0.0, "{:?}", p.links);
    }
}
