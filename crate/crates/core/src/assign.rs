//! UAV-RIS clustering, RSS-ordered UE NOMA clustering and linear sum assignment.

use std::fmt::Write as _;

use crate::channel::{ChannelSet, ServedCluster};
use crate::partition::{optimal_partition, PartitionInput};
use crate::sinr::{canonical_order, imperfect_csi_sinr, InterferenceModel, SinrInputs};
use crate::topology::{distance, SimConfig, Topology};
use crate::{Error, Result};

/// Cluster memberships plus the binary Z (UE×RIS) and X (UAV×RIS) matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub num_ues: usize,
    pub num_uavs: usize,
    pub num_ris: usize,
    /// One entry per formed cluster; members in admission order.
    pub clusters: Vec<ServedCluster>,
}

impl Assignment {
    pub fn z(&self, u: usize, r: usize) -> bool {
        self.clusters.iter().any(|c| c.ris == r && c.members.contains(&u))
    }

    pub fn x(&self, a: usize, r: usize) -> bool {
        self.clusters.iter().any(|c| c.ris == r && c.uav == a)
    }

    /// Checks C1 (one RIS per UE), C2 (at most U_r UEs per RIS), C4 (one RIS
    /// per UAV), C5 (at most R served UAVs) and C6 (one UAV per cluster).
    pub fn check_constraints(&self, cluster_size: usize) -> Result<()> {
        for u in 0..self.num_ues {
            let n = (0..self.num_ris).filter(|&r| self.z(u, r)).count();
            if n > 1 {
                return Err(Error::domain(format!("UE {u} joins {n} RISs")));
            }
        }
        for r in 0..self.num_ris {
            let n = (0..self.num_ues).filter(|&u| self.z(u, r)).count();
            if n > cluster_size {
                return Err(Error::domain(format!("RIS {r} serves {n} UEs, more than {cluster_size}")));
            }
            let uavs = (0..self.num_uavs).filter(|&a| self.x(a, r)).count();
            if uavs > 1 {
                return Err(Error::domain(format!("RIS {r} targets {uavs} UAVs")));
            }
            if n > 0 && uavs != 1 {
                return Err(Error::domain(format!("RIS {r} has members but no UAV")));
            }
        }
        for a in 0..self.num_uavs {
            let n = (0..self.num_ris).filter(|&r| self.x(a, r)).count();
            if n > 1 {
                return Err(Error::domain(format!("UAV {a} is served by {n} RISs")));
            }
        }
        let total: usize = (0..self.num_uavs).map(|a| (0..self.num_ris).filter(|&r| self.x(a, r)).count()).sum();
        if total > self.num_ris {
            return Err(Error::domain("more served UAVs than RISs"));
        }
        for c in &self.clusters {
            let mut m = c.members.clone();
            m.sort_unstable();
            m.dedup();
            if m.len() != c.members.len() {
                return Err(Error::domain(format!("duplicate member in cluster of RIS {}", c.ris)));
            }
        }
        Ok(())
    }

    /// Text dump of Z and X, one matrix row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("Z (UE x RIS)\n");
        for u in 0..self.num_ues {
            let row: Vec<&str> = (0..self.num_ris).map(|r| if self.z(u, r) { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out.push_str("X (UAV x RIS)\n");
        for a in 0..self.num_uavs {
            let row: Vec<&str> = (0..self.num_ris).map(|r| if self.x(a, r) { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// Step 1: UAVs within R_ra of some RIS, sorted ascending by reliability
/// (ties by index); the first R each take their nearest unassigned RIS.
///
/// Returns (ris, uav) pairs in UAV order; fewer than R pairs when fewer UAVs qualify.
pub fn cluster_uav_ris(topology: &Topology, reliability: &[f64], config: &SimConfig) -> Vec<(usize, usize)> {
    let nr = topology.num_ris();
    let mut eligible: Vec<usize> = (0..topology.num_uavs())
        .filter(|&a| {
            topology
                .ris_positions
                .iter()
                .any(|&p| distance(p, topology.uav_positions[a]) <= config.r_ra)
        })
        .collect();
    eligible.sort_by(|&a, &b| reliability[a].total_cmp(&reliability[b]).then(a.cmp(&b)));
    let mut taken = vec![false; nr];
    let mut pairs = Vec::new();
    for &a in eligible.iter().take(nr) {
        let nearest = (0..nr).filter(|&r| !taken[r]).min_by(|&r1, &r2| {
            let d1 = distance(topology.ris_positions[r1], topology.uav_positions[a]);
            let d2 = distance(topology.ris_positions[r2], topology.uav_positions[a]);
            d1.total_cmp(&d2).then(r1.cmp(&r2))
        });
        if let Some(r) = nearest {
            taken[r] = true;
            pairs.push((r, a));
        }
    }
    pairs
}

/// UEs within R_ur of some RIS, ascending by best direct SNR; UEs without any
/// direct link come first. Ties keep index order.
pub fn sort_ues_by_rss(topology: &Topology, channels: &ChannelSet, config: &SimConfig) -> Vec<usize> {
    let rss: Vec<f64> = (0..channels.num_ues)
        .map(|u| (0..channels.num_uavs).map(|a| channels.direct_snr_db(u, a)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut ues: Vec<usize> = (0..channels.num_ues)
        .filter(|&u| {
            topology
                .ris_positions
                .iter()
                .any(|&p| distance(p, topology.ue_positions[u]) <= config.r_ur)
        })
        .collect();
    ues.sort_by(|&a, &b| rss[a].total_cmp(&rss[b]));
    ues
}

/// Splits the sorted UE list into `cluster_size` consecutive waves of `width`
/// UEs; later waves may be short or missing when UEs run out.
pub fn partition_waves(sorted: &[usize], width: usize, cluster_size: usize) -> Vec<Vec<usize>> {
    if width == 0 {
        return Vec::new();
    }
    sorted
        .chunks(width)
        .take(cluster_size)
        .map(<[usize]>::to_vec)
        .collect()
}

/// How allocation factors are chosen when scoring a temporary cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRule {
    /// α = 1/|Q| for every member.
    EqualSplit,
    /// The closed-form partition of the temporary cluster.
    ClosedForm,
}

/// Per-cluster context needed to score temporary clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterContext {
    pub ris: usize,
    pub uav: usize,
    /// C_a·γ_th^RIS, linear.
    pub threshold: f64,
}

/// γ̃ and γ̂ of `members` towards the cluster's UAV through its RIS.
pub fn cluster_ratios(channels: &ChannelSet, config: &SimConfig, ctx: &ClusterContext, members: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let scale = config.snr_scale();
    let gt = members.iter().map(|&u| scale * channels.g_ua(u, ctx.uav)).collect();
    let gh = members.iter().map(|&u| scale * channels.gamma(u, ctx.ris, ctx.uav)).collect();
    (gt, gh)
}

/// Sum of approximate SIC SINRs of a temporary cluster under `rule`.
pub fn cluster_utility(channels: &ChannelSet, config: &SimConfig, m: f64, ctx: &ClusterContext, members: &[usize], rule: AlphaRule) -> Result<f64> {
    let (gt, gh) = cluster_ratios(channels, config, ctx, members);
    match rule {
        AlphaRule::EqualSplit => {
            let order = canonical_order(&gt, &gh);
            let share = 1.0 / members.len() as f64;
            let inputs = SinrInputs {
                gamma_tilde: order.iter().map(|&i| gt[i]).collect(),
                gamma_hat: order.iter().map(|&i| gh[i]).collect(),
                alpha: vec![share; members.len()],
                elements: config.elements,
                m,
            };
            Ok((0..members.len())
                .map(|pos| imperfect_csi_sinr(&inputs, config.sigma2_e_ua, config.sigma2_e_ura, pos, InterferenceModel::Sic))
                .sum())
        }
        AlphaRule::ClosedForm => {
            let mut input = PartitionInput::new(gt, gh, config.elements, m, ctx.threshold);
            input.plus_one = config.plus_one;
            input.sigma2_e_ua = config.sigma2_e_ua;
            input.sigma2_e_ura = config.sigma2_e_ura;
            Ok(optimal_partition(&input)?.sum_sinr())
        }
    }
}

/// O[c][j]: utility of cluster `c` after temporarily admitting candidate `j`.
pub fn utility_matrix(
    channels: &ChannelSet,
    config: &SimConfig,
    m: f64,
    contexts: &[ClusterContext],
    clusters: &[Vec<usize>],
    candidates: &[usize],
    rule: AlphaRule,
) -> Result<Vec<Vec<f64>>> {
    contexts
        .iter()
        .zip(clusters)
        .map(|(ctx, members)| {
            candidates
                .iter()
                .map(|&u| {
                    let mut q = members.clone();
                    q.push(u);
                    cluster_utility(channels, config, m, ctx, &q, rule)
                })
                .collect()
        })
        .collect()
}

/// Maximum-weight assignment of rows to columns of a rectangular utility
/// matrix, padded with zero-utility dummies to square.
///
/// Among optimal matchings the lexicographically smallest row→column vector
/// is returned. `None` marks a row matched to a dummy column.
pub fn lsa_solve(utility: &[Vec<f64>]) -> Result<Vec<Option<usize>>> {
    let rows = utility.len();
    let cols = utility.first().map_or(0, Vec::len);
    if utility.iter().any(|r| r.len() != cols) {
        return Err(Error::domain("utility matrix rows differ in length"));
    }
    if utility.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::domain("utility matrix has non-finite entries"));
    }
    let n = rows.max(cols);
    if n == 0 {
        return Ok(vec![None; rows]);
    }
    let cost = |i: usize, j: usize| if i < rows && j < cols { -utility[i][j] } else { 0.0 };

    // Shortest augmenting paths with potentials (1-based, column 0 is virtual).
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }

    // Every optimal matching uses only edges that are tight under the final
    // potentials; pick the lexicographically smallest perfect matching there.
    let scale = utility.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-10 * scale * n as f64;
    let tight = |i: usize, j: usize| cost(i, j) - u[i + 1] - v[j + 1] <= eps;
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    for i in 0..n {
        for c in 0..row_to_col[i] {
            if !tight(i, c) {
                continue;
            }
            // Reassign i→c; the former owner of c must reach i's old column
            // through an alternating path over rows after i.
            let target = row_to_col[i];
            let start = col_to_row[c];
            if start < i {
                continue;
            }
            if let Some(path) = alternating_path(start, target, i, &row_to_col, &col_to_row, &tight, n) {
                // path: rows r_0 = start, r_1, … with r_k taking column path[k].
                let mut rows_on_path = vec![start];
                for &col in &path[..path.len() - 1] {
                    rows_on_path.push(col_to_row[col]);
                }
                for (r, &col) in rows_on_path.iter().zip(&path) {
                    row_to_col[*r] = col;
                }
                row_to_col[i] = c;
                for (r, &col) in row_to_col.iter().enumerate() {
                    col_to_row[col] = r;
                }
                break;
            }
        }
    }
    Ok((0..rows).map(|i| (row_to_col[i] < cols).then_some(row_to_col[i])).collect())
}

/// BFS for columns c_0, …, c_k = `target` such that row `start` can take
/// c_0, the owner of c_0 can take c_1, and so on, using only tight edges and
/// rows strictly after `fixed`.
fn alternating_path(
    start: usize,
    target: usize,
    fixed: usize,
    row_to_col: &[usize],
    col_to_row: &[usize],
    tight: &dyn Fn(usize, usize) -> bool,
    n: usize,
) -> Option<Vec<usize>> {
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut row_of_step = vec![usize::MAX; n];
    for col in 0..n {
        if col != row_to_col[start] && tight(start, col) && (col == target || col_to_row[col] > fixed) {
            seen[col] = true;
            row_of_step[col] = start;
            queue.push_back(col);
        }
    }
    while let Some(col) = queue.pop_front() {
        if col == target {
            let mut path = vec![col];
            let mut cur = col;
            while let Some(p) = prev[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let owner = col_to_row[col];
        for next in 0..n {
            if !seen[next] && tight(owner, next) && (next == target || col_to_row[next] > fixed) {
                seen[next] = true;
                prev[next] = Some(col);
                row_of_step[next] = owner;
                queue.push_back(next);
            }
        }
    }
    None
}

/// Step 2: seeds each cluster with the weakest UEs, then admits one UE per
/// cluster per wave by maximizing total utility. A matched UE whose cascaded
/// gain through the cluster's RIS is zero is not admitted.
pub fn cluster_ues(
    topology: &Topology,
    channels: &ChannelSet,
    reliability: &[f64],
    config: &SimConfig,
    m: f64,
    rule: AlphaRule,
) -> Result<Assignment> {
    let pairs = cluster_uav_ris(topology, reliability, config);
    let contexts: Vec<ClusterContext> = pairs
        .iter()
        .map(|&(ris, uav)| ClusterContext { ris, uav, threshold: reliability[uav] * config.gamma_th_ris_linear() })
        .collect();
    let sorted = sort_ues_by_rss(topology, channels, config);
    let waves = partition_waves(&sorted, pairs.len(), config.cluster_size);
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    if let Some(first) = waves.first() {
        for (c, &u) in first.iter().enumerate() {
            clusters[c].push(u);
        }
    }
    for wave in waves.iter().skip(1) {
        let o = utility_matrix(channels, config, m, &contexts, &clusters, wave, rule)?;
        for (c, choice) in lsa_solve(&o)?.into_iter().enumerate() {
            if let Some(j) = choice {
                let u = wave[j];
                if channels.gamma(u, contexts[c].ris, contexts[c].uav) > 0.0 {
                    clusters[c].push(u);
                }
            }
        }
    }
    let clusters = contexts
        .iter()
        .zip(clusters)
        .filter(|(_, members)| !members.is_empty())
        .map(|(ctx, members)| ServedCluster { ris: ctx.ris, uav: ctx.uav, members })
        .collect();
    Ok(Assignment {
        num_ues: topology.num_ues(),
        num_uavs: topology.num_uavs(),
        num_ris: topology.num_ris(),
        clusters,
    })
}
