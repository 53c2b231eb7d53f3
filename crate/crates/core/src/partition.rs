//! Closed-form RIS partitioning for one NOMA cluster, element apportionment,
//! and a grid-search oracle over the allocation simplex.

use crate::sinr::{canonical_order, imperfect_csi_sinr, InterferenceModel, SinrInputs};
use crate::topology::PlusOne;
use crate::{Error, Result};

/// One cluster's channel ratios and QoS target, in arbitrary member order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionInput {
    pub gamma_tilde: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    pub elements: usize,
    pub m: f64,
    /// C_a·γ_th^RIS, linear.
    pub threshold: f64,
    pub plus_one: PlusOne,
    pub sigma2_e_ua: f64,
    pub sigma2_e_ura: f64,
}

impl PartitionInput {
    pub fn new(gamma_tilde: Vec<f64>, gamma_hat: Vec<f64>, elements: usize, m: f64, threshold: f64) -> Self {
        Self {
            gamma_tilde,
            gamma_hat,
            elements,
            m,
            threshold,
            plus_one: PlusOne::Single,
            sigma2_e_ua: 0.0,
            sigma2_e_ura: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.gamma_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_tilde.is_empty()
    }

    fn gain(&self, u: usize) -> f64 {
        let k = self.elements as f64;
        k * k * self.m * self.gamma_hat[u]
    }

    fn csi_error(&self, u: usize) -> f64 {
        self.sigma2_e_ua * self.gamma_tilde[u] + self.sigma2_e_ura * self.gamma_hat[u]
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::domain("cannot partition an empty cluster"));
        }
        if self.gamma_hat.len() != self.len() {
            return Err(Error::domain("channel ratio vectors differ in length"));
        }
        let bad = |x: &f64| !(x.is_finite() && *x >= 0.0);
        if self.gamma_tilde.iter().chain(&self.gamma_hat).any(bad) || bad(&self.threshold) {
            return Err(Error::domain("channel ratios and threshold must be finite and non-negative"));
        }
        if self.elements == 0 || !(self.m > 0.0) {
            return Err(Error::domain("need K >= 1 and m > 0"));
        }
        Ok(())
    }

    /// SINR inputs for `members` (already in cluster order) with the given factors.
    pub fn sinr_inputs(&self, members: &[usize], alpha: &[f64]) -> SinrInputs {
        SinrInputs {
            gamma_tilde: members.iter().map(|&u| self.gamma_tilde[u]).collect(),
            gamma_hat: members.iter().map(|&u| self.gamma_hat[u]).collect(),
            alpha: alpha.to_vec(),
            elements: self.elements,
            m: self.m,
        }
    }
}

/// Partition result; every per-member vector is indexed like the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Served members in cluster order (strongest first).
    pub order: Vec<usize>,
    pub alpha: Vec<f64>,
    pub elements: Vec<usize>,
    /// Approximate SIC SINR of each member (0 for dropped members).
    pub sinr: Vec<f64>,
    pub feasible: bool,
    pub dropped: Vec<usize>,
}

impl Partition {
    pub fn sum_sinr(&self) -> f64 {
        self.order.iter().map(|&u| self.sinr[u]).sum()
    }
}

fn relative_ge(x: f64, target: f64) -> bool {
    x >= target * (1.0 - 1e-12)
}

/// Closed-form partition: walking from the weakest member up, each
/// non-strongest member gets exactly the share that lifts its SINR to the
/// threshold (none if its direct link alone reaches it); the strongest member
/// takes the rest. Members are dropped weakest-first while that is impossible.
pub fn optimal_partition(input: &PartitionInput) -> Result<Partition> {
    input.validate()?;
    let n = input.len();
    let t = input.threshold;
    let mut served = canonical_order(&input.gamma_tilde, &input.gamma_hat);
    let mut dropped = Vec::new();

    loop {
        if served.is_empty() {
            return Ok(Partition {
                order: Vec::new(),
                alpha: vec![0.0; n],
                elements: vec![0; n],
                sinr: vec![0.0; n],
                feasible: false,
                dropped,
            });
        }
        let len = served.len();
        let mut alpha = vec![0.0; len];
        let mut interference = 0.0;
        let mut undeliverable = None;
        for pos in (1..len).rev() {
            let u = served[pos];
            let ones = match input.plus_one {
                PlusOne::Single => 1.0,
                PlusOne::Distributed => (len - 1 - pos).max(1) as f64,
            };
            if input.gamma_tilde[u] < t {
                let gain = input.gain(u);
                if gain > 0.0 {
                    let need = t * (interference + ones + input.csi_error(u)) - input.gamma_tilde[u];
                    alpha[pos] = (need / gain).max(0.0).sqrt();
                } else {
                    undeliverable = Some(pos);
                    break;
                }
            }
            interference += input.gamma_tilde[u] + alpha[pos].powi(2) * input.gain(u);
        }
        if let Some(pos) = undeliverable {
            dropped.push(served.remove(pos));
            continue;
        }
        let rest: f64 = alpha[1..].iter().sum();
        if rest > 1.0 {
            dropped.push(served.pop().expect("non-empty"));
            continue;
        }
        alpha[0] = (1.0 - rest).max(0.0);
        let inputs = input.sinr_inputs(&served, &alpha);
        let u0 = served[0];
        let lead = inputs.power(0) / (interference + 1.0 + input.csi_error(u0));
        if !relative_ge(lead, t) {
            dropped.push(served.pop().expect("non-empty"));
            continue;
        }

        let mut full_alpha = vec![0.0; n];
        let mut sinr = vec![0.0; n];
        for (pos, &u) in served.iter().enumerate() {
            full_alpha[u] = alpha[pos];
            sinr[u] = imperfect_csi_sinr(&inputs, input.sigma2_e_ua, input.sigma2_e_ura, pos, InterferenceModel::Sic);
        }
        let elements = elements_from_alpha(&full_alpha, input.elements);
        return Ok(Partition { order: served, alpha: full_alpha, elements, sinr, feasible: true, dropped });
    }
}

/// Largest-remainder apportionment of `k` elements proportional to `alpha`.
///
/// Remainder ties go to the lower index. Every entry with α > 0 receives at
/// least one element while `k` allows; counts sum to `k` whenever some α > 0.
pub fn elements_from_alpha(alpha: &[f64], k: usize) -> Vec<usize> {
    let positive: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0).collect();
    let mut counts = vec![0usize; alpha.len()];
    if positive.is_empty() {
        return counts;
    }
    let total: f64 = positive.iter().map(|&i| alpha[i]).sum();
    let scale = if total > 1.0 { total } else { 1.0 };
    let quota: Vec<f64> = alpha.iter().map(|&a| if a > 0.0 { a / scale * k as f64 } else { 0.0 }).collect();
    for &i in &positive {
        counts[i] = quota[i].floor() as usize;
    }
    let by_remainder = |counts: &[usize]| {
        let mut idx = positive.clone();
        idx.sort_by(|&a, &b| {
            let ra = quota[a] - counts[a] as f64;
            let rb = quota[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        idx
    };
    let mut assigned: usize = counts.iter().sum();
    for i in by_remainder(&counts) {
        if assigned >= k {
            break;
        }
        counts[i] += 1;
        assigned += 1;
    }
    // Leftover from Σα < 1 goes round-robin in remainder order.
    while assigned < k {
        for i in by_remainder(&counts) {
            if assigned >= k {
                break;
            }
            counts[i] += 1;
            assigned += 1;
        }
    }
    // Guarantee one element per positive share, taking from the largest counts.
    let mut starving: Vec<usize> = positive.iter().copied().filter(|&i| counts[i] == 0).collect();
    starving.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
    for i in starving {
        let donor = positive
            .iter()
            .copied()
            .filter(|&j| counts[j] > 1)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
        match donor {
            Some(j) => {
                counts[j] -= 1;
                counts[i] += 1;
            }
            None => break,
        }
    }
    counts
}

/// Best point of the α grid found by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Indexed like the input; all zeros when infeasible.
    pub alpha: Vec<f64>,
    pub sum_sinr: f64,
    pub feasible: bool,
}

struct Search<'a> {
    input: &'a PartitionInput,
    order: Vec<usize>,
    steps: usize,
    h: f64,
    grid: Vec<usize>,
    best: f64,
    best_grid: Option<Vec<usize>>,
}

impl Search<'_> {
    fn sinr_at(&self, pos: usize, a: f64, interference: f64) -> f64 {
        let u = self.order[pos];
        let k = self.input.elements as f64;
        let power = self.input.gamma_tilde[u] + a * a * k * k * self.input.m * self.input.gamma_hat[u];
        power / (interference + 1.0 + self.input.csi_error(u))
    }

    fn power(&self, pos: usize, a: f64) -> f64 {
        let u = self.order[pos];
        let k = self.input.elements as f64;
        self.input.gamma_tilde[u] + a * a * k * k * self.input.m * self.input.gamma_hat[u]
    }

    /// Assigns grid indices to positions `pos, pos−1, …, 1`; position 0 takes the rest.
    fn descend(&mut self, pos: usize, used: usize, interference: f64, acc: f64) {
        let t = self.input.threshold;
        let left = self.steps - used;
        if pos == 0 {
            let a = left as f64 * self.h;
            let s = self.sinr_at(0, a, interference);
            if relative_ge(s, t) && acc + s > self.best {
                self.best = acc + s;
                self.grid[0] = left;
                self.best_grid = Some(self.grid.clone());
            }
            return;
        }
        // Upper bound on what positions 0..=pos can still add.
        let max_gain = (0..=pos)
            .map(|p| {
                let u = self.order[p];
                let k = self.input.elements as f64;
                k * k * self.input.m * self.input.gamma_hat[u]
            })
            .fold(0.0, f64::max);
        let base: f64 = (0..=pos).map(|p| self.input.gamma_tilde[self.order[p]]).sum();
        for i in 0..=left {
            let a = i as f64 * self.h;
            let s = self.sinr_at(pos, a, interference);
            if !relative_ge(s, t) {
                continue;
            }
            let rest = (left - i) as f64 * self.h;
            let next_interference = interference + self.power(pos, a);
            // The strongest member can do no better than taking everything left.
            if !relative_ge(self.sinr_at(0, rest, next_interference), t) {
                break;
            }
            let bound = acc + s + (base - self.input.gamma_tilde[self.order[pos]] + rest * rest * max_gain) / (next_interference + 1.0);
            if bound <= self.best {
                continue;
            }
            self.grid[pos] = i;
            self.descend(pos - 1, used + i, next_interference, acc + s);
        }
    }
}

/// Exhaustive search over {α ≥ 0 : Σα = 1} on a grid of the given resolution,
/// maximizing the sum of SIC approximate SINRs with every member at or above
/// the threshold. Branches that provably cannot beat the incumbent are skipped.
pub fn partition_oracle(input: &PartitionInput, resolution: f64) -> Result<OracleResult> {
    input.validate()?;
    if input.len() > 4 {
        return Err(Error::TooLarge(format!("oracle handles at most 4 members, got {}", input.len())));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::domain(format!("grid resolution must be in (0, 1], got {resolution}")));
    }
    let steps = (1.0 / resolution).round() as usize;
    let n = input.len();
    let mut search = Search {
        input,
        order: canonical_order(&input.gamma_tilde, &input.gamma_hat),
        steps,
        h: 1.0 / steps as f64,
        grid: vec![0; n],
        best: f64::NEG_INFINITY,
        best_grid: None,
    };
    search.descend(n - 1, 0, 0.0, 0.0);
    let mut alpha = vec![0.0; n];
    match search.best_grid {
        Some(grid) => {
            for (pos, &u) in search.order.iter().enumerate() {
                alpha[u] = grid[pos] as f64 * search.h;
            }
            Ok(OracleResult { alpha, sum_sinr: search.best, feasible: true })
        }
        None => Ok(OracleResult { alpha, sum_sinr: 0.0, feasible: false }),
    }
}
