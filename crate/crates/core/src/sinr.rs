//! SINR models for RIS-aided NOMA clusters and the resulting rates.

use statrs::function::gamma::ln_gamma;

use crate::channel::{ChannelSet, ServedCluster};
use crate::{Error, Result};

/// m = (1/(f1 f2))·(Γ(f1+½)/Γ(f1))²·(Γ(f2+½)/Γ(f2))², the squared mean of a
/// unit-spread double-Nakagami element product.
pub fn m_constant(f1: f64, f2: f64) -> Result<f64> {
    if !(f1 >= 0.5) || !(f2 >= 0.5) || !f1.is_finite() || !f2.is_finite() {
        return Err(Error::domain(format!("Nakagami shapes must be >= 0.5, got ({f1}, {f2})")));
    }
    let ratio = |f: f64| (2.0 * (ln_gamma(f + 0.5) - ln_gamma(f))).exp() / f;
    Ok(ratio(f1) * ratio(f2))
}

/// Which cluster members count as interference for a given UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceModel {
    /// Only members after `u` in cluster order (not yet decoded under SIC).
    #[default]
    Sic,
    /// Every other member, as in the undecoded expression.
    AllOthers,
}

/// Per-member inputs of the approximate SINR, in cluster order (strongest first).
#[derive(Debug, Clone, PartialEq)]
pub struct SinrInputs {
    /// γ̃_u = p·G̃_{u,a}/σ².
    pub gamma_tilde: Vec<f64>,
    /// γ̂_u = p·Γ_u/σ².
    pub gamma_hat: Vec<f64>,
    pub alpha: Vec<f64>,
    pub elements: usize,
    pub m: f64,
}

impl SinrInputs {
    pub fn len(&self) -> usize {
        self.gamma_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_tilde.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.gamma_hat.len() != n || self.alpha.len() != n {
            return Err(Error::domain("SINR input vectors differ in length"));
        }
        if self.gamma_tilde.iter().chain(&self.gamma_hat).any(|g| !(*g >= 0.0)) {
            return Err(Error::domain("channel ratios must be non-negative"));
        }
        if self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) || self.alpha.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::domain("allocation factors must lie in [0, 1] and sum to at most 1"));
        }
        if !(self.m > 0.0) {
            return Err(Error::domain("expectation constant must be positive"));
        }
        Ok(())
    }

    /// Mean received power of member `u` over noise: γ̃ + α²K²m·γ̂.
    pub fn power(&self, u: usize) -> f64 {
        let k = self.elements as f64;
        self.gamma_tilde[u] + self.alpha[u].powi(2) * k * k * self.m * self.gamma_hat[u]
    }

    fn interference(&self, u: usize, model: InterferenceModel) -> f64 {
        match model {
            InterferenceModel::Sic => (u + 1..self.len()).map(|j| self.power(j)).sum(),
            InterferenceModel::AllOthers => (0..self.len()).filter(|&j| j != u).map(|j| self.power(j)).sum(),
        }
    }
}

/// Approximate SINR of member `u`: (γ̃_u + α_u²K²m·γ̂_u) / (Σ interferers + 1).
pub fn approx_sinr(inputs: &SinrInputs, u: usize, model: InterferenceModel) -> f64 {
    inputs.power(u) / (inputs.interference(u, model) + 1.0)
}

/// Approximate SINR with channel-estimation error terms σ²_ua·γ̃_u + σ²_ura·γ̂_u
/// added to the denominator.
pub fn imperfect_csi_sinr(
    inputs: &SinrInputs,
    sigma2_e_ua: f64,
    sigma2_e_ura: f64,
    u: usize,
    model: InterferenceModel,
) -> f64 {
    let err = sigma2_e_ua * inputs.gamma_tilde[u] + sigma2_e_ura * inputs.gamma_hat[u];
    inputs.power(u) / (inputs.interference(u, model) + 1.0 + err)
}

/// Cluster order: descending γ̃, then descending γ̂, then ascending position.
pub fn canonical_order(gamma_tilde: &[f64], gamma_hat: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gamma_tilde.len()).collect();
    idx.sort_by(|&a, &b| {
        gamma_tilde[b]
            .total_cmp(&gamma_tilde[a])
            .then(gamma_hat[b].total_cmp(&gamma_hat[a]))
            .then(a.cmp(&b))
    });
    idx
}

/// Instantaneous received power over noise for every cluster member when the
/// RIS applies `ris_phases` (one phase per element).
///
/// Each member sees the whole surface: its own elements add coherently, the
/// elements configured for the other members add with mismatched phases.
pub fn received_powers(channels: &ChannelSet, snr_scale: f64, cluster: &ServedCluster, ris_phases: &[f64]) -> Vec<f64> {
    let (r, a) = (cluster.ris, cluster.uav);
    cluster
        .members
        .iter()
        .map(|&u| {
            let direct = channels.g_ua(u, a).sqrt() * channels.direct(u, a);
            let cascade = channels.gamma(u, r, a).sqrt() * crate::channel::cascaded_sum(channels, ris_phases, u, r, a);
            snr_scale * (direct + cascade).norm_sqr()
        })
        .collect()
}

/// SINR under SIC: decode in descending received power (ties by member
/// position); each member is interfered by the ones decoded after it.
pub fn sic_sinr(powers: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    let mut out = vec![0.0; powers.len()];
    let mut remaining: f64 = powers.iter().sum();
    for &j in &order {
        remaining -= powers[j];
        out[j] = powers[j] / (remaining.max(0.0) + 1.0);
    }
    out
}

/// Exact per-member SINR of a served cluster for a given RIS configuration.
pub fn exact_sinr(channels: &ChannelSet, snr_scale: f64, cluster: &ServedCluster, ris_phases: &[f64]) -> Result<Vec<f64>> {
    if cluster.members.is_empty() {
        return Err(Error::domain("cannot evaluate an empty cluster"));
    }
    Ok(sic_sinr(&received_powers(channels, snr_scale, cluster, ris_phases)))
}

/// Σ_u B·log2(1 + SINR_u).
pub fn noma_sum_rate(sinrs: &[f64], bandwidth_hz: f64) -> f64 {
    sinrs.iter().map(|s| bandwidth_hz * (1.0 + s).log2()).sum()
}

/// Σ_u (B/U_r)·log2(1 + SNR_u): each member gets an interference-free slice.
pub fn oma_sum_rate(snrs: &[f64], bandwidth_hz: f64, cluster_size: usize) -> f64 {
    let share = bandwidth_hz / cluster_size.max(1) as f64;
    snrs.iter().map(|s| share * (1.0 + s).log2()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrMode {
    Exact,
    Approximate,
    ImperfectCsi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub sinr: Vec<f64>,
    pub rate_bps: Vec<f64>,
    pub sum_rate_bps: f64,
    pub mode: SinrMode,
}

impl SinrReport {
    pub fn new(sinr: Vec<f64>, bandwidth_hz: f64, mode: SinrMode) -> Self {
        let rate_bps: Vec<f64> = sinr.iter().map(|s| bandwidth_hz * (1.0 + s).log2()).collect();
        let sum_rate_bps = rate_bps.iter().sum();
        Self { sinr, rate_bps, sum_rate_bps, mode }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn inputs(gt: &[f64], gh: &[f64], alpha: &[f64], k: usize, m: f64) -> SinrInputs {
        SinrInputs { gamma_tilde: gt.to_vec(), gamma_hat: gh.to_vec(), alpha: alpha.to_vec(), elements: k, m }
    }

    #[test]
    fn m_constant_examples() {
        assert!((m_constant(1.0, 1.0).unwrap() - PI * PI / 16.0).abs() < 1e-12);
        // Γ(5.5) = 945√π/32, Γ(5) = 24.
        let r = (945.0 * PI.sqrt() / 32.0 / 24.0).powi(2) / 5.0;
        assert!((m_constant(5.0, 5.0).unwrap() - r * r).abs() < 1e-9);
        assert!(m_constant(50.0, 50.0).unwrap() > 0.99);
        assert!(m_constant(0.4, 1.0).is_err());
    }

    #[test]
    fn approx_examples() {
        let single = inputs(&[0.0], &[2.0], &[1.0], 1, 1.0);
        assert_eq!(approx_sinr(&single, 0, InterferenceModel::Sic), 2.0);

        let pair = inputs(&[0.0, 0.0], &[1000.0, 1000.0], &[0.9, 0.1], 1, 1.0);
        let s1 = approx_sinr(&pair, 0, InterferenceModel::Sic);
        let s2 = approx_sinr(&pair, 1, InterferenceModel::Sic);
        assert!((s1 - 810.0 / 11.0).abs() < 1e-12);
        assert!((s2 - 10.0).abs() < 1e-12);
        // Brute-force: literal mode also counts the stronger member.
        let lit = approx_sinr(&pair, 1, InterferenceModel::AllOthers);
        assert!((lit - 10.0 / 811.0).abs() < 1e-12);

        let scaled = inputs(&[0.0], &[6.0], &[1.0], 1, 1.0);
        assert_eq!(approx_sinr(&scaled, 0, InterferenceModel::Sic), 3.0 * approx_sinr(&single, 0, InterferenceModel::Sic));
    }

    #[test]
    fn single_member_without_direct_link_reduces_to_cascade_term() {
        let x = inputs(&[0.0], &[3.5], &[0.7], 40, 0.9);
        let want = 0.7f64.powi(2) * 1600.0 * 0.9 * 3.5;
        assert!((approx_sinr(&x, 0, InterferenceModel::AllOthers) - want).abs() < 1e-9 * want);
    }

    #[test]
    fn imperfect_csi_examples() {
        let x = inputs(&[10.0, 3.0], &[5.0, 7.0], &[0.6, 0.4], 10, 0.9);
        for u in 0..2 {
            assert_eq!(imperfect_csi_sinr(&x, 0.0, 0.0, u, InterferenceModel::Sic), approx_sinr(&x, u, InterferenceModel::Sic));
            assert!(imperfect_csi_sinr(&x, 0.1, 0.1, u, InterferenceModel::Sic) < approx_sinr(&x, u, InterferenceModel::Sic));
            assert!(imperfect_csi_sinr(&x, 1e12, 1e12, u, InterferenceModel::Sic) < 1e-6);
        }
        let y = inputs(&[10.0], &[0.0], &[0.0], 10, 1.0);
        assert!((imperfect_csi_sinr(&y, 1.0, 1.0, 0, InterferenceModel::Sic) - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        assert!((noma_sum_rate(&[3.0], 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(noma_sum_rate(&[0.0, 0.0], 5.0), 0.0);
        let r = noma_sum_rate(&[810.0 / 11.0, 10.0], 250e3);
        assert!((r - 250e3 * ((1.0 + 810.0 / 11.0f64).log2() + 11f64.log2())).abs() < 1e-6);
        assert!((r - 2.421e6).abs() < 1e3);
        assert_eq!(oma_sum_rate(&[7.0], 3.0, 1), noma_sum_rate(&[7.0], 3.0));
        assert_eq!(oma_sum_rate(&[0.0, 0.0], 2.0, 2), 0.0);
        assert!((oma_sum_rate(&[1000.0, 1000.0], 2.0, 2) - 2.0 * 1001f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn sic_examples() {
        assert_eq!(sic_sinr(&[7.0]), vec![7.0]);
        assert_eq!(sic_sinr(&[5.0, 0.0]), vec![5.0, 0.0]);
        let s = sic_sinr(&[2.0, 9.0]);
        assert_eq!(s, vec![2.0, 9.0 / 3.0]);
        // Equal powers: the earlier member is decoded first.
        assert_eq!(sic_sinr(&[4.0, 4.0]), vec![4.0 / 5.0, 4.0]);
        let report = SinrReport::new(vec![3.0, 1.0], 1.0, SinrMode::Exact);
        assert_eq!(report.sum_rate_bps, 3.0);
    }

    #[test]
    fn canonical_order_breaks_ties() {
        assert_eq!(canonical_order(&[1.0, 5.0, 5.0, 0.0], &[0.0, 1.0, 2.0, 0.0]), vec![2, 1, 0, 3]);
        assert_eq!(canonical_order(&[0.0, 0.0], &[1.0, 1.0]), vec![0, 1]);
    }

    #[test]
    fn validation_catches_bad_inputs() {
        assert!(inputs(&[1.0], &[1.0], &[1.2], 1, 1.0).validate().is_err());
        assert!(inputs(&[1.0, 1.0], &[1.0, 1.0], &[0.6, 0.6], 1, 1.0).validate().is_err());
        assert!(inputs(&[-1.0], &[1.0], &[1.0], 1, 1.0).validate().is_err());
        assert!(inputs(&[1.0], &[1.0], &[1.0], 1, 1.0).validate().is_ok());
    }
}
