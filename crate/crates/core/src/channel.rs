//! Large-scale gains, Nakagami fading realizations and RIS phase plans.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::topology::{distance, LargeScaleModel, SimConfig, Topology};
use crate::util::{dbm_to_watts, linear_to_db, stream_rng};
use crate::{Error, Result};

/// Free-space UAV-UAV path loss 20·log10(4π f_c d / c), in dB.
pub fn pathloss_uav_uav(d: f64, carrier_hz: f64, light_speed: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("UAV-UAV distance must be positive, got {d}")));
    }
    Ok(20.0 * (4.0 * PI * carrier_hz * d / light_speed).log10())
}

/// UAV-UAV SNR in dB: 10·log10(P) − PL − 10·log10(N0), with P and N0 in watts.
pub fn snr_uav_uav(power_w: f64, d: f64, carrier_hz: f64, light_speed: f64, n0_dbm: f64) -> Result<f64> {
    if !(power_w > 0.0) {
        return Err(Error::domain(format!("UAV power must be positive, got {power_w}")));
    }
    let pl = pathloss_uav_uav(d, carrier_hz, light_speed)?;
    Ok(linear_to_db(power_w) - pl - linear_to_db(dbm_to_watts(n0_dbm)))
}

/// Large-scale amplitude gain d^(−τ/2), scaled by √β0 when a reference gain is given.
pub fn largescale_gain(d: f64, tau: f64, beta0: Option<f64>) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("link distance must be positive, got {d}")));
    }
    let g = d.powf(-tau / 2.0);
    Ok(match beta0 {
        Some(b) => b.sqrt() * g,
        None => g,
    })
}

fn hop_gain(config: &SimConfig, d: f64) -> Result<f64> {
    match config.large_scale {
        LargeScaleModel::Beta0 => largescale_gain(d, 2.0, Some(config.beta0)),
        LargeScaleModel::PowerLaw => largescale_gain(d, config.tau, None),
    }
}

/// Nakagami-f amplitude: the square root of a Gamma(f, Ω/f) power draw.
pub fn sample_nakagami<R: Rng + ?Sized>(shape: f64, spread: f64, rng: &mut R) -> Result<f64> {
    Ok(nakagami(shape, spread)?.sample(rng).sqrt())
}

fn nakagami(shape: f64, spread: f64) -> Result<Gamma<f64>> {
    if !(shape >= 0.5) || !(spread > 0.0) {
        return Err(Error::domain(format!(
            "Nakagami needs shape >= 0.5 and spread > 0, got ({shape}, {spread})"
        )));
    }
    Gamma::new(shape, spread / shape).map_err(|e| Error::domain(e.to_string()))
}

fn fading_draw<R: Rng + ?Sized>(power: &Gamma<f64>, rng: &mut R) -> Complex64 {
    let amp = power.sample(rng).sqrt();
    let phase = rng.random::<f64>() * TAU;
    Complex64::from_polar(amp, phase)
}

/// One stochastic realization of every channel in a snapshot.
///
/// Flat row-major storage; use the accessor methods for indexing.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub num_ues: usize,
    pub num_uavs: usize,
    pub num_ris: usize,
    pub elements: usize,
    /// Direct small-scale fading h_{u,a}, U×A.
    pub direct: Vec<Complex64>,
    /// Per-element UE→RIS fading g^{(k)}_{u,r}, U×R×K.
    pub ue_ris: Vec<Complex64>,
    /// Per-element RIS→UAV fading h^{(k)}_{r,a}, R×A×K.
    pub ris_uav: Vec<Complex64>,
    /// Direct large-scale power gain, U×A; zero when the link is blocked.
    pub g_ua: Vec<f64>,
    /// UE→RIS amplitude gain, U×R; zero beyond the UE-RIS range.
    pub g_ur: Vec<f64>,
    /// RIS→UAV amplitude gain, R×A; zero beyond the RIS-UAV range.
    pub h_ra: Vec<f64>,
    /// Cascaded gain products Γ = G_ur·H_ra, U×R×A.
    pub gamma: Vec<f64>,
    /// Realized direct-link SNR in dB, U×A; −∞ when blocked.
    pub direct_snr_db: Vec<f64>,
}

impl ChannelSet {
    pub fn direct(&self, u: usize, a: usize) -> Complex64 {
        self.direct[u * self.num_uavs + a]
    }

    pub fn g_ua(&self, u: usize, a: usize) -> f64 {
        self.g_ua[u * self.num_uavs + a]
    }

    pub fn g_ur(&self, u: usize, r: usize) -> f64 {
        self.g_ur[u * self.num_ris + r]
    }

    pub fn h_ra(&self, r: usize, a: usize) -> f64 {
        self.h_ra[r * self.num_uavs + a]
    }

    pub fn gamma(&self, u: usize, r: usize, a: usize) -> f64 {
        self.gamma[(u * self.num_ris + r) * self.num_uavs + a]
    }

    pub fn direct_snr_db(&self, u: usize, a: usize) -> f64 {
        self.direct_snr_db[u * self.num_uavs + a]
    }

    /// Whether the direct UE-UAV link exists (passes the UE SNR threshold).
    pub fn has_direct(&self, u: usize, a: usize) -> bool {
        self.g_ua(u, a) > 0.0
    }

    pub fn ue_ris_elements(&self, u: usize, r: usize) -> &[Complex64] {
        let start = (u * self.num_ris + r) * self.elements;
        &self.ue_ris[start..start + self.elements]
    }

    pub fn ris_uav_elements(&self, r: usize, a: usize) -> &[Complex64] {
        let start = (r * self.num_uavs + a) * self.elements;
        &self.ris_uav[start..start + self.elements]
    }
}

const DIRECT_STREAM: u64 = 1 << 20;
const UE_RIS_STREAM: u64 = 2 << 20;
const RIS_UAV_STREAM: u64 = 3 << 20;

/// Realizes all channels of a snapshot from `seed`.
///
/// Every link family (and every node pair within it) draws from its own
/// stream, so sweeping K or a node count keeps the remaining draws fixed.
/// A direct link is kept only when its realized SNR p·G·|h|²/N0 reaches the
/// UE threshold and it is not scripted as blocked.
pub fn realize_channels(topology: &Topology, config: &SimConfig, seed: u64) -> Result<ChannelSet> {
    let (nu, na, nr, k) = (topology.num_ues(), topology.num_uavs(), topology.num_ris(), config.elements);
    let direct_fading = nakagami(config.f_u, config.spread)?;
    let hop1 = nakagami(config.f1, config.spread)?;
    let hop2 = nakagami(config.f2, config.spread)?;
    let p_w = dbm_to_watts(config.ue_power_dbm);
    let n0_w = dbm_to_watts(config.n0_dbm);

    let mut direct = Vec::with_capacity(nu * na);
    let mut g_ua = Vec::with_capacity(nu * na);
    let mut direct_snr_db = Vec::with_capacity(nu * na);
    for u in 0..nu {
        let mut rng = stream_rng(seed, DIRECT_STREAM + u as u64);
        for a in 0..na {
            let h = fading_draw(&direct_fading, &mut rng);
            let d = distance(topology.ue_positions[u], topology.uav_positions[a]);
            let gain = hop_gain(config, d)?.powi(2);
            let snr_db = linear_to_db(p_w * gain * h.norm_sqr() / n0_w);
            direct.push(h);
            if !topology.is_blocked(u, a) && snr_db >= config.gamma_th_ue_db {
                g_ua.push(gain);
                direct_snr_db.push(snr_db);
            } else {
                g_ua.push(0.0);
                direct_snr_db.push(f64::NEG_INFINITY);
            }
        }
    }

    let mut ue_ris = Vec::with_capacity(nu * nr * k);
    let mut g_ur = Vec::with_capacity(nu * nr);
    for u in 0..nu {
        for r in 0..nr {
            let mut rng = stream_rng(seed, UE_RIS_STREAM + (u * nr + r) as u64);
            ue_ris.extend((0..k).map(|_| fading_draw(&hop1, &mut rng)));
            let d = distance(topology.ue_positions[u], topology.ris_positions[r]);
            g_ur.push(if d <= config.r_ur { hop_gain(config, d)? } else { 0.0 });
        }
    }

    let mut ris_uav = Vec::with_capacity(nr * na * k);
    let mut h_ra = Vec::with_capacity(nr * na);
    for r in 0..nr {
        for a in 0..na {
            let mut rng = stream_rng(seed, RIS_UAV_STREAM + (r * na + a) as u64);
            ris_uav.extend((0..k).map(|_| fading_draw(&hop2, &mut rng)));
            let d = distance(topology.ris_positions[r], topology.uav_positions[a]);
            h_ra.push(if d <= config.r_ra { hop_gain(config, d)? } else { 0.0 });
        }
    }

    let mut gamma = Vec::with_capacity(nu * nr * na);
    for u in 0..nu {
        for r in 0..nr {
            for a in 0..na {
                gamma.push(g_ur[u * nr + r] * h_ra[r * na + a]);
            }
        }
    }

    Ok(ChannelSet {
        num_ues: nu,
        num_uavs: na,
        num_ris: nr,
        elements: k,
        direct,
        ue_ris,
        ris_uav,
        g_ua,
        g_ur,
        h_ra,
        gamma,
        direct_snr_db,
    })
}

/// One RIS serving an ordered group of UEs towards a single UAV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServedCluster {
    pub ris: usize,
    pub uav: usize,
    pub members: Vec<usize>,
}

/// Per-element phase shifts: `theta[c][i][k]` is the phase element `k` of
/// cluster `c`'s RIS would use to co-phase member `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub theta: Vec<Vec<Vec<f64>>>,
    /// 0 for continuous phases, otherwise the quantizer resolution.
    pub bits: u32,
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Co-phasing shifts θ = arg(h_direct) − arg(g) − arg(h) for every served UE.
///
/// A UE without a direct link to the target UAV co-phases to angle 0; the
/// aligned magnitude does not depend on that common rotation.
pub fn optimal_phases(channels: &ChannelSet, clusters: &[ServedCluster]) -> PhasePlan {
    let theta = clusters
        .iter()
        .map(|c| {
            c.members
                .iter()
                .map(|&u| {
                    let direct_arg = if channels.has_direct(u, c.uav) {
                        channels.direct(u, c.uav).arg()
                    } else {
                        0.0
                    };
                    channels
                        .ue_ris_elements(u, c.ris)
                        .iter()
                        .zip(channels.ris_uav_elements(c.ris, c.uav))
                        .map(|(g, h)| wrap_phase(direct_arg - g.arg() - h.arg()))
                        .collect()
                })
                .collect()
        })
        .collect();
    PhasePlan { theta, bits: 0 }
}

/// Snaps a phase to the nearest point of {2πc/2^b}; exact ties go to the lower point.
pub fn quantize_phase(theta: f64, bits: u32) -> f64 {
    let levels = (1u64 << bits) as f64;
    let step = TAU / levels;
    let x = wrap_phase(theta) / step;
    let lower = x.floor();
    let c = if x - lower > 0.5 { lower + 1.0 } else { lower };
    if c >= levels {
        0.0
    } else {
        c * step
    }
}

pub fn quantize_phases(plan: &PhasePlan, bits: u32) -> Result<PhasePlan> {
    if bits == 0 {
        return Err(Error::domain("quantization needs at least one bit"));
    }
    let theta = plan
        .theta
        .iter()
        .map(|c| c.iter().map(|m| m.iter().map(|&t| quantize_phase(t, bits)).collect()).collect())
        .collect();
    Ok(PhasePlan { theta, bits })
}

/// |Σ_k g^{(k)}_{u,r} h^{(k)}_{r,a} e^{jθ_k}| for a K-long phase vector.
pub fn aligned_gain(channels: &ChannelSet, theta: &[f64], u: usize, r: usize, a: usize) -> f64 {
    cascaded_sum(channels, theta, u, r, a).norm()
}

/// Σ_k g^{(k)}_{u,r} h^{(k)}_{r,a} e^{jθ_k} (complex).
pub fn cascaded_sum(channels: &ChannelSet, theta: &[f64], u: usize, r: usize, a: usize) -> Complex64 {
    channels
        .ue_ris_elements(u, r)
        .iter()
        .zip(channels.ris_uav_elements(r, a))
        .zip(theta)
        .map(|((g, h), &t)| g * h * Complex64::from_polar(1.0, t))
        .sum()
}

/// Phase actually applied by each RIS element when member `i` owns the
/// `counts[i]` contiguous elements following members `0..i`.
pub fn ris_configuration(member_theta: &[Vec<f64>], counts: &[usize]) -> Vec<f64> {
    let k = member_theta.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(k);
    for (theta, &n) in member_theta.iter().zip(counts) {
        let start = out.len();
        out.extend_from_slice(&theta[start..(start + n).min(k)]);
    }
    // Elements left unassigned keep a zero phase.
    out.resize(k, 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_topology, Position};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pathloss_examples() {
        let pl = pathloss_uav_uav(100.0, 3e9, 3e8).unwrap();
        assert!((pl - 81.9842).abs() < 1e-3, "{pl}");
        let unit = pathloss_uav_uav(1.0, 3e8 / (4.0 * PI), 3e8).unwrap();
        assert!(unit.abs() < 1e-12);
        let doubled = pathloss_uav_uav(200.0, 3e9, 3e8).unwrap();
        assert!((doubled - pl - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!(pathloss_uav_uav(0.0, 3e9, 3e8).is_err());
    }

    #[test]
    fn uav_snr_examples() {
        // 0 dBW − 81.98 dB + 160 dB (N0 = −130 dBm = −160 dBW).
        let snr = snr_uav_uav(1.0, 100.0, 3e9, 3e8, -130.0).unwrap();
        assert!((snr - 78.0158).abs() < 1e-3, "{snr}");
        let zero_pl = snr_uav_uav(1.0, 1.0, 3e8 / (4.0 * PI), 3e8, -130.0).unwrap();
        assert!((zero_pl - 160.0).abs() < 1e-9);
        let tenfold = snr_uav_uav(10.0, 100.0, 3e9, 3e8, -130.0).unwrap();
        assert!((tenfold - snr - 10.0).abs() < 1e-12);
        assert!(snr_uav_uav(0.0, 100.0, 3e9, 3e8, -130.0).is_err());
    }

    #[test]
    fn largescale_examples() {
        assert_eq!(largescale_gain(1.0, 2.0, Some(1.0)).unwrap(), 1.0);
        assert!((largescale_gain(10.0, 2.0, Some(1e-2)).unwrap() - 0.01).abs() < 1e-15);
        assert!((largescale_gain(100.0, 4.0, None).unwrap() - 1e-4).abs() < 1e-18);
        assert!(largescale_gain(-1.0, 2.0, None).is_err());
    }

    #[test]
    fn nakagami_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_nakagami(5.0, 1.0, &mut rng).unwrap()).collect();
        let p2 = draws.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((p2 - 1.0).abs() < 0.02, "{p2}");
        // Γ(5.5)/(Γ(5)·√5) with Γ(5.5) = 945√π/32.
        let expected = 945.0 * PI.sqrt() / 32.0 / 24.0 / 5f64.sqrt();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");

        let rayleigh: f64 = (0..n).map(|_| sample_nakagami(1.0, 1.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((rayleigh - PI.sqrt() / 2.0).abs() < 0.01);
        assert!(sample_nakagami(0.4, 1.0, &mut rng).is_err());
    }

    fn small_snapshot(k: usize) -> (Topology, SimConfig, ChannelSet) {
        let cfg = SimConfig {
            num_ues: 6,
            num_uavs: 3,
            num_ris: 2,
            elements: k,
            area_side: 200.0,
            ..SimConfig::default()
        };
        let topo = generate_topology(&cfg, 5).unwrap();
        let ch = realize_channels(&topo, &cfg, 5).unwrap();
        (topo, cfg, ch)
    }

    #[test]
    fn gamma_is_product_of_hop_gains() {
        let (_, _, ch) = small_snapshot(16);
        for u in 0..ch.num_ues {
            for r in 0..ch.num_ris {
                for a in 0..ch.num_uavs {
                    assert_eq!(ch.gamma(u, r, a), ch.g_ur(u, r) * ch.h_ra(r, a));
                }
            }
        }
    }

    #[test]
    fn blocked_ue_has_zero_direct_row() {
        let mut topo = Topology::rate_study_scenario();
        topo.blocked = vec![(0, 0), (0, 1)];
        let cfg = SimConfig { elements: 8, gamma_th_ue_db: -1000.0, ..SimConfig::default() };
        let ch = realize_channels(&topo, &cfg, 1).unwrap();
        assert!((0..2).all(|a| ch.g_ua(0, a) == 0.0 && ch.direct_snr_db(0, a) == f64::NEG_INFINITY));
        assert!((0..2).all(|a| ch.g_ua(1, a) > 0.0));

        // Geometric blockage: a UE far from every UAV under a high threshold.
        let far = Topology {
            ue_positions: vec![Position::new(0.0, 0.0, 0.0)],
            uav_positions: vec![Position::new(5000.0, 0.0, 200.0)],
            ris_positions: vec![Position::new(0.0, 0.0, 120.0)],
            blocked: vec![],
        };
        let ch = realize_channels(&far, &SimConfig { elements: 4, ..SimConfig::default() }, 1).unwrap();
        assert_eq!(ch.g_ua(0, 0), 0.0);
    }

    #[test]
    fn direct_fading_power_is_unit_mean() {
        // Rayleigh (f_u = 1) direct fading over 10⁵ independent links.
        let n = 100_000;
        let topo = Topology {
            ue_positions: vec![Position::new(0.0, 0.0, 0.0); n],
            uav_positions: vec![Position::new(0.0, 0.0, 200.0)],
            ris_positions: vec![Position::new(0.0, 0.0, 120.0)],
            blocked: vec![],
        };
        let cfg = SimConfig { elements: 1, num_ues: n, num_uavs: 1, num_ris: 1, ..SimConfig::default() };
        let ch = realize_channels(&topo, &cfg, 99).unwrap();
        let p2 = ch.direct.iter().map(|h| h.norm_sqr()).sum::<f64>() / n as f64;
        assert!((p2 - 1.0).abs() < 0.02, "{p2}");
    }

    #[test]
    fn phase_cancellation_example() {
        let g = Complex64::from_polar(1.0, PI / 3.0);
        let h = Complex64::from_polar(1.0, PI / 4.0);
        let theta = wrap_phase(0.0 - g.arg() - h.arg());
        assert!((theta - wrap_phase(-7.0 * PI / 12.0)).abs() < 1e-12);
        let v = g * h * Complex64::from_polar(1.0, theta);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn optimal_plan_reaches_element_magnitude_sum() {
        let (_, _, ch) = small_snapshot(64);
        let clusters = vec![ServedCluster { ris: 1, uav: 2, members: vec![0, 3] }];
        let plan = optimal_phases(&ch, &clusters);
        for (i, &u) in clusters[0].members.iter().enumerate() {
            let bound: f64 = ch
                .ue_ris_elements(u, 1)
                .iter()
                .zip(ch.ris_uav_elements(1, 2))
                .map(|(g, h)| g.norm() * h.norm())
                .sum();
            let got = aligned_gain(&ch, &plan.theta[0][i], u, 1, 2);
            assert!((got - bound).abs() <= 1e-12 * bound);
            // The co-phased sum points along the direct link (angle 0 when none).
            let s = cascaded_sum(&ch, &plan.theta[0][i], u, 1, 2);
            let want = if ch.has_direct(u, 2) { ch.direct(u, 2).arg() } else { 0.0 };
            assert!((s.arg() - want).sin().abs() < 1e-9);
        }
    }

    #[test]
    fn unit_channels_give_magnitude_k() {
        let mut ch = small_snapshot(4).2;
        ch.ue_ris.iter_mut().for_each(|g| *g = Complex64::from_polar(1.0, 0.7));
        ch.ris_uav.iter_mut().for_each(|h| *h = Complex64::from_polar(1.0, -2.1));
        let plan = optimal_phases(&ch, &[ServedCluster { ris: 0, uav: 0, members: vec![1] }]);
        assert!((aligned_gain(&ch, &plan.theta[0][0], 1, 0, 0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_phases_behave_like_a_random_walk() {
        // With unit channels and uniform phases, E|Σ e^{jθ}| = √(πK)/2.
        let k = 10_000;
        let mut ch = small_snapshot(k).2;
        ch.ue_ris.iter_mut().for_each(|g| *g = Complex64::new(1.0, 0.0));
        ch.ris_uav.iter_mut().for_each(|h| *h = Complex64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reps = 1000;
        let mut total = 0.0;
        for _ in 0..reps {
            let theta: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * TAU).collect();
            let g = aligned_gain(&ch, &theta, 0, 0, 0);
            assert!(g < k as f64);
            total += g;
        }
        let mean = total / reps as f64;
        let expected = (PI * k as f64).sqrt() / 2.0;
        assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
    }

    #[test]
    fn quantizer_examples() {
        let step16 = TAU / 16.0;
        assert!((quantize_phase(0.9 * step16, 4) - step16).abs() < 1e-12);
        assert!((quantize_phase(PI / 3.0, 2) - PI / 2.0).abs() < 1e-12);
        for c in 0..16 {
            let t = c as f64 * step16;
            assert_eq!(quantize_phase(t, 4), t);
        }
        // Exact tie between 0 and π/2 goes to the lower grid point.
        assert_eq!(quantize_phase(PI / 4.0, 2), 0.0);
        // Just below 2π wraps onto 0.
        assert_eq!(quantize_phase(TAU - 1e-9, 3), 0.0);
        let plan = PhasePlan { theta: vec![vec![vec![0.1, 3.0]]], bits: 0 };
        assert!(quantize_phases(&plan, 0).is_err());
    }

    #[test]
    fn one_bit_quantization_keeps_gain_within_bound() {
        let (_, _, ch) = small_snapshot(256);
        let clusters = vec![ServedCluster { ris: 0, uav: 1, members: vec![2] }];
        let plan = optimal_phases(&ch, &clusters);
        let best = aligned_gain(&ch, &plan.theta[0][0], 2, 0, 1);
        let q = quantize_phases(&plan, 1).unwrap();
        let got = aligned_gain(&ch, &q.theta[0][0], 2, 0, 1);
        // Per-element phase error ≤ π/2 keeps every term's projection ≥ 0.
        assert!(got <= best + 1e-9 && got >= (PI / 2.0).cos() * best);
    }

    #[test]
    fn quantized_gain_grows_with_resolution_on_average() {
        let mut sums = [0.0; 3];
        for seed in 0..1000u64 {
            let cfg = SimConfig { num_ues: 1, num_uavs: 1, num_ris: 1, elements: 32, ..SimConfig::default() };
            let topo = generate_topology(&cfg, seed).unwrap();
            let ch = realize_channels(&topo, &cfg, seed).unwrap();
            let plan = optimal_phases(&ch, &[ServedCluster { ris: 0, uav: 0, members: vec![0] }]);
            for (slot, bits) in [4u32, 2, 1].into_iter().enumerate() {
                let q = quantize_phases(&plan, bits).unwrap();
                sums[slot] += aligned_gain(&ch, &q.theta[0][0], 0, 0, 0);
            }
        }
        assert!(sums[0] >= sums[1] && sums[1] >= sums[2], "{sums:?}");
    }

    #[test]
    fn configuration_splits_elements_contiguously() {
        let thetas = vec![vec![1.0; 6], vec![2.0; 6]];
        assert_eq!(ris_configuration(&thetas, &[4, 2]), vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
        assert_eq!(ris_configuration(&thetas, &[1, 2]), vec![1.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
    }
}
