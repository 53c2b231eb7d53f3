//! Node deployments and simulation parameters.

use rand::Rng;

use crate::util::stream_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= 0.0
    }
}

/// Euclidean 3-D distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Unit used for graph edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightUnit {
    Db,
    Linear,
}

/// Whether the QoS threshold scales with the raw or max-normalized UAV reliability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReliabilityMode {
    Normalized,
    Raw,
}

/// Large-scale model for the UE→RIS and RIS→UAV hops (and the direct link).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LargeScaleModel {
    /// Amplitude gain √(β0 / d²); the direct link uses β0 / d².
    Beta0,
    /// Amplitude gain d^(−τ/2); the direct link uses d^(−τ).
    PowerLaw,
}

/// Placement of the noise "+1" in the closed-form partition recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlusOne {
    /// One "+1" for the whole interference sum (matches the SINR definition).
    Single,
    /// One "+1" per interfering UE, as the closed form is printed (at least one).
    Distributed,
}

/// Every tunable of a simulation run. Powers in dBm unless the name says watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_ues: usize,
    pub num_uavs: usize,
    pub num_ris: usize,
    /// UE transmit power p (dBm).
    pub ue_power_dbm: f64,
    /// UAV transmit power P (W).
    pub uav_power_w: f64,
    pub beta0: f64,
    pub carrier_hz: f64,
    pub light_speed: f64,
    pub bandwidth_hz: f64,
    /// Receiver noise σ²_ζ used by the SINR expressions (dBm).
    pub sigma2_zeta_dbm: f64,
    /// Noise N0 used by the link SNRs of the original graph (dBm).
    pub n0_dbm: f64,
    pub gamma_th_ue_db: f64,
    pub gamma_th_uav_db: f64,
    pub gamma_th_ris_db: f64,
    /// UE→RIS distance threshold (m).
    pub r_ur: f64,
    /// RIS→UAV distance threshold (m).
    pub r_ra: f64,
    pub tau: f64,
    pub f1: f64,
    pub f2: f64,
    pub f_u: f64,
    pub spread: f64,
    /// Elements per RIS (K).
    pub elements: usize,
    /// NOMA cluster size per RIS (U_r).
    pub cluster_size: usize,
    /// Phase resolution in bits; 0 means continuous phases.
    pub phase_bits: u32,
    pub delta: f64,
    pub max_iters: usize,
    pub sigma2_e_ua: f64,
    pub sigma2_e_ura: f64,
    pub area_side: f64,
    pub uav_altitude: f64,
    pub ris_altitude: f64,
    pub seed: u64,
    pub trials: usize,
    pub weight_unit: WeightUnit,
    pub reliability_mode: ReliabilityMode,
    pub large_scale: LargeScaleModel,
    pub plus_one: PlusOne,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_ues: 15,
            num_uavs: 8,
            num_ris: 3,
            ue_power_dbm: 23.0,
            uav_power_w: 1.0,
            beta0: 1e-2,
            carrier_hz: 3e9,
            light_speed: 3e8,
            bandwidth_hz: 250e3,
            sigma2_zeta_dbm: -130.0,
            n0_dbm: -130.0,
            gamma_th_ue_db: 84.0,
            gamma_th_uav_db: 82.0,
            gamma_th_ris_db: 30.0,
            r_ur: 150.0,
            r_ra: 100.0,
            tau: 2.0,
            f1: 5.0,
            f2: 5.0,
            f_u: 1.0,
            spread: 1.0,
            elements: 200,
            cluster_size: 3,
            phase_bits: 0,
            delta: 1e-3,
            max_iters: 20,
            sigma2_e_ua: 0.0,
            sigma2_e_ura: 0.0,
            area_side: 500.0,
            uav_altitude: 200.0,
            ris_altitude: 120.0,
            seed: 1,
            trials: 100,
            weight_unit: WeightUnit::Db,
            reliability_mode: ReliabilityMode::Normalized,
            large_scale: LargeScaleModel::Beta0,
            plus_one: PlusOne::Single,
        }
    }
}

impl SimConfig {
    /// Checks every invariant; the error names the offending key as written in config files.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be a positive finite number, got {v}")))
            }
        }
        fn finite(key: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, "must be finite"))
            }
        }
        fn non_negative(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be >= 0, got {v}")))
            }
        }
        fn shape(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.5 {
                Ok(())
            } else {
                Err(Error::config(key, format!("Nakagami shape must be >= 0.5, got {v}")))
            }
        }

        for (key, n) in [("U", self.num_ues), ("A", self.num_uavs), ("R", self.num_ris)] {
            if n == 0 {
                return Err(Error::config(key, "node count must be at least 1"));
            }
        }
        if self.elements == 0 {
            return Err(Error::config("K", "RIS needs at least one element"));
        }
        if self.cluster_size == 0 || self.cluster_size > self.elements {
            return Err(Error::config("U_r", format!("must satisfy 1 <= U_r <= K (K = {})", self.elements)));
        }
        if self.phase_bits > 8 {
            return Err(Error::config("b", "phase resolution must be within 0..=8 bits"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "need at least one trial"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters", "need at least one iteration"));
        }
        finite("p", self.ue_power_dbm)?;
        positive("P", self.uav_power_w)?;
        positive("beta0", self.beta0)?;
        positive("f_c", self.carrier_hz)?;
        positive("c", self.light_speed)?;
        positive("B", self.bandwidth_hz)?;
        finite("sigma2_zeta", self.sigma2_zeta_dbm)?;
        finite("N0", self.n0_dbm)?;
        finite("gamma_th_ue", self.gamma_th_ue_db)?;
        finite("gamma_th_uav", self.gamma_th_uav_db)?;
        finite("gamma_th_ris", self.gamma_th_ris_db)?;
        positive("R_ur", self.r_ur)?;
        positive("R_ra", self.r_ra)?;
        positive("tau", self.tau)?;
        shape("f1", self.f1)?;
        shape("f2", self.f2)?;
        shape("f_u", self.f_u)?;
        positive("spread", self.spread)?;
        positive("delta", self.delta)?;
        non_negative("sigma2_e_ua", self.sigma2_e_ua)?;
        non_negative("sigma2_e_ura", self.sigma2_e_ura)?;
        positive("area_side", self.area_side)?;
        non_negative("uav_altitude", self.uav_altitude)?;
        non_negative("ris_altitude", self.ris_altitude)?;
        Ok(())
    }

    /// Sets one parameter from its config-file key and textual value.
    ///
    /// `sigma2_e` sets both CSI error variances. The result is not validated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::config(key, format!("cannot parse {value:?}")))
        }
        fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
            options
                .iter()
                .find(|(name, _)| name.eq_ignore_ascii_case(value.trim()))
                .map(|&(_, v)| v)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    Error::config(key, format!("expected one of {}, got {value:?}", names.join(", ")))
                })
        }
        match key {
            "U" => self.num_ues = num(key, value)?,
            "A" => self.num_uavs = num(key, value)?,
            "R" => self.num_ris = num(key, value)?,
            "p" => self.ue_power_dbm = num(key, value)?,
            "P" => self.uav_power_w = num(key, value)?,
            "beta0" => self.beta0 = num(key, value)?,
            "f_c" => self.carrier_hz = num(key, value)?,
            "c" => self.light_speed = num(key, value)?,
            "B" => self.bandwidth_hz = num(key, value)?,
            "sigma2_zeta" => self.sigma2_zeta_dbm = num(key, value)?,
            "N0" => self.n0_dbm = num(key, value)?,
            "gamma_th_ue" => self.gamma_th_ue_db = num(key, value)?,
            "gamma_th_uav" => self.gamma_th_uav_db = num(key, value)?,
            "gamma_th_ris" => self.gamma_th_ris_db = num(key, value)?,
            "R_ur" => self.r_ur = num(key, value)?,
            "R_ra" => self.r_ra = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "f1" => self.f1 = num(key, value)?,
            "f2" => self.f2 = num(key, value)?,
            "f_u" => self.f_u = num(key, value)?,
            "spread" => self.spread = num(key, value)?,
            "K" => self.elements = num(key, value)?,
            "U_r" => self.cluster_size = num(key, value)?,
            "b" => self.phase_bits = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "max_iters" => self.max_iters = num(key, value)?,
            "sigma2_e_ua" => self.sigma2_e_ua = num(key, value)?,
            "sigma2_e_ura" => self.sigma2_e_ura = num(key, value)?,
            "sigma2_e" => {
                self.sigma2_e_ua = num(key, value)?;
                self.sigma2_e_ura = self.sigma2_e_ua;
            }
            "area_side" => self.area_side = num(key, value)?,
            "uav_altitude" => self.uav_altitude = num(key, value)?,
            "ris_altitude" => self.ris_altitude = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "weight_unit" => {
                self.weight_unit = choice(key, value, &[("db", WeightUnit::Db), ("linear", WeightUnit::Linear)])?
            }
            "reliability" => {
                self.reliability_mode =
                    choice(key, value, &[("normalized", ReliabilityMode::Normalized), ("raw", ReliabilityMode::Raw)])?
            }
            "large_scale" => {
                self.large_scale =
                    choice(key, value, &[("beta0", LargeScaleModel::Beta0), ("power_law", LargeScaleModel::PowerLaw)])?
            }
            "plus_one" => {
                self.plus_one = choice(key, value, &[("single", PlusOne::Single), ("distributed", PlusOne::Distributed)])?
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every parameter as (key, value) in a fixed order; feeding these back
    /// through [`SimConfig::set`] reproduces the configuration exactly.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let unit = match self.weight_unit {
            WeightUnit::Db => "db",
            WeightUnit::Linear => "linear",
        };
        let rel = match self.reliability_mode {
            ReliabilityMode::Normalized => "normalized",
            ReliabilityMode::Raw => "raw",
        };
        let ls = match self.large_scale {
            LargeScaleModel::Beta0 => "beta0",
            LargeScaleModel::PowerLaw => "power_law",
        };
        let plus = match self.plus_one {
            PlusOne::Single => "single",
            PlusOne::Distributed => "distributed",
        };
        vec![
            ("U", self.num_ues.to_string()),
            ("A", self.num_uavs.to_string()),
            ("R", self.num_ris.to_string()),
            ("p", self.ue_power_dbm.to_string()),
            ("P", self.uav_power_w.to_string()),
            ("beta0", self.beta0.to_string()),
            ("f_c", self.carrier_hz.to_string()),
            ("c", self.light_speed.to_string()),
            ("B", self.bandwidth_hz.to_string()),
            ("sigma2_zeta", self.sigma2_zeta_dbm.to_string()),
            ("N0", self.n0_dbm.to_string()),
            ("gamma_th_ue", self.gamma_th_ue_db.to_string()),
            ("gamma_th_uav", self.gamma_th_uav_db.to_string()),
            ("gamma_th_ris", self.gamma_th_ris_db.to_string()),
            ("R_ur", self.r_ur.to_string()),
            ("R_ra", self.r_ra.to_string()),
            ("tau", self.tau.to_string()),
            ("f1", self.f1.to_string()),
            ("f2", self.f2.to_string()),
            ("f_u", self.f_u.to_string()),
            ("spread", self.spread.to_string()),
            ("K", self.elements.to_string()),
            ("U_r", self.cluster_size.to_string()),
            ("b", self.phase_bits.to_string()),
            ("delta", self.delta.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("sigma2_e_ua", self.sigma2_e_ua.to_string()),
            ("sigma2_e_ura", self.sigma2_e_ura.to_string()),
            ("area_side", self.area_side.to_string()),
            ("uav_altitude", self.uav_altitude.to_string()),
            ("ris_altitude", self.ris_altitude.to_string()),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("weight_unit", unit.to_string()),
            ("reliability", rel.to_string()),
            ("large_scale", ls.to_string()),
            ("plus_one", plus.to_string()),
        ]
    }

    /// UE transmit power over receiver noise, p / σ², linear.
    pub fn snr_scale(&self) -> f64 {
        crate::util::dbm_to_watts(self.ue_power_dbm) / crate::util::dbm_to_watts(self.sigma2_zeta_dbm)
    }

    pub fn gamma_th_ris_linear(&self) -> f64 {
        crate::util::db_to_linear(self.gamma_th_ris_db)
    }
}

/// Positions of all nodes in one snapshot plus scripted direct-link blockages.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub ue_positions: Vec<Position>,
    pub uav_positions: Vec<Position>,
    pub ris_positions: Vec<Position>,
    /// Explicitly blocked (UE, UAV) direct links.
    pub blocked: Vec<(usize, usize)>,
}

const UE_STREAM: u64 = 10;
const UAV_STREAM: u64 = 11;
const RIS_STREAM: u64 = 12;

impl Topology {
    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.uav_positions.len()
    }

    pub fn num_ris(&self) -> usize {
        self.ris_positions.len()
    }

    pub fn is_blocked(&self, ue: usize, uav: usize) -> bool {
        self.blocked.iter().any(|&(u, a)| u == ue && a == uav)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, list) in [
            ("ue", &self.ue_positions),
            ("uav", &self.uav_positions),
            ("ris", &self.ris_positions),
        ] {
            if list.is_empty() {
                return Err(Error::config(key, "scenario needs at least one node of this kind"));
            }
            if let Some(p) = list.iter().find(|p| !p.is_valid()) {
                return Err(Error::config(key, format!("invalid position {p:?}")));
            }
        }
        for &(u, a) in &self.blocked {
            if u >= self.num_ues() || a >= self.num_uavs() {
                return Err(Error::config("blocked", format!("pair {u}:{a} out of range")));
            }
        }
        Ok(())
    }

    /// The fixed four-UE, two-UAV, two-RIS layout used for the rate studies.
    ///
    /// All direct UE-UAV links are scripted as blocked, so rates come from the
    /// RIS-aided paths only.
    pub fn rate_study_scenario() -> Self {
        let ue_positions = vec![
            Position::new(318.0, 200.0, 0.0),
            Position::new(100.0, 50.0, 0.0),
            Position::new(150.0, 170.0, 0.0),
            Position::new(200.0, 220.0, 0.0),
        ];
        let uav_positions = vec![Position::new(460.0, 340.0, 200.0), Position::new(370.0, 14.0, 200.0)];
        let ris_positions = vec![Position::new(0.0, 0.0, 120.0), Position::new(100.0, 100.0, 120.0)];
        let blocked = (0..4).flat_map(|u| (0..2).map(move |a| (u, a))).collect();
        Self {
            ue_positions,
            uav_positions,
            ris_positions,
            blocked,
        }
    }

    /// Keeps the first RIS only (the single-large-RIS baseline).
    pub fn with_first_ris_only(&self) -> Self {
        Self {
            ris_positions: self.ris_positions[..1].to_vec(),
            ..self.clone()
        }
    }
}

/// Uniform deployment on [0, area_side]²: UEs on the ground, UAVs and RISs at
/// their configured altitudes. Each node kind draws from its own stream, so
/// changing one count leaves the other kinds' positions untouched.
pub fn generate_topology(config: &SimConfig, seed: u64) -> Result<Topology> {
    config.validate()?;
    let side = config.area_side;
    let draw = |stream: u64, n: usize, z: f64| {
        let mut rng = stream_rng(seed, stream);
        (0..n)
            .map(|_| Position::new(rng.random::<f64>() * side, rng.random::<f64>() * side, z))
            .collect::<Vec<_>>()
    };
    Ok(Topology {
        ue_positions: draw(UE_STREAM, config.num_ues, 0.0),
        uav_positions: draw(UAV_STREAM, config.num_uavs, config.uav_altitude),
        ris_positions: draw(RIS_STREAM, config.num_ris, config.ris_altitude),
        blocked: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let o = Position::new(0.0, 0.0, 0.0);
        assert_eq!(distance(o, o), 0.0);
        assert_eq!(distance(o, Position::new(3.0, 4.0, 0.0)), 5.0);
        let d = distance(Position::new(0.0, 0.0, 120.0), Position::new(100.0, 100.0, 120.0));
        assert!((d - 20_000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic_and_bounded() {
        let cfg = SimConfig {
            area_side: 500.0,
            num_ues: 4,
            num_uavs: 2,
            num_ris: 2,
            ..SimConfig::default()
        };
        let a = generate_topology(&cfg, 7).unwrap();
        let b = generate_topology(&cfg, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_ues() + a.num_uavs() + a.num_ris(), 8);
        let bits = |t: &Topology| {
            t.ue_positions
                .iter()
                .chain(&t.uav_positions)
                .chain(&t.ris_positions)
                .flat_map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        for p in &a.ue_positions {
            assert!((0.0..=500.0).contains(&p.x) && (0.0..=500.0).contains(&p.y) && p.z == 0.0);
        }
        assert!(a.uav_positions.iter().all(|p| p.z == 200.0));
        assert!(a.ris_positions.iter().all(|p| p.z == 120.0));
        assert_ne!(a, generate_topology(&cfg, 8).unwrap());
    }

    #[test]
    fn changing_uav_count_keeps_ue_positions() {
        let cfg = SimConfig::default();
        let more = SimConfig { num_uavs: 12, ..cfg.clone() };
        let a = generate_topology(&cfg, 3).unwrap();
        let b = generate_topology(&more, 3).unwrap();
        assert_eq!(a.ue_positions, b.ue_positions);
        assert_eq!(a.uav_positions[..], b.uav_positions[..8]);
    }

    #[test]
    fn empty_ue_set_is_rejected() {
        let cfg = SimConfig { num_ues: 0, ..SimConfig::default() };
        match generate_topology(&cfg, 1) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "U"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rate_study_scenario_coordinates() {
        let t = Topology::rate_study_scenario();
        assert_eq!(t.ue_positions[0], Position::new(318.0, 200.0, 0.0));
        assert_eq!(t.uav_positions[0], Position::new(460.0, 340.0, 200.0));
        assert_eq!(t.ris_positions[0], Position::new(0.0, 0.0, 120.0));
        t.validate().unwrap();
    }

    #[test]
    fn validation_names_keys() {
        let bad = SimConfig { elements: 0, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "K"));
        let bad = SimConfig { f1: 0.3, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "f1"));
        let bad = SimConfig { cluster_size: 5, elements: 4, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "U_r"));
    }
}
