//! Command-line front end: config and manifest files, presets, CSV output.
//!
//! Config files are flat `key = value` text with optional sections:
//!
//! ```text
//! # comment
//! K = 200
//! U_r = 3
//! [sweep]
//! K = 100:100:1000
//! [scenario]
//! ue = 10, 20, 0
//! uav = 50, 50, 200
//! ris = 0, 0, 120
//! blocked = 0:0
//! ```
//!
//! A run manifest is a config file with an extra `[run]` section, so
//! `rerun` parses it with the same reader.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{
    monte_carlo, rate_study, resilience, run_exhaustive, run_proposed, run_traditional, ExperimentSweep, RateSeries,
    RunSpec, Scheme, SchemeStats, Snapshot, SweepSpec,
};
use crate::topology::{generate_topology, Position, SimConfig, Topology};
use crate::{Error, Result};

/// Deployment side used by the connectivity presets. Sparse enough that some
/// direct links fail, dense enough that most UAVs reach a RIS.
pub const PRESET_AREA_SIDE: f64 = 200.0;

pub const PRESET_TRIALS: usize = 100;

pub const PRESETS: [&str; 9] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "table2"];

/// What a manifest runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Compare,
    Resilience,
    Rates,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Resilience => "resilience",
            Command::Rates => "rates",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Command::Simulate, Command::Compare, Command::Resilience, Command::Rates]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// Contents of a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: SimConfig,
    pub sweep: Option<SweepSpec>,
    pub scenario: Option<Topology>,
    /// `[run]` entries with their line numbers.
    pub run: Vec<(usize, String, String)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Config,
    Run,
    Sweep,
    Scenario,
}

/// Expands `start:step:end` (inclusive) or a comma list into sweep values.
pub fn expand_values(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("not a number: {:?}", s.trim()));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
                return Err(format!("bad range {spec:?}: need step > 0 and end >= start"));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize + 1;
            if n > 100_000 {
                return Err(format!("range {spec:?} has too many points"));
            }
            (0..n).map(|i| start + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected start:step:end or a comma list, got {spec:?}")),
    };
    if values.is_empty() {
        return Err("empty sweep".into());
    }
    Ok(values)
}

fn parse_position(line: usize, value: &str) -> Result<Position> {
    let coords: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line, msg: format!("expected x, y, z, got {value:?}") })?;
    match coords.as_slice() {
        [x, y, z] => Ok(Position::new(*x, *y, *z)),
        _ => Err(Error::Parse { line, msg: format!("expected three coordinates, got {}", coords.len()) }),
    }
}

/// Parses config text. Unspecified keys keep their defaults.
pub fn parse_config_str(text: &str) -> Result<ParsedConfig> {
    let mut config = SimConfig::default();
    let mut section = Section::Config;
    let mut sweep: Option<(usize, SweepSpec)> = None;
    let mut scenario = Topology::default();
    let mut has_scenario = false;
    let mut run = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "config" => Section::Config,
                "run" => Section::Run,
                "sweep" => Section::Sweep,
                "scenario" => {
                    has_scenario = true;
                    Section::Scenario
                }
                other => return Err(Error::Parse { line, msg: format!("unknown section [{other}]") }),
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Parse { line, msg: format!("expected key = value, got {content:?}") })?;
        if key.is_empty() {
            return Err(Error::Parse { line, msg: "missing key".into() });
        }
        match section {
            Section::Config => config.set(key, value)?,
            Section::Run => run.push((line, key.to_string(), value.to_string())),
            Section::Sweep => {
                if sweep.is_some() {
                    return Err(Error::Parse { line, msg: "only one swept parameter is supported".into() });
                }
                let values = expand_values(value).map_err(|msg| Error::Parse { line, msg })?;
                sweep = Some((line, SweepSpec { param: key.to_string(), values }));
            }
            Section::Scenario => match key {
                "ue" => scenario.ue_positions.push(parse_position(line, value)?),
                "uav" => scenario.uav_positions.push(parse_position(line, value)?),
                "ris" => scenario.ris_positions.push(parse_position(line, value)?),
                "blocked" => {
                    let pair = value.split_once(':').and_then(|(u, a)| Some((u.trim().parse().ok()?, a.trim().parse().ok()?)));
                    let pair = pair.ok_or_else(|| Error::Parse { line, msg: format!("expected ue:uav, got {value:?}") })?;
                    scenario.blocked.push(pair);
                }
                other => return Err(Error::Parse { line, msg: format!("unknown scenario key {other:?}") }),
            },
        }
    }
    let scenario = if has_scenario {
        scenario.validate()?;
        config.num_ues = scenario.num_ues();
        config.num_uavs = scenario.num_uavs();
        config.num_ris = scenario.num_ris();
        Some(scenario)
    } else {
        None
    };
    config.validate()?;
    if let Some((_, spec)) = &sweep {
        for &v in &spec.values {
            spec.apply(&config, v)?;
        }
    }
    Ok(ParsedConfig { config, sweep: sweep.map(|(_, s)| s), scenario, run })
}

pub fn parse_config(path: &Path) -> Result<ParsedConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub preset: Option<String>,
    pub config: SimConfig,
    pub sweep: SweepSpec,
    pub schemes: Vec<Scheme>,
    pub scenario: Option<Topology>,
    pub timing: bool,
    /// Rate series and cluster sizes of a `rates` run.
    pub series: Vec<RateSeries>,
    pub cluster_sizes: Vec<usize>,
    pub out: PathBuf,
    pub build: String,
}

pub fn build_tag() -> String {
    format!("ris-noma {}", env!("CARGO_PKG_VERSION"))
}

fn parse_series(s: &str) -> Option<RateSeries> {
    match s {
        "noma-approx" => Some(RateSeries::Approximate),
        "noma-exact" => Some(RateSeries::Exact),
        "oma" => Some(RateSeries::Oma),
        _ => s.strip_prefix("noma-exact-b")?.parse().ok().filter(|&b| b > 0).map(RateSeries::ExactQuantized),
    }
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl RunManifest {
    pub fn new(command: Command, config: SimConfig) -> Self {
        let schemes = match command {
            Command::Compare => vec![Scheme::Proposed, Scheme::Exhaustive, Scheme::SingleRis, Scheme::Traditional],
            _ => vec![Scheme::Proposed, Scheme::Traditional],
        };
        Self {
            command,
            preset: None,
            config,
            sweep: SweepSpec::none(),
            schemes,
            scenario: None,
            timing: command == Command::Compare,
            series: vec![RateSeries::Approximate, RateSeries::Exact],
            cluster_sizes: Vec::new(),
            out: PathBuf::from("out"),
            build: build_tag(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("[run]\n");
        let _ = writeln!(s, "command = {}", self.command.as_str());
        if let Some(p) = &self.preset {
            let _ = writeln!(s, "preset = {p}");
        }
        let _ = writeln!(s, "schemes = {}", join(&self.schemes, |x| x.as_str().to_string()));
        let _ = writeln!(s, "timing = {}", self.timing);
        let _ = writeln!(s, "series = {}", join(&self.series, |x| x.label()));
        if !self.cluster_sizes.is_empty() {
            let _ = writeln!(s, "cluster_sizes = {}", join(&self.cluster_sizes, |x| x.to_string()));
        }
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "build = {}", self.build);
        s.push_str("[config]\n");
        for (k, v) in self.config.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        if self.sweep.param != "none" {
            s.push_str("[sweep]\n");
            let _ = writeln!(s, "{} = {}", self.sweep.param, join(&self.sweep.values, |v| v.to_string()));
        }
        if let Some(t) = &self.scenario {
            s.push_str("[scenario]\n");
            let pos = |p: &Position| format!("{}, {}, {}", p.x, p.y, p.z);
            for p in &t.ue_positions {
                let _ = writeln!(s, "ue = {}", pos(p));
            }
            for p in &t.uav_positions {
                let _ = writeln!(s, "uav = {}", pos(p));
            }
            for p in &t.ris_positions {
                let _ = writeln!(s, "ris = {}", pos(p));
            }
            for (u, a) in &t.blocked {
                let _ = writeln!(s, "blocked = {u}:{a}");
            }
        }
        s
    }

    /// Reads a manifest, or a plain config file with a `[run]` section.
    pub fn from_parsed(parsed: ParsedConfig) -> Result<Self> {
        let mut m = RunManifest::new(Command::Simulate, parsed.config);
        m.sweep = parsed.sweep.unwrap_or_else(SweepSpec::none);
        m.scenario = parsed.scenario;
        let mut command_set = false;
        for (line, key, value) in &parsed.run {
            let bad = |msg: String| Error::Parse { line: *line, msg };
            match key.as_str() {
                "command" => {
                    let c = Command::parse(value).ok_or_else(|| bad(format!("unknown command {value:?}")))?;
                    let defaults = RunManifest::new(c, m.config.clone());
                    if !command_set {
                        m.schemes = defaults.schemes;
                        m.timing = defaults.timing;
                    }
                    m.command = c;
                    command_set = true;
                }
                "preset" => m.preset = Some(value.clone()),
                "schemes" => m.schemes = parse_schemes(value)?,
                "timing" => m.timing = value.parse().map_err(|_| bad(format!("timing must be true or false, got {value:?}")))?,
                "series" => {
                    m.series = value
                        .split(',')
                        .map(|s| parse_series(s.trim()).ok_or_else(|| bad(format!("unknown rate series {s:?}"))))
                        .collect::<Result<_>>()?
                }
                "cluster_sizes" => {
                    m.cluster_sizes = value
                        .split(',')
                        .map(|s| s.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| bad(format!("bad cluster size {s:?}"))))
                        .collect::<Result<_>>()?
                }
                "out" => m.out = PathBuf::from(value),
                "build" => m.build = value.clone(),
                other => return Err(bad(format!("unknown run key {other:?}"))),
            }
        }
        Ok(m)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_parsed(parse_config_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_parsed(parse_config(path)?)
    }
}

pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    let schemes: Vec<Scheme> = list.split(',').map(str::parse).collect::<Result<_>>()?;
    if schemes.is_empty() {
        return Err(Error::Usage("empty scheme list".into()));
    }
    Ok(schemes)
}

/// Preset reproducing one figure or table at desk scale.
pub fn preset(name: &str) -> Result<RunManifest> {
    let base = SimConfig { area_side: PRESET_AREA_SIDE, trials: PRESET_TRIALS, ..SimConfig::default() };
    let connectivity = |num_ues, num_uavs, cluster_size, elements| SimConfig {
        num_ues,
        num_uavs,
        num_ris: 3,
        cluster_size,
        elements,
        ..base.clone()
    };
    let sweep = |param: &str, values: Vec<f64>| SweepSpec { param: param.into(), values };
    let study = [Scheme::Proposed, Scheme::SingleRis, Scheme::Traditional].to_vec();
    let mut m = match name {
        "fig3" | "fig4" => {
            let scenario = Topology::rate_study_scenario();
            let config = SimConfig {
                num_ues: scenario.num_ues(),
                num_uavs: scenario.num_uavs(),
                num_ris: scenario.num_ris(),
                cluster_size: 2,
                r_ur: 1e9,
                r_ra: 1e9,
                ..base.clone()
            };
            let mut m = RunManifest::new(Command::Rates, config);
            m.scenario = Some(scenario);
            m.sweep = sweep("K", vec![16.0, 32.0, 64.0, 128.0, 256.0, 512.0]);
            if name == "fig3" {
                m.series = vec![RateSeries::Approximate, RateSeries::Exact, RateSeries::ExactQuantized(3)];
                m.cluster_sizes = vec![2];
            } else {
                m.series = vec![RateSeries::Approximate, RateSeries::Oma];
                m.cluster_sizes = vec![1, 2];
            }
            m
        }
        "fig5" => {
            let mut m = RunManifest::new(Command::Simulate, connectivity(15, 8, 3, 200));
            m.sweep = sweep("U_r", vec![1.0, 2.0, 3.0, 4.0]);
            m.schemes = study;
            m
        }
        "fig6" => {
            let mut m = RunManifest::new(Command::Simulate, connectivity(15, 8, 3, 200));
            m.sweep = sweep("A", (6..=14).map(f64::from).collect());
            m.schemes = study;
            m
        }
        "fig7" => {
            let mut m = RunManifest::new(Command::Simulate, connectivity(15, 8, 3, 200));
            m.sweep = sweep("U", (10..=20).map(f64::from).collect());
            m.schemes = study;
            m
        }
        "fig8" => {
            let mut m = RunManifest::new(Command::Simulate, connectivity(20, 8, 3, 200));
            m.sweep = sweep("K", (1..=10).map(|k| f64::from(k) * 100.0).collect());
            m.schemes = study;
            m
        }
        "fig9" => {
            let mut m = RunManifest::new(Command::Simulate, connectivity(15, 8, 2, 200));
            m.sweep = sweep("sigma2_e", vec![0.0, 1e-2, 1e-1, 1.0, 10.0]);
            m.schemes = vec![Scheme::Proposed, Scheme::Traditional];
            m
        }
        "fig10" => {
            let config = SimConfig { gamma_th_ue_db: 84.0, gamma_th_uav_db: 90.0, ..connectivity(10, 20, 4, 1000) };
            let mut m = RunManifest::new(Command::Resilience, config);
            m.schemes = vec![Scheme::Proposed, Scheme::Traditional];
            m
        }
        "table2" => {
            let mut m = RunManifest::new(Command::Compare, connectivity(15, 10, 3, 200));
            m.sweep = sweep("U", vec![15.0, 25.0, 35.0, 45.0]);
            m.schemes = study;
            m
        }
        other => {
            return Err(Error::Usage(format!("unknown preset {other:?} (expected one of {})", PRESETS.join(", "))));
        }
    };
    m.preset = Some(name.to_string());
    m.out = PathBuf::from("out").join(name);
    Ok(m)
}

/// One CSV row: a scheme's aggregate at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub stats: SchemeStats,
}

pub const CSV_HEADER: &str =
    "sweep_param,sweep_value,scheme,mean_lambda2,se_lambda2,mean_rate_bps,se_rate_bps,trials,mean_wall_s";

/// Decimal with 6 significant digits, exponent form for very large or small
/// magnitudes; NaN is written as an empty field.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..6).contains(&exp) {
        trim(format!("{:.*}", (5 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

pub fn sweep_rows(sweep: &ExperimentSweep) -> Vec<CsvRow> {
    sweep
        .points
        .iter()
        .flat_map(|p| {
            p.stats.iter().map(|s| CsvRow { sweep_param: sweep.param.clone(), sweep_value: p.value, stats: s.clone() })
        })
        .collect()
}

pub fn render_csv(rows: &[CsvRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::domain("no results to write"));
    }
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let st = &r.stats;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.sweep_param,
            format_sig6(r.sweep_value),
            st.scheme,
            format_sig6(st.mean_lambda2),
            format_sig6(st.se_lambda2),
            format_sig6(st.mean_rate_bps),
            format_sig6(st.se_rate_bps),
            st.trials,
            st.mean_wall_s.map(format_sig6).unwrap_or_default()
        );
    }
    Ok(s)
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let text = render_csv(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads CSV text produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: "missing CSV header".into() }),
    }
    let num = |line: usize, s: &str| -> Result<f64> {
        if s.is_empty() {
            return Ok(f64::NAN);
        }
        s.parse().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") })
    };
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Parse { line, msg: format!("expected 9 fields, got {}", f.len()) });
            }
            Ok(CsvRow {
                sweep_param: f[0].to_string(),
                sweep_value: num(line, f[1])?,
                stats: SchemeStats {
                    scheme: f[2].to_string(),
                    mean_lambda2: num(line, f[3])?,
                    se_lambda2: num(line, f[4])?,
                    mean_rate_bps: num(line, f[5])?,
                    se_rate_bps: num(line, f[6])?,
                    trials: f[7].parse().map_err(|_| Error::Parse { line, msg: format!("bad trial count {:?}", f[7]) })?,
                    mean_wall_s: if f[8].is_empty() { None } else { Some(num(line, f[8])?) },
                },
            })
        })
        .collect()
}

/// Runs a manifest and returns the output files as (name, contents).
pub fn execute(m: &RunManifest) -> Result<Vec<(String, String)>> {
    match m.command {
        Command::Simulate | Command::Compare => {
            let spec = RunSpec {
                sweep: m.sweep.clone(),
                schemes: m.schemes.clone(),
                scenario: m.scenario.clone(),
                timing: m.timing,
            };
            let sweep = monte_carlo(&m.config, &spec)?;
            Ok(vec![("results.csv".into(), render_csv(&sweep_rows(&sweep))?)])
        }
        Command::Resilience => {
            if m.sweep.param != "none" {
                return Err(Error::config("sweep", "the resilience study sweeps the failure count itself"));
            }
            let curves = resilience(&m.config, &m.schemes, m.scenario.as_ref())?;
            let mut rows = Vec::new();
            let mut summary = String::from("scheme,mean_failures_to_zero,se_failures_to_zero,trials\n");
            for c in &curves {
                for k in 0..=m.config.num_uavs {
                    let (mean, se) = c.mean_at(k);
                    rows.push(CsvRow {
                        sweep_param: "failed_uavs".into(),
                        sweep_value: k as f64,
                        stats: SchemeStats {
                            scheme: c.scheme.as_str().into(),
                            mean_lambda2: mean,
                            se_lambda2: se,
                            mean_rate_bps: f64::NAN,
                            se_rate_bps: f64::NAN,
                            trials: c.curves.len(),
                            mean_wall_s: None,
                        },
                    });
                }
                let (mean, se) = c.mean_failures_to_zero();
                let _ = writeln!(summary, "{},{},{},{}", c.scheme, format_sig6(mean), format_sig6(se), c.curves.len());
            }
            Ok(vec![("results.csv".into(), render_csv(&rows)?), ("resilience_summary.csv".into(), summary)])
        }
        Command::Rates => {
            let scenario = m.scenario.clone().unwrap_or_else(Topology::rate_study_scenario);
            let base = SimConfig {
                num_ues: scenario.num_ues(),
                num_uavs: scenario.num_uavs(),
                num_ris: scenario.num_ris(),
                ..m.config.clone()
            };
            let sizes = if m.cluster_sizes.is_empty() { vec![base.cluster_size] } else { m.cluster_sizes.clone() };
            let mut rows = Vec::new();
            for &value in &m.sweep.values {
                let cfg = m.sweep.apply(&base, value)?;
                for &size in &sizes {
                    let cfg = SimConfig { cluster_size: size, ..cfg.clone() };
                    let stats = rate_study(&cfg, &scenario, &m.series)?;
                    for (series, (mean, se)) in m.series.iter().zip(stats) {
                        let label = if sizes.len() > 1 { format!("{}-ur{size}", series.label()) } else { series.label() };
                        rows.push(CsvRow {
                            sweep_param: m.sweep.param.clone(),
                            sweep_value: value,
                            stats: SchemeStats {
                                scheme: label,
                                mean_lambda2: f64::NAN,
                                se_lambda2: f64::NAN,
                                mean_rate_bps: mean,
                                se_rate_bps: se,
                                trials: cfg.trials,
                                mean_wall_s: None,
                            },
                        });
                    }
                }
            }
            Ok(vec![("results.csv".into(), render_csv(&rows)?)])
        }
    }
}

/// Runs a manifest and writes its outputs plus `manifest.txt` under `m.out`.
pub fn run_manifest(m: &RunManifest) -> Result<Vec<PathBuf>> {
    let files = execute(m)?;
    fs::create_dir_all(&m.out).map_err(|e| Error::io(&m.out, e))?;
    let mut written = Vec::new();
    for (name, contents) in files.iter().chain(std::iter::once(&("manifest.txt".to_string(), m.to_text()))) {
        let path = m.out.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Named pass/fail checks run by the `validate` subcommand.
pub fn validation_suite() -> Vec<(String, bool)> {
    use crate::assign::lsa_solve;
    use crate::partition::{optimal_partition, PartitionInput};
    use crate::sinr::{approx_sinr, InterferenceModel};
    use crate::specgraph::{Edge, EdgeKind, WeightedGraph};
    use crate::util::stream_rng;
    use rand::Rng;

    let mut out = Vec::new();
    let graph = |n: usize, edges: &[(usize, usize)]| {
        let e: Vec<Edge> = edges.iter().map(|&(a, b)| Edge { a, b, weight: 1.0, kind: EdgeKind::UavUav }).collect();
        WeightedGraph::from_edges(n, &e).and_then(|g| g.fiedler())
    };
    let complete = |n: usize| (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect::<Vec<_>>();
    let analytic = [
        (graph(3, &[(0, 1), (1, 2)]), 1.0),
        (graph(4, &complete(4)), 4.0),
        (graph(5, &complete(5)), 5.0),
        (graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]), 1.0),
        (graph(4, &[(0, 1), (2, 3)]), 0.0),
    ];
    out.push((
        "fiedler value of path, complete, star and split graphs".into(),
        analytic.iter().all(|(l, want)| l.as_ref().is_ok_and(|l| (l - want).abs() < 1e-8)),
    ));

    let mut rng = stream_rng(7, 0);
    let mut lsa_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let o: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0..20) as f64).collect()).collect();
        let value = |cols: &[Option<usize>]| cols.iter().enumerate().filter_map(|(i, c)| c.map(|j| o[i][j])).sum::<f64>();
        let got = lsa_solve(&o).map(|c| value(&c)).unwrap_or(f64::NAN);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::NEG_INFINITY;
        permute(&mut perm, 0, &mut |p| best = best.max(p.iter().enumerate().map(|(i, &j)| o[i][j]).sum()));
        lsa_ok &= got == best;
    }
    out.push(("assignment matches brute force".into(), lsa_ok));

    let mut equality = true;
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let gt: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 0.0 } else { rng.random_range(0.0..5.0) }).collect();
        let gh: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let input = PartitionInput::new(gt, gh, 200, 0.9, rng.random_range(1.0..50.0));
        let Ok(p) = optimal_partition(&input) else {
            equality = false;
            continue;
        };
        let alpha: Vec<f64> = p.order.iter().map(|&u| p.alpha[u]).collect();
        let inputs = input.sinr_inputs(&p.order, &alpha);
        for pos in 1..p.order.len() {
            if alpha[pos] > 0.0 {
                let s = approx_sinr(&inputs, pos, InterferenceModel::Sic);
                equality &= (s - input.threshold).abs() <= 1e-9 * input.threshold;
            }
        }
    }
    out.push(("partition meets the QoS constraint with equality".into(), equality));

    let cfg = SimConfig {
        num_ues: 6,
        num_uavs: 4,
        num_ris: 2,
        cluster_size: 2,
        elements: 64,
        area_side: 150.0,
        trials: 2,
        ..SimConfig::default()
    };
    let mut monotone = true;
    let mut bounded = true;
    for seed in 0..10 {
        let run = || -> Result<(f64, f64, f64)> {
            let snap = Snapshot::new(generate_topology(&cfg, seed)?, &cfg, seed)?;
            let p = run_proposed(&snap, &cfg)?;
            let e = if seed < 3 { run_exhaustive(&snap, &cfg)?.lambda2_mod } else { f64::INFINITY };
            Ok((run_traditional(&snap).lambda2_mod, p.lambda2_mod, e))
        };
        match run() {
            Ok((t, p, e)) => {
                monotone &= p >= t - 1e-9;
                bounded &= e >= p - 1e-9;
            }
            Err(_) => {
                monotone = false;
            }
        }
    }
    out.push(("RIS links never lower connectivity".into(), monotone));
    out.push(("exhaustive search bounds the proposed scheme".into(), bounded));

    let spec = RunSpec { sweep: SweepSpec::none(), schemes: vec![Scheme::Proposed], scenario: None, timing: false };
    let a = monte_carlo(&cfg, &spec).and_then(|s| render_csv(&sweep_rows(&s)));
    let b = monte_carlo(&cfg, &spec).and_then(|s| render_csv(&sweep_rows(&s)));
    out.push(("fixed seed reproduces identical output".into(), matches!((&a, &b), (Ok(x), Ok(y)) if x == y)));
    out
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

#[derive(Parser, Debug)]
#[command(name = "ris-noma", version, about = "Connectivity of RIS-assisted NOMA UAV networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct RunFlags {
    /// Config file (key = value with optional [sweep] and [scenario] sections).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated schemes: proposed, traditional, single-ris, exhaustive.
    #[arg(long)]
    schemes: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Monte Carlo sweep of the selected schemes.
    Simulate(RunFlags),
    /// All schemes with wall-time measurement.
    Compare(RunFlags),
    /// Connectivity under random UAV failures.
    Resilience(RunFlags),
    /// Built-in invariant and oracle checks.
    Validate {
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Reproduce a figure or table: fig3..fig10, table2.
    Preset {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Re-run a written manifest.
    Rerun {
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn apply_flags(m: &mut RunManifest, flags: &RunFlags) -> Result<()> {
    if let Some(seed) = flags.seed {
        m.config.seed = seed;
    }
    if let Some(trials) = flags.trials {
        m.config.trials = trials;
        m.config.validate()?;
    }
    if let Some(list) = &flags.schemes {
        m.schemes = parse_schemes(list)?;
    }
    if let Some(out) = &flags.out {
        m.out = out.clone();
    }
    set_threads(flags.threads)
}

fn from_config(command: Command, flags: &RunFlags) -> Result<RunManifest> {
    let mut m = match &flags.config {
        Some(path) => {
            let parsed = parse_config(path)?;
            let mut m = RunManifest::from_parsed(parsed)?;
            let defaults = RunManifest::new(command, m.config.clone());
            if m.command != command {
                m.schemes = defaults.schemes;
                m.timing = defaults.timing;
            }
            m.command = command;
            m
        }
        None => RunManifest::new(command, SimConfig::default()),
    };
    if command == Command::Compare {
        m.timing = true;
    }
    apply_flags(&mut m, flags)?;
    Ok(m)
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    let manifest = match cmd {
        Cmd::Simulate(f) => from_config(Command::Simulate, &f)?,
        Cmd::Compare(f) => from_config(Command::Compare, &f)?,
        Cmd::Resilience(f) => from_config(Command::Resilience, &f)?,
        Cmd::Validate { threads } => {
            set_threads(threads)?;
            let results = validation_suite();
            for (name, ok) in &results {
                println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            return Ok(if results.iter().all(|(_, ok)| *ok) { 0 } else { 2 });
        }
        Cmd::Preset { name, flags } => {
            if flags.config.is_some() {
                return Err(Error::Usage("presets do not take --config".into()));
            }
            let mut m = preset(&name)?;
            apply_flags(&mut m, &flags)?;
            m
        }
        Cmd::Rerun { manifest, flags } => {
            if flags.config.is_some() {
                return Err(Error::Usage("rerun does not take --config".into()));
            }
            let mut m = RunManifest::read(&manifest)?;
            apply_flags(&mut m, &flags)?;
            m
        }
    };
    for path in run_manifest(&manifest)? {
        println!("wrote {}", path.display());
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
