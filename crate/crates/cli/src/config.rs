//! Strict JSON run configuration.
//!
//! A document is one flat object: the common keys `subcommand`, `base_seed`,
//! `output`, `threads`, plus the keys of the chosen subcommand. Every problem
//! found is reported, not just the first.

use std::fmt;
use std::path::PathBuf;

use amrmc::basis::{BasisFamily, BasisSpec};
use amrmc::experiments::SweepGrid;
use amrmc::moments::{CriticalSetting, MseSetting, MultiperiodSetting};
use amrmc::paths::{ExerciseGrid, ProcessKind};
use amrmc::regression::{natural_process, PathMode, PayoffSpec, PricerConfig, MIN_PROBE_PATHS};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Price,
    Sweep,
    Moments,
    Bounds,
    Critical,
    Check,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Price => "price",
            Subcommand::Sweep => "sweep",
            Subcommand::Moments => "moments",
            Subcommand::Bounds => "bounds",
            Subcommand::Critical => "critical",
            Subcommand::Check => "check",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFormat {
    #[default]
    Csv,
    Json,
    Plot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckParams {
    pub process: ProcessKind,
    pub grid: ExerciseGrid,
    pub payoff: PayoffSpec,
    pub basis: BasisSpec,
    pub probe_paths: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentsParams {
    pub setting: MseSetting<f64>,
    #[serde(rename = "K_max")]
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundsParams {
    WorstCase {
        #[serde(rename = "K")]
        order: usize,
        #[serde(rename = "N")]
        n_paths: u64,
        rho: f64,
    },
    ExpectedMse {
        setting: MseSetting<f64>,
        #[serde(rename = "K")]
        order: usize,
        #[serde(rename = "N")]
        n_paths: u64,
    },
    ContinuationError {
        setting: MseSetting<f64>,
        #[serde(rename = "K")]
        order: usize,
        #[serde(rename = "N")]
        n_paths: u64,
    },
    Multiperiod {
        setting: MultiperiodSetting,
        times: Vec<f64>,
        n: usize,
        #[serde(rename = "K")]
        order: usize,
        #[serde(rename = "N")]
        n_paths: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalParams {
    pub setting: CriticalSetting<f64>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Price(PricerConfig),
    Sweep { grid: SweepGrid, format: SweepFormat },
    Moments(MomentsParams),
    Bounds(BoundsParams),
    Critical(CriticalParams),
    Check(CheckParams),
}

/// A validated run, echoed (with defaults filled in) on the error stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub params: Params,
}

/// All validation failures of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub subcommand: Option<Subcommand>,
    pub base_seed: Option<u64>,
}

/// Typed access to an object's keys, remembering what was read and what failed.
struct Fields<'a> {
    obj: &'a Map<String, Value>,
    used: Vec<&'static str>,
    errors: Vec<String>,
}

impl<'a> Fields<'a> {
    fn new(obj: &'a Map<String, Value>) -> Self {
        Fields { obj, used: Vec::new(), errors: Vec::new() }
    }

    fn optional<T: DeserializeOwned>(&mut self, key: &'static str) -> Option<T> {
        self.used.push(key);
        let v = self.obj.get(key)?;
        match T::deserialize(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn required<T: DeserializeOwned>(&mut self, key: &'static str) -> Option<T> {
        if !self.obj.contains_key(key) {
            self.used.push(key);
            self.errors.push(format!("{key} required"));
            return None;
        }
        self.optional(key)
    }

    fn or<T: DeserializeOwned>(&mut self, key: &'static str, default: T) -> Option<T> {
        if self.obj.contains_key(key) {
            self.optional(key)
        } else {
            self.used.push(key);
            Some(default)
        }
    }

    fn error(&mut self, message: impl Into<String>) {
        self.errors.push(message.into());
    }

    /// Unknown-key errors followed by every recorded failure.
    fn finish(self) -> Vec<String> {
        let mut out: Vec<String> = self
            .obj
            .keys()
            .filter(|k| !self.used.contains(&k.as_str()))
            .map(|k| format!("unknown key {k:?}"))
            .collect();
        out.extend(self.errors);
        out
    }
}

/// `rho` for the normal setting, `t1`/`t2` for the lognormal one.
fn read_setting(f: &mut Fields<'_>) -> Option<MseSetting<f64>> {
    let name: Option<String> = f.required("setting");
    let rho: Option<f64> = f.optional("rho");
    let t1: Option<f64> = f.optional("t1");
    let t2: Option<f64> = f.optional("t2");
    match name.as_deref() {
        Some("normal") => {
            if t1.is_some() || t2.is_some() {
                f.error("t1/t2 do not apply to the normal setting (use rho)");
            }
            match rho {
                Some(rho) if rho >= 1.0 && rho.is_finite() => Some(MseSetting::Normal { rho }),
                Some(rho) => {
                    f.error(format!("rho must be finite and at least 1, got {rho}"));
                    None
                }
                None => {
                    f.error("rho required");
                    None
                }
            }
        }
        Some("lognormal") => {
            if rho.is_some() {
                f.error("rho does not apply to the lognormal setting (use t1, t2)");
            }
            match (t1, t2) {
                (Some(t1), Some(t2)) if t1 > 0.0 && t2 > t1 && t2.is_finite() => Some(MseSetting::Lognormal { t1, t2 }),
                (Some(t1), Some(t2)) => {
                    f.error(format!("need 0 < t1 < t2, got t1 = {t1}, t2 = {t2}"));
                    None
                }
                _ => {
                    f.error("t1 and t2 required");
                    None
                }
            }
        }
        Some(other) => {
            f.error(format!("setting must be \"normal\" or \"lognormal\", got {other:?}"));
            None
        }
        None => None,
    }
}

fn read_basis(f: &mut Fields<'_>) -> Option<BasisSpec> {
    let family: Option<BasisFamily> = f.required("basis");
    let order: Option<usize> = f.required("K");
    Some(BasisSpec { family: family?, order: order? })
}

fn read_grid(f: &mut Fields<'_>, process: Option<ProcessKind>) -> Option<ExerciseGrid> {
    let times: Vec<f64> = f.required("times")?;
    match ExerciseGrid::for_process(process?, times) {
        Ok(g) => Some(g),
        Err(e) => {
            f.error(format!("times: {e}"));
            None
        }
    }
}

fn read_payoff(f: &mut Fields<'_>, grid: Option<&ExerciseGrid>) -> Option<PayoffSpec> {
    let payoff: PayoffSpec = f.required("payoff")?;
    if let Some(g) = grid {
        if let Err(e) = payoff.validate(g.len()) {
            f.error(format!("payoff: {e}"));
            return None;
        }
    }
    Some(payoff)
}

fn read_process(f: &mut Fields<'_>, basis: Option<BasisSpec>) -> Option<ProcessKind> {
    let default = basis.map(|b| natural_process(b.family));
    match default {
        Some(d) => f.or("process", d),
        None => f.optional("process"),
    }
}

fn positive(f: &mut Fields<'_>, key: &str, value: Option<u64>) -> Option<u64> {
    match value {
        Some(0) => {
            f.error(format!("{key} must be positive"));
            None
        }
        v => v,
    }
}

fn read_params(sub: Subcommand, f: &mut Fields<'_>, base_seed: Option<u64>) -> Option<Params> {
    match sub {
        Subcommand::Price => {
            let basis = read_basis(f);
            let process = read_process(f, basis);
            let grid = read_grid(f, process);
            let payoff = read_payoff(f, grid.as_ref());
            let n = f.required("N");
            let n_paths = positive(f, "N", n);
            let path_mode = f.or("path_mode", PathMode::Independent);
            Some(Params::Price(PricerConfig {
                process: process?,
                grid: grid?,
                payoff: payoff?,
                basis: basis?,
                n_paths: n_paths?,
                path_mode: path_mode?,
            }))
        }
        Subcommand::Check => {
            let basis = read_basis(f);
            let process = read_process(f, basis);
            let grid = read_grid(f, process);
            let payoff = read_payoff(f, grid.as_ref());
            let probe_paths = f.or("probe_paths", MIN_PROBE_PATHS);
            if let Some(p) = probe_paths {
                if p < MIN_PROBE_PATHS {
                    f.error(format!("probe_paths must be at least {MIN_PROBE_PATHS}, got {p}"));
                }
            }
            Some(Params::Check(CheckParams {
                process: process?,
                grid: grid?,
                payoff: payoff?,
                basis: basis?,
                probe_paths: probe_paths.filter(|&p| p >= MIN_PROBE_PATHS)?,
            }))
        }
        Subcommand::Sweep => {
            let setting = read_setting(f);
            let k_values = f.required("K_values");
            let n_values = f.required("N_values");
            let batches = f.or("batches", SweepGrid::DEFAULT_BATCHES);
            let scaled_threshold = f.or("scaled_threshold", SweepGrid::DEFAULT_SCALED_THRESHOLD);
            let n_ref = f.or("N_ref", SweepGrid::DEFAULT_N_REF);
            let format = f.or("format", SweepFormat::Csv);
            let grid = SweepGrid {
                setting: setting?,
                k_values: k_values?,
                n_values: n_values?,
                batches: batches?,
                base_seed: base_seed?,
                scaled_threshold: scaled_threshold?,
                n_ref: n_ref?,
            };
            if let Err(e) = grid.validate() {
                f.error(e.to_string());
                return None;
            }
            Some(Params::Sweep { grid, format: format? })
        }
        Subcommand::Moments => {
            let setting = read_setting(f);
            let k_max = f.required("K_max");
            Some(Params::Moments(MomentsParams { setting: setting?, k_max: k_max? }))
        }
        Subcommand::Bounds => {
            let kind: Option<String> = f.required("kind");
            let n = f.required("N");
            let n_paths = positive(f, "N", n);
            let order: Option<usize> = f.required("K");
            let params = match kind.as_deref()? {
                "worst_case" => {
                    let rho: Option<f64> = f.required("rho");
                    BoundsParams::WorstCase { order: order?, n_paths: n_paths?, rho: rho? }
                }
                "expected_mse" => {
                    let setting = read_setting(f);
                    BoundsParams::ExpectedMse { setting: setting?, order: order?, n_paths: n_paths? }
                }
                "continuation_error" => {
                    let setting = read_setting(f);
                    BoundsParams::ContinuationError { setting: setting?, order: order?, n_paths: n_paths? }
                }
                "multiperiod" => {
                    let setting = f.required("setting");
                    let times: Option<Vec<f64>> = f.required("times");
                    let date: Option<usize> = f.required("n");
                    if let Some(t) = &times {
                        if let Err(e) = ExerciseGrid::new(t.clone(), 0.0) {
                            f.error(format!("times: {e}"));
                            return None;
                        }
                    }
                    BoundsParams::Multiperiod {
                        setting: setting?,
                        times: times?,
                        n: date?,
                        order: order?,
                        n_paths: n_paths?,
                    }
                }
                other => {
                    f.error(format!(
                        "kind must be one of worst_case, expected_mse, continuation_error, multiperiod; got {other:?}"
                    ));
                    return None;
                }
            };
            Some(Params::Bounds(params))
        }
        Subcommand::Critical => {
            let name: Option<String> = f.required("setting");
            let n_values: Option<Vec<u64>> = f.required("N_values");
            if let Some(ns) = &n_values {
                if ns.iter().any(|&n| n < 2) {
                    f.error("N values must be at least 2");
                }
            }
            let setting = match name.as_deref()? {
                "normal" | "lognormal" => {
                    match read_setting(f)? {
                        MseSetting::Normal { rho } => CriticalSetting::NormalSingle { rho },
                        MseSetting::Lognormal { t1, t2 } => CriticalSetting::LognormalSingle { t1, t2 },
                    }
                }
                "normal_multi" => {
                    let (m, n, c, rho) = (f.required("m"), f.required("n"), f.required("c"), f.required("rho"));
                    CriticalSetting::NormalMulti { m: m?, n: n?, c: c?, rho: rho? }
                }
                "lognormal_multi" => {
                    let (m, n) = (f.required("m"), f.required("n"));
                    let (t_m, t_prev) = (f.required("t_m"), f.required("t_m_minus_1"));
                    CriticalSetting::LognormalMulti { m: m?, n: n?, t_m: t_m?, t_m_minus_1: t_prev? }
                }
                other => {
                    f.error(format!(
                        "setting must be one of normal, lognormal, normal_multi, lognormal_multi; got {other:?}"
                    ));
                    return None;
                }
            };
            Some(Params::Critical(CriticalParams { setting, n_values: n_values? }))
        }
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(document: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with(document, &Overrides::default())
}

/// [`parse_config`] with command-line overrides applied first.
pub fn parse_config_with(document: &str, overrides: &Overrides) -> Result<RunConfig, ConfigErrors> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| ConfigErrors(vec![format!("malformed JSON: {e}")]))?;
    let Value::Object(obj) = value else {
        return Err(ConfigErrors(vec!["configuration must be a JSON object".into()]));
    };
    let mut f = Fields::new(&obj);
    let doc_sub: Option<Subcommand> = f.optional("subcommand");
    let subcommand = match (overrides.subcommand, doc_sub) {
        (Some(a), Some(b)) if a != b => {
            f.error(format!("document is for subcommand {b} but {a} was requested"));
            None
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) if !obj.contains_key("subcommand") => {
            f.error("subcommand required");
            None
        }
        (None, None) => None,
    };
    let doc_seed: Option<u64> = f.optional("base_seed");
    let base_seed = overrides.base_seed.or(doc_seed);
    if base_seed.is_none() && !obj.contains_key("base_seed") {
        f.error("base_seed required");
    }
    let output: Option<PathBuf> = f.optional("output");
    let threads: Option<usize> = f.optional("threads");
    if threads == Some(0) {
        f.error("threads must be positive");
    }
    let params = subcommand.and_then(|s| read_params(s, &mut f, base_seed));
    let errors = f.finish();
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    match (subcommand, base_seed, params) {
        (Some(subcommand), Some(base_seed), Some(params)) => {
            Ok(RunConfig { subcommand, base_seed, output, threads, params })
        }
        _ => Err(ConfigErrors(vec!["invalid configuration".into()])),
    }
}
