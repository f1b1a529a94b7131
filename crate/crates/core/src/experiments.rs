//! Batched MSE estimation for the worst-case single-period target, sweeps over
//! `(K, N)`, and continuation-error studies for the multiperiod pricer.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisFamily, BasisSpec};
use crate::moments::{
    critical_curve, expected_mse_closed_form, gram_analysis, gram_matrix, theorem3_bound, BoundReport,
    CriticalSetting, MomentError, MseSetting, MultiperiodSetting, Theorem3Params,
};
use crate::regression::{price_bermudan, run_single_period, PricerConfig, RegressionError, SinglePeriodTarget};
use crate::rng::SeedCoordinates;
use crate::stats::{median, RunningMoments};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("malformed CSV row: {0}")]
    Csv(String),
}

/// `(t1, t2)` of a single-period setting; the normal setting fixes `t1 = 1`.
pub fn setting_times(setting: MseSetting<f64>) -> (f64, f64) {
    match setting {
        MseSetting::Normal { rho } => (1.0, rho),
        MseSetting::Lognormal { t1, t2 } => (t1, t2),
    }
}

pub fn setting_name(setting: MseSetting<f64>) -> &'static str {
    match setting {
        MseSetting::Normal { .. } => "normal",
        MseSetting::Lognormal { .. } => "lognormal",
    }
}

fn setting_label(setting: MseSetting<f64>) -> u64 {
    match setting {
        MseSetting::Normal { .. } => 0,
        MseSetting::Lognormal { .. } => 1,
    }
}

fn critical_setting(setting: MseSetting<f64>) -> CriticalSetting<f64> {
    match setting {
        MseSetting::Normal { rho } => CriticalSetting::NormalSingle { rho },
        MseSetting::Lognormal { t1, t2 } => CriticalSetting::LognormalSingle { t1, t2 },
    }
}

/// Target with `|beta| = 1` attaining the worst-case growth:
/// `Y = rho^{K/2} psi_K(S_2)` (normal) or `Y = psi_K(S_2)` (lognormal), so
/// `beta = e_K` in both cases.
pub fn worst_case_target(setting: MseSetting<f64>, order: usize) -> Result<SinglePeriodTarget, ExperimentError> {
    let (t1, t2) = setting_times(setting);
    let (basis, a_k) = match setting {
        MseSetting::Normal { rho } => (BasisSpec::hermite(order), rho.powf(order as f64 / 2.0)),
        MseSetting::Lognormal { .. } => (BasisSpec::exponential_martingale(order), 1.0),
    };
    let mut a = vec![0.0; order + 1];
    a[order] = a_k;
    let mut target = SinglePeriodTarget::new(basis, t1, t2, a)?;
    // exact unit vector rather than a_K rho^{-K/2} rounded
    target.true_beta = (0..=order).map(|k| if k == order { 1.0 } else { 0.0 }).collect();
    Ok(target)
}

/// How a cell is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimation {
    /// `batches` regressions of `N` paths each.
    Direct,
    /// `batches` regressions of `n_ref` paths, mean scaled by `n_ref / N`.
    Scaled { n_ref: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMethod {
    Direct,
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Supercritical,
    Band,
}

impl Regime {
    /// Below the lower curve, above the upper curve, or between them.
    pub fn classify(order: usize, lower: f64, upper: f64) -> Regime {
        let k = order as f64;
        if k < lower {
            Regime::Subcritical
        } else if k > upper {
            Regime::Supercritical
        } else {
            Regime::Band
        }
    }
}

macro_rules! text_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
        impl FromStr for $ty {
            type Err = ExperimentError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(ExperimentError::Csv(format!("unknown value {s:?}"))),
                }
            }
        }
    };
}

text_enum!(CellMethod { Direct => "direct", Scaled => "scaled" });
text_enum!(Regime { Subcritical => "subcritical", Supercritical => "supercritical", Band => "band" });

/// One `(K, N)` cell. Unavailable cells (Gram failure) carry NaN estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseCell {
    pub setting: String,
    #[serde(rename = "K")]
    pub order: usize,
    #[serde(rename = "N")]
    pub n_paths: u64,
    pub batches: u64,
    pub method: CellMethod,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub mse_median: f64,
    pub expected_mse: f64,
    #[serde(rename = "critical_K_lower")]
    pub critical_k_lower: f64,
    #[serde(rename = "critical_K_upper")]
    pub critical_k_upper: f64,
    pub regime: Regime,
}

pub const CSV_HEADER: [&str; 12] = [
    "setting",
    "K",
    "N",
    "batches",
    "method",
    "mse_mean",
    "mse_stderr",
    "mse_median",
    "expected_mse",
    "critical_K_lower",
    "critical_K_upper",
    "regime",
];

/// `%g`-style formatting with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

fn parse_float(s: &str) -> Result<f64, ExperimentError> {
    s.parse().map_err(|_| ExperimentError::Csv(format!("bad number {s:?}")))
}

fn parse_int<T: FromStr>(s: &str) -> Result<T, ExperimentError> {
    s.parse().map_err(|_| ExperimentError::Csv(format!("bad integer {s:?}")))
}

impl MseCell {
    pub fn is_available(&self) -> bool {
        !self.mse_mean.is_nan()
    }

    /// Fields in [`CSV_HEADER`] order, reals at 6 significant digits.
    pub fn csv_fields(&self) -> Vec<String> {
        let g = |x: f64| format_significant(x, 6);
        vec![
            self.setting.clone(),
            self.order.to_string(),
            self.n_paths.to_string(),
            self.batches.to_string(),
            self.method.to_string(),
            g(self.mse_mean),
            g(self.mse_stderr),
            g(self.mse_median),
            g(self.expected_mse),
            g(self.critical_k_lower),
            g(self.critical_k_upper),
            self.regime.to_string(),
        ]
    }

    pub fn from_csv_fields<S: AsRef<str>>(fields: &[S]) -> Result<MseCell, ExperimentError> {
        if fields.len() != CSV_HEADER.len() {
            return Err(ExperimentError::Csv(format!("expected {} fields, got {}", CSV_HEADER.len(), fields.len())));
        }
        let f = |i: usize| fields[i].as_ref();
        Ok(MseCell {
            setting: f(0).to_string(),
            order: parse_int(f(1))?,
            n_paths: parse_int(f(2))?,
            batches: parse_int(f(3))?,
            method: f(4).parse()?,
            mse_mean: parse_float(f(5))?,
            mse_stderr: parse_float(f(6))?,
            mse_median: parse_float(f(7))?,
            expected_mse: parse_float(f(8))?,
            critical_k_lower: parse_float(f(9))?,
            critical_k_upper: parse_float(f(10))?,
            regime: f(11).parse()?,
        })
    }
}

/// Seed coordinates of a cell: `(base_seed; setting, K, N)`, batch `b` appends `b`.
pub fn cell_seed(base_seed: u64, setting: MseSetting<f64>, order: usize, n_paths: u64) -> SeedCoordinates {
    SeedCoordinates::new(base_seed, vec![setting_label(setting), order as u64, n_paths])
}

/// Average of `|beta~ - beta|^2` over `batches` independent regressions.
///
/// The scaled method runs at `n_ref` with the seed of cell `(K, n_ref)`, so
/// every scaled cell of one `K` reuses the same batches.
pub fn estimate_mse_cell(
    target: &SinglePeriodTarget,
    setting: MseSetting<f64>,
    n_paths: u64,
    batches: u64,
    estimation: Estimation,
    base_seed: u64,
) -> Result<MseCell, ExperimentError> {
    if batches < 2 {
        return Err(ExperimentError::InvalidGrid(format!("batches must be at least 2, got {batches}")));
    }
    if n_paths < 2 {
        return Err(ExperimentError::InvalidGrid(format!("N must be at least 2, got {n_paths}")));
    }
    let order = target.basis.order;
    let (run_paths, method, scale) = match estimation {
        Estimation::Direct => (n_paths, CellMethod::Direct, 1.0),
        Estimation::Scaled { n_ref } => (n_ref, CellMethod::Scaled, n_ref as f64 / n_paths as f64),
    };
    let curve = critical_curve(critical_setting(setting), n_paths)?;
    let expected_mse = expected_mse_closed_form(setting, order, n_paths).unwrap_or(f64::NAN);
    let mut cell = MseCell {
        setting: setting_name(setting).into(),
        order,
        n_paths,
        batches,
        method,
        mse_mean: f64::NAN,
        mse_stderr: f64::NAN,
        mse_median: f64::NAN,
        expected_mse,
        critical_k_lower: curve.lower,
        critical_k_upper: curve.upper,
        regime: Regime::classify(order, curve.lower, curve.upper),
    };
    let gram = gram_analysis(target.basis, target.t1);
    if gram.inverse.is_none() {
        return Ok(cell);
    }
    let seed = cell_seed(base_seed, setting, order, run_paths);
    let errors = (0..batches)
        .into_par_iter()
        .map(|b| run_single_period(target, &gram, run_paths, &seed.child(b)).map(|r| scale * r.squared_error(target)))
        .collect::<Result<Vec<f64>, _>>()?;
    let moments: RunningMoments = errors.iter().copied().collect();
    cell.mse_mean = moments.mean;
    cell.mse_stderr = moments.std_error();
    cell.mse_median = median(&errors);
    Ok(cell)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub setting: MseSetting<f64>,
    #[serde(rename = "K_values")]
    pub k_values: Vec<usize>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<u64>,
    pub batches: u64,
    pub base_seed: u64,
    /// Orders at or above this use the scaled method.
    pub scaled_threshold: usize,
    #[serde(rename = "N_ref")]
    pub n_ref: u64,
}

impl SweepGrid {
    pub const DEFAULT_BATCHES: u64 = 5000;
    pub const DEFAULT_SCALED_THRESHOLD: usize = 7;
    pub const DEFAULT_N_REF: u64 = 500_000;

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut problems = Vec::new();
        if self.k_values.is_empty() {
            problems.push("K_values is empty".to_string());
        }
        if self.n_values.is_empty() {
            problems.push("N_values is empty".to_string());
        }
        if self.batches < 2 {
            problems.push(format!("batches must be at least 2, got {}", self.batches));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            problems.push(format!("N values must be at least 2, got {n}"));
        }
        let max_n = self.n_values.iter().copied().max().unwrap_or(0);
        if self.k_values.iter().any(|&k| k >= self.scaled_threshold) && self.n_ref < max_n {
            problems.push(format!("N_ref ({}) must be at least max(N_values) ({max_n})", self.n_ref));
        }
        match self.setting {
            MseSetting::Normal { rho } if !(rho >= 1.0 && rho.is_finite()) => {
                problems.push(format!("rho must be finite and at least 1, got {rho}"))
            }
            MseSetting::Lognormal { t1, t2 } if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) => {
                problems.push(format!("need 0 < t1 < t2, got t1 = {t1}, t2 = {t2}"))
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::InvalidGrid(problems.join("; ")))
        }
    }

    pub fn estimation(&self, order: usize) -> Estimation {
        if order >= self.scaled_threshold {
            Estimation::Scaled { n_ref: self.n_ref }
        } else {
            Estimation::Direct
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSample {
    #[serde(rename = "N")]
    pub n_paths: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    /// `K`-major, `N` inner, in grid order.
    pub cells: Vec<MseCell>,
    pub critical: Vec<CriticalSample>,
}

/// Evaluate one cell of a sweep exactly as [`run_sweep`] would.
pub fn sweep_cell(grid: &SweepGrid, order: usize, n_paths: u64) -> Result<MseCell, ExperimentError> {
    let target = worst_case_target(grid.setting, order)?;
    estimate_mse_cell(&target, grid.setting, n_paths, grid.batches, grid.estimation(order), grid.base_seed)
}

pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult, ExperimentError> {
    run_sweep_with(grid, |_| {})
}

/// [`run_sweep`], calling `on_cell` after each cell completes.
pub fn run_sweep_with(grid: &SweepGrid, mut on_cell: impl FnMut(&MseCell)) -> Result<SweepResult, ExperimentError> {
    grid.validate()?;
    let mut cells = Vec::with_capacity(grid.k_values.len() * grid.n_values.len());
    for &k in &grid.k_values {
        for &n in &grid.n_values {
            let cell = sweep_cell(grid, k, n)?;
            on_cell(&cell);
            cells.push(cell);
        }
    }
    let critical = grid
        .n_values
        .iter()
        .map(|&n| {
            let c = critical_curve(critical_setting(grid.setting), n)?;
            Ok(CriticalSample { n_paths: n, lower: c.lower, upper: c.upper })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(SweepResult { grid: grid.clone(), cells, critical })
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for c in &self.cells {
            w.write_record(c.csv_fields()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results serialize")
    }

    pub fn plot_data(&self) -> PlotData {
        PlotData {
            points: self
                .cells
                .iter()
                .map(|c| PlotPoint { order: c.order, n_paths: c.n_paths, mse_mean: c.mse_mean })
                .collect(),
            critical: self.critical.clone(),
        }
    }
}

/// Parse CSV text written by [`SweepResult::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<MseCell>, ExperimentError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| ExperimentError::Csv(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(ExperimentError::Csv("unexpected header".into()));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| ExperimentError::Csv(e.to_string()))?;
            MseCell::from_csv_fields(&rec.iter().collect::<Vec<_>>())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotPoint {
    #[serde(rename = "K")]
    pub order: usize,
    #[serde(rename = "N")]
    pub n_paths: u64,
    pub mse_mean: f64,
}

/// `(K, N, mse_mean)` triples and critical-curve samples for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub points: Vec<PlotPoint>,
    pub critical: Vec<CriticalSample>,
}

/// `sqrt((b - c)^T Psi(t) (b - c))`, the weighted L2 distance between two
/// basis combinations.
pub fn continuation_error_norm(
    estimated: &[f64],
    reference: &[f64],
    basis: BasisSpec,
    t: f64,
) -> Result<f64, ExperimentError> {
    if estimated.len() != basis.size() || reference.len() != basis.size() {
        return Err(RegressionError::Dimension {
            expected: basis.size(),
            actual: if estimated.len() != basis.size() { estimated.len() } else { reference.len() },
        }
        .into());
    }
    let d: Vec<f64> = estimated.iter().zip(reference).map(|(a, b)| a - b).collect();
    let q = gram_matrix(basis, t).quadratic_form(&d).expect("sizes checked");
    Ok(q.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DateError {
    pub date: usize,
    pub t: f64,
    /// Mean over replications of `||C_n - C_n^ref||_n^2`.
    pub mean_squared_error: f64,
    pub std_error: f64,
    /// Leading term of the multiperiod bound at this date (`None` if unavailable).
    pub bound: Option<BoundReport<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiperiodStudy {
    pub n_paths: u64,
    pub replications: u64,
    pub reference_n_paths: u64,
    pub reference_seed: SeedCoordinates,
    pub dates: Vec<DateError>,
}

/// Smallest reference size accepted, as a multiple of `N`.
pub const REFERENCE_FACTOR: u64 = 100;

/// Estimate `E||C_n - C_n||_n^2` at dates `1..m-1` from `replications`
/// pricer runs at `config.n_paths`, with the exact-projection continuation
/// replaced by one run at `reference_n_paths >= 100 N`.
///
/// Replication `r` uses `seed.child(r)`, the reference `seed.child(u64::MAX)`.
pub fn multiperiod_error_study(
    config: &PricerConfig,
    replications: u64,
    reference_n_paths: u64,
    seed: &SeedCoordinates,
) -> Result<MultiperiodStudy, ExperimentError> {
    if replications < 2 {
        return Err(ExperimentError::InvalidGrid(format!("replications must be at least 2, got {replications}")));
    }
    if reference_n_paths < REFERENCE_FACTOR * config.n_paths {
        return Err(ExperimentError::InvalidGrid(format!(
            "reference run needs at least {} paths, got {reference_n_paths}",
            REFERENCE_FACTOR * config.n_paths
        )));
    }
    let reference_seed = seed.child(u64::MAX);
    let reference =
        price_bermudan(&PricerConfig { n_paths: reference_n_paths, ..config.clone() }, &reference_seed)?;
    let runs = (0..replications)
        .into_par_iter()
        .map(|r| price_bermudan(config, &seed.child(r)))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = &config.grid;
    let m = grid.len();
    let setting = match config.basis.family {
        BasisFamily::HermiteNormalized => MultiperiodSetting::Normal,
        BasisFamily::ExponentialMartingale => MultiperiodSetting::Lognormal,
    };
    let dates = (1..m)
        .map(|n| {
            let t = grid.time(n);
            let reference_beta = reference.coefficients(n).expect("every regression date is fitted");
            let mut moments = RunningMoments::default();
            for run in &runs {
                let beta = run.coefficients(n).expect("every regression date is fitted");
                let e = continuation_error_norm(beta, reference_beta, config.basis, t)?;
                moments.push(e * e);
            }
            let bound = theorem3_bound(Theorem3Params {
                setting,
                m,
                n,
                order: config.basis.order,
                n_paths: config.n_paths,
                c: grid.max_ratio(),
                t_first: grid.time(1),
                t_m: grid.time(m),
            })
            .ok();
            Ok(DateError { date: n, t, mean_squared_error: moments.mean, std_error: moments.std_error(), bound })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(MultiperiodStudy {
        n_paths: config.n_paths,
        replications,
        reference_n_paths,
        reference_seed,
        dates,
    })
}
