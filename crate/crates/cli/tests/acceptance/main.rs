//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#[path = "../support/lattice.rs"]
mod lattice;

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use amrmc::basis::BasisSpec;
use amrmc::experiments::{multiperiod_error_study, run_sweep, sweep_cell, MseCell, SweepGrid};
use amrmc::moments::{
    c_rho, expected_mse_closed_form, gram_analysis, k_star, lognormal_moments, fourth_cross_moment_normal,
    vandermonde_log_determinant, worst_case_bounds_normal, MseSetting,
};
use amrmc::paths::{ExerciseGrid, ProcessKind};
use amrmc::regression::{price_bermudan, PathMode, PayoffKind, PayoffSpec, PricerConfig};
use amrmc::rng::{derive_stream, RandomStream, SeedCoordinates};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::factorial::ln_binomial;

const SEED: u64 = 20_240_611;
const RHO: f64 = 2.0;
const TABLE_N: [u64; 9] = [500, 1000, 2000, 4000, 8000, 16000, 32000, 64000, 128000];
const TABLE_BOUND: [f64; 9] = [2.5, 2.8, 3.1, 3.4, 3.7, 3.9, 4.2, 4.5, 4.8];
/// Published reference MSE values for K = 1..3 at N = 500..8000, two decimals.
const TABLE_SMALL_K: [[f64; 5]; 3] =
    [[0.01, 0.00, 0.00, 0.00, 0.00], [0.08, 0.04, 0.02, 0.01, 0.00], [0.67, 0.31, 0.17, 0.08, 0.04]];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

struct Context {
    grid: SweepGrid,
    cells: HashMap<(usize, u64), MseCell>,
}

impl Context {
    fn new() -> Self {
        Context {
            grid: SweepGrid {
                setting: MseSetting::Normal { rho: RHO },
                k_values: vec![],
                n_values: vec![],
                batches: 5000,
                base_seed: SEED,
                scaled_threshold: 7,
                n_ref: 500_000,
            },
            cells: HashMap::new(),
        }
    }

    fn cell(&mut self, k: usize, n: u64) -> MseCell {
        let grid = &self.grid;
        self.cells.entry((k, n)).or_insert_with(|| sweep_cell(grid, k, n).expect("normal cells are available")).clone()
    }
}

fn table1_small_k(ctx: &mut Context) -> Outcome {
    // half a unit of the printed precision: a printed 0.00 means [0, 0.005)
    let rounding = 0.005;
    let mut worst = (f64::NEG_INFINITY, String::new());
    let mut failures = Vec::new();
    for (ki, row) in TABLE_SMALL_K.iter().enumerate() {
        let k = ki + 1;
        for (&n, &printed) in TABLE_N.iter().zip(row) {
            let c = ctx.cell(k, n);
            let tol = (0.15 * printed).max(3.0 * c.mse_stderr) + rounding;
            let gap = (c.mse_mean - printed).abs();
            let label = format!("(K={k}, N={n}) est {:.4} vs table {printed:.2}", c.mse_mean);
            if gap / tol > worst.0 {
                worst = (gap / tol, label.clone());
            }
            if gap > tol {
                failures.push(label);
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("15 cells within tolerance; tightest {} at {:.2} of tolerance", worst.1, worst.0)
        } else {
            format!("outside tolerance: {}", failures.join("; "))
        },
    )
}

/// `ln(rho^K sum_k M4(K, k, rho))` summed directly from log-binomials.
fn oracle_ln_energy(order: usize, rho: f64) -> f64 {
    let lse = |xs: Vec<f64>| {
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    };
    let ln_m4 = |k1: u64, k2: u64| {
        lse((0..=k1.min(k2))
            .map(|j| -(j as f64) * rho.ln() + ln_binomial(2 * j, j) + ln_binomial(k1, j) + ln_binomial(k2, j))
            .collect())
    };
    order as f64 * rho.ln() + lse((0..=order as u64).map(|k| ln_m4(order as u64, k)).collect())
}

fn closed_form_oracle(ctx: &mut Context) -> Outcome {
    let setting = MseSetting::Normal { rho: RHO };
    let mut notes = Vec::new();
    let mut pass = true;
    let e1 = expected_mse_closed_form(setting, 1, 500).unwrap();
    let e3 = expected_mse_closed_form(setting, 3, 500).unwrap();
    if (e1 - 0.010).abs() > 1e-15 || (e3 - 0.678).abs() > 1e-12 {
        pass = false;
        notes.push(format!("closed form K=1 {e1}, K=3 {e3}"));
    }
    for k in 0..=4 {
        let oracle = oracle_ln_energy(k, RHO).exp_m1();
        for &n in &[500u64, 8000] {
            let exact = expected_mse_closed_form(setting, k, n).unwrap();
            if (exact * n as f64 - oracle).abs() > 1e-10 * oracle.max(1.0) {
                pass = false;
                notes.push(format!("K={k}: library {exact} vs oracle {}", oracle / n as f64));
            }
            let c = ctx.cell(k, n);
            let z = if c.mse_stderr > 0.0 { (c.mse_mean - exact) / c.mse_stderr } else { 0.0 };
            let ok = (c.mse_mean - exact).abs() <= 3.0 * c.mse_stderr;
            if !ok {
                pass = false;
            }
            notes.push(format!("K={k} N={n} z={z:+.2}"));
        }
    }
    Outcome::new(pass, notes.join(", "))
}

fn critical_curve_cli(_: &mut Context) -> Outcome {
    let dir = std::env::temp_dir().join(format!("amrmc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("critical.json");
    let n_values: Vec<String> = TABLE_N.iter().map(|n| n.to_string()).collect();
    std::fs::write(
        &cfg,
        format!(r#"{{"base_seed":1,"setting":"normal","rho":2,"N_values":[{}]}}"#, n_values.join(",")),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_amrmc")).args(["critical", "--config"]).arg(&cfg).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let values: Vec<f64> = text.lines().filter_map(|l| l.split_whitespace().nth(1)?.parse().ok()).collect();
    let rounded: Vec<f64> = values.iter().map(|v| (v * 10.0).round() / 10.0).collect();
    let pass = out.status.success()
        && rounded.len() == TABLE_BOUND.len()
        && rounded.iter().zip(TABLE_BOUND).all(|(a, b)| (a - b).abs() < 1e-9)
        && text.lines().next().is_some_and(|l| l.ends_with("2.530 2.530"));
    Outcome::new(pass, format!("printed {:?}", values))
}

fn regime_monotonicity(ctx: &mut Context) -> Outcome {
    let ns: Vec<u64> = TABLE_N[..7].to_vec();
    let c = c_rho(RHO);
    let mut pass = true;
    let mut notes = Vec::new();
    for (label, factor, increasing) in [("upper", 1.3, true), ("lower", 0.7, false)] {
        let cells: Vec<MseCell> = ns
            .iter()
            .map(|&n| {
                let x = factor * (n as f64).ln() / c;
                let k = if increasing { x.round() } else { x.floor() } as usize;
                ctx.cell(k, n)
            })
            .collect();
        let mut violations = 0;
        let mut large = 0;
        for w in cells.windows(2) {
            let step = w[1].mse_mean - w[0].mse_mean;
            let wrong = if increasing { step < 0.0 } else { step > 0.0 };
            if wrong {
                violations += 1;
                if step.abs() > w[0].mse_stderr.hypot(w[1].mse_stderr) {
                    large += 1;
                }
            }
        }
        let ok = violations == 0 || (violations == 1 && large == 0);
        pass &= ok;
        let path: Vec<String> = cells.iter().map(|c| format!("K{}:{:.4}", c.order, c.mse_mean)).collect();
        notes.push(format!("{label} diagonal [{}] violations {violations} (beyond 1 se: {large})", path.join(" ")));
    }
    Outcome::new(pass, notes.join("; "))
}

/// Normalized Hermite values `He_k(x)/sqrt(k!)` for `k = 0..=order`.
fn hermite_row(order: usize, x: f64) -> Vec<f64> {
    let mut he = vec![1.0; order + 1];
    if order >= 1 {
        he[1] = x;
    }
    for k in 1..order {
        he[k + 1] = x * he[k] - k as f64 * he[k - 1];
    }
    let mut fact = 1.0;
    for (k, h) in he.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *h /= fact.sqrt();
    }
    he
}

/// Sums and sums of squares of `dim` statistics over `paths` rows.
fn monte_carlo(paths: u64, dim: usize, stream: &RandomStream, f: impl Fn(&mut RandomStream, &mut [f64]) + Sync) -> Vec<(f64, f64)> {
    const CHUNK: u64 = 100_000;
    let chunks = paths.div_ceil(CHUNK);
    let partials: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(0.0, 0.0); dim];
            let mut buf = vec![0.0; dim];
            for row in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                let mut s = stream.substream(row);
                f(&mut s, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.0 += x;
                    a.1 += x * x;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![(0.0, 0.0); dim];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.0 += x.0;
            t.1 += x.1;
        }
    }
    total
}

fn mean_se((s, ss): (f64, f64), n: u64) -> (f64, f64) {
    let n = n as f64;
    let mean = s / n;
    let var = (ss / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn moment_identities(_: &mut Context) -> Outcome {
    const PATHS: u64 = 10_000_000;
    let mut notes = Vec::new();
    let mut pass = true;

    // normal: W1 ~ N(0, 1), W2 = W1 + N(0, 1), indices 0..=6. The degree-24
    // integrands are heavy-tailed, so both increments are drawn with variance
    // S2 and reweighted by the density ratio.
    const S2: f64 = 3.0;
    let dim = 7;
    let sums = monte_carlo(PATHS, dim * dim, &derive_stream(SEED, &[5, 1]), |s, out| {
        let z1 = S2.sqrt() * s.next_normal();
        let z2 = S2.sqrt() * s.next_normal();
        let lr = S2 * (-(z1 * z1 + z2 * z2) * (1.0 - 1.0 / S2) / 2.0).exp();
        let (w1, w2) = (z1, z1 + z2);
        let a = hermite_row(6, w1);
        let b = hermite_row(6, w2 / RHO.sqrt());
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = lr * a[i] * a[i] * b[j] * b[j];
            }
        }
    });
    let mut worst_z: f64 = 0.0;
    for k1 in 0..dim {
        for k2 in 0..dim {
            let (m, se) = mean_se(sums[k1 * dim + k2], PATHS);
            let exact = fourth_cross_moment_normal(k1, k2, RHO).unwrap();
            let z = (m - exact) / se;
            worst_z = worst_z.max(z.abs());
            if z.abs() > 4.0 {
                pass = false;
                notes.push(format!("normal ({k1},{k2}) {m} vs {exact}"));
            }
        }
    }
    notes.push(format!("normal 49 moments, max |z| {worst_z:.2}"));

    // lognormal, t1 = 0.5, t2 = 1: importance sampling with a drift tilt
    // at 3/4 of the exponent, since log g is linear in the increments
    let (t1, t2) = (0.5, 1.0);
    let mut worst_z: f64 = 0.0;
    for k1 in 0..=3usize {
        for k2 in 0..=3usize {
            let exact = lognormal_moments(k1, k2, t1, t2).unwrap();
            for (p, target) in [(1.0, exact.first), (2.0, exact.fourth)] {
                let a = p * (k1 + k2) as f64;
                let b = p * k2 as f64;
                let (v1, v2) = (t1, t2 - t1);
                let (mu1, mu2) = (0.75 * a * v1, 0.75 * b * v2);
                let stream = derive_stream(SEED, &[5, 2, k1 as u64, k2 as u64, p as u64]);
                let sums = monte_carlo(PATHS, 1, &stream, |s, out| {
                    let z1 = mu1 + v1.sqrt() * s.next_normal();
                    let z2 = mu2 + v2.sqrt() * s.next_normal();
                    let (w1, w2) = (z1, z1 + z2);
                    let psi = |k: usize, w: f64, t: f64| (k as f64 * w - (k * k) as f64 * t / 2.0).exp();
                    let g = (psi(k1, w1, t1) * psi(k2, w2, t2)).powf(p);
                    let lr = (-mu1 * z1 / v1 + mu1 * mu1 / (2.0 * v1) - mu2 * z2 / v2 + mu2 * mu2 / (2.0 * v2)).exp();
                    out[0] = g * lr;
                });
                let (m, se) = mean_se(sums[0], PATHS);
                let z = if se > 0.0 { (m - target) / se } else { (m - target) / target * 1e12 };
                worst_z = worst_z.max(z.abs());
                if z.abs() > 4.0 {
                    pass = false;
                    notes.push(format!("lognormal p={p} ({k1},{k2}) {m} vs {target}"));
                }
            }
        }
    }
    notes.push(format!("lognormal 32 moments, max |z| {worst_z:.2}"));

    // at a condition number far past 1/epsilon the numerical determinant
    // carries no 1e-8 accuracy; those matrices are rejected and only reported
    let mut worst_rel: f64 = 0.0;
    let mut rejected = Vec::new();
    for order in 0..=6 {
        for &t in &[0.25f64, 0.5, 1.0, 1.5] {
            let g = gram_analysis(BasisSpec::exponential_martingale(order), t);
            let closed = vandermonde_log_determinant(order, t);
            let rel = (g.log_determinant - closed).exp_m1().abs();
            if g.conditioning_failed {
                rejected.push(format!("K={order} t={t} cond {:.1e} gap {rel:.1e}", g.condition_estimate));
                continue;
            }
            worst_rel = worst_rel.max(rel);
            if g.determinant_sign != 1 || rel > 1e-8 {
                pass = false;
                notes.push(format!("determinant K={order} t={t}: relative {rel:e}"));
            }
        }
    }
    notes.push(format!(
        "determinants K<=6 at t in {{0.25, 0.5, 1, 1.5}}, max relative gap {worst_rel:.1e} (rejected Gram matrices: {})",
        rejected.join(", ")
    ));
    Outcome::new(pass, notes.join("; "))
}

fn k_star_oracle(_: &mut Context) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for &rho in &[1.0f64, 2.0, 4.0] {
        for order in 0..=200u64 {
            let logs: Vec<f64> =
                (0..=order).map(|k| -(k as f64) * rho.ln() + ln_binomial(2 * k, k) + 2.0 * ln_binomial(order, k)).collect();
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let argmax = logs.iter().position(|&x| x >= max - 1e-12 * max.abs().max(1.0)).unwrap();
            let got = k_star(order as usize, rho).index;
            if got != argmax {
                pass = false;
                notes.push(format!("rho={rho} K={order}: k*={got}, argmax={argmax}"));
            }
        }
        let big = 10_000;
        let ratio = k_star(big, rho).index as f64 / big as f64;
        let limit = 2.0 / (2.0 + rho.sqrt());
        let rel = (ratio - limit).abs() / limit;
        pass &= rel <= 0.02;
        notes.push(format!("rho={rho}: k*/K at 1e4 = {ratio:.4} vs {limit:.4}"));
    }
    Outcome::new(pass, notes.join("; "))
}

fn bound_sandwich(_: &mut Context) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut min_margin = f64::INFINITY;
    for &rho in &[2.0, 4.0] {
        for order in 1..=40 {
            let l = oracle_ln_energy(order, rho);
            // ln(expm1(L)) without overflow
            let ln_ne = l + (-(-l).exp_m1()).ln();
            let lib = expected_mse_closed_form(MseSetting::Normal { rho }, order, 1).unwrap();
            if (lib.ln() - ln_ne).abs() > 1e-9 {
                pass = false;
                notes.push(format!("rho={rho} K={order}: library {} vs oracle {ln_ne}", lib.ln()));
            }
            let b = worst_case_bounds_normal(order, 1, rho).unwrap();
            let (lo, hi) = (b.log_lower.unwrap(), b.log_upper.unwrap());
            min_margin = min_margin.min(ln_ne - lo).min(hi - ln_ne);
            if !(lo <= ln_ne && ln_ne <= hi) {
                pass = false;
                notes.push(format!("rho={rho} K={order}: {lo} <= {ln_ne} <= {hi} fails"));
            }
        }
    }
    notes.push(format!("K=1..40, rho in {{2,4}}: smallest log margin {min_margin:.3} (K=0 is degenerate: N E = 0 < 1)"));
    let mut checked = 0;
    for order in 1..=6 {
        for &t in &[0.25f64, 0.5, 1.0, 1.5, 2.0] {
            let g = gram_analysis(BasisSpec::exponential_martingale(order), t);
            let slack = 1.0 + 1e-12;
            if g.norm > g.log_norm_bound.unwrap().exp() * slack {
                pass = false;
                notes.push(format!("norm bound K={order} t={t}"));
            }
            if let Some(inv) = g.inverse_norm {
                checked += 1;
                if inv > g.log_inverse_norm_bound.unwrap().exp() * slack {
                    pass = false;
                    notes.push(format!("inverse-norm bound K={order} t={t}: {inv:e} > {:e}", g.log_inverse_norm_bound.unwrap().exp()));
                }
            }
        }
    }
    notes.push(format!("Gram norm bounds checked on 30 analyses ({checked} with accepted inverses)"));
    Outcome::new(pass, notes.join("; "))
}

fn pricer_validation(_: &mut Context) -> Outcome {
    let process = ProcessKind::DriftAdjustedGeometricBrownian;
    let call = PricerConfig {
        process,
        grid: ExerciseGrid::for_process(process, vec![1.0]).unwrap(),
        payoff: PayoffSpec::european(PayoffKind::Call { strike: 1.0 }, 1),
        basis: BasisSpec::exponential_martingale(2),
        n_paths: 1_000_000,
        path_mode: PathMode::Independent,
    };
    let r = price_bermudan(&call, &SeedCoordinates::new(SEED, vec![8, 1])).unwrap();
    let exact = 2.0 * Normal::standard().cdf(0.5) - 1.0;
    let call_ok = (r.value_estimate - exact).abs() <= 4.0 * r.continuation_std_error;

    let start = Instant::now();
    let put = PricerConfig {
        grid: ExerciseGrid::for_process(process, vec![0.5, 1.0, 1.5]).unwrap(),
        payoff: PayoffSpec::bermudan(PayoffKind::Put { strike: 1.0 }),
        basis: BasisSpec::exponential_martingale(5),
        n_paths: 100_000,
        ..call
    };
    let r2 = price_bermudan(&put, &SeedCoordinates::new(SEED, vec![8, 2])).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let oracle = lattice::bermudan_put(1.0, 1.0, 1.5, 2001, &[0, 667, 1334, 2001]);
    let rel = (r2.value_estimate - oracle).abs() / oracle;
    let put_ok = rel <= 0.01;
    Outcome::new(
        call_ok && put_ok,
        format!(
            "call {:.5} +- {:.5} vs {exact:.5} [{}]; Bermudan put {:.5} vs lattice {oracle:.5}, relative gap {:.2}% [{}] in {elapsed:.1}s",
            r.value_estimate,
            r.continuation_std_error,
            if call_ok { "ok" } else { "off" },
            r2.value_estimate,
            100.0 * rel,
            if put_ok { "ok" } else { "off" },
        ),
    )
}

fn multiperiod_scaling(_: &mut Context) -> Outcome {
    const REPLICATIONS: u64 = 600;
    let process = ProcessKind::StandardBrownian;
    let mut pass = true;
    let mut notes = Vec::new();
    for order in 1..=3 {
        let config = |n: u64| PricerConfig {
            process,
            grid: ExerciseGrid::for_process(process, vec![1.0, 2.0, 3.0]).unwrap(),
            payoff: PayoffSpec::bermudan(PayoffKind::Put { strike: 0.0 }),
            basis: BasisSpec::hermite(order),
            n_paths: n,
            path_mode: PathMode::Independent,
        };
        let seed = |n: u64| SeedCoordinates::new(SEED, vec![9, order as u64, n]);
        let small = multiperiod_error_study(&config(4000), REPLICATIONS, 400_000, &seed(4000)).unwrap();
        let large = multiperiod_error_study(&config(8000), REPLICATIONS, 800_000, &seed(8000)).unwrap();
        for (a, b) in small.dates.iter().zip(&large.dates) {
            let ratio = b.mean_squared_error / a.mean_squared_error;
            let ok_ratio = (0.35..=0.65).contains(&ratio);
            let mut ok_bound = true;
            for d in [a, b] {
                let bound = d.bound.as_ref().map_or(f64::INFINITY, |r| r.upper);
                ok_bound &= d.mean_squared_error <= bound;
            }
            pass &= ok_ratio && ok_bound;
            notes.push(format!(
                "K={order} n={}: {:.3e} -> {:.3e} ratio {ratio:.3}{}{}",
                a.date,
                a.mean_squared_error,
                b.mean_squared_error,
                if ok_ratio { "" } else { " OUT OF RANGE" },
                if ok_bound { "" } else { " ABOVE BOUND" },
            ));
        }
        if let Some(b) = small.dates[0].bound.as_ref() {
            notes.push(format!("K={order} bound at n=1, N=4000: {:.3e}", b.upper));
        }
    }
    Outcome::new(pass, notes.join("; "))
}

fn determinism(_: &mut Context) -> Outcome {
    let grid = SweepGrid {
        setting: MseSetting::Normal { rho: RHO },
        k_values: vec![1, 3],
        n_values: vec![500, 5000],
        batches: 200,
        base_seed: SEED,
        scaled_threshold: 7,
        n_ref: 500_000,
    };
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_sweep(&grid).unwrap())
    };
    let one = in_pool(1);
    let three = in_pool(3);
    let isolated = sweep_cell(&grid, 3, 5000).unwrap();
    let bits = |c: &MseCell| [c.mse_mean.to_bits(), c.mse_stderr.to_bits(), c.mse_median.to_bits()];
    let from_sweep = one.cells.iter().find(|c| c.order == 3 && c.n_paths == 5000).unwrap();
    let library_ok = one.cells.iter().zip(&three.cells).all(|(a, b)| bits(a) == bits(b)) && bits(from_sweep) == bits(&isolated);

    let dir = std::env::temp_dir().join(format!("amrmc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"base_seed":77,"setting":"lognormal","t1":1,"t2":2,"K_values":[1,2,7],"N_values":[500,2000],"batches":50,"N_ref":2000}"#,
    )
    .unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_amrmc"))
            .args(["sweep", "--threads", threads, "--config"])
            .arg(&cfg)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    let cli_ok = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    Outcome::new(
        library_ok && cli_ok,
        format!(
            "library cells bit-identical across 1/3 threads and in isolation: {library_ok}; CLI output identical for --threads 1/4: {cli_ok}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn(&mut Context) -> Outcome); 10] = [
        ("small-K MSE reproduction", table1_small_k),
        ("closed-form MSE oracle", closed_form_oracle),
        ("critical curve", critical_curve_cli),
        ("regime monotonicity", regime_monotonicity),
        ("moment identities", moment_identities),
        ("k* oracle equivalence", k_star_oracle),
        ("bound sandwich", bound_sandwich),
        ("pricer validation", pricer_validation),
        ("multiperiod error scaling", multiperiod_scaling),
        ("determinism", determinism),
    ];
    // `cargo test --test acceptance -- 2 5` runs a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut ctx = Context::new();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = check(&mut ctx);
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} ({:.1}s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
