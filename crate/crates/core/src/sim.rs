//! Monte Carlo logical-error-rate estimation with negative-binomial stopping.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::decoder::{Pipeline, ShotDecoder, Variant};
use crate::error::{Error, Result};
use crate::nbp::WeightSet;
use crate::noise::{DepolarizingChannel, ShotSeed};
use crate::pauli::PauliVector;
use crate::toric::ToricCode;

/// Confidence level of every reported interval.
pub const CI_LEVEL: f64 = 0.975;

/// Whether the residual `e * e_hat` is a nontrivial logical operator.
///
/// Errors if `e_hat` does not reproduce the standard syndrome of `e`.
pub fn is_logical_failure(e: &PauliVector, e_hat: &PauliVector, code: &ToricCode) -> Result<bool> {
    let r = e.mul(e_hat)?;
    if !code.standard().commutes_with_all(&r)? {
        return Err(Error::Invariant("correction does not reproduce the syndrome".into()));
    }
    for l in code.logicals() {
        if r.anticommutes(l)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Root of an increasing function on `[0, 1]` by bisection.
fn bisect(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `P(Bin(n, p) >= r)` for `1 <= r <= n`.
fn binom_upper_tail(n: u64, r: u64, p: f64) -> f64 {
    beta_reg(r as f64, (n - r + 1) as f64, p)
}

/// Interval for the failure probability when sampling stopped at the
/// `failures`-th failure on shot `shots`.
///
/// Equal-tailed inversion of the negative-binomial distribution of the
/// shot count. With no failures, the one-sided bound `1 - alpha^{1/N}`.
pub fn negbin_ci(failures: u64, shots: u64, level: f64) -> (f64, f64) {
    assert!(shots >= failures, "shots {shots} < failures {failures}");
    let alpha = 1.0 - level;
    if failures == 0 {
        return zero_failure_ci(shots, alpha);
    }
    let (r, n) = (failures, shots);
    // Smaller p makes a long run more likely: P(N <= n) = P(Bin(n, p) >= r).
    let low = bisect(|p| binom_upper_tail(n, r, p), alpha / 2.0);
    // P(N >= n) = P(Bin(n - 1, p) <= r - 1) = 1 - P(Bin(n - 1, p) >= r).
    let high = if n - 1 < r {
        1.0
    } else {
        bisect(|p| binom_upper_tail(n - 1, r, p), 1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Clopper-Pearson interval for a fixed number of shots.
pub fn binomial_ci(failures: u64, shots: u64, level: f64) -> (f64, f64) {
    assert!(shots >= failures, "shots {shots} < failures {failures}");
    let alpha = 1.0 - level;
    if failures == 0 {
        return zero_failure_ci(shots, alpha);
    }
    let (r, n) = (failures, shots);
    let low = bisect(|p| binom_upper_tail(n, r, p), alpha / 2.0);
    let high = if r == n {
        1.0
    } else {
        bisect(|p| binom_upper_tail(n, r + 1, p), 1.0 - alpha / 2.0)
    };
    (low, high)
}

fn zero_failure_ci(shots: u64, alpha: f64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    (0.0, 1.0 - alpha.powf(1.0 / shots as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRule {
    pub target_failures: u64,
    pub max_shots: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            target_failures: 100,
            max_shots: 10_000_000,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.target_failures == 0 {
            return Err(Error::Config("target failures must be at least 1".into()));
        }
        if self.max_shots < self.target_failures {
            return Err(Error::Config("max shots must be at least the target failures".into()));
        }
        Ok(())
    }
}

/// One grid point of a simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    pub d: usize,
    pub epsilon: f64,
    pub variant: Variant,
    pub stop: StopRule,
    pub seed: u64,
    pub bp_iterations: Option<usize>,
    /// Recorded in the output only.
    pub weights_file: String,
}

/// One CSV row. Column order is the output schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub d: usize,
    pub epsilon: f64,
    pub variant: Variant,
    pub weights_file: String,
    pub shots: u64,
    pub failures: u64,
    pub ler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stage2_calls: u64,
    pub stage2_fraction: f64,
    pub mean_bp_iters: f64,
    pub max_bp_iters: u64,
    pub seed: u64,
    /// `ok`, or the error that aborted this point.
    pub status: String,
    pub wall_time_s: f64,
}

impl RunStats {
    fn failed(cfg: &PointConfig, err: &Error) -> Self {
        RunStats {
            d: cfg.d,
            epsilon: cfg.epsilon,
            variant: cfg.variant,
            weights_file: cfg.weights_file.clone(),
            shots: 0,
            failures: 0,
            ler: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
            stage2_calls: 0,
            stage2_fraction: 0.0,
            mean_bp_iters: 0.0,
            max_bp_iters: 0,
            seed: cfg.seed,
            status: format!("error: {err}"),
            wall_time_s: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Copy, Debug)]
struct Shot {
    failure: bool,
    stage2: bool,
    iters: usize,
}

fn run_shot(dec: &mut ShotDecoder<'_>, pipe: &Pipeline, seed: ShotSeed) -> Result<Shot> {
    let code = pipe.code();
    let e = pipe.channel().sample_error(code.num_qubits(), seed);
    let s = code.standard().syndrome(&e)?;
    let out = dec.decode(&s)?;
    // A first stage without fallback that misses the syndrome has failed.
    let failure = if !out.converged && !out.stage2 {
        true
    } else {
        is_logical_failure(&e, &out.correction, code)?
    };
    Ok(Shot {
        failure,
        // Pure first-stage variants count the calls a fallback would have made.
        stage2: out.stage2 || !out.converged,
        iters: out.bp_iterations,
    })
}

/// Runs shots `0, 1, 2, ...` until the `target_failures`-th failure or
/// `max_shots`. Shot `i` draws its error from `ShotSeed(seed, i)`, and the
/// run is cut exactly at the stopping shot, so the result does not depend
/// on `workers`.
pub fn run_point(cfg: &PointConfig, weights: Option<&WeightSet<f64>>, workers: usize) -> Result<RunStats> {
    cfg.stop.validate()?;
    let started = Instant::now();
    let code = Arc::new(ToricCode::new(cfg.d)?);
    let channel = DepolarizingChannel::new(cfg.epsilon)?;
    let pipe = Pipeline::new(code, cfg.variant, channel, weights, cfg.bp_iterations)?;
    pipe.decoder()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let (mut shots, mut failures, mut stage2, mut iter_sum, mut iter_max) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let mut block = 64u64;
    'outer: while shots < cfg.stop.max_shots {
        let len = block.min(cfg.stop.max_shots - shots);
        let range = shots..shots + len;
        let outcomes: Vec<Result<Shot>> = pool.install(|| {
            range
                .into_par_iter()
                .map_init(
                    || pipe.decoder().expect("decoder validated above"),
                    |dec, i| run_shot(dec, &pipe, ShotSeed::new(cfg.seed, i)),
                )
                .collect()
        });
        for o in outcomes {
            let shot = o?;
            shots += 1;
            failures += shot.failure as u64;
            stage2 += shot.stage2 as u64;
            iter_sum += shot.iters as u64;
            iter_max = iter_max.max(shot.iters as u64);
            if failures == cfg.stop.target_failures {
                break 'outer;
            }
        }
        block = (block * 2).min(8192);
    }

    let (ci_low, ci_high) = if failures == cfg.stop.target_failures {
        negbin_ci(failures, shots, CI_LEVEL)
    } else {
        binomial_ci(failures, shots, CI_LEVEL)
    };
    let per = |x: u64| if shots == 0 { 0.0 } else { x as f64 / shots as f64 };
    Ok(RunStats {
        d: cfg.d,
        epsilon: cfg.epsilon,
        variant: cfg.variant,
        weights_file: cfg.weights_file.clone(),
        shots,
        failures,
        ler: per(failures),
        ci_low,
        ci_high,
        stage2_calls: stage2,
        stage2_fraction: per(stage2),
        mean_bp_iters: per(iter_sum),
        max_bp_iters: iter_max,
        seed: cfg.seed,
        status: "ok".into(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// A grid of points sharing one stop rule, seed and weights file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub distances: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub variants: Vec<Variant>,
    pub stop: StopRule,
    pub seed: u64,
    pub bp_iterations: Option<usize>,
    pub weights_file: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            distances: vec![4],
            epsilons: vec![0.05],
            variants: vec![Variant::Mwpm],
            stop: StopRule::default(),
            seed: 1,
            bp_iterations: None,
            weights_file: None,
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Vec<PointConfig> {
        let mut out = Vec::new();
        for &d in &self.distances {
            for &epsilon in &self.epsilons {
                for &variant in &self.variants {
                    let weights_file = match (&self.weights_file, variant.needs_weights()) {
                        (Some(p), true) => p.display().to_string(),
                        _ => String::new(),
                    };
                    out.push(PointConfig {
                        d,
                        epsilon,
                        variant,
                        stop: self.stop,
                        seed: self.seed,
                        bp_iterations: self.bp_iterations,
                        weights_file,
                    });
                }
            }
        }
        out
    }
}

type PointKey = (usize, u64, Variant, u64, String);

fn key_of(d: usize, eps: f64, v: Variant, seed: u64, w: &str) -> PointKey {
    (d, eps.to_bits(), v, seed, w.to_string())
}

/// Runs every grid point, writing `out` after each one. Points already
/// present with status `ok` in an existing `out` are kept, not re-run.
/// A point that errors is recorded with its status and the sweep goes on.
pub fn sweep(cfg: &SweepConfig, workers: usize, out: &Path) -> Result<Vec<RunStats>> {
    cfg.stop.validate()?;
    let weights = match &cfg.weights_file {
        Some(p) if cfg.variants.iter().any(|v| v.needs_weights()) => Some(WeightSet::<f64>::load(p)?),
        _ => None,
    };
    let mut done: HashMap<PointKey, RunStats> = HashMap::new();
    if out.exists() {
        for r in read_csv(out)? {
            if r.is_ok() {
                done.insert(key_of(r.d, r.epsilon, r.variant, r.seed, &r.weights_file), r);
            }
        }
    }
    let mut rows = Vec::new();
    for p in cfg.points() {
        let key = key_of(p.d, p.epsilon, p.variant, p.seed, &p.weights_file);
        let row = match done.remove(&key) {
            Some(r) => r,
            None => {
                let w = if p.variant.needs_weights() { weights.as_ref() } else { None };
                match run_point(&p, w, workers) {
                    Ok(r) => r,
                    Err(e) => {
                        log::error!("d={} eps={} {}: {e}", p.d, p.epsilon, p.variant);
                        RunStats::failed(&p, &e)
                    }
                }
            }
        };
        log::info!(
            "d={} eps={} {}: {} failures / {} shots, stage2 {:.4}",
            row.d,
            row.epsilon,
            row.variant,
            row.failures,
            row.shots,
            row.stage2_fraction
        );
        rows.push(row);
        write_csv(out, &rows)?;
    }
    Ok(rows)
}

pub fn write_csv(path: &Path, rows: &[RunStats]) -> Result<()> {
    write_rows(std::fs::File::create(path)?, rows)
}

/// CSV with header to any writer.
pub fn write_rows<W: std::io::Write>(out: W, rows: &[RunStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<RunStats>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

#[derive(Serialize)]
struct LerPoint<'a> {
    variant: &'a str,
    d: usize,
    epsilon: f64,
    ler: f64,
    ci_low: f64,
    ci_high: f64,
    shots: u64,
    failures: u64,
}

#[derive(Serialize)]
struct Stage2Point<'a> {
    variant: &'a str,
    d: usize,
    epsilon: f64,
    stage2_fraction: f64,
    stage2_calls: u64,
    shots: u64,
}

/// Merges sweep rows into one plot-data file per figure: LER against ε and
/// second-stage fraction against ε. Rows are sorted by (variant, d, ε).
pub fn emit_plot_data(rows: &[RunStats], dir: &Path) -> Result<[PathBuf; 2]> {
    std::fs::create_dir_all(dir)?;
    let mut rows: Vec<&RunStats> = rows.iter().filter(|r| r.is_ok()).collect();
    rows.sort_by(|a, b| {
        (a.variant.name(), a.d)
            .cmp(&(b.variant.name(), b.d))
            .then(a.epsilon.total_cmp(&b.epsilon))
    });
    let ler_path = dir.join("ler_vs_epsilon.csv");
    let mut w = csv::Writer::from_path(&ler_path)?;
    for r in &rows {
        w.serialize(LerPoint {
            variant: r.variant.name(),
            d: r.d,
            epsilon: r.epsilon,
            ler: r.ler,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            shots: r.shots,
            failures: r.failures,
        })?;
    }
    w.flush()?;
    let s2_path = dir.join("stage2_fraction_vs_epsilon.csv");
    let mut w = csv::Writer::from_path(&s2_path)?;
    for r in &rows {
        w.serialize(Stage2Point {
            variant: r.variant.name(),
            d: r.d,
            epsilon: r.epsilon,
            stage2_fraction: r.stage2_fraction,
            stage2_calls: r.stage2_calls,
            shots: r.shots,
        })?;
    }
    w.flush()?;
    Ok([ler_path, s2_path])
}
