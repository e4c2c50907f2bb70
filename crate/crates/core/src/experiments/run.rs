use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{correlation, fit_power_exponent, fit_power_exponent_weighted, fit_scale, mean_stderr, weighted_line, PowerFit};
use super::scenario::{Output, Scenario, Sweep, Variant, DEFAULT_MAX_WORK};
use crate::error::{Error, Result};
use crate::graph::generate_with;
use crate::metrics::{clustering, degree_profile, log_binned_curve, DegreeProfile};
use crate::params::{ModelParams, Regime};
use crate::theory::{
    dnn_hypothesis_critical_finite, dnn_hypothesis_supercritical_pre, expected_sum_squares, TheoryCurve,
};

/// Environment variable holding the worker count for scenario runs.
pub const WORKERS_ENV: &str = "PA_ASSORT_WORKERS";

/// Bins per decade used by every log-log slope fit.
pub const SLOPE_BINS_PER_DECADE: u32 = 10;

/// Smallest degree and pooled tail size of the CCDF fit window.
pub const CCDF_MIN_DEGREE: u64 = 10;
pub const CCDF_MIN_TAIL: u64 = 50;

pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// RNG of one run. Streams never collide for fewer than 2^16 variants,
/// 2^16 sizes and 2^32 seeds.
pub fn run_rng(root_seed: u64, variant: usize, n_index: usize, seed_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(((variant as u64) << 48) | ((n_index as u64) << 32) | u64::from(seed_index));
    rng
}

struct RunRecord {
    profile: DegreeProfile,
    clustering: Option<Vec<(u64, f64, u64)>>,
    triangles: Option<u64>,
}

/// Per-seed scalars, one row per run.
#[derive(Debug, Clone, Serialize)]
pub struct RawRow {
    pub label: f64,
    pub n: usize,
    pub seed: u32,
    pub dnn_d0: Option<f64>,
    pub count_d0: u64,
    pub w: u64,
    pub max_degree: u64,
    pub triangles: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub d: u64,
    /// `N(d)` summed over seeds.
    pub pooled_count: u64,
    /// Seeds with at least one vertex of degree `d`.
    pub seeds_present: u32,
    /// Mean of per-seed `d_nn(d)` over the seeds where it is defined.
    pub mean: f64,
    pub stderr: Option<f64>,
    /// `Σ S(d) / (d Σ N(d))` over seeds.
    pub pooled: f64,
    /// Theory value or fitted hypothesis; filled in after aggregation.
    pub theory: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub d0: u64,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub seeds_present: u32,
    pub theory: Option<f64>,
    /// `|mean - theory|`, the error of the seed-averaged value.
    pub err: Option<f64>,
    /// Mean over seeds of `|d_nn(d0) - theory|`.
    pub seed_err: Option<f64>,
    pub seed_err_stderr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub n: usize,
    pub curve: Vec<CurvePoint>,
    pub probe: Probe,
    pub w_mean: f64,
    pub w_stderr: Option<f64>,
    /// `E W_n` for A < 1/2.
    pub w_theory: Option<f64>,
    /// `(d, pooled mean local clustering, pooled N(d))`.
    pub clustering: Vec<(u64, f64, u64)>,
    /// `(d, pooled fraction with degree >= d, pooled tail count)`.
    pub ccdf: Vec<(u64, f64, u64)>,
    pub ccdf_slope: Option<PowerFit>,
    /// Log-log slope of `d_nn(d)` over the scenario's slope range.
    pub d_slope: Option<PowerFit>,
}

impl Cell {
    pub fn point(&self, d: u64) -> Option<&CurvePoint> {
        self.curve.binary_search_by_key(&d, |p| p.d).ok().map(|i| &self.curve[i])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantResult {
    pub label: f64,
    pub params: ModelParams,
    pub cells: Vec<Cell>,
    /// Power-law fit of the probe mean against `n`.
    pub n_slope: Option<PowerFit>,
    /// Correlation of the probe mean with `ln n`.
    pub ln_n_correlation: Option<f64>,
}

impl VariantResult {
    pub fn cell(&self, n: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.n == n)
    }

    pub fn largest(&self) -> &Cell {
        self.cells.iter().max_by_key(|c| c.n).expect("variants always hold at least one cell")
    }
}

/// Least-squares line of the probe mean against the swept parameter.
#[derive(Debug, Clone, Serialize)]
pub struct SweepFit {
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// `(max - min) / mean` of the probe means.
    pub relative_variation: f64,
    /// Slope of the same line through the theory values, where available.
    pub theory_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisRegime {
    Supercritical,
    Critical,
}

#[derive(Debug, Clone, Serialize)]
pub struct FittedConstant {
    pub regime: HypothesisRegime,
    pub value: f64,
    /// Standard error from the residuals of the scaling fit.
    pub stderr: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub variants: Vec<VariantResult>,
    pub sweep_fit: Option<SweepFit>,
    pub hypothesis: Option<FittedConstant>,
    pub raw: Vec<RawRow>,
}

fn run_one(s: &Scenario, variant: &Variant, vi: usize, ni: usize, n: usize, seed: u32) -> Result<RunRecord> {
    let gp = variant.generator.as_ref().ok_or_else(|| {
        Error::InvalidParameter("theory-only variants cannot be simulated".into())
    })?;
    let g = generate_with(gp, n, &mut run_rng(s.root_seed, vi, ni, seed))?;
    let profile = degree_profile(&g);
    let (clustering, triangles) = if s.wants(Output::Clustering) {
        let c = clustering(&g);
        (Some(c.by_degree), Some(c.triangles))
    } else {
        (None, None)
    };
    Ok(RunRecord { profile, clustering, triangles })
}

fn aggregate_curve(runs: &[RunRecord]) -> Vec<CurvePoint> {
    let max_d = runs.iter().map(|r| r.profile.max_degree()).max().unwrap_or(0);
    let mut out = Vec::new();
    for d in 1..=max_d {
        let mut values = Vec::new();
        let (mut pooled_n, mut pooled_s) = (0u64, 0u64);
        for r in runs {
            if let Some(v) = r.profile.dnn(d) {
                values.push(v);
            }
            pooled_n += r.profile.count(d);
            pooled_s += r.profile.neighbor_sum(d);
        }
        if values.is_empty() {
            continue;
        }
        let (mean, stderr) = mean_stderr(&values);
        out.push(CurvePoint {
            d,
            pooled_count: pooled_n,
            seeds_present: values.len() as u32,
            mean,
            stderr,
            pooled: pooled_s as f64 / (pooled_n as f64 * d as f64),
            theory: None,
        });
    }
    out
}

fn pooled_clustering(runs: &[RunRecord]) -> Vec<(u64, f64, u64)> {
    let mut acc: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for rows in runs.iter().filter_map(|r| r.clustering.as_ref()) {
        for &(d, c, count) in rows {
            let e = acc.entry(d).or_default();
            e.0 += c * count as f64;
            e.1 += count;
        }
    }
    acc.into_iter().map(|(d, (sum, count))| (d, sum / count as f64, count)).collect()
}

fn pooled_ccdf(runs: &[RunRecord]) -> Vec<(u64, f64, u64)> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut total = 0u64;
    for r in runs {
        total += r.profile.n;
        for d in r.profile.degrees() {
            *counts.entry(d).or_default() += r.profile.count(d);
        }
    }
    let mut tail = 0u64;
    let mut out: Vec<_> = counts
        .into_iter()
        .rev()
        .map(|(d, c)| {
            tail += c;
            (d, tail as f64 / total as f64, tail)
        })
        .collect();
    out.reverse();
    out
}

/// Fit of the CCDF tail: degrees `>= CCDF_MIN_DEGREE` with at least
/// `CCDF_MIN_TAIL` pooled vertices at or above them, log-binned.
pub fn ccdf_slope(ccdf: &[(u64, f64, u64)]) -> Option<PowerFit> {
    let pts: Vec<_> = ccdf
        .iter()
        .filter(|&&(d, _, tail)| d >= CCDF_MIN_DEGREE && tail >= CCDF_MIN_TAIL)
        .map(|&(d, f, _)| (d as f64, f, 1.0))
        .collect();
    binned_fit(&pts, false)
}

/// Log-log slope of `d_nn(d)` over `[lo, hi]` with pooled `N(d) >= support`,
/// on log bins weighted by `N(d)`.
pub fn dnn_slope(curve: &[CurvePoint], (lo, hi): (u64, u64), support: u64) -> Option<PowerFit> {
    let pts: Vec<_> = curve
        .iter()
        .filter(|p| p.d >= lo && p.d <= hi && p.pooled_count >= support.max(1))
        .map(|p| (p.d as f64, p.mean, p.pooled_count as f64))
        .collect();
    binned_fit(&pts, true)
}

fn binned_fit(pts: &[(f64, f64, f64)], weighted: bool) -> Option<PowerFit> {
    let bins = log_binned_curve(pts, SLOPE_BINS_PER_DECADE).ok()?;
    let xs: Vec<_> = bins.iter().map(|b| (b.center, b.mean, if weighted { b.weight } else { 1.0 })).collect();
    fit_power_exponent_weighted(&xs).ok()
}

fn build_cell(s: &Scenario, variant: &Variant, n: usize, runs: &[RunRecord], theory: Option<&TheoryCurve>) -> Cell {
    let mut curve = aggregate_curve(runs);
    if let Some(t) = theory {
        for p in &mut curve {
            p.theory = t.dnn_at(p.d);
        }
    }
    let d0 = s.probe_degree();
    let per_seed: Vec<f64> = runs.iter().filter_map(|r| r.profile.dnn(d0)).collect();
    let (mean, stderr) = if per_seed.is_empty() { (f64::NAN, None) } else { mean_stderr(&per_seed) };
    let probe_theory = theory.and_then(|t| t.dnn_at(d0));
    let (seed_err, seed_err_stderr) = match probe_theory {
        Some(th) if !per_seed.is_empty() => {
            let errs: Vec<f64> = per_seed.iter().map(|v| (v - th).abs()).collect();
            let (e, se) = mean_stderr(&errs);
            (Some(e), se)
        }
        _ => (None, None),
    };
    let ws: Vec<f64> = runs.iter().map(|r| r.profile.w as f64).collect();
    let (w_mean, w_stderr) = mean_stderr(&ws);
    let w_theory = (variant.model.regime() == Regime::Subcritical)
        .then(|| expected_sum_squares(&variant.model, n as u64).ok())
        .flatten();
    let ccdf = pooled_ccdf(runs);
    Cell {
        n,
        d_slope: dnn_slope(&curve, s.slope_range, s.support_threshold),
        ccdf_slope: ccdf_slope(&ccdf),
        ccdf,
        curve,
        probe: Probe {
            d0,
            mean,
            stderr,
            seeds_present: per_seed.len() as u32,
            theory: probe_theory,
            err: probe_theory.map(|th| (mean - th).abs()),
            seed_err,
            seed_err_stderr,
        },
        w_mean,
        w_stderr,
        w_theory,
        clustering: pooled_clustering(runs),
    }
}

fn raw_rows(label: f64, n: usize, d0: u64, runs: &[RunRecord]) -> impl Iterator<Item = RawRow> + '_ {
    runs.iter().enumerate().map(move |(i, r)| RawRow {
        label,
        n,
        seed: i as u32,
        dnn_d0: r.profile.dnn(d0),
        count_d0: r.profile.count(d0),
        w: r.profile.w,
        max_degree: r.profile.max_degree(),
        triangles: r.triangles,
    })
}

fn probe_fits(cells: &[Cell]) -> (Option<PowerFit>, Option<f64>) {
    let pts: Vec<_> = cells
        .iter()
        .filter(|c| c.probe.mean > 0.0)
        .map(|c| (c.n as f64, c.probe.mean))
        .collect();
    let slope = fit_power_exponent(&pts).ok();
    let ln_n: Vec<_> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<_> = pts.iter().map(|p| p.1).collect();
    (slope, correlation(&ln_n, &ys))
}

fn sweep_fit(s: &Scenario, variants: &[VariantResult]) -> Option<SweepFit> {
    if !matches!(s.sweep, Some(Sweep::D(_) | Sweep::A(_))) || variants.len() < 3 {
        return None;
    }
    let n = *s.n_list.iter().max()?;
    let pts: Vec<(f64, f64, Option<f64>)> = variants
        .iter()
        .filter_map(|v| v.cell(n).map(|c| (v.label, c.probe.mean, c.probe.theory)))
        .filter(|p| p.1.is_finite())
        .collect();
    let xs: Vec<_> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<_> = pts.iter().map(|p| p.1).collect();
    let ones = vec![1.0; xs.len()];
    let (slope, intercept, stderr) = weighted_line(&xs, &ys, &ones).ok()?;
    let theory: Option<Vec<f64>> = pts.iter().map(|p| p.2).collect();
    let theory_slope = theory.and_then(|t| weighted_line(&xs, &t, &ones).ok()).map(|f| f.0);
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    Some(SweepFit { n, slope, intercept, stderr, relative_variation: (hi - lo) / mean, theory_slope })
}

/// Hypothesis predictor with unit constant: the pre-asymptotic form above
/// the critical point, the finite-`d` form at it.
pub fn hypothesis_unit(p: &ModelParams, d: u64, n: u64) -> Option<f64> {
    match p.regime() {
        Regime::Supercritical => dnn_hypothesis_supercritical_pre(p, d, n, 1.0).ok(),
        Regime::Critical => Some(dnn_hypothesis_critical_finite(p.m(), d, n, 1.0)),
        Regime::Subcritical => None,
    }
}

fn regime_matches(p: &ModelParams, regime: HypothesisRegime) -> bool {
    matches!(
        (p.regime(), regime),
        (Regime::Supercritical, HypothesisRegime::Supercritical) | (Regime::Critical, HypothesisRegime::Critical)
    )
}

/// One constant scaling the hypothesis predictor onto every populated
/// `(d, n)` point with `m < d <= slope_range.1`, over all matching variants.
pub fn fit_hypothesis_constant(result: &ScenarioResult, regime: HypothesisRegime) -> Result<FittedConstant> {
    let s = &result.scenario;
    let matching: Vec<_> = result.variants.iter().filter(|v| regime_matches(&v.params, regime)).collect();
    if matching.is_empty() {
        return Err(Error::Regime(format!("scenario {} has no {regime:?} runs", s.name)));
    }
    let mut pairs = Vec::new();
    for v in matching {
        let m = u64::from(v.params.m());
        for c in &v.cells {
            for p in &c.curve {
                if p.d > m && p.d <= s.slope_range.1 && p.pooled_count >= s.support_threshold.max(1) {
                    if let Some(f) = hypothesis_unit(&v.params, p.d, c.n as u64) {
                        pairs.push((f, p.mean));
                    }
                }
            }
        }
    }
    let value = fit_scale(&pairs)?;
    let k = pairs.len() as f64;
    let stderr = (pairs.len() > 1).then(|| {
        let rss: f64 = pairs.iter().map(|(f, y)| (y - value * f).powi(2)).sum();
        let sff: f64 = pairs.iter().map(|(f, _)| f * f).sum();
        (rss / (k - 1.0) / sff).sqrt()
    });
    Ok(FittedConstant { regime, value, stderr, points: pairs.len() })
}

fn attach_hypothesis(result: &mut ScenarioResult) {
    let regime = if result.variants.iter().any(|v| v.params.regime() == Regime::Supercritical) {
        HypothesisRegime::Supercritical
    } else if result.variants.iter().any(|v| v.params.regime() == Regime::Critical) {
        HypothesisRegime::Critical
    } else {
        return;
    };
    let Ok(fc) = fit_hypothesis_constant(result, regime) else { return };
    for v in &mut result.variants {
        if !regime_matches(&v.params, regime) {
            continue;
        }
        for c in &mut v.cells {
            let n = c.n as u64;
            for p in &mut c.curve {
                if p.d >= u64::from(v.params.m()) {
                    p.theory = hypothesis_unit(&v.params, p.d, n).map(|f| fc.value * f);
                }
            }
            c.probe.theory = hypothesis_unit(&v.params, c.probe.d0, n).map(|f| fc.value * f);
            c.probe.err = c.probe.theory.map(|t| (c.probe.mean - t).abs());
        }
    }
    result.hypothesis = Some(fc);
}

/// Runs every `(variant, n, seed)` of the scenario on a pool of
/// [`worker_count`] threads and aggregates in a fixed order.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    run_scenario_with_workers(s, worker_count())
}

pub fn run_scenario_with_workers(s: &Scenario, workers: usize) -> Result<ScenarioResult> {
    s.validate()?;
    if s.theory_only() {
        return Err(Error::InvalidParameter(format!(
            "scenario {} only requests theory tables; nothing to simulate",
            s.name
        )));
    }
    let cap = s.max_work.unwrap_or(DEFAULT_MAX_WORK);
    if s.work() > cap {
        return Err(Error::SizeCap(format!(
            "scenario {} needs {} vertex insertions, cap is {cap}",
            s.name,
            s.work()
        )));
    }
    let variants = s.variants()?;
    let mut jobs = Vec::new();
    for vi in 0..variants.len() {
        for (ni, &n) in s.n_list.iter().enumerate() {
            for seed in 0..s.seeds {
                jobs.push((vi, ni, n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(vi, ni, n, seed)| run_one(s, &variants[vi], vi, ni, n, seed))
            .collect::<Result<_>>()
    })?;

    let per_cell = s.seeds as usize;
    let mut out = Vec::with_capacity(variants.len());
    let mut raw = Vec::new();
    let mut chunks = records.chunks(per_cell);
    for v in &variants {
        let mut cell_runs = Vec::new();
        for &n in &s.n_list {
            cell_runs.push((n, chunks.next().expect("one chunk per (variant, n)")));
        }
        let max_d = cell_runs
            .iter()
            .flat_map(|(_, runs)| runs.iter().map(|r| r.profile.max_degree()))
            .max()
            .unwrap_or(0)
            .max(s.probe_degree());
        let theory = match v.model.regime() {
            Regime::Subcritical if v.model.a() > 0.0 => Some(TheoryCurve::build(&v.model, max_d)?),
            _ => None,
        };
        let mut cells = Vec::new();
        for (n, runs) in cell_runs {
            raw.extend(raw_rows(v.label, n, s.probe_degree(), runs));
            cells.push(build_cell(s, v, n, runs, theory.as_ref()));
        }
        let (n_slope, ln_n_correlation) = probe_fits(&cells);
        out.push(VariantResult { label: v.label, params: v.model, cells, n_slope, ln_n_correlation });
    }
    let mut result = ScenarioResult {
        sweep_fit: sweep_fit(s, &out),
        scenario: s.clone(),
        variants: out,
        hypothesis: None,
        raw,
    };
    attach_hypothesis(&mut result);
    Ok(result)
}
