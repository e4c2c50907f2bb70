//! Built-in figure scenarios and the checks run by `--check`.

use serde::Serialize;

use super::run::ScenarioResult;
use super::scenario::Scenario;
use super::tables::TheoryTable;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 9] =
    ["fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6a", "fig6b"];

pub fn preset_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => include_str!("../../scenarios/fig1a.json"),
        "fig1b" => include_str!("../../scenarios/fig1b.json"),
        "fig2" => include_str!("../../scenarios/fig2.json"),
        "fig3" => include_str!("../../scenarios/fig3.json"),
        "fig4" => include_str!("../../scenarios/fig4.json"),
        "fig5a" => include_str!("../../scenarios/fig5a.json"),
        "fig5b" => include_str!("../../scenarios/fig5b.json"),
        "fig6a" => include_str!("../../scenarios/fig6a.json"),
        "fig6b" => include_str!("../../scenarios/fig6b.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<Scenario> {
    let text = preset_json(name).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown preset {name:?}; expected one of {}", PRESET_NAMES.join(", ")))
    })?;
    Scenario::from_json(text)
}

/// Relative tolerance of the subcritical `d_nn` agreement.
pub const DNN_REL_TOL: f64 = 0.10;
/// Pooled `N(d)` needed for a degree to count as populated.
pub const POPULATED_MIN: u64 = 500;
pub const BELOW_THEORY_FRACTION: f64 = 0.90;
pub const W_REL_TOL: f64 = 0.05;
pub const CCDF_SLOPE_TOL: f64 = 0.3;
pub const SWEEP_MAX_VARIATION: f64 = 0.15;
/// Clustering window, tolerance and pooled support.
pub const CLUSTERING_DEGREES: (u64, u64) = (10, 100);
pub const CLUSTERING_REL_TOL: f64 = 0.25;
pub const CLUSTERING_MIN_COUNT: u64 = 100;
pub const CRITICAL_MAX_SLOPE: f64 = 0.08;
pub const CRITICAL_MIN_CORRELATION: f64 = 0.99;
pub const SUPER_N_SLOPE_TOL: f64 = 0.1;
pub const SUPER_D_SLOPE_TOL: f64 = 0.15;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Degrees with pooled `N(d) >= POPULATED_MIN` at the largest `n`, as
/// `(d, mean, theory)`.
pub fn populated_points(result: &ScenarioResult, variant: usize) -> Vec<(u64, f64, f64)> {
    result.variants[variant]
        .largest()
        .curve
        .iter()
        .filter(|p| p.pooled_count >= POPULATED_MIN)
        .filter_map(|p| p.theory.map(|t| (p.d, p.mean, t)))
        .collect()
}

fn worst_relative(points: &[(u64, f64, f64)]) -> (u64, f64) {
    points
        .iter()
        .map(|&(d, y, t)| (d, (y / t - 1.0).abs()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
}

fn check_dnn_close(result: &ScenarioResult) -> Check {
    let pts = populated_points(result, 0);
    let (d, worst) = worst_relative(&pts);
    check(
        "dnn_within_theory",
        !pts.is_empty() && worst <= DNN_REL_TOL,
        format!("{} populated degrees, worst relative gap {worst:.4} at d = {d} (tol {DNN_REL_TOL})", pts.len()),
    )
}

fn check_w(result: &ScenarioResult) -> Check {
    let c = result.variants[0].largest();
    let rel = c.w_theory.map(|t| (c.w_mean / t - 1.0).abs());
    check(
        "sum_squares",
        rel.is_some_and(|r| r <= W_REL_TOL),
        format!("W/n = {:.4}, theory {:?}, relative gap {rel:?}", c.w_mean / c.n as f64, c.w_theory.map(|t| t / c.n as f64)),
    )
}

fn check_below(result: &ScenarioResult) -> Check {
    let pts = populated_points(result, 0);
    let below = pts.iter().filter(|p| p.1 <= p.2).count();
    let frac = below as f64 / pts.len().max(1) as f64;
    check(
        "dnn_below_theory",
        !pts.is_empty() && frac >= BELOW_THEORY_FRACTION,
        format!("{below}/{} populated degrees below theory ({frac:.3}, need {BELOW_THEORY_FRACTION})", pts.len()),
    )
}

fn check_ccdf(result: &ScenarioResult) -> Check {
    let v = &result.variants[0];
    let target = -1.0 / v.params.a();
    let fit = v.largest().ccdf_slope;
    check(
        "ccdf_slope",
        fit.is_some_and(|f| (f.exponent - target).abs() <= CCDF_SLOPE_TOL),
        format!("slope {:?}, target {target:.3} ± {CCDF_SLOPE_TOL}", fit.map(|f| f.exponent)),
    )
}

fn check_err_decreasing(result: &ScenarioResult) -> Vec<Check> {
    let mut out = Vec::new();
    for v in &result.variants {
        let errs: Vec<f64> = v.cells.iter().map(|c| c.probe.err.unwrap_or(f64::NAN)).collect();
        let ok = errs.windows(2).all(|w| w[1] < w[0]);
        out.push(check(&format!("err_decreasing_A{}", v.label), ok, format!("err(d0) by n: {errs:?}")));
    }
    let last = |label: f64| {
        result
            .variants
            .iter()
            .find(|v| (v.label - label).abs() < 1e-12)
            .and_then(|v| v.largest().probe.err)
    };
    if let (Some(lo), Some(hi)) = (last(0.2), last(0.4)) {
        out.push(check("slower_at_larger_A", hi > lo, format!("err at largest n: A=0.4 {hi:.4}, A=0.2 {lo:.4}")));
    }
    out
}

fn check_sweep(result: &ScenarioResult) -> Vec<Check> {
    let Some(f) = &result.sweep_fit else {
        return vec![check("sweep_fit", false, "no sweep fit".into())];
    };
    vec![
        check("sweep_slope_positive", f.slope > 0.0, format!("slope {:.4} ± {:.4}", f.slope, f.stderr)),
        check(
            "sweep_nearly_flat",
            f.relative_variation < SWEEP_MAX_VARIATION,
            format!("relative variation {:.4} (max {SWEEP_MAX_VARIATION})", f.relative_variation),
        ),
        check(
            "sweep_slope_matches_theory",
            f.theory_slope.is_some_and(|t| (f.slope - t).abs() <= 3.0 * f.stderr),
            format!("slope {:.4} ± {:.4}, theory {:?}", f.slope, f.stderr, f.theory_slope),
        ),
    ]
}

/// `(d, d C(d), limit)` over the clustering window for the variant whose
/// label equals `label`.
pub fn clustering_points(result: &ScenarioResult, label: f64) -> Option<Vec<(u64, f64, f64)>> {
    let v = result.variants.iter().find(|v| (v.label - label).abs() < 1e-12)?;
    let p = v.params;
    let limit = 2.0 * p.d() / (p.a() * p.m_f64());
    let (lo, hi) = CLUSTERING_DEGREES;
    Some(
        v.largest()
            .clustering
            .iter()
            .filter(|r| r.0 >= lo && r.0 <= hi && r.2 >= CLUSTERING_MIN_COUNT)
            .map(|&(d, c, _)| (d, d as f64 * c, limit))
            .collect(),
    )
}

fn check_clustering(result: &ScenarioResult) -> Check {
    let pts = clustering_points(result, 0.3).unwrap_or_default();
    let (d, worst) = worst_relative(&pts);
    check(
        "clustering_spectrum",
        !pts.is_empty() && worst <= CLUSTERING_REL_TOL,
        format!("{} degrees in window, worst relative gap {worst:.4} at d = {d}", pts.len()),
    )
}

fn check_d_slope(result: &ScenarioResult, target: f64, tol: f64) -> Check {
    let fit = result.variants[0].largest().d_slope;
    check(
        "d_slope",
        fit.is_some_and(|f| (f.exponent - target).abs() <= tol),
        format!("slope {:?}, target {target:.4} ± {tol}", fit.map(|f| f.exponent)),
    )
}

fn check_hypothesis(result: &ScenarioResult) -> Check {
    check(
        "shared_constant",
        result.hypothesis.as_ref().is_some_and(|h| h.value.is_finite() && h.value > 0.0),
        format!("{:?}", result.hypothesis),
    )
}

/// Checks for a simulated preset.
pub fn check_preset(name: &str, result: &ScenarioResult) -> Vec<Check> {
    let a = result.variants.first().map_or(f64::NAN, |v| v.params.a());
    match name {
        "fig1a" => vec![check_dnn_close(result), check_w(result)],
        "fig1b" => vec![check_below(result), check_ccdf(result)],
        "fig2" => check_err_decreasing(result),
        "fig4" => {
            let mut v = check_sweep(result);
            v.push(check_clustering(result));
            v
        }
        "fig5a" => vec![check_d_slope(result, 0.0, CRITICAL_MAX_SLOPE), check_hypothesis(result)],
        "fig6a" => {
            let r = result.variants[0].ln_n_correlation;
            vec![
                check(
                    "ln_n_growth",
                    r.is_some_and(|r| r >= CRITICAL_MIN_CORRELATION),
                    format!("correlation with ln n {r:?} (min {CRITICAL_MIN_CORRELATION})"),
                ),
                check_hypothesis(result),
            ]
        }
        "fig5b" => vec![check_d_slope(result, 1.0 / a - 2.0, SUPER_D_SLOPE_TOL), check_hypothesis(result)],
        "fig6b" => {
            let fit = result.variants[0].n_slope;
            let target = 2.0 * a - 1.0;
            vec![
                check(
                    "n_slope",
                    fit.is_some_and(|f| (f.exponent - target).abs() <= SUPER_N_SLOPE_TOL),
                    format!("slope {:?}, target {target:.3} ± {SUPER_N_SLOPE_TOL}", fit.map(|f| f.exponent)),
                ),
                check_hypothesis(result),
            ]
        }
        _ => Vec::new(),
    }
}

/// Checks for a theory-only table: the exact/asymptotic ratio approaches 1
/// slowly, being still far from it at `10^2` and close at the largest `d`.
pub fn check_theory(table: &TheoryTable) -> Vec<Check> {
    let TheoryTable::Subcritical(rows) = table else {
        return vec![check("regime", false, "expected subcritical rows".into())];
    };
    let gaps: Vec<(u64, f64)> = rows
        .iter()
        .filter(|r| r.d >= 100 && r.d.is_power_of_ten())
        .map(|r| (r.d, (r.ratio() - 1.0).abs()))
        .collect();
    let monotone = gaps.windows(2).all(|w| w[1].1 < w[0].1);
    vec![check(
        "asymptotic_convergence",
        gaps.len() >= 2 && monotone,
        format!("|dnn_theory/dnn_asym - 1| by decade: {gaps:?}"),
    )]
}

trait PowerOfTen {
    fn is_power_of_ten(self) -> bool;
}

impl PowerOfTen for u64 {
    fn is_power_of_ten(self) -> bool {
        let mut x = self;
        while x >= 10 && x % 10 == 0 {
            x /= 10;
        }
        x == 1
    }
}
