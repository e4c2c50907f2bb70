//! Exact and asymptotic closed forms for the degree distribution, the
//! neighbor-degree sums and the average neighbor degree.
//!
//! All logarithms are natural. Gamma-function ratios go through
//! [`ln_gamma_ratio`] so that `c(m, d)` stays accurate for `d` up to `10^7`
//! and beyond.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, Regime};
use crate::special::{ln_gamma_ratio, NeumaierSum};

fn check_degree(p: &ModelParams, d: u64) -> Result<()> {
    if d < u64::from(p.m()) {
        return Err(Error::Domain(format!("degree {d} is below m = {}", p.m())));
    }
    Ok(())
}

fn check_slope(p: &ModelParams) -> Result<()> {
    if p.a() <= 0.0 {
        return Err(Error::InvalidParameter(
            "A = 0 makes the gamma arguments diverge".into(),
        ));
    }
    Ok(())
}

fn require_subcritical(p: &ModelParams, what: &str) -> Result<()> {
    if p.a() >= 0.5 {
        return Err(Error::Regime(format!(
            "{what} requires A < 1/2 (got A = {}); use the hypothesis predictors for A >= 1/2",
            p.a()
        )));
    }
    Ok(())
}

/// `ln Γ(m + (B+1)/A) - ln Γ(m + B/A)`, the normalizing factor shared by
/// `c(m, d)` and its asymptotics.
fn ln_norm(p: &ModelParams) -> f64 {
    let (a, b, m) = (p.a(), p.b(), p.m_f64());
    ln_gamma_ratio(m + (b + 1.0) / a, m + b / a)
}

/// `c(m, d)`: limiting fraction of vertices with degree `d`.
pub fn c_exact(p: &ModelParams, d: u64) -> Result<f64> {
    check_degree(p, d)?;
    check_slope(p)?;
    let (a, b) = (p.a(), p.b());
    let x = d as f64;
    let ln_c = ln_gamma_ratio(x + b / a, x + (b + a + 1.0) / a) + ln_norm(p) - a.ln();
    Ok(ln_c.exp())
}

/// Leading asymptotic form of `c(m, d)`, `∝ d^{-1-1/A}`.
pub fn c_asymptotic(p: &ModelParams, d: u64) -> Result<f64> {
    check_degree(p, d)?;
    check_slope(p)?;
    let a = p.a();
    let ln_c = ln_norm(p) - a.ln() - (1.0 + 1.0 / a) * (d as f64).ln();
    Ok(ln_c.exp())
}

/// Leading term `c(m, d) n` of `E N_n(d)`. The error is
/// `O(c(m,d) d^{2 + 1/A})` and is not computed.
pub fn expected_degree_count(p: &ModelParams, n: u64, d: u64) -> Result<f64> {
    Ok(c_exact(p, d)? * n as f64)
}

/// Summand `Y(i)` of the `M(d)` prefix sum, defined for `i > m`.
pub fn y_term(p: &ModelParams, i: u64) -> Result<f64> {
    if i <= u64::from(p.m()) {
        return Err(Error::Domain(format!("Y(i) needs i > m = {}, got {i}", p.m())));
    }
    let (a, b, dm) = (p.a(), p.b(), p.d() / p.m_f64());
    let x = i as f64;
    let prev = a * (x - 1.0) + b;
    if prev <= 0.0 {
        return Err(Error::Domain(format!("A(i-1) + B = {prev} is not positive at i = {i}")));
    }
    let inner = (b - dm) * x / (a * x + b + 1.0) + dm * (x - 1.0) / prev + p.m_f64();
    Ok(inner / (prev + 1.0))
}

/// Constant `X` of `M(d)`. Has a pole at `A = 1/2`.
pub fn x_const(p: &ModelParams) -> Result<f64> {
    require_subcritical(p, "X")?;
    let (a, b, m, d) = (p.a(), p.b(), p.m_f64(), p.d());
    let base = a * (m - 1.0) + b + 1.0;
    let bracket = b - d / m + (a * (m - 1.0) + 2.0 * b + 1.0) * (a * m + b + 1.0) / (1.0 - 2.0 * a);
    Ok(m / base * bracket)
}

/// `X / (Am + B + 1) + Σ_{i=m+1}^{d} Y(i)`.
fn m_bracket(p: &ModelParams, d: u64) -> Result<f64> {
    let mut sum = NeumaierSum::default();
    sum.add(x_const(p)? / (p.am_plus_b() + 1.0));
    for i in u64::from(p.m()) + 1..=d {
        sum.add(y_term(p, i)?);
    }
    Ok(sum.value())
}

/// `M(d)`, the limiting coefficient of `E S_n(d) ≈ M(d) n`. O(d) per call;
/// use [`TheoryCurve`] for many degrees.
pub fn m_exact(p: &ModelParams, d: u64) -> Result<f64> {
    require_subcritical(p, "M(d)")?;
    check_degree(p, d)?;
    check_slope(p)?;
    let x = d as f64;
    Ok((p.a() * x + p.b() + 1.0) * m_bracket(p, d)? * c_exact(p, d)?)
}

/// Leading asymptotic form of `M(d)`, `∝ ln(d) d^{-1/A}`.
pub fn m_asymptotic(p: &ModelParams, d: u64) -> Result<f64> {
    check_degree(p, d)?;
    check_slope(p)?;
    let a = p.a();
    let x = d as f64;
    Ok(p.am_plus_b() / (a * a) * (ln_norm(p) - x.ln() / a).exp() * x.ln())
}

/// `E d_nn(d) ≈ M(d) / (d c(m, d))`.
pub fn dnn_theory(p: &ModelParams, d: u64) -> Result<f64> {
    require_subcritical(p, "d_nn theory")?;
    check_degree(p, d)?;
    check_slope(p)?;
    // M(d) / (d c) with the c(m, d) factor cancelled.
    let x = d as f64;
    Ok((p.a() * x + p.b() + 1.0) * m_bracket(p, d)? / x)
}

/// `(Am + B)/A · ln d`.
pub fn dnn_asymptotic(p: &ModelParams, d: u64) -> f64 {
    p.am_plus_b() / p.a() * (d as f64).ln()
}

/// Leading term of `E W_n`, the expected sum of squared degrees.
pub fn expected_sum_squares(p: &ModelParams, n: u64) -> Result<f64> {
    require_subcritical(p, "the linear W_n law")?;
    let (a, b, m) = (p.a(), p.b(), p.m_f64());
    Ok(m / (1.0 - 2.0 * a) * (m + 4.0 * b + 1.0) * n as f64)
}

fn require_supercritical(p: &ModelParams) -> Result<()> {
    if p.a() <= 0.5 {
        return Err(Error::Regime(format!(
            "the n^(2A-1) hypothesis requires A > 1/2, got A = {}",
            p.a()
        )));
    }
    Ok(())
}

/// Supercritical hypothesis, asymptotic form:
/// `C1 (Am+B) Γ(m+B/A)/Γ(m+(B+1)/A) · d^{1/A-2} n^{2A-1}`.
pub fn dnn_hypothesis_supercritical(p: &ModelParams, d: u64, n: u64, c1: f64) -> Result<f64> {
    require_supercritical(p)?;
    check_degree(p, d)?;
    let a = p.a();
    let ln_val = -ln_norm(p) + (1.0 / a - 2.0) * (d as f64).ln() + (2.0 * a - 1.0) * (n as f64).ln();
    Ok(c1 * p.am_plus_b() * ln_val.exp())
}

/// Supercritical hypothesis, pre-asymptotic form:
/// `A C1 (Am+B) n^{2A-1} / ((Ad+B)(A(d+1)+B) d c(m,d))`.
pub fn dnn_hypothesis_supercritical_pre(
    p: &ModelParams,
    d: u64,
    n: u64,
    c1: f64,
) -> Result<f64> {
    require_supercritical(p)?;
    let (a, b) = (p.a(), p.b());
    let x = d as f64;
    let c = c_exact(p, d)?;
    Ok(a * c1 * p.am_plus_b() * (n as f64).powf(2.0 * a - 1.0)
        / ((a * x + b) * (a * (x + 1.0) + b) * x * c))
}

/// Critical (`A = 1/2`) hypothesis, leading form `C2/(2(m+1)) ln n`.
pub fn dnn_hypothesis_critical(m: u32, n: u64, c2: f64) -> f64 {
    c2 / (2.0 * (f64::from(m) + 1.0)) * (n as f64).ln()
}

/// Critical hypothesis with its finite-`d` factor, `C2 (d+2)/(2d(m+1)) ln n`.
pub fn dnn_hypothesis_critical_finite(m: u32, d: u64, n: u64, c2: f64) -> f64 {
    let x = d as f64;
    c2 * (x + 2.0) / (2.0 * x * (f64::from(m) + 1.0)) * (n as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorExponents {
    /// Exponent of `d` in the error term of `E S_n(d)`.
    pub xi: f64,
    /// Density exponent of the degree distribution, `1 + 1/A`.
    pub gamma: f64,
}

pub fn error_exponents(p: &ModelParams) -> Result<ErrorExponents> {
    let a = p.a();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "error exponents need 0 < A < 1, got {a}"
        )));
    }
    let xi = (3.0 + 1.0 / a - 4.0 * a).max(2.0 / (1.0 - a));
    Ok(ErrorExponents { xi, gamma: 1.0 + 1.0 / a })
}

/// Tabulated theory for `d = m..=d_max` in the subcritical regime.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryCurve {
    pub params: ModelParams,
    pub d_values: Vec<u64>,
    pub c_exact: Vec<f64>,
    pub c_asym: Vec<f64>,
    pub m_exact: Vec<f64>,
    pub dnn_exact: Vec<f64>,
    pub dnn_asymptotic: Vec<f64>,
    /// `Σ_{i=m+1}^{d} Y(i)`; zero at `d = m`.
    pub y_prefix: Vec<f64>,
}

impl TheoryCurve {
    pub fn build(p: &ModelParams, d_max: u64) -> Result<Self> {
        if p.regime() != Regime::Subcritical {
            return Err(Error::Regime(format!(
                "tabulated M(d) requires A < 1/2, got A = {}",
                p.a()
            )));
        }
        check_slope(p)?;
        check_degree(p, d_max)?;
        let m = u64::from(p.m());
        let x_part = x_const(p)? / (p.am_plus_b() + 1.0);
        let len = (d_max - m + 1) as usize;
        let mut curve = Self {
            params: *p,
            d_values: Vec::with_capacity(len),
            c_exact: Vec::with_capacity(len),
            c_asym: Vec::with_capacity(len),
            m_exact: Vec::with_capacity(len),
            dnn_exact: Vec::with_capacity(len),
            dnn_asymptotic: Vec::with_capacity(len),
            y_prefix: Vec::with_capacity(len),
        };
        let mut prefix = NeumaierSum::default();
        for d in m..=d_max {
            if d > m {
                prefix.add(y_term(p, d)?);
            }
            let x = d as f64;
            let c = c_exact(p, d)?;
            let bracket = x_part + prefix.value();
            let weight = p.a() * x + p.b() + 1.0;
            curve.d_values.push(d);
            curve.c_exact.push(c);
            curve.c_asym.push(c_asymptotic(p, d)?);
            curve.m_exact.push(weight * bracket * c);
            curve.dnn_exact.push(weight * bracket / x);
            curve.dnn_asymptotic.push(dnn_asymptotic(p, d));
            curve.y_prefix.push(prefix.value());
        }
        Ok(curve)
    }

    pub fn index_of(&self, d: u64) -> Option<usize> {
        let m = *self.d_values.first()?;
        let i = d.checked_sub(m)? as usize;
        (i < self.d_values.len()).then_some(i)
    }

    pub fn m_at(&self, d: u64) -> Option<f64> {
        self.index_of(d).map(|i| self.m_exact[i])
    }

    pub fn c_at(&self, d: u64) -> Option<f64> {
        self.index_of(d).map(|i| self.c_exact[i])
    }

    pub fn dnn_at(&self, d: u64) -> Option<f64> {
        self.index_of(d).map(|i| self.dnn_exact[i])
    }

    pub fn d_max(&self) -> u64 {
        *self.d_values.last().expect("curve is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32, a: f64, d: f64) -> ModelParams {
        ModelParams::new(m, a, d).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn c_exact_examples() {
        let q = p(2, 0.2, 0.3);
        assert!(rel(c_exact(&q, 2).unwrap(), 1.0 / 2.6) < 1e-13);
        assert!(rel(c_exact(&q, 3).unwrap(), 1.0 / 2.6 * 1.6 / 2.8) < 1e-13);
        assert!(rel(c_exact(&p(2, 0.25, 0.0), 2).unwrap(), 0.4) < 1e-13);
    }

    #[test]
    fn c_exact_rejects() {
        assert!(matches!(c_exact(&p(2, 0.2, 0.3), 1), Err(Error::Domain(_))));
        assert!(matches!(c_exact(&p(2, 0.0, 0.0), 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn c_asymptotic_examples() {
        let q = p(2, 0.25, 0.0);
        let r = c_exact(&q, 1_000_000).unwrap() / c_asymptotic(&q, 1_000_000).unwrap();
        assert!((r - 1.0).abs() < 1e-4);
        // exponent -1 - 1/A
        for (a, expo) in [(0.25, -5.0), (0.5, -3.0)] {
            let q = p(2, a, 0.0);
            let s = (c_asymptotic(&q, 2000).unwrap() / c_asymptotic(&q, 1000).unwrap()).log2();
            assert!((s - expo).abs() < 1e-10);
        }
    }

    #[test]
    fn expected_degree_count_examples() {
        let q = p(2, 0.2, 0.3);
        assert!(rel(expected_degree_count(&q, 100_000, 2).unwrap(), 100_000.0 / 2.6) < 1e-13);
        assert_eq!(expected_degree_count(&q, 0, 2).unwrap(), 0.0);
        let tiny = expected_degree_count(&q, 10, 200).unwrap();
        assert!(tiny > 0.0 && tiny < 1.0);
    }

    #[test]
    fn y_term_examples() {
        let q = p(2, 0.25, 0.3);
        let want = (0.85 * 3.0 / 2.75 + 0.15 * 2.0 / 1.5 + 2.0) / 2.5;
        assert!(rel(y_term(&q, 3).unwrap(), want) < 1e-14);
        assert!((y_term(&q, 3).unwrap() - 1.2509091).abs() < 1e-7);
        let q0 = p(2, 0.25, 0.0);
        let want0 = (1.0 * 5.0 / (1.25 + 2.0) + 2.0) / (1.0 + 1.0 + 1.0);
        assert!(rel(y_term(&q0, 5).unwrap(), want0) < 1e-14);
        assert!(y_term(&q, 2).is_err());
    }

    #[test]
    fn x_const_examples() {
        let q = p(2, 0.25, 0.3);
        assert!(rel(x_const(&q).unwrap(), 2.0 / 2.25 * 17.1) < 1e-13);
        assert!((x_const(&q).unwrap() - 15.2).abs() < 1e-12);
        assert!(x_const(&p(2, 0.4999999, 0.3)).unwrap() > 1e6);
        assert!(matches!(x_const(&p(2, 0.5, 0.3)), Err(Error::Regime(_))));
    }

    #[test]
    fn m_at_minimum_degree_matches_closed_form() {
        for (a, d) in [(0.25, 0.3), (0.2, 0.0), (0.4, 0.3)] {
            let q = p(2, a, d);
            let (m, b) = (2.0, q.b());
            let cmm = 1.0 / (a * m + b + 1.0);
            let closed = m * cmm / (a * (m - 1.0) + b + 1.0)
                * (b - d / m + (a * (m - 1.0) + 2.0 * b + 1.0) * (a * m + b + 1.0) / (1.0 - 2.0 * a));
            assert!(rel(m_exact(&q, 2).unwrap(), closed) < 1e-12);
        }
    }

    #[test]
    fn m_exact_examples() {
        let q = p(2, 0.25, 0.3);
        assert!((m_exact(&q, 2).unwrap() - 6.08).abs() < 1e-12);
        let (a, b, dm) = (0.25, 1.0, 0.15);
        let rhs = (a * 2.0 + b) / (a * 2.0 + b + 1.0) * m_exact(&q, 2).unwrap()
            + (b - dm) * 3.0 / (a * 2.0 + b + 1.0) * c_exact(&q, 3).unwrap()
            + ((dm + a * 2.0) * 2.0 + b * 2.0) / (a * 2.0 + b + 1.0) * c_exact(&q, 2).unwrap();
        assert!(rel(m_exact(&q, 3).unwrap(), rhs) < 1e-12);
        assert!(matches!(m_exact(&p(2, 0.5, 0.3), 3), Err(Error::Regime(_))));
        assert!(matches!(m_exact(&q, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn dnn_small_degree_dip() {
        // Frozen from an independent 30-digit evaluation.
        let q = p(2, 0.2, 0.3);
        let want = [(2, 6.9375), (3, 6.16987179487), (5, 5.90572161172), (10, 6.55929381906)];
        for (d, v) in want {
            assert!((dnn_theory(&q, d).unwrap() - v).abs() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn dnn_examples() {
        let q = p(2, 0.25, 0.3);
        assert!((dnn_theory(&q, 2).unwrap() - 7.6).abs() < 1e-12);
        let q2 = p(2, 0.2, 0.3);
        assert!((q2.am_plus_b() / q2.a() - 8.0).abs() < 1e-12);
        assert!((dnn_asymptotic(&q2, 100) - 8.0 * 100f64.ln()).abs() < 1e-12);
        assert!((dnn_asymptotic(&q2, 100) - 36.84).abs() < 0.01);
        assert_eq!(dnn_asymptotic(&q2, 1), 0.0);
    }

    #[test]
    fn dnn_equals_m_over_dc() {
        let q = p(2, 0.3, 0.2);
        for d in [2, 3, 17, 400] {
            let direct = m_exact(&q, d).unwrap() / (d as f64 * c_exact(&q, d).unwrap());
            assert!(rel(dnn_theory(&q, d).unwrap(), direct) < 1e-12);
        }
    }

    #[test]
    fn sum_squares_examples() {
        assert!(rel(expected_sum_squares(&p(2, 0.2, 0.3), 100_000).unwrap(), 26.0e5) < 1e-13);
        assert_eq!(expected_sum_squares(&p(2, 0.2, 0.3), 0).unwrap(), 0.0);
        assert!(rel(expected_sum_squares(&p(2, 0.4, 0.0), 10_000).unwrap(), 46.0e4) < 1e-13);
        assert!(expected_sum_squares(&p(2, 0.5, 0.0), 10).is_err());
    }

    #[test]
    fn supercritical_hypothesis_scaling() {
        let q = p(2, 0.6, 0.2);
        let f = |d, n| dnn_hypothesis_supercritical(&q, d, n, 1.0).unwrap();
        let d_slope = (f(200, 1000) / f(100, 1000)).log2();
        let n_slope = (f(10, 2000) / f(10, 1000)).log2();
        assert!((d_slope - (1.0 / 0.6 - 2.0)).abs() < 1e-12);
        assert!((n_slope - 0.2).abs() < 1e-12);
        // Pre-asymptotic and asymptotic forms agree for large d.
        let pre = dnn_hypothesis_supercritical_pre(&q, 100_000, 1000, 1.0).unwrap();
        let asy = f(100_000, 1000);
        assert!(rel(pre, asy) < 1e-3);
        assert!(dnn_hypothesis_supercritical(&p(2, 0.5, 0.2), 3, 10, 1.0).is_err());
        assert!(dnn_hypothesis_supercritical_pre(&p(2, 0.4, 0.2), 3, 10, 1.0).is_err());
    }

    #[test]
    fn supercritical_boundary_continuity() {
        let q = p(2, 0.5 + 1e-9, 0.2);
        let f = |d, n| dnn_hypothesis_supercritical(&q, d, n, 1.0).unwrap();
        assert!((f(1000, 10).ln() - f(10, 10).ln()).abs() < 1e-6);
        assert!((f(10, 1_000_000).ln() - f(10, 10).ln()).abs() < 1e-6);
    }

    #[test]
    fn critical_hypothesis() {
        // C2/(2(m+1)) = 1 for m = 2, C2 = 6
        let v = dnn_hypothesis_critical(2, 20, 6.0);
        assert!((v - 20f64.ln()).abs() < 1e-14);
        assert_eq!(dnn_hypothesis_critical_finite(2, 2, 20, 6.0), 2.0 * v);
        let far = dnn_hypothesis_critical_finite(2, 10_000_000, 20, 6.0);
        assert!(rel(far, v) < 1e-6);
    }

    #[test]
    fn exponents() {
        let e = error_exponents(&p(2, 0.25, 0.0)).unwrap();
        assert_eq!((e.gamma, e.xi), (5.0, 6.0));
        assert_eq!(error_exponents(&p(2, 0.5, 0.0)).unwrap().gamma, 3.0);
        let e = error_exponents(&p(2, 0.2, 0.0)).unwrap();
        assert!((e.gamma - 6.0).abs() < 1e-12 && (e.xi - 7.2).abs() < 1e-12);
        assert!(error_exponents(&p(2, 0.0, 0.0)).is_err());
        assert!(error_exponents(&p(2, 1.0, 0.0)).is_err());
    }

    #[test]
    fn curve_matches_pointwise() {
        let q = p(2, 0.25, 0.3);
        let curve = TheoryCurve::build(&q, 500).unwrap();
        assert_eq!(curve.d_values.len(), 499);
        assert_eq!(curve.y_prefix[0], 0.0);
        for d in [2, 3, 50, 500] {
            assert!(rel(curve.m_at(d).unwrap(), m_exact(&q, d).unwrap()) < 1e-12);
            assert!(rel(curve.dnn_at(d).unwrap(), dnn_theory(&q, d).unwrap()) < 1e-12);
        }
        assert!(curve.m_at(1).is_none() && curve.m_at(501).is_none());
        assert!(TheoryCurve::build(&p(2, 0.5, 0.3), 10).is_err());
        assert_eq!(TheoryCurve::build(&q, 2).unwrap().d_values, vec![2]);
    }

    #[test]
    fn curve_is_eventually_assortative() {
        // The closed form dips for the smallest degrees (minimum at d = 5 for
        // A = 0.2, D = 0.3) and increases strictly from there on.
        for (a, d) in [(0.2, 0.3), (0.25, 0.0), (0.4, 0.3), (0.1, 0.15), (0.45, 0.45)] {
            let curve = TheoryCurve::build(&p(2, a, d), 20_000).unwrap();
            let tail = &curve.dnn_exact[curve.index_of(16).unwrap()..];
            assert!(tail.windows(2).all(|w| w[1] > w[0]), "A = {a}, D = {d}");
            assert!(curve.c_exact.iter().all(|&c| c > 0.0));
            assert!(curve.m_exact.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn asymptotic_convergence_is_slow() {
        // Frozen from an independent evaluation; the approach to 1 is O(1/ln d).
        let cases = [
            (0.2, 0.3, 0.7824402575755625, 0.8135469227321427),
            (0.25, 0.0, 0.8168894439494793, 0.843063456909798),
            (0.4, 0.3, 0.9904689928752326, 0.9918344125426574),
        ];
        for (a, d, m_ratio, dnn_ratio) in cases {
            let q = p(2, a, d);
            let got = m_exact(&q, 1_000_000).unwrap() / m_asymptotic(&q, 1_000_000).unwrap();
            assert!((got / m_ratio - 1.0).abs() < 1e-6, "A={a} D={d}: {got}");
            let got = dnn_theory(&q, 10_000_000).unwrap() / dnn_asymptotic(&q, 10_000_000);
            assert!((got / dnn_ratio - 1.0).abs() < 1e-6, "A={a} D={d}: {got}");
        }
    }
}
