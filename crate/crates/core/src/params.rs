//! Model parameters and their mapping onto the concrete generator.
//!
//! A model of the T-subclass is described by `(m, A, B, D)` where `B` is
//! tied to the other two by `2mA + B = m`. The generator in
//! [`crate::graph`] is driven by `(m, beta, c)`: `k = floor(m/2)` pair slots
//! that copy a uniform edge with probability `beta`, plus `r = m - 2k`
//! single slots, every non-copy draw being degree-plus-`c` proportional.
//! Its one-step marginals give
//!
//! ```text
//! A = k*beta/m + (2k(1-beta) + r) / (2m + c)
//! B = (2k(1-beta) + r) * c / (2m + c)
//! D = k*beta
//! ```

use serde::Serialize;

use crate::error::{invalid, Result};

/// Smallest admissible gap `A - D/m`; below it the attachment shift `c`
/// diverges.
pub const MIN_SLOPE_GAP: f64 = 1e-9;

/// Tolerance used to classify `A = 1/2` as the critical regime.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// A < 1/2: finite degree variance, exact theory applies.
    Subcritical,
    /// A = 1/2.
    Critical,
    /// A > 1/2.
    Supercritical,
}

/// `(m, A, B, D)` with `B = m(1 - 2A)` always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    m: u32,
    a: f64,
    b: f64,
    d: f64,
}

impl ModelParams {
    pub fn new(m: u32, a: f64, d: f64) -> Result<Self> {
        if m < 1 {
            return invalid(format!("m must be >= 1, got {m}"));
        }
        if !(0.0..=1.0).contains(&a) {
            return invalid(format!("A must lie in [0, 1], got {a}"));
        }
        if !(d >= 0.0) || !d.is_finite() {
            return invalid(format!("D must be a finite value >= 0, got {d}"));
        }
        let b = f64::from(m) * (1.0 - 2.0 * a);
        Ok(Self { m, a, b, d })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn m_f64(&self) -> f64 {
        f64::from(self.m)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `Am + B`, the attachment weight of a minimum-degree vertex.
    pub fn am_plus_b(&self) -> f64 {
        self.a * self.m_f64() + self.b
    }

    pub fn regime(&self) -> Regime {
        if (self.a - 0.5).abs() <= CRITICAL_TOL {
            Regime::Critical
        } else if self.a < 0.5 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }
}

/// Concrete generator knobs. `k` and `r` are derived from `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorParams {
    m: u32,
    beta: f64,
    c: f64,
    k: u32,
    r: u32,
}

impl GeneratorParams {
    pub fn new(m: u32, beta: f64, c: f64) -> Result<Self> {
        if m < 1 {
            return invalid(format!("m must be >= 1, got {m}"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return invalid(format!("beta must lie in [0, 1], got {beta}"));
        }
        if !c.is_finite() || c <= -f64::from(m) {
            return invalid(format!("shift c must be finite and > -m = -{m}, got {c}"));
        }
        let k = m / 2;
        let r = m - 2 * k;
        // With no pair slot the copy probability has nothing to act on.
        let beta = if k == 0 { 0.0 } else { beta };
        Ok(Self { m, beta, c, k, r })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn pair_slots(&self) -> u32 {
        self.k
    }

    pub fn single_slots(&self) -> u32 {
        self.r
    }

    /// Expected number of shifted-attachment draws per step, `2k(1-beta) + r`.
    fn attachment_draws(&self) -> f64 {
        2.0 * f64::from(self.k) * (1.0 - self.beta) + f64::from(self.r)
    }

    /// Forward map onto `(A, B, D)`.
    pub fn model_params(&self) -> ModelParams {
        let m = f64::from(self.m);
        let draws = self.attachment_draws();
        let a = f64::from(self.k) * self.beta / m + draws / (2.0 * m + self.c);
        let d = f64::from(self.k) * self.beta;
        // A is in [0, 1) for every valid generator, so this cannot fail.
        ModelParams::new(self.m, a.clamp(0.0, 1.0), d)
            .expect("generator parameters map into the admissible region")
    }

    /// Intercept read directly off the generator, `(2k(1-beta) + r) c / (2m + c)`.
    /// Equals `m(1 - 2A)` algebraically.
    pub fn intercept(&self) -> f64 {
        let m = f64::from(self.m);
        self.attachment_draws() * self.c / (2.0 * m + self.c)
    }
}

/// Open interval of `A` reachable by the generator for given `(m, D)`:
/// `D/m < A < 1 - D/m`.
pub fn feasible_a_interval(m: u32, d: f64) -> Result<(f64, f64)> {
    let k = m / 2;
    if m < 1 {
        return invalid("m must be >= 1");
    }
    if !(d >= 0.0) {
        return invalid(format!("D must be >= 0, got {d}"));
    }
    if d > f64::from(k) {
        return invalid(format!(
            "D = {d} exceeds the number of pair slots k = {k} for m = {m}"
        ));
    }
    let mf = f64::from(m);
    Ok((d / mf, 1.0 - d / mf))
}

/// Inverse map: the generator realizing `(m, A, D)`.
pub fn derive_generator_params(m: u32, a: f64, d: f64) -> Result<GeneratorParams> {
    // Validates the (m, A, D) ranges themselves.
    ModelParams::new(m, a, d)?;
    let k = m / 2;
    if k == 0 && d > 0.0 {
        return invalid("m >= 2 is required for D > 0 (a triangle step needs two edge slots)");
    }
    let (lo, hi) = feasible_a_interval(m, d)?;
    let mf = f64::from(m);
    let gap = a - d / mf;
    if gap < MIN_SLOPE_GAP {
        return invalid(format!(
            "A = {a} must exceed D/m = {lo} (admissible A-interval for m = {m}, D = {d} is ({lo}, {hi}))"
        ));
    }
    let beta = if k == 0 { 0.0 } else { d / f64::from(k) };
    let draws = 2.0 * f64::from(k) * (1.0 - beta) + f64::from(m - 2 * k);
    let c = draws / gap - 2.0 * mf;
    if !(c > -mf) {
        return invalid(format!(
            "A = {a} gives shift c = {c} <= -m (admissible A-interval for m = {m}, D = {d} is ({lo}, {hi}))"
        ));
    }
    GeneratorParams::new(m, beta, c)
}

/// Forward map, `(m, beta, c) -> (A, B, D)`.
pub fn derive_model_params(g: &GeneratorParams) -> ModelParams {
    g.model_params()
}
