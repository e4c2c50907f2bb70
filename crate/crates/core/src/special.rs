//! Special-function helpers.
//!
//! `ln Γ(x + δ) - ln Γ(x)` at large `x` loses most of its digits when formed
//! as a difference of two `ln Γ` values (each is `O(x ln x)`), which breaks
//! the `c(m, d)` ratio identity beyond `d ~ 10^4`. [`ln_gamma_ratio`] evaluates
//! the difference directly from the Stirling series.

/// `B_{2k} / (2k (2k - 1))` for k = 1..=7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// Below this argument the series is not used; arguments are shifted up.
const SERIES_MIN: f64 = 20.0;

fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    let mut pow = inv;
    for coef in STIRLING {
        acc += coef * pow;
        pow *= inv2;
    }
    acc
}

/// `ln Γ(z1) - ln Γ(z2)` for `z1, z2 > 0`.
pub fn ln_gamma_ratio(z1: f64, z2: f64) -> f64 {
    assert!(z1 > 0.0 && z2 > 0.0, "ln_gamma_ratio needs positive arguments");
    let delta = z1 - z2;
    if delta == 0.0 {
        return 0.0;
    }
    // Γ(z) = Γ(z + N) / (z (z+1) ... (z+N-1))
    let lo = z1.min(z2);
    let shift = if lo < SERIES_MIN { (SERIES_MIN - lo).ceil() } else { 0.0 };
    let mut acc = 0.0;
    let mut i = 0.0;
    while i < shift {
        acc -= (delta / (z2 + i)).ln_1p();
        i += 1.0;
    }
    let x = z2 + shift;
    // (x+δ-1/2) ln(x+δ) - (x-1/2) ln x - δ, rearranged to avoid cancellation.
    acc += delta * x.ln() + (x + delta - 0.5) * (delta / x).ln_1p() - delta;
    acc + stirling_tail(x + delta) - stirling_tail(x)
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
