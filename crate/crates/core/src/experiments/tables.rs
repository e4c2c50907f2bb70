use serde::Serialize;

use super::run::hypothesis_unit;
use crate::error::{Error, Result};
use crate::params::{ModelParams, Regime};
use crate::special::NeumaierSum;
use crate::theory::{c_asymptotic, c_exact, dnn_asymptotic, m_asymptotic, x_const, y_term};

/// Every degree up to this one is tabulated; beyond it the grid is
/// log-spaced.
pub const DENSE_LIMIT: u64 = 1000;
pub const POINTS_PER_DECADE: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcriticalRow {
    pub d: u64,
    pub c_exact: f64,
    pub c_asym: f64,
    pub m_exact: f64,
    pub m_asym: f64,
    pub dnn_theory: f64,
    pub dnn_asym: f64,
}

impl SubcriticalRow {
    pub fn ratio(&self) -> f64 {
        self.dnn_theory / self.dnn_asym
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisRow {
    pub d: u64,
    pub c_exact: f64,
    /// Predictor with the given constant, one value per entry of `n_list`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TheoryTable {
    Subcritical(Vec<SubcriticalRow>),
    Hypothesis { n_list: Vec<u64>, constant: f64, rows: Vec<HypothesisRow> },
}

impl TheoryTable {
    pub fn len(&self) -> usize {
        match self {
            TheoryTable::Subcritical(r) => r.len(),
            TheoryTable::Hypothesis { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `m..=min(d_max, DENSE_LIMIT)` then `POINTS_PER_DECADE` rounded
/// log-spaced degrees, always ending at `d_max`.
pub fn degree_grid(m: u64, d_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (m..=d_max.min(DENSE_LIMIT)).collect();
    if d_max > DENSE_LIMIT {
        let step = 10f64.powf(1.0 / f64::from(POINTS_PER_DECADE));
        let mut x = DENSE_LIMIT as f64 * step;
        while x < d_max as f64 {
            let d = x.round() as u64;
            if d > *out.last().unwrap() {
                out.push(d);
            }
            x *= step;
        }
        if *out.last().unwrap() != d_max {
            out.push(d_max);
        }
    }
    out
}

/// Overlay table on [`degree_grid`]. Below the critical point this holds the
/// exact and asymptotic `c`, `M` and `d_nn`; at or above it only `c(m, d)`
/// and the hypothesis predictor for each `n` (scaled by `constant`).
pub fn theory_tables(p: &ModelParams, d_max: u64, n_list: &[u64], constant: f64) -> Result<TheoryTable> {
    let m = u64::from(p.m());
    if d_max < m {
        return Err(Error::Domain(format!("d_max = {d_max} is below m = {m}")));
    }
    let grid = degree_grid(m, d_max);
    if p.regime() != Regime::Subcritical {
        if n_list.is_empty() {
            return Err(Error::InvalidParameter("hypothesis columns need at least one n".into()));
        }
        let rows = grid
            .iter()
            .map(|&d| {
                let values = n_list
                    .iter()
                    .map(|&n| hypothesis_unit(p, d, n).map_or(f64::NAN, |f| constant * f))
                    .collect();
                Ok(HypothesisRow { d, c_exact: c_exact(p, d)?, values })
            })
            .collect::<Result<_>>()?;
        return Ok(TheoryTable::Hypothesis { n_list: n_list.to_vec(), constant, rows });
    }
    let x_part = x_const(p)? / (p.am_plus_b() + 1.0);
    let mut prefix = NeumaierSum::default();
    let mut rows = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    for d in m..=d_max {
        if d > m {
            prefix.add(y_term(p, d)?);
        }
        if next.peek() != Some(&&d) {
            continue;
        }
        next.next();
        let x = d as f64;
        let c = c_exact(p, d)?;
        let weighted = (p.a() * x + p.b() + 1.0) * (x_part + prefix.value());
        rows.push(SubcriticalRow {
            d,
            c_exact: c,
            c_asym: c_asymptotic(p, d)?,
            m_exact: weighted * c,
            m_asym: m_asymptotic(p, d)?,
            dnn_theory: weighted / x,
            dnn_asym: dnn_asymptotic(p, d),
        });
    }
    Ok(TheoryTable::Subcritical(rows))
}
