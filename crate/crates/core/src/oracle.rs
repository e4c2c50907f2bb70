//! Deterministic integration of the expectation recurrences for `E N_n(d)`
//! and `E S_n(d)`, used to check the closed forms of [`crate::theory`]
//! without simulation noise.
//!
//! Both recurrences are stepped from the exact seed-graph state at
//! `n_0 = m + 1` with all `O(·)` terms dropped. `E W_n` is replaced by its
//! leading term `m(m + 4B + 1) n / (1 - 2A)`.
//!
//! Per-step transfer rates `(Ax + B)/n` are clamped to `[0, 1]`, which keeps
//! every update sub-stochastic; rates only exceed one for degrees that are
//! not yet reachable at that `n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::seed_graph;
use crate::metrics::degree_profile;
use crate::params::ModelParams;
use crate::theory::TheoryCurve;

/// Expected state at one recorded `n`. Vectors are indexed by degree
/// (`0..=d_max`); entries below `m` stay zero.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceRow {
    pub n: u64,
    pub counts: Vec<f64>,
    /// `E S_n(d)`; empty when only `E N_n(d)` was integrated.
    pub neighbor_sums: Vec<f64>,
    /// `E W_n` as used by the `S` recurrence (leading term), or the seed
    /// value at `n_0`.
    pub w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTable {
    pub params: ModelParams,
    pub n_start: u64,
    pub n_end: u64,
    pub d_max: u64,
    /// Recorded rows, ascending in `n`; always contains `n_end`.
    pub rows: Vec<RecurrenceRow>,
}

impl RecurrenceTable {
    pub fn row(&self, n: u64) -> Option<&RecurrenceRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn last(&self) -> &RecurrenceRow {
        self.rows.last().expect("n_end is always recorded")
    }
}

struct State {
    n: u64,
    counts: Vec<f64>,
    sums: Vec<f64>,
    w: f64,
    /// Highest degree that can carry mass at the current `n`.
    reach: usize,
}

fn seed_state(p: &ModelParams, d_max: u64) -> Result<State> {
    let seed = seed_graph(p.m());
    let prof = degree_profile(&seed);
    let top = prof.max_degree();
    if d_max < top {
        return Err(Error::InvalidParameter(format!(
            "d_max = {d_max} is below the seed degree {top}"
        )));
    }
    let len = d_max as usize + 1;
    let mut counts = vec![0.0; len];
    let mut sums = vec![0.0; len];
    for d in prof.degrees() {
        counts[d as usize] = prof.count(d) as f64;
        sums[d as usize] = prof.neighbor_sum(d) as f64;
    }
    Ok(State {
        n: prof.n,
        counts,
        sums,
        w: prof.w as f64,
        reach: top as usize,
    })
}

fn record(state: &State, with_sums: bool) -> RecurrenceRow {
    RecurrenceRow {
        n: state.n,
        counts: state.counts.clone(),
        neighbor_sums: if with_sums { state.sums.clone() } else { Vec::new() },
        w: state.w,
    }
}

fn step(state: &mut State, p: &ModelParams, with_sums: bool) {
    let (a, b) = (p.a(), p.b());
    let m = p.m() as usize;
    let mf = p.m_f64();
    let dm = p.d() / mf;
    let n = state.n as f64;
    let rate = |x: f64| ((a * x + b) / n).clamp(0.0, 1.0);
    let last = state.counts.len() - 1;
    let hi = (state.reach + 1).min(last);

    if with_sums {
        let w_lead = mf * (mf + 4.0 * b + 1.0) * n / (1.0 - 2.0 * a);
        let w_term = a * w_lead / n;
        // Descending so that row d-1 still holds its step-n value.
        for d in (m + 1..=hi).rev() {
            let x = d as f64;
            let r = rate(x - 1.0);
            state.sums[d] = state.sums[d] * (1.0 - r)
                + r * state.sums[d - 1]
                + (dm * (x - 1.0) / n + mf * r) * state.counts[d - 1]
                + (b - dm) * x / n * state.counts[d];
        }
        let r = rate(mf - 1.0);
        state.sums[m] = state.sums[m] * (1.0 - r)
            + (b - dm) * mf * state.counts[m] / n
            + w_term
            + (2.0 * b + 1.0) * mf;
        state.w = w_lead;
    }

    for d in (m + 1..=hi).rev() {
        let x = d as f64;
        state.counts[d] = state.counts[d] * (1.0 - rate(x)) + state.counts[d - 1] * rate(x - 1.0);
    }
    state.counts[m] = state.counts[m] * (1.0 - rate(mf)) + 1.0;

    state.n += 1;
    state.reach = hi;
}

fn integrate(
    p: &ModelParams,
    n_end: u64,
    d_max: u64,
    checkpoints: &[u64],
    with_sums: bool,
) -> Result<RecurrenceTable> {
    let mut state = seed_state(p, d_max)?;
    let n_start = state.n;
    if n_end < n_start {
        return Err(Error::InvalidParameter(format!(
            "n_end = {n_end} is below the seed size {n_start}"
        )));
    }
    let mut marks: Vec<u64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= n_start && c <= n_end)
        .chain(std::iter::once(n_end))
        .collect();
    marks.sort_unstable();
    marks.dedup();
    let mut rows = Vec::with_capacity(marks.len());
    let mut next = marks.iter().copied().peekable();
    loop {
        if next.peek() == Some(&state.n) {
            rows.push(record(&state, with_sums));
            next.next();
        }
        if state.n == n_end {
            break;
        }
        step(&mut state, p, with_sums);
    }
    Ok(RecurrenceTable {
        params: *p,
        n_start,
        n_end,
        d_max,
        rows,
    })
}

/// Integrates the master equation for `E N_n(d)`.
pub fn integrate_n(p: &ModelParams, n_end: u64, d_max: u64, checkpoints: &[u64]) -> Result<RecurrenceTable> {
    if p.a() >= 1.0 {
        return Err(Error::InvalidParameter("the degree recurrence needs A < 1".into()));
    }
    integrate(p, n_end, d_max, checkpoints, false)
}

/// Integrates the `E S_n(d)` recurrences jointly with `E N_n(d)`.
pub fn integrate_s(p: &ModelParams, n_end: u64, d_max: u64, checkpoints: &[u64]) -> Result<RecurrenceTable> {
    if p.a() >= 0.5 {
        return Err(Error::Regime(format!(
            "the S recurrence uses the linear W_n law and needs A < 1/2, got A = {}",
            p.a()
        )));
    }
    integrate(p, n_end, d_max, checkpoints, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormGap {
    pub n: u64,
    pub d: u64,
    pub s_over_n: f64,
    pub m_closed: f64,
    /// `|S/n - M| / M`
    pub rel_err_s: f64,
    pub count_over_n: f64,
    pub c_closed: f64,
    /// `|N/n - c| / c`
    pub rel_err_count: f64,
}

/// Relative gaps between a recorded row and the closed forms, for every
/// degree covered by both.
pub fn compare_row(
    table: &RecurrenceTable,
    row: &RecurrenceRow,
    curve: &TheoryCurve,
) -> Result<Vec<ClosedFormGap>> {
    if table.params != curve.params {
        return Err(Error::InvalidParameter(
            "recurrence table and theory curve use different parameters".into(),
        ));
    }
    if row.neighbor_sums.is_empty() {
        return Err(Error::InvalidParameter(
            "table carries no S values; integrate with integrate_s".into(),
        ));
    }
    let n = row.n as f64;
    let top = table.d_max.min(curve.d_max());
    let m = u64::from(table.params.m());
    Ok((m..=top)
        .map(|d| {
            let i = curve.index_of(d).expect("d within curve range");
            let (mc, cc) = (curve.m_exact[i], curve.c_exact[i]);
            let s = row.neighbor_sums[d as usize] / n;
            let c = row.counts[d as usize] / n;
            ClosedFormGap {
                n: row.n,
                d,
                s_over_n: s,
                m_closed: mc,
                rel_err_s: (s - mc).abs() / mc,
                count_over_n: c,
                c_closed: cc,
                rel_err_count: (c - cc).abs() / cc,
            }
        })
        .collect())
}

/// [`compare_row`] at `n_end`.
pub fn compare_closed_form(table: &RecurrenceTable, curve: &TheoryCurve) -> Result<Vec<ClosedFormGap>> {
    compare_row(table, table.last(), curve)
}
