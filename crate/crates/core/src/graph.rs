//! Append-only multigraph and the T-subclass generator.
//!
//! Every edge is stored as two consecutive endpoint tokens, so the token
//! array doubles as the edge array: edge `i` is `(tokens[2i], tokens[2i+1])`.
//! A uniform token is a degree-proportional vertex and a uniform even index
//! is a uniform edge, both O(1).

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::params::GeneratorParams;

pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    /// Edges per new vertex for generated graphs; `None` for imported ones.
    m: Option<u32>,
    tokens: Vec<Vertex>,
    degrees: Vec<u32>,
    adjacency: Vec<Vec<Vertex>>,
}

impl Multigraph {
    fn with_vertices(n: usize, m: Option<u32>) -> Self {
        Self {
            m,
            tokens: Vec::new(),
            degrees: vec![0; n],
            adjacency: vec![Vec::new(); n],
        }
    }

    fn push_vertex(&mut self) -> Vertex {
        self.degrees.push(0);
        self.adjacency.push(Vec::new());
        (self.degrees.len() - 1) as Vertex
    }

    fn push_edge(&mut self, u: Vertex, v: Vertex) {
        debug_assert_ne!(u, v, "self-loop");
        self.tokens.push(u);
        self.tokens.push(v);
        self.degrees[u as usize] += 1;
        self.degrees[v as usize] += 1;
        self.adjacency[u as usize].push(v);
        self.adjacency[v as usize].push(u);
    }

    pub fn m(&self) -> Option<u32> {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.tokens.len() / 2
    }

    pub fn tokens(&self) -> &[Vertex] {
        &self.tokens
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (Vertex, Vertex)> + '_ {
        self.tokens.chunks_exact(2).map(|e| (e[0], e[1]))
    }

    pub fn edge(&self, i: usize) -> (Vertex, Vertex) {
        (self.tokens[2 * i], self.tokens[2 * i + 1])
    }

    pub fn degree(&self, v: Vertex) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Neighbors of `v` with multiplicity, in insertion order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v as usize]
    }

    /// Frozen view of the current state.
    pub fn snapshot(&self) -> StepSnapshot<'_> {
        StepSnapshot {
            tokens: &self.tokens,
            degrees: &self.degrees,
        }
    }
}

/// Read-only state of `G_m^n` before a step. All draws of one step come from
/// the same snapshot, so nothing added during the step influences it.
#[derive(Debug, Clone, Copy)]
pub struct StepSnapshot<'a> {
    tokens: &'a [Vertex],
    degrees: &'a [u32],
}

impl StepSnapshot<'_> {
    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.tokens.len() / 2
    }

    pub fn degree(&self, v: Vertex) -> u32 {
        self.degrees[v as usize]
    }

    fn uniform_token<R: Rng + ?Sized>(&self, rng: &mut R) -> Vertex {
        self.tokens[rng.random_range(0..self.tokens.len())]
    }

    /// Degree-plus-`c` proportional draw; `c > -min degree` is the caller's
    /// responsibility.
    fn shifted_pa_unchecked<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> Vertex {
        if c >= 0.0 {
            let tokens = self.tokens.len() as f64;
            let total = tokens + c * self.degrees.len() as f64;
            if rng.random::<f64>() * total < tokens {
                self.uniform_token(rng)
            } else {
                rng.random_range(0..self.degrees.len()) as Vertex
            }
        } else {
            // Accept a token-drawn v with probability (d_v + c)/d_v. Each try
            // succeeds with probability >= (m + c)/m.
            loop {
                let v = self.uniform_token(rng);
                let d = f64::from(self.degrees[v as usize]);
                if rng.random::<f64>() * d < d + c {
                    return v;
                }
            }
        }
    }

    fn uniform_edge_unchecked<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vertex, Vertex) {
        let i = rng.random_range(0..self.edge_count());
        (self.tokens[2 * i], self.tokens[2 * i + 1])
    }
}

/// Draws `v` with probability `(d_v + c) / (2|E| + c n)`.
pub fn sample_shifted_pa<R: Rng + ?Sized>(
    snap: &StepSnapshot<'_>,
    c: f64,
    rng: &mut R,
) -> Result<Vertex> {
    if snap.vertex_count() == 0 || snap.edge_count() == 0 {
        return Err(Error::Empty("snapshot has no edges to sample from".into()));
    }
    let min_degree = snap.degrees.iter().copied().min().unwrap_or(0);
    if !c.is_finite() || c <= -f64::from(min_degree) {
        return Err(Error::InvalidParameter(format!(
            "shift c = {c} must exceed -(minimum degree) = -{min_degree}"
        )));
    }
    Ok(snap.shifted_pa_unchecked(c, rng))
}

/// Uniform draw from the edge multiset.
pub fn sample_uniform_edge<R: Rng + ?Sized>(
    snap: &StepSnapshot<'_>,
    rng: &mut R,
) -> Result<(Vertex, Vertex)> {
    if snap.edge_count() == 0 {
        return Err(Error::Empty("edge set is empty".into()));
    }
    Ok(snap.uniform_edge_unchecked(rng))
}

/// Targets chosen for one new vertex, all drawn from a single snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepPlan {
    pub targets: Vec<Vertex>,
    /// Number of pair slots resolved by edge copying.
    pub copies: u32,
}

/// Chooses the `m` targets of the next vertex from `snap`.
pub fn plan_step<R: Rng + ?Sized>(
    snap: &StepSnapshot<'_>,
    gp: &GeneratorParams,
    rng: &mut R,
) -> StepPlan {
    let mut plan = StepPlan {
        targets: Vec::with_capacity(gp.m() as usize),
        copies: 0,
    };
    for _ in 0..gp.pair_slots() {
        if gp.beta() > 0.0 && rng.random_bool(gp.beta()) {
            let (u, w) = snap.uniform_edge_unchecked(rng);
            plan.targets.push(u);
            plan.targets.push(w);
            plan.copies += 1;
        } else {
            plan.targets.push(snap.shifted_pa_unchecked(gp.c(), rng));
            plan.targets.push(snap.shifted_pa_unchecked(gp.c(), rng));
        }
    }
    for _ in 0..gp.single_slots() {
        plan.targets.push(snap.shifted_pa_unchecked(gp.c(), rng));
    }
    plan
}

/// Adds vertex `n` and its `m` edges. Returns the plan that was applied.
pub fn add_vertex_step<R: Rng + ?Sized>(
    g: &mut Multigraph,
    gp: &GeneratorParams,
    rng: &mut R,
) -> StepPlan {
    let plan = plan_step(&g.snapshot(), gp, rng);
    let v = g.push_vertex();
    for &t in &plan.targets {
        g.push_edge(v, t);
    }
    plan
}

/// Doubled complete graph on `m + 1` vertices: `m(m+1)` edges, all degrees `2m`.
pub fn seed_graph(m: u32) -> Multigraph {
    let n0 = m as usize + 1;
    let mut g = Multigraph::with_vertices(n0, Some(m));
    for u in 0..n0 as Vertex {
        for v in u + 1..n0 as Vertex {
            g.push_edge(u, v);
            g.push_edge(u, v);
        }
    }
    g
}

/// Grows `g` until it has `n` vertices.
pub fn grow<R: Rng + ?Sized>(
    g: &mut Multigraph,
    gp: &GeneratorParams,
    n: usize,
    rng: &mut R,
) -> Result<()> {
    if g.m != Some(gp.m()) {
        return Err(Error::InvalidParameter(format!(
            "graph was built with m = {:?}, generator has m = {}",
            g.m,
            gp.m()
        )));
    }
    if n < g.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "target size {n} is below the current size {}",
            g.vertex_count()
        )));
    }
    if n > Vertex::MAX as usize {
        return Err(Error::SizeCap(format!("{n} vertices exceed the id range")));
    }
    let extra = n - g.vertex_count();
    let m = gp.m() as usize;
    g.tokens.reserve(2 * m * extra);
    g.degrees.reserve(extra);
    g.adjacency.reserve(extra);
    while g.vertex_count() < n {
        add_vertex_step(g, gp, rng);
    }
    Ok(())
}

/// The seeded RNG behind [`generate`].
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic run from the doubled-clique seed to `n` vertices.
pub fn generate(gp: &GeneratorParams, n: usize, seed: u64) -> Result<Multigraph> {
    generate_with(gp, n, &mut rng_from_seed(seed))
}

pub fn generate_with<R: Rng + ?Sized>(
    gp: &GeneratorParams,
    n: usize,
    rng: &mut R,
) -> Result<Multigraph> {
    let n0 = gp.m() as usize + 1;
    if n < n0 {
        return Err(Error::InvalidParameter(format!(
            "n = {n} is below the seed size m + 1 = {n0}"
        )));
    }
    let mut g = seed_graph(gp.m());
    grow(&mut g, gp, n, rng)?;
    Ok(g)
}

/// Writes one `u v` line per edge, 0-based ids, in insertion order.
pub fn export_edge_list<W: Write>(g: &Multigraph, mut sink: W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(sink, "{u} {v}")?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads the format written by [`export_edge_list`]. Blank lines and lines
/// starting with `#` are skipped. The vertex count is `max id + 1`.
pub fn import_edge_list<B: BufRead>(source: B) -> Result<Multigraph> {
    let mut pairs = Vec::new();
    let mut max_id: Option<Vertex> = None;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse { line: lineno, msg: format!("expected two ids, got {t:?}") });
        };
        let parse = |s: &str| -> Result<Vertex> {
            let id: u64 = s.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("{s:?} is not a non-negative integer id"),
            })?;
            Vertex::try_from(id).ok().filter(|&v| v < Vertex::MAX).ok_or(Error::Parse {
                line: lineno,
                msg: format!("id {id} out of range"),
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u == v {
            return Err(Error::Parse { line: lineno, msg: format!("self-loop on vertex {u}") });
        }
        max_id = Some(max_id.map_or(u.max(v), |x| x.max(u).max(v)));
        pairs.push((u, v));
    }
    let Some(max_id) = max_id else {
        return Err(Error::Empty("edge list has no edges".into()));
    };
    let mut g = Multigraph::with_vertices(max_id as usize + 1, None);
    g.tokens.reserve(2 * pairs.len());
    for (u, v) in pairs {
        g.push_edge(u, v);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_generator_params;

    fn path3() -> Multigraph {
        let mut g = Multigraph::with_vertices(3, None);
        g.push_edge(0, 1);
        g.push_edge(1, 2);
        g
    }

    #[test]
    fn seed_graph_shapes() {
        let g = seed_graph(2);
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 6));
        assert!(g.degrees().iter().all(|&d| d == 4));
        let pairs: Vec<_> = g.edges().collect();
        assert_eq!(pairs, vec![(0, 1), (0, 1), (0, 2), (0, 2), (1, 2), (1, 2)]);

        let g1 = seed_graph(1);
        assert_eq!(g1.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 1)]);
        for m in 1..6 {
            let g = seed_graph(m);
            let total: u32 = g.degrees().iter().sum();
            assert_eq!(total, 2 * m * (m + 1));
            assert_eq!(g.edge_count(), (m * (m + 1)) as usize);
        }
    }

    #[test]
    fn shifted_pa_rejects_bad_shift() {
        let g = seed_graph(2);
        let mut rng = rng_from_seed(1);
        assert!(sample_shifted_pa(&g.snapshot(), -4.0, &mut rng).is_err());
        assert!(sample_shifted_pa(&g.snapshot(), -3.9, &mut rng).is_ok());
        let empty = Multigraph::with_vertices(0, None);
        assert!(sample_shifted_pa(&empty.snapshot(), 0.0, &mut rng).is_err());
        assert!(sample_uniform_edge(&empty.snapshot(), &mut rng).is_err());
    }

    #[test]
    fn single_edge_is_always_sampled() {
        let mut g = Multigraph::with_vertices(2, None);
        g.push_edge(0, 1);
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            assert_eq!(sample_uniform_edge(&g.snapshot(), &mut rng).unwrap(), (0, 1));
        }
    }

    #[test]
    fn multi_edge_weighting() {
        // e_01 = 2, e_12 = 1
        let mut g = Multigraph::with_vertices(3, None);
        g.push_edge(0, 1);
        g.push_edge(0, 1);
        g.push_edge(1, 2);
        let mut rng = rng_from_seed(5);
        let trials = 300_000;
        let mut double = 0;
        for _ in 0..trials {
            if sample_uniform_edge(&g.snapshot(), &mut rng).unwrap() == (0, 1) {
                double += 1;
            }
        }
        let frac = f64::from(double) / f64::from(trials);
        // 2/3 with standard error ~ 8.6e-4
        assert!((frac - 2.0 / 3.0).abs() < 5e-3, "{frac}");
    }

    #[test]
    fn regular_snapshot_is_uniform_for_any_shift() {
        let g = seed_graph(3); // 4 vertices of degree 6
        for c in [-2.5, 0.0, 7.0] {
            let mut rng = rng_from_seed(11);
            let mut hits = [0u32; 4];
            let trials = 200_000;
            for _ in 0..trials {
                hits[sample_shifted_pa(&g.snapshot(), c, &mut rng).unwrap() as usize] += 1;
            }
            for h in hits {
                assert!((f64::from(h) / f64::from(trials) - 0.25).abs() < 6e-3, "c = {c}");
            }
        }
    }

    #[test]
    fn step_adds_exactly_m_edges_without_loops() {
        for (a, d) in [(0.2, 0.3), (0.6, 0.2), (0.5, 0.0)] {
            let gp = derive_generator_params(2, a, d).unwrap();
            let mut g = seed_graph(2);
            let mut rng = rng_from_seed(9);
            for step in 0..200 {
                let before = g.edge_count();
                let n = g.vertex_count() as Vertex;
                let plan = add_vertex_step(&mut g, &gp, &mut rng);
                assert_eq!(plan.targets.len(), 2);
                assert!(plan.targets.iter().all(|&t| t < n), "step {step}");
                assert_eq!(g.edge_count(), before + 2);
                assert_eq!(g.degree(n), 2);
            }
        }
    }

    #[test]
    fn pure_copy_closes_triangles() {
        let gp = GeneratorParams::new(2, 1.0, 0.0).unwrap();
        let mut g = seed_graph(2);
        let mut rng = rng_from_seed(2);
        for _ in 0..500 {
            let plan = add_vertex_step(&mut g, &gp, &mut rng);
            assert_eq!(plan.copies, 1);
            let (u, w) = (plan.targets[0], plan.targets[1]);
            assert!(g.neighbors(u).contains(&w), "copied pair must be adjacent");
        }
    }

    #[test]
    fn plan_depends_only_on_snapshot() {
        let gp = derive_generator_params(2, 0.3, 0.4).unwrap();
        let g = generate(&gp, 300, 4).unwrap();
        let mut copy = g.clone();
        let mut r1 = rng_from_seed(77);
        let mut r2 = rng_from_seed(77);
        let planned = plan_step(&g.snapshot(), &gp, &mut r1);
        let applied = add_vertex_step(&mut copy, &gp, &mut r2);
        assert_eq!(planned, applied);
        assert!(applied.targets.iter().all(|&t| (t as usize) < g.vertex_count()));
    }

    #[test]
    fn generate_is_deterministic() {
        let gp = derive_generator_params(2, 0.2, 0.3).unwrap();
        let a = generate(&gp, 1000, 42).unwrap();
        let b = generate(&gp, 1000, 42).unwrap();
        assert_eq!(a.tokens(), b.tokens());
        assert_eq!(a.edge_count(), 2000);
        let c = generate(&gp, 1000, 43).unwrap();
        assert_ne!(a.tokens(), c.tokens());
    }

    #[test]
    fn generate_invariants() {
        for (m, a, d) in [(2, 0.2, 0.3), (3, 0.45, 0.5), (1, 0.7, 0.0), (4, 0.6, 1.0)] {
            let gp = derive_generator_params(m, a, d).unwrap();
            let g = generate(&gp, 2000, 8).unwrap();
            assert_eq!(g.vertex_count(), 2000);
            assert_eq!(g.edge_count(), m as usize * 2000);
            assert!(g.edges().all(|(u, v)| u != v));
            assert!(g.degrees().iter().all(|&x| x >= m));
            let total: u64 = g.degrees().iter().map(|&x| u64::from(x)).sum();
            assert_eq!(total, 2 * g.edge_count() as u64);
            for v in 0..g.vertex_count() as Vertex {
                assert_eq!(g.neighbors(v).len() as u32, g.degree(v));
            }
        }
    }

    #[test]
    fn generate_rejects_small_n() {
        let gp = derive_generator_params(2, 0.2, 0.3).unwrap();
        assert!(generate(&gp, 2, 0).is_err());
        assert_eq!(generate(&gp, 3, 0).unwrap(), seed_graph(2));
    }

    #[test]
    fn edge_list_round_trip() {
        let gp = derive_generator_params(2, 0.4, 0.3).unwrap();
        let g = generate(&gp, 1000, 1).unwrap();
        let mut buf = Vec::new();
        export_edge_list(&g, &mut buf).unwrap();
        let back = import_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back.tokens(), g.tokens());
        assert_eq!(back.degrees(), g.degrees());
        assert_eq!(back.m(), None);
    }

    #[test]
    fn export_seed() {
        let mut buf = Vec::new();
        export_edge_list(&seed_graph(2), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1\n0 1\n0 2\n0 2\n1 2\n1 2\n");
    }

    #[test]
    fn import_errors() {
        assert!(matches!(import_edge_list("".as_bytes()), Err(Error::Empty(_))));
        assert!(matches!(import_edge_list("# only comment\n".as_bytes()), Err(Error::Empty(_))));
        assert!(matches!(import_edge_list("0 1\n1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(import_edge_list("0 1 2\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(import_edge_list("0 x\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(import_edge_list("0 -1\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(import_edge_list("0 99999999999\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(import_edge_list("3 3\n".as_bytes()), Err(Error::Parse { .. })));
        let g = import_edge_list("0 1\n\n1 2\n".as_bytes()).unwrap();
        assert_eq!(g, path3());
    }
}
