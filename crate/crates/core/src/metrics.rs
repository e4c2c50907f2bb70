//! Exact graph statistics: the degree histogram `N(d)`, neighbor-degree sums
//! `S(d)`, `d_nn(d)`, `W_n`, clustering and Pearson assortativity.
//!
//! `S(d)` and degrees count parallel edges with multiplicity. Clustering is
//! computed on the simple projection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Multigraph, Vertex};

/// Largest graph accepted by [`brute_force_profile`].
pub const BRUTE_FORCE_MAX_N: usize = 10_000;

/// Per-degree aggregates, indexed densely by degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub n: u64,
    pub edges: u64,
    /// Sum of squared degrees.
    pub w: u64,
    counts: Vec<u64>,
    neighbor_sums: Vec<u64>,
}

impl DegreeProfile {
    fn with_max_degree(n: u64, edges: u64, max_degree: usize) -> Self {
        Self {
            n,
            edges,
            w: 0,
            counts: vec![0; max_degree + 1],
            neighbor_sums: vec![0; max_degree + 1],
        }
    }

    /// `N(d)`.
    pub fn count(&self, d: u64) -> u64 {
        self.counts.get(d as usize).copied().unwrap_or(0)
    }

    /// `S(d)`.
    pub fn neighbor_sum(&self, d: u64) -> u64 {
        self.neighbor_sums.get(d as usize).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u64 {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0) as u64
    }

    /// Degrees with `N(d) > 0`, ascending.
    pub fn degrees(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, _)| d as u64)
    }

    /// `d_nn(d) = S(d) / (N(d) d)`, `None` where no vertex has degree `d`.
    pub fn dnn(&self, d: u64) -> Option<f64> {
        let n = self.count(d);
        (n > 0 && d > 0).then(|| self.neighbor_sum(d) as f64 / (n as f64 * d as f64))
    }

    /// Fraction of vertices with degree `>= d`, for every populated `d`.
    pub fn ccdf(&self) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        let mut tail = 0u64;
        for d in (0..self.counts.len()).rev() {
            tail += self.counts[d];
            if self.counts[d] > 0 {
                out.push((d as u64, tail as f64 / self.n as f64));
            }
        }
        out.reverse();
        out
    }

    /// Returns the three conservation identities as `(Σ N, Σ d N, Σ S)`.
    pub fn conservation_sums(&self) -> (u64, u64, u64) {
        let sn = self.counts.iter().sum();
        let sdn = self.counts.iter().enumerate().map(|(d, &c)| d as u64 * c).sum();
        let ss = self.neighbor_sums.iter().sum();
        (sn, sdn, ss)
    }
}

/// Streaming profile: one pass over the degree array and one over the edges.
pub fn degree_profile(g: &Multigraph) -> DegreeProfile {
    let max_degree = g.degrees().iter().copied().max().unwrap_or(0) as usize;
    let mut p = DegreeProfile::with_max_degree(g.vertex_count() as u64, g.edge_count() as u64, max_degree);
    for &d in g.degrees() {
        p.counts[d as usize] += 1;
        p.w += u64::from(d) * u64::from(d);
    }
    let deg = g.degrees();
    for (u, v) in g.edges() {
        let (du, dv) = (deg[u as usize], deg[v as usize]);
        p.neighbor_sums[dv as usize] += u64::from(du);
        p.neighbor_sums[du as usize] += u64::from(dv);
    }
    p
}

/// Independent oracle for [`degree_profile`]: recounts degrees from the
/// adjacency lists and walks every neighborhood explicitly.
pub fn brute_force_profile(g: &Multigraph) -> Result<DegreeProfile> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeCap(format!(
            "brute-force profile is limited to {BRUTE_FORCE_MAX_N} vertices, got {n}"
        )));
    }
    let degree_of = |v: Vertex| g.neighbors(v).len() as u64;
    let max_degree = (0..n as Vertex).map(degree_of).max().unwrap_or(0) as usize;
    let edges = (0..n as Vertex).map(degree_of).sum::<u64>() / 2;
    let mut p = DegreeProfile::with_max_degree(n as u64, edges, max_degree);
    for v in 0..n as Vertex {
        let d = degree_of(v);
        p.counts[d as usize] += 1;
        p.w += d * d;
        let mut s = 0;
        for &u in g.neighbors(v) {
            s += degree_of(u);
        }
        p.neighbor_sums[d as usize] += s;
    }
    Ok(p)
}

/// `d_nn(d)` of a profile; errors where `N(d) = 0`.
pub fn dnn_empirical(profile: &DegreeProfile, d: u64) -> Result<f64> {
    profile
        .dnn(d)
        .ok_or_else(|| Error::Domain(format!("no vertex has degree {d}")))
}

/// `W_n = Σ_v d_v²`.
pub fn sum_squares(g: &Multigraph) -> u64 {
    g.degrees().iter().map(|&d| u64::from(d) * u64::from(d)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringProfile {
    /// Global clustering, `3 · triangles / paths of length 2`.
    pub global: f64,
    /// Average local clustering over all vertices.
    pub average_local: f64,
    /// `(multigraph degree, mean local clustering, vertex count)`.
    pub by_degree: Vec<(u64, f64, u64)>,
    pub triangles: u64,
}

impl ClusteringProfile {
    pub fn at_degree(&self, d: u64) -> Option<f64> {
        self.by_degree.iter().find(|r| r.0 == d).map(|r| r.1)
    }
}

/// Sorted, deduplicated neighbor lists.
fn simple_projection(g: &Multigraph) -> Vec<Vec<Vertex>> {
    (0..g.vertex_count() as Vertex)
        .map(|v| {
            let mut nb = g.neighbors(v).to_vec();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Per-vertex triangle counts on the simple projection.
fn local_triangles(simple: &[Vec<Vertex>]) -> Vec<u64> {
    let n = simple.len();
    // Orient each edge towards the higher (degree, id) endpoint.
    let rank = |v: usize| (simple[v].len(), v);
    let forward: Vec<Vec<Vertex>> = (0..n)
        .map(|v| {
            simple[v]
                .iter()
                .copied()
                .filter(|&u| rank(u as usize) > rank(v))
                .collect()
        })
        .collect();
    let mut tri = vec![0u64; n];
    let mut mark = vec![false; n];
    for v in 0..n {
        for &u in &forward[v] {
            mark[u as usize] = true;
        }
        for &u in &forward[v] {
            for &w in &forward[u as usize] {
                if mark[w as usize] {
                    tri[v] += 1;
                    tri[u as usize] += 1;
                    tri[w as usize] += 1;
                }
            }
        }
        for &u in &forward[v] {
            mark[u as usize] = false;
        }
    }
    tri
}

pub fn clustering(g: &Multigraph) -> ClusteringProfile {
    let simple = simple_projection(g);
    let tri = local_triangles(&simple);
    let n = g.vertex_count();
    let mut paths = 0u64;
    let mut local_sum = 0.0;
    let max_degree = g.degrees().iter().copied().max().unwrap_or(0) as usize;
    let mut by_sum = vec![0.0f64; max_degree + 1];
    let mut by_count = vec![0u64; max_degree + 1];
    for v in 0..n {
        let k = simple[v].len() as u64;
        let pairs = k * k.saturating_sub(1) / 2;
        paths += pairs;
        let local = if pairs == 0 { 0.0 } else { tri[v] as f64 / pairs as f64 };
        local_sum += local;
        let d = g.degrees()[v] as usize;
        by_sum[d] += local;
        by_count[d] += 1;
    }
    let triangle_corners: u64 = tri.iter().sum();
    let by_degree = by_count
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d as u64, by_sum[d] / c as f64, c))
        .collect();
    ClusteringProfile {
        global: if paths == 0 { 0.0 } else { triangle_corners as f64 / paths as f64 },
        average_local: if n == 0 { 0.0 } else { local_sum / n as f64 },
        by_degree,
        triangles: triangle_corners / 3,
    }
}

/// Pearson correlation of endpoint degrees over the symmetrized edge
/// multiset. `None` when the degree variance is zero.
pub fn pearson_assortativity(g: &Multigraph) -> Option<f64> {
    let deg = g.degrees();
    let e = g.edge_count() as f64;
    if e == 0.0 {
        return None;
    }
    // Both orientations of every edge: Σx = Σy, Σx² = Σy².
    let (mut sx, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
    for (u, v) in g.edges() {
        let (a, b) = (f64::from(deg[u as usize]), f64::from(deg[v as usize]));
        sx += a + b;
        sxx += a * a + b * b;
        sxy += 2.0 * a * b;
    }
    let count = 2.0 * e;
    let mean = sx / count;
    let var = sxx / count - mean * mean;
    if var <= 1e-12 * mean * mean {
        return None;
    }
    Some(((sxy / count - mean * mean) / var).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBin {
    /// Weighted geometric mean of the x values in the bin.
    pub center: f64,
    /// Weighted mean of the y values.
    pub mean: f64,
    /// Number of points in the bin.
    pub points: usize,
    pub weight: f64,
}

/// Groups `(x, y, weight)` points into geometric bins with
/// `bins_per_decade` bins per factor of ten. Empty bins are omitted.
pub fn log_binned_curve(points: &[(f64, f64, f64)], bins_per_decade: u32) -> Result<Vec<LogBin>> {
    if bins_per_decade == 0 {
        return Err(Error::InvalidParameter("bins_per_decade must be >= 1".into()));
    }
    let per = f64::from(bins_per_decade);
    let mut acc: std::collections::BTreeMap<i64, (f64, f64, f64, usize)> = Default::default();
    for &(x, y, w) in points {
        if !(x > 0.0) || !(w > 0.0) {
            continue;
        }
        // Small offset keeps exact decade boundaries (10, 100, ...) stable.
        let bin = (x.log10() * per + 1e-9).floor() as i64;
        let e = acc.entry(bin).or_default();
        e.0 += w * x.ln();
        e.1 += w * y;
        e.2 += w;
        e.3 += 1;
    }
    Ok(acc
        .into_values()
        .map(|(lx, sy, w, k)| LogBin {
            center: (lx / w).exp(),
            mean: sy / w,
            points: k,
            weight: w,
        })
        .collect())
}
