//! Unit-resistance graphs and toroidal grids.
//!
//! Vertices are `0..N`. Adjacency lists are kept sorted so every traversal
//! (and therefore every seeded random walk) visits neighbours in the same
//! order.

use std::collections::VecDeque;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper bound on vertices for any graph this crate materialises.
pub const MAX_GRAPH_VERTICES: usize = 1 << 27;

/// Upper bound on the vertex count implied by an edge-list file.
pub const MAX_EDGE_LIST_VERTICES: usize = 1 << 24;

/// Undirected simple graph, every edge a unit resistor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    num_edges: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices from undirected edges.
    ///
    /// Self-loops, repeated edges (in either orientation) and endpoints
    /// outside `0..n` are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_GRAPH_VERTICES {
            return Err(Error::Capacity(format!(
                "{n} vertices exceeds the limit of {MAX_GRAPH_VERTICES}"
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Range(format!("edge ({u}, {v}) with only {n} vertices")));
            }
            if u == v {
                return Err(Error::Range(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Range(format!("duplicate edge ({v}, {})", w[0])));
            }
        }
        Ok(Graph { adj, num_edges: edges.len() })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_edges(n, &edges).expect("complete graph edges are valid")
    }

    /// Star with centre 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n, &edges).expect("star edges are valid")
    }

    /// Random connected graph: a random recursive tree plus each remaining
    /// pair independently with probability `extra_edge_prob`.
    pub fn random_connected(n: usize, extra_edge_prob: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        let mut present = vec![vec![false; n]; n];
        for v in 1..n {
            let u = rng.random_range(0..v);
            edges.push((u, v));
            present[u][v] = true;
        }
        for u in 0..n {
            for v in u + 1..n {
                if !present[u][v] && rng.random_bool(extra_edge_prob) {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(n, &edges).expect("generated edges are valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    /// |E|, each undirected edge counted once.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let first = self.adj.first()?.len();
        self.adj.iter().all(|l| l.len() == first).then_some(first)
    }

    /// Copy of the graph with edge `{u, v}` deleted.
    pub fn without_edge(&self, u: usize, v: usize) -> Result<Self> {
        let edges: Vec<_> = self
            .edges()
            .filter(|&e| e != (u.min(v), u.max(v)))
            .collect();
        if edges.len() == self.num_edges {
            return Err(Error::Range(format!("no edge ({u}, {v})")));
        }
        Self::from_edges(self.num_vertices(), &edges)
    }

    pub fn num_components(&self) -> usize {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        components
    }

    /// Fails with [`Error::Disconnected`] unless the graph has exactly one
    /// component.
    pub fn ensure_connected(&self) -> Result<()> {
        match self.num_components() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "vertex {v} not in 0..{}",
                self.num_vertices()
            )))
        }
    }
}

/// Applies the graph Laplacian `L = D - A` to `x`.
pub fn laplacian_apply(g: &Graph, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != g.num_vertices() {
        return Err(Error::Dimension { expected: g.num_vertices(), actual: x.len() });
    }
    Ok(g
        .adj
        .iter()
        .enumerate()
        .map(|(v, list)| {
            let s: f64 = list.iter().map(|&w| x[w]).sum();
            list.len() as f64 * x[v] - s
        })
        .collect())
}

/// Parses a whitespace-separated edge list.
///
/// One `u v` pair per line, 0-based. Text after `#` is ignored, as are
/// blank lines. The vertex count is one more than the largest index seen.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = body.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        let second = tokens.next().ok_or_else(|| Error::Parse {
            line,
            msg: "expected two vertex indices".into(),
        })?;
        if tokens.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing tokens after edge".into() });
        }
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("bad vertex index {tok:?}: {e}"),
            })
        };
        let (u, v) = (parse(first)?, parse(second)?);
        let hi = u.max(v);
        if hi >= MAX_EDGE_LIST_VERTICES {
            return Err(Error::Capacity(format!(
                "line {line}: vertex {hi} exceeds the edge-list limit of {MAX_EDGE_LIST_VERTICES}"
            )));
        }
        if u == v {
            return Err(Error::Parse { line, msg: format!("self-loop at vertex {u}") });
        }
        n = n.max(hi + 1);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::Parse { line: 0, msg: "edge list contains no edges".into() });
    }
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Side length `M` and dimension `d` of the toroidal grid `T_{M^d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    side: usize,
    dim: usize,
    num_vertices: usize,
}

impl TorusSpec {
    pub fn new(side: usize, dim: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::InvalidSpec(format!("side length {side} < 3")));
        }
        if dim < 1 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        let num_vertices = u32::try_from(dim)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .ok_or_else(|| Error::Capacity(format!("{side}^{dim} overflows the vertex index")))?;
        Ok(TorusSpec { side, dim, num_vertices })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N = M^d`.
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Mixed-radix base `M`, coordinate 0 least significant.
    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, actual: coords.len() });
        }
        let mut index = 0;
        for (i, &c) in coords.iter().enumerate().rev() {
            if c >= self.side {
                return Err(Error::Range(format!(
                    "coordinate {i} = {c} not in 0..{}",
                    self.side
                )));
            }
            index = index * self.side + c;
        }
        Ok(index)
    }

    pub fn decode(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.num_vertices {
            return Err(Error::Range(format!(
                "index {index} not in 0..{}",
                self.num_vertices
            )));
        }
        let mut rest = index;
        Ok((0..self.dim)
            .map(|_| {
                let c = rest % self.side;
                rest /= self.side;
                c
            })
            .collect())
    }
}

/// Builds `T_{M^d}`: tuples in `{0..M-1}^d`, adjacent when they differ by
/// `+-1 (mod M)` in exactly one coordinate.
pub fn build_torus(spec: &TorusSpec) -> Result<Graph> {
    let n = spec.num_vertices();
    if n > MAX_GRAPH_VERTICES {
        return Err(Error::Capacity(format!(
            "torus with {n} vertices exceeds the limit of {MAX_GRAPH_VERTICES}"
        )));
    }
    let m = spec.side();
    let mut adj = Vec::with_capacity(n);
    for v in 0..n {
        let mut list = Vec::with_capacity(2 * spec.dim());
        let mut stride = 1;
        let mut rest = v;
        for _ in 0..spec.dim() {
            let c = rest % m;
            rest /= m;
            let up = if c + 1 == m { v - c * stride } else { v + stride };
            let down = if c == 0 { v + (m - 1) * stride } else { v - stride };
            list.push(up);
            list.push(down);
            stride *= m;
        }
        list.sort_unstable();
        adj.push(list);
    }
    Ok(Graph { adj, num_edges: spec.dim() * n })
}
