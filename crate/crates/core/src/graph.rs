//! Undirected multigraphs with a designated sink, divisors, and chip-firing.
//!
//! Vertices are labeled `1..n` in all external formats and the sink is always
//! vertex `n`. Internally everything is 0-indexed, so the sink is `n - 1`.
//! Edge multiplicities are stored as nonnegative integer weights in a
//! symmetric adjacency matrix.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A connected undirected multigraph on vertices `0..n` with sink `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multigraph {
    n: usize,
    /// Symmetric weight matrix with zero diagonal.
    weights: Vec<Vec<u64>>,
}

/// An integer chip configuration on the vertices of a host graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Divisor {
    pub values: Vec<i64>,
}

impl Divisor {
    pub fn new(values: Vec<i64>) -> Self {
        Divisor { values }
    }

    pub fn zero(n: usize) -> Self {
        Divisor { values: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of chips; invariant under firing.
    pub fn degree(&self) -> i64 {
        self.values.iter().sum()
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sink: Option<usize>,
}

impl Multigraph {
    /// Builds a graph from a symmetric weight matrix, validating all invariants.
    pub fn from_weights(weights: Vec<Vec<u64>>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Malformed(format!(
                    "row {i} has length {}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(Error::SelfLoop(i + 1));
            }
            for j in 0..n {
                if weights[i][j] != weights[j][i] {
                    return Err(Error::Malformed(format!(
                        "asymmetric weights at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let g = Multigraph { n, weights };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from an edge list on vertices `1..=n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut weights = vec![vec![0u64; n]; n];
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(u, v, w) in edges {
            if u == 0 || u > n {
                return Err(Error::VertexRange(u, n));
            }
            if v == 0 || v > n {
                return Err(Error::VertexRange(v, n));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if w == 0 {
                return Err(Error::NonpositiveWeight(u, v));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            weights[u - 1][v - 1] = w;
            weights[v - 1][u - 1] = w;
        }
        Self::from_weights(weights)
    }

    /// Parses either the plain edge-list format or the JSON format.
    ///
    /// Edge-list lines are `u v w` with 1-indexed vertices and positive
    /// integer weight; an optional header line `n <count>` fixes the vertex
    /// count. JSON is `{"n": int, "edges": [[u,v,w],...], "sink": int?}`.
    /// If a sink other than `n` is declared (via JSON or `sink_override`),
    /// vertices are relabeled by swapping it with `n` before anything else.
    pub fn parse(input: &str, sink_override: Option<usize>) -> Result<Self> {
        let trimmed = input.trim_start();
        let (n, edges, declared_sink) = if trimmed.starts_with('{') {
            let parsed: GraphJson =
                serde_json::from_str(trimmed).map_err(|e| Error::Json(e.to_string()))?;
            (Some(parsed.n), parsed.edges, parsed.sink)
        } else {
            let mut n: Option<usize> = None;
            let mut edges = Vec::new();
            for line in input.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                match fields.as_slice() {
                    ["n", count] => {
                        n = Some(
                            count
                                .parse()
                                .map_err(|_| Error::Malformed(line.to_string()))?,
                        );
                    }
                    [u, v, w] => {
                        let u: usize = u.parse().map_err(|_| Error::Malformed(line.to_string()))?;
                        let v: usize = v.parse().map_err(|_| Error::Malformed(line.to_string()))?;
                        let w: i64 = w.parse().map_err(|_| Error::Malformed(line.to_string()))?;
                        if w <= 0 {
                            return Err(Error::NonpositiveWeight(u, v));
                        }
                        edges.push((u, v, w as u64));
                    }
                    _ => return Err(Error::Malformed(line.to_string())),
                }
            }
            (n, edges, None)
        };
        let n = match n {
            Some(n) => n,
            None => edges
                .iter()
                .map(|&(u, v, _)| u.max(v))
                .max()
                .ok_or(Error::EmptyGraph)?,
        };
        let sink = sink_override.or(declared_sink).unwrap_or(n);
        if sink == 0 || sink > n {
            return Err(Error::VertexRange(sink, n));
        }
        let relabel = |v: usize| -> usize {
            if v == sink {
                n
            } else if v == n {
                sink
            } else {
                v
            }
        };
        let edges: Vec<(usize, usize, u64)> = edges
            .into_iter()
            .map(|(u, v, w)| (relabel(u), relabel(v), w))
            .collect();
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the sink vertex (0-indexed).
    pub fn sink(&self) -> usize {
        self.n - 1
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.weights[u][v]
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.weights[u].iter().sum()
    }

    /// Edge list as 1-indexed `(u, v, w)` triples with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.weights[u][v] > 0 {
                    out.push((u + 1, v + 1, self.weights[u][v]));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let edges = self.edge_list();
        serde_json::to_string(&GraphJson {
            n: self.n,
            edges,
            sink: None,
        })
        .expect("graph serialization cannot fail")
    }

    /// True if every pair of distinct vertices is joined by an edge.
    pub fn is_saturated(&self) -> bool {
        (0..self.n).all(|u| (0..self.n).all(|v| u == v || self.weights[u][v] > 0))
    }

    /// True if the positive-weight support is a tree (n-1 support edges).
    pub fn is_tree(&self) -> bool {
        let support_edges: usize = (0..self.n)
            .map(|u| {
                ((u + 1)..self.n)
                    .filter(|&v| self.weights[u][v] > 0)
                    .count()
            })
            .sum();
        support_edges + 1 == self.n
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if self.weights[u][v] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True if the induced subgraph on `mask` (bitset over vertices) is connected.
    /// The empty set counts as disconnected.
    pub fn is_connected_subset(&self, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        let start = mask.trailing_zeros() as usize;
        let mut seen = 1u64 << start;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                let bit = 1u64 << v;
                if mask & bit != 0 && seen & bit == 0 && self.weights[u][v] > 0 {
                    seen |= bit;
                    stack.push(v);
                }
            }
        }
        seen == mask
    }

    /// Laplacian matrix `diag(deg) - A`; rows sum to zero.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    m[i][j] = self.degree(i) as i64;
                } else {
                    m[i][j] = -(self.weights[i][j] as i64);
                }
            }
        }
        m
    }

    /// Fires every vertex of `set` once: subtracts the corresponding
    /// Laplacian rows. Negative chip counts are allowed.
    pub fn fire(&self, d: &Divisor, set: &[usize]) -> Divisor {
        let mut out = d.values.clone();
        for &u in set {
            out[u] -= self.degree(u) as i64;
            for v in 0..self.n {
                if v != u {
                    out[v] += self.weights[u][v] as i64;
                }
            }
        }
        Divisor::new(out)
    }

    /// BFS distances from the sink over positive-weight edges.
    fn sink_distances(&self) -> Vec<usize> {
        let q = self.sink();
        let mut dist = vec![usize::MAX; self.n];
        dist[q] = 0;
        let mut queue = std::collections::VecDeque::from([q]);
        while let Some(u) = queue.pop_front() {
            for v in 0..self.n {
                if self.weights[u][v] > 0 && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Dhar's burning test from the sink. Returns the burnt-vertex bitmask;
    /// everything burns exactly when `v` is superstable.
    fn dhar_burnt(&self, v: &[i64]) -> u64 {
        let q = self.sink();
        let mut burnt = 1u64 << q;
        loop {
            let mut changed = false;
            for u in 0..self.n {
                if burnt & (1 << u) != 0 {
                    continue;
                }
                let incoming: i64 = (0..self.n)
                    .filter(|&w| burnt & (1 << w) != 0)
                    .map(|w| self.weights[u][w] as i64)
                    .sum();
                if v[u] < incoming {
                    burnt |= 1 << u;
                    changed = true;
                }
            }
            if !changed {
                return burnt;
            }
        }
    }

    /// The unique divisor linearly equivalent to `d` that is nonnegative off
    /// the sink and passes Dhar's burning test from the sink.
    pub fn q_reduce(&self, d: &Divisor) -> Divisor {
        assert_eq!(d.len(), self.n, "divisor length must match vertex count");
        let q = self.sink();
        let mut v = d.values.clone();
        if self.n == 1 {
            return Divisor::new(v);
        }

        // Bring every non-sink vertex to a nonnegative count, working outward
        // layer by layer: firing all vertices strictly closer than layer k
        // pushes chips into layer k and touches nothing farther out.
        let dist = self.sink_distances();
        let dmax = *dist.iter().max().unwrap();
        for k in (1..=dmax).rev() {
            let closer: Vec<usize> = (0..self.n).filter(|&u| dist[u] < k).collect();
            loop {
                let deficit = (0..self.n)
                    .filter(|&u| dist[u] == k)
                    .map(|u| v[u])
                    .min()
                    .unwrap_or(0);
                if deficit >= 0 {
                    break;
                }
                let fired = self.fire(&Divisor::new(v), &closer);
                v = fired.values;
            }
        }

        // Stabilize: no non-sink vertex may hold a full degree of chips.
        loop {
            let over = (0..self.n).find(|&u| u != q && v[u] >= self.degree(u) as i64);
            match over {
                Some(u) => {
                    let fired = self.fire(&Divisor::new(v), &[u]);
                    v = fired.values;
                }
                None => break,
            }
        }

        // Superstabilize: while Dhar's fire from the sink does not consume
        // everything, the unburnt set can legally fire as a cluster.
        loop {
            let burnt = self.dhar_burnt(&v);
            if burnt.count_ones() as usize == self.n {
                break;
            }
            let unburnt: Vec<usize> = (0..self.n).filter(|&u| burnt & (1 << u) == 0).collect();
            let fired = self.fire(&Divisor::new(v), &unburnt);
            v = fired.values;
        }
        Divisor::new(v)
    }

    /// Whether `d - e` lies in the integer row span of the Laplacian.
    pub fn linearly_equivalent(&self, d: &Divisor, e: &Divisor) -> bool {
        self.q_reduce(d) == self.q_reduce(e)
    }
}
