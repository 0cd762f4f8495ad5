use std::collections::VecDeque;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("graph needs at least one node")]
    Empty,
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected: node {0} unreachable from node 0")]
    Disconnected(usize),
    #[error("cannot read graph file {path}: {message}")]
    Io { path: String, message: String },
    #[error("graph file: {0}")]
    Parse(String),
}

/// Undirected, connected communication graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl CommGraph {
    /// Build from an edge list. Duplicate and reversed edges collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(GraphError::OutOfRange(i, j, n));
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            canon.push((i.min(j), i.max(j)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &canon {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        let graph = Self { n, edges: canon, neighbors };
        if let Some(node) = graph.distances(0).iter().position(Option::is_none) {
            return Err(GraphError::Disconnected(node));
        }
        Ok(graph)
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    pub fn ring(n: usize) -> Result<Self, GraphError> {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new(n, &edges)
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(file.n, &edges)
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile { n: self.n, edges: self.edges.iter().map(|&(i, j)| [i, j]).collect() };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    fn distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest shortest path; the number of flooding rounds needed.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .flat_map(|s| self.distances(s))
            .map(|d| d.unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Metropolis-Hastings weights per row, as `(column, weight)` pairs with
    /// the diagonal entry first. `w_ij = 1 / (1 + max(d_i, d_j))` on edges.
    pub fn metropolis_weights(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n)
            .map(|i| {
                let off: Vec<(usize, f64)> = self.neighbors[i]
                    .iter()
                    .map(|&j| (j, 1.0 / (1 + self.degree(i).max(self.degree(j))) as f64))
                    .collect();
                let diag = 1.0 - off.iter().map(|&(_, w)| w).sum::<f64>();
                std::iter::once((i, diag)).chain(off).collect()
            })
            .collect()
    }

    pub fn mixing_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.metropolis_weights().into_iter().enumerate() {
            for (j, v) in row {
                w[(i, j)] = v;
            }
        }
        w
    }

    /// Spectral radius of `W - 11'/n`: the per-round contraction factor of
    /// the disagreement. Below one on every connected graph.
    pub fn mixing_radius(&self) -> f64 {
        let n = self.n;
        let centered = self.mixing_matrix() - DMatrix::from_element(n, n, 1.0 / n as f64);
        SymmetricEigen::new(centered)
            .eigenvalues
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}
