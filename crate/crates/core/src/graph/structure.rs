//! Undirected simple graphs on `p` labelled nodes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    p: usize,
    adj: Vec<bool>,
}

/// Number of unordered pairs on `p` nodes.
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// Position of `(i, j)`, `i < j`, in row-major upper-triangle order.
#[inline]
pub fn pair_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < p);
    i * (2 * p - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j`, in `pair_index` order.
pub fn pairs(p: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(pair_count(p));
    for i in 0..p {
        for j in i + 1..p {
            v.push((i, j));
        }
    }
    v
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Self { p, adj: vec![false; p * p] }
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Self::empty(p);
        for (i, j) in pairs(p) {
            g.set_edge(i, j, true);
        }
        g
    }

    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(i, j) in edges {
            if i == j || i >= p || j >= p {
                return Err(Error::input(format!("invalid edge ({i}, {j}) for {p} nodes")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Graph whose edges are the set bits of `mask` over `pairs(p)`.
    pub fn from_mask(p: usize, mask: u64) -> Self {
        let mut g = Self::empty(p);
        for (b, (i, j)) in pairs(p).into_iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    pub fn mask(&self) -> u64 {
        pairs(self.p)
            .into_iter()
            .enumerate()
            .filter(|(_, (i, j))| self.has_edge(*i, *j))
            .fold(0, |m, (b, _)| m | 1 << b)
    }

    pub fn nodes(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.p + j]
    }

    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        assert!(i != j, "self-loops are not allowed");
        self.adj[i * self.p + j] = on;
        self.adj[j * self.p + i] = on;
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let on = !self.has_edge(i, j);
        self.set_edge(i, j, on);
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.p).filter(move |&j| self.adj[i * self.p + j])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        pairs(self.p).into_iter().filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    /// One `i j` pair per line, 0-indexed, `i < j`.
    pub fn to_edge_list(&self) -> String {
        self.edges().iter().map(|(i, j)| format!("{i} {j}\n")).collect()
    }

    pub fn parse_edge_list(p: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut bad = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<_> = line.split_whitespace().collect();
            match parts.as_slice() {
                [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
                    (Ok(i), Ok(j)) if i != j && i < p && j < p => edges.push((i, j)),
                    _ => bad.push(format!("line {}: '{line}'", ln + 1)),
                },
                _ => bad.push(format!("line {}: '{line}'", ln + 1)),
            }
        }
        if !bad.is_empty() {
            bad.truncate(10);
            return Err(Error::Parse { message: format!("malformed edge list for {p} nodes"), offenders: bad });
        }
        Self::from_edges(p, &edges)
    }
}

/// `e log(pi) + (m - e) log(1 - pi)` for `m` pairs and `e` edges.
pub fn erdos_renyi_log_prior(g: &Graph, link_prob: f64) -> Result<f64> {
    if !(link_prob > 0.0 && link_prob < 1.0) {
        return Err(Error::domain(format!("link probability must lie in (0,1), got {link_prob}")));
    }
    let e = g.edge_count() as f64;
    let m = pair_count(g.nodes()) as f64;
    Ok(e * link_prob.ln() + (m - e) * (-link_prob).ln_1p())
}
