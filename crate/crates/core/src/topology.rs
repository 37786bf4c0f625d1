//! Generic star and K-cored star networks.
//!
//! Nodes are indexed densely: the `K` centers come first, then branch nodes
//! grouped by branch type `p`, branch instance `i`, and position `j`
//! (`j = 0` is the head adjacent to the centers, `j = m[p] - 1` the tip).
//! All indices in this module are zero-based.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Branch lengths `m`, branch counts `n`, and the number of centers `K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct BranchSpec {
    m: Vec<usize>,
    n: Vec<usize>,
    #[serde(rename = "K")]
    k: usize,
}

#[derive(Deserialize)]
struct RawSpec {
    m: Vec<usize>,
    n: Vec<usize>,
    #[serde(rename = "K", default = "one")]
    k: usize,
}

fn one() -> usize {
    1
}

impl TryFrom<RawSpec> for BranchSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        BranchSpec::new(raw.m, raw.n, raw.k)
    }
}

impl BranchSpec {
    /// Validates and builds a spec. Duplicate branch lengths are rejected;
    /// use [`BranchSpec::merged`] to fold them together instead.
    pub fn new(m: Vec<usize>, n: Vec<usize>, k: usize) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidSpec("at least one branch type is required".into()));
        }
        if m.len() != n.len() {
            return Err(Error::InvalidSpec(format!(
                "m has {} entries but n has {}",
                m.len(),
                n.len()
            )));
        }
        if let Some(p) = m.iter().position(|&x| x == 0) {
            return Err(Error::InvalidSpec(format!("m[{p}] must be at least 1")));
        }
        if let Some(p) = n.iter().position(|&x| x == 0) {
            return Err(Error::InvalidSpec(format!("n[{p}] must be at least 1")));
        }
        if k == 0 {
            return Err(Error::InvalidSpec("K must be at least 1".into()));
        }
        for (p, &mp) in m.iter().enumerate() {
            if let Some(q) = m[..p].iter().position(|&mq| mq == mp) {
                return Err(Error::InvalidSpec(format!(
                    "branch types {q} and {p} share length {mp}; merge them by summing n"
                )));
            }
        }
        Ok(Self { m, n, k })
    }

    /// Like [`BranchSpec::new`], but branch types with equal length are
    /// merged by summing their counts (first occurrence keeps its slot).
    pub fn merged(m: Vec<usize>, n: Vec<usize>, k: usize) -> Result<Self> {
        if m.len() != n.len() {
            return Err(Error::InvalidSpec(format!(
                "m has {} entries but n has {}",
                m.len(),
                n.len()
            )));
        }
        let mut lengths: Vec<usize> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (mp, np) in m.into_iter().zip(n) {
            match lengths.iter().position(|&x| x == mp) {
                Some(q) => counts[q] += np,
                None => {
                    lengths.push(mp);
                    counts.push(np);
                }
            }
        }
        Self::new(lengths, counts, k)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Same branches, different number of centers.
    pub fn with_cores(&self, k: usize) -> Result<Self> {
        Self::new(self.m.clone(), self.n.clone(), k)
    }

    /// Branch lengths (nodes per branch).
    pub fn lengths(&self) -> &[usize] {
        &self.m
    }

    /// Number of branches of each length.
    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn cores(&self) -> usize {
        self.k
    }

    /// Number of branch types `B`.
    pub fn branch_types(&self) -> usize {
        self.m.len()
    }

    pub fn node_count(&self) -> usize {
        self.k + self.m.iter().zip(&self.n).map(|(m, n)| m * n).sum::<usize>()
    }

    pub fn edge_count(&self) -> usize {
        self.k * self.n.iter().sum::<usize>()
            + self.m.iter().zip(&self.n).map(|(m, n)| (m - 1) * n).sum::<usize>()
    }

    /// `M_B`, the total number of edge strata.
    pub fn stratum_count(&self) -> usize {
        self.m.iter().sum()
    }

    /// Longest branch length.
    pub fn max_length(&self) -> usize {
        self.m.iter().copied().max().unwrap_or(0)
    }

    /// True if some branch type occurs only once. The interlacing argument
    /// behind the closed form needs every `n[p] >= 2`.
    pub fn has_singleton_branch(&self) -> bool {
        self.n.iter().any(|&x| x == 1)
    }

    /// Offsets `M_{p}` = sum of `m[q]` for `q < p`.
    pub fn length_offsets(&self) -> Vec<usize> {
        self.m
            .iter()
            .scan(0, |acc, &mp| {
                let start = *acc;
                *acc += mp;
                Some(start)
            })
            .collect()
    }
}

impl fmt::Display for BranchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={:?} n={:?} K={}", self.m, self.n, self.k)
    }
}

/// A node of a star network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Central(usize),
    Branch { kind: usize, instance: usize, position: usize },
}

/// An edge orbit: `position == 0` holds the center-to-head edges of branch
/// type `branch`, `position == j` the edges between positions `j - 1` and `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StratumId {
    pub branch: usize,
    pub position: usize,
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w[{}][{}]", self.branch, self.position)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Smaller endpoint index.
    pub a: usize,
    pub b: usize,
    pub stratum: StratumId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub id: StratumId,
    /// Indices into [`StarNetwork::edges`].
    pub edges: Vec<usize>,
}

/// Concrete graph of a [`BranchSpec`]. Immutable once built.
#[derive(Clone, Debug)]
pub struct StarNetwork {
    spec: BranchSpec,
    node_count: usize,
    type_offsets: Vec<usize>,
    edges: Vec<Edge>,
    strata: Vec<Stratum>,
    degrees: Vec<usize>,
}

pub fn build_network(spec: &BranchSpec) -> StarNetwork {
    StarNetwork::new(spec)
}

impl StarNetwork {
    pub fn new(spec: &BranchSpec) -> Self {
        let k = spec.cores();
        let mut type_offsets = Vec::with_capacity(spec.branch_types());
        let mut next = k;
        for (&mp, &np) in spec.lengths().iter().zip(spec.counts()) {
            type_offsets.push(next);
            next += mp * np;
        }
        let node_count = next;

        let mut strata: Vec<Stratum> = Vec::with_capacity(spec.stratum_count());
        for (p, &mp) in spec.lengths().iter().enumerate() {
            for j in 0..mp {
                strata.push(Stratum { id: StratumId { branch: p, position: j }, edges: Vec::new() });
            }
        }
        let offsets = spec.length_offsets();

        let mut edges = Vec::with_capacity(spec.edge_count());
        for (p, (&mp, &np)) in spec.lengths().iter().zip(spec.counts()).enumerate() {
            for i in 0..np {
                let head = type_offsets[p] + i * mp;
                for c in 0..k {
                    strata[offsets[p]].edges.push(edges.len());
                    edges.push(Edge { a: c, b: head, stratum: StratumId { branch: p, position: 0 } });
                }
                for j in 1..mp {
                    strata[offsets[p] + j].edges.push(edges.len());
                    edges.push(Edge {
                        a: head + j - 1,
                        b: head + j,
                        stratum: StratumId { branch: p, position: j },
                    });
                }
            }
        }

        let mut degrees = vec![0; node_count];
        for e in &edges {
            degrees[e.a] += 1;
            degrees[e.b] += 1;
        }

        Self { spec: spec.clone(), node_count, type_offsets, edges, strata, degrees }
    }

    pub fn spec(&self) -> &BranchSpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The `M_B` edge strata, ordered by branch type then position.
    pub fn edge_strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Flat index of a stratum in [`StarNetwork::edge_strata`].
    pub fn stratum_index(&self, id: StratumId) -> usize {
        self.spec.lengths()[..id.branch].iter().sum::<usize>() + id.position
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn index_of(&self, node: NodeId) -> Option<usize> {
        let spec = &self.spec;
        match node {
            NodeId::Central(c) if c < spec.cores() => Some(c),
            NodeId::Branch { kind, instance, position }
                if kind < spec.branch_types()
                    && instance < spec.counts()[kind]
                    && position < spec.lengths()[kind] =>
            {
                Some(self.type_offsets[kind] + instance * spec.lengths()[kind] + position)
            }
            _ => None,
        }
    }

    pub fn node_at(&self, index: usize) -> Option<NodeId> {
        if index >= self.node_count {
            return None;
        }
        if index < self.spec.cores() {
            return Some(NodeId::Central(index));
        }
        let kind = self.type_offsets.partition_point(|&start| start <= index) - 1;
        let mp = self.spec.lengths()[kind];
        let local = index - self.type_offsets[kind];
        Some(NodeId::Branch { kind, instance: local / mp, position: local % mp })
    }

    /// Neighbor lists, sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    /// Edge count per stratum, keyed by id.
    pub fn stratum_sizes(&self) -> BTreeMap<StratumId, usize> {
        self.strata.iter().map(|s| (s.id, s.edges.len())).collect()
    }
}
