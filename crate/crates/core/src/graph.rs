//! Mutable undirected simple graph over a fixed agent population.
//!
//! Agents are dense indices `0..n`. Each agent keeps an unordered neighbour
//! list, and a packed `n x n` bit matrix answers membership queries in O(1).
//! Neighbour-list order depends only on the history of edits, so runs that
//! start from the same seed see the same order.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::Rng;

use crate::error::GraphError;

/// Dense agent index in `0..n`.
pub type AgentId = usize;

/// Binary group label. `One` is the (possibly) smaller group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    One,
    Two,
}

impl Group {
    /// Label as printed in tables: 1 or 2.
    pub fn label(self) -> u8 {
        match self {
            Group::One => 1,
            Group::Two => 2,
        }
    }
}

/// Fixed group label per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAssignment {
    labels: Vec<Group>,
    small_fraction: f64,
}

impl GroupAssignment {
    /// Agents `[0, round(s * n))` form group one, the rest group two.
    pub fn split(n: usize, small_fraction: f64) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&small_fraction) {
            return Err(GraphError::InvalidGroupFraction(small_fraction));
        }
        let small = (small_fraction * n as f64).round() as usize;
        let labels = (0..n)
            .map(|i| if i < small { Group::One } else { Group::Two })
            .collect();
        Ok(Self {
            labels,
            small_fraction,
        })
    }

    /// Arbitrary labelling; `small_fraction` is derived from the label counts.
    pub fn from_labels(labels: Vec<Group>) -> Self {
        let ones = labels.iter().filter(|g| **g == Group::One).count();
        let small_fraction = if labels.is_empty() {
            0.0
        } else {
            ones as f64 / labels.len() as f64
        };
        Self {
            labels,
            small_fraction,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn group(&self, a: AgentId) -> Group {
        self.labels[a]
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn small_fraction(&self) -> f64 {
        self.small_fraction
    }

    pub fn count(&self, g: Group) -> usize {
        self.labels.iter().filter(|x| **x == g).count()
    }
}

/// Same-group and total neighbour counts of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborStats {
    pub same: usize,
    pub total: usize,
}

impl NeighborStats {
    pub fn opposite(&self) -> usize {
        self.total - self.same
    }
}

/// Undirected simple graph. Edge weights are implicitly 1.
#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    neighbors: Vec<Vec<u32>>,
    bits: Vec<u64>,
    words_per_row: usize,
    edges: usize,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges && self.bits == other.bits
    }
}

impl Eq for Network {}

impl Network {
    /// Graph on `n` agents with no edges.
    pub fn empty(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "agent count exceeds u32 range");
        let words_per_row = n.div_ceil(64);
        Self {
            n,
            neighbors: vec![Vec::new(); n],
            bits: vec![0; words_per_row * n],
            words_per_row,
            edges: 0,
        }
    }

    /// Builds a graph from an explicit edge list, rejecting loops and duplicates.
    pub fn from_edges(n: usize, edges: &[(AgentId, AgentId)]) -> Result<Self, GraphError> {
        let mut net = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::AgentOutOfRange { agent: a.max(b), n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !net.add_edge(a, b) {
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
        }
        Ok(net)
    }

    /// Uniform random simple graph with exactly `n * avg_degree / 2` edges.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        avg_degree: usize,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        if !(n * avg_degree).is_multiple_of(2) {
            return Err(GraphError::OddDegreeSum { n, avg_degree });
        }
        if avg_degree >= n {
            return Err(GraphError::TooDense {
                edges: n * avg_degree / 2,
                max: n * (n - 1) / 2,
            });
        }
        Self::random_edges(n, n * avg_degree / 2, rng)
    }

    /// Uniform random simple graph with exactly `m` edges.
    ///
    /// Pairs are drawn uniformly and rejected when already present, which
    /// samples edge sets uniformly among all sets of that size. Above half
    /// density the complement is sampled instead.
    pub fn random_edges<R: Rng + ?Sized>(
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        let max_edges = n * (n - 1) / 2;
        if m > max_edges {
            return Err(GraphError::TooDense {
                edges: m,
                max: max_edges,
            });
        }
        let mut net = Self::empty(n);
        if m * 2 <= max_edges {
            while net.edges < m {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    net.add_edge(a, b);
                }
            }
        } else {
            let mut excluded = Self::empty(n);
            while excluded.edges < max_edges - m {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    excluded.add_edge(a, b);
                }
            }
            for a in 0..n {
                for b in a + 1..n {
                    if !excluded.has_edge(a, b) {
                        net.add_edge(a, b);
                    }
                }
            }
        }
        Ok(net)
    }

    /// Every agent in turn links to `per_agent` distinct others chosen
    /// uniformly. A pick that is already a neighbour adds nothing, so the
    /// mean degree ends near `2 * per_agent` and no degree is below
    /// `per_agent`.
    pub fn random_initiated<R: Rng + ?Sized>(
        n: usize,
        per_agent: usize,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        if per_agent >= n {
            return Err(GraphError::TooDense {
                edges: n * per_agent,
                max: n * (n - 1) / 2,
            });
        }
        let mut net = Self::empty(n);
        for a in 0..n {
            for j in rand::seq::index::sample(rng, n - 1, per_agent).iter() {
                let b = if j >= a { j + 1 } else { j };
                net.add_edge(a, b);
            }
        }
        Ok(net)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn degree(&self, a: AgentId) -> usize {
        self.neighbors[a].len()
    }

    #[inline]
    pub fn neighbors(&self, a: AgentId) -> &[u32] {
        &self.neighbors[a]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges as f64 / self.n as f64
        }
    }

    #[inline]
    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        let word = self.bits[a * self.words_per_row + b / 64];
        word & (1u64 << (b % 64)) != 0
    }

    #[inline]
    fn set_bit(&mut self, a: AgentId, b: AgentId, on: bool) {
        let idx = a * self.words_per_row + b / 64;
        let mask = 1u64 << (b % 64);
        if on {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    /// Inserts `{a, b}`. Returns `false` (and does nothing) for loops or
    /// existing edges.
    pub fn add_edge(&mut self, a: AgentId, b: AgentId) -> bool {
        if a == b || self.has_edge(a, b) {
            return false;
        }
        self.set_bit(a, b, true);
        self.set_bit(b, a, true);
        self.neighbors[a].push(b as u32);
        self.neighbors[b].push(a as u32);
        self.edges += 1;
        true
    }

    /// Deletes `{a, b}`.
    ///
    /// # Panics
    /// If the edge is absent; callers only remove edges they observed.
    pub fn remove_edge(&mut self, a: AgentId, b: AgentId) {
        assert!(
            a != b && self.has_edge(a, b),
            "remove_edge: {{{a}, {b}}} is not an edge"
        );
        self.set_bit(a, b, false);
        self.set_bit(b, a, false);
        Self::detach(&mut self.neighbors[a], b);
        Self::detach(&mut self.neighbors[b], a);
        self.edges -= 1;
    }

    fn detach(list: &mut Vec<u32>, x: AgentId) {
        let pos = list
            .iter()
            .position(|&y| y as usize == x)
            .expect("adjacency bits and neighbour lists disagree");
        list.swap_remove(pos);
    }

    /// Connects `a` to an agent drawn uniformly from everyone that is neither
    /// `a` nor already a neighbour. Returns `None` when `a` is saturated.
    pub fn add_random_nonneighbor<R: Rng + ?Sized>(
        &mut self,
        a: AgentId,
        rng: &mut R,
    ) -> Option<AgentId> {
        let deg = self.degree(a);
        if deg + 1 >= self.n {
            return None;
        }
        let b = if 2 * deg < self.n {
            loop {
                let b = rng.gen_range(0..self.n);
                if b != a && !self.has_edge(a, b) {
                    break b;
                }
            }
        } else {
            let candidates = self.n - 1 - deg;
            let mut pick = rng.gen_range(0..candidates);
            (0..self.n)
                .filter(|&b| b != a && !self.has_edge(a, b))
                .find(|_| {
                    let hit = pick == 0;
                    pick = pick.wrapping_sub(1);
                    hit
                })
                .expect("candidate count out of sync")
        };
        self.add_edge(a, b);
        Some(b)
    }

    /// Counts neighbours of `a` that share its group.
    pub fn neighbor_stats(&self, groups: &GroupAssignment, a: AgentId) -> NeighborStats {
        let mine = groups.group(a);
        let same = self.neighbors[a]
            .iter()
            .filter(|&&b| groups.group(b as usize) == mine)
            .count();
        NeighborStats {
            same,
            total: self.degree(a),
        }
    }

    /// All edges as ascending `(a, b)` pairs with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::with_capacity(self.edges);
        for a in 0..self.n {
            let mut row: Vec<AgentId> = self.neighbors[a]
                .iter()
                .map(|&b| b as usize)
                .filter(|&b| b > a)
                .collect();
            row.sort_unstable();
            out.extend(row.into_iter().map(|b| (a, b)));
        }
        out
    }

    /// Edge list text: one `a b` line per edge, ascending.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(self.edges * 10);
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_edge_list().as_bytes())
    }

    /// `y = A x` for the 0/1 adjacency matrix.
    pub fn adjacency_mul(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (yi, row) in y.iter_mut().zip(&self.neighbors) {
            // independent partial sums shorten the add dependency chain
            let mut acc = [0.0f64; 4];
            let chunks = row.chunks_exact(4);
            let tail: f64 = chunks.remainder().iter().map(|&j| x[j as usize]).sum();
            for c in chunks {
                for (a, &j) in acc.iter_mut().zip(c) {
                    *a += x[j as usize];
                }
            }
            *yi = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
        }
    }

    /// Exhaustive consistency check of simplicity and symmetry.
    pub fn audit(&self) -> Result<(), String> {
        let mut degree_sum = 0;
        for a in 0..self.n {
            let row = &self.neighbors[a];
            degree_sum += row.len();
            let mut seen = row.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("agent {a} has a duplicate neighbour"));
            }
            for &b in row {
                let b = b as usize;
                if b == a {
                    return Err(format!("self-loop at {a}"));
                }
                if !self.has_edge(a, b) || !self.has_edge(b, a) {
                    return Err(format!("bit matrix missing {{{a}, {b}}}"));
                }
                if !self.neighbors[b].contains(&(a as u32)) {
                    return Err(format!("{b} does not list {a}"));
                }
            }
            let bits_set: usize = self.bits[a * self.words_per_row..(a + 1) * self.words_per_row]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum();
            if bits_set != row.len() {
                return Err(format!(
                    "agent {a}: {bits_set} bits vs {} neighbours",
                    row.len()
                ));
            }
        }
        if degree_sum != 2 * self.edges {
            return Err(format!(
                "edge count {} but degree sum {degree_sum}",
                self.edges
            ));
        }
        Ok(())
    }
}
