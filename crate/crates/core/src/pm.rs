//! Perfect matchings of plain multigraphs: the target of the matchgate
//! reduction, with two independent counters.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest vertex count accepted by [`count_perfect_matchings_naive`].
pub const NAIVE_PM_CAP: usize = 22;

/// An undirected multigraph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl PmGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::InvalidCircuit(format!("edge {u} {v} leaves the vertex range 0..{n}")));
        }
        Ok(PmGraph { n, edges })
    }

    /// No loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
    }

    /// Drop loops; no perfect matching uses one.
    pub fn without_loops(&self) -> PmGraph {
        PmGraph { n: self.n, edges: self.edges.iter().copied().filter(|(u, v)| u != v).collect() }
    }

    /// Replace every edge by a path of length 3.
    pub fn subdivide3(&self) -> PmGraph {
        let mut n = self.n;
        let mut edges = Vec::with_capacity(3 * self.edges.len());
        for &(u, v) in &self.edges {
            edges.extend([(u, n), (n, n + 1), (n + 1, v)]);
            n += 2;
        }
        PmGraph { n, edges }
    }

    /// Multiplicity lists, loops skipped.
    fn adjacency(&self) -> Vec<Vec<(usize, u64)>> {
        let mut adj: Vec<HashMap<usize, u64>> = vec![HashMap::new(); self.n];
        for &(u, v) in &self.edges {
            if u != v {
                *adj[u].entry(v).or_default() += 1;
                *adj[v].entry(u).or_default() += 1;
            }
        }
        adj.into_iter()
            .map(|m| {
                let mut l: Vec<(usize, u64)> = m.into_iter().collect();
                l.sort_unstable();
                l
            })
            .collect()
    }

    /// The text format: `pm <n> <m> <C>` then one `u v` line per edge.
    pub fn render(&self, constant: &BigUint) -> String {
        let mut s = format!("pm {} {} {}\n", self.n, self.edges.len(), constant);
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Inverse of [`render`](Self::render).
    pub fn parse(text: &str) -> Result<(PmGraph, BigUint)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("line 1: missing `pm` header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "pm" {
            return Err(Error::Parse(format!("line 1: expected `pm <n> <m> <C>`, got `{header}`")));
        }
        let num = |s: &str, line: usize| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse(format!("line {line}: `{s}` is not a count")))
        };
        let n = num(h[1], 1)?;
        let m = num(h[2], 1)?;
        let c: BigUint =
            h[3].parse().map_err(|_| Error::Parse(format!("line 1: `{}` is not an integer", h[3])))?;
        let mut edges = Vec::with_capacity(m);
        for (i, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected `u v`", i + 1)));
            }
            edges.push((num(f[0], i + 1)?, num(f[1], i + 1)?));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!("header announces {m} edges, found {}", edges.len())));
        }
        Ok((PmGraph::new(n, edges)?, c))
    }
}

impl fmt::Display for PmGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph on {} vertices with {} edges", self.n, self.edges.len())
    }
}

/// Exhaustive count: match the lowest free vertex every possible way,
/// memoized on the set of free vertices.
pub fn count_perfect_matchings_naive(g: &PmGraph) -> Result<BigUint> {
    if g.n > NAIVE_PM_CAP {
        return Err(Error::Precondition(format!(
            "naive perfect-matching count is capped at {NAIVE_PM_CAP} vertices, got {}",
            g.n
        )));
    }
    let adj = g.adjacency();
    let mut memo: HashMap<u32, BigUint> = HashMap::new();
    fn rec(free: u32, adj: &[Vec<(usize, u64)>], memo: &mut HashMap<u32, BigUint>) -> BigUint {
        if free == 0 {
            return BigUint::one();
        }
        if let Some(v) = memo.get(&free) {
            return v.clone();
        }
        let v = free.trailing_zeros() as usize;
        let rest = free & !(1 << v);
        let mut total = BigUint::zero();
        for &(u, mult) in &adj[v] {
            if rest >> u & 1 == 1 {
                total += rec(rest & !(1 << u), adj, memo) * mult;
            }
        }
        memo.insert(free, total.clone());
        total
    }
    if g.n == 0 {
        return Ok(BigUint::one());
    }
    let all = if g.n == 32 { u32::MAX } else { (1u32 << g.n) - 1 };
    Ok(rec(all, &adj, &mut memo))
}

/// Frontier count. Vertices are processed in breadth-first order; the state
/// is the set of later vertices already matched to processed ones.
pub fn count_perfect_matchings(g: &PmGraph) -> BigUint {
    let adj = g.adjacency();
    let order = bfs_order(&adj);
    let mut pos = vec![0; g.n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut states: HashMap<Vec<usize>, BigUint> = HashMap::new();
    states.insert(Vec::new(), BigUint::one());
    for &v in &order {
        let mut next: HashMap<Vec<usize>, BigUint> = HashMap::with_capacity(states.len());
        for (s, cnt) in states {
            if let Ok(k) = s.binary_search(&pos[v]) {
                let mut t = s;
                t.remove(k);
                *next.entry(t).or_default() += cnt;
                continue;
            }
            for &(u, mult) in &adj[v] {
                let pu = pos[u];
                if pu < pos[v] {
                    continue;
                }
                if let Err(k) = s.binary_search(&pu) {
                    let mut t = s.clone();
                    t.insert(k, pu);
                    *next.entry(t).or_default() += &cnt * mult;
                }
            }
        }
        states = next;
        if states.is_empty() {
            return BigUint::zero();
        }
    }
    states.remove(&Vec::new()).unwrap_or_default()
}

fn bfs_order(adj: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let start = order.len();
        order.push(s);
        let mut head = start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    order.push(u);
                }
            }
        }
    }
    order
}
