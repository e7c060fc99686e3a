//! Graph fragments with a constraint per vertex, and their exact
//! evaluation.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::signature::{mask, IndexSet, Named, Rational, Signature, MAX_ARITY};

/// A vertex with its incidences (global ids, in constraint order).
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub incidences: Vec<usize>,
    /// Indexed by the incidence names of `incidences`, in that order.
    pub signature: Signature,
}

/// A circuit: vertices with constraints, internal edges pairing
/// incidences, and an ordered list of external incidences.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    vertices: Vec<Vertex>,
    names: Vec<String>,
    owner: Vec<(usize, usize)>,
    edges: Vec<(usize, usize)>,
    externals: Vec<usize>,
}

/// Incremental construction of a [`Circuit`].
#[derive(Default)]
pub struct CircuitBuilder {
    vertices: Vec<Vertex>,
    names: Vec<String>,
    owner: Vec<(usize, usize)>,
    by_name: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    externals: Vec<usize>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a vertex whose incidences are named `name.0`, `name.1`, ...
    pub fn add_vertex(&mut self, name: &str, signature: Signature) -> Result<usize> {
        let names = (0..signature.arity()).map(|k| format!("{name}.{k}")).collect();
        self.add_vertex_with(name, names, signature)
    }

    pub fn add_vertex_with(
        &mut self,
        name: &str,
        incidence_names: Vec<String>,
        signature: Signature,
    ) -> Result<usize> {
        if incidence_names.len() != signature.arity() {
            return Err(Error::ArityMismatch {
                expected: signature.arity(),
                found: incidence_names.len(),
            });
        }
        if self.vertices.iter().any(|v| v.name == name) {
            return Err(Error::InvalidCircuit(format!("duplicate vertex `{name}`")));
        }
        let v = self.vertices.len();
        let mut ids = Vec::with_capacity(incidence_names.len());
        for (slot, n) in incidence_names.iter().enumerate() {
            if self.by_name.contains_key(n) {
                return Err(Error::InvalidCircuit(format!("duplicate incidence `{n}`")));
            }
            let id = self.names.len();
            self.by_name.insert(n.clone(), id);
            self.names.push(n.clone());
            self.owner.push((v, slot));
            ids.push(id);
        }
        let signature = signature.relabel(IndexSet::new(incidence_names)?)?;
        self.vertices.push(Vertex { name: name.to_string(), incidences: ids, signature });
        Ok(v)
    }

    /// Global id of incidence `slot` of vertex `v`.
    pub fn incidence(&self, v: usize, slot: usize) -> usize {
        self.vertices[v].incidences[slot]
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn connect(&mut self, a: usize, b: usize) -> &mut Self {
        self.edges.push((a, b));
        self
    }

    pub fn external(&mut self, a: usize) -> &mut Self {
        self.externals.push(a);
        self
    }

    pub fn build(self) -> Result<Circuit> {
        Circuit::from_parts(self.vertices, self.names, self.owner, self.edges, self.externals)
    }
}

impl Circuit {
    fn from_parts(
        vertices: Vec<Vertex>,
        names: Vec<String>,
        owner: Vec<(usize, usize)>,
        edges: Vec<(usize, usize)>,
        externals: Vec<usize>,
    ) -> Result<Self> {
        let mut used = vec![false; names.len()];
        let mut mark = |i: usize| -> Result<()> {
            match used.get_mut(i) {
                None => Err(Error::InvalidCircuit(format!("incidence {i} does not exist"))),
                Some(true) => Err(Error::InvalidCircuit(format!(
                    "incidence `{}` used twice",
                    names[i]
                ))),
                Some(u) => {
                    *u = true;
                    Ok(())
                }
            }
        };
        for &(a, b) in &edges {
            mark(a)?;
            mark(b)?;
        }
        for &a in &externals {
            mark(a)?;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!(
                "incidence `{}` is neither internal nor external",
                names[i]
            )));
        }
        Ok(Circuit { vertices, names, owner, edges, externals })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn externals(&self) -> &[usize] {
        &self.externals
    }

    pub fn num_incidences(&self) -> usize {
        self.names.len()
    }

    pub fn incidence_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn incidence_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `(vertex, slot)` owning incidence `i`.
    pub fn owner(&self, i: usize) -> (usize, usize) {
        self.owner[i]
    }

    pub fn is_closed(&self) -> bool {
        self.externals.is_empty()
    }

    /// Index set of the external incidences.
    pub fn external_index(&self) -> IndexSet {
        IndexSet::new(self.externals.iter().map(|&i| self.names[i].clone()))
            .expect("incidence names are distinct")
    }

    /// `Π_v F_v(x|J_v)` for a configuration of all incidences (bit `i` is
    /// incidence `i`).
    pub fn weight(&self, x: &[bool]) -> Rational {
        let mut w = Rational::one();
        for v in &self.vertices {
            let local = v
                .incidences
                .iter()
                .enumerate()
                .fold(0u32, |acc, (k, &i)| acc | ((x[i] as u32) << k));
            w *= v.signature.value(local);
            if w.is_zero() {
                break;
            }
        }
        w
    }

    /// `⟦φ⟧(x)` for an external configuration `x` (bit `k` is external `k`).
    pub fn evaluate(&self, external: u32) -> Rational {
        let allowed = vec![EQUAL; self.edges.len()];
        Search::new(self, &allowed, external).sum()
    }

    /// Total weight of configurations violating exactly `k` internal edges.
    pub fn z_k(&self, k: usize) -> Result<Rational> {
        if !self.is_closed() {
            return Err(Error::NotClosed);
        }
        let m = self.edges.len();
        let mut total = Rational::zero();
        if k > m {
            return Ok(total);
        }
        let mut chosen: Vec<usize> = (0..k).collect();
        loop {
            let mut allowed = vec![EQUAL; m];
            for &e in &chosen {
                allowed[e] = UNEQUAL;
            }
            total += Search::new(self, &allowed, 0).sum();
            // next k-combination
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(total);
                }
                i -= 1;
                if chosen[i] < m - k + i {
                    chosen[i] += 1;
                    for j in i + 1..k {
                        chosen[j] = chosen[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Table of `evaluate` over all external configurations.
    pub fn signature_of(&self) -> Result<Signature> {
        let n = self.externals.len();
        if n > MAX_ARITY {
            return Err(Error::ArityCap { arity: n, cap: MAX_ARITY });
        }
        Signature::from_fn(self.external_index(), |x| self.evaluate(x))
    }

    /// Contract internal edge `e`, merging its endpoint vertices (or
    /// summing out a loop).
    pub fn contract_edge(&self, e: usize) -> Result<Circuit> {
        let &(a, b) = self.edges.get(e).ok_or(Error::NotInternal(e))?;
        let (va, sa) = self.owner[a];
        let (vb, sb) = self.owner[b];
        let mut vertices = self.vertices.clone();
        if va == vb {
            let v = &mut vertices[va];
            v.signature = v.signature.trace(sa, sb);
            v.incidences.retain(|&i| i != a && i != b);
        } else {
            let (u, w) = (&self.vertices[va], &self.vertices[vb]);
            let signature = u.signature.join(sa, &w.signature, sb)?;
            let incidences = u
                .incidences
                .iter()
                .chain(&w.incidences)
                .copied()
                .filter(|&i| i != a && i != b)
                .collect();
            vertices[va] =
                Vertex { name: format!("{}+{}", u.name, w.name), incidences, signature };
            vertices.remove(vb);
        }
        let mut edges = self.edges.clone();
        edges.remove(e);
        self.rebuild(vertices, edges)
    }

    /// Reassign dense incidence ids after structural edits.
    fn rebuild(&self, vertices: Vec<Vertex>, edges: Vec<(usize, usize)>) -> Result<Circuit> {
        let mut remap = vec![usize::MAX; self.names.len()];
        let mut names = Vec::new();
        let mut owner = Vec::new();
        let mut out = Vec::with_capacity(vertices.len());
        for (v, mut vx) in vertices.into_iter().enumerate() {
            for (slot, i) in vx.incidences.iter_mut().enumerate() {
                remap[*i] = names.len();
                names.push(self.names[*i].clone());
                owner.push((v, slot));
                *i = remap[*i];
            }
            out.push(vx);
        }
        let edges = edges.iter().map(|&(a, b)| (remap[a], remap[b])).collect();
        let externals = self.externals.iter().map(|&a| remap[a]).collect();
        Circuit::from_parts(out, names, owner, edges, externals)
    }

    /// Signature over the external edges computed by contracting every
    /// internal edge in the given order, then multiplying the residual
    /// vertices.
    pub fn signature_by_contraction(&self, order: &[usize]) -> Result<Signature> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.edges.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidCircuit("contraction order is not a permutation of the edges".into()));
        }
        let mut work = Fold::new(self);
        for &e in order {
            work.contract(self.edges[e])?;
        }
        work.finish(self)
    }

    /// Contraction fold choosing, at each step, the edge whose contraction
    /// leaves the smallest constraint.
    pub fn signature_by_greedy_contraction(&self) -> Result<Signature> {
        let mut work = Fold::new(self);
        let mut remaining = self.edges.clone();
        while !remaining.is_empty() {
            let best = (0..remaining.len())
                .min_by_key(|&k| work.merged_arity(remaining[k]))
                .expect("nonempty");
            let e = remaining.swap_remove(best);
            work.contract(e)?;
        }
        work.finish(self)
    }

    /// Depth-first order of internal edges over the vertex adjacency.
    fn dfs_edge_order(&self) -> Vec<usize> {
        let mut edge_of = vec![usize::MAX; self.names.len()];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            edge_of[a] = e;
            edge_of[b] = e;
        }
        let mut seen_v = vec![false; self.vertices.len()];
        let mut seen_e = vec![false; self.edges.len()];
        let mut order = Vec::with_capacity(self.edges.len());
        for root in 0..self.vertices.len() {
            if seen_v[root] {
                continue;
            }
            let mut stack = vec![root];
            seen_v[root] = true;
            while let Some(v) = stack.pop() {
                for &i in &self.vertices[v].incidences {
                    let e = edge_of[i];
                    if e == usize::MAX || seen_e[e] {
                        continue;
                    }
                    seen_e[e] = true;
                    order.push(e);
                    let (a, b) = self.edges[e];
                    let other = if a == i { b } else { a };
                    let w = self.owner[other].0;
                    if !seen_v[w] {
                        seen_v[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        order
    }

    pub(crate) fn into_parts(
        self,
    ) -> (Vec<Vertex>, Vec<String>, Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<usize>) {
        (self.vertices, self.names, self.owner, self.edges, self.externals)
    }

    pub(crate) fn assemble(
        vertices: Vec<Vertex>,
        names: Vec<String>,
        owner: Vec<(usize, usize)>,
        edges: Vec<(usize, usize)>,
        externals: Vec<usize>,
    ) -> Result<Circuit> {
        Circuit::from_parts(vertices, names, owner, edges, externals)
    }
}

/// Allowed `(bit at first end, bit at second end)` states of an edge.
pub(crate) type EdgeStates = &'static [(bool, bool)];
pub(crate) const EQUAL: EdgeStates = &[(false, false), (true, true)];
pub(crate) const UNEQUAL: EdgeStates = &[(false, true), (true, false)];

/// Backtracking enumeration with zero-product pruning.
struct Search<'a> {
    c: &'a Circuit,
    order: Vec<usize>,
    allowed: &'a [EdgeStates],
    bits: Vec<u32>,
    assigned: Vec<u32>,
    left: Vec<usize>,
    supports: Vec<Option<Vec<u32>>>,
    total: Rational,
}

impl<'a> Search<'a> {
    fn new(c: &'a Circuit, allowed: &'a [EdgeStates], external: u32) -> Self {
        let nv = c.vertices.len();
        let supports = c
            .vertices
            .iter()
            .map(|v| {
                let s: Vec<u32> = v.signature.support().collect();
                (s.len() < v.signature.table().len()).then_some(s)
            })
            .collect();
        let mut s = Search {
            c,
            order: c.dfs_edge_order(),
            allowed,
            bits: vec![0; nv],
            assigned: vec![0; nv],
            left: c.vertices.iter().map(|v| v.incidences.len()).collect(),
            supports,
            total: Rational::zero(),
        };
        for (k, &i) in c.externals.iter().enumerate() {
            let (v, slot) = c.owner[i];
            s.assigned[v] |= 1 << slot;
            s.bits[v] |= (external >> k & 1) << slot;
            s.left[v] -= 1;
        }
        s
    }

    fn sum(mut self) -> Rational {
        let mut acc = Rational::one();
        for v in 0..self.c.vertices.len() {
            if self.left[v] == 0 {
                acc *= self.c.vertices[v].signature.value(self.bits[v]);
            } else if !self.feasible(v) {
                return Rational::zero();
            }
        }
        if acc.is_zero() {
            return acc;
        }
        self.rec(0, acc);
        self.total
    }

    fn feasible(&self, v: usize) -> bool {
        match &self.supports[v] {
            None => true,
            Some(s) => {
                let m = self.assigned[v];
                let b = self.bits[v];
                s.iter().any(|&x| x & m == b & m)
            }
        }
    }

    fn set(&mut self, i: usize, bit: bool) -> usize {
        let (v, slot) = self.c.owner[i];
        self.assigned[v] |= 1 << slot;
        if bit {
            self.bits[v] |= 1 << slot;
        }
        self.left[v] -= 1;
        v
    }

    fn unset(&mut self, i: usize) {
        let (v, slot) = self.c.owner[i];
        self.assigned[v] &= !(1 << slot);
        self.bits[v] &= !(1 << slot);
        self.left[v] += 1;
    }

    /// Multiply in the constraint of `v` if complete; false if the partial
    /// product is now zero.
    fn settle(&self, v: usize, acc: &mut Rational) -> bool {
        if self.left[v] == 0 {
            *acc *= self.c.vertices[v].signature.value(self.bits[v]);
            !acc.is_zero()
        } else {
            self.feasible(v)
        }
    }

    fn rec(&mut self, pos: usize, acc: Rational) {
        if pos == self.order.len() {
            self.total += acc;
            return;
        }
        let e = self.order[pos];
        let (a, b) = self.c.edges[e];
        for &(ba, bb) in self.allowed[e] {
            let va = self.set(a, ba);
            let vb = self.set(b, bb);
            let mut next = acc.clone();
            let ok = if va == vb {
                self.settle(va, &mut next)
            } else {
                self.settle(va, &mut next) && self.settle(vb, &mut next)
            };
            if ok {
                self.rec(pos + 1, next);
            }
            self.unset(b);
            self.unset(a);
        }
    }
}

/// In-place working state for contraction folds.
struct Fold {
    sigs: Vec<Option<Signature>>,
    slots: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl Fold {
    fn new(c: &Circuit) -> Self {
        Fold {
            sigs: c.vertices.iter().map(|v| Some(v.signature.clone())).collect(),
            slots: c.vertices.iter().map(|v| v.incidences.clone()).collect(),
            owner: c.owner.iter().map(|&(v, _)| v).collect(),
        }
    }

    fn merged_arity(&self, (a, b): (usize, usize)) -> usize {
        let (va, vb) = (self.owner[a], self.owner[b]);
        if va == vb {
            self.slots[va].len() - 2
        } else {
            self.slots[va].len() + self.slots[vb].len() - 2
        }
    }

    fn contract(&mut self, (a, b): (usize, usize)) -> Result<()> {
        let (va, vb) = (self.owner[a], self.owner[b]);
        let pa = self.slots[va].iter().position(|&i| i == a).expect("owned");
        let pb = self.slots[vb].iter().position(|&i| i == b).expect("owned");
        if va == vb {
            let s = self.sigs[va].take().expect("live vertex");
            self.sigs[va] = Some(s.trace(pa, pb));
            self.slots[va].retain(|&i| i != a && i != b);
            return Ok(());
        }
        let arity = self.merged_arity((a, b));
        if arity > MAX_ARITY {
            return Err(Error::ArityCap { arity, cap: MAX_ARITY });
        }
        let sa = self.sigs[va].take().expect("live vertex");
        let sb = self.sigs[vb].take().expect("live vertex");
        self.sigs[va] = Some(sa.join(pa, &sb, pb)?);
        let moved = std::mem::take(&mut self.slots[vb]);
        self.slots[va].retain(|&i| i != a);
        for i in moved {
            if i != b {
                self.owner[i] = va;
                self.slots[va].push(i);
            }
        }
        Ok(())
    }

    fn finish(self, c: &Circuit) -> Result<Signature> {
        let mut product = Signature::constant(Rational::one())?;
        let mut order: Vec<usize> = Vec::new();
        for (s, slots) in self.sigs.into_iter().zip(self.slots) {
            if let Some(s) = s {
                product = product.tensor(&s)?;
                order.extend(slots);
            }
        }
        // `order[k]` is the incidence at position k of the product.
        let positions: Vec<usize> = c
            .externals
            .iter()
            .map(|i| order.iter().position(|j| j == i).expect("external survives"))
            .collect();
        product.permute(&positions)
    }
}

/// Vertex label of a parity/NAE instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Even,
    Odd,
    Nae,
}

impl Label {
    pub fn named(self) -> Named {
        match self {
            Label::Even => Named::Even,
            Label::Odd => Named::Odd,
            Label::Nae => Named::Nae,
        }
    }
}

/// A multigraph whose vertices are labelled Even, Odd or NAE.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledGraph {
    pub vertices: Vec<(String, Label)>,
    pub edges: Vec<(usize, usize)>,
}

impl LabelledGraph {
    /// The closed circuit with one incidence per edge end. Incidences of
    /// vertex `v` are named `v.0, v.1, ...` in edge order.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let n = self.vertices.len();
        let mut ends: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidCircuit(format!("edge {e} names a missing vertex")));
            }
            ends[u].push((e, 0));
            ends[v].push((e, 1));
        }
        let mut b = CircuitBuilder::new();
        let mut end_id = vec![[0usize; 2]; self.edges.len()];
        for (v, (name, label)) in self.vertices.iter().enumerate() {
            let deg = ends[v].len();
            if deg > MAX_ARITY {
                return Err(Error::ArityCap { arity: deg, cap: MAX_ARITY });
            }
            let sig = Signature::named(&label.named(), IndexSet::anonymous(deg)?)?;
            let id = b.add_vertex(name, sig)?;
            for (slot, &(e, side)) in ends[v].iter().enumerate() {
                end_id[e][side] = b.incidence(id, slot);
            }
        }
        for [x, y] in end_id {
            b.connect(x, y);
        }
        b.build()
    }
}

/// A multigraph for sink-free orientations; skew edges are oriented
/// either both-outwards or both-inwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SfoGraph {
    pub vertices: Vec<String>,
    /// `(u, v, skew)`.
    pub edges: Vec<(usize, usize, bool)>,
}

impl SfoGraph {
    /// The NAE/parity instance whose assignments correspond bijectively to
    /// sink-free orientations: NAE at each vertex, a pendant `Odd_1` at each
    /// vertex, and an `Odd_2` midpoint on every non-skew edge.
    pub fn to_nae_parity(&self) -> LabelledGraph {
        let mut vertices: Vec<(String, Label)> =
            self.vertices.iter().map(|v| (v.clone(), Label::Nae)).collect();
        let mut edges = Vec::new();
        for (k, &(u, v, skew)) in self.edges.iter().enumerate() {
            if skew {
                edges.push((u, v));
            } else {
                let m = vertices.len();
                vertices.push((format!("m{k}"), Label::Odd));
                edges.push((u, m));
                edges.push((m, v));
            }
        }
        for v in 0..self.vertices.len() {
            let p = vertices.len();
            vertices.push((format!("pendant:{}", self.vertices[v]), Label::Odd));
            edges.push((v, p));
        }
        LabelledGraph { vertices, edges }
    }

    /// Brute-force count of sink-free orientations.
    pub fn count_sink_free(&self) -> u64 {
        let m = self.edges.len();
        let n = self.vertices.len();
        let mut count = 0;
        for o in 0..1u64 << m {
            let mut out = vec![0usize; n];
            for (k, &(u, v, skew)) in self.edges.iter().enumerate() {
                let bit = o >> k & 1 == 1;
                if skew {
                    if bit {
                        out[u] += 1;
                        out[v] += 1;
                    }
                } else if bit {
                    out[u] += 1;
                } else {
                    out[v] += 1;
                }
            }
            if out.iter().all(|&d| d > 0) {
                count += 1;
            }
        }
        count
    }
}

/// Exhaustive `Σ_k Z_k` oracle: sum of `wt` over all configurations.
pub fn total_weight_brute_force(c: &Circuit) -> Rational {
    let n = c.num_incidences();
    assert!(n <= 24, "brute force over too many incidences");
    let mut total = Rational::zero();
    for w in 0..=mask(n) as u64 {
        let x: Vec<bool> = (0..n).map(|i| w >> i & 1 == 1).collect();
        total += c.weight(&x);
    }
    total
}
