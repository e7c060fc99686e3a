//! Matchings circuits: graph fragments with edge weights and vertex
//! fugacities whose signature sums weighted matchings. Includes the gadget
//! library, arity-3 synthesis and the reduction to counting perfect
//! matchings.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::circuit::{Circuit, CircuitBuilder};
use crate::class::{arity3_violation, bit_string};
use crate::error::{Error, Result};
use crate::lp::{Feasibility, LinearSystem};
use crate::pm::{count_perfect_matchings, PmGraph};
use crate::signature::{IndexSet, Named, Rational, Signature, MAX_ARITY};

/// A graph fragment with a weight per internal edge and a fugacity per
/// vertex. External edges carry no weight; each is attached to one vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingsCircuit {
    names: Vec<String>,
    by_name: HashMap<String, usize>,
    fugacity: Vec<Rational>,
    edges: Vec<(usize, usize, Rational)>,
    externals: Vec<(String, usize)>,
}

impl MatchingsCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str, fugacity: Rational) -> Result<usize> {
        if fugacity.is_negative() {
            return Err(Error::Negative(fugacity.to_string()));
        }
        if self.by_name.contains_key(name) {
            return Err(Error::InvalidCircuit(format!("duplicate vertex `{name}`")));
        }
        let v = self.names.len();
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), v);
        self.fugacity.push(fugacity);
        Ok(v)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: Rational) -> Result<usize> {
        if weight.is_negative() {
            return Err(Error::Negative(weight.to_string()));
        }
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        self.edges.push((u, v, weight));
        Ok(self.edges.len() - 1)
    }

    pub fn add_external(&mut self, label: &str, v: usize) -> Result<()> {
        self.check_vertex(v)?;
        if self.externals.iter().any(|(l, _)| l == label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        self.externals.push((label.to_string(), v));
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.names.len() {
            return Err(Error::InvalidCircuit(format!("vertex {v} does not exist")));
        }
        Ok(())
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn fugacities(&self) -> &[Rational] {
        &self.fugacity
    }

    /// `(u, v, weight)` per internal edge.
    pub fn edges(&self) -> &[(usize, usize, Rational)] {
        &self.edges
    }

    /// `(label, vertex)` per external edge, in signature order.
    pub fn externals(&self) -> &[(String, usize)] {
        &self.externals
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn arity(&self) -> usize {
        self.externals.len()
    }

    pub fn is_closed(&self) -> bool {
        self.externals.is_empty()
    }

    /// All fugacities zero and all weights one.
    pub fn is_unweighted(&self) -> bool {
        self.fugacity.iter().all(Zero::is_zero) && self.edges.iter().all(|(_, _, w)| w.is_one())
    }

    pub fn index_set(&self) -> Result<IndexSet> {
        IndexSet::new(self.externals.iter().map(|(l, _)| l.clone()))
    }

    /// `base`, primed until no vertex uses it.
    fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        name
    }

    fn fresh_label(&self, base: &str) -> String {
        let mut label = base.to_string();
        while self.externals.iter().any(|(l, _)| *l == label) {
            label.push('\'');
        }
        label
    }

    /// Copy the vertices and internal edges of `other`, prefixing names.
    /// Returns the new id of each vertex of `other`; externals are left to
    /// the caller.
    pub fn embed(&mut self, other: &MatchingsCircuit, prefix: &str) -> Result<Vec<usize>> {
        let map = other
            .names
            .iter()
            .zip(&other.fugacity)
            .map(|(n, l)| self.add_vertex(&format!("{prefix}{n}"), l.clone()))
            .collect::<Result<Vec<_>>>()?;
        for (u, v, w) in &other.edges {
            self.add_edge(map[*u], map[*v], w.clone())?;
        }
        Ok(map)
    }

    /// Delete external `k`; the signature becomes the old one pinned to 0
    /// there.
    pub fn remove_external(&mut self, k: usize) -> Result<()> {
        if k >= self.externals.len() {
            return Err(Error::UnknownLabel(format!("external {k}")));
        }
        self.externals.remove(k);
        Ok(())
    }

    /// Put a fugacity-0 vertex on external `k`, flipping that input.
    pub fn subdivide_external(&mut self, k: usize) -> Result<()> {
        let (label, v) = self.externals.get(k).cloned().ok_or(Error::UnknownLabel(format!("external {k}")))?;
        let w = self.add_vertex(&self.fresh_name(&format!("{label}~")), Rational::zero())?;
        self.add_edge(v, w, Rational::one())?;
        self.externals[k].1 = w;
        Ok(())
    }

    /// Join external `k` to the single external of `unary`, summing that
    /// input out against `unary`'s signature.
    pub fn attach_unary(&mut self, k: usize, unary: &MatchingsCircuit) -> Result<()> {
        if unary.arity() != 1 {
            return Err(Error::ArityMismatch { expected: 1, found: unary.arity() });
        }
        let (label, v) = self.externals.get(k).cloned().ok_or(Error::UnknownLabel(format!("external {k}")))?;
        let prefix = self.fresh_name(&format!("{label}/"));
        let map = self.embed(unary, &prefix)?;
        self.add_edge(v, map[unary.externals[0].1], Rational::one())?;
        self.externals.remove(k);
        Ok(())
    }

    /// The equivalent circuit: `Fugacity^λ(v)` at every vertex and an
    /// `Edge^w(e)` vertex subdividing every internal edge.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let n = self.names.len();
        // incidence slots per vertex: edge ends first, then externals
        let mut slots: Vec<usize> = vec![0; n];
        let mut edge_slot = Vec::with_capacity(self.edges.len());
        for &(u, v, _) in &self.edges {
            let a = slots[u];
            slots[u] += 1;
            let b = slots[v];
            slots[v] += 1;
            edge_slot.push((a, b));
        }
        let mut ext_slot = Vec::with_capacity(self.externals.len());
        for &(_, v) in &self.externals {
            ext_slot.push(slots[v]);
            slots[v] += 1;
        }
        let mut b = CircuitBuilder::new();
        let mut ids = Vec::with_capacity(n);
        for v in 0..n {
            if slots[v] > MAX_ARITY {
                return Err(Error::ArityCap { arity: slots[v], cap: MAX_ARITY });
            }
            let sig = Signature::named(&Named::Fugacity(self.fugacity[v].clone()), IndexSet::anonymous(slots[v])?)?;
            ids.push(b.add_vertex(&format!("v:{}", self.names[v]), sig)?);
        }
        for (k, (&(u, v, ref w), &(a, c))) in self.edges.iter().zip(&edge_slot).enumerate() {
            let sig = Signature::named(&Named::Edge(w.clone()), IndexSet::anonymous(2)?)?;
            let e = b.add_vertex(&format!("e:{k}"), sig)?;
            let (x, y) = (b.incidence(ids[u], a), b.incidence(e, 0));
            b.connect(x, y);
            let (x, y) = (b.incidence(e, 1), b.incidence(ids[v], c));
            b.connect(x, y);
        }
        for (&(_, v), &s) in self.externals.iter().zip(&ext_slot) {
            let i = b.incidence(ids[v], s);
            b.external(i);
        }
        b.build()
    }

    /// `⟦G⟧`, computed on the compiled circuit.
    pub fn signature(&self) -> Result<Signature> {
        let index = self.index_set()?;
        self.to_circuit()?.signature_of()?.relabel(index)
    }

    /// `⟦G⟧` by listing every matching of the internal edges.
    pub fn signature_by_enumeration(&self) -> Result<Signature> {
        let index = self.index_set()?;
        let k = self.externals.len();
        let mut table = vec![Rational::zero(); 1 << k];
        let edges: Vec<&(usize, usize, Rational)> = self.edges.iter().filter(|(u, v, _)| u != v).collect();
        let mut matched = vec![false; self.names.len()];
        self.enumerate(&edges, 0, &mut matched, Rational::one(), &mut table);
        Signature::new(index, table)
    }

    fn enumerate(
        &self,
        edges: &[&(usize, usize, Rational)],
        i: usize,
        matched: &mut Vec<bool>,
        wt: Rational,
        table: &mut [Rational],
    ) {
        if i == edges.len() {
            for (x, slot) in table.iter_mut().enumerate() {
                let mut used = matched.clone();
                let ok = self.externals.iter().enumerate().all(|(j, &(_, v))| {
                    if x >> j & 1 == 0 {
                        return true;
                    }
                    !std::mem::replace(&mut used[v], true)
                });
                if !ok {
                    continue;
                }
                let mut w = wt.clone();
                for (v, l) in self.fugacity.iter().enumerate() {
                    if !used[v] {
                        w *= l;
                    }
                }
                *slot += w;
            }
            return;
        }
        self.enumerate(edges, i + 1, matched, wt.clone(), table);
        let (u, v, w) = edges[i];
        if !matched[*u] && !matched[*v] && !w.is_zero() {
            matched[*u] = true;
            matched[*v] = true;
            self.enumerate(edges, i + 1, matched, wt * w, table);
            matched[*u] = false;
            matched[*v] = false;
        }
    }

    /// `⟦G⟧` of an unweighted circuit as perfect-matching counts: input `x`
    /// deletes the vertices whose external edge is set.
    pub fn signature_by_perfect_matchings(&self) -> Result<Signature> {
        if !self.is_unweighted() {
            return Err(Error::Precondition("needs zero fugacities and unit weights".into()));
        }
        let index = self.index_set()?;
        let table = (0..index.size() as u32)
            .map(|x| {
                let mut gone = vec![false; self.names.len()];
                for (j, &(_, v)) in self.externals.iter().enumerate() {
                    if x >> j & 1 == 1 && std::mem::replace(&mut gone[v], true) {
                        return Rational::zero();
                    }
                }
                let mut id = vec![usize::MAX; self.names.len()];
                let mut n = 0;
                for v in 0..self.names.len() {
                    if !gone[v] {
                        id[v] = n;
                        n += 1;
                    }
                }
                let edges = self
                    .edges
                    .iter()
                    .filter(|(u, v, _)| !gone[*u] && !gone[*v])
                    .map(|&(u, v, _)| (id[u], id[v]))
                    .collect();
                let g = PmGraph { n, edges };
                Rational::from_integer(BigInt::from(count_perfect_matchings(&g)))
            })
            .collect();
        Signature::new(index, table)
    }
}

/// `⟦g⟧`; see [`MatchingsCircuit::signature`].
pub fn mc_signature(g: &MatchingsCircuit) -> Result<Signature> {
    g.signature()
}

/// One vertex of fugacity `λ` holding every external edge:
/// `Fugacity^λ_J`.
pub fn fugacity_gadget(lambda: Rational, labels: &IndexSet) -> Result<MatchingsCircuit> {
    let mut g = MatchingsCircuit::new();
    let v = g.add_vertex("v", lambda)?;
    for l in labels.labels() {
        g.add_external(l, v)?;
    }
    Ok(g)
}

/// The arity-0 signature `c`: an isolated vertex of fugacity `c`.
pub fn constant_gadget(c: Rational) -> Result<MatchingsCircuit> {
    let mut g = MatchingsCircuit::new();
    if !c.is_one() {
        g.add_vertex("c", c)?;
    }
    Ok(g)
}

/// The zero signature: the externals on one fugacity-0 vertex next to an
/// isolated fugacity-0 vertex that can never be matched.
pub fn zero_gadget(labels: &IndexSet) -> Result<MatchingsCircuit> {
    let mut g = fugacity_gadget(Rational::zero(), labels)?;
    g.add_vertex("dead", Rational::zero())?;
    Ok(g)
}

/// One fugacity-0 vertex with two externals: the swap `[[0,1],[1,0]]`.
fn swap_gadget() -> MatchingsCircuit {
    let mut g = MatchingsCircuit::new();
    let h = g.add_vertex("h", Rational::zero()).expect("fresh");
    g.add_external("x0", h).expect("fresh");
    g.add_external("x1", h).expect("fresh");
    g
}

/// Identify the second external of each part with the first external of
/// the next. Every part must have arity 2; the result has externals
/// `x0, x1`, and its signature is the matrix product of the parts.
pub fn serial(parts: &[MatchingsCircuit]) -> Result<MatchingsCircuit> {
    let mut g = MatchingsCircuit::new();
    let mut first = None;
    let mut last: Option<usize> = None;
    for (i, p) in parts.iter().enumerate() {
        if p.arity() != 2 {
            return Err(Error::ArityMismatch { expected: 2, found: p.arity() });
        }
        let map = g.embed(p, &format!("{i}/"))?;
        let (a, b) = (map[p.externals[0].1], map[p.externals[1].1]);
        match last {
            None => first = Some(a),
            Some(o) => {
                g.add_edge(o, a, Rational::one())?;
            }
        }
        last = Some(b);
    }
    match (first, last) {
        (Some(a), Some(b)) => {
            g.add_external("x0", a)?;
            g.add_external("x1", b)?;
            Ok(g)
        }
        _ => Err(Error::Precondition("serial composition of no parts".into())),
    }
}

/// `Edge^w = diag(1, w)`: a weight-`w` edge between two swaps.
pub fn edge_gadget(w: Rational) -> Result<MatchingsCircuit> {
    let mut mid = MatchingsCircuit::new();
    let u = mid.add_vertex("u", Rational::zero())?;
    let v = mid.add_vertex("v", Rational::zero())?;
    mid.add_edge(u, v, w)?;
    mid.add_external("x0", u)?;
    mid.add_external("x1", v)?;
    serial(&[swap_gadget(), mid, swap_gadget()])
}

/// `G_{p,1}`: one `s`–`t` route per binary digit of `p`, a route for
/// digit `n ≥ 1` being a path of length `2n − 1` with doubled odd edges.
fn gp1(p: &BigUint) -> MatchingsCircuit {
    let mut g = MatchingsCircuit::new();
    let one = Rational::one;
    let s = g.add_vertex("s", Rational::zero()).expect("fresh");
    let t = g.add_vertex("t", Rational::zero()).expect("fresh");
    for n in 0..p.bits() {
        if !p.bit(n) {
            continue;
        }
        if n == 0 {
            g.add_edge(s, t, one()).expect("valid");
            continue;
        }
        let len = 2 * n as usize;
        let mut path = vec![s];
        for j in 2..len {
            path.push(g.add_vertex(&format!("d{n}.{j}"), Rational::zero()).expect("fresh"));
        }
        path.push(t);
        for j in 0..len - 1 {
            g.add_edge(path[j], path[j + 1], one()).expect("valid");
            if j % 2 == 0 {
                g.add_edge(path[j], path[j + 1], one()).expect("valid");
            }
        }
    }
    g.add_external("x0", s).expect("fresh");
    g.add_external("x1", t).expect("fresh");
    g
}

/// `G_{p,q}` with signature `diag(p, q)`; unit weights, zero fugacities.
pub fn build_gpq(p: &BigUint, q: &BigUint) -> MatchingsCircuit {
    if q.is_one() {
        return gp1(p);
    }
    serial(&[gp1(p), swap_gadget(), gp1(q), swap_gadget()]).expect("arity-2 parts")
}

/// The chain of triangle boxes with signature `2^{k−1} OR_k`.
pub fn or_gadget_unnormalized(labels: &IndexSet) -> Result<MatchingsCircuit> {
    let k = labels.len();
    if k == 0 {
        return Err(Error::Precondition("OR needs at least one input".into()));
    }
    let zero = Rational::zero;
    let one = Rational::one;
    let mut g = MatchingsCircuit::new();
    let mut prev = g.add_vertex("s", zero())?;
    for (i, l) in labels.labels().iter().enumerate() {
        let b = g.add_vertex(&format!("b{i}"), zero())?;
        let c = g.add_vertex(&format!("c{i}"), zero())?;
        let a = g.add_vertex(&format!("a{i}"), one())?;
        let t = g.add_vertex(&format!("t{i}"), zero())?;
        g.add_edge(prev, b, one())?;
        g.add_edge(b, c, one())?;
        g.add_edge(b, a, one())?;
        g.add_edge(c, a, one())?;
        g.add_edge(a, t, one())?;
        g.add_edge(a, t, one())?;
        g.add_external(l, t)?;
        prev = c;
    }
    let r = g.add_vertex("r", zero())?;
    let r2 = g.add_vertex("r'", zero())?;
    g.add_edge(prev, r, one())?;
    g.add_edge(r, r2, one())?;
    Ok(g)
}

/// `OR_J`: the box chain plus an isolated vertex of fugacity `2^{1−k}`.
pub fn or_gadget(labels: &IndexSet) -> Result<MatchingsCircuit> {
    let mut g = or_gadget_unnormalized(labels)?;
    let k = labels.len();
    if k > 1 {
        let scale = Rational::new(BigInt::one(), BigInt::one() << (k - 1));
        g.add_vertex("norm", scale)?;
    }
    Ok(g)
}

/// `Even_J`, lifted from the all-ones signature on `|J| − 1` inputs.
pub fn even_gadget(labels: &IndexSet) -> Result<MatchingsCircuit> {
    let k = labels.len();
    if k == 0 {
        return constant_gadget(Rational::one());
    }
    let mut ones = MatchingsCircuit::new();
    for i in 1..k {
        let v = ones.add_vertex(&format!("u{i}"), Rational::one())?;
        ones.add_external(labels.label(i), v)?;
    }
    let mut g = lift_to_parity(&ones)?;
    g.externals[0].0 = labels.label(0).to_string();
    Ok(g)
}

/// `Odd_J`: `Even_J` with the first input flipped.
pub fn odd_gadget(labels: &IndexSet) -> Result<MatchingsCircuit> {
    if labels.is_empty() {
        return constant_gadget(Rational::zero());
    }
    let mut g = even_gadget(labels)?;
    g.subdivide_external(0)?;
    Ok(g)
}

/// A circuit for `F_⊕`, parity input first, with every fugacity zero:
/// each vertex `v` gets a triangle `a b c` with `v a` weighted `λ(v)`, and
/// the triangles are chained `c_i b_{i+1}` with the parity edge at `b_1`.
pub fn lift_to_parity(g: &MatchingsCircuit) -> Result<MatchingsCircuit> {
    let label = g.fresh_label("p");
    let one = Rational::one;
    let zero = Rational::zero;
    let mut h = MatchingsCircuit::new();
    if g.num_vertices() == 0 {
        // F is the constant 1, so F_⊕ = (1, 0)
        let u = h.add_vertex("u", zero())?;
        let w = h.add_vertex("w", zero())?;
        h.add_edge(u, w, one())?;
        h.add_external(&label, u)?;
        return Ok(h);
    }
    for name in &g.names {
        h.add_vertex(name, zero())?;
    }
    for (u, v, w) in &g.edges {
        h.add_edge(*u, *v, w.clone())?;
    }
    let mut prev_c: Option<usize> = None;
    let mut first_b = 0;
    for (v, name) in g.names.iter().enumerate() {
        let a = h.add_vertex(&h.fresh_name(&format!("{name}/a")), zero())?;
        let b = h.add_vertex(&h.fresh_name(&format!("{name}/b")), zero())?;
        let c = h.add_vertex(&h.fresh_name(&format!("{name}/c")), zero())?;
        h.add_edge(a, b, one())?;
        h.add_edge(a, c, one())?;
        h.add_edge(b, c, one())?;
        h.add_edge(v, a, g.fugacity[v].clone())?;
        match prev_c {
            None => first_b = b,
            Some(pc) => {
                h.add_edge(pc, b, one())?;
            }
        }
        prev_c = Some(c);
    }
    h.add_external(&label, first_b)?;
    for (l, v) in &g.externals {
        h.add_external(l, *v)?;
    }
    Ok(h)
}

/// Sum out the first input with a vertex of fugacity 1. Inverse of
/// [`lift_to_parity`] on signatures.
pub fn drop_parity(g: &MatchingsCircuit) -> Result<MatchingsCircuit> {
    let mut h = g.clone();
    let mut unit = MatchingsCircuit::new();
    let d = unit.add_vertex("d", Rational::one())?;
    unit.add_external("x", d)?;
    h.attach_unary(0, &unit)?;
    Ok(h)
}

/// Clique edge pairs `v_i v_j`, `i < j`, in the order used by
/// [`solve_clique_weights`].
pub const CLIQUE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    CLIQUE_PAIRS.iter().position(|&p| p == (i, j)).expect("distinct indices below 4")
}

/// Weights `w(v_i v_j) ≥ 0` with
/// `F(e_i) = Σ_{j ≠ i} F(ē̄_j) w(v_k v_l)`, `{k, l}` the remaining pair,
/// so that the weighted 5-clique realises `f4`.
pub fn solve_clique_weights(f4: &Signature) -> Result<[Rational; 6]> {
    if f4.arity() != 4 {
        return Err(Error::ArityMismatch { expected: 4, found: f4.arity() });
    }
    if let Some(x) = (0..16u32).find(|x| x.count_ones() % 2 == 0 && !f4.value(*x).is_zero()) {
        return Err(Error::Precondition(format!("value at even point {} is non-zero", bit_string(x, 4))));
    }
    let cobar: Vec<Rational> = (0..4).map(|i| f4.value(0b1111 ^ (1 << i)).clone()).collect();
    if cobar.iter().all(Zero::is_zero) {
        return Err(Error::Precondition("the four weight-3 values are all zero".into()));
    }
    for x in 0..16u32 {
        let lhs = f4.value(x) * f4.value(x ^ 15);
        let rhs = [0b1100u32, 0b1010, 0b0110]
            .iter()
            .fold(Rational::zero(), |s, m| s + f4.value(x ^ m) * f4.value(x ^ m ^ 15));
        if lhs > rhs {
            return Err(Error::Precondition(format!("inequality fails at {}", bit_string(x, 4))));
        }
    }
    let mut sys = LinearSystem::new(6);
    for i in 0..4 {
        let rest: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        let coeffs = rest
            .iter()
            .map(|&j| {
                let other: Vec<usize> = rest.iter().copied().filter(|&k| k != j).collect();
                (pair_index(other[0], other[1]), cobar[j].clone())
            })
            .collect();
        sys.add_row(coeffs, f4.value(1 << i).clone());
    }
    match sys.solve() {
        Feasibility::Feasible(x) => Ok(std::array::from_fn(|k| x[k].clone())),
        Feasibility::Infeasible(_) => {
            Err(Error::Precondition("clique weight system infeasible although its hypotheses hold".into()))
        }
    }
}

/// The 5-clique `u, v_0..v_3`, fugacities zero, `w(u v_i) = F(ē̄_i)`,
/// externals at `v_0..v_3` labelled as `f4`.
pub fn clique_gadget(f4: &Signature, weights: &[Rational; 6]) -> Result<MatchingsCircuit> {
    let mut g = MatchingsCircuit::new();
    let u = g.add_vertex("u", Rational::zero())?;
    let v: Vec<usize> =
        (0..4).map(|i| g.add_vertex(&format!("v{i}"), Rational::zero())).collect::<Result<_>>()?;
    for i in 0..4 {
        g.add_edge(u, v[i], f4.value(0b1111 ^ (1 << i)).clone())?;
    }
    for (k, &(i, j)) in CLIQUE_PAIRS.iter().enumerate() {
        g.add_edge(v[i], v[j], weights[k].clone())?;
    }
    for i in 0..4 {
        g.add_external(f4.index_set().label(i), v[i])?;
    }
    Ok(g)
}

/// A matchings circuit for a windable arity-3 signature: flip `F_⊕` so the
/// weighted K4 realizes it, solve the clique weights, subdivide the flipped
/// externals and sum the parity input out.
pub fn synthesize_arity3(f: &Signature) -> Result<MatchingsCircuit> {
    if f.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, found: f.arity() });
    }
    if let Some(x) = arity3_violation(f)? {
        return Err(Error::NotWindable(format!(
            "F(x)F(x̄) exceeds the sum of the three swapped products at x = {}",
            bit_string(x, 3)
        )));
    }
    if f.is_zero() {
        return zero_gadget(f.index_set());
    }
    let fp = f.parity_extend();
    let x = fp.support().next().expect("non-zero signature");
    let z = x ^ 0b1110;
    let f2 = fp.flip(z);
    let w = solve_clique_weights(&f2)?;
    let mut g = clique_gadget(&f2, &w)?;
    for i in 0..4 {
        if z >> i & 1 == 1 {
            g.subdivide_external(i)?;
        }
    }
    drop_parity(&g)
}

/// Matchings circuit for any windable signature of arity at most 3; lower
/// arities are padded with inputs pinned to 0.
pub fn synthesize(f: &Signature) -> Result<MatchingsCircuit> {
    match f.arity() {
        0 => constant_gadget(f.value(0).clone()),
        3 => synthesize_arity3(f),
        k if k < 3 => {
            let mut padded = f.clone();
            for j in k..3 {
                let mut name = format!("pad{j}");
                while padded.index_set().position(&name).is_some() {
                    name.push('\'');
                }
                padded = padded.tensor(&Signature::from_ints(&[name], &[1, 0])?)?;
            }
            let mut g = synthesize_arity3(&padded)?;
            let pin0 = even_gadget(&IndexSet::anonymous(1)?)?;
            for _ in k..3 {
                g.attach_unary(k, &pin0)?;
            }
            Ok(g)
        }
        k => Err(Error::ArityCap { arity: k, cap: 3 }),
    }
}

/// The registered circuit for `f`: built-in gadgets for fugacity, parity
/// and OR signatures of any arity, synthesis up to arity 3. `None` when no
/// circuit is known.
pub fn gadget_for(f: &Signature) -> Result<Option<MatchingsCircuit>> {
    let idx = f.index_set();
    let k = f.arity();
    if f.is_zero() {
        return zero_gadget(idx).map(Some);
    }
    if k == 0 {
        return constant_gadget(f.value(0).clone()).map(Some);
    }
    let is = |named: Named| Signature::named(&named, idx.clone()).map(|s| s == *f).unwrap_or(false);
    if is(Named::Fugacity(f.value(0).clone())) {
        return fugacity_gadget(f.value(0).clone(), idx).map(Some);
    }
    if is(Named::Even) {
        return even_gadget(idx).map(Some);
    }
    if is(Named::Odd) {
        return odd_gadget(idx).map(Some);
    }
    if is(Named::Or) {
        return or_gadget(idx).map(Some);
    }
    if k <= 3 {
        return match synthesize(f) {
            Ok(g) => Ok(Some(g)),
            Err(Error::NotWindable(_)) => Ok(None),
            Err(e) => Err(e),
        };
    }
    Ok(None)
}

/// Replace every vertex of `c` by its registered matchings circuit. The
/// result has the signature of `c`, externals in the same order.
pub fn substitute(c: &Circuit) -> Result<MatchingsCircuit> {
    let mut g = MatchingsCircuit::new();
    let mut cache: HashMap<Vec<Rational>, MatchingsCircuit> = HashMap::new();
    let mut att = vec![usize::MAX; c.num_incidences()];
    for v in c.vertices() {
        let key = v.signature.table().to_vec();
        if !cache.contains_key(&key) {
            let anon = v.signature.relabel(IndexSet::anonymous(v.signature.arity())?)?;
            let gadget = gadget_for(&anon)?.ok_or_else(|| Error::NotExpressible(v.name.clone()))?;
            cache.insert(key.clone(), gadget);
        }
        let gadget = &cache[&key];
        let map = g.embed(gadget, &format!("{}/", v.name))?;
        for (slot, &i) in v.incidences.iter().enumerate() {
            att[i] = map[gadget.externals[slot].1];
        }
    }
    for &(a, b) in c.edges() {
        g.add_edge(att[a], att[b], Rational::one())?;
    }
    for &i in c.externals() {
        g.add_external(c.incidence_name(i), att[i])?;
    }
    Ok(g)
}

/// A simple graph `G` and constant `C` with `#PM(G) = C · Z₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmReduction {
    pub graph: PmGraph,
    pub constant: BigUint,
}

/// Closed matchings circuit to plain perfect matchings: lift to zero
/// fugacities, drop the parity edge, splice `G_{q,p}` into each edge of
/// weight `p/q ∉ {0, 1}`, then drop loops and subdivide every edge twice.
pub fn weighted_to_pm(g: &MatchingsCircuit) -> Result<PmReduction> {
    if !g.is_closed() {
        return Err(Error::NotClosed);
    }
    let mut g3 = lift_to_parity(g)?;
    g3.remove_external(0)?;
    let mut n = g3.num_vertices();
    let mut edges = Vec::with_capacity(g3.edges.len());
    let mut constant = BigUint::one();
    let mut cache: HashMap<(BigUint, BigUint), MatchingsCircuit> = HashMap::new();
    for (u, v, w) in &g3.edges {
        if w.is_zero() {
            continue;
        }
        if w.is_one() {
            edges.push((*u, *v));
            continue;
        }
        let p = w.numer().magnitude().clone();
        let q = w.denom().magnitude().clone();
        let gadget = cache.entry((q.clone(), p.clone())).or_insert_with(|| build_gpq(&q, &p));
        for (a, b, _) in &gadget.edges {
            edges.push((n + a, n + b));
        }
        edges.push((*u, n + gadget.externals[0].1));
        edges.push((n + gadget.externals[1].1, *v));
        n += gadget.num_vertices();
        constant *= q;
    }
    let graph = PmGraph::new(n, edges)?.without_loops().subdivide3();
    Ok(PmReduction { graph, constant })
}

/// `Holant ≤ #PM` for a closed circuit whose constraints all have
/// registered matchings circuits.
pub fn reduce_to_pm(c: &Circuit) -> Result<PmReduction> {
    if !c.is_closed() {
        return Err(Error::NotClosed);
    }
    weighted_to_pm(&substitute(c)?)
}
