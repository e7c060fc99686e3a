//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use holant::circuit::{Label, LabelledGraph, SfoGraph};
use holant::signature::{int, ratio};
use holant::matchgates::MatchingsCircuit;
use holant::{Circuit, CircuitBuilder, IndexSet, Named, Rational, Signature};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    match rng.gen_range(0..4) {
        0 => int(0),
        1 => int(1),
        _ => ratio(rng.gen_range(0..6), rng.gen_range(1..4)),
    }
}

/// Random table with roughly a third of the entries zero.
pub fn random_signature<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let table = (0..1usize << arity).map(|_| small_rational(rng)).collect();
    Signature::new(IndexSet::anonymous(arity).unwrap(), table).unwrap()
}

pub fn random_zero_one<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let table = (0..1usize << arity).map(|_| int(rng.gen_range(0..2))).collect();
    Signature::new(IndexSet::anonymous(arity).unwrap(), table).unwrap()
}

pub fn random_positive<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let table = (0..1usize << arity).map(|_| ratio(rng.gen_range(1..6), rng.gen_range(1..4))).collect();
    Signature::new(IndexSet::anonymous(arity).unwrap(), table).unwrap()
}

/// A windable constraint from the named families.
pub fn random_windable<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let kind = match (arity, rng.gen_range(0..5)) {
        (2, 4) => Named::Edge(small_rational(rng)),
        (1, 4) => Named::Fugacity(small_rational(rng)),
        (_, 0) => Named::Even,
        (_, 1) => Named::Odd,
        (_, 2) => Named::Nae,
        (_, _) => Named::EvenNae,
    };
    Signature::named_anon(&kind, arity).unwrap()
}

pub fn random_parity_nae<R: Rng>(rng: &mut R, arity: usize) -> Signature {
    let kind = [Named::Even, Named::Odd, Named::Nae][rng.gen_range(0..3)].clone();
    Signature::named_anon(&kind, arity).unwrap()
}

/// Random circuit shape. `internal` caps the internal edges; every
/// incidence not used by an internal edge is external.
pub struct Shape {
    pub vertices: (usize, usize),
    pub arity: (usize, usize),
    pub internal: usize,
    pub externals: usize,
    pub closed: bool,
    pub connected: bool,
}

pub fn random_circuit<R: Rng>(
    rng: &mut R,
    shape: &Shape,
    mut sig: impl FnMut(&mut R, usize) -> Signature,
) -> Circuit {
    loop {
        let k = rng.gen_range(shape.vertices.0..=shape.vertices.1);
        let arities: Vec<usize> = (0..k).map(|_| rng.gen_range(shape.arity.0..=shape.arity.1)).collect();
        let total: usize = arities.iter().sum();
        let pairs = if shape.closed {
            if total % 2 == 1 || total / 2 > shape.internal {
                continue;
            }
            total / 2
        } else {
            let lo = total.saturating_sub(shape.externals).div_ceil(2);
            let hi = shape.internal.min(total / 2);
            if lo > hi {
                continue;
            }
            rng.gen_range(lo..=hi)
        };
        let mut b = CircuitBuilder::new();
        let mut incs = Vec::new();
        let mut owner = Vec::new();
        for (v, &a) in arities.iter().enumerate() {
            let id = b.add_vertex(&format!("v{v}"), sig(rng, a)).unwrap();
            for s in 0..a {
                incs.push(b.incidence(id, s));
                owner.push(v);
            }
        }
        let mut order: Vec<usize> = (0..incs.len()).collect();
        order.shuffle(rng);
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for e in 0..pairs {
            let (i, j) = (order[2 * e], order[2 * e + 1]);
            b.connect(incs[i], incs[j]);
            let (a, c) = (find(&mut parent, owner[i]), find(&mut parent, owner[j]));
            parent[a] = c;
        }
        let mut ext: Vec<usize> = order[2 * pairs..].to_vec();
        ext.sort_unstable();
        for i in ext {
            b.external(incs[i]);
        }
        if shape.connected {
            let root = find(&mut parent, 0);
            if (0..k).any(|v| find(&mut parent, v) != root) {
                continue;
            }
        }
        return b.build().unwrap();
    }
}

/// Random multigraph for sink-free orientations, loops excluded.
pub fn random_sfo<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> SfoGraph {
    let n = rng.gen_range(2..=max_vertices);
    let m = rng.gen_range(1..=max_edges);
    let edges = (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            (u, v, rng.gen_bool(0.3))
        })
        .collect();
    SfoGraph { vertices: (0..n).map(|v| format!("s{v}")).collect(), edges }
}

/// Random Even/Odd/NAE multigraph (loops allowed).
pub fn random_labelled<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> LabelledGraph {
    let n = rng.gen_range(1..=max_vertices);
    let m = rng.gen_range(1..=max_edges);
    let labels = [Label::Even, Label::Odd, Label::Nae];
    LabelledGraph {
        vertices: (0..n).map(|v| (format!("v{v}"), labels[rng.gen_range(0..3)])).collect(),
        edges: (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect(),
    }
}

/// Random weighted matchings circuit with `arity` external edges.
pub fn random_matchings<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize, arity: usize) -> MatchingsCircuit {
    let mut g = MatchingsCircuit::new();
    let n = rng.gen_range(1..=max_vertices);
    for v in 0..n {
        let lambda = if rng.gen_bool(0.5) { int(0) } else { small_rational(rng) };
        g.add_vertex(&format!("u{v}"), lambda).unwrap();
    }
    for _ in 0..rng.gen_range(0..=max_edges) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            g.add_edge(u, v, small_rational(rng)).unwrap();
        }
    }
    for k in 0..arity {
        g.add_external(&format!("x{k}"), rng.gen_range(0..n)).unwrap();
    }
    g
}
