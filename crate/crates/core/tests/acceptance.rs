//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Seeds and tolerances are fixed here.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use holant::circuit::{Label, LabelledGraph};
use holant::class::{self, Verdict};
use holant::counter::{estimate_count, CounterConfig};
use holant::matchgates::{self, MatchingsCircuit};
use holant::mcmc::{step_budget, ChainContext, Sampler, SamplerConfig};
use holant::pm::{count_perfect_matchings, count_perfect_matchings_naive, NAIVE_PM_CAP};
use holant::prat;
use holant::signature::{int, ratio};
use holant::{Circuit, IndexSet, Named, Rational, Signature};

use common::*;

/// Counter accuracy window and required hit count.
const COUNT_EPS: f64 = 0.2;
const COUNT_TRIALS: usize = 20;
const COUNT_HITS: usize = 15;
/// Practical chain length per sample: `PRACTICAL_STEPS_PER_N2 · n²` for
/// `n` incidences.
const PRACTICAL_STEPS_PER_N2: u64 = 10;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn anon(n: usize) -> IndexSet {
    IndexSet::anonymous(n).unwrap()
}

fn criterion1() -> Check {
    let mut r = rng(1);
    let shape = Shape { vertices: (1, 5), arity: (1, 4), internal: 8, externals: 6, closed: false, connected: false };
    for k in 0..200 {
        let c = random_circuit(&mut r, &shape, |r, a| random_signature(r, a));
        let direct = c.signature_of().map_err(|e| e.to_string())?;
        let folded = c.signature_by_greedy_contraction().map_err(|e| e.to_string())?;
        ensure(direct == folded, || format!("circuit {k}: evaluate and contraction fold differ"))?;
    }
    Ok("200 circuits agree".into())
}

fn criterion2() -> Check {
    let mut r = rng(2);
    let mut total = 0;
    for k in 0..50 {
        let g = random_sfo(&mut r, 4, 6);
        let want = g.count_sink_free();
        let c = g.to_nae_parity().to_circuit().map_err(|e| e.to_string())?;
        let got = c.evaluate(0);
        ensure(got == int(want as i64), || format!("graph {k}: {want} orientations, evaluate gives {got}"))?;
        total += want;
    }
    Ok(format!("50 graphs, {total} orientations in total"))
}

/// The 256 zero-one arity-3 signatures and 200 random rational ones.
fn arity3_battery() -> Vec<Signature> {
    let mut out: Vec<Signature> = (0..256u32)
        .map(|t| Signature::new(anon(3), (0..8).map(|i| int((t >> i & 1) as i64)).collect()).unwrap())
        .collect();
    let mut r = rng(3);
    out.extend((0..200).map(|_| random_signature(&mut r, 3)));
    out
}

fn criterion3() -> Check {
    let mut windable = 0;
    for (k, f) in arity3_battery().iter().enumerate() {
        let by_lp = class::is_windable(f).map_err(|e| e.to_string())?;
        let by_ineq = class::check_arity3_inequality(f).map_err(|e| e.to_string())?;
        ensure(by_lp.is_windable() == by_ineq, || format!("signature {k}: LP and inequality disagree"))?;
        match &by_lp {
            Verdict::Windable(w) => {
                windable += 1;
                ensure(class::verify_witness(f, w), || format!("signature {k}: witness fails"))?
            }
            Verdict::NotWindable(c) => {
                ensure(c.infeasibility.verify(), || format!("signature {k}: Farkas certificate fails"))?
            }
        }
    }
    Ok(format!("456 signatures, {windable} windable, all certificates verify"))
}

fn criterion4() -> Check {
    let mut n = 0;
    for (k, f) in arity3_battery().iter().enumerate() {
        if !class::check_arity3_inequality(f).map_err(|e| e.to_string())? {
            continue;
        }
        let g = matchgates::synthesize_arity3(f).map_err(|e| format!("signature {k}: {e}"))?;
        let s = g.signature().map_err(|e| e.to_string())?;
        ensure(s.table() == f.table(), || format!("signature {k}: synthesized circuit has a different signature"))?;
        n += 1;
    }
    Ok(format!("{n} windable signatures synthesized exactly"))
}

fn k4() -> MatchingsCircuit {
    let mut g = MatchingsCircuit::new();
    let v: Vec<usize> = (0..4).map(|i| g.add_vertex(&format!("v{i}"), int(0)).unwrap()).collect();
    for i in 0..4 {
        for j in i + 1..4 {
            g.add_edge(v[i], v[j], int(1)).unwrap();
        }
    }
    for (i, &x) in v.iter().enumerate() {
        g.add_external(&format!("d{i}"), x).unwrap();
    }
    g
}

fn criterion5() -> Check {
    let f = k4().signature().map_err(|e| e.to_string())?;
    ensure(f.value(0) == &int(3), || format!("K4: F(∅) = {}", f.value(0)))?;
    ensure((0..4).all(|i| f.value(1 << i).is_zero()), || "K4: F(single edge) ≠ 0".into())?;
    ensure(f.value(0b1111) == &int(1), || "K4: F(all four) ≠ 1".into())?;
    ensure(k4().signature_by_enumeration().map_err(|e| e.to_string())? == f, || "K4: oracles differ".into())?;

    let mut notes = Vec::new();
    for (p, q) in [(0u64, 1u64), (1, 1), (7, 2), (13, 5), (1 << 16, 3)] {
        let g = matchgates::build_gpq(&BigUint::from(p), &BigUint::from(q));
        let (s, how) = if g.edges().len() <= 20 {
            (g.signature_by_enumeration(), "enumeration")
        } else {
            (g.signature_by_perfect_matchings(), "perfect matchings")
        };
        let s = s.map_err(|e| e.to_string())?;
        let want = [int(p as i64), int(0), int(0), int(q as i64)];
        ensure(s.table() == want, || format!("G_{{{p},{q}}} is not diag({p},{q})"))?;
        notes.push(format!("G_{{{p},{q}}} by {how}"));
    }

    for k in 1..=5 {
        let idx = anon(k);
        let or = Signature::named(&Named::Or, idx.clone()).unwrap();
        let scale = int(1 << (k - 1));
        let raw = matchgates::or_gadget_unnormalized(&idx).map_err(|e| e.to_string())?;
        let s = raw.signature().map_err(|e| e.to_string())?;
        ensure(s.table().iter().zip(or.table()).all(|(a, b)| *a == b * &scale), || format!("OR_{k} gadget is not 2^{}·OR_{k}", k - 1))?;
        let norm = matchgates::or_gadget(&idx).and_then(|g| g.signature()).map_err(|e| e.to_string())?;
        ensure(norm.table() == or.table(), || format!("normalized OR_{k} gadget is not OR_{k}"))?;
    }
    Ok(format!("K4 3/0/1; {}; OR_1..OR_5", notes.join(", ")))
}

/// Constraint for reduction instances: gadgets with small expansions.
fn reducible<R: Rng>(r: &mut R, arity: usize) -> Signature {
    let kind = match (arity, r.gen_range(0..4)) {
        (2, 3) => Named::Edge(ratio(r.gen_range(0..4), r.gen_range(1..3))),
        (1, 3) => Named::Fugacity(ratio(r.gen_range(0..3), r.gen_range(1..3))),
        (_, 0) => Named::Even,
        (_, 1) => Named::Odd,
        _ => Named::Or,
    };
    Signature::named_anon(&kind, arity).unwrap()
}

fn criterion6() -> Check {
    let mut r = rng(6);
    let shape = Shape { vertices: (1, 2), arity: (1, 2), internal: 2, externals: 0, closed: true, connected: false };
    let (mut naive, mut frontier) = (0, 0);
    for k in 0..30 {
        let c = random_circuit(&mut r, &shape, reducible);
        let z0 = c.evaluate(0);
        let red = matchgates::reduce_to_pm(&c).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(red.graph.is_simple(), || format!("instance {k}: reduced graph is not simple"))?;
        let pm = if red.graph.n <= NAIVE_PM_CAP {
            naive += 1;
            count_perfect_matchings_naive(&red.graph).map_err(|e| e.to_string())?
        } else {
            frontier += 1;
            count_perfect_matchings(&red.graph)
        };
        let lhs = Rational::from_integer(pm.into());
        let rhs = Rational::from_integer(red.constant.clone().into()) * &z0;
        ensure(lhs == rhs, || format!("instance {k}: #PM = {lhs}, C·Z₀ = {rhs}"))?;
    }
    Ok(format!("30 instances; #PM by the exhaustive counter on {naive}, by the frontier counter on {frontier}"))
}

fn criterion7() -> Check {
    let mut r = rng(7);
    let shape = Shape { vertices: (1, 4), arity: (1, 4), internal: 6, externals: 0, closed: true, connected: false };
    for k in 0..100 {
        let c = random_circuit(&mut r, &shape, |r, a| random_windable(r, a));
        let z = |i| c.z_k(i).unwrap();
        let (z0, z2, z4) = (z(0), z(2), z(4));
        ensure(&z0 * &z4 <= &z2 * &z2, || format!("circuit {k}: Z₀Z₄ = {} > Z₂² = {}", &z0 * &z4, &z2 * &z2))?;
    }
    Ok("100 circuits".into())
}

fn satisfiable_labelled<R: Rng>(r: &mut R, max_vertices: usize, max_edges: usize) -> Circuit {
    loop {
        let g = random_labelled(r, max_vertices, max_edges);
        let c = g.to_circuit().unwrap();
        if !c.evaluate(0).is_zero() {
            return c;
        }
    }
}

fn criterion8() -> Check {
    let mut r = rng(8);
    for k in 0..100 {
        let c = satisfiable_labelled(&mut r, 4, 6);
        let z0 = c.z_k(0).unwrap();
        let z2 = c.z_k(2).unwrap();
        let bound = prat::ratio_bound(&c).map_err(|e| e.to_string())?;
        ensure(z2.clone() / &z0 <= bound, || format!("instance {k}: Z₂/Z₀ = {} exceeds {bound}", z2 / &z0))?;
    }
    let mut nae = Vec::new();
    for k in 1..=6 {
        for kind in [Named::Even, Named::Odd] {
            let p = prat::prat(&Signature::named_anon(&kind, k).unwrap()).map_err(|e| e.to_string())?;
            ensure(p.is_zero(), || format!("Prat({kind:?}_{k}) = {p}"))?;
        }
    }
    for k in 1..=4 {
        let p = prat::prat(&Signature::named_anon(&Named::Nae, k).unwrap()).map_err(|e| e.to_string())?;
        ensure(p <= int(3), || format!("Prat(NAE_{k}) = {p} > 3"))?;
        nae.push(p.to_string());
    }
    Ok(format!("100 instances; Prat(Even)=Prat(Odd)=0; Prat(NAE_1..4) = {}", nae.join(", ")))
}

fn criterion9() -> Check {
    let mut r = rng(9);
    let mut done = 0;
    let mut largest = 0;
    while done < 20 {
        let c = satisfiable_labelled(&mut r, 3, 5);
        let ctx = ChainContext::from_circuit(&c).map_err(|e| e.to_string())?;
        let p = ctx.transition_matrix();
        if p.len() > 200 || p.len() < 2 {
            continue;
        }
        largest = largest.max(p.len());
        ensure(p.is_stochastic(), || format!("instance {done}: rows do not sum to one"))?;
        ensure(p.is_reversible(), || format!("instance {done}: detailed balance fails"))?;
        ensure(p.is_lazy(), || format!("instance {done}: some P(x,x) < 1/n"))?;
        let n4 = (p.n as u64).pow(4);
        for t in [n4, 10 * n4] {
            let tv = p.certified_tv(t);
            for (a, d) in tv.iter().enumerate() {
                let bound = p.mixing_bound(a, t);
                ensure(*d <= bound, || format!("instance {done}, t = {t}, start {a}: TV {d:e} above bound {bound:e}"))?;
            }
        }
        done += 1;
    }
    Ok(format!("20 chains, up to {largest} states"))
}

fn criterion10() -> Check {
    let mut r = rng(10);
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for k in 0..COUNT_TRIALS {
        let c = satisfiable_labelled(&mut r, 4, 8);
        let z0 = c.evaluate(0);
        let n = c.num_incidences() as u64;
        let cfg = CounterConfig {
            epsilon: COUNT_EPS,
            steps: Some(PRACTICAL_STEPS_PER_N2 * n * n),
            attempts: Some(10_000),
            threads: 1,
        };
        let est = estimate_count(&c, &cfg, 1000 + k as u64).map_err(|e| format!("trial {k}: {e}"))?;
        let err = (est.value.to_f64().unwrap() / z0.to_f64().unwrap()).ln();
        worst = worst.max(err.abs());
        if err.abs() <= COUNT_EPS {
            hits += 1;
        }
    }
    ensure(hits >= COUNT_HITS, || format!("only {hits}/{COUNT_TRIALS} estimates within e^±{COUNT_EPS}"))?;

    // theta graph: two NAE vertices joined by three edges
    let theta = LabelledGraph {
        vertices: vec![("a".into(), Label::Nae), ("b".into(), Label::Nae)],
        edges: vec![(0, 1), (0, 1), (0, 1)],
    }
    .to_circuit()
    .unwrap();
    let delta = 0.5;
    let budget = step_budget(3, 2, delta).map_err(|e| e.to_string())?;
    let sampler = Sampler::new(&theta, &SamplerConfig { delta, steps: None, attempts: Some(64) })
        .map_err(|e| e.to_string())?;
    ensure(BigUint::from(sampler.steps()) == budget, || "sampler does not use the proven step budget".into())?;
    let s = sampler.sample(&mut rng(11)).map_err(|e| e.to_string())?;
    let w = theta.weight(&s.config);
    ensure(w > Rational::zero(), || "full-budget sample has weight zero".into())?;
    Ok(format!(
        "{hits}/{COUNT_TRIALS} within e^±{COUNT_EPS} (worst |ln error| {worst:.3}); full-budget theta sample after {} steps",
        sampler.steps()
    ))
}

/// Random strictly terraced signature: positive, zero-one with
/// terrace-respecting zeros, or a named parity/NAE constraint.
fn terraced<R: Rng>(r: &mut R, arity: usize) -> Signature {
    loop {
        let f = match r.gen_range(0..3) {
            0 => random_positive(r, arity),
            1 => random_parity_nae(r, arity),
            _ => random_signature(r, arity),
        };
        if class::is_strictly_terraced(&f) {
            return f;
        }
    }
}

fn windable3<R: Rng>(r: &mut R, arity: usize) -> Signature {
    loop {
        let f = if r.gen_bool(0.5) { random_windable(r, arity) } else { random_signature(r, arity) };
        if arity > 3 || class::is_windable(&f).unwrap().is_windable() {
            return f;
        }
    }
}

fn criterion11() -> Check {
    let mut r = rng(11);
    let open = |connected| Shape { vertices: (2, 3), arity: (1, 3), internal: 4, externals: 4, closed: false, connected };
    for k in 0..50 {
        let c = random_circuit(&mut r, &open(true), terraced);
        let f = c.signature_of().unwrap();
        ensure(class::is_strictly_terraced(&f), || format!("terraced circuit {k}: signature not strictly terraced"))?;
    }
    for k in 0..50 {
        let c = random_circuit(&mut r, &open(false), windable3);
        let f = c.signature_of().unwrap();
        let v = class::is_windable(&f).map_err(|e| e.to_string())?;
        ensure(v.is_windable(), || format!("windable circuit {k}: signature not windable"))?;
    }
    let mut composed = 0;
    while composed < 20 {
        let c = random_circuit(&mut r, &open(false), |r, a| random_windable(r, a));
        let ws = match class::vertex_witnesses(&c) {
            Ok(ws) => ws,
            Err(_) => continue,
        };
        let w = class::compose_witness(&c, &ws).map_err(|e| e.to_string())?;
        let f = c.signature_of().unwrap();
        ensure(class::verify_witness(&f, &w), || format!("composed witness {composed} fails"))?;
        composed += 1;
    }
    Ok("50 terraced and 50 windable circuits closed; 20 composed witnesses verify".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 11] = [
        ("1 evaluation oracles", criterion1, Duration::from_secs(60)),
        ("2 sink-free orientations", criterion2, Duration::from_secs(60)),
        ("3 arity-3 windability", criterion3, Duration::from_secs(600)),
        ("4 arity-3 synthesis", criterion4, Duration::from_secs(600)),
        ("5 gadget values", criterion5, Duration::MAX),
        ("6 perfect-matching reduction", criterion6, Duration::from_secs(300)),
        ("7 Z0 Z4 <= Z2^2", criterion7, Duration::MAX),
        ("8 ratio bound", criterion8, Duration::MAX),
        ("9 chain", criterion9, Duration::from_secs(300)),
        ("10 approximate counting", criterion10, Duration::MAX),
        ("11 closure", criterion11, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let out = match out {
            Ok(msg) if took > limit => Err(format!("{msg}, but took {took:.1?} (limit {limit:?})")),
            other => other,
        };
        match out {
            Ok(msg) => println!("PASS {name}: {msg} [{took:.1?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg} [{took:.1?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
