mod common;

use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use holant::circuit::total_weight_brute_force;
use holant::class;
use holant::counter::pin_edge;
use holant::io::{self, Document};
use holant::matchgates;
use holant::mcmc::ChainContext;
use holant::pm::{count_perfect_matchings, count_perfect_matchings_naive, PmGraph, NAIVE_PM_CAP};
use holant::signature::int;
use holant::{Named, Rational, Signature};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn open_shape() -> Shape {
    Shape { vertices: (1, 4), arity: (1, 3), internal: 5, externals: 4, closed: false, connected: false }
}

fn closed_shape(edges: usize) -> Shape {
    Shape { vertices: (1, 4), arity: (1, 4), internal: edges, externals: 0, closed: true, connected: false }
}

/// `write(parse(write(x))) == write(x)` and the parsed value equals `x`.
fn round_trips(d: Document) -> Result<(), TestCaseError> {
    let text = io::write_document(&d).unwrap();
    let back = io::read_document(&text).unwrap();
    prop_assert_eq!(io::write_document(&back).unwrap(), text);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signature_files_round_trip(seed: u64, arity in 0usize..5) {
        let f = random_signature(&mut rng(seed), arity);
        let text = io::write_signature(&f);
        prop_assert_eq!(io::parse_signature(&text).unwrap(), f.clone());
        round_trips(Document::Signature(f))?;
    }

    #[test]
    fn circuit_files_round_trip(seed: u64) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, &open_shape(), |r, a| random_signature(r, a));
        let back = io::parse_circuit(&io::write_circuit(&c)).unwrap();
        prop_assert_eq!(back.signature_of().unwrap(), c.signature_of().unwrap());
        round_trips(Document::Circuit(c))?;
    }

    #[test]
    fn graph_files_round_trip(seed: u64) {
        let mut r = rng(seed);
        let g = random_labelled(&mut r, 4, 6);
        prop_assert_eq!(io::parse_labelled(&io::write_labelled(&g)).unwrap(), g.clone());
        round_trips(Document::Labelled(g))?;
        let s = random_sfo(&mut r, 4, 6);
        prop_assert_eq!(io::parse_sfo(&io::write_sfo(&s)).unwrap(), s.clone());
        round_trips(Document::Sfo(s))?;
    }

    #[test]
    fn matchings_files_round_trip(seed: u64) {
        let mut r = rng(seed);
        let arity = r.gen_range(0..4);
        let g = random_matchings(&mut r, 5, 6, arity);
        let back = io::parse_matchings(&io::write_matchings(&g).unwrap()).unwrap();
        prop_assert_eq!(back.signature().unwrap(), g.signature().unwrap());
        round_trips(Document::Matchings(g))?;
    }

    #[test]
    fn compiled_matchings_signature_matches_enumeration(seed: u64) {
        let mut r = rng(seed);
        let arity = r.gen_range(0..5);
        let g = random_matchings(&mut r, 6, 8, arity);
        prop_assert_eq!(g.signature().unwrap(), g.signature_by_enumeration().unwrap());
    }

    #[test]
    fn matchings_signatures_are_windable(seed: u64) {
        let mut r = rng(seed);
        let arity = r.gen_range(1..5);
        let f = random_matchings(&mut r, 5, 6, arity).signature().unwrap();
        prop_assert!(class::is_windable(&f).unwrap().is_windable());
    }

    #[test]
    fn synthesis_round_trips(seed: u64, arity in 0usize..4) {
        let mut r = rng(seed);
        let f = random_signature(&mut r, arity);
        match matchgates::synthesize(&f) {
            Ok(g) => prop_assert_eq!(g.signature().unwrap().table().to_vec(), f.table().to_vec()),
            Err(_) => prop_assert!(!class::is_windable(&f).unwrap().is_windable()),
        }
    }

    #[test]
    fn lift_adds_parity(seed: u64) {
        let mut r = rng(seed);
        let arity = r.gen_range(0..3);
        let g = random_matchings(&mut r, 4, 4, arity);
        let lifted = matchgates::lift_to_parity(&g).unwrap();
        prop_assert!(lifted.fugacities().iter().all(|l| l.is_zero()));
        let f = g.signature().unwrap();
        prop_assert_eq!(lifted.signature().unwrap().table().to_vec(), f.parity_extend().table().to_vec());
        let dropped = matchgates::drop_parity(&lifted).unwrap();
        prop_assert_eq!(dropped.signature().unwrap().table().to_vec(), f.table().to_vec());
    }

    #[test]
    fn perfect_matching_reduction_is_exact(seed: u64) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, &closed_shape(4), |r, a| {
            let kind = match (a, r.gen_range(0..4)) {
                (2, 3) => Named::Edge(small_rational(r)),
                (1, 3) => Named::Fugacity(small_rational(r)),
                (_, 0) => Named::Even,
                (_, 1) => Named::Odd,
                _ => Named::Or,
            };
            Signature::named_anon(&kind, a).unwrap()
        });
        let red = matchgates::reduce_to_pm(&c).unwrap();
        prop_assert!(red.graph.is_simple());
        let pm = Rational::from_integer(count_perfect_matchings(&red.graph).into());
        prop_assert_eq!(pm, Rational::from_integer(red.constant.into()) * c.evaluate(0));
    }

    #[test]
    fn perfect_matching_counters_agree(seed: u64) {
        let mut r = rng(seed);
        let n = r.gen_range(0..=12usize);
        let m = if n == 0 { 0 } else { r.gen_range(0..3 * n) };
        let edges = (0..m).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
        let g = PmGraph::new(n, edges).unwrap();
        prop_assert!(g.n <= NAIVE_PM_CAP);
        prop_assert_eq!(count_perfect_matchings_naive(&g).unwrap(), count_perfect_matchings(&g));
        let text = g.render(&7u32.into());
        prop_assert_eq!(PmGraph::parse(&text).unwrap(), (g, 7u32.into()));
    }

    #[test]
    fn contraction_matches_evaluation(seed: u64) {
        let c = random_circuit(&mut rng(seed), &open_shape(), |r, a| random_signature(r, a));
        prop_assert_eq!(c.signature_by_greedy_contraction().unwrap(), c.signature_of().unwrap());
    }

    #[test]
    fn z_k_sum_to_total_weight(seed: u64) {
        let c = random_circuit(&mut rng(seed), &closed_shape(5), |r, a| random_signature(r, a));
        let total = (0..=c.edges().len()).fold(Rational::zero(), |acc, k| acc + c.z_k(k).unwrap());
        prop_assert_eq!(total, total_weight_brute_force(&c));
    }

    #[test]
    fn pinning_telescopes(seed: u64) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, &closed_shape(5), |r, a| random_parity_nae(r, a));
        let e = r.gen_range(0..c.edges().len());
        let z0 = pin_edge(&c, e, false).unwrap().evaluate(0);
        let z1 = pin_edge(&c, e, true).unwrap().evaluate(0);
        prop_assert_eq!(z0 + z1, c.evaluate(0));
    }

    #[test]
    fn chain_is_reversible_and_lazy(seed: u64) {
        let c = random_circuit(&mut rng(seed), &closed_shape(4), |r, a| random_windable(r, a));
        let p = ChainContext::from_circuit(&c).unwrap().transition_matrix();
        prop_assert!(p.is_stochastic());
        prop_assert!(p.is_reversible());
        prop_assert!(p.is_lazy());
    }

    #[test]
    fn strictly_terraced_closed_under_connected_circuits(seed: u64) {
        let mut r = rng(seed);
        let shape = Shape { vertices: (2, 3), arity: (1, 3), internal: 3, externals: 4, closed: false, connected: true };
        let c = random_circuit(&mut r, &shape, |r, a| random_positive(r, a));
        prop_assert!(class::is_strictly_terraced(&c.signature_of().unwrap()));
    }

    #[test]
    fn windability_witnesses_verify(seed: u64, arity in 1usize..4) {
        let f = random_signature(&mut rng(seed), arity);
        match class::is_windable(&f).unwrap() {
            class::Verdict::Windable(w) => {
                prop_assert!(class::verify_witness(&f, &w));
                let text = io::write_witness(&w);
                let back = io::parse_witness(&text).unwrap();
                prop_assert!(class::verify_witness(&f, &back));
                prop_assert_eq!(io::write_witness(&back), text);
            }
            class::Verdict::NotWindable(c) => prop_assert!(c.infeasibility.verify()),
        }
    }

    #[test]
    fn hadamard_is_an_involution(seed: u64, arity in 0usize..5) {
        let f = random_signature(&mut rng(seed), arity);
        let twice = f.hadamard_unnormalized().transform();
        let back = twice.normalized().unwrap();
        prop_assert_eq!(back.as_slice(), f.table());
    }
}

#[test]
fn even3_hadamard_is_sqrt2_equality() {
    let even = Signature::named_anon(&Named::Even, 3).unwrap();
    let h = even.hadamard_unnormalized();
    assert_eq!(h.sqrt2_exponent, -3);
    let want: Vec<Rational> = [4, 0, 0, 0, 0, 0, 0, 4].iter().map(|&v| int(v)).collect();
    assert_eq!(h.table, want);
}
