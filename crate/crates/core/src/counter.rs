//! Approximate counting by self-reduction: pin edges one at a time and
//! multiply the estimated conditional probabilities.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Vertex};
use crate::error::{Error, Result};
use crate::mcmc::{find_initial_assignment, forced_edges, Sampler, SamplerConfig};
use crate::signature::{IndexSet, Named, Rational, Signature};

/// Replace internal edge `e` by two pendant edges ending at `Even_1`
/// (`bit = false`) or `Odd_1` (`bit = true`) vertices. Edge `e` keeps its
/// index as the first pendant edge; the second is appended.
pub fn pin_edge(c: &Circuit, e: usize, bit: bool) -> Result<Circuit> {
    let &(a, b) = c.edges().get(e).ok_or(Error::NotInternal(e))?;
    let kind = if bit { Named::Odd } else { Named::Even };
    let (mut vertices, mut names, mut owner, mut edges, externals) = c.clone().into_parts();
    let mut pendant = |tag: &str| -> Result<usize> {
        let v = vertices.len();
        let name = format!("pin{e}{tag}");
        let i = names.len();
        names.push(format!("{name}.0"));
        owner.push((v, 0));
        let sig = Signature::named(&kind, IndexSet::new([format!("{name}.0")])?)?;
        vertices.push(Vertex { name, incidences: vec![i], signature: sig });
        Ok(i)
    };
    let pa = pendant("a")?;
    let pb = pendant("b")?;
    edges[e] = (a, pa);
    edges.push((b, pb));
    Circuit::assemble(vertices, names, owner, edges, externals)
}

/// Settings for [`estimate_count`].
#[derive(Clone, Debug, PartialEq)]
pub struct CounterConfig {
    pub epsilon: f64,
    /// Step and attempt overrides passed to every sampler; `delta` is set
    /// by the schedule.
    pub steps: Option<u64>,
    pub attempts: Option<u64>,
    pub threads: usize,
}

impl CounterConfig {
    pub fn new(epsilon: f64) -> Self {
        CounterConfig { epsilon, steps: None, attempts: None, threads: 1 }
    }
}

/// Per-edge sampling schedule for `m` edges: `(pilot, main, δ)`.
///
/// The pilot batch picks the branch `b`; with `50 ln(20m)` pilot samples a
/// branch of true mass below `0.4` is picked with probability under
/// `1/(20m)` per edge. The main batch then estimates `Pr[x_e = b]`
/// without selection bias; with `36m/ε²` samples the product of the
/// estimates has relative variance at most `0.043ε²`, so by Chebyshev it
/// misses its mean by more than `ε/2` with probability at most `0.172`.
/// Sampler bias is `δ = ε/(40m)` per sample, moving the mean by at most a
/// factor `e^{±ε/16}`.
pub fn schedule(m: usize, epsilon: f64) -> (u64, u64, f64) {
    let m = m.max(1) as f64;
    let pilot = (50.0 * (20.0 * m).ln()).ceil() as u64;
    let main = (36.0 * m / (epsilon * epsilon)).ceil() as u64;
    (pilot, main, epsilon / (40.0 * m))
}

/// Estimate with the per-edge record of the self-reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: Rational,
    /// `(edge, pinned bit, samples with that bit, samples)` per edge; a
    /// forced edge records a full count without sampling.
    pub trail: Vec<(usize, bool, u64, u64)>,
    /// Samples replaced by the initial assignment after the sampler gave up.
    pub fallbacks: u64,
}

/// Samples drawn in one seeded chunk.
const CHUNK: u64 = 64;

/// FPRAS for `Z₀` of a closed circuit. Randomness for edge `k`, batch
/// `p` (pilot 0, main 1) and chunk `j` comes from the ChaCha8 stream
/// `k << 33 | p << 32 | j` of `seed`, so the result does not depend on
/// `threads`.
pub fn estimate_count(c: &Circuit, cfg: &CounterConfig, seed: u64) -> Result<Estimate> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 1], got {}", cfg.epsilon)));
    }
    if !c.is_closed() {
        return Err(Error::NotClosed);
    }
    if find_initial_assignment(c)?.is_none() {
        return Ok(Estimate { value: Rational::zero(), trail: Vec::new(), fallbacks: 0 });
    }
    let m = c.edges().len();
    let (n_pilot, n_samples, delta) = schedule(m, cfg.epsilon);
    let scfg = SamplerConfig { delta, steps: cfg.steps, attempts: cfg.attempts };
    let mut cur = c.clone();
    let mut ratio = Rational::one();
    let mut trail = Vec::with_capacity(m);
    let mut fallbacks = 0;
    for e in 0..m {
        // an edge fixed by propagation has conditional probability one
        if let Some(bit) = forced_edges(&cur)?.and_then(|f| f[e]) {
            trail.push((e, bit, n_samples, n_samples));
            cur = pin_edge(&cur, e, bit)?;
            continue;
        }
        let sampler = Sampler::new(&cur, &scfg)?;
        let threads = cfg.threads.max(1);
        let (pilot_ones, fb) = count_ones(&sampler, &cur, (e, 0), n_pilot, seed, threads);
        let bit = 2 * pilot_ones >= n_pilot;
        let (ones, fb2) = count_ones(&sampler, &cur, (e, 1), n_samples, seed, threads);
        fallbacks += fb + fb2;
        let hits = if bit { ones } else { n_samples - ones };
        ratio *= Rational::new(BigInt::from(hits), BigInt::from(n_samples));
        trail.push((e, bit, hits, n_samples));
        cur = pin_edge(&cur, e, bit)?;
    }
    let rest = cur.z_k(0)?;
    Ok(Estimate { value: rest / ratio, trail, fallbacks })
}

/// Samples with `x_e = 1` among `n` draws, and the number of fallbacks.
fn count_ones(
    s: &Sampler,
    c: &Circuit,
    (e, batch): (usize, u64),
    n: u64,
    seed: u64,
    threads: usize,
) -> (u64, u64) {
    let a = c.edges()[e].0;
    let chunks = n.div_ceil(CHUNK);
    let run = |j: u64| -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((e as u64) << 33 | batch << 32 | j);
        let len = CHUNK.min(n - j * CHUNK);
        let (mut ones, mut fb) = (0, 0);
        for _ in 0..len {
            let bit = match s.sample(&mut rng) {
                Ok(smp) => smp.config[a],
                Err(_) => {
                    fb += 1;
                    s.initial()[a]
                }
            };
            ones += bit as u64;
        }
        (ones, fb)
    };
    if threads == 1 {
        return (0..chunks).map(run).fold((0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads as u64)
            .map(|t| {
                let run = &run;
                scope.spawn(move || {
                    (t..chunks).step_by(threads).map(run).fold((0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling thread panicked"))
            .fold((0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
    })
}
