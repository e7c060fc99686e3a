//! The near-assignments Metropolis chain and the rejection sampler built on
//! it.
//!
//! States are configurations of all incidences of a closed circuit (bit `i`
//! is incidence `i`) that violate zero or two internal edges and have
//! positive weight. The weight is the product of the vertex constraints,
//! restricted to configurations of even total weight.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::signature::{int, Rational, Signature};

/// Largest number of incidences a chain can carry.
pub const MAX_INCIDENCES: usize = 64;

#[derive(Clone, Debug)]
struct Factor {
    slots: Vec<u8>,
    table: Vec<Rational>,
}

impl Factor {
    fn local(&self, x: u64) -> usize {
        self.slots
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &s)| acc | (((x >> s) & 1) as usize) << k)
    }
}

/// Immutable description of a chain: constraint factors, the pairing `E`
/// of incidences, and `n = |J|`.
#[derive(Clone, Debug)]
pub struct ChainContext {
    n: usize,
    factors: Vec<Factor>,
    /// Factor owning each incidence.
    factor_of: Vec<usize>,
    /// Factor and local bit of each incidence.
    slot_of: Vec<(usize, u32)>,
    /// Positivity of every factor entry, factor `f` starting at `offset[f]`.
    positive: Vec<bool>,
    offset: Vec<usize>,
    partner: Vec<usize>,
    edges: Vec<(usize, usize)>,
    zero_one: bool,
}

/// Current configuration and its number of violated edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub x: u64,
    pub violations: u32,
}

impl ChainContext {
    /// Chain for a closed circuit: one factor per vertex, `E` its edges.
    pub fn from_circuit(c: &Circuit) -> Result<Self> {
        if !c.is_closed() {
            return Err(Error::NotClosed);
        }
        let factors = c
            .vertices()
            .iter()
            .map(|v| Factor {
                slots: v.incidences.iter().map(|&i| i as u8).collect(),
                table: v.signature.table().to_vec(),
            })
            .collect();
        Self::assemble(c.num_incidences(), factors, c.edges())
    }

    /// Chain for a single signature over `J` and a perfect pairing of `J`.
    pub fn from_signature(f: &Signature, pairs: &[(usize, usize)]) -> Result<Self> {
        let factor = Factor {
            slots: (0..f.arity() as u8).collect(),
            table: f.table().to_vec(),
        };
        Self::assemble(f.arity(), vec![factor], pairs)
    }

    fn assemble(n: usize, factors: Vec<Factor>, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_INCIDENCES {
            return Err(Error::ArityCap { arity: n, cap: MAX_INCIDENCES });
        }
        let mut partner = vec![usize::MAX; n];
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::Precondition("E must be a perfect pairing".into()));
            }
            partner[a] = b;
            partner[b] = a;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::Precondition("E must be a perfect pairing".into()));
        }
        let mut factor_of = vec![usize::MAX; n];
        let mut slot_of = vec![(0, 0); n];
        for (k, f) in factors.iter().enumerate() {
            for (b, &s) in f.slots.iter().enumerate() {
                if s as usize >= n || factor_of[s as usize] != usize::MAX {
                    return Err(Error::Precondition("each incidence needs exactly one factor".into()));
                }
                factor_of[s as usize] = k;
                slot_of[s as usize] = (k, b as u32);
            }
        }
        if factor_of.contains(&usize::MAX) {
            return Err(Error::Precondition("each incidence needs exactly one factor".into()));
        }
        let zero_one = factors.iter().all(|f| f.table.iter().all(|v| v.is_zero() || v.is_one()));
        let mut offset = Vec::with_capacity(factors.len());
        let mut positive = Vec::new();
        for f in &factors {
            offset.push(positive.len());
            positive.extend(f.table.iter().map(|v| !v.is_zero()));
        }
        Ok(ChainContext { n, factors, factor_of, slot_of, positive, offset, partner, edges: pairs.to_vec(), zero_one })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// All factor values are 0 or 1, so every admissible move is accepted.
    pub fn is_zero_one(&self) -> bool {
        self.zero_one
    }

    /// `F(x)`: product of factors, zero on odd total weight.
    pub fn weight(&self, x: u64) -> Rational {
        if x.count_ones() % 2 == 1 {
            return Rational::zero();
        }
        let mut w = Rational::one();
        for f in &self.factors {
            w *= &f.table[f.local(x)];
            if w.is_zero() {
                break;
            }
        }
        w
    }

    pub fn violations(&self, x: u64) -> u32 {
        self.edges.iter().filter(|&&(a, b)| (x >> a ^ x >> b) & 1 == 1).count() as u32
    }

    /// The state for `x`, if `x ∈ Ω₀ ∪ Ω₂`.
    pub fn state(&self, x: u64) -> Option<ChainState> {
        let v = self.violations(x);
        ((v == 0 || v == 2) && !self.weight(x).is_zero()).then_some(ChainState { x, violations: v })
    }

    /// `Ω₀ ∪ Ω₂` in increasing order.
    pub fn state_space(&self) -> Vec<u64> {
        let m = self.edges.len();
        assert!(m <= 30, "state space too large to enumerate");
        let mut out = Vec::new();
        let mut emit = |violated: &[usize]| {
            for pat in 0..1u64 << m {
                let mut x = 0u64;
                for (e, &(a, b)) in self.edges.iter().enumerate() {
                    let bit = pat >> e & 1;
                    x |= bit << a;
                    x |= if violated.contains(&e) { (bit ^ 1) << b } else { bit << b };
                }
                if !self.weight(x).is_zero() {
                    out.push(x);
                }
            }
        };
        emit(&[]);
        for e in 0..m {
            for f in e + 1..m {
                emit(&[e, f]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Violation count after flipping incidences `i` and `j`.
    fn violations_after(&self, s: &ChainState, i: usize, j: usize) -> u32 {
        let y = s.x ^ (1 << i) ^ (1 << j);
        let mut v = s.violations as i64;
        let ei = (i.min(self.partner[i]), i.max(self.partner[i]));
        let ej = (j.min(self.partner[j]), j.max(self.partner[j]));
        let mut touch = |(a, b): (usize, usize)| {
            let before = (s.x >> a ^ s.x >> b) & 1;
            let after = (y >> a ^ y >> b) & 1;
            v += after as i64 - before as i64;
        };
        touch(ei);
        if ej != ei {
            touch(ej);
        }
        v as u32
    }

    /// Factors whose value can change when `i` and `j` flip.
    fn affected(&self, i: usize, j: usize) -> ([usize; 2], usize) {
        let (a, b) = (self.factor_of[i], self.factor_of[j]);
        if a == b {
            ([a, a], 1)
        } else {
            ([a, b], 2)
        }
    }

    /// `F(y)/F(x)` as a fraction over the affected factors; `None` when
    /// `F(y) = 0`.
    fn local_ratio(&self, x: u64, i: usize, j: usize) -> Option<(Rational, Rational)> {
        let y = x ^ (1 << i) ^ (1 << j);
        let (fs, k) = self.affected(i, j);
        let mut num = Rational::one();
        let mut den = Rational::one();
        for &f in &fs[..k] {
            let fac = &self.factors[f];
            let new = &fac.table[fac.local(y)];
            if new.is_zero() {
                return None;
            }
            num *= new;
            den *= &fac.table[fac.local(x)];
        }
        Some((num, den))
    }

    fn local_positive(&self, y: u64, i: usize, j: usize) -> bool {
        let (fs, k) = self.affected(i, j);
        fs[..k].iter().all(|&f| !self.factors[f].table[self.factors[f].local(y)].is_zero())
    }

    /// One Metropolis update.
    pub fn step<R: RngCore + ?Sized>(&self, s: &mut ChainState, rng: &mut R) {
        let (i, j) = draw_pair(rng, self.n);
        if i == j {
            return;
        }
        let v = self.violations_after(s, i, j);
        if v != 0 && v != 2 {
            return;
        }
        let y = s.x ^ (1 << i) ^ (1 << j);
        if self.zero_one {
            if self.local_positive(y, i, j) {
                *s = ChainState { x: y, violations: v };
            }
            return;
        }
        let Some((num, den)) = self.local_ratio(s.x, i, j) else {
            return;
        };
        if num >= den || accept(&(num / den), rng.next_u64()) {
            *s = ChainState { x: y, violations: v };
        }
    }

    /// Run `t` steps; draws the same random numbers as `t` calls to
    /// [`ChainContext::step`] and ends in the same state.
    pub fn run<R: RngCore + ?Sized>(&self, s: &mut ChainState, t: u64, rng: &mut R) {
        let mut w = Walker::new(self, *s);
        for _ in 0..t {
            w.advance(rng);
        }
        *s = ChainState { x: w.x, violations: w.violations };
    }

    /// Row `x` of `P`, including the self-loop, sorted by target.
    pub fn transition_row(&self, x: u64) -> Vec<(u64, Rational)> {
        let fx = self.weight(x);
        let coeff = Rational::new(BigInt::from(2), BigInt::from(self.n * self.n));
        let mut row = Vec::new();
        let mut stay = Rational::one();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let y = x ^ (1 << i) ^ (1 << j);
                let v = self.violations(y);
                if v != 0 && v != 2 {
                    continue;
                }
                let fy = self.weight(y);
                if fy.is_zero() {
                    continue;
                }
                let r = &fy / &fx;
                let p = if r >= Rational::one() { coeff.clone() } else { &coeff * r };
                stay -= &p;
                row.push((y, p));
            }
        }
        row.push((x, stay));
        row.sort_by_key(|(y, _)| *y);
        row
    }

    /// `P` over [`ChainContext::state_space`].
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let states = self.state_space();
        let rows = states
            .iter()
            .map(|&x| {
                self.transition_row(x)
                    .into_iter()
                    .map(|(y, p)| (states.binary_search(&y).expect("target in Ω"), p))
                    .collect()
            })
            .collect();
        let weights: Vec<Rational> = states.iter().map(|&x| self.weight(x)).collect();
        let total = weights.iter().fold(Rational::zero(), |a, b| a + b);
        let stationary = weights.iter().map(|w| w / &total).collect();
        let omega0 = states.iter().map(|&x| self.violations(x) == 0).collect();
        TransitionMatrix { n: self.n, states, rows, stationary, omega0 }
    }
}

/// Two independent uniform indices below `n` from the two halves of one
/// 64-bit draw (multiply-shift with rejection, so exactly uniform).
fn draw_pair<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let n = n as u64;
    let floor = (n as u32).wrapping_neg() % n as u32;
    loop {
        let r = rng.next_u64();
        let a = (r & 0xffff_ffff) * n;
        let b = (r >> 32) * n;
        if a as u32 >= floor && b as u32 >= floor {
            return ((a >> 32) as usize, (b >> 32) as usize);
        }
    }
}

/// Incremental stepping: caches each factor's local index.
struct Walker<'a> {
    ctx: &'a ChainContext,
    x: u64,
    violations: u32,
    locals: Vec<usize>,
}

impl<'a> Walker<'a> {
    fn new(ctx: &'a ChainContext, s: ChainState) -> Self {
        let locals = ctx.factors.iter().map(|f| f.local(s.x)).collect();
        Walker { ctx, x: s.x, violations: s.violations, locals }
    }

    fn advance<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        let ctx = self.ctx;
        let (i, j) = draw_pair(rng, ctx.n);
        if i == j {
            return;
        }
        let v = if ctx.partner[i] == j {
            self.violations
        } else {
            let before = |k: usize| (self.x >> k ^ self.x >> ctx.partner[k]) & 1 == 1;
            let delta = |k: usize| if before(k) { -1i64 } else { 1 };
            (self.violations as i64 + delta(i) + delta(j)) as u32
        };
        if v != 0 && v != 2 {
            return;
        }
        let (fi, ki) = ctx.slot_of[i];
        let (fj, kj) = ctx.slot_of[j];
        let (a, b) = if fi == fj {
            let ly = self.locals[fi] ^ (1 << ki) ^ (1 << kj);
            if !ctx.positive[ctx.offset[fi] + ly] {
                return;
            }
            ((fi, ly), None)
        } else {
            let li = self.locals[fi] ^ (1 << ki);
            let lj = self.locals[fj] ^ (1 << kj);
            if !ctx.positive[ctx.offset[fi] + li] || !ctx.positive[ctx.offset[fj] + lj] {
                return;
            }
            ((fi, li), Some((fj, lj)))
        };
        if !ctx.zero_one {
            let mut num = ctx.factors[a.0].table[a.1].clone();
            let mut den = ctx.factors[a.0].table[self.locals[a.0]].clone();
            if let Some((f, l)) = b {
                num *= &ctx.factors[f].table[l];
                den *= &ctx.factors[f].table[self.locals[f]];
            }
            if num < den && !accept(&(num / den), rng.next_u64()) {
                return;
            }
        }
        self.x ^= (1 << i) ^ (1 << j);
        self.violations = v;
        self.locals[a.0] = a.1;
        if let Some((f, l)) = b {
            self.locals[f] = l;
        }
    }
}

/// `u / 2^64 < r` for `0 ≤ r < 1`, by cross-multiplication.
fn accept(r: &Rational, u: u64) -> bool {
    let lhs = BigInt::from(u) * r.denom();
    let rhs = r.numer() << 64;
    lhs < rhs
}

/// Exact transition matrix with its stationary distribution.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub n: usize,
    pub states: Vec<u64>,
    /// Sparse rows `(column, P)`.
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub stationary: Vec<Rational>,
    /// Membership in `Ω₀`.
    pub omega0: Vec<bool>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> Rational {
        self.rows[a]
            .iter()
            .find(|(c, _)| *c == b)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// `π(x)P(x,y) = π(y)P(y,x)` for every pair.
    pub fn is_reversible(&self) -> bool {
        self.rows.iter().enumerate().all(|(a, row)| {
            row.iter().all(|(b, p)| &self.stationary[a] * p == &self.stationary[*b] * self.get(*b, a))
        })
    }

    /// `P(x,x) ≥ 1/n` for every state.
    pub fn is_lazy(&self) -> bool {
        let bound = Rational::new(BigInt::one(), BigInt::from(self.n));
        (0..self.len()).all(|a| self.get(a, a) >= bound)
    }

    /// Rows sum to one and entries are non-negative.
    pub fn is_stochastic(&self) -> bool {
        self.rows.iter().all(|row| {
            row.iter().all(|(_, p)| *p >= Rational::zero())
                && row.iter().fold(Rational::zero(), |a, (_, p)| a + p) == Rational::one()
        })
    }

    pub fn pi_omega0(&self) -> Rational {
        self.stationary
            .iter()
            .zip(&self.omega0)
            .filter(|(_, &o)| o)
            .fold(Rational::zero(), |a, (p, _)| a + p)
    }

    /// `e_start Pᵗ` in exact arithmetic.
    pub fn exact_distribution(&self, start: usize, t: u64) -> Vec<Rational> {
        let mut mu = vec![Rational::zero(); self.len()];
        mu[start] = Rational::one();
        for _ in 0..t {
            let mut next = vec![Rational::zero(); self.len()];
            for (a, row) in self.rows.iter().enumerate() {
                if mu[a].is_zero() {
                    continue;
                }
                for (b, p) in row {
                    next[*b] += &mu[a] * p;
                }
            }
            mu = next;
        }
        mu
    }

    /// Total variation distance of `e_start Pᵗ` from `π`, exactly.
    pub fn exact_tv(&self, start: usize, t: u64) -> Rational {
        let mu = self.exact_distribution(start, t);
        let s = mu
            .iter()
            .zip(&self.stationary)
            .fold(Rational::zero(), |a, (m, p)| a + (m - p).abs());
        s / int(2)
    }

    /// Mixing bound `½ π(x)^{-1/2} exp(-t π(Ω₀)²/n⁴)`, rounded down.
    pub fn mixing_bound(&self, start: usize, t: u64) -> f64 {
        let up = 1.0 + 1e-12;
        let px = to_f64(&self.stationary[start]) * up;
        let p0 = to_f64(&self.pi_omega0()) * up;
        let n4 = (self.n as f64).powi(4);
        let a = t as f64 * p0 * p0 / n4 * up;
        0.5 / px.sqrt() * (-a).exp() * (1.0 - 1e-12)
    }

    /// Upper bounds on the TV distance from every start state after `t`
    /// steps, from `Pᵗ` computed in floating point by repeated squaring
    /// with a running bound on the accumulated error.
    pub fn certified_tv(&self, t: u64) -> Vec<f64> {
        let k = self.len();
        let (p, mut err_p) = self.float_matrix();
        err_p = err_p * 1.000_001 + f64::MIN_POSITIVE;
        let gamma_k1 = gamma(k + 1);
        let gamma = gamma(k);
        let mut result: Option<(Vec<f64>, f64)> = None;
        let mut base = (p, err_p);
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => mul(&r, &base, k, gamma),
                });
            }
            e >>= 1;
            if e > 0 {
                base = mul(&base, &base, k, gamma);
            }
        }
        let (m, err_m) = result.unwrap_or_else(|| (identity(k), 0.0));
        let (pi, err_pi) = exact_to_float(&self.stationary);
        (0..k)
            .map(|a| {
                let row = &m[a * k..(a + 1) * k];
                let s: f64 = row.iter().zip(&pi).map(|(x, y)| (x - y).abs()).sum();
                let s = s * (1.0 + gamma_k1) + f64::MIN_POSITIVE;
                0.5 * (s + err_m + err_pi) * (1.0 + 4.0 * f64::EPSILON)
            })
            .collect()
    }

    /// Dense `P` in floating point and the exact ∞-norm of the rounding.
    fn float_matrix(&self) -> (Vec<f64>, f64) {
        let k = self.len();
        let mut m = vec![0.0; k * k];
        let mut worst = Rational::zero();
        for (a, row) in self.rows.iter().enumerate() {
            let mut row_err = Rational::zero();
            for (b, p) in row {
                let f = to_f64(p);
                m[a * k + b] = f;
                row_err += (Rational::from_float(f).expect("finite") - p).abs();
            }
            if row_err > worst {
                worst = row_err;
            }
        }
        (m, to_f64(&worst) * (1.0 + f64::EPSILON))
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("representable")
}

fn exact_to_float(v: &[Rational]) -> (Vec<f64>, f64) {
    let mut err = Rational::zero();
    let f = v
        .iter()
        .map(|r| {
            let x = to_f64(r);
            err += (Rational::from_float(x).expect("finite") - r).abs();
            x
        })
        .collect();
    (f, to_f64(&err) * (1.0 + f64::EPSILON))
}

/// `γ_k = k u / (1 - k u)`.
fn gamma(k: usize) -> f64 {
    let ku = k as f64 * f64::EPSILON / 2.0;
    ku / (1.0 - ku) * (1.0 + 1e-10)
}

fn identity(k: usize) -> Vec<f64> {
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        m[a * k + a] = 1.0;
    }
    m
}

/// Product of two approximate stochastic matrices with error bounds in
/// the ∞-norm.
fn mul(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64), k: usize, gamma: f64) -> (Vec<f64>, f64) {
    let (am, ea) = (&a.0, a.1);
    let (bm, eb) = (&b.0, b.1);
    let mut c = vec![0.0; k * k];
    for i in 0..k {
        let ci = &mut c[i * k..(i + 1) * k];
        for l in 0..k {
            let x = am[i * k + l];
            if x == 0.0 {
                continue;
            }
            let bl = &bm[l * k..(l + 1) * k];
            for (cj, bj) in ci.iter_mut().zip(bl) {
                *cj += x * bj;
            }
        }
    }
    let err = (ea * (1.0 + eb) + eb + gamma * (1.0 + ea) * (1.0 + eb)) * (1.0 + 1e-10);
    (c, err)
}

/// `R = 3|V|²|E|²`.
pub fn ratio_parameter(num_edges: usize, num_vertices: usize) -> BigUint {
    let e = BigUint::from(num_edges);
    let v = BigUint::from(num_vertices);
    BigUint::from(3u32) * &v * &v * &e * &e
}

/// Upper bound on a natural logarithm of a positive finite value.
fn ln_upper(x: f64) -> f64 {
    let l = x.ln();
    l + l.abs() * 1e-12 + 1e-300
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// `⌈(2|E|)⁴ R² (ln(2R/δ) + |E| ln 2)⌉` with the logarithms rounded up.
pub fn step_budget(num_edges: usize, num_vertices: usize, delta: f64) -> Result<BigUint> {
    check_delta(delta)?;
    let r = ratio_parameter(num_edges, num_vertices);
    let two_e = BigUint::from(2 * num_edges);
    let lead = two_e.pow(4) * &r * &r;
    // 2R/δ can exceed f64 only for absurd instances
    let rf = r.to_f64().ok_or_else(|| Error::Precondition("instance too large".into()))?;
    let log_term = ln_upper(2.0 * rf * (1.0 + f64::EPSILON) / delta)
        + num_edges as f64 * std::f64::consts::LN_2 * (1.0 + 1e-12);
    Ok(ceil_mul(&lead, log_term))
}

/// `⌈2R ln(2/δ)⌉` rejection-sampling attempts.
pub fn attempt_budget(num_edges: usize, num_vertices: usize, delta: f64) -> Result<BigUint> {
    check_delta(delta)?;
    let r = ratio_parameter(num_edges, num_vertices) * 2u32;
    Ok(ceil_mul(&r, ln_upper(2.0 / delta)))
}

fn ceil_mul(a: &BigUint, f: f64) -> BigUint {
    let q = Rational::from_float(f).expect("finite") * Rational::from(BigInt::from(a.clone()));
    q.ceil().to_integer().to_biguint().unwrap_or_default()
}

/// Edge-consistent configuration of positive weight, found by backtracking
/// over edges with unit propagation. `None` proves there is none.
pub fn find_initial_assignment(c: &Circuit) -> Result<Option<Vec<bool>>> {
    if !c.is_closed() {
        return Err(Error::NotClosed);
    }
    let mut s = Solver::new(c);
    Ok(s.solve().then(|| s.value.iter().map(|v| *v == Some(true)).collect()))
}

/// Edge values implied by unit propagation alone (`None` where free), or
/// `None` when propagation already finds a contradiction.
pub fn forced_edges(c: &Circuit) -> Result<Option<Vec<Option<bool>>>> {
    if !c.is_closed() {
        return Err(Error::NotClosed);
    }
    let mut s = Solver::new(c);
    if !s.propagate(&mut Vec::new()) {
        return Ok(None);
    }
    Ok(Some(c.edges().iter().map(|&(a, _)| s.value[a]).collect()))
}

struct Solver<'a> {
    c: &'a Circuit,
    support: Vec<Vec<u32>>,
    /// Edge of each incidence.
    edge_of: Vec<usize>,
    value: Vec<Option<bool>>,
}

impl<'a> Solver<'a> {
    fn new(c: &'a Circuit) -> Self {
        let mut edge_of = vec![0; c.num_incidences()];
        for (e, &(a, b)) in c.edges().iter().enumerate() {
            edge_of[a] = e;
            edge_of[b] = e;
        }
        Solver {
            c,
            support: c.vertices().iter().map(|v| v.signature.support().collect()).collect(),
            edge_of,
            value: vec![None; c.num_incidences()],
        }
    }

    fn set_edge(&mut self, e: usize, bit: bool, trail: &mut Vec<usize>) {
        let (a, b) = self.c.edges()[e];
        self.value[a] = Some(bit);
        self.value[b] = Some(bit);
        trail.push(e);
    }

    /// Propagate forced edges to a fixpoint; `false` on a dead end.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for v in 0..self.c.vertices().len() {
                let inc = &self.c.vertices()[v].incidences;
                let (mut fixed, mut bits) = (0u32, 0u32);
                for (k, &i) in inc.iter().enumerate() {
                    if let Some(b) = self.value[i] {
                        fixed |= 1 << k;
                        bits |= (b as u32) << k;
                    }
                }
                let free = ((1u64 << inc.len()) - 1) as u32 & !fixed;
                if free == 0 && self.support[v].iter().any(|&p| p == bits) {
                    continue;
                }
                let (mut and, mut or, mut any) = (u32::MAX, 0u32, false);
                for &p in &self.support[v] {
                    if p & fixed == bits {
                        and &= p;
                        or |= p;
                        any = true;
                    }
                }
                if !any {
                    return false;
                }
                // incidences on which every consistent point agrees
                let forced = free & (and | !or);
                let mut f = forced;
                while f != 0 {
                    let k = f.trailing_zeros() as usize;
                    f &= f - 1;
                    let i = inc[k];
                    if self.value[i].is_none() {
                        self.set_edge(self.edge_of[i], and >> k & 1 == 1, trail);
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn solve(&mut self) -> bool {
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) {
            return false;
        }
        self.search()
    }

    fn search(&mut self) -> bool {
        let Some(e) = (0..self.c.edges().len()).find(|&e| self.value[self.c.edges()[e].0].is_none())
        else {
            return true;
        };
        for bit in [false, true] {
            let mut trail = Vec::new();
            self.set_edge(e, bit, &mut trail);
            if self.propagate(&mut trail) && self.search() {
                return true;
            }
            for &f in &trail {
                let (a, b) = self.c.edges()[f];
                self.value[a] = None;
                self.value[b] = None;
            }
        }
        false
    }
}

/// Sampler settings. `steps` and `attempts` override the proven budgets
/// and exist for experiments only.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub delta: f64,
    pub steps: Option<u64>,
    pub attempts: Option<u64>,
}

impl SamplerConfig {
    pub fn new(delta: f64) -> Self {
        SamplerConfig { delta, steps: None, attempts: None }
    }

    /// Steps and attempts for `c` (proven budgets unless overridden).
    pub fn schedule(&self, c: &Circuit) -> Result<(u64, u64)> {
        let (m, nv) = (c.edges().len(), c.vertices().len());
        let fit = |b: BigUint| {
            b.to_u64().ok_or_else(|| Error::Precondition(format!("budget {b} does not fit in 64 bits")))
        };
        let steps = match self.steps {
            Some(s) => s,
            None => fit(step_budget(m, nv, self.delta)?)?,
        };
        let attempts = match self.attempts {
            Some(a) => a,
            None => fit(attempt_budget(m, nv, self.delta)?)?,
        };
        Ok((steps, attempts))
    }
}

/// A satisfying configuration and how many runs it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub config: Vec<bool>,
    pub attempts: u64,
}

/// Chain prepared for repeated sampling from one circuit.
#[derive(Clone, Debug)]
pub struct Sampler {
    ctx: ChainContext,
    init: Vec<bool>,
    start: ChainState,
    steps: u64,
    attempts: u64,
}

impl Sampler {
    /// `Err(Unsat)` when the circuit has no assignment of positive weight.
    pub fn new(c: &Circuit, cfg: &SamplerConfig) -> Result<Self> {
        let ctx = ChainContext::from_circuit(c)?;
        let init = find_initial_assignment(c)?.ok_or(Error::Unsat)?;
        let x = init.iter().enumerate().fold(0u64, |a, (i, &b)| a | (b as u64) << i);
        let start = ctx.state(x).expect("initial assignment lies in Ω₀");
        let (steps, attempts) = cfg.schedule(c)?;
        Ok(Sampler { ctx, init, start, steps, attempts })
    }

    pub fn context(&self) -> &ChainContext {
        &self.ctx
    }

    /// The assignment every run starts from.
    pub fn initial(&self) -> &[bool] {
        &self.init
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    /// Run the chain from the initial assignment until a run ends in `Ω₀`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        for k in 1..=self.attempts {
            let mut s = self.start;
            self.ctx.run(&mut s, self.steps, rng);
            if s.violations == 0 {
                let config = (0..self.ctx.n).map(|i| s.x >> i & 1 == 1).collect();
                return Ok(Sample { config, attempts: k });
            }
        }
        Err(Error::SamplerFailed(self.attempts))
    }
}

/// One sample from a closed circuit.
pub fn sample_assignment<R: RngCore + ?Sized>(
    c: &Circuit,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Sample> {
    Sampler::new(c, cfg)?.sample(rng)
}

/// Edge values of an edge-consistent configuration.
pub fn edge_values(c: &Circuit, config: &[bool]) -> Vec<bool> {
    c.edges().iter().map(|&(a, _)| config[a]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Label, LabelledGraph, SfoGraph};
    use crate::signature::{IndexSet, Named};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> Circuit {
        SfoGraph {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![(0, 1, false), (1, 2, false), (2, 0, false)],
        }
        .to_nae_parity()
        .to_circuit()
        .unwrap()
    }

    #[test]
    fn budget_example() {
        let t = step_budget(3, 3, 0.5).unwrap();
        let t = t.to_f64().unwrap();
        assert!((t / 6.855e8 - 1.0).abs() < 1e-3, "{t}");
        assert!(step_budget(3, 3, 1.0).is_err());
        assert!(step_budget(3, 3, 0.25).unwrap() > step_budget(3, 3, 0.5).unwrap());
    }

    #[test]
    fn initial_assignment_cases() {
        let c = triangle();
        let x = find_initial_assignment(&c).unwrap().unwrap();
        assert!(!c.weight(&x).is_zero());
        // odd loop: both ends equal, parity needs an odd sum
        let odd_loop = LabelledGraph { vertices: vec![("v".into(), Label::Odd)], edges: vec![(0, 0)] };
        assert_eq!(find_initial_assignment(&odd_loop.to_circuit().unwrap()).unwrap(), None);
        // Even_1 pendant forces its edge to 0
        let g = LabelledGraph {
            vertices: vec![("u".into(), Label::Nae), ("p".into(), Label::Even), ("q".into(), Label::Even)],
            edges: vec![(0, 1), (0, 2)],
        };
        assert_eq!(find_initial_assignment(&g.to_circuit().unwrap()).unwrap(), None);
    }

    #[test]
    fn matrix_properties() {
        let ctx = ChainContext::from_circuit(&triangle()).unwrap();
        let p = ctx.transition_matrix();
        assert!(p.is_stochastic() && p.is_reversible() && p.is_lazy());
        let f = Signature::from_ints(&["a", "b", "c", "d"], &[1, 0, 0, 2, 0, 3, 1, 0, 0, 1, 5, 0, 2, 0, 0, 1])
            .unwrap();
        let ctx = ChainContext::from_signature(&f, &[(0, 1), (2, 3)]).unwrap();
        let p = ctx.transition_matrix();
        assert!(p.is_stochastic() && p.is_reversible() && p.is_lazy());
    }

    #[test]
    fn certified_tv_matches_exact() {
        let ctx = ChainContext::from_circuit(&triangle()).unwrap();
        let p = ctx.transition_matrix();
        for t in [0u64, 1, 2, 5] {
            let cert = p.certified_tv(t);
            for a in 0..p.len() {
                let exact = to_f64(&p.exact_tv(a, t));
                assert!(cert[a] >= exact && cert[a] - exact < 1e-9, "t={t}: {} vs {exact}", cert[a]);
            }
        }
    }

    #[test]
    fn uniform_weights_always_accept() {
        let f = Signature::named(&Named::Even, IndexSet::anonymous(4).unwrap()).unwrap();
        let ctx = ChainContext::from_signature(&f, &[(0, 1), (2, 3)]).unwrap();
        assert!(ctx.is_zero_one());
        let row = ctx.transition_row(0);
        let coeff = Rational::new(BigInt::from(2), BigInt::from(16));
        assert!(row.iter().filter(|(y, _)| *y != 0).all(|(_, p)| *p == coeff));
    }

    #[test]
    fn run_matches_single_steps() {
        let f = Signature::from_ints(&["a", "b", "c", "d"], &[1, 0, 0, 2, 0, 3, 1, 0, 0, 1, 5, 0, 2, 0, 0, 1])
            .unwrap();
        let ctx = ChainContext::from_signature(&f, &[(0, 1), (2, 3)]).unwrap();
        let start = ctx.state(0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut a = start;
            let mut b = start;
            ctx.run(&mut a, 37, &mut r1);
            for _ in 0..37 {
                ctx.step(&mut b, &mut r2);
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn acceptance_draw() {
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        assert!(accept(&half, 0));
        assert!(accept(&half, (1u64 << 63) - 1));
        assert!(!accept(&half, 1u64 << 63));
    }

    #[test]
    fn sampler_on_triangle() {
        let c = triangle();
        // π(Ω₀) = 1/64 here
        let cfg = SamplerConfig { delta: 0.1, steps: Some(3000), attempts: Some(5000) };
        let sampler = Sampler::new(&c, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..600 {
            let s = sampler.sample(&mut rng).unwrap();
            assert!(!c.weight(&s.config).is_zero());
            *counts.entry(edge_values(&c, &s.config)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 2);
        assert!(counts.values().all(|&k| (240..360).contains(&k)), "{counts:?}");
    }
}
