//! Strictly terraced, even-windable and windable signatures, with
//! certificates.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::lp::{FarkasCertificate, Feasibility, LinearSystem};
use crate::signature::{deposit, mask, IndexSet, Rational, Signature};

/// Largest arity accepted by [`is_even_windable`].
pub const EVEN_WINDABLE_CAP: usize = 6;
/// Largest arity accepted by [`is_windable`].
pub const WINDABLE_CAP: usize = 5;

/// A partition of a set of positions into pairs and (for the general
/// variant) singletons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPartition {
    pairs: Vec<(u8, u8)>,
    singletons: Vec<u8>,
}

impl PairPartition {
    pub fn new(pairs: Vec<(u8, u8)>, singletons: Vec<u8>) -> Self {
        let mut pairs: Vec<(u8, u8)> =
            pairs.into_iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
        pairs.sort_unstable();
        let mut singletons = singletons;
        singletons.sort_unstable();
        PairPartition { pairs, singletons }
    }

    pub fn empty() -> Self {
        PairPartition { pairs: Vec::new(), singletons: Vec::new() }
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    pub fn singletons(&self) -> &[u8] {
        &self.singletons
    }

    pub fn is_pairing(&self) -> bool {
        self.singletons.is_empty()
    }

    /// Union of all blocks, as a bit mask.
    pub fn mask(&self) -> u32 {
        self.blocks().fold(0, |m, b| m | b)
    }

    /// Each block as a bit mask.
    pub fn blocks(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs
            .iter()
            .map(|&(a, b)| (1u32 << a) | (1u32 << b))
            .chain(self.singletons.iter().map(|&a| 1u32 << a))
    }

    /// Well-formed: blocks disjoint, pairs of distinct elements.
    pub fn is_valid(&self) -> bool {
        let mut seen = 0u32;
        for b in self.blocks() {
            if b & seen != 0 || (b.count_ones() == 1 && self.pairs.iter().any(|&(x, y)| x == y)) {
                return false;
            }
            seen |= b;
        }
        self.pairs.iter().all(|&(a, b)| a != b)
    }

    /// All partitions of `m` into pairs.
    pub fn perfect_pairings(m: u32) -> Vec<PairPartition> {
        let mut out = Vec::new();
        pairings_rec(m, &mut Vec::new(), &mut Vec::new(), false, &mut out);
        out
    }

    /// All partitions of `m` into pairs and singletons.
    pub fn pair_partitions(m: u32) -> Vec<PairPartition> {
        let mut out = Vec::new();
        pairings_rec(m, &mut Vec::new(), &mut Vec::new(), true, &mut out);
        out
    }

    /// Smallest element of `x ⊕ span(blocks)`.
    pub fn orbit_rep(&self, x: u32) -> u32 {
        self.blocks().fold(x, |r, b| {
            let top = 1u32 << (31 - b.leading_zeros());
            if r & top != 0 {
                r ^ b
            } else {
                r
            }
        })
    }

    /// Move positions through `map` (position `k` becomes `map[k]`).
    pub fn remap(&self, map: &[usize]) -> PairPartition {
        PairPartition::new(
            self.pairs.iter().map(|&(a, b)| (map[a as usize] as u8, map[b as usize] as u8)).collect(),
            self.singletons.iter().map(|&a| map[a as usize] as u8).collect(),
        )
    }

    /// Render as `{a,b}{c}` with the given labels.
    pub fn render(&self, labels: &[String]) -> String {
        let mut s = String::new();
        for &(a, b) in &self.pairs {
            s.push_str(&format!("{{{},{}}}", labels[a as usize], labels[b as usize]));
        }
        for &a in &self.singletons {
            s.push_str(&format!("{{{}}}", labels[a as usize]));
        }
        s
    }
}

fn pairings_rec(
    m: u32,
    pairs: &mut Vec<(u8, u8)>,
    singles: &mut Vec<u8>,
    allow_singletons: bool,
    out: &mut Vec<PairPartition>,
) {
    if m == 0 {
        out.push(PairPartition::new(pairs.clone(), singles.clone()));
        return;
    }
    let i = m.trailing_zeros();
    let rest = m & !(1 << i);
    if allow_singletons {
        singles.push(i as u8);
        pairings_rec(rest, pairs, singles, true, out);
        singles.pop();
    }
    let mut r = rest;
    while r != 0 {
        let j = r.trailing_zeros();
        r &= r - 1;
        pairs.push((i as u8, j as u8));
        pairings_rec(rest & !(1 << j), pairs, singles, allow_singletons, out);
        pairs.pop();
    }
}

/// `F(x) = 0 ⟹ F(x ⊕ e_i) = F(x ⊕ e_j)` for all `x, i, j`.
pub fn is_strictly_terraced(f: &Signature) -> bool {
    let n = f.arity();
    (0..f.table().len() as u32).all(|x| {
        if !f.value(x).is_zero() || n == 0 {
            return true;
        }
        let first = f.value(x ^ 1);
        (1..n).all(|i| f.value(x ^ (1 << i)) == first)
    })
}

/// A zero `x` with neighbours `x ⊕ e_i`, `x ⊕ e_j` of different values.
pub fn terrace_violation(f: &Signature) -> Option<(u32, usize, usize)> {
    let n = f.arity();
    (0..f.table().len() as u32).find_map(|x| {
        if !f.value(x).is_zero() || n == 0 {
            return None;
        }
        let first = f.value(x ^ 1);
        (1..n).find(|&i| f.value(x ^ (1 << i)) != first).map(|i| (x, 0, i))
    })
}

/// Every point outside the support has all its Hamming neighbours inside.
pub fn has_coindependent_support(f: &Signature) -> bool {
    let n = f.arity();
    (0..f.table().len() as u32).all(|x| {
        !f.value(x).is_zero() || (0..n).all(|i| !f.value(x ^ (1 << i)).is_zero())
    })
}

/// Values `D(x, M)` over configurations and perfect pairings; only
/// non-zero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoDecomposition {
    index: IndexSet,
    values: BTreeMap<(u32, PairPartition), Rational>,
}

impl TwoDecomposition {
    pub fn new(index: IndexSet) -> Self {
        TwoDecomposition { index, values: BTreeMap::new() }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    pub fn get(&self, x: u32, m: &PairPartition) -> Rational {
        self.values.get(&(x, m.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&mut self, x: u32, m: PairPartition, v: Rational) {
        if v.is_zero() {
            return;
        }
        let key = (x, m);
        let e = self.values.entry(key.clone()).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.values.remove(&key);
        }
    }

    pub fn set(&mut self, x: u32, m: PairPartition, v: Rational) {
        if v.is_zero() {
            self.values.remove(&(x, m));
        } else {
            self.values.insert((x, m), v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, PairPartition), &Rational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Check both defining conditions of a 2-decomposition of `h`.
pub fn verify_two_decomposition(h: &Signature, d: &TwoDecomposition) -> bool {
    if d.index.labels() != h.labels() {
        return false;
    }
    let full = h.full_mask();
    let mut sums = vec![Rational::zero(); h.table().len()];
    for ((x, m), v) in &d.values {
        if v.is_negative() || !m.is_valid() || !m.is_pairing() || m.mask() != full || *x > full {
            return false;
        }
        sums[*x as usize] += v;
        for s in m.blocks() {
            if d.get(x ^ s, m) != *v {
                return false;
            }
        }
    }
    sums.iter().zip(h.table()).all(|(a, b)| a == b)
}

/// Column `j` of the 2-decomposition system is the orbit variable
/// `D(columns[j].0, columns[j].1)`; row `x` is the equation at `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionSystem {
    pub system: LinearSystem,
    pub columns: Vec<(u32, PairPartition)>,
}

/// Build the linear system for a 2-decomposition of `h`. Rows are the
/// configurations in table order; columns are `(M, orbit representative)`
/// with pairings in enumeration order and representatives ascending.
pub fn two_decomposition_system(h: &Signature) -> DecompositionSystem {
    let full = h.full_mask();
    let pairings = PairPartition::perfect_pairings(full);
    let mut columns = Vec::new();
    let mut col_of: HashMap<(usize, u32), usize> = HashMap::new();
    for (mi, m) in pairings.iter().enumerate() {
        let mut reps: Vec<u32> = (0..=full).map(|x| m.orbit_rep(x)).collect();
        reps.sort_unstable();
        reps.dedup();
        for r in reps {
            col_of.insert((mi, r), columns.len());
            columns.push((r, m.clone()));
        }
    }
    let mut system = LinearSystem::new(columns.len());
    for x in 0..=full {
        let coeffs = pairings
            .iter()
            .enumerate()
            .map(|(mi, m)| (col_of[&(mi, m.orbit_rep(x))], Rational::one()))
            .collect();
        system.add_row(coeffs, h.value(x).clone());
    }
    DecompositionSystem { system, columns }
}

/// Infeasibility of a 2-decomposition, checkable against `system`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infeasibility {
    pub system: DecompositionSystem,
    pub certificate: FarkasCertificate,
}

impl Infeasibility {
    pub fn verify(&self) -> bool {
        self.certificate.verify(&self.system.system)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Feasible(TwoDecomposition),
    Infeasible(Infeasibility),
}

/// Solve for a 2-decomposition of `h` exactly.
///
/// Orbit variables touching a configuration where `h` vanishes are fixed
/// to zero before the simplex runs; the Farkas vector is lifted back to the
/// full system.
pub fn find_two_decomposition(h: &Signature) -> Decomposition {
    let full_sys = two_decomposition_system(h);
    let rows = full_sys.system.rows();
    let nrows = rows.len();
    let ncols = full_sys.columns.len();
    let zero_row: Vec<bool> = h.table().iter().map(Zero::is_zero).collect();
    let mut dead = vec![false; ncols];
    for (x, row) in rows.iter().enumerate() {
        if zero_row[x] {
            for (j, _) in row {
                dead[*j] = true;
            }
        }
    }
    let alive: Vec<usize> = (0..ncols).filter(|&j| !dead[j]).collect();
    let mut new_col = vec![usize::MAX; ncols];
    for (k, &j) in alive.iter().enumerate() {
        new_col[j] = k;
    }
    let kept: Vec<usize> = (0..nrows).filter(|&x| !zero_row[x]).collect();
    let mut reduced = LinearSystem::new(alive.len());
    for &x in &kept {
        let coeffs = rows[x]
            .iter()
            .filter(|(j, _)| !dead[*j])
            .map(|(j, c)| (new_col[*j], c.clone()))
            .collect();
        reduced.add_row(coeffs, full_sys.system.rhs()[x].clone());
    }
    match reduced.solve() {
        Feasibility::Feasible(vals) => {
            let mut d = TwoDecomposition::new(h.index_set().clone());
            for (k, v) in vals.into_iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let (rep, m) = &full_sys.columns[alive[k]];
                for x in 0..=h.full_mask() {
                    if m.orbit_rep(x) == *rep {
                        d.set(x, m.clone(), v.clone());
                    }
                }
            }
            Decomposition::Feasible(d)
        }
        Feasibility::Infeasible(cert) => {
            let mut y = vec![Rational::zero(); nrows];
            for (k, &x) in kept.iter().enumerate() {
                y[x] = cert.multipliers[k].clone();
            }
            // Raise the multipliers on zero rows until every fixed column
            // has a non-negative combination.
            let mut combo = vec![Rational::zero(); ncols];
            for &x in &kept {
                for (j, c) in &rows[x] {
                    combo[*j] += c * &y[x];
                }
            }
            let lift = (0..ncols)
                .filter(|&j| dead[j])
                .map(|j| -combo[j].clone())
                .fold(Rational::zero(), |a, b| if b > a { b } else { a });
            for x in 0..nrows {
                if zero_row[x] {
                    y[x] = lift.clone();
                }
            }
            let inf = Infeasibility {
                system: full_sys,
                certificate: FarkasCertificate { multipliers: y },
            };
            debug_assert!(inf.verify());
            Decomposition::Infeasible(inf)
        }
    }
}

/// Which partitions a witness ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    /// `M ∈ Match(x ⊕ y)`: pairs only.
    Even,
    /// `M ∈ Match⁺(x ⊕ y)`: pairs and singletons.
    General,
}

/// Values `B(x, y, M)`; only non-zero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindabilityWitness {
    index: IndexSet,
    kind: WitnessKind,
    values: BTreeMap<(u32, u32, PairPartition), Rational>,
}

impl WindabilityWitness {
    pub fn new(index: IndexSet, kind: WitnessKind) -> Self {
        WindabilityWitness { index, kind, values: BTreeMap::new() }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn get(&self, x: u32, y: u32, m: &PairPartition) -> Rational {
        self.values.get(&(x, y, m.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&mut self, x: u32, y: u32, m: PairPartition, v: Rational) {
        if v.is_zero() {
            return;
        }
        let key = (x, y, m);
        let e = self.values.entry(key.clone()).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.values.remove(&key);
        }
    }

    pub fn set(&mut self, x: u32, y: u32, m: PairPartition, v: Rational) {
        if v.is_zero() {
            self.values.remove(&(x, y, m));
        } else {
            self.values.insert((x, y, m), v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32, PairPartition), &Rational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The even witness read as a general one (no singleton entries).
    pub fn into_general(mut self) -> Self {
        self.kind = WitnessKind::General;
        self
    }
}

/// Check EW1 and EW2 for `w` against `f`, independently of how `w` was
/// produced.
pub fn verify_witness(f: &Signature, w: &WindabilityWitness) -> bool {
    if w.index.labels() != f.labels() {
        return false;
    }
    let full = f.full_mask();
    let size = f.table().len();
    let mut sums: HashMap<(u32, u32), Rational> = HashMap::new();
    for ((x, y, m), v) in &w.values {
        if v.is_negative() || *x > full || *y > full || !m.is_valid() || m.mask() != x ^ y {
            return false;
        }
        if w.kind == WitnessKind::Even && !m.is_pairing() {
            return false;
        }
        *sums.entry((*x, *y)).or_insert_with(Rational::zero) += v;
        for s in m.blocks() {
            if w.get(x ^ s, y ^ s, m) != *v {
                return false;
            }
        }
    }
    for x in 0..size as u32 {
        for y in 0..size as u32 {
            let lhs = f.value(x) * f.value(y);
            let rhs = sums.get(&(x, y)).cloned().unwrap_or_else(Rational::zero);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// A pinning whose `GḠ` has no 2-decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Pinned inputs of the tested signature, as a mask.
    pub pinned: u32,
    /// Values of the pinned inputs (bits outside `pinned` are zero).
    pub bits: u32,
    /// `GḠ` for that pinning.
    pub product: Signature,
    pub infeasibility: Infeasibility,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Windable(WindabilityWitness),
    NotWindable(Box<Counterexample>),
}

impl Verdict {
    pub fn is_windable(&self) -> bool {
        matches!(self, Verdict::Windable(_))
    }

    pub fn witness(&self) -> Option<&WindabilityWitness> {
        match self {
            Verdict::Windable(w) => Some(w),
            Verdict::NotWindable(_) => None,
        }
    }
}

/// Build an even witness from per-pinning 2-decompositions. `decompose`
/// returns `Err` to abort with that pinning as the counterexample.
pub fn assemble_even_witness<E>(
    f: &Signature,
    mut decompose: impl FnMut(&Signature) -> std::result::Result<TwoDecomposition, E>,
) -> std::result::Result<WindabilityWitness, (u32, u32, Signature, E)> {
    let n = f.arity();
    let full = f.full_mask();
    let mut w = WindabilityWitness::new(f.index_set().clone(), WitnessKind::Even);
    for agree in 0..=full {
        let k_pos: Vec<usize> = (0..n).filter(|&i| agree >> i & 1 == 0).collect();
        let i_pos: Vec<usize> = (0..n).filter(|&i| agree >> i & 1 == 1).collect();
        let disagree = full & !agree;
        for p in 0..1u32 << i_pos.len() {
            let pbits = deposit(p, &i_pos);
            let g = f.pin_mask(agree, pbits);
            let h = g.product_with_complement();
            let d = match decompose(&h) {
                Ok(d) => d,
                Err(e) => return Err((agree, pbits, h, e)),
            };
            for ((xk, m), v) in d.entries() {
                let x = pbits | deposit(*xk, &k_pos);
                let y = x ^ disagree;
                w.set(x, y, m.remap(&k_pos), v.clone());
            }
        }
    }
    Ok(w)
}

/// Decide even-windability by solving one 2-decomposition per pinning.
pub fn is_even_windable(f: &Signature) -> Result<Verdict> {
    if f.arity() > EVEN_WINDABLE_CAP {
        return Err(Error::ArityCap { arity: f.arity(), cap: EVEN_WINDABLE_CAP });
    }
    let out = assemble_even_witness(f, |h| {
        if h.is_zero() {
            return Ok(TwoDecomposition::new(h.index_set().clone()));
        }
        match find_two_decomposition(h) {
            Decomposition::Feasible(d) => Ok(d),
            Decomposition::Infeasible(i) => Err(i),
        }
    });
    Ok(match out {
        Ok(w) => Verdict::Windable(w),
        Err((pinned, bits, product, infeasibility)) => {
            Verdict::NotWindable(Box::new(Counterexample { pinned, bits, product, infeasibility }))
        }
    })
}

/// Decide windability through `F_⊕`. A counterexample refers to the inputs
/// of `F_⊕` (parity input first).
pub fn is_windable(f: &Signature) -> Result<Verdict> {
    if f.arity() > WINDABLE_CAP {
        return Err(Error::ArityCap { arity: f.arity(), cap: WINDABLE_CAP });
    }
    Ok(match is_even_windable(&f.parity_extend())? {
        Verdict::Windable(w) => Verdict::Windable(drop_parity_witness(f.index_set(), &w)),
        other => other,
    })
}

/// Translate an even witness for `F_⊕` into a general witness for `F` via
/// `ν(M) = {S ∖ {p}}`.
pub fn drop_parity_witness(index: &IndexSet, w: &WindabilityWitness) -> WindabilityWitness {
    let mut out = WindabilityWitness::new(index.clone(), WitnessKind::General);
    for ((x, y, m), v) in w.entries() {
        let mut pairs = Vec::new();
        let mut singles = Vec::new();
        for &(a, b) in m.pairs() {
            if a == 0 {
                singles.push(b - 1);
            } else {
                pairs.push((a - 1, b - 1));
            }
        }
        out.add(x >> 1, y >> 1, PairPartition::new(pairs, singles), v.clone());
    }
    out
}

/// Lift a general witness for `F` to an even witness for `F_⊕` via the
/// map `μ` (singletons paired up in order, the parity input joining an odd
/// count).
pub fn parity_witness(f_plus: &Signature, w: &WindabilityWitness) -> WindabilityWitness {
    let mut out = WindabilityWitness::new(f_plus.index_set().clone(), WitnessKind::Even);
    for ((x, y, m), v) in w.entries() {
        let mut pairs: Vec<(u8, u8)> = m.pairs().iter().map(|&(a, b)| (a + 1, b + 1)).collect();
        let mut singles: Vec<u8> = m.singletons().iter().map(|&a| a + 1).collect();
        if singles.len() % 2 == 1 {
            singles.insert(0, 0);
        }
        for c in singles.chunks(2) {
            pairs.push((c[0], c[1]));
        }
        let px = x.count_ones() & 1;
        let py = y.count_ones() & 1;
        out.add((x << 1) | px, (y << 1) | py, PairPartition::new(pairs, Vec::new()), v.clone());
    }
    out
}

/// `F(x)F(x̄) ≤ Σ_i F(x ⊕ e_i)F(x̄ ⊕ e_i)` at all eight points.
pub fn check_arity3_inequality(f: &Signature) -> Result<bool> {
    Ok(arity3_violation(f)?.is_none())
}

/// First point violating the arity-3 inequality.
pub fn arity3_violation(f: &Signature) -> Result<Option<u32>> {
    if f.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, found: f.arity() });
    }
    Ok((0..8u32).find(|&x| {
        let c = x ^ 7;
        let lhs = f.value(x) * f.value(c);
        let rhs = (0..3).fold(Rational::zero(), |s, i| {
            s + f.value(x ^ (1 << i)) * f.value(c ^ (1 << i))
        });
        lhs > rhs
    }))
}

/// Consecutive pairing of the positions in `m`, in increasing order.
fn canonical_pairing(m: u32) -> Vec<(u8, u8)> {
    let pos: Vec<u8> = (0..32).filter(|&i| m >> i & 1 == 1).collect();
    pos.chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Single-pairing 2-decomposition of `Even_J` (or `Odd_J` when `odd`).
pub fn parity_decomposition(index: &IndexSet, odd: bool) -> Result<TwoDecomposition> {
    let k = index.len();
    if k % 2 == 1 {
        return Err(Error::Precondition("2-decompositions need an even index set".into()));
    }
    let full = mask(k);
    let n = PairPartition::new(canonical_pairing(full), Vec::new());
    let mut d = TwoDecomposition::new(index.clone());
    for x in 0..=full {
        if (x.count_ones() % 2 == 1) == odd {
            d.set(x, n.clone(), Rational::one());
        }
    }
    Ok(d)
}

/// The subset-counting 2-decomposition of `EvenNAE_J`.
pub fn even_nae_decomposition(index: &IndexSet) -> Result<TwoDecomposition> {
    let k = index.len();
    if k % 2 == 1 {
        return Err(Error::Precondition("2-decompositions need an even index set".into()));
    }
    let full = mask(k);
    let mut d = TwoDecomposition::new(index.clone());
    if k < 2 {
        return Ok(d);
    }
    let unit = crate::signature::ratio(1, 1 << (k - 2));
    for x in 0..=full {
        for i in 0..=full {
            let rest = full & !i;
            if i.count_ones() % 2 == 0
                && (x & i).count_ones() % 2 == 1
                && (x & rest).count_ones() % 2 == 1
            {
                let mut pairs = canonical_pairing(i);
                pairs.extend(canonical_pairing(rest));
                d.add(x, PairPartition::new(pairs, Vec::new()), unit.clone());
            }
        }
    }
    Ok(d)
}

/// `D'(x, M) = D(x ⊕ z, M)`, a 2-decomposition of the flip by `z`.
pub fn flip_decomposition(d: &TwoDecomposition, z: u32) -> TwoDecomposition {
    let mut out = TwoDecomposition::new(d.index.clone());
    for ((x, m), v) in d.entries() {
        out.set(x ^ z, m.clone(), v.clone());
    }
    out
}

/// Closed-form 2-decomposition when `h` is zero, `Even_K`, `Odd_K`, or a
/// flip of `EvenNAE_K`.
pub fn closed_form_decomposition(h: &Signature) -> Option<TwoDecomposition> {
    let index = h.index_set();
    if h.is_zero() {
        return Some(TwoDecomposition::new(index.clone()));
    }
    if index.len() % 2 == 1 {
        return None;
    }
    let n = index.len();
    let table_of = |kind: &crate::signature::Named| Signature::named(kind, index.clone()).ok();
    use crate::signature::Named;
    if table_of(&Named::Even).as_ref() == Some(h) {
        return parity_decomposition(index, false).ok();
    }
    if table_of(&Named::Odd).as_ref() == Some(h) {
        return parity_decomposition(index, true).ok();
    }
    let en = table_of(&Named::EvenNae)?;
    let z = (0..=mask(n)).find(|&z| en.flip(z) == *h)?;
    Some(flip_decomposition(&even_nae_decomposition(index).ok()?, z))
}

/// Family with a closed-form windability certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Even,
    Odd,
    Nae,
}

/// Closed-form certificates, no linear programming: an even witness for
/// `Even_J` and `Odd_J`, and a general witness for `NAE_J` built from the
/// decompositions of the pinnings of `(NAE_J)_⊕`.
pub fn named_witness(family: Family, index: &IndexSet) -> Result<WindabilityWitness> {
    use crate::signature::Named;
    let build = |f: &Signature| {
        assemble_even_witness(f, |h| closed_form_decomposition(h).ok_or(())).map_err(|_| {
            Error::Precondition("pinning outside the closed-form families".into())
        })
    };
    match family {
        Family::Even => build(&Signature::named(&Named::Even, index.clone())?),
        Family::Odd => build(&Signature::named(&Named::Odd, index.clone())?),
        Family::Nae => {
            let f = Signature::named(&Named::Nae, index.clone())?;
            Ok(drop_parity_witness(index, &build(&f.parity_extend())?))
        }
    }
}

/// Components of a link graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    /// A path between two degree-one vertices.
    Path(usize, usize),
    Cycle(Vec<usize>),
}

/// The multigraph on the elements of `m` with edges `m` plus the pairs of
/// `e` lying inside that set.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    m_partner: HashMap<usize, usize>,
    e_partner: HashMap<usize, usize>,
}

impl LinkGraph {
    pub fn new(m: &[(usize, usize)], e: &[(usize, usize)]) -> Self {
        let mut m_partner = HashMap::new();
        for &(a, b) in m {
            m_partner.insert(a, b);
            m_partner.insert(b, a);
        }
        let mut e_partner = HashMap::new();
        for &(a, b) in e {
            if m_partner.contains_key(&a) && m_partner.contains_key(&b) {
                e_partner.insert(a, b);
                e_partner.insert(b, a);
            }
        }
        LinkGraph { m_partner, e_partner }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.m_partner.contains_key(&v) as usize + self.e_partner.contains_key(&v) as usize
    }

    pub fn components(&self) -> Vec<Component> {
        let mut verts: Vec<usize> = self.m_partner.keys().copied().collect();
        verts.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for &start in &verts {
            if seen.contains(&start) || self.degree(start) != 1 {
                continue;
            }
            // walk alternating M / E edges from a path end
            let mut v = start;
            seen.insert(v);
            loop {
                let w = self.m_partner[&v];
                seen.insert(w);
                match self.e_partner.get(&w) {
                    Some(&u) => {
                        seen.insert(u);
                        v = u;
                    }
                    None => {
                        out.push(Component::Path(start.min(w), start.max(w)));
                        break;
                    }
                }
            }
        }
        for &start in &verts {
            if seen.contains(&start) {
                continue;
            }
            let mut cyc = Vec::new();
            let mut v = start;
            loop {
                let w = self.m_partner[&v];
                cyc.push(v);
                cyc.push(w);
                seen.insert(v);
                seen.insert(w);
                v = self.e_partner[&w];
                if v == start {
                    break;
                }
            }
            out.push(Component::Cycle(cyc));
        }
        out
    }
}

/// Largest incidence count accepted by [`compose_witness`].
pub const COMPOSE_CAP: usize = 12;

/// Even witness for the signature of `c`, composed from an even witness
/// per vertex (indexed like the vertex's signature).
pub fn compose_witness(c: &Circuit, witnesses: &[WindabilityWitness]) -> Result<WindabilityWitness> {
    if c.num_incidences() > COMPOSE_CAP {
        return Err(Error::ArityCap { arity: c.num_incidences(), cap: COMPOSE_CAP });
    }
    if witnesses.len() != c.vertices().len() {
        return Err(Error::Precondition("one witness per vertex required".into()));
    }
    for (v, w) in c.vertices().iter().zip(witnesses) {
        if w.kind() != WitnessKind::Even || w.index_set().len() != v.signature.arity() {
            return Err(Error::Precondition(format!("witness for `{}` does not fit", v.name)));
        }
    }
    // entries per vertex, grouped by local (x, y)
    let grouped: Vec<HashMap<(u32, u32), Vec<(&PairPartition, &Rational)>>> = witnesses
        .iter()
        .map(|w| {
            let mut g: HashMap<(u32, u32), Vec<_>> = HashMap::new();
            for ((x, y, m), v) in w.entries() {
                g.entry((*x, *y)).or_default().push((m, v));
            }
            g
        })
        .collect();
    let ext = c.externals();
    let ext_pos: HashMap<usize, usize> = ext.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let edges = c.edges();
    let ni = c.num_incidences();
    let na = ext.len();
    let mut out = WindabilityWitness::new(c.external_index(), WitnessKind::Even);
    let ext_word = |xa: u32, xe: u32| -> Vec<bool> {
        let mut bits = vec![false; ni];
        for (k, &i) in ext.iter().enumerate() {
            bits[i] = xa >> k & 1 == 1;
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            let bit = xe >> k & 1 == 1;
            bits[a] = bit;
            bits[b] = bit;
        }
        bits
    };
    let local = |bits: &[bool], v: usize| -> u32 {
        c.vertices()[v]
            .incidences
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &i)| acc | ((bits[i] as u32) << k))
    };
    for xa in 0..1u32 << na {
        for ya in 0..1u32 << na {
            for xe in 0..1u32 << edges.len() {
                let xb = ext_word(xa, xe);
                for ye in 0..1u32 << edges.len() {
                    let yb = ext_word(ya, ye);
                    let mut choices: Vec<&Vec<(&PairPartition, &Rational)>> = Vec::new();
                    let mut empty = false;
                    for (v, g) in grouped.iter().enumerate() {
                        match g.get(&(local(&xb, v), local(&yb, v))) {
                            Some(list) => choices.push(list),
                            None => {
                                empty = true;
                                break;
                            }
                        }
                    }
                    if empty {
                        continue;
                    }
                    let mut idx = vec![0usize; choices.len()];
                    loop {
                        let mut prod = Rational::one();
                        let mut pairs = Vec::new();
                        for (v, (&k, list)) in idx.iter().zip(&choices).enumerate() {
                            let (m, val) = list[k];
                            prod *= val;
                            let inc = &c.vertices()[v].incidences;
                            for &(a, b) in m.pairs() {
                                pairs.push((inc[a as usize], inc[b as usize]));
                            }
                        }
                        let induced: Vec<(u8, u8)> = LinkGraph::new(&pairs, edges)
                            .components()
                            .into_iter()
                            .filter_map(|comp| match comp {
                                Component::Path(a, b) => {
                                    Some((ext_pos[&a] as u8, ext_pos[&b] as u8))
                                }
                                Component::Cycle(_) => None,
                            })
                            .collect();
                        out.add(xa, ya, PairPartition::new(induced, Vec::new()), prod);
                        // advance the mixed-radix counter
                        let mut d = 0;
                        loop {
                            if d == idx.len() {
                                break;
                            }
                            idx[d] += 1;
                            if idx[d] < choices[d].len() {
                                break;
                            }
                            idx[d] = 0;
                            d += 1;
                        }
                        if d == idx.len() {
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Even witness for each vertex of `c` by linear programming.
pub fn vertex_witnesses(c: &Circuit) -> Result<Vec<WindabilityWitness>> {
    c.vertices()
        .iter()
        .map(|v| match is_even_windable(&v.signature)? {
            Verdict::Windable(w) => Ok(w),
            Verdict::NotWindable(_) => {
                Err(Error::NotWindable(format!("constraint at `{}` is not even-windable", v.name)))
            }
        })
        .collect()
}

/// Render a configuration as a bit string, label 0 first.
pub fn bit_string(x: u32, n: usize) -> String {
    (0..n).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub(crate) fn parse_bit_string(s: &str, n: usize) -> Result<u32> {
    if s.len() != n {
        return Err(Error::Parse(format!("configuration `{s}` should have {n} bits")));
    }
    s.chars().enumerate().try_fold(0u32, |w, (i, ch)| match ch {
        '0' => Ok(w),
        '1' => Ok(w | 1 << i),
        _ => Err(Error::Parse(format!("bad bit `{ch}` in `{s}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::signature::{ratio, Named};

    fn anon(kind: Named, n: usize) -> Signature {
        Signature::named_anon(&kind, n).unwrap()
    }

    #[test]
    fn pairing_counts() {
        assert_eq!(PairPartition::perfect_pairings(0b1111).len(), 3);
        assert_eq!(PairPartition::perfect_pairings(0b111111).len(), 15);
        assert_eq!(PairPartition::perfect_pairings(0b111).len(), 0);
        assert_eq!(PairPartition::perfect_pairings(0).len(), 1);
        // telephone numbers 1, 2, 4, 10
        assert_eq!(PairPartition::pair_partitions(0b1).len(), 1);
        assert_eq!(PairPartition::pair_partitions(0b11).len(), 2);
        assert_eq!(PairPartition::pair_partitions(0b111).len(), 4);
        assert_eq!(PairPartition::pair_partitions(0b1111).len(), 10);
    }

    #[test]
    fn strictly_terraced_examples() {
        for k in 1..=4 {
            assert!(is_strictly_terraced(&anon(Named::Nae, k)));
            assert!(is_strictly_terraced(&anon(Named::Even, k)));
            assert!(is_strictly_terraced(&anon(Named::Odd, k)));
        }
        let f = Signature::from_ints(&["a", "b"], &[2, 0, 0, 1]).unwrap();
        assert!(!is_strictly_terraced(&f));
        assert!(is_strictly_terraced(&Signature::zero(IndexSet::anonymous(3).unwrap())));
    }

    #[test]
    fn coindependence_examples() {
        let diseq = anon(Named::Nae, 2);
        assert!(has_coindependent_support(&diseq));
        assert!(has_coindependent_support(&anon(Named::Equality, 2)));
        assert!(!has_coindependent_support(&anon(Named::Equality, 3)));
        let pos = Signature::from_ints(&["a", "b"], &[1, 2, 3, 4]).unwrap();
        assert!(has_coindependent_support(&pos));
    }

    #[test]
    fn decompositions_of_named() {
        let even4 = anon(Named::Even, 4);
        match find_two_decomposition(&even4) {
            Decomposition::Feasible(d) => assert!(verify_two_decomposition(&even4, &d)),
            Decomposition::Infeasible(_) => panic!("Even_4 has a 2-decomposition"),
        }
        let en4 = anon(Named::EvenNae, 4);
        match find_two_decomposition(&en4) {
            Decomposition::Feasible(d) => assert!(verify_two_decomposition(&en4, &d)),
            Decomposition::Infeasible(_) => panic!("EvenNAE_4 has a 2-decomposition"),
        }
        let eq2 = anon(Named::Equality, 2);
        assert!(matches!(find_two_decomposition(&eq2), Decomposition::Feasible(_)));
        let skew = Signature::from_ints(&["a", "b"], &[1, 0, 0, 2]).unwrap();
        match find_two_decomposition(&skew) {
            Decomposition::Infeasible(i) => assert!(i.verify()),
            Decomposition::Feasible(_) => panic!("D(00) = D(11) is forced"),
        }
        let odd3 = anon(Named::Odd, 3);
        match find_two_decomposition(&odd3) {
            Decomposition::Infeasible(i) => assert!(i.verify()),
            Decomposition::Feasible(_) => panic!("odd index set with nonzero h"),
        }
    }

    #[test]
    fn closed_forms_verify() {
        for k in [0usize, 2, 4, 6] {
            let idx = IndexSet::anonymous(k).unwrap();
            let even = Signature::named(&Named::Even, idx.clone()).unwrap();
            let d = parity_decomposition(&idx, false).unwrap();
            assert!(verify_two_decomposition(&even, &d));
            let odd = Signature::named(&Named::Odd, idx.clone()).unwrap();
            assert!(verify_two_decomposition(&odd, &parity_decomposition(&idx, true).unwrap()));
            let en = Signature::named(&Named::EvenNae, idx.clone()).unwrap();
            let d = even_nae_decomposition(&idx).unwrap();
            assert!(verify_two_decomposition(&en, &d));
            for z in [0u32, 1, 0b101] {
                let z = z & mask(k);
                assert!(verify_two_decomposition(&en.flip(z), &flip_decomposition(&d, z)));
            }
        }
    }

    #[test]
    fn even_nae_sums_to_one_on_support() {
        let idx = IndexSet::anonymous(4).unwrap();
        let d = even_nae_decomposition(&idx).unwrap();
        let mut sums = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero(),
            Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero(),
            Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero(),
            Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        for ((x, _), v) in d.entries() {
            sums[*x as usize] += v;
        }
        for x in 0..16u32 {
            let on = x.count_ones() % 2 == 0 && x != 0 && x != 15;
            assert_eq!(sums[x as usize], if on { Rational::one() } else { Rational::zero() });
        }
    }

    #[test]
    fn perturbed_witness_fails() {
        let even4 = anon(Named::Even, 4);
        let w = named_witness(Family::Even, even4.index_set()).unwrap();
        assert!(verify_witness(&even4, &w));
        let mut bad = w.clone();
        let (key, v) = w.entries().next().map(|(k, v)| (k.clone(), v.clone())).unwrap();
        bad.set(key.0, key.1, key.2, v + Rational::one());
        assert!(!verify_witness(&even4, &bad));
    }

    #[test]
    fn named_witnesses_verify() {
        for k in 1..=4 {
            let idx = IndexSet::anonymous(k).unwrap();
            for (fam, kind) in [(Family::Even, Named::Even), (Family::Odd, Named::Odd), (Family::Nae, Named::Nae)] {
                let f = Signature::named(&kind, idx.clone()).unwrap();
                let w = named_witness(fam, &idx).unwrap();
                assert!(verify_witness(&f, &w), "{fam:?} on {k}");
            }
        }
    }

    #[test]
    fn lp_windability_examples() {
        for k in 1..=4 {
            for kind in [Named::Nae, Named::Even, Named::Odd] {
                let f = anon(kind.clone(), k);
                let v = is_windable(&f).unwrap();
                let w = v.witness().expect("windable family");
                assert!(verify_witness(&f, w));
            }
        }
        let eq3 = anon(Named::Equality, 3);
        match is_windable(&eq3).unwrap() {
            Verdict::NotWindable(c) => assert!(c.infeasibility.verify()),
            Verdict::Windable(_) => panic!("=_3 is not windable"),
        }
        assert!(!check_arity3_inequality(&eq3).unwrap());
        for f in [
            Signature::named_anon(&Named::Edge(ratio(5, 3)), 2).unwrap(),
            Signature::named_anon(&Named::Fugacity(ratio(2, 7)), 3).unwrap(),
        ] {
            let v = is_windable(&f).unwrap();
            assert!(verify_witness(&f, v.witness().unwrap()));
        }
    }

    #[test]
    fn even_windable_examples() {
        for k in 1..=5 {
            for kind in [Named::Even, Named::Odd] {
                let f = anon(kind, k);
                let v = is_even_windable(&f).unwrap();
                assert!(verify_witness(&f, v.witness().unwrap()));
            }
        }
        match is_even_windable(&anon(Named::Equality, 4)).unwrap() {
            Verdict::NotWindable(c) => assert!(c.infeasibility.verify()),
            Verdict::Windable(_) => panic!("=_4 is not even-windable"),
        }
        assert!(matches!(is_even_windable(&anon(Named::Even, 7)), Err(Error::ArityCap { .. })));
    }

    #[test]
    fn arity3_inequality_examples() {
        assert!(check_arity3_inequality(&anon(Named::Fugacity(Rational::zero()), 3)).unwrap());
        assert!(check_arity3_inequality(&anon(Named::Or, 3)).unwrap());
        assert!(check_arity3_inequality(&anon(Named::Or, 2)).is_err());
    }

    #[test]
    fn parity_witness_roundtrip() {
        let nae3 = anon(Named::Nae, 3);
        let w = is_windable(&nae3).unwrap().witness().unwrap().clone();
        let plus = nae3.parity_extend();
        assert!(verify_witness(&plus, &parity_witness(&plus, &w)));
    }

    #[test]
    fn link_graph_components() {
        // M = {0,1},{2,3},{4,5}; E = {1,2},{5,4}
        let lg = LinkGraph::new(&[(0, 1), (2, 3), (4, 5)], &[(1, 2), (5, 4), (3, 9)]);
        let comps = lg.components();
        assert!(comps.contains(&Component::Path(0, 3)));
        assert!(comps.iter().any(|c| matches!(c, Component::Cycle(v) if v.len() == 2)));
        assert_eq!(lg.degree(3), 1);
    }

    #[test]
    fn compose_two_even2() {
        let mut b = CircuitBuilder::new();
        let u = b.add_vertex("u", anon(Named::Even, 2)).unwrap();
        let v = b.add_vertex("v", anon(Named::Even, 2)).unwrap();
        let (a, c) = (b.incidence(u, 1), b.incidence(v, 0));
        b.connect(a, c);
        let (p, q) = (b.incidence(u, 0), b.incidence(v, 1));
        b.external(p).external(q);
        let circ = b.build().unwrap();
        let ws = vertex_witnesses(&circ).unwrap();
        let w = compose_witness(&circ, &ws).unwrap();
        let sig = circ.signature_of().unwrap();
        assert_eq!(sig.table(), anon(Named::Even, 2).table());
        assert!(verify_witness(&sig, &w));
    }

    #[test]
    fn compose_single_vertex_is_identity() {
        let f = anon(Named::Even, 3);
        let mut b = CircuitBuilder::new();
        let u = b.add_vertex("u", f.clone()).unwrap();
        for k in 0..3 {
            let i = b.incidence(u, k);
            b.external(i);
        }
        let circ = b.build().unwrap();
        let ws = vertex_witnesses(&circ).unwrap();
        let w = compose_witness(&circ, &ws).unwrap();
        assert_eq!(w.entries().collect::<Vec<_>>(), ws[0].entries().collect::<Vec<_>>());
    }
}
