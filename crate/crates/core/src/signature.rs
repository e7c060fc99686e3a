//! Boolean signatures over labelled index sets.
//!
//! A [`Signature`] is a dense table of non-negative rationals indexed by the
//! configurations of an [`IndexSet`]. Label `i` is bit `i` of the table
//! index, so label 0 is the least-significant bit.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms by `num`.
pub type Rational = BigRational;

/// Largest arity a dense table may have.
pub const MAX_ARITY: usize = 24;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Ordered list of distinct labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IndexSet {
    labels: Vec<String>,
}

impl IndexSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_ARITY {
            return Err(Error::ArityCap { arity: labels.len(), cap: MAX_ARITY });
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(IndexSet { labels })
    }

    /// Labels `x0, x1, ...`.
    pub fn anonymous(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("x{i}")))
    }

    pub fn empty() -> Self {
        IndexSet::default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Number of configurations, `2^n`.
    pub fn size(&self) -> usize {
        1usize << self.labels.len()
    }

    fn without(&self, positions: &[usize]) -> IndexSet {
        IndexSet {
            labels: self
                .labels
                .iter()
                .enumerate()
                .filter(|(i, _)| !positions.contains(i))
                .map(|(_, l)| l.clone())
                .collect(),
        }
    }
}

/// A configuration of an index set, stored as an `n`-bit word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    bits: u32,
    len: u8,
}

impl Configuration {
    pub fn new(bits: u32, len: usize) -> Self {
        assert!(len <= MAX_ARITY, "configuration longer than the arity cap");
        Configuration { bits: bits & mask(len), len: len as u8 }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(0, len)
    }

    pub fn ones(len: usize) -> Self {
        Self::new(mask(len), len)
    }

    /// The unit vector `e_i`.
    pub fn unit(i: usize, len: usize) -> Self {
        Self::new(1 << i, len)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let word = bits.iter().enumerate().fold(0u32, |w, (i, &b)| w | ((b as u32) << i));
        Self::new(word, bits.len())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn flip(&self, i: usize) -> Self {
        Self::new(self.bits ^ (1 << i), self.len())
    }

    pub fn xor(&self, other: &Configuration) -> Self {
        debug_assert_eq!(self.len, other.len);
        Self::new(self.bits ^ other.bits, self.len())
    }

    pub fn complement(&self) -> Self {
        Self::new(!self.bits, self.len())
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Configuration {
    /// Bit string with label 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub(crate) fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Scatter the low bits of `value` into `positions` (bit `k` of `value`
/// lands at `positions[k]`).
pub(crate) fn deposit(value: u32, positions: &[usize]) -> u32 {
    positions
        .iter()
        .enumerate()
        .fold(0, |w, (k, &p)| w | ((value >> k & 1) << p))
}

/// Named signature families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Named {
    Even,
    Odd,
    Nae,
    EvenNae,
    Or,
    Equality,
    /// `Edge^w`: value 1 at (0,0), `w` at (1,1). Arity 2.
    Edge(Rational),
    /// `Fugacity^λ`: λ at the all-zeros point, 1 at weight one, 0 elsewhere.
    Fugacity(Rational),
}

impl Named {
    fn value(&self, x: u32, n: usize) -> Rational {
        let w = x.count_ones() as usize;
        let indicator = |b: bool| if b { Rational::one() } else { Rational::zero() };
        match self {
            Named::Even => indicator(w % 2 == 0),
            Named::Odd => indicator(w % 2 == 1),
            Named::Nae => indicator(w > 0 && w < n),
            Named::EvenNae => indicator(w % 2 == 0 && w > 0 && w < n),
            Named::Or => indicator(w > 0),
            Named::Equality => indicator(w == 0 || w == n),
            Named::Edge(wt) => match x {
                0 => Rational::one(),
                3 => wt.clone(),
                _ => Rational::zero(),
            },
            Named::Fugacity(l) => match w {
                0 => l.clone(),
                1 => Rational::one(),
                _ => Rational::zero(),
            },
        }
    }
}

/// A function from the configurations of an index set to non-negative
/// rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    index: IndexSet,
    table: Vec<Rational>,
}

impl Signature {
    pub fn new(index: IndexSet, table: Vec<Rational>) -> Result<Self> {
        if table.len() != index.size() {
            return Err(Error::TableLength { expected: index.size(), found: table.len() });
        }
        if let Some(v) = table.iter().find(|v| v.is_negative()) {
            return Err(Error::Negative(v.to_string()));
        }
        Ok(Signature { index, table })
    }

    pub fn from_fn(index: IndexSet, f: impl Fn(u32) -> Rational) -> Result<Self> {
        let table = (0..index.size() as u32).map(f).collect();
        Self::new(index, table)
    }

    /// Convenience constructor from small integers.
    pub fn from_ints<S: AsRef<str>>(labels: &[S], values: &[i64]) -> Result<Self> {
        let index = IndexSet::new(labels.iter().map(|s| s.as_ref().to_string()))?;
        Self::new(index, values.iter().map(|&v| int(v)).collect())
    }

    pub fn named(kind: &Named, index: IndexSet) -> Result<Self> {
        let n = index.len();
        match kind {
            Named::Edge(w) => {
                if n != 2 {
                    return Err(Error::ArityMismatch { expected: 2, found: n });
                }
                if w.is_negative() {
                    return Err(Error::Negative(w.to_string()));
                }
            }
            Named::Fugacity(l) if l.is_negative() => return Err(Error::Negative(l.to_string())),
            _ => {}
        }
        Self::from_fn(index, |x| kind.value(x, n))
    }

    /// Named family on anonymous labels `x0..`.
    pub fn named_anon(kind: &Named, n: usize) -> Result<Self> {
        Self::named(kind, IndexSet::anonymous(n)?)
    }

    pub fn zero(index: IndexSet) -> Self {
        let table = vec![Rational::zero(); index.size()];
        Signature { index, table }
    }

    /// Arity-0 signature with the given value.
    pub fn constant(value: Rational) -> Result<Self> {
        Self::new(IndexSet::empty(), vec![value])
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    pub fn labels(&self) -> &[String] {
        self.index.labels()
    }

    pub fn arity(&self) -> usize {
        self.index.len()
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn value(&self, x: u32) -> &Rational {
        &self.table[x as usize]
    }

    pub fn get(&self, x: &Configuration) -> &Rational {
        &self.table[x.bits() as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(Zero::is_zero)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(x, _)| x as u32)
    }

    /// True when every entry is 0 or 1.
    pub fn is_zero_one(&self) -> bool {
        self.table.iter().all(|v| v.is_zero() || v.is_one())
    }

    pub fn full_mask(&self) -> u32 {
        mask(self.arity())
    }

    /// Same table under new labels.
    pub fn relabel(&self, index: IndexSet) -> Result<Self> {
        if index.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: index.len() });
        }
        Ok(Signature { index, table: self.table.clone() })
    }

    /// Reorder inputs: label `k` of the result is label `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.arity();
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::ArityMismatch { expected: n, found: order.len() });
        }
        let index = IndexSet::new(order.iter().map(|&i| self.index.label(i).to_string()))?;
        Self::from_fn(index, |y| {
            let x = order
                .iter()
                .enumerate()
                .fold(0u32, |w, (k, &i)| w | ((y >> k & 1) << i));
            self.table[x as usize].clone()
        })
    }

    /// Pin inputs by label.
    pub fn pin(&self, assignments: &[(&str, bool)]) -> Result<Self> {
        let mut m = 0u32;
        let mut bits = 0u32;
        for &(label, b) in assignments {
            let i = self
                .index
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            m |= 1 << i;
            if b {
                bits |= 1 << i;
            }
        }
        Ok(self.pin_mask(m, bits))
    }

    /// Pin the inputs in `pinned` to the corresponding bits of `bits`.
    pub fn pin_mask(&self, pinned: u32, bits: u32) -> Self {
        let free: Vec<usize> = (0..self.arity()).filter(|&i| pinned >> i & 1 == 0).collect();
        let fixed: Vec<usize> = (0..self.arity()).filter(|&i| pinned >> i & 1 == 1).collect();
        let index = self.index.without(&fixed);
        let base = bits & pinned;
        let table = (0..1u32 << free.len())
            .map(|r| self.table[(base | deposit(r, &free)) as usize].clone())
            .collect();
        Signature { index, table }
    }

    /// The flip of `self` by `y`: `x ↦ F(x ⊕ y)`.
    pub fn flip(&self, y: u32) -> Self {
        let y = y & self.full_mask();
        let table = (0..self.table.len() as u32)
            .map(|x| self.table[(x ^ y) as usize].clone())
            .collect();
        Signature { index: self.index.clone(), table }
    }

    pub fn flip_by(&self, y: &Configuration) -> Result<Self> {
        if y.len() != self.arity() {
            return Err(Error::IndexMismatch);
        }
        Ok(self.flip(y.bits()))
    }

    /// `x ↦ F(x̄)`.
    pub fn complement(&self) -> Self {
        self.flip(self.full_mask())
    }

    /// `x ↦ F(x)F(x̄)`.
    pub fn product_with_complement(&self) -> Self {
        let m = self.full_mask();
        let table = (0..self.table.len() as u32)
            .map(|x| &self.table[x as usize] * &self.table[(x ^ m) as usize])
            .collect();
        Signature { index: self.index.clone(), table }
    }

    /// `F_⊕(p; x) = F(x)` when `p + Σx` is even, 0 otherwise. The new input
    /// is prepended as label 0 and named `p` (primed until unused).
    pub fn parity_extend(&self) -> Self {
        let mut name = String::from("p");
        while self.index.position(&name).is_some() {
            name.push('\'');
        }
        self.parity_extend_with(&name).expect("fresh label")
    }

    pub fn parity_extend_with(&self, label: &str) -> Result<Self> {
        let mut labels = vec![label.to_string()];
        labels.extend(self.index.labels.iter().cloned());
        let index = IndexSet::new(labels)?;
        Self::from_fn(index, |w| {
            if w.count_ones() % 2 == 0 {
                self.table[(w >> 1) as usize].clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn scale(&self, c: &Rational) -> Result<Self> {
        Self::new(self.index.clone(), self.table.iter().map(|v| v * c).collect())
    }

    /// Tensor product on the concatenated index set; `self` supplies the
    /// low bits.
    pub fn tensor(&self, other: &Signature) -> Result<Self> {
        let mut labels = self.index.labels.clone();
        labels.extend(other.index.labels.iter().cloned());
        let index = IndexSet::new(labels)?;
        let n = self.arity();
        let lo = self.full_mask();
        Self::from_fn(index, |w| &self.table[(w & lo) as usize] * &other.table[(w >> n) as usize])
    }

    /// Sum over a shared variable: `H(x, y) = Σ_t F(x, t@i) G(y, t@j)`.
    /// The result is indexed by `self` minus `i`, then `other` minus `j`.
    pub fn join(&self, i: usize, other: &Signature, j: usize) -> Result<Self> {
        let a = self.pin_split(i);
        let b = other.pin_split(j);
        let mut labels = a[0].index.labels.clone();
        labels.extend(b[0].index.labels.iter().cloned());
        let index = IndexSet::new(labels)?;
        if index.len() > MAX_ARITY {
            return Err(Error::ArityCap { arity: index.len(), cap: MAX_ARITY });
        }
        let n = a[0].arity();
        let lo = mask(n);
        Self::from_fn(index, |w| {
            let (x, y) = ((w & lo) as usize, (w >> n) as usize);
            &a[0].table[x] * &b[0].table[y] + &a[1].table[x] * &b[1].table[y]
        })
    }

    /// Loop contraction: `H(x) = Σ_t F(x, t@i, t@j)`.
    pub fn trace(&self, i: usize, j: usize) -> Self {
        assert_ne!(i, j, "trace needs two distinct inputs");
        let both = (1u32 << i) | (1u32 << j);
        let s0 = self.pin_mask(both, 0);
        let s1 = self.pin_mask(both, both);
        let table = s0.table.iter().zip(&s1.table).map(|(a, b)| a + b).collect();
        Signature { index: s0.index, table }
    }

    fn pin_split(&self, i: usize) -> [Signature; 2] {
        [self.pin_mask(1 << i, 0), self.pin_mask(1 << i, 1 << i)]
    }

    /// Unnormalized Hadamard transform `x ↦ Σ_y F(y)(−1)^{x·y}`.
    pub fn hadamard_unnormalized(&self) -> HadamardTransform {
        HadamardTransform::of_table(self.index.clone(), self.table.clone(), 0)
    }
}

/// Signed output of the Hadamard transform. The true transform is
/// `(√2)^sqrt2_exponent · table`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardTransform {
    pub index: IndexSet,
    pub table: Vec<Rational>,
    pub sqrt2_exponent: i64,
}

impl HadamardTransform {
    fn of_table(index: IndexSet, mut table: Vec<Rational>, exponent: i64) -> Self {
        let n = index.len();
        let mut h = 1;
        while h < table.len() {
            for start in (0..table.len()).step_by(2 * h) {
                for k in start..start + h {
                    let a = table[k].clone();
                    let b = table[k + h].clone();
                    table[k] = &a + &b;
                    table[k + h] = a - b;
                }
            }
            h *= 2;
        }
        HadamardTransform { index, table, sqrt2_exponent: exponent - n as i64 }
    }

    /// Transform the (signed) normalized table again.
    pub fn transform(&self) -> HadamardTransform {
        Self::of_table(self.index.clone(), self.table.clone(), self.sqrt2_exponent)
    }

    /// The exact normalized table when the √2 exponent is even.
    pub fn normalized(&self) -> Option<Vec<Rational>> {
        if self.sqrt2_exponent % 2 != 0 {
            return None;
        }
        let half = self.sqrt2_exponent / 2;
        let two = int(2);
        let factor = if half >= 0 {
            num_traits::pow(two, half as usize)
        } else {
            num_traits::pow(two, (-half) as usize).recip()
        };
        Some(self.table.iter().map(|v| v * &factor).collect())
    }
}
