//! Prat ratios and the `Z₂/Z₀` bound for strictly terraced circuits.

use num_traits::{One, Zero};

use crate::circuit::Circuit;
use crate::class::is_strictly_terraced;
use crate::error::{Error, Result};
use crate::signature::{int, mask, Named, Rational, Signature};

/// Largest arity accepted by [`prat`].
pub const PRAT_CAP: usize = 6;

/// One `F` constraint wired to parity constraints, reduced to canonical
/// form. Each block is a set of incidences of `F` joined to one parity
/// vertex; `ext_block` says which block also carries the output edge, and
/// `direct` replaces that by attaching the output straight to an incidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGadget {
    /// `(incidence mask, odd)` per block.
    pub blocks: Vec<(u32, bool)>,
    pub ext_block: Option<usize>,
    pub direct: Option<usize>,
}

impl ParityGadget {
    /// `F'(0)` and `F'(1)`.
    pub fn evaluate(&self, f: &Signature) -> [Rational; 2] {
        let mut out = [Rational::zero(), Rational::zero()];
        for x in f.support() {
            for t in 0..2u32 {
                if let Some(i) = self.direct {
                    if x >> i & 1 != t {
                        continue;
                    }
                }
                let ok = self.blocks.iter().enumerate().all(|(b, &(m, odd))| {
                    let extra = if self.ext_block == Some(b) { t } else { 0 };
                    (((x & m).count_ones() + extra) & 1 == 1) == odd
                });
                if ok {
                    out[t as usize] += f.value(x);
                }
            }
        }
        out
    }

    pub fn describe(&self, labels: &[String]) -> String {
        let mut parts = Vec::new();
        if let Some(i) = self.direct {
            parts.push(format!("out={}", labels[i]));
        }
        for (b, &(m, odd)) in self.blocks.iter().enumerate() {
            let mut names: Vec<&str> =
                (0..labels.len()).filter(|&i| m >> i & 1 == 1).map(|i| labels[i].as_str()).collect();
            if self.ext_block == Some(b) {
                names.push("out");
            }
            parts.push(format!("{}{{{}}}", if odd { "Odd" } else { "Even" }, names.join(",")));
        }
        parts.join(" ")
    }
}

/// Set partitions of the elements `0..n`, as block masks.
fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b] |= 1 << i;
            rec(i + 1, n, cur, out);
            cur[b] &= !(1 << i);
        }
        cur.push(1 << i);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Visit every canonical gadget of `f` with its two output values. Within a
/// partition all `2^blocks` parity choices are read off one pass over the
/// support.
fn for_each_gadget(f: &Signature, mut visit: impl FnMut(&ParityGadget, [Rational; 2])) {
    let n = f.arity();
    // (a) output inside a block: element `n` stands for the output edge
    for part in set_partitions(n + 1) {
        let ext_block = part.iter().position(|&b| b >> n & 1 == 1);
        let blocks: Vec<u32> = part.iter().map(|&b| b & mask(n)).collect();
        scan(f, &blocks, ext_block, None, &mut visit);
    }
    // (b) output replaces incidence i
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        for part in set_partitions(rest.len()) {
            let blocks: Vec<u32> = part
                .iter()
                .map(|&b| rest.iter().enumerate().fold(0, |m, (k, &p)| m | ((b >> k & 1) << p)))
                .collect();
            scan(f, &blocks, None, Some(i), &mut visit);
        }
    }
}

fn scan(
    f: &Signature,
    blocks: &[u32],
    ext_block: Option<usize>,
    direct: Option<usize>,
    visit: &mut impl FnMut(&ParityGadget, [Rational; 2]),
) {
    let nb = blocks.len();
    let mut sums = vec![[Rational::zero(), Rational::zero()]; 1 << nb];
    for x in f.support() {
        let pat = blocks
            .iter()
            .enumerate()
            .fold(0usize, |p, (k, &m)| p | (((x & m).count_ones() & 1) as usize) << k);
        for t in 0..2usize {
            if let Some(i) = direct {
                if (x >> i & 1) as usize != t {
                    continue;
                }
            }
            let flip = match ext_block {
                Some(b) if t == 1 => 1 << b,
                _ => 0,
            };
            sums[pat ^ flip][t] += f.value(x);
        }
    }
    for (c, vals) in sums.into_iter().enumerate() {
        let g = ParityGadget {
            blocks: blocks.iter().enumerate().map(|(k, &m)| (m, c >> k & 1 == 1)).collect(),
            ext_block,
            direct,
        };
        visit(&g, vals);
    }
}

/// `Prat(F)` with a gadget attaining it (`None` for the zero signature).
pub fn prat_with_gadget(f: &Signature) -> Result<(Rational, Option<ParityGadget>)> {
    if f.arity() > PRAT_CAP {
        return Err(Error::ArityCap { arity: f.arity(), cap: PRAT_CAP });
    }
    let mut best = Rational::zero();
    let mut arg = None;
    for_each_gadget(f, |g, [v0, v1]| {
        if v1.is_zero() {
            return;
        }
        let r = v0 / v1;
        if arg.is_none() || r > best {
            best = r;
            arg = Some(g.clone());
        }
    });
    Ok((best, arg))
}

/// Maximum of `F'(0)/F'(1)` over parity-signatures of `f` with `F'(1) > 0`.
pub fn prat(f: &Signature) -> Result<Rational> {
    prat_with_gadget(f).map(|(r, _)| r)
}

/// Published bound for the named families: `0` for parity, `3` for NAE.
pub fn known_prat_bound(f: &Signature) -> Option<Rational> {
    let idx = f.index_set().clone();
    let is = |k: Named| Signature::named(&k, idx.clone()).map(|s| s == *f).unwrap_or(false);
    if is(Named::Even) || is(Named::Odd) {
        Some(Rational::zero())
    } else if is(Named::Nae) {
        Some(int(3))
    } else {
        None
    }
}

/// Prat of a constraint: enumerated up to the cap, the published bound
/// above it.
pub fn constraint_prat(f: &Signature) -> Result<Rational> {
    if f.arity() <= PRAT_CAP {
        prat(f)
    } else {
        known_prat_bound(f).ok_or(Error::ArityCap { arity: f.arity(), cap: PRAT_CAP })
    }
}

/// `½|E|² max(1, Σ_v Prat(F_v))²`.
pub fn ratio_bound(c: &Circuit) -> Result<Rational> {
    let mut total = Rational::zero();
    for v in c.vertices() {
        if !is_strictly_terraced(&v.signature) {
            return Err(Error::NotStrictlyTerraced(v.name.clone()));
        }
        total += constraint_prat(&v.signature)?;
    }
    let e = int(c.edges().len() as i64);
    let m = if total > Rational::one() { total } else { Rational::one() };
    Ok(&e * &e * &m * &m / int(2))
}

/// `H(0)`, `H(1)` for `H(t) = Σ_x F(t, x) G(x)` and whether
/// `H(0) ≤ (Prat(F) + Prat(G)) H(1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseCheck {
    pub h0: Rational,
    pub h1: Rational,
    pub bound: Rational,
    pub holds: bool,
}

/// `f` has the output as input 0 followed by the inputs of `g`.
pub fn pairwise_ratio_bound(f: &Signature, g: &Signature) -> Result<PairwiseCheck> {
    if f.arity() != g.arity() + 1 {
        return Err(Error::ArityMismatch { expected: g.arity() + 1, found: f.arity() });
    }
    for (s, name) in [(f, "f"), (g, "g")] {
        if !is_strictly_terraced(s) {
            return Err(Error::NotStrictlyTerraced(name.into()));
        }
    }
    // contract every input of g against inputs 1.. of f
    let mut h = [Rational::zero(), Rational::zero()];
    for x in g.support() {
        for t in 0..2u32 {
            h[t as usize] += f.value((x << 1) | t) * g.value(x);
        }
    }
    let [h0, h1] = h;
    if h1.is_zero() {
        return Err(Error::Precondition("H(1) = 0".into()));
    }
    let bound = (prat(f)? + prat(g)?) * &h1;
    Ok(PairwiseCheck { holds: h0 <= bound, h0, h1, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Label, LabelledGraph};
    use crate::signature::IndexSet;

    fn anon(k: Named, n: usize) -> Signature {
        Signature::named_anon(&k, n).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), b);
        }
    }

    #[test]
    fn parity_prat_is_zero() {
        for k in 1..=5 {
            assert_eq!(prat(&anon(Named::Even, k)).unwrap(), Rational::zero());
            assert_eq!(prat(&anon(Named::Odd, k)).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn nae_prat_at_most_three() {
        for k in 1..=5 {
            let p = prat(&anon(Named::Nae, k)).unwrap();
            assert!(p <= int(3), "NAE_{k}: {p}");
        }
    }

    #[test]
    fn zero_signature() {
        assert_eq!(prat(&Signature::zero(IndexSet::anonymous(3).unwrap())).unwrap(), Rational::zero());
    }

    #[test]
    fn gadget_attains_value() {
        let f = Signature::from_ints(&["a", "b"], &[3, 1, 1, 0]).unwrap();
        let (p, g) = prat_with_gadget(&f).unwrap();
        let [v0, v1] = g.unwrap().evaluate(&f);
        assert_eq!(v0 / v1, p);
    }

    #[test]
    fn pinning_does_not_increase() {
        let f = Signature::from_ints(&["a", "b", "c"], &[0, 1, 1, 2, 1, 3, 2, 5]).unwrap();
        let p = prat(&f).unwrap();
        for pinned in 1..8u32 {
            for bits in 0..8u32 {
                if bits & !pinned != 0 {
                    continue;
                }
                assert!(prat(&f.pin_mask(pinned, bits)).unwrap() <= p);
            }
        }
    }

    #[test]
    fn pairwise_examples() {
        let chk = pairwise_ratio_bound(&anon(Named::Even, 2), &anon(Named::Odd, 1)).unwrap();
        assert!(chk.h0.is_zero() && chk.holds);
        let chk = pairwise_ratio_bound(&anon(Named::Nae, 3), &anon(Named::Nae, 2)).unwrap();
        assert!(chk.holds);
        let bad = Signature::from_ints(&["a", "b"], &[2, 0, 0, 1]).unwrap();
        assert!(pairwise_ratio_bound(&bad, &anon(Named::Even, 1)).is_err());
    }

    #[test]
    fn all_parity_bound() {
        let g = LabelledGraph {
            vertices: vec![("u".into(), Label::Even), ("v".into(), Label::Even)],
            edges: vec![(0, 1), (0, 1), (0, 0)],
        };
        let c = g.to_circuit().unwrap();
        assert_eq!(ratio_bound(&c).unwrap(), crate::signature::ratio(9, 2));
    }
}
