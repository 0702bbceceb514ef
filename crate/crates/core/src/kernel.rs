//! Exact arithmetic, partitions, index sets and set partitions.
//!
//! Every other module leans on the types here. Index sets are bitmasks over
//! the positions of a partition in its stored (weakly decreasing) order, so a
//! subset `{2, 3}` of `(4, 2, 1)` always means the parts `2` and `1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number; always reduced with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_big(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `base^exp` for any integer exponent. Zero to a negative power is an error.
pub fn rat_pow(base: &Rational, exp: i64) -> Result<Rational> {
    if exp >= 0 {
        Ok(Pow::pow(base, exp as u64))
    } else if base.is_zero() {
        Err(Error::DivisionByZero)
    } else {
        Ok(Pow::pow(base.recip(), exp.unsigned_abs()))
    }
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    Rational::from_str(s.trim()).map_err(|_| Error::InvalidArgument(format!("not a rational: {s:?}")))
}

/// Serde adapter writing rationals as `"p/q"` (or `"p"` for integers).
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as a list of strings.
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// An integer partition with weakly decreasing, strictly positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts in any order; they are sorted.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// Sorted constructor that also accepts the empty partition (of 0).
    pub(crate) fn from_sorted_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn part(&self, index: usize) -> u32 {
        self.parts[index]
    }

    /// `(value, multiplicity)` pairs in decreasing value order.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, k)) if *v == p => *k += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// `(-1)^(d - length)`, the sign of any permutation of this cycle type.
    pub fn sign(&self) -> i8 {
        if (self.degree() - self.len() as u64).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// All partitions of `d`, in reverse lexicographic order.
    pub fn all_of(d: u32) -> Vec<Partition> {
        fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition::from_sorted_unchecked(cur.clone()));
                return;
            }
            for p in (1..=rem.min(max)).rev() {
                cur.push(p);
                rec(rem - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            rec(d, d, &mut Vec::new(), &mut out);
        }
        out
    }

    /// All partitions of `d` with exactly `len` parts.
    pub fn all_of_length(d: u32, len: usize) -> Vec<Partition> {
        Partition::all_of(d).into_iter().filter(|p| p.len() == len).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&strs.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"4,2,1"`; whitespace around parts is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidPartition(format!("bad part {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

/// `|Aut p|`: the product of factorials of part multiplicities.
pub fn aut_size(p: &Partition) -> BigUint {
    p.multiplicities()
        .iter()
        .fold(BigUint::one(), |acc, &(_, k)| acc * factorial(k as u64))
}

/// A subset of `{0, .., 31}` stored as a bitmask; bit `i` is index `i + 1`
/// in the one-based notation used in output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(pub u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn full(len: usize) -> Self {
        IndexSet(if len >= 32 { u32::MAX } else { (1u32 << len) - 1 })
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        IndexSet(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    /// From one-based indices as written in output.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i == 0 || i > 32 {
                return Err(Error::IndexOutOfRange { index: i, len: 32 });
            }
            bits |= 1 << (i - 1);
        }
        Ok(IndexSet(bits))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn minus(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, len: usize) -> IndexSet {
        IndexSet::full(len).minus(self)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(IndexSet(cur))
        })
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", strs.join(","))
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        IndexSet::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

/// Sum of the parts indexed by `k`; the empty set sums to 0.
pub fn subset_sum(p: &Partition, k: IndexSet) -> Result<u64> {
    if let Some(bad) = k.iter().find(|&i| i >= p.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad + 1,
            len: p.len(),
        });
    }
    Ok(k.iter().map(|i| p.part(i) as u64).sum())
}

/// Sum of `values[i]` over `i` in `k`, for sequences that need not be sorted.
pub fn indexed_sum<T>(values: &[T], k: IndexSet) -> T
where
    T: Clone + Zero + for<'a> std::ops::Add<&'a T, Output = T>,
{
    k.iter().fold(T::zero(), |acc, i| acc + &values[i])
}

/// Genus-0 data `(mu; nu)` with the number of simple branch points
/// `r = len(mu) + len(nu) - 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HurwitzPair {
    pub mu: Partition,
    pub nu: Partition,
}

impl HurwitzPair {
    pub fn new(mu: Partition, nu: Partition) -> Result<Self> {
        if mu.degree() != nu.degree() {
            return Err(Error::DegreeMismatch {
                mu: mu.degree(),
                nu: nu.degree(),
            });
        }
        Ok(HurwitzPair { mu, nu })
    }

    pub fn parse(mu: &str, nu: &str) -> Result<Self> {
        HurwitzPair::new(mu.parse()?, nu.parse()?)
    }

    pub fn d(&self) -> u64 {
        self.mu.degree()
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    pub fn r(&self) -> usize {
        self.m() + self.n() - 2
    }

    /// Exchange the roles of 0 and infinity.
    pub fn transposed(&self) -> HurwitzPair {
        HurwitzPair {
            mu: self.nu.clone(),
            nu: self.mu.clone(),
        }
    }

    /// Every pair with `1 <= d <= d_max`, ordered by degree then lexicographically.
    pub fn all_up_to(d_max: u32) -> Vec<HurwitzPair> {
        let mut out = Vec::new();
        for d in 1..=d_max {
            let parts = Partition::all_of(d);
            for mu in &parts {
                for nu in &parts {
                    out.push(HurwitzPair {
                        mu: mu.clone(),
                        nu: nu.clone(),
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for HurwitzPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({});({})", self.mu, self.nu)
    }
}

/// Iterator over the set partitions of a list of indices.
///
/// Blocks come out in order of their smallest element, and each block lists
/// its elements in input order. Uses restricted growth strings.
pub struct SetPartitions {
    items: Vec<usize>,
    anchor: Option<usize>,
    growth: Vec<usize>,
    done: bool,
}

/// Every set partition of `indices` exactly once. With `with_anchor_singleton`
/// the first index is kept in a block of its own.
pub fn set_partitions(indices: &[usize], with_anchor_singleton: bool) -> SetPartitions {
    let (anchor, items) = match (with_anchor_singleton, indices.split_first()) {
        (true, Some((&first, rest))) => (Some(first), rest.to_vec()),
        _ => (None, indices.to_vec()),
    };
    SetPartitions {
        growth: vec![0; items.len()],
        done: items.is_empty() && anchor.is_none(),
        items,
        anchor,
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let blocks_needed = self.growth.iter().max().map_or(0, |&b| b + 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); blocks_needed];
        for (&item, &b) in self.items.iter().zip(&self.growth) {
            blocks[b].push(item);
        }
        if let Some(a) = self.anchor {
            blocks.insert(0, vec![a]);
        }

        // advance: rightmost position that can still grow
        let s = self.growth.len();
        let mut i = s;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let prefix_max = self.growth[..i].iter().copied().max().unwrap_or(0);
            if self.growth[i] <= prefix_max {
                self.growth[i] += 1;
                for g in &mut self.growth[i + 1..] {
                    *g = 0;
                }
                break;
            }
        }
        Some(blocks)
    }
}

/// Bell numbers, for sanity checks.
pub fn bell(s: usize) -> BigUint {
    // Bell triangle
    let mut row = vec![BigUint::one()];
    for _ in 0..s {
        let mut next = vec![row.last().unwrap().clone()];
        for v in &row {
            let last = next.last().unwrap().clone();
            next.push(last + v);
        }
        row = next;
    }
    row[0].clone()
}

/// Shift for `nu` that moves an integer point of degree `d` off every wall
/// while keeping the sum: `(4d)^-(j+1)` on each part but the last, which
/// absorbs the total. Every proper nonempty `J` gets a nonzero shift of size
/// below 1/2.
pub fn wall_shift(n: usize, d: u64) -> Vec<Rational> {
    let base = Rational::new(BigInt::one(), BigInt::from(4 * d.max(1)));
    let mut out: Vec<Rational> = (1..n).map(|k| Pow::pow(&base, k as u64)).collect();
    let total: Rational = out.iter().sum();
    out.push(-total);
    out
}

pub(crate) fn biguint_to_rational(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

pub(crate) fn sign_of(v: &Rational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}
