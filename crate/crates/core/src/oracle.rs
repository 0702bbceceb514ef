//! Ground-truth double Hurwitz numbers from permutation counting.
//!
//! The primary path multiplies class indicators by the transposition class
//! (cut and join on cycle types), then extracts connected counts by
//! inclusion-exclusion anchored at the first part of `mu`. A brute-force DFS
//! over transposition sequences is kept as an independent cross-check.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    aut_size, biguint_to_rational, binomial, factorial, rational_string, HurwitzPair, Partition, Rational,
};

/// Default node budget for [`Oracle::dfs_count`].
pub const DEFAULT_DFS_BUDGET: u128 = 10_000_000;

/// Element counts per conjugacy class of `S_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassVector {
    pub d: u32,
    pub values: BTreeMap<Partition, BigUint>,
}

impl ClassVector {
    /// `count` copies of one class.
    pub fn indicator(class: &Partition, count: BigUint) -> Self {
        let mut values = BTreeMap::new();
        if !count.is_zero() {
            values.insert(class.clone(), count);
        }
        ClassVector {
            d: class.degree() as u32,
            values,
        }
    }

    pub fn get(&self, class: &Partition) -> BigUint {
        self.values.get(class).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.values.values().sum()
    }
}

/// Size of the conjugacy class with the given cycle type.
pub fn class_size(p: &Partition) -> BigUint {
    let z = p.multiplicities().iter().fold(BigUint::one(), |acc, &(v, k)| {
        acc * BigUint::from(v).pow(k as u32) * factorial(k as u64)
    });
    factorial(p.degree()) / z
}

type Parts = Vec<u32>;
type ClassCounts = HashMap<Parts, BigUint>;

/// Calls `f(new_class, ways)` for every cycle type reachable from `parts` by
/// one transposition, with the number of transpositions producing it.
fn for_each_move(parts: &[u32], mut f: impl FnMut(Parts, u64)) {
    let mut mults: Vec<(u32, u64)> = Vec::new();
    for &p in parts {
        match mults.last_mut() {
            Some((v, k)) if *v == p => *k += 1,
            _ => mults.push((p, 1)),
        }
    }
    let rebuild = |remove: &[u32], add: &[u32]| -> Parts {
        let mut out: Parts = parts.to_vec();
        for r in remove {
            let pos = out.iter().position(|x| x == r).unwrap();
            out.remove(pos);
        }
        out.extend_from_slice(add);
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    };
    // cuts
    for &(c, k) in &mults {
        for a in 1..=c / 2 {
            let ways = if 2 * a == c { k * c as u64 / 2 } else { k * c as u64 };
            f(rebuild(&[c], &[a, c - a]), ways);
        }
    }
    // joins
    for (i, &(a, ka)) in mults.iter().enumerate() {
        if ka >= 2 {
            f(rebuild(&[a, a], &[2 * a]), ka * (ka - 1) / 2 * (a as u64) * (a as u64));
        }
        for &(b, kb) in &mults[i + 1..] {
            f(rebuild(&[a, b], &[a + b]), ka * kb * a as u64 * b as u64);
        }
    }
}

/// Multiplies every counted element by every transposition.
pub fn transposition_step(v: &ClassVector) -> ClassVector {
    let mut out: BTreeMap<Partition, BigUint> = BTreeMap::new();
    for (class, count) in &v.values {
        for_each_move(class.parts(), |parts, ways| {
            *out.entry(Partition::from_sorted_unchecked(parts)).or_default() += count * BigUint::from(ways);
        });
    }
    ClassVector { d: v.d, values: out }
}

/// Weighted and labelled versions of one count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationCount {
    pub pair: HurwitzPair,
    pub r_used: usize,
    #[serde(with = "rational_string")]
    pub weighted: Rational,
    #[serde(with = "rational_string")]
    pub labelled: Rational,
}

impl FactorizationCount {
    pub fn new(pair: HurwitzPair, r_used: usize, weighted: Rational) -> Self {
        let labelled = &weighted * biguint_to_rational(&(aut_size(&pair.mu) * aut_size(&pair.nu)));
        FactorizationCount {
            pair,
            r_used,
            weighted,
            labelled,
        }
    }
}

/// Memoizing oracle. Tables sit behind mutexes so one instance can serve a
/// parallel sweep.
pub struct Oracle {
    dfs_budget: u128,
    // (nu, target length m, r) -> class counts after r steps, pruned to
    // classes whose length can still reach m
    evolved: Mutex<HashMap<(Parts, usize, usize), Arc<ClassCounts>>>,
    // labelled connected counts keyed by sorted multisets
    connected: Mutex<HashMap<(Parts, Parts, usize), Rational>>,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::new()
    }
}

impl Oracle {
    /// An oracle whose DFS budget honours `HURWITZ_BUDGET` when set.
    pub fn new() -> Self {
        let budget = std::env::var("HURWITZ_BUDGET")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_DFS_BUDGET);
        Oracle::with_budget(budget)
    }

    pub fn with_budget(dfs_budget: u128) -> Self {
        Oracle {
            dfs_budget,
            evolved: Mutex::new(HashMap::new()),
            connected: Mutex::new(HashMap::new()),
        }
    }

    pub fn dfs_budget(&self) -> u128 {
        self.dfs_budget
    }

    fn evolve(&self, nu: &[u32], m: usize, r: usize) -> Arc<HashMap<Parts, BigUint>> {
        let key = (nu.to_vec(), m, r);
        if let Some(hit) = self.evolved.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let start = Partition::from_sorted_unchecked(nu.to_vec());
        let mut cur: HashMap<Parts, BigUint> = HashMap::new();
        if nu.len().abs_diff(m) <= r {
            cur.insert(nu.to_vec(), class_size(&start));
        }
        for step in 0..r {
            let remaining = r - step - 1;
            let mut next: HashMap<Parts, BigUint> = HashMap::new();
            for (parts, count) in &cur {
                for_each_move(parts, |np, ways| {
                    if np.len().abs_diff(m) <= remaining {
                        *next.entry(np).or_default() += count * BigUint::from(ways);
                    }
                });
            }
            cur = next;
        }
        let out = Arc::new(cur);
        self.evolved.lock().unwrap().insert(key, out.clone());
        out
    }

    fn disconnected_parts(&self, mu: &[u32], nu: &[u32], r: usize) -> Rational {
        if mu.is_empty() || nu.is_empty() {
            return if mu.is_empty() && nu.is_empty() && r == 0 {
                Rational::one()
            } else {
                Rational::zero()
            };
        }
        let d: u64 = mu.iter().map(|&p| p as u64).sum();
        let counts = self.evolve(nu, mu.len(), r);
        match counts.get(mu) {
            Some(c) => biguint_to_rational(c) / biguint_to_rational(&factorial(d)),
            None => Rational::zero(),
        }
    }

    /// Possibly disconnected count `H•(mu, nu, r)`: tuples
    /// `(sigma_0, tau_1..tau_r)` with the right cycle types, over `d!`.
    pub fn disconnected_count(&self, mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
        check_degrees(mu, nu)?;
        Ok(self.disconnected_parts(mu.parts(), nu.parts(), r))
    }

    fn disconnected_labelled(&self, a: &[u32], b: &[u32], r: usize) -> Rational {
        let h = self.disconnected_parts(a, b, r);
        if h.is_zero() {
            return h;
        }
        h * biguint_to_rational(&(multiset_aut(a) * multiset_aut(b)))
    }

    /// Labelled connected count, by inclusion-exclusion over the component
    /// containing the first part of `a`.
    fn connected_labelled(&self, a: &[u32], b: &[u32], r: usize) -> Rational {
        let (k, l) = (a.len(), b.len());
        if r + 2 < k + l || (r + k + l) % 2 == 1 {
            return Rational::zero();
        }
        let key = (a.to_vec(), b.to_vec(), r);
        if let Some(hit) = self.connected.lock().unwrap().get(&key) {
            return hit.clone();
        }

        let mut total = self.disconnected_labelled(a, b, r);
        let anchor = a[0];
        for (rest1, rest2, w_a) in sub_multisets(&a[1..]) {
            if rest2.is_empty() {
                continue;
            }
            let mut a1 = vec![anchor];
            a1.extend_from_slice(&rest1);
            let sum_a1: u64 = a1.iter().map(|&p| p as u64).sum();
            for (b1, b2, w_b) in sub_multisets(b) {
                if b1.iter().map(|&p| p as u64).sum::<u64>() != sum_a1 {
                    continue;
                }
                let weight = biguint_to_rational(&(&w_a * &w_b));
                let min_r1 = a1.len() + b1.len() - 2;
                let mut r1 = min_r1;
                while r1 <= r {
                    let rest = self.disconnected_labelled(&rest2, &b2, r - r1);
                    if !rest.is_zero() {
                        let conn = self.connected_labelled(&a1, &b1, r1);
                        if !conn.is_zero() {
                            total -= biguint_to_rational(&binomial(r as u64, r1 as u64)) * &weight * conn * rest;
                        }
                    }
                    r1 += 2;
                }
            }
        }

        self.connected.lock().unwrap().insert(key, total.clone());
        total
    }

    /// Connected (transitive) count in the unlabelled convention.
    pub fn connected_count(&self, mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
        check_degrees(mu, nu)?;
        let lab = self.connected_labelled(mu.parts(), nu.parts(), r);
        Ok(lab / biguint_to_rational(&(aut_size(mu) * aut_size(nu))))
    }

    /// The labelled genus-0 double Hurwitz number.
    pub fn double_hurwitz(&self, pair: &HurwitzPair) -> Rational {
        self.connected_labelled(pair.mu.parts(), pair.nu.parts(), pair.r())
    }

    pub fn factorization_count(&self, pair: &HurwitzPair) -> FactorizationCount {
        let weighted = self
            .connected_count(&pair.mu, &pair.nu, pair.r())
            .expect("pair degrees agree");
        FactorizationCount::new(pair.clone(), pair.r(), weighted)
    }

    /// Brute-force connected count: fixes one `sigma_0` of type `nu` and walks
    /// every transposition sequence. The budget caps visited search nodes.
    pub fn dfs_count(&self, mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
        check_degrees(mu, nu)?;
        let d = nu.degree() as usize;
        if d > 32 {
            return Err(Error::InvalidArgument("degree too large for DFS".into()));
        }
        let mut perm: Vec<u8> = vec![0; d];
        let mut start = 0usize;
        for &c in nu.parts() {
            let c = c as usize;
            for i in 0..c {
                perm[start + i] = (start + (i + 1) % c) as u8;
            }
            start += c;
        }
        let mut transpositions = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                transpositions.push((i as u8, j as u8));
            }
        }
        let mut labels: Labels = [0; 32];
        let mut start = 0usize;
        for (k, &c) in nu.parts().iter().enumerate() {
            for l in &mut labels[start..start + c as usize] {
                *l = k as u8;
            }
            start += c as usize;
        }
        let mut search = Dfs {
            target: mu.parts().to_vec(),
            transpositions,
            nodes: 0,
            budget: self.dfs_budget,
            hits: 0,
        };
        let (cycles, m) = (nu.len(), mu.len());
        if cycles.abs_diff(m) <= r && nu.len() - 1 <= r {
            search.walk(&mut perm, &labels, nu.len(), cycles, r)?;
        }
        let weighted = biguint_to_rational(&(class_size(nu) * BigUint::from(search.hits)))
            / biguint_to_rational(&factorial(d as u64));
        Ok(weighted)
    }
}

struct Dfs {
    target: Vec<u32>,
    transpositions: Vec<(u8, u8)>,
    nodes: u128,
    budget: u128,
    hits: u64,
}

/// Orbit labels of the group generated so far, for at most 32 points.
type Labels = [u8; 32];

impl Dfs {
    /// Children that cannot reach `m` cycles or a single orbit in the
    /// remaining steps are never visited and do not count against the budget.
    fn walk(&mut self, perm: &mut [u8], labels: &Labels, orbits: usize, cycles: usize, remaining: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                what: "dfs nodes",
                needed: self.nodes,
                budget: self.budget,
            });
        }
        if remaining == 0 {
            if cycle_type(perm) == self.target {
                self.hits += 1;
            }
            return Ok(());
        }
        let m = self.target.len();
        for t in 0..self.transpositions.len() {
            let (i, j) = self.transpositions[t];
            let next_cycles = if same_cycle(perm, i, j) { cycles + 1 } else { cycles - 1 };
            let (li, lj) = (labels[i as usize], labels[j as usize]);
            let next_orbits = if li == lj { orbits } else { orbits - 1 };
            if next_cycles.abs_diff(m) > remaining - 1 || next_orbits - 1 > remaining - 1 {
                continue;
            }
            let mut next_labels = *labels;
            if li != lj {
                for l in next_labels.iter_mut().take(perm.len()) {
                    if *l == lj {
                        *l = li;
                    }
                }
            }
            perm.swap(i as usize, j as usize);
            let res = self.walk(perm, &next_labels, next_orbits, next_cycles, remaining - 1);
            perm.swap(i as usize, j as usize);
            res?;
        }
        Ok(())
    }
}

fn same_cycle(perm: &[u8], i: u8, j: u8) -> bool {
    let mut cur = perm[i as usize];
    while cur != i {
        if cur == j {
            return true;
        }
        cur = perm[cur as usize];
    }
    false
}

fn cycle_type(perm: &[u8]) -> Vec<u32> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut cur = s;
        while !seen[cur] {
            seen[cur] = true;
            cur = perm[cur] as usize;
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn check_degrees(mu: &Partition, nu: &Partition) -> Result<()> {
    if mu.degree() != nu.degree() {
        return Err(Error::DegreeMismatch {
            mu: mu.degree(),
            nu: nu.degree(),
        });
    }
    Ok(())
}

fn multiset_aut(parts: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    let mut run = 0u64;
    for (i, &p) in parts.iter().enumerate() {
        run = if i > 0 && parts[i - 1] == p { run + 1 } else { 1 };
        acc *= BigUint::from(run);
    }
    acc
}

/// Every sub-multiset of a sorted multiset, with its complement and the
/// number of index subsets realizing it.
fn sub_multisets(parts: &[u32]) -> Vec<(Parts, Parts, BigUint)> {
    let mut mults: Vec<(u32, usize)> = Vec::new();
    for &p in parts {
        match mults.last_mut() {
            Some((v, k)) if *v == p => *k += 1,
            _ => mults.push((p, 1)),
        }
    }
    let mut out = vec![(Vec::new(), Vec::new(), BigUint::one())];
    for &(v, k) in &mults {
        let mut next = Vec::with_capacity(out.len() * (k + 1));
        for (inside, outside, w) in &out {
            for take in 0..=k {
                let mut i2 = inside.clone();
                i2.extend(std::iter::repeat_n(v, take));
                let mut o2 = outside.clone();
                o2.extend(std::iter::repeat_n(v, k - take));
                next.push((i2, o2, w * binomial(k as u64, take as u64)));
            }
        }
        out = next;
    }
    out
}

fn shared() -> &'static Oracle {
    static ORACLE: OnceLock<Oracle> = OnceLock::new();
    ORACLE.get_or_init(Oracle::new)
}

/// [`Oracle::disconnected_count`] on a process-wide oracle.
pub fn disconnected_count(mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
    shared().disconnected_count(mu, nu, r)
}

/// [`Oracle::connected_count`] on a process-wide oracle.
pub fn connected_count(mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
    shared().connected_count(mu, nu, r)
}

/// [`Oracle::double_hurwitz`] on a process-wide oracle.
pub fn double_hurwitz(pair: &HurwitzPair) -> Rational {
    shared().double_hurwitz(pair)
}

/// [`Oracle::dfs_count`] on a process-wide oracle.
pub fn dfs_count(mu: &Partition, nu: &Partition, r: usize) -> Result<Rational> {
    shared().dfs_count(mu, nu, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{rat, rat_frac};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn single(class: &str) -> ClassVector {
        ClassVector::indicator(&p(class), BigUint::one())
    }

    #[test]
    fn step_examples() {
        assert_eq!(transposition_step(&single("1,1")), single("2"));
        assert_eq!(transposition_step(&single("2")), single("1,1"));
        let out = transposition_step(&single("1,1,1"));
        assert_eq!(out, ClassVector::indicator(&p("2,1"), BigUint::from(3u32)));
    }

    #[test]
    fn class_sizes() {
        assert_eq!(class_size(&p("2,1,1")), BigUint::from(6u32));
        assert_eq!(class_size(&p("3,1")), BigUint::from(8u32));
        assert_eq!(class_size(&p("2,2")), BigUint::from(3u32));
        let total: BigUint = Partition::all_of(6).iter().map(class_size).sum();
        assert_eq!(total, factorial(6));
    }

    #[test]
    fn disconnected_examples() {
        let o = Oracle::new();
        assert_eq!(o.disconnected_count(&p("1"), &p("1"), 0).unwrap(), rat(1));
        assert_eq!(o.disconnected_count(&p("2"), &p("2"), 0).unwrap(), rat_frac(1, 2));
        assert_eq!(o.disconnected_count(&p("3,1"), &p("2,1,1"), 3).unwrap(), rat(36));
        assert!(matches!(
            o.disconnected_count(&p("3"), &p("2"), 1),
            Err(Error::DegreeMismatch { mu: 3, nu: 2 })
        ));
    }

    #[test]
    fn connected_examples() {
        let o = Oracle::new();
        assert_eq!(o.connected_count(&p("3,1"), &p("2,1,1"), 3).unwrap(), rat(27));
        assert_eq!(o.connected_count(&p("2,1"), &p("2,1"), 2).unwrap(), rat(4));
        assert_eq!(o.connected_count(&p("1,1"), &p("1,1"), 0).unwrap(), rat(0));
    }

    #[test]
    fn double_hurwitz_examples() {
        let o = Oracle::new();
        let h = |a: &str, b: &str| o.double_hurwitz(&HurwitzPair::parse(a, b).unwrap());
        assert_eq!(h("3,1", "3,1"), rat(6));
        assert_eq!(h("3,1", "2,1,1"), rat(54));
        assert_eq!(h("2", "2"), rat_frac(1, 2));
        assert_eq!(h("2,2", "3,1"), rat(6));
        assert_eq!(h("2,1", "2,1"), rat(4));
    }

    #[test]
    fn dfs_examples() {
        let o = Oracle::new();
        assert_eq!(o.dfs_count(&p("2,1"), &p("2,1"), 2).unwrap(), rat(4));
        assert_eq!(o.dfs_count(&p("2"), &p("1,1"), 1).unwrap(), rat_frac(1, 2));
        assert_eq!(o.dfs_count(&p("1"), &p("1"), 0).unwrap(), rat(1));
        assert_eq!(o.dfs_count(&p("3,1"), &p("2,1,1"), 3).unwrap(), rat(27));
        let tiny = Oracle::with_budget(10);
        assert!(matches!(
            tiny.dfs_count(&p("3,1"), &p("2,1,1"), 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn factorization_count_labels() {
        let o = Oracle::new();
        let fc = o.factorization_count(&HurwitzPair::parse("3,1", "2,1,1").unwrap());
        assert_eq!(fc.weighted, rat(27));
        assert_eq!(fc.labelled, rat(54));
        assert_eq!(fc.r_used, 3);
    }

    #[test]
    fn sub_multiset_weights() {
        let subs = sub_multisets(&[2, 1, 1]);
        assert_eq!(subs.len(), 6);
        let total: BigUint = subs.iter().map(|s| s.2.clone()).sum();
        assert_eq!(total, BigUint::from(8u32));
        assert_eq!(multiset_aut(&[3, 1, 1, 1]), BigUint::from(6u32));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pair(max_d: u32) -> impl Strategy<Value = HurwitzPair> {
            (1..=max_d).prop_flat_map(|d| {
                let parts = Partition::all_of(d);
                let n = parts.len();
                (0..n, 0..n).prop_map(move |(i, j)| HurwitzPair::new(parts[i].clone(), parts[j].clone()).unwrap())
            })
        }

        proptest! {
            #[test]
            fn step_conserves_total(class in (1u32..8).prop_flat_map(|d| {
                let parts = Partition::all_of(d);
                (0..parts.len()).prop_map(move |i| parts[i].clone())
            })) {
                let v = ClassVector::indicator(&class, class_size(&class));
                let d = class.degree();
                let out = transposition_step(&v);
                prop_assert_eq!(out.total(), v.total() * BigUint::from(d * (d - 1) / 2));
            }

            #[test]
            fn parity_vanishing(pr in pair(6), r in 0usize..6) {
                let o = Oracle::new();
                let h = o.disconnected_count(&pr.mu, &pr.nu, r).unwrap();
                let parity = pr.nu.sign() as i32 * if r % 2 == 0 { 1 } else { -1 };
                if parity != pr.mu.sign() as i32 {
                    prop_assert!(h.is_zero());
                }
            }

            #[test]
            fn symmetric_and_bounded(pr in pair(6)) {
                let o = Oracle::new();
                prop_assert_eq!(o.double_hurwitz(&pr), o.double_hurwitz(&pr.transposed()));
                let c = o.connected_count(&pr.mu, &pr.nu, pr.r()).unwrap();
                let dc = o.disconnected_count(&pr.mu, &pr.nu, pr.r()).unwrap();
                prop_assert!(c <= dc);
                if pr.d() == 1 {
                    prop_assert_eq!(c, dc);
                }
            }

            #[test]
            fn dfs_agrees(pr in pair(4)) {
                let o = Oracle::new();
                prop_assert_eq!(
                    o.dfs_count(&pr.mu, &pr.nu, pr.r()).unwrap(),
                    o.connected_count(&pr.mu, &pr.nu, pr.r()).unwrap()
                );
            }
        }
    }
}
