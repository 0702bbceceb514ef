//! The resonance arrangement inside the parameter cone.
//!
//! Resonances are the hyperplanes `x_I = y_J` with `I` a nonempty subset of
//! `{2..m}` and `J` a nonempty proper subset of `{1..n}`. A chamber is named
//! by its vector of signs of `x_I - y_J`, always listed in the order of
//! [`list_resonances`].

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{indexed_sum, rat, rational_vec, sign_of, HurwitzPair, IndexSet, Rational};
use crate::poly::MultiPoly;

/// Default bound on `m + n` for chamber enumeration.
pub const DEFAULT_ENUMERATION_BOUND: usize = 8;
/// Default number of dithering attempts in [`wall_path`].
pub const DEFAULT_DITHER_RETRIES: usize = 40;

/// The wall `x_I = y_J`. Bit `k` of a mask is the one-based index `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Resonance {
    pub i: IndexSet,
    pub j: IndexSet,
}

impl Resonance {
    pub fn new(m: usize, n: usize, i: IndexSet, j: IndexSet) -> Result<Self> {
        if i.is_empty() || i.contains(0) || !i.is_subset_of(IndexSet::full(m)) {
            return Err(Error::InvalidArgument(format!(
                "I = {i} must be a nonempty subset of [2,{m}]"
            )));
        }
        if j.is_empty() || j == IndexSet::full(n) || !j.is_subset_of(IndexSet::full(n)) {
            return Err(Error::InvalidArgument(format!(
                "J = {j} must be a nonempty proper subset of [1,{n}]"
            )));
        }
        Ok(Resonance { i, j })
    }

    /// Position in [`list_resonances`] order.
    pub fn position(&self, n: usize) -> usize {
        let i_rank = (self.i.0 >> 1) as usize - 1;
        let j_rank = self.j.0 as usize - 1;
        i_rank * ((1usize << n) - 2) + j_rank
    }

    /// `x_I - y_J` at a point.
    pub fn value(&self, p: &ConePoint) -> Rational {
        indexed_sum(&p.x, self.i) - indexed_sum(&p.y, self.j)
    }

    /// `x_I - y_J` as a polynomial in `(m, n)` variables.
    pub fn linear_form(&self, m: usize, n: usize) -> MultiPoly {
        let mut coeffs = vec![Rational::zero(); m + n];
        for k in self.i.iter() {
            coeffs[k] = Rational::one();
        }
        for k in self.j.iter() {
            coeffs[m + k] = -Rational::one();
        }
        MultiPoly::linear(m, n, &coeffs)
    }
}

impl fmt::Display for Resonance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl Serialize for Resonance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            #[serde(rename = "I")]
            i: Vec<usize>,
            #[serde(rename = "J")]
            j: Vec<usize>,
        }
        Raw {
            i: self.i.one_based(),
            j: self.j.one_based(),
        }
        .serialize(s)
    }
}

/// Every canonical resonance for `(m, n)`, `I` ascending then `J` ascending
/// (as bitmasks).
pub fn list_resonances(m: usize, n: usize) -> Vec<Resonance> {
    let mut out = Vec::new();
    if m < 2 || n < 2 {
        return out;
    }
    let full_j = IndexSet::full(n).0;
    for i_rank in 1..(1u32 << (m - 1)) {
        for j in 1..full_j {
            out.push(Resonance {
                i: IndexSet(i_rank << 1),
                j: IndexSet(j),
            });
        }
    }
    out
}

/// `2 (2^{m-1} - 1)(2^{n-1} - 1)`, zero when either side has one part.
pub fn resonance_count(m: usize, n: usize) -> usize {
    if m < 2 || n < 2 {
        return 0;
    }
    2 * ((1 << (m - 1)) - 1) * ((1 << (n - 1)) - 1)
}

/// A point of the parameter cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConePoint {
    #[serde(with = "rational_vec")]
    pub x: Vec<Rational>,
    #[serde(with = "rational_vec")]
    pub y: Vec<Rational>,
}

impl ConePoint {
    /// Checks positivity, ordering and `sum x = sum y`.
    pub fn new(x: Vec<Rational>, y: Vec<Rational>) -> Result<Self> {
        let p = ConePoint { x, y };
        p.validate()?;
        Ok(p)
    }

    pub fn from_ints(x: &[i64], y: &[i64]) -> Result<Self> {
        ConePoint::new(x.iter().map(|&v| rat(v)).collect(), y.iter().map(|&v| rat(v)).collect())
    }

    pub fn from_pair(pair: &HurwitzPair) -> Self {
        ConePoint {
            x: pair.mu.parts().iter().map(|&v| rat(v as i64)).collect(),
            y: pair.nu.parts().iter().map(|&v| rat(v as i64)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.y.is_empty() {
            return Err(Error::NotInCone("both sides need coordinates".into()));
        }
        for side in [&self.x, &self.y] {
            if side.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::NotInCone("coordinates must be nonincreasing".into()));
            }
            if !side.last().unwrap().is_positive() {
                return Err(Error::NotInCone("coordinates must be positive".into()));
            }
        }
        if self.x.iter().sum::<Rational>() != self.y.iter().sum::<Rational>() {
            return Err(Error::NotInCone("sum x differs from sum y".into()));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn total(&self) -> Rational {
        self.x.iter().sum()
    }

    /// `x` followed by `y`, the variable order of chamber polynomials.
    pub fn coords(&self) -> Vec<Rational> {
        self.x.iter().chain(&self.y).cloned().collect()
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &ConePoint, t: &Rational) -> ConePoint {
        let mix = |a: &[Rational], b: &[Rational]| -> Vec<Rational> {
            a.iter().zip(b).map(|(u, v)| u + t * (v - u)).collect()
        };
        ConePoint {
            x: mix(&self.x, &other.x),
            y: mix(&self.y, &other.y),
        }
    }

    /// Smallest positive multiple with integer coordinates.
    pub fn primitive_integral(&self) -> ConePoint {
        let all: Vec<&Rational> = self.x.iter().chain(&self.y).collect();
        let lcm = all.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints: Vec<BigInt> = all.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let scaled: Vec<Rational> = ints.into_iter().map(|v| Rational::from_integer(v / &g)).collect();
        ConePoint {
            x: scaled[..self.m()].to_vec(),
            y: scaled[self.m()..].to_vec(),
        }
    }

    /// The Hurwitz pair at an integral point.
    pub fn to_pair(&self) -> Option<HurwitzPair> {
        let conv = |v: &[Rational]| -> Option<Vec<u32>> {
            v.iter()
                .map(|c| {
                    if c.is_integer() {
                        u32::try_from(c.to_integer()).ok()
                    } else {
                        None
                    }
                })
                .collect()
        };
        let mu = crate::kernel::Partition::new(conv(&self.x)?).ok()?;
        let nu = crate::kernel::Partition::new(conv(&self.y)?).ok()?;
        HurwitzPair::new(mu, nu).ok()
    }
}

impl fmt::Display for ConePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Rational]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({};{})", join(&self.x), join(&self.y))
    }
}

/// Signs of every canonical `x_I - y_J`, aligned with [`list_resonances`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChamberSignature {
    m: usize,
    n: usize,
    signs: Vec<i8>,
}

impl ChamberSignature {
    pub fn new(m: usize, n: usize, signs: Vec<i8>) -> Result<Self> {
        let expected = resonance_count(m, n);
        if signs.len() != expected {
            return Err(Error::MalformedSignature(format!(
                "expected {expected} signs for ({m}, {n}), got {}",
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::MalformedSignature("signs must be +1 or -1".into()));
        }
        Ok(ChamberSignature { m, n, signs })
    }

    /// Parses a `+`/`-` string.
    pub fn parse(m: usize, n: usize, s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '\u{2212}' => Ok(-1),
                other => Err(Error::MalformedSignature(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        ChamberSignature::new(m, n, signs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign(&self, r: &Resonance) -> i8 {
        self.signs[r.position(self.n)]
    }

    pub fn is_totally_negative(&self) -> bool {
        self.signs.iter().all(|&s| s < 0)
    }

    pub fn flipped(&self, index: usize) -> ChamberSignature {
        let mut out = self.clone();
        out.signs[index] = -out.signs[index];
        out
    }

    pub fn hamming(&self, other: &ChamberSignature) -> usize {
        self.signs.iter().zip(&other.signs).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for ChamberSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for ChamberSignature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// All-negative signature.
pub fn tn_signature(m: usize, n: usize) -> ChamberSignature {
    ChamberSignature {
        m,
        n,
        signs: vec![-1; resonance_count(m, n)],
    }
}

/// Integral point of the totally negative chamber: `x = (mn - m + 1, 1, .., 1)`,
/// `y = (m, .., m)`, so every `x_I` with `1 ∉ I` stays below every `y_J`.
pub fn tn_witness(m: usize, n: usize) -> ConePoint {
    let mut x = vec![rat(1); m];
    x[0] = rat((m * n - m + 1) as i64);
    ConePoint {
        x,
        y: vec![rat(m as i64); n],
    }
}

pub fn signature_of(p: &ConePoint) -> Result<ChamberSignature> {
    p.validate()?;
    let (m, n) = (p.m(), p.n());
    let mut signs = Vec::with_capacity(resonance_count(m, n));
    for r in list_resonances(m, n) {
        match sign_of(&r.value(p)) {
            0 => return Err(Error::OnWall(r)),
            s => signs.push(s),
        }
    }
    Ok(ChamberSignature { m, n, signs })
}

/// The first resonance the point lies on, if any.
pub fn wall_containing(p: &ConePoint) -> Option<Resonance> {
    list_resonances(p.m(), p.n()).into_iter().find(|r| r.value(p).is_zero())
}

/// Constraints `a . v + c >= 0` on the slice `sum x = sum y = 1`, over the
/// reduced variables `(x_2..x_m, y_1..y_{n-1}, s)`: cone ordering, `x_m, y_n
/// >= s`, `sign * (x_I - y_J) >= s` and `s <= 1`.
fn chamber_constraints(sig: &ChamberSignature) -> (usize, Vec<(Vec<Rational>, Rational)>) {
    let (m, n) = (sig.m, sig.n);
    let k = (m - 1) + (n - 1) + 1;
    let s_var = k - 1;
    let reduce = |full: &[Rational], s_coef: Rational| -> (Vec<Rational>, Rational) {
        let mut a = vec![Rational::zero(); k];
        // x_1 = 1 - sum_{i>=2} x_i and y_n = 1 - sum_{j<n} y_j
        let c = &full[0] + &full[m + n - 1];
        for i in 1..m {
            a[i - 1] = &full[i] - &full[0];
        }
        for j in 0..n - 1 {
            a[m - 1 + j] = &full[m + j] - &full[m + n - 1];
        }
        a[s_var] = s_coef;
        (a, c)
    };
    let form = |plus: &[usize], minus: &[usize]| {
        let mut v = vec![Rational::zero(); m + n];
        for &p in plus {
            v[p] += rat(1);
        }
        for &q in minus {
            v[q] -= rat(1);
        }
        v
    };

    let mut rows = Vec::new();
    for i in 0..m - 1 {
        rows.push(reduce(&form(&[i], &[i + 1]), Rational::zero()));
    }
    for j in 0..n - 1 {
        rows.push(reduce(&form(&[m + j], &[m + j + 1]), Rational::zero()));
    }
    rows.push(reduce(&form(&[m - 1], &[]), rat(-1)));
    rows.push(reduce(&form(&[m + n - 1], &[]), rat(-1)));
    for (r, &sgn) in list_resonances(m, n).iter().zip(&sig.signs) {
        let plus: Vec<usize> = r.i.iter().collect();
        let minus: Vec<usize> = r.j.iter().map(|j| m + j).collect();
        let f = if sgn > 0 {
            form(&plus, &minus)
        } else {
            form(&minus, &plus)
        };
        rows.push(reduce(&f, rat(-1)));
    }
    let mut bound = vec![Rational::zero(); k];
    bound[s_var] = rat(-1);
    rows.push((bound, rat(1)));
    (k, rows)
}

/// Dense tableau for `min f.u` subject to `A u = b`, `u >= 0`, with the
/// reduced-cost row kept alongside.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    reduced: Vec<Rational>,
    basis: Vec<usize>,
    rhs: usize,
}

impl Tableau {
    fn set_cost(&mut self, cost: &[Rational]) {
        let mut reduced: Vec<Rational> = cost.to_vec();
        reduced.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if cost[b].is_zero() {
                continue;
            }
            for (r, v) in reduced.iter_mut().zip(row) {
                if !v.is_zero() {
                    *r -= &cost[b] * v;
                }
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in &mut self.rows[row] {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[row]);
        let eliminate = |r: &mut Vec<Rational>| {
            if r[col].is_zero() {
                return;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        };
        for r in self.rows.iter_mut() {
            if !r.is_empty() {
                eliminate(r);
            }
        }
        eliminate(&mut self.reduced);
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// Most negative reduced cost first, switching to Bland's rule if the
    /// walk runs long; `false` when unbounded.
    fn optimize(&mut self, enterable: usize) -> bool {
        for iteration in 0.. {
            let bland = iteration > 64;
            let mut entering: Option<usize> = None;
            for j in 0..enterable {
                if !self.reduced[j].is_negative() {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if entering.is_none_or(|e| self.reduced[j] < self.reduced[e]) {
                    entering = Some(j);
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(Rational, usize)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if r[col].is_positive() {
                    let ratio = &r[self.rhs] / &r[col];
                    let better = match &best {
                        None => true,
                        Some((q, bi)) => ratio < *q || (ratio == *q && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                Some((_, row)) => self.pivot(row, col),
                None => return false,
            }
        }
        unreachable!()
    }
}

/// Maximizes `s` over `a . v + c >= 0` through the dual problem
/// `min c.u` s.t. `-A^T u = e_s`, `u >= 0`, reading the primal optimum off
/// the simplex multipliers. `None` when the optimum is not positive.
fn max_slack(k: usize, constraints: &[(Vec<Rational>, Rational)]) -> Option<Vec<Rational>> {
    let r = constraints.len();
    let width = r + k + 1;
    let mut rows = vec![vec![Rational::zero(); width]; k];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, (a, _)) in constraints.iter().enumerate() {
            row[j] = -a[i].clone();
        }
        row[r + i] = Rational::one();
    }
    rows[k - 1][r + k] = Rational::one();
    let mut t = Tableau {
        rows,
        reduced: Vec::new(),
        basis: (r..r + k).collect(),
        rhs: r + k,
    };

    // phase 1: artificial columns r..r+k
    let mut cost = vec![Rational::zero(); r + k];
    for c in &mut cost[r..] {
        *c = Rational::one();
    }
    t.set_cost(&cost);
    t.optimize(r + k);
    if !t.reduced[t.rhs].is_zero() {
        return None;
    }
    for i in 0..k {
        if t.basis[i] >= r {
            let col = (0..r).find(|&j| !t.rows[i][j].is_zero())?;
            t.pivot(i, col);
        }
    }

    // phase 2
    let mut cost: Vec<Rational> = constraints.iter().map(|(_, c)| c.clone()).collect();
    cost.extend(std::iter::repeat_n(Rational::zero(), k));
    t.set_cost(&cost);
    if !t.optimize(r) {
        return None;
    }
    // simplex multipliers c_B B^{-1} = -(reduced cost of the identity columns)
    let v: Vec<Rational> = (0..k).map(|i| -t.reduced[r + i].clone()).collect();
    if !v[k - 1].is_positive() {
        return None;
    }
    debug_assert!(constraints.iter().all(|(a, c)| {
        let lhs: Rational = a.iter().zip(&v).map(|(x, y)| x * y).sum::<Rational>() + c;
        !lhs.is_negative()
    }));
    Some(v)
}

/// Exact interior point of a chamber, or `None` when the signs are
/// inconsistent. Solves a small linear program that maximizes a slack `s`
/// bounding every strict inequality from below; the optimal vertex is
/// itself interior when `s > 0`.
pub fn feasible_point(sig: &ChamberSignature) -> Option<ConePoint> {
    let (m, n) = (sig.m, sig.n);
    if m < 2 || n < 2 {
        return Some(tn_witness(m, n));
    }
    let (k, constraints) = chamber_constraints(sig);
    let v = max_slack(k, &constraints)?;
    let mut x = vec![Rational::zero(); m];
    let mut y = vec![Rational::zero(); n];
    x[1..m].clone_from_slice(&v[..m - 1]);
    x[0] = rat(1) - x[1..].iter().sum::<Rational>();
    y[..n - 1].clone_from_slice(&v[m - 1..m + n - 2]);
    y[n - 1] = rat(1) - y[..n - 1].iter().sum::<Rational>();
    let point = ConePoint { x, y }.primitive_integral();
    debug_assert_eq!(signature_of(&point).as_ref(), Ok(sig));
    Some(point)
}

/// A chamber with an interior witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chamber {
    pub signature: ChamberSignature,
    pub witness: ConePoint,
}

impl Serialize for Chamber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            m: usize,
            n: usize,
            resonances: Vec<Resonance>,
            signature: &'a ChamberSignature,
            witness: &'a ConePoint,
        }
        Raw {
            m: self.signature.m,
            n: self.signature.n,
            resonances: list_resonances(self.signature.m, self.signature.n),
            signature: &self.signature,
            witness: &self.witness,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Chamber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: usize,
            n: usize,
            signature: String,
            witness: ConePoint,
        }
        let raw = Raw::deserialize(d)?;
        let signature = ChamberSignature::parse(raw.m, raw.n, &raw.signature).map_err(serde::de::Error::custom)?;
        Ok(Chamber {
            signature,
            witness: raw.witness,
        })
    }
}

/// `x_small <= x_big` for every nonincreasing positive `x`: match the k-th
/// smallest index of `small` with a no larger index of `big`.
fn sum_dominated(small: IndexSet, big: IndexSet) -> bool {
    small.len() <= big.len() && small.iter().zip(big.iter()).all(|(s, b)| b <= s)
}

/// For each resonance, the resonances whose form is pointwise at least
/// (`above`) or at most (`below`) its own on the whole cone.
fn dominance(m: usize, n: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let all = list_resonances(m, n);
    let mut above = vec![Vec::new(); all.len()];
    let mut below = vec![Vec::new(); all.len()];
    for (a, ra) in all.iter().enumerate() {
        for (b, rb) in all.iter().enumerate() {
            if a != b && sum_dominated(ra.i, rb.i) && sum_dominated(rb.j, ra.j) {
                above[a].push(b);
                below[b].push(a);
            }
        }
    }
    (above, below)
}

/// Breadth-first walk over chambers by single sign flips from the totally
/// negative one, checking each candidate exactly. Results are in BFS order
/// and deterministic.
pub fn enumerate_chambers(m: usize, n: usize) -> Result<Vec<Chamber>> {
    enumerate_chambers_bounded(m, n, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_chambers_bounded(m: usize, n: usize, bound: usize) -> Result<Vec<Chamber>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    if m + n > bound {
        return Err(Error::BudgetExceeded {
            what: "m + n for chamber enumeration",
            needed: (m + n) as u128,
            budget: bound as u128,
        });
    }
    let (above, below) = dominance(m, n);
    let start = tn_signature(m, n);
    let mut seen: HashSet<ChamberSignature> = HashSet::new();
    seen.insert(start.clone());
    let mut out = vec![Chamber {
        signature: start.clone(),
        witness: tn_witness(m, n),
    }];
    let mut frontier: VecDeque<ChamberSignature> = VecDeque::from([start]);
    while !frontier.is_empty() {
        let mut candidates: BTreeSet<ChamberSignature> = BTreeSet::new();
        for sig in frontier.drain(..) {
            for idx in 0..sig.len() {
                // a flip that breaks a forced inequality is never a chamber
                let forced = if sig.signs[idx] < 0 { &above[idx] } else { &below[idx] };
                if forced.iter().any(|&o| sig.signs[o] == sig.signs[idx]) {
                    continue;
                }
                let flipped = sig.flipped(idx);
                if !seen.contains(&flipped) {
                    candidates.insert(flipped);
                }
            }
        }
        let candidates: Vec<ChamberSignature> = candidates.into_iter().collect();
        let witnesses: Vec<Option<ConePoint>> = candidates.par_iter().map(feasible_point).collect();
        for (sig, w) in candidates.into_iter().zip(witnesses) {
            seen.insert(sig.clone());
            if let Some(witness) = w {
                frontier.push_back(sig.clone());
                out.push(Chamber {
                    signature: sig,
                    witness,
                });
            }
        }
    }
    Ok(out)
}

/// One wall crossed by a segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallCrossing {
    pub resonance: Resonance,
    #[serde(with = "crate::kernel::rational_string")]
    pub t_cross: Rational,
    pub from_sign: i8,
    pub to_sign: i8,
    pub point_before: ConePoint,
    pub point_after: ConePoint,
}

/// Walls crossed by the segment `from -> to`, by increasing parameter.
pub fn wall_path(from: &ConePoint, to: &ConePoint) -> Result<Vec<WallCrossing>> {
    wall_path_with_retries(from, to, DEFAULT_DITHER_RETRIES)
}

pub fn wall_path_with_retries(from: &ConePoint, to: &ConePoint, retries: usize) -> Result<Vec<WallCrossing>> {
    if from.m() != to.m() || from.n() != to.n() {
        return Err(Error::VarSpecMismatch(from.m(), from.n(), to.m(), to.n()));
    }
    let start_sig = signature_of(from)?;
    signature_of(to)?;
    if let Some(path) = crossings(from, to) {
        return Ok(path);
    }
    let direction = dither_direction(from.m(), from.n());
    let base = rat(2) * from.total().ceil().max(rat(1));
    let mut delta = Rational::one();
    for _ in 0..retries {
        delta /= &base;
        let cand = ConePoint {
            x: from.x.iter().zip(&direction.x).map(|(a, b)| a + &delta * b).collect(),
            y: from.y.iter().zip(&direction.y).map(|(a, b)| a + &delta * b).collect(),
        };
        if cand.validate().is_err() || signature_of(&cand).ok().as_ref() != Some(&start_sig) {
            continue;
        }
        if let Some(path) = crossings(&cand, to) {
            return Ok(path);
        }
    }
    Err(Error::DitherFailed(retries))
}

/// A fixed zero-sum direction, strictly decreasing on each side, with
/// generic coordinates.
fn dither_direction(m: usize, n: usize) -> ConePoint {
    let total = m + n;
    let weight = |k: usize| rat(5).pow((total - k) as i32) + rat(k as i64 * k as i64);
    let x: Vec<Rational> = (0..m).map(weight).collect();
    let mut y: Vec<Rational> = (m..total).map(weight).collect();
    let shift = (x.iter().sum::<Rational>() - y.iter().sum::<Rational>()) / rat(n as i64);
    for v in &mut y {
        *v += &shift;
    }
    ConePoint { x, y }
}

/// Crossings of a segment, or `None` when two walls share a parameter.
fn crossings(from: &ConePoint, to: &ConePoint) -> Option<Vec<WallCrossing>> {
    let mut hits: Vec<(Rational, Resonance, i8, i8)> = Vec::new();
    for r in list_resonances(from.m(), from.n()) {
        let f0 = r.value(from);
        let f1 = r.value(to);
        let (s0, s1) = (sign_of(&f0), sign_of(&f1));
        if s0 != s1 {
            let t = &f0 / (&f0 - &f1);
            hits.push((t, r, s0, s1));
        }
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    if hits.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    let ts: Vec<Rational> = hits.iter().map(|h| h.0.clone()).collect();
    let out = hits
        .into_iter()
        .enumerate()
        .map(|(k, (t, resonance, from_sign, to_sign))| {
            let prev = if k == 0 { Rational::zero() } else { ts[k - 1].clone() };
            let next = ts.get(k + 1).cloned().unwrap_or_else(Rational::one);
            let before = (&prev + &t) / rat(2);
            let after = (&t + &next) / rat(2);
            WallCrossing {
                resonance,
                point_before: from.lerp(to, &before),
                point_after: from.lerp(to, &after),
                t_cross: t,
                from_sign,
                to_sign,
            }
        })
        .collect();
    Some(out)
}

impl FromStr for ConePoint {
    type Err = Error;

    /// Parses `"x1,x2;y1,y2"` with rational coordinates.
    fn from_str(s: &str) -> Result<Self> {
        let (xs, ys) = s
            .split_once(';')
            .ok_or_else(|| Error::InvalidArgument(format!("expected 'x;y', got {s:?}")))?;
        let parse = |t: &str| -> Result<Vec<Rational>> { t.split(',').map(crate::kernel::parse_rational).collect() };
        ConePoint::new(parse(xs)?, parse(ys)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rat_frac;

    fn pt(x: &[i64], y: &[i64]) -> ConePoint {
        ConePoint::from_ints(x, y).unwrap()
    }

    #[test]
    fn resonance_lists() {
        let two = list_resonances(2, 2);
        assert_eq!(two.len(), 2);
        assert_eq!(two[0], Resonance::new(2, 2, IndexSet(0b10), IndexSet(0b01)).unwrap());
        assert_eq!(two[1], Resonance::new(2, 2, IndexSet(0b10), IndexSet(0b10)).unwrap());
        assert_eq!(list_resonances(2, 3).len(), 6);
        assert!(list_resonances(1, 5).is_empty());
        for m in 2..=5 {
            for n in 2..=5 {
                let all = list_resonances(m, n);
                assert_eq!(all.len(), resonance_count(m, n));
                for (k, r) in all.iter().enumerate() {
                    assert_eq!(r.position(n), k);
                }
            }
        }
        assert_eq!(two[0].to_string(), "({2},{1})");
        assert_eq!(serde_json::to_string(&two[1]).unwrap(), r#"{"I":[2],"J":[2]}"#);
    }

    #[test]
    fn resonance_validation() {
        assert!(Resonance::new(3, 2, IndexSet(0b011), IndexSet(0b01)).is_err());
        assert!(Resonance::new(3, 2, IndexSet(0b010), IndexSet(0b11)).is_err());
        assert!(Resonance::new(3, 2, IndexSet(0), IndexSet(0b01)).is_err());
    }

    #[test]
    fn signatures() {
        assert_eq!(signature_of(&pt(&[3, 1], &[2, 2])).unwrap().to_string(), "--");
        assert_eq!(signature_of(&pt(&[2, 2], &[3, 1])).unwrap().to_string(), "-+");
        match signature_of(&pt(&[2, 1, 1], &[3, 1])) {
            Err(Error::OnWall(r)) => assert_eq!(r.to_string(), "({2},{2})"),
            other => panic!("expected OnWall, got {other:?}"),
        }
        assert!(matches!(
            signature_of(&ConePoint {
                x: vec![rat(1), rat(2)],
                y: vec![rat(3)]
            }),
            Err(Error::NotInCone(_))
        ));
    }

    #[test]
    fn tn_examples() {
        assert_eq!(tn_signature(2, 2).to_string(), "--");
        assert!(tn_signature(1, 4).is_empty());
        let w = ConePoint::new(
            vec![rat_frac(17, 20), rat_frac(2, 20), rat_frac(1, 20)],
            vec![rat_frac(1, 2), rat_frac(1, 2)],
        )
        .unwrap();
        assert!(signature_of(&w).unwrap().is_totally_negative());
        for m in 1..=5 {
            for n in 1..=5 {
                assert_eq!(signature_of(&tn_witness(m, n)).unwrap(), tn_signature(m, n));
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        let nn = ChamberSignature::parse(2, 2, "--").unwrap();
        let w = feasible_point(&nn).unwrap();
        assert_eq!(signature_of(&w).unwrap(), nn);
        assert!(feasible_point(&ChamberSignature::parse(2, 2, "++").unwrap()).is_none());
        assert!(feasible_point(&ChamberSignature::parse(2, 2, "+-").unwrap()).is_none());
        let np = ChamberSignature::parse(2, 2, "-+").unwrap();
        assert_eq!(signature_of(&feasible_point(&np).unwrap()).unwrap(), np);
        assert!(ChamberSignature::parse(2, 2, "-").is_err());
        assert!(ChamberSignature::parse(2, 2, "-x").is_err());
    }

    #[test]
    fn chamber_counts() {
        assert_eq!(enumerate_chambers(2, 2).unwrap().len(), 2);
        assert_eq!(enumerate_chambers(1, 4).unwrap().len(), 1);
        assert!(matches!(enumerate_chambers(5, 4), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn enumeration_invariants() {
        for (m, n) in [(2, 3), (3, 2), (3, 3), (2, 4)] {
            let chambers = enumerate_chambers(m, n).unwrap();
            let sigs: HashSet<_> = chambers.iter().map(|c| c.signature.clone()).collect();
            assert_eq!(sigs.len(), chambers.len());
            for c in &chambers {
                assert_eq!(signature_of(&c.witness).unwrap(), c.signature);
                if !c.signature.is_totally_negative() {
                    assert!(chambers.iter().any(|o| o.signature.hamming(&c.signature) == 1));
                }
            }
        }
    }

    /// Deterministic lattice sampling finds no chamber the BFS missed.
    #[test]
    fn sampling_finds_no_new_chambers() {
        let (m, n) = (2, 3);
        let known: HashSet<_> = enumerate_chambers(m, n)
            .unwrap()
            .into_iter()
            .map(|c| c.signature)
            .collect();
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % 1000 + 1
        };
        let mut sampled = 0;
        while sampled < 10_000 {
            let mut x: Vec<i64> = (0..m).map(|_| next() as i64).collect();
            let mut y: Vec<i64> = (0..n).map(|_| next() as i64).collect();
            x.sort_unstable_by(|a, b| b.cmp(a));
            y.sort_unstable_by(|a, b| b.cmp(a));
            let (sx, sy): (i64, i64) = (x.iter().sum(), y.iter().sum());
            // rescale onto a common total
            let p = ConePoint::new(
                x.iter().map(|&v| rat_frac(v * sy, 1)).collect(),
                y.iter().map(|&v| rat_frac(v * sx, 1)).collect(),
            )
            .unwrap();
            if let Ok(sig) = signature_of(&p) {
                assert!(known.contains(&sig), "missed chamber {sig}");
                sampled += 1;
            }
        }
    }

    #[test]
    fn wall_path_examples() {
        let a = pt(&[3, 1], &[2, 2]);
        let b = pt(&[2, 2], &[3, 1]);
        let path = wall_path(&a, &b).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path[0].resonance.to_string(), "({2},{2})");
        assert_eq!(path[0].t_cross, rat_frac(1, 2));
        assert_eq!((path[0].from_sign, path[0].to_sign), (-1, 1));
        assert_eq!(signature_of(&path[0].point_before).unwrap().to_string(), "--");
        assert_eq!(signature_of(&path[0].point_after).unwrap().to_string(), "-+");
        assert!(wall_path(&a, &a).unwrap().is_empty());
        assert!(wall_path(&a, &pt(&[5, 1], &[3, 3])).unwrap().is_empty());
    }

    #[test]
    fn wall_path_dithers_ties() {
        // from the symmetric tn witness, the walls ({2},{1}) and ({2},{2})
        // of a (3,3) target are crossed together
        let from = tn_witness(3, 3);
        let to = pt(&[4, 4, 1], &[3, 3, 3]);
        let path = wall_path(&from, &to).unwrap();
        let start = signature_of(&from).unwrap();
        let end = signature_of(&to).unwrap();
        assert_eq!(path.len(), start.hamming(&end));
        let mut cur = start.clone();
        for c in &path {
            assert_eq!(signature_of(&c.point_before).unwrap(), cur);
            cur = cur.flipped(c.resonance.position(3));
            assert_eq!(signature_of(&c.point_after).unwrap(), cur);
        }
        assert_eq!(cur, end);
    }

    #[test]
    fn json_shapes() {
        let chambers = enumerate_chambers(2, 2).unwrap();
        let v = serde_json::to_value(&chambers[1]).unwrap();
        assert_eq!(v["signature"], "-+");
        assert_eq!(v["resonances"].as_array().unwrap().len(), 2);
        let back: Chamber = serde_json::from_value(v).unwrap();
        assert_eq!(back, chambers[1]);
        let p: ConePoint = "3,1;2,2".parse().unwrap();
        assert_eq!(p, pt(&[3, 1], &[2, 2]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point(m: usize, n: usize) -> impl Strategy<Value = ConePoint> {
            (
                proptest::collection::vec(1i64..40, m),
                proptest::collection::vec(1i64..40, n),
            )
                .prop_map(|(mut x, mut y)| {
                    x.sort_unstable_by(|a, b| b.cmp(a));
                    y.sort_unstable_by(|a, b| b.cmp(a));
                    let (sx, sy): (i64, i64) = (x.iter().sum(), y.iter().sum());
                    ConePoint {
                        x: x.iter().map(|&v| rat(v * sy)).collect(),
                        y: y.iter().map(|&v| rat(v * sx)).collect(),
                    }
                })
        }

        proptest! {
            #[test]
            fn generic_paths_cross_each_differing_wall_once(a in point(3, 3), b in point(3, 3)) {
                let (Ok(sa), Ok(sb)) = (signature_of(&a), signature_of(&b)) else {
                    return Ok(());
                };
                let path = wall_path(&a, &b).unwrap();
                prop_assert_eq!(path.len(), sa.hamming(&sb));
                for w in path.windows(2) {
                    prop_assert!(w[0].t_cross < w[1].t_cross);
                }
            }

            #[test]
            fn feasible_point_round_trips(a in point(3, 3)) {
                if let Ok(sig) = signature_of(&a) {
                    let w = feasible_point(&sig).unwrap();
                    prop_assert_eq!(signature_of(&w).unwrap(), sig);
                }
            }
        }
    }
}
