//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are `x_1..x_m, y_1..y_n`, stored as positions `0..m+n`. Chamber
//! polynomials only make sense on the hyperplane `sum x = sum y`, so equality
//! is tested after [`MultiPoly::canonicalize`], which eliminates `y_n`.
//!
//! Exponents are signed: the single-variable one-part polynomial `x_1^{-1}`
//! (for `m = n = 1`) is the only Laurent term that ever occurs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{rat_pow, rational_string, Rational};

/// Exponent vector, ordered graded-lexicographically with
/// `x_1 > .. > x_m > y_1 > .. > y_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<i32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    m: usize,
    n: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(m: usize, n: usize) -> Self {
        MultiPoly {
            m,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: usize, n: usize, c: Rational) -> Self {
        let mut p = MultiPoly::zero(m, n);
        p.add_term(Monomial::one(m + n), c);
        p
    }

    pub fn one(m: usize, n: usize) -> Self {
        MultiPoly::constant(m, n, Rational::one())
    }

    /// The variable at position `index` (`x_{i+1}` for `i < m`, then `y`'s).
    pub fn var(m: usize, n: usize, index: usize) -> Self {
        let mut e = vec![0; m + n];
        e[index] = 1;
        MultiPoly::monomial(m, n, e, Rational::one())
    }

    /// `x_{i+1}` (zero-based `i`).
    pub fn x(m: usize, n: usize, i: usize) -> Self {
        MultiPoly::var(m, n, i)
    }

    /// `y_{j+1}` (zero-based `j`).
    pub fn y(m: usize, n: usize, j: usize) -> Self {
        MultiPoly::var(m, n, m + j)
    }

    pub fn monomial(m: usize, n: usize, exps: Vec<i32>, coef: Rational) -> Self {
        assert_eq!(exps.len(), m + n, "exponent vector length");
        let mut p = MultiPoly::zero(m, n);
        p.add_term(Monomial(exps), coef);
        p
    }

    /// A linear form `sum_k coeffs[k] * var_k`.
    pub fn linear(m: usize, n: usize, coeffs: &[Rational]) -> Self {
        let mut p = MultiPoly::zero(m, n);
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; m + n];
            e[k] = 1;
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    pub fn var_spec(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn nvars(&self) -> usize {
        self.m + self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms from the leading monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, exps: &[i32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, mono: Monomial, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_spec(&self, other: &MultiPoly) -> Result<()> {
        if self.var_spec() != other.var_spec() {
            return Err(Error::VarSpecMismatch(self.m, self.n, other.m, other.n));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_spec(other)?;
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_spec(other)?;
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_spec(other)?;
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(MultiPoly {
            m: self.m,
            n: self.n,
            terms: acc,
        })
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.m, self.n);
        }
        MultiPoly {
            m: self.m,
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.m, self.n);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Total degree of the leading term, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Zero counts as homogeneous of every degree.
    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms.keys().all(|mono| mono.degree() == degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.degree() {
            None => true,
            Some(d) => self.is_homogeneous_of(d),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars() {
            return Err(Error::PointLength {
                expected: self.nvars(),
                got: point.len(),
            });
        }
        let mut total = Rational::zero();
        for (mono, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in point.iter().zip(&mono.0) {
                if e != 0 {
                    term *= rat_pow(v, e as i64)?;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Composes `self` with `assignment[k]` substituted for variable `k`.
    /// Every assigned polynomial must live in the `target` variable spec.
    ///
    /// Negative powers are allowed only when the assigned form is a single
    /// term.
    pub fn substitute_linear(&self, assignment: &[MultiPoly], target: (usize, usize)) -> Result<MultiPoly> {
        if assignment.len() < self.nvars() {
            return Err(Error::UnassignedVariable(assignment.len()));
        }
        for a in &assignment[..self.nvars()] {
            if a.var_spec() != target {
                return Err(Error::VarSpecMismatch(a.m, a.n, target.0, target.1));
            }
        }
        let (tm, tn) = target;
        // powers[k][e] = assignment[k]^e, grown on demand
        let mut powers: Vec<Vec<MultiPoly>> = vec![vec![MultiPoly::one(tm, tn)]; self.nvars()];
        let mut out = MultiPoly::zero(tm, tn);
        for (mono, c) in &self.terms {
            let mut term = MultiPoly::constant(tm, tn, c.clone());
            for (k, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let factor = if e > 0 {
                    let cache = &mut powers[k];
                    while cache.len() <= e as usize {
                        let next = cache.last().unwrap() * &assignment[k];
                        cache.push(next);
                    }
                    cache[e as usize].clone()
                } else {
                    assignment[k].inverse_monomial()?.pow(e.unsigned_abs())
                };
                term = &term * &factor;
            }
            out = &out + &term;
        }
        Ok(out)
    }

    fn inverse_monomial(&self) -> Result<MultiPoly> {
        if self.terms.len() != 1 {
            return Err(Error::NegativePowerSubstitution);
        }
        let (mono, c) = self.terms.iter().next().unwrap();
        Ok(MultiPoly::monomial(
            self.m,
            self.n,
            mono.0.iter().map(|e| -e).collect(),
            c.recip(),
        ))
    }

    /// The linear form `x_1 + .. + x_m - y_1 - .. - y_{n-1}` that replaces `y_n`.
    fn last_y_replacement(m: usize, n: usize) -> MultiPoly {
        let mut coeffs = vec![Rational::one(); m];
        coeffs.extend(std::iter::repeat_n(-Rational::one(), n - 1));
        coeffs.push(Rational::zero());
        MultiPoly::linear(m, n, &coeffs)
    }

    /// Normal form modulo `sum x = sum y`: `y_n` is eliminated. Two
    /// polynomials agree on the hyperplane iff their canonical forms are equal.
    pub fn canonicalize(&self) -> MultiPoly {
        if self.m == 0 || self.n == 0 {
            return self.clone();
        }
        let last = self.nvars() - 1;
        if self.terms.keys().all(|mono| mono.0[last] == 0) {
            return self.clone();
        }
        let mut assignment: Vec<MultiPoly> = (0..self.nvars()).map(|k| MultiPoly::var(self.m, self.n, k)).collect();
        assignment[last] = MultiPoly::last_y_replacement(self.m, self.n);
        self.substitute_linear(&assignment, (self.m, self.n))
            .expect("y_n never carries a negative exponent")
    }

    /// Whether `self` equals `other` on the hyperplane `sum x = sum y`.
    pub fn equivalent(&self, other: &MultiPoly) -> Result<bool> {
        Ok(self.try_sub(other)?.canonicalize().is_zero())
    }

    /// Whether the linear form `form` divides `self` modulo the hyperplane.
    ///
    /// After eliminating `y_n` the quotient ring is a polynomial ring and a
    /// nonzero linear form is prime, so divisibility is vanishing on its zero
    /// set.
    pub fn divisible_by_linear(&self, form: &MultiPoly) -> Result<bool> {
        self.check_spec(form)?;
        let p = self.canonicalize();
        let l = form.canonicalize();
        if l.is_zero() {
            return Ok(p.is_zero());
        }
        if !l.is_homogeneous_of(1) {
            return Err(Error::InvalidArgument(
                "divisor must be a homogeneous linear form".into(),
            ));
        }
        let coeffs: Vec<Rational> = (0..l.nvars())
            .map(|k| {
                let mut e = vec![0; l.nvars()];
                e[k] = 1;
                l.coefficient(&e)
            })
            .collect();
        let pivot = (0..coeffs.len()).rev().find(|&k| !coeffs[k].is_zero()).unwrap();
        // var_pivot = -(l - c * var_pivot) / c
        let rest = l.try_sub(&MultiPoly::var(self.m, self.n, pivot).scale(&coeffs[pivot]))?;
        let solved = rest.scale(&(-coeffs[pivot].recip()));
        let mut assignment: Vec<MultiPoly> = (0..self.nvars()).map(|k| MultiPoly::var(self.m, self.n, k)).collect();
        assignment[pivot] = solved;
        Ok(p.substitute_linear(&assignment, (self.m, self.n))?.is_zero())
    }

    /// Reconstructs the canonical homogeneous polynomial of the given degree
    /// through `samples` (full points of length `m + n` on the hyperplane).
    /// Uses fraction-free elimination.
    pub fn interpolate_homogeneous(
        m: usize,
        n: usize,
        degree: i64,
        samples: &[(Vec<Rational>, Rational)],
    ) -> Result<MultiPoly> {
        let basis = canonical_basis(m, n, degree)?;
        for (point, _) in samples {
            if point.len() != m + n {
                return Err(Error::PointLength {
                    expected: m + n,
                    got: point.len(),
                });
            }
            if m > 0 && n > 0 {
                let sx: Rational = point[..m].iter().sum();
                let sy: Rational = point[m..].iter().sum();
                if sx != sy {
                    return Err(Error::InvalidArgument("sample point is off the hyperplane".into()));
                }
            }
        }

        // integer rows [monomial values | value], denominators cleared per row
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(samples.len());
        for (point, value) in samples {
            let mut row: Vec<Rational> = Vec::with_capacity(basis.len() + 1);
            for mono in &basis {
                let mut v = Rational::one();
                for (x, &e) in point.iter().zip(&mono.0) {
                    if e != 0 {
                        v *= rat_pow(x, e as i64)?;
                    }
                }
                row.push(v);
            }
            row.push(value.clone());
            let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            rows.push(row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect());
        }

        let unknowns = basis.len();
        let (rank, pivots) = bareiss_echelon(&mut rows, unknowns);
        if rows[rank.min(rows.len())..].iter().any(|row| !row[unknowns].is_zero()) {
            return Err(Error::InconsistentSamples);
        }
        if rank < unknowns {
            return Err(Error::Underdetermined { rank, unknowns });
        }

        // back substitution on the square upper-triangular block
        let mut solution = vec![Rational::zero(); unknowns];
        for i in (0..rank).rev() {
            let col = pivots[i];
            let mut acc = Rational::from_integer(rows[i][unknowns].clone());
            for j in col + 1..unknowns {
                if !rows[i][j].is_zero() {
                    acc -= Rational::from_integer(rows[i][j].clone()) * &solution[j];
                }
            }
            solution[col] = acc / Rational::from_integer(rows[i][col].clone());
        }

        let mut out = MultiPoly::zero(m, n);
        for (mono, c) in basis.into_iter().zip(solution) {
            out.add_term(mono, c);
        }
        Ok(out)
    }
}

/// Number of monomials of `degree` in `k` variables.
pub fn count_monomials(k: usize, degree: usize) -> usize {
    if k == 0 {
        return usize::from(degree == 0);
    }
    let mut acc: u128 = 1;
    for i in 0..(k as u128 - 1) {
        acc = acc * (degree as u128 + i + 1) / (i + 1);
    }
    acc as usize
}

/// Monomials of the given degree in the canonical variables
/// (everything but `y_n`), descending.
fn canonical_basis(m: usize, n: usize, degree: i64) -> Result<Vec<Monomial>> {
    let nvars = m + n;
    let free = if m > 0 && n > 0 { nvars - 1 } else { nvars };
    if degree < 0 {
        // only x_1^{-1} for m = n = 1 lives here
        if free == 1 {
            let mut e = vec![0; nvars];
            e[0] = degree as i32;
            return Ok(vec![Monomial(e)]);
        }
        return Err(Error::InvalidArgument(format!("negative degree {degree}")));
    }
    fn rec(pos: usize, free: usize, rem: i32, cur: &mut Vec<i32>, out: &mut Vec<Monomial>) {
        if pos + 1 == free {
            cur[pos] = rem;
            out.push(Monomial(cur.clone()));
            cur[pos] = 0;
            return;
        }
        for e in (0..=rem).rev() {
            cur[pos] = e;
            rec(pos + 1, free, rem - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if free == 0 {
        if degree == 0 {
            out.push(Monomial::one(nvars));
        }
        return Ok(out);
    }
    rec(0, free, degree as i32, &mut vec![0; nvars], &mut out);
    Ok(out)
}

/// Fraction-free (Bareiss) row echelon form over the first `cols` columns of
/// an augmented integer matrix. Returns the rank and pivot columns.
fn bareiss_echelon(rows: &mut [Vec<BigInt>], cols: usize) -> (usize, Vec<usize>) {
    let width = cols + 1;
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let (top, rest) = rows.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..width {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                debug_assert!(v.is_multiple_of(&prev));
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = top[rank][c].clone();
        pivots.push(c);
        rank += 1;
    }
    (rank, pivots)
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.try_add(rhs).expect("variable spec mismatch")
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.try_sub(rhs).expect("variable spec mismatch")
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.try_mul(rhs).expect("variable spec mismatch")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (mono, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            for (v, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if v < self.m {
                    format!("x{}", v + 1)
                } else {
                    format!("y{}", v - self.m + 1)
                };
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                f.write_str(&factors.join("*"))?;
            } else if abs.is_integer() {
                write!(f, "{abs}*{}", factors.join("*"))?;
            } else {
                write!(f, "({abs})*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[({}, {})] {}", self.m, self.n, self)
    }
}

#[derive(Serialize, Deserialize)]
struct VarsJson {
    m: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i32>,
    #[serde(with = "rational_string")]
    coef: Rational,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    vars: VarsJson,
    terms: Vec<TermJson>,
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            vars: VarsJson { m: self.m, n: self.n },
            terms: self
                .terms()
                .map(|(mono, c)| TermJson {
                    exp: mono.0.clone(),
                    coef: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let mut p = MultiPoly::zero(raw.vars.m, raw.vars.n);
        for t in raw.terms {
            if t.exp.len() != p.nvars() {
                return Err(serde::de::Error::custom("exponent vector length mismatch"));
            }
            p.add_term(Monomial(t.exp), t.coef);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{rat, rat_frac};

    fn x(i: usize) -> MultiPoly {
        MultiPoly::x(2, 2, i - 1)
    }
    fn y(j: usize) -> MultiPoly {
        MultiPoly::y(2, 2, j - 1)
    }
    fn pt(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| rat(a)).collect()
    }

    #[test]
    fn ring_examples() {
        let a = &x(1) + &y(1);
        let b = &x(1) - &y(1);
        assert_eq!(&a + &b, x(1).scale(&rat(2)));
        assert!((&b * &MultiPoly::zero(2, 2)).is_zero());
        assert_eq!(x(1).scale(&rat(2)).scale(&rat_frac(1, 2)), x(1));
        assert!(matches!(
            x(1).try_add(&MultiPoly::x(2, 3, 0)),
            Err(Error::VarSpecMismatch(..))
        ));
    }

    #[test]
    fn eval_examples() {
        let p = x(1).scale(&rat(2));
        assert_eq!(p.eval(&pt(&[3, 1, 2, 2])).unwrap(), rat(6));
        let q = &(&x(1) * &y(2)) + &MultiPoly::constant(2, 2, rat(5));
        assert_eq!(q.eval(&pt(&[0, 0, 0, 0])).unwrap(), rat(5));
        assert_eq!((&x(1) * &y(2)).eval(&pt(&[1, 1, 1, 1])).unwrap(), rat(1));
        assert!(matches!(p.eval(&pt(&[1, 2])), Err(Error::PointLength { .. })));
    }

    #[test]
    fn substitution_examples() {
        // p(z) = z^2 with z -> x2 - y2
        let z2 = MultiPoly::monomial(1, 0, vec![2], rat(1));
        let form = &x(2) - &y(2);
        let got = z2.substitute_linear(&[form], (2, 2)).unwrap();
        let want = &(&(&x(2) * &x(2)) - &(&x(2) * &y(2)).scale(&rat(2))) + &(&y(2) * &y(2));
        assert_eq!(got, want);

        let p = &(&x(1) * &y(2)) + &x(2);
        let ident: Vec<_> = (0..4).map(|k| MultiPoly::var(2, 2, k)).collect();
        assert_eq!(p.substitute_linear(&ident, (2, 2)).unwrap(), p);

        let x1 = MultiPoly::x(3, 0, 0);
        let sum = MultiPoly::linear(3, 0, &[rat(1), rat(1), rat(1)]);
        let ids = vec![sum.clone(), MultiPoly::x(3, 0, 1), MultiPoly::x(3, 0, 2)];
        assert_eq!(x1.substitute_linear(&ids, (3, 0)).unwrap(), sum);

        assert!(matches!(
            p.substitute_linear(&ident[..2], (2, 2)),
            Err(Error::UnassignedVariable(2))
        ));
    }

    #[test]
    fn canonical_form_examples() {
        let rel = &(&x(1) + &x(2)) - &(&y(1) + &y(2));
        assert!(rel.canonicalize().is_zero());
        let two_x1 = x(1).scale(&rat(2));
        assert_eq!(two_x1.canonicalize(), two_x1);
        // 2x1 + 2x2 - 2y2 versus 2x1 + 2x2 - 2(x1 + x2 - y1)
        let a = &(&x(1) + &x(2)).scale(&rat(2)) - &y(2).scale(&rat(2));
        let b = &(&x(1) + &x(2)).scale(&rat(2)) - &(&(&x(1) + &x(2)) - &y(1)).scale(&rat(2));
        assert_eq!(a.canonicalize(), b.canonicalize());
        assert_eq!(a.canonicalize(), y(1).scale(&rat(2)));
    }

    #[test]
    fn interpolation_examples() {
        let samples = vec![
            (pt(&[3, 1, 2, 2]), rat(6)),
            (pt(&[4, 1, 3, 2]), rat(8)),
            (pt(&[5, 2, 4, 3]), rat(10)),
        ];
        let p = MultiPoly::interpolate_homogeneous(2, 2, 1, &samples).unwrap();
        assert_eq!(p, x(1).scale(&rat(2)));

        let c = MultiPoly::interpolate_homogeneous(2, 1, 0, &[(pt(&[2, 1, 3]), rat_frac(7, 3))]).unwrap();
        assert_eq!(c, MultiPoly::constant(2, 1, rat_frac(7, 3)));

        // mixing the two m = n = 2 chambers: 2*mu1 vs 2*mu1 + 2*(mu2 - nu2)
        let mixed = vec![
            (pt(&[3, 1, 2, 2]), rat(6)),
            (pt(&[4, 1, 3, 2]), rat(8)),
            (pt(&[5, 2, 4, 3]), rat(10)),
            (pt(&[2, 2, 3, 1]), rat(6)),
        ];
        assert_eq!(
            MultiPoly::interpolate_homogeneous(2, 2, 1, &mixed),
            Err(Error::InconsistentSamples)
        );

        assert!(matches!(
            MultiPoly::interpolate_homogeneous(2, 2, 1, &samples[..2]),
            Err(Error::Underdetermined { rank: 2, unknowns: 3 })
        ));
    }

    #[test]
    fn laurent_case() {
        let inv = MultiPoly::monomial(1, 1, vec![-1, 0], rat(1));
        assert_eq!(inv.eval(&[rat(2), rat(2)]).unwrap(), rat_frac(1, 2));
        let fit = MultiPoly::interpolate_homogeneous(1, 1, -1, &[(vec![rat(3), rat(3)], rat_frac(1, 3))]).unwrap();
        assert_eq!(fit, inv);
    }

    #[test]
    fn divisibility() {
        let l = &x(2) - &y(2);
        let p = &l * &(&x(1) + &y(1));
        assert!(p.divisible_by_linear(&l).unwrap());
        assert!(!x(1).divisible_by_linear(&l).unwrap());
        // y1 - x1 equals x2 - y2 on the hyperplane
        let q = &(&y(1) - &x(1)) * &x(1);
        assert!(q.divisible_by_linear(&l).unwrap());
    }

    #[test]
    fn json_and_display() {
        let p = &x(1).scale(&rat(2)) - &y(2).scale(&rat_frac(1, 3));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"vars":{"m":2,"n":2},"terms":[{"exp":[1,0,0,0],"coef":"2"},{"exp":[0,0,0,1],"coef":"-1/3"}]}"#
        );
        let back: MultiPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.to_string(), "2*x1 - (1/3)*y2");
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(count_monomials(5, 3), 35);
        assert_eq!(count_monomials(3, 1), 3);
        assert_eq!(count_monomials(1, 4), 1);
        assert_eq!(canonical_basis(3, 3, 3).unwrap().len(), 35);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly(m: usize, n: usize) -> impl Strategy<Value = MultiPoly> {
            proptest::collection::vec((proptest::collection::vec(0i32..3, m + n), -5i64..6), 0..6).prop_map(
                move |terms| {
                    let mut p = MultiPoly::zero(m, n);
                    for (e, c) in terms {
                        p.add_term(Monomial(e), rat(c));
                    }
                    p
                },
            )
        }

        fn hyperplane_point() -> impl Strategy<Value = Vec<Rational>> {
            // (x1, x2, x3, y1, y2) with y3 fixed by the relation
            proptest::collection::vec((-20i64..20, 1i64..7), 5).prop_map(|v| {
                let mut pt: Vec<Rational> = v.iter().map(|&(a, b)| rat_frac(a, b)).collect();
                let y3 = &pt[0] + &pt[1] + &pt[2] - &pt[3] - &pt[4];
                pt.push(y3);
                pt
            })
        }

        proptest! {
            #[test]
            fn canonicalize_is_idempotent(p in poly(3, 3)) {
                let c = p.canonicalize();
                prop_assert_eq!(c.canonicalize(), c);
            }

            #[test]
            fn canonical_difference_matches_hyperplane_evaluation(
                p in poly(3, 3),
                pts in proptest::collection::vec(hyperplane_point(), 4),
            ) {
                let q = &p + &(&MultiPoly::linear(3, 3, &[rat(1), rat(1), rat(1), rat(-1), rat(-1), rat(-1)]) * &p);
                // q == p on the hyperplane, and q - p vanishes at every sample
                prop_assert!((&q - &p).canonicalize().is_zero());
                for s in &pts {
                    prop_assert_eq!(q.eval(s).unwrap(), p.eval(s).unwrap());
                }
                // and a genuinely different polynomial is caught
                let r = &p + &MultiPoly::x(3, 3, 0);
                prop_assert!(!(&r - &p).canonicalize().is_zero());
            }

            #[test]
            fn linear_substitution_preserves_homogeneity(
                coeffs in proptest::collection::vec(proptest::collection::vec(-3i64..4, 4), 3),
                exps in proptest::collection::vec(proptest::collection::vec(0i32..3, 3), 1..5),
            ) {
                let mut p = MultiPoly::zero(3, 0);
                let k = exps[0].iter().sum::<i32>();
                for e in &exps {
                    // force every term to degree k by adjusting the last exponent
                    let mut e = e.clone();
                    let s: i32 = e[..2].iter().sum();
                    if s > k { continue; }
                    e[2] = k - s;
                    p.add_term(Monomial(e), rat(1));
                }
                let forms: Vec<MultiPoly> = coeffs
                    .iter()
                    .map(|c| MultiPoly::linear(2, 2, &c.iter().map(|&a| rat(a)).collect::<Vec<_>>()))
                    .collect();
                let out = p.substitute_linear(&forms, (2, 2)).unwrap();
                prop_assert!(out.is_homogeneous_of(k as i64));
            }

            #[test]
            fn interpolation_reproduces_samples(p in poly(2, 2)) {
                // take the degree-2 homogeneous part and refit it
                let mut h = MultiPoly::zero(2, 2);
                for (mono, c) in p.terms() {
                    if mono.degree() == 2 { h.add_term(mono.clone(), c.clone()); }
                }
                let h = h.canonicalize();
                let mut samples = Vec::new();
                for a in 1..4i64 {
                    for b in 1..3i64 {
                        for c in 1..3i64 {
                            let pt = vec![rat(a + 5), rat(b), rat(c), rat(a + 5 + b - c)];
                            samples.push((pt.clone(), h.eval(&pt).unwrap()));
                        }
                    }
                }
                let fit = MultiPoly::interpolate_homogeneous(2, 2, 2, &samples).unwrap();
                prop_assert_eq!(&fit, &h);
                for (pt, v) in &samples {
                    prop_assert_eq!(&fit.eval(pt).unwrap(), v);
                }
            }
        }
    }
}
