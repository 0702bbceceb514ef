//! Explicit formulas for one, two and three parts, the totally negative
//! polynomial, and a few identities used as cross-checks.
//!
//! Every formula has an `_at` variant over rational inputs so it can be
//! evaluated at perturbed points next to a wall.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kernel::{
    biguint_to_rational, factorial, indexed_sum, rat, rat_pow, set_partitions, wall_shift, IndexSet, Partition,
    Rational,
};
use crate::poly::MultiPoly;

/// One summand of an exsum: the sum that also runs over `J = {}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExsumTerm {
    pub j: IndexSet,
    pub contribution: Rational,
}

/// Which reading of the three-part formula to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ThreePartForm {
    /// First and third sums weighted by `A_J` and `C_JK` alone; agrees
    /// with the oracle.
    #[default]
    Corrected,
    /// As printed: the first sum carries an extra `(mu2 - nu_J)` and the
    /// inner third sum an extra `(mu3 - nu_K)`.
    Literal,
}

fn fact(n: usize) -> Rational {
    biguint_to_rational(&factorial(n as u64))
}

fn ratv(p: &Partition) -> Vec<Rational> {
    p.parts().iter().map(|&v| rat(v as i64)).collect()
}

fn check_degree(mu: u64, nu: &Partition) -> Result<()> {
    if mu != nu.degree() {
        return Err(Error::DegreeMismatch { mu, nu: nu.degree() });
    }
    Ok(())
}

fn check_order(parts: &[u32]) -> Result<()> {
    if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "parts must be positive and weakly decreasing: {parts:?}"
        )));
    }
    Ok(())
}

/// `(n-1)! d^(n-2)`.
pub fn one_part(d: u64, nu: &Partition) -> Result<Rational> {
    check_degree(d, nu)?;
    one_part_at(&rat(d as i64), nu.len())
}

pub fn one_part_at(d: &Rational, n: usize) -> Result<Rational> {
    Ok(fact(n - 1) * rat_pow(d, n as i64 - 2)?)
}

/// The summands of the two-part formula, `J = {}` included.
pub fn two_part_terms_at(mu1: &Rational, mu2: &Rational, nu: &[Rational]) -> Result<Vec<ExsumTerm>> {
    two_part_terms_selected(mu1, mu2, nu, nu)
}

/// Summands chosen by the conditions at `selector` (a nearby `nu`) and
/// evaluated at `nu`: the polynomial of the chamber containing
/// `(mu; selector)`.
pub fn two_part_terms_selected(
    mu1: &Rational,
    mu2: &Rational,
    nu: &[Rational],
    selector: &[Rational],
) -> Result<Vec<ExsumTerm>> {
    let n = nu.len();
    let nf = fact(n);
    let mut out = Vec::new();
    for j in IndexSet::full(n).subsets() {
        if &indexed_sum(selector, j) >= mu2 {
            continue;
        }
        let nu_j = indexed_sum(nu, j);
        let k = j.len() as i64;
        let c = &nf * (mu2 - &nu_j) * rat_pow(mu1, n as i64 - k - 1)? * rat_pow(mu2, k - 1)?;
        out.push(ExsumTerm { j, contribution: c });
    }
    Ok(out)
}

pub fn two_part_at(mu1: &Rational, mu2: &Rational, nu: &[Rational]) -> Result<Rational> {
    two_part_selected(mu1, mu2, nu, nu)
}

pub fn two_part_selected(mu1: &Rational, mu2: &Rational, nu: &[Rational], selector: &[Rational]) -> Result<Rational> {
    Ok(two_part_terms_selected(mu1, mu2, nu, selector)?
        .into_iter()
        .fold(Rational::zero(), |acc, t| acc + t.contribution))
}

pub fn two_part(mu1: u32, mu2: u32, nu: &Partition) -> Result<Rational> {
    check_order(&[mu1, mu2])?;
    check_degree(mu1 as u64 + mu2 as u64, nu)?;
    two_part_at(&rat(mu1 as i64), &rat(mu2 as i64), &ratv(nu))
}

/// Three parts. Integer points on a wall are evaluated through the chamber
/// reached by [`wall_shift`]; the sums have boundary terms that do not vanish.
pub fn three_part(mu1: u32, mu2: u32, mu3: u32, nu: &Partition, form: ThreePartForm) -> Result<Rational> {
    check_order(&[mu1, mu2, mu3])?;
    let d = mu1 as u64 + mu2 as u64 + mu3 as u64;
    check_degree(d, nu)?;
    let values = ratv(nu);
    let selector: Vec<Rational> = values.iter().zip(wall_shift(nu.len(), d)).map(|(v, e)| v + e).collect();
    let (a, b, c) = (rat(mu1 as i64), rat(mu2 as i64), rat(mu3 as i64));
    three_part_selected(&a, &b, &c, &values, &selector, form)
}

pub fn three_part_at(
    mu1: &Rational,
    mu2: &Rational,
    mu3: &Rational,
    nu: &[Rational],
    form: ThreePartForm,
) -> Result<Rational> {
    three_part_selected(mu1, mu2, mu3, nu, nu, form)
}

pub fn three_part_selected(
    mu1: &Rational,
    mu2: &Rational,
    mu3: &Rational,
    nu: &[Rational],
    selector: &[Rational],
    form: ThreePartForm,
) -> Result<Rational> {
    let n = nu.len();
    let ni = n as i64;
    let d = mu1 + mu2 + mu3;
    let m12 = mu1 + mu2;
    let m23 = mu2 + mu3;
    let full = IndexSet::full(n);
    let sel = |j: IndexSet| indexed_sum(selector, j);
    let mut total = Rational::zero();

    // crossings of x2 = y_J and x2 + x3 = y_J on the first leg
    for j in full.subsets() {
        if &sel(j) >= mu2 {
            continue;
        }
        let nj = indexed_sum(nu, j);
        let k = j.len() as i64;
        let a = &d * mu2 - &nj * &m12;
        let mut t = rat_pow(mu1, ni - k - 1)? * rat_pow(mu2, k - 1)? * a;
        if form == ThreePartForm::Literal {
            t *= mu2 - &nj;
        }
        total += t;
    }

    // x3 = y_J on the second leg
    for j in full.subsets().filter(|j| !j.is_empty()) {
        if &sel(j) >= mu3 {
            continue;
        }
        let nj = indexed_sum(nu, j);
        let kj = j.len() as i64;
        let outer = (mu3 - &nj) * rat_pow(mu3, kj - 1)?;
        let mut inner = Rational::zero();
        for kk in j.complement(n).subsets() {
            if &sel(kk) >= mu2 {
                continue;
            }
            let nk = indexed_sum(nu, kk);
            let kc = kk.len() as i64;
            let b = (&d - &nj) * mu2 - &nk * &m12;
            inner += rat_pow(mu1, ni - kj - kc - 1)? * rat_pow(mu2, kc - 1)? * b;
        }
        total += outer * inner;
    }

    // x2 + x3 = y_J on the second leg
    for j in full.subsets() {
        let sj = sel(j);
        if !(&sj > mu2 && sj < m23) {
            continue;
        }
        let nj = indexed_sum(nu, j);
        let kj = j.len() as i64;
        let outer = (&m23 - &nj) * rat_pow(mu1, ni - kj - 1)?;
        let bound = &sj - mu2;
        let mut inner = Rational::zero();
        for kk in j.subsets() {
            if sel(kk) >= bound {
                continue;
            }
            let nk = indexed_sum(nu, kk);
            let kc = kk.len() as i64;
            let c = &nj * mu3 - &nk * &m23;
            let mut t = rat_pow(mu2, kj - kc - 1)? * rat_pow(mu3, kc - 1)? * c;
            if form == ThreePartForm::Literal {
                t *= mu3 - &nk;
            }
            inner += t;
        }
        total += outer * inner;
    }

    Ok(fact(n + 1) * total)
}

/// `(m+n-2)! x1^(n-1) (x1+...+xm)^(m-2)`, with `m = 1` read as
/// `(n-1)! x1^(n-2)`.
pub fn tn_polynomial(m: usize, n: usize) -> MultiPoly {
    let c = fact(m + n - 2);
    if m == 1 {
        let mut e = vec![0; 1 + n];
        e[0] = n as i32 - 2;
        return MultiPoly::monomial(m, n, e, c);
    }
    let mut e = vec![0; m + n];
    e[0] = n as i32 - 1;
    let lead = MultiPoly::monomial(m, n, e, c);
    let sum_x = MultiPoly::linear(m, n, &vec![Rational::one(); m]);
    lead.try_mul(&sum_x.pow(m as u32 - 2)).expect("same variables")
}

/// The two-part formula written as a sum over sub-multiset decompositions
/// `rho + sigma + tau = nu`.
pub fn two_part_product_formula(mu1: u32, mu2: u32, nu: &Partition) -> Result<Rational> {
    check_order(&[mu1, mu2])?;
    let d = mu1 as u64 + mu2 as u64;
    check_degree(d, nu)?;
    let (m1, m2) = (rat(mu1 as i64), rat(mu2 as i64));
    let mults = nu.multiplicities();
    let aut_nu: Rational = mults.iter().map(|&(_, c)| fact(c)).product();
    let prefix = fact(nu.len()) * aut_nu / rat(d as i64);

    // per distinct value: (count in sigma, count in tau)
    let mut split = vec![(0usize, 0usize); mults.len()];
    let mut total = Rational::zero();
    loop {
        let mut sig = (0i64, 0usize);
        let mut tau = (0i64, 0usize);
        let mut rho = (0usize, Rational::one());
        let mut aut = Rational::one();
        for (&(v, c), &(s, t)) in mults.iter().zip(&split) {
            let r = c - s - t;
            sig = (sig.0 + v as i64 * s as i64, sig.1 + s);
            tau = (tau.0 + v as i64 * t as i64, tau.1 + t);
            rho = (rho.0 + r, rho.1 * rat_pow(&rat(v as i64), r as i64)?);
            aut *= fact(r) * fact(s) * fact(t);
        }
        if sig.0 < mu1 as i64 && tau.0 < mu2 as i64 {
            total += fact(rho.0) * rho.1 / aut
                * (&m1 - rat(sig.0))
                * (&m2 - rat(tau.0))
                * rat_pow(&m1, sig.1 as i64 - 1)?
                * rat_pow(&m2, tau.1 as i64 - 1)?;
        }
        // odometer over splits with s + t <= c
        let mut pos = 0;
        loop {
            if pos == split.len() {
                return Ok(prefix * total);
            }
            let c = mults[pos].1;
            let (s, t) = split[pos];
            if s + t < c {
                split[pos] = (s + 1, t);
                break;
            } else if t < c {
                split[pos] = (0, t + 1);
                break;
            }
            split[pos] = (0, 0);
            pos += 1;
        }
    }
}

/// `(3/4)(27d^2 - 137d + 180) d^(d-6) (2d-6)! / (d-3)!`, the value at
/// `mu = nu = (3,1^(d-3))`. Unlike everything else here this counts
/// unlabelled covers: the labelled number is larger by `((d-3)!)^2`.
pub fn alpha3_formula(d: u64) -> Result<Rational> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("alpha3 formula needs d >= 4, got {d}")));
    }
    let di = d as i64;
    let quad = rat(27 * di * di - 137 * di + 180);
    Ok(
        Rational::new(3.into(), 4.into()) * quad * rat_pow(&rat(di), di - 6)? * fact(2 * d as usize - 6)
            / fact(d as usize - 3),
    )
}

/// Both sides of the tree-counting identity
/// `sum_k x1^k sum_{[2,m] = I_1 + ... + I_k} prod x_{I_i}^(|I_i|-1) = x1 (x1+...+xm)^(m-2)`.
pub fn forest_identity(m: usize) -> Result<(MultiPoly, MultiPoly)> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("identity needs m >= 2, got {m}")));
    }
    let x = |i: usize| MultiPoly::x(m, 0, i);
    let mut lhs = MultiPoly::zero(m, 0);
    let rest: Vec<usize> = (1..m).collect();
    for blocks in set_partitions(&rest, false) {
        let mut term = x(0).pow(blocks.len() as u32);
        for b in &blocks {
            let mut coeffs = vec![Rational::zero(); m];
            for &i in b {
                coeffs[i] = Rational::one();
            }
            term = term.try_mul(&MultiPoly::linear(m, 0, &coeffs).pow(b.len() as u32 - 1))?;
        }
        lhs = lhs.try_add(&term)?;
    }
    let sum_x = MultiPoly::linear(m, 0, &vec![Rational::one(); m]);
    let rhs = x(0).try_mul(&sum_x.pow(m as u32 - 2))?;
    Ok((lhs, rhs))
}
