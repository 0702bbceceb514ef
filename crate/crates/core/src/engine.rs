//! Chamber polynomials by wall crossing from the totally negative chamber,
//! and a dispatcher over every way of computing a number.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::chambers::{signature_of, tn_witness, wall_path, ChamberSignature, ConePoint, Resonance};
use crate::closed_forms::{one_part, three_part, tn_polynomial, two_part, ThreePartForm};
use crate::error::{Error, Result};
use crate::kernel::{biguint_to_rational, binomial, rational_string, wall_shift, HurwitzPair, Partition, Rational};
use crate::oracle::Oracle;
use crate::poly::MultiPoly;
use crate::trees::TreeRecursion;

/// `m + n` above which the chamber method refuses to run.
pub const DEFAULT_CHAMBER_BOUND: usize = 9;

/// A chamber with its polynomial in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChamberPolynomial {
    pub signature: ChamberSignature,
    pub witness: ConePoint,
    pub poly: MultiPoly,
}

/// `P_C - P_C'` across one wall, `C` on the side where `x_I > y_J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossingDelta {
    pub resonance: Resonance,
    pub positive_side_signature: ChamberSignature,
    /// Chambers of the two sub-problems, `(x(I') + z; y(J'))` then
    /// `(x(I); y(J) + z)`, in sorted coordinates.
    pub sub_signatures: (ChamberSignature, ChamberSignature),
    pub delta: MultiPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Auto,
    Oracle,
    ClosedForm,
    /// The three-part formula exactly as printed; fails the oracle.
    ClosedFormLiteral,
    Trees,
    Chambers,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Auto,
        Method::Oracle,
        Method::ClosedForm,
        Method::ClosedFormLiteral,
        Method::Trees,
        Method::Chambers,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Oracle => "oracle",
            Method::ClosedForm => "closed_form",
            Method::ClosedFormLiteral => "closed_form_literal",
            Method::Trees => "trees",
            Method::Chambers => "chambers",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// One computed number, shaped for JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub mu: Vec<u32>,
    pub nu: Vec<u32>,
    pub d: u64,
    pub r: usize,
    #[serde(with = "rational_string")]
    pub value: Rational,
    pub method: Method,
    pub signature: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<MultiPoly>,
}

/// Memoized synthesis and dispatch. Cheap to share across threads.
pub struct Engine {
    oracle: Oracle,
    trees: TreeRecursion,
    chamber_bound: usize,
    polys: Mutex<HashMap<ChamberSignature, MultiPoly>>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine::with_oracle(Oracle::new())
    }

    pub fn with_oracle(oracle: Oracle) -> Self {
        Engine {
            oracle,
            trees: TreeRecursion::new(),
            chamber_bound: DEFAULT_CHAMBER_BOUND,
            polys: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_chamber_bound(mut self, bound: usize) -> Self {
        self.chamber_bound = bound;
        self
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// `binom(m+n-2, |I|+|J|-1) (x_I - y_J) P_sub1 P_sub2`, the sub-chambers
    /// read off `point`, which must lie strictly on the positive side.
    pub fn crossing_delta(&self, res: &Resonance, point: &ConePoint) -> Result<CrossingDelta> {
        let (m, n) = (point.m(), point.n());
        let sig = signature_of(point)?;
        if sig.sign(res) <= 0 {
            return Err(Error::InvalidArgument(format!(
                "{point} is not on the positive side of {res}"
            )));
        }
        let z_form = res.linear_form(m, n);
        let z_val = res.value(point);
        let x_form = |i: usize| MultiPoly::x(m, n, i);
        let y_form = |j: usize| MultiPoly::y(m, n, j);

        let mut x1: Vec<(Rational, MultiPoly)> = (0..m)
            .filter(|&i| !res.i.contains(i))
            .map(|i| (point.x[i].clone(), x_form(i)))
            .collect();
        x1.push((z_val.clone(), z_form.clone()));
        let y1: Vec<(Rational, MultiPoly)> = (0..n)
            .filter(|&j| !res.j.contains(j))
            .map(|j| (point.y[j].clone(), y_form(j)))
            .collect();
        let x2: Vec<(Rational, MultiPoly)> = res.i.iter().map(|i| (point.x[i].clone(), x_form(i))).collect();
        let mut y2: Vec<(Rational, MultiPoly)> = res.j.iter().map(|j| (point.y[j].clone(), y_form(j))).collect();
        y2.push((z_val, z_form.clone()));

        let (s1, p1) = self.embedded_sub_polynomial(x1, y1, (m, n))?;
        let (s2, p2) = self.embedded_sub_polynomial(x2, y2, (m, n))?;
        let k = (res.i.len() + res.j.len() - 1) as u64;
        let c = biguint_to_rational(&binomial((m + n - 2) as u64, k));
        let delta = z_form.scale(&c).try_mul(&p1)?.try_mul(&p2)?.canonicalize();
        Ok(CrossingDelta {
            resonance: *res,
            positive_side_signature: sig,
            sub_signatures: (s1, s2),
            delta,
        })
    }

    /// Sorts each side by value, synthesizes the polynomial of the chamber
    /// holding the sorted point, and substitutes the tracked parent forms.
    fn embedded_sub_polynomial(
        &self,
        mut xs: Vec<(Rational, MultiPoly)>,
        mut ys: Vec<(Rational, MultiPoly)>,
        target: (usize, usize),
    ) -> Result<(ChamberSignature, MultiPoly)> {
        xs.sort_by(|a, b| b.0.cmp(&a.0));
        ys.sort_by(|a, b| b.0.cmp(&a.0));
        let sub = ConePoint::new(
            xs.iter().map(|e| e.0.clone()).collect(),
            ys.iter().map(|e| e.0.clone()).collect(),
        )?;
        let sig = signature_of(&sub)?;
        let poly = self.polynomial_of(&sig, &sub)?;
        let assignment: Vec<MultiPoly> = xs.into_iter().chain(ys).map(|e| e.1).collect();
        Ok((sig, poly.substitute_linear(&assignment, target)?))
    }

    /// `P_C` for the chamber `sig`, reached from the totally negative
    /// witness along a straight path to `witness`.
    pub fn chamber_polynomial(&self, sig: &ChamberSignature, witness: &ConePoint) -> Result<ChamberPolynomial> {
        if &signature_of(witness)? != sig {
            return Err(Error::MalformedSignature(format!(
                "witness {witness} is not in chamber {sig}"
            )));
        }
        Ok(ChamberPolynomial {
            signature: sig.clone(),
            witness: witness.clone(),
            poly: self.polynomial_of(sig, witness)?,
        })
    }

    fn polynomial_of(&self, sig: &ChamberSignature, witness: &ConePoint) -> Result<MultiPoly> {
        if let Some(p) = self.polys.lock().unwrap().get(sig) {
            return Ok(p.clone());
        }
        let (m, n) = (witness.m(), witness.n());
        if m + n > self.chamber_bound {
            return Err(Error::BudgetExceeded {
                what: "m + n for chamber synthesis",
                needed: (m + n) as u128,
                budget: self.chamber_bound as u128,
            });
        }
        let mut poly = tn_polynomial(m, n).canonicalize();
        for crossing in wall_path(&tn_witness(m, n), witness)? {
            let (positive, sign) = if crossing.to_sign > 0 {
                (&crossing.point_after, 1)
            } else {
                (&crossing.point_before, -1)
            };
            let delta = self.crossing_delta(&crossing.resonance, positive)?.delta;
            poly = if sign > 0 {
                poly.try_add(&delta)?
            } else {
                poly.try_sub(&delta)?
            };
        }
        self.polys.lock().unwrap().insert(sig.clone(), poly.clone());
        Ok(poly)
    }

    /// The chamber polynomial valid at a pair. Points on walls use the
    /// chamber reached by shifting `nu` off every wall.
    pub fn polynomial_for_pair(&self, pair: &HurwitzPair) -> Result<ChamberPolynomial> {
        let witness = generic_point(pair);
        let sig = signature_of(&witness)?;
        self.chamber_polynomial(&sig, &witness)
    }

    /// A number by one method.
    pub fn compute(&self, pair: &HurwitzPair, method: Method) -> Result<Rational> {
        Ok(self.evaluate(pair, method, false)?.value)
    }

    /// A number with its provenance; `with_polynomial` attaches the chamber
    /// polynomial.
    pub fn evaluate(&self, pair: &HurwitzPair, method: Method, with_polynomial: bool) -> Result<Evaluation> {
        let used = match method {
            Method::Auto if pair.m().min(pair.n()) <= 3 => Method::ClosedForm,
            Method::Auto => Method::Trees,
            other => other,
        };
        let value = match used {
            Method::Oracle => self.oracle.double_hurwitz(pair),
            Method::ClosedForm => closed_form(pair, ThreePartForm::Corrected)?,
            Method::ClosedFormLiteral => closed_form(pair, ThreePartForm::Literal)?,
            Method::Trees => self.trees.value(pair),
            Method::Chambers => {
                let cp = self.polynomial_for_pair(pair)?;
                cp.poly.eval(&ConePoint::from_pair(pair).coords())?
            }
            Method::Auto => unreachable!("resolved above"),
        };
        let signature = signature_of(&generic_point(pair))?.to_string();
        let polynomial = if with_polynomial {
            Some(self.polynomial_for_pair(pair)?.poly)
        } else {
            None
        };
        Ok(Evaluation {
            mu: pair.mu.parts().to_vec(),
            nu: pair.nu.parts().to_vec(),
            d: pair.d(),
            r: pair.r(),
            value,
            method: used,
            signature,
            polynomial,
        })
    }

    /// Every method in `config` on every pair with `d <= d_max`.
    pub fn verify_sweep(&self, config: &SweepConfig) -> SweepReport {
        let pairs: Vec<HurwitzPair> = HurwitzPair::all_up_to(config.d_max)
            .into_iter()
            .filter(|p| config.shapes.as_ref().is_none_or(|s| s.contains(&(p.m(), p.n()))))
            .collect();
        let rows: Vec<SweepRow> = pairs
            .par_iter()
            .map(|pair| {
                let mut values = BTreeMap::new();
                let mut skipped = Vec::new();
                let mut errors = Vec::new();
                for &method in &config.methods {
                    match self.compute(pair, method) {
                        Ok(v) => {
                            values.insert(method, v);
                        }
                        Err(Error::MethodInapplicable { .. } | Error::BudgetExceeded { .. }) => skipped.push(method),
                        Err(e) => errors.push((method, e.to_string())),
                    }
                }
                SweepRow {
                    pair: pair.clone(),
                    values,
                    skipped,
                    errors,
                }
            })
            .collect();
        let disagreements = rows
            .iter()
            .filter(|r| !r.errors.is_empty() || r.values.values().any(|v| Some(v) != r.values.values().next()))
            .map(|r| r.pair.clone())
            .collect();
        SweepReport {
            d_max: config.d_max,
            methods: config.methods.clone(),
            rows,
            disagreements,
        }
    }
}

/// `pair` itself, or `pair` with `nu` shifted off the walls it lies on.
pub fn generic_point(pair: &HurwitzPair) -> ConePoint {
    let mut p = ConePoint::from_pair(pair);
    if signature_of(&p).is_err() {
        for (y, e) in p.y.iter_mut().zip(wall_shift(pair.n(), pair.d())) {
            *y += e;
        }
    }
    p
}

/// The explicit formula for the smaller side, transposing when needed. The
/// printed form only exists for three parts, so it is used only there.
pub fn closed_form(pair: &HurwitzPair, form: ThreePartForm) -> Result<Rational> {
    let (m, n) = (pair.m(), pair.n());
    let transpose = match form {
        ThreePartForm::Corrected => n < m && n <= 3,
        ThreePartForm::Literal => m != 3 && n == 3,
    };
    let (a, b): (&Partition, &Partition) = if transpose {
        (&pair.nu, &pair.mu)
    } else {
        (&pair.mu, &pair.nu)
    };
    let p = a.parts();
    match (p.len(), form) {
        (1, ThreePartForm::Corrected) => one_part(pair.d(), b),
        (2, ThreePartForm::Corrected) => two_part(p[0], p[1], b),
        (3, _) => three_part(p[0], p[1], p[2], b, form),
        _ => Err(Error::MethodInapplicable {
            method: if form == ThreePartForm::Literal {
                "closed_form_literal"
            } else {
                "closed_form"
            },
            m,
            n,
        }),
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub d_max: u32,
    pub methods: Vec<Method>,
    /// Restrict to these `(m, n)`; `None` keeps all.
    pub shapes: Option<Vec<(usize, usize)>>,
}

impl SweepConfig {
    /// Every concrete method except the printed three-part formula.
    pub fn all_methods(d_max: u32) -> Self {
        SweepConfig {
            d_max,
            methods: vec![Method::Oracle, Method::ClosedForm, Method::Trees, Method::Chambers],
            shapes: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub pair: HurwitzPair,
    #[serde(serialize_with = "values_as_strings")]
    pub values: BTreeMap<Method, Rational>,
    pub skipped: Vec<Method>,
    pub errors: Vec<(Method, String)>,
}

fn values_as_strings<S: Serializer>(v: &BTreeMap<Method, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(v.iter().map(|(k, r)| (k.name(), r.to_string())))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub d_max: u32,
    pub methods: Vec<Method>,
    pub rows: Vec<SweepRow>,
    pub disagreements: Vec<HurwitzPair>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn shared() -> &'static Engine {
    static ENGINE: OnceLock<Engine> = OnceLock::new();
    ENGINE.get_or_init(Engine::new)
}

pub fn compute(pair: &HurwitzPair, method: Method) -> Result<Rational> {
    shared().compute(pair, method)
}

pub fn chamber_polynomial(sig: &ChamberSignature, witness: &ConePoint) -> Result<ChamberPolynomial> {
    shared().chamber_polynomial(sig, witness)
}

pub fn crossing_delta(res: &Resonance, point: &ConePoint) -> Result<CrossingDelta> {
    shared().crossing_delta(res, point)
}

pub fn verify_sweep(config: &SweepConfig) -> SweepReport {
    shared().verify_sweep(config)
}

/// Whether two polynomials agree on `sum x = sum y`.
pub fn same_on_cone(a: &MultiPoly, b: &MultiPoly) -> bool {
    a.try_sub(b).map(|d| d.canonicalize().is_zero()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chambers::{enumerate_chambers, list_resonances};
    use crate::kernel::rat;

    fn pair(a: &str, b: &str) -> HurwitzPair {
        HurwitzPair::parse(a, b).unwrap()
    }

    fn pt(x: &[i64], y: &[i64]) -> ConePoint {
        ConePoint::from_ints(x, y).unwrap()
    }

    #[test]
    fn delta_for_two_two() {
        let e = Engine::new();
        let res = list_resonances(2, 2)[1];
        let d = e.crossing_delta(&res, &pt(&[2, 2], &[3, 1])).unwrap();
        let expected = res.linear_form(2, 2).scale(&rat(2)).canonicalize();
        assert_eq!(d.delta, expected);
        assert!(e.crossing_delta(&res, &pt(&[3, 1], &[3, 1])).is_err());
    }

    #[test]
    fn delta_matches_oracle_difference() {
        // (3,2;2,2,1) has x2 > y3; compare with the chamber across that wall
        let e = Engine::new();
        // the point also lies on x2 = y1, so the chambers come from a shifted copy
        let p = pt(&[3, 2], &[2, 2, 1]);
        let g = generic_point(&pair("3,2", "2,2,1"));
        let res = Resonance::new(2, 3, crate::IndexSet::singleton(1), crate::IndexSet::singleton(2)).unwrap();
        let d = e.crossing_delta(&res, &g).unwrap();
        let other_sig = signature_of(&g).unwrap().flipped(res.position(3));
        let other = crate::chambers::feasible_point(&other_sig).unwrap();
        let p_other = e.chamber_polynomial(&other_sig, &other).unwrap().poly;
        let at = p.coords();
        let lhs = d.delta.eval(&at).unwrap();
        let rhs = e.oracle().double_hurwitz(&pair("3,2", "2,2,1")) - p_other.eval(&at).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn chamber_polynomial_examples() {
        let e = Engine::new();
        let tn = crate::chambers::tn_signature(2, 2);
        let w = tn_witness(2, 2);
        assert_eq!(
            e.chamber_polynomial(&tn, &w).unwrap().poly,
            tn_polynomial(2, 2).canonicalize()
        );
        let sig = ChamberSignature::parse(2, 2, "-+").unwrap();
        let cp = e.chamber_polynomial(&sig, &pt(&[2, 2], &[3, 1])).unwrap();
        let expected = MultiPoly::x(2, 2, 0)
            .scale(&rat(2))
            .try_add(&list_resonances(2, 2)[1].linear_form(2, 2).scale(&rat(2)))
            .unwrap()
            .canonicalize();
        assert_eq!(cp.poly, expected);
        assert_eq!(cp.poly.eval(&pt(&[2, 2], &[3, 1]).coords()).unwrap(), rat(6));
        let one = e.polynomial_for_pair(&pair("5", "2,2,1")).unwrap();
        assert_eq!(one.poly, tn_polynomial(1, 3));
        assert!(e.chamber_polynomial(&sig, &w).is_err());
    }

    #[test]
    fn compute_examples() {
        let e = Engine::new();
        for (a, b, v) in [("3,1", "3,1", 6), ("2,1,1", "3,1", 54)] {
            for m in Method::ALL.into_iter().filter(|&m| m != Method::ClosedFormLiteral) {
                assert_eq!(e.compute(&pair(a, b), m).unwrap(), rat(v), "{a};{b} {m}");
            }
        }
        let p = pair("4,2,1", "5,2");
        let v = e.compute(&p, Method::Oracle).unwrap();
        for m in [Method::Auto, Method::Trees, Method::Chambers, Method::ClosedForm] {
            assert_eq!(e.compute(&p, m).unwrap(), v);
        }
        assert!(matches!(
            e.compute(&pair("1,1,1,1", "1,1,1,1"), Method::ClosedForm),
            Err(Error::MethodInapplicable { .. })
        ));
        assert_eq!(
            e.evaluate(&pair("4,1,1,1", "2,2,2,1"), Method::Auto, false)
                .unwrap()
                .method,
            Method::Trees
        );
    }

    #[test]
    fn methods_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("closed-form".parse::<Method>().unwrap(), Method::ClosedForm);
        assert!("fourier".parse::<Method>().is_err());
    }

    #[test]
    fn sweep_examples() {
        let e = Engine::new();
        let one = e.verify_sweep(&SweepConfig::all_methods(1));
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.rows[0].values[&Method::Oracle], rat(1));
        assert!(one.passed());

        let five = e.verify_sweep(&SweepConfig::all_methods(5));
        for r in five.rows.iter().filter(|r| five.disagreements.contains(&r.pair)) {
            eprintln!("{} {:?} {:?}", r.pair, r.values, r.errors);
        }
        assert!(five.passed());

        let literal = e.verify_sweep(&SweepConfig {
            d_max: 4,
            methods: vec![Method::ClosedFormLiteral, Method::Oracle],
            shapes: None,
        });
        assert!(literal.disagreements.contains(&pair("2,1,1", "3,1")));
    }

    #[test]
    fn totally_negative_chamber_has_closed_form() {
        let e = Engine::new();
        for m in 1..=4 {
            for n in 1..=(7 - m) {
                let tn = crate::chambers::tn_signature(m, n);
                let poly = e.chamber_polynomial(&tn, &tn_witness(m, n)).unwrap().poly;
                assert!(same_on_cone(&poly, &tn_polynomial(m, n)), "{m},{n}");
            }
        }
        assert_eq!(e.compute(&pair("3,1", "2,2"), Method::Chambers).unwrap(), rat(6));
    }

    #[test]
    fn path_independence() {
        let e = Engine::new();
        for (m, n) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            for ch in enumerate_chambers(m, n).unwrap() {
                let fresh = || Engine::new();
                let base = e.chamber_polynomial(&ch.signature, &ch.witness).unwrap().poly;
                // other witnesses: scaled and nudged copies inside the chamber
                for k in [2i64, 3] {
                    let w = ConePoint {
                        x: ch.witness.x.iter().map(|v| v * rat(k)).collect(),
                        y: ch.witness.y.iter().map(|v| v * rat(k)).collect(),
                    };
                    let p = fresh().chamber_polynomial(&ch.signature, &w).unwrap().poly;
                    assert_eq!(p, base, "{m},{n} {}", ch.signature);
                }
                let hom = base.is_homogeneous_of(m as i64 + n as i64 - 3);
                assert!(hom || base.is_zero());
            }
        }
    }
}
