//! Deciding which finite abelian groups occur as groups of rational points in
//! an isogeny class of abelian surfaces, and enumerating all of them.
//!
//! The test is local: a group `G` of order `f(1)` occurs iff for every prime
//! `ℓ` its ℓ-part passes the condition attached to the factorization shape
//! of `f`:
//!
//! * case 1 (square-free): `NP_ℓ(f(1−t))` lies on or above `HP_ℓ(G_ℓ)`;
//! * case 2 (`f = P²`): `G_ℓ` splits into two groups of rank ≤ 2, each with
//!   Hodge polygon under `NP_ℓ(P(1−t))`;
//! * case 3 (`f = P·(t ± √q)²`): three inequalities in `m₁..m₄`, `m`, `m_q`,
//!   `m_b`, see [`decide_case3`];
//! * case 4 (`f = (t ± √q)⁴`): only `(ℤ/(1 ± √q))⁴`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::abgroup::{
    assemble_from_primary, format_tuple, int_to_json, partitions_with_slots, primary_part,
    FiniteAbelianGroup, HodgeVector, SURFACE_SLOTS,
};
use crate::error::{internal, invalid, Error, Result};
use crate::numeric::{factorize, int, ord_nonzero, ord_unchecked, Integer, Valuation};
use crate::polygon::{hodge_polygon, lies_on_or_above, newton_polygon, NewtonPolygon};
use crate::polynomial::{detect_shape, trace_of_quadratic, IntPolynomial, IsogenyShape, Sign, WeilPolynomial};

/// Per-prime quantities for `f = (t² − b·t + q)(t + σs)²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case3Data {
    pub b: Integer,
    pub sign: Sign,
    pub s: Integer,
    pub ell: Integer,
    /// `ord_ℓ` of the quadratic factor at 1.
    pub m: u64,
    /// `ord_ℓ(1 + σs)`.
    pub m_q: u64,
    /// `ord_ℓ(b − 2)`, infinite when `b = 2`.
    pub ord_b_minus_2: Valuation,
}

impl Case3Data {
    pub fn new(p: &IntPolynomial, sign: Sign, s: &Integer, ell: &Integer) -> Result<Self> {
        let b = trace_of_quadratic(p);
        let p1 = p.eval(&Integer::one());
        let alpha = Integer::one() + sign.apply(s);
        if p1 == int(0) || alpha == int(0) {
            return Err(invalid("f(1) must be nonzero"));
        }
        Ok(Case3Data {
            m: ord_nonzero(ell, &p1),
            m_q: ord_nonzero(ell, &alpha),
            ord_b_minus_2: ord_unchecked(ell, &(&b - int(2))),
            b,
            sign,
            s: s.clone(),
            ell: ell.clone(),
        })
    }

    /// `α = 1 + σs`, the eigenvalue of `1 − F` on the square factor.
    pub fn alpha(&self) -> Integer {
        Integer::one() + self.sign.apply(&self.s)
    }

    /// `m_b = m₁ + m₃ − m_q` (may be negative).
    pub fn m_b(&self, hv: &[u64]) -> i64 {
        hv[0] as i64 + hv[2] as i64 - self.m_q as i64
    }

    /// Expected `Σ mᵢ`.
    pub fn total(&self) -> u64 {
        self.m + 2 * self.m_q
    }
}

/// Outcome of the three case-3 inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case3Conditions {
    /// `0 ≤ m_b ≤ ord_ℓ(b − 2)`
    pub a: bool,
    /// `min(m_b, m_q) ≥ m₁`
    pub b: bool,
    /// `min(m − m_b, m_q) ≥ m₂`
    pub c: bool,
}

impl Case3Conditions {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c
    }

    fn failed(&self) -> String {
        [(self.a, "(a)"), (self.b, "(b)"), (self.c, "(c)")]
            .iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, n)| *n)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A split of a case-2 vector into two rank-2 pieces `(a₁ ≤ b₁)`, `(a₂ ≤ b₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Case2Split {
    pub first: (u64, u64),
    pub second: (u64, u64),
}

impl fmt::Display for Case2Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{({},{}),({},{})}}",
            self.first.0, self.first.1, self.second.0, self.second.1
        )
    }
}

fn check_slots(hv: &HodgeVector) -> Result<()> {
    if hv.slots() != SURFACE_SLOTS {
        return Err(invalid(format!("expected {SURFACE_SLOTS} slots, got {}", hv.slots())));
    }
    Ok(())
}

/// Case 1: `np` is the Newton polygon of `f(1 − t)` at `ℓ`.
pub fn decide_case1(np: &NewtonPolygon, hv: &HodgeVector) -> Result<bool> {
    check_slots(hv)?;
    let expected = np.vertices_start();
    if hv.total() as i64 != expected {
        return Err(invalid(format!(
            "vector total {} differs from ord f(1) = {expected}",
            hv.total()
        )));
    }
    lies_on_or_above(np, &hodge_polygon(&hv.exponents)?)
}

trait StartHeight {
    fn vertices_start(&self) -> i64;
}

impl StartHeight for NewtonPolygon {
    fn vertices_start(&self) -> i64 {
        use crate::polygon::ConvexPolygon;
        self.vertices()[0].1
    }
}

/// Case 2: tries every split of the four exponents into two pairs. Each pair
/// must sum to `ord_ℓ P(1)` and have its rank-2 Hodge polygon under
/// `NP_ℓ(P(1 − t))`. Returns the first split that works.
pub fn decide_case2(p: &IntPolynomial, ell: &Integer, hv: &HodgeVector) -> Result<Option<Case2Split>> {
    check_slots(hv)?;
    let np = newton_polygon(&p.substitute_one_minus_t(), ell)?;
    decide_case2_with(&np, hv)
}

fn decide_case2_with(np: &NewtonPolygon, hv: &HodgeVector) -> Result<Option<Case2Split>> {
    let total = hv.total();
    if total % 2 != 0 {
        return Err(invalid(format!("odd total {total} cannot occur in case 2")));
    }
    let half = np.vertices_start() as u64;
    if total != 2 * half {
        return Err(invalid(format!(
            "vector total {total} differs from 2·ord P(1) = {}",
            2 * half
        )));
    }
    let m = &hv.exponents;
    let pairings = [
        ((m[0], m[1]), (m[2], m[3])),
        ((m[0], m[2]), (m[1], m[3])),
        ((m[0], m[3]), (m[1], m[2])),
    ];
    for (x, y) in pairings {
        let ok = |(a, b): (u64, u64)| -> Result<bool> {
            if a + b != half {
                return Ok(false);
            }
            lies_on_or_above(np, &hodge_polygon(&[a.min(b), a.max(b)])?)
        };
        if ok(x)? && ok(y)? {
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            return Ok(Some(Case2Split { first: x, second: y }));
        }
    }
    Ok(None)
}

pub fn case3_conditions(data: &Case3Data, hv: &HodgeVector) -> Result<Case3Conditions> {
    check_slots(hv)?;
    if hv.total() != data.total() {
        return Err(invalid(format!(
            "vector total {} differs from m + 2·m_q = {}",
            hv.total(),
            data.total()
        )));
    }
    let m = &hv.exponents;
    let mb = data.m_b(m);
    let (m1, m2) = (m[0] as i64, m[1] as i64);
    let (mm, mq) = (data.m as i64, data.m_q as i64);
    let a = mb >= 0 && Valuation::Finite(mb as u64) <= data.ord_b_minus_2;
    let b = mb.min(mq) >= m1;
    let c = (mm - mb).min(mq) >= m2;
    Ok(Case3Conditions { a, b, c })
}

/// Case 3: `(a) 0 ≤ m_b ≤ ord_ℓ(b−2)`, `(b) min(m_b, m_q) ≥ m₁`,
/// `(c) min(m − m_b, m_q) ≥ m₂`.
pub fn decide_case3(data: &Case3Data, hv: &HodgeVector) -> Result<bool> {
    Ok(case3_conditions(data, hv)?.all())
}

/// `N = |1 + σ√q|`; the only group is `(ℤ/N)⁴`.
pub fn case4_cyclic_order(q: &Integer, sign: Sign) -> Result<Integer> {
    let s = crate::numeric::integer_sqrt_exact(q)?
        .ok_or_else(|| invalid(format!("{q} is not a perfect square")))?;
    Ok((Integer::one() + sign.apply(&s)).abs())
}

pub fn decide_case4(q: &Integer, sign: Sign, g: &FiniteAbelianGroup) -> Result<bool> {
    let n = case4_cyclic_order(q, sign)?;
    let inv = g.invariants();
    Ok(inv.len() == SURFACE_SLOTS && inv.iter().all(|d| *d == n))
}

/// Why a group was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    OrderMismatch { expected: Integer, actual: Integer },
    TooManyGenerators { ell: Integer, needed: usize },
    CaseCondition {
        case: u8,
        ell: Option<Integer>,
        vector: Option<Vec<u64>>,
        detail: String,
    },
}

impl Rejection {
    pub fn code(&self) -> String {
        match self {
            Rejection::OrderMismatch { .. } => "order-mismatch".into(),
            Rejection::TooManyGenerators { .. } => "too-many-generators".into(),
            Rejection::CaseCondition { case, .. } => format!("case-{case}-condition"),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Rejection::OrderMismatch { expected, actual } => json!({
                "code": self.code(),
                "expected": int_to_json(expected),
                "actual": int_to_json(actual),
            }),
            Rejection::TooManyGenerators { ell, needed } => json!({
                "code": self.code(),
                "ell": int_to_json(ell),
                "generators": needed,
            }),
            Rejection::CaseCondition { ell, vector, detail, .. } => json!({
                "code": self.code(),
                "ell": ell.as_ref().map(int_to_json),
                "vector": vector,
                "detail": detail,
            }),
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::OrderMismatch { expected, actual } => {
                write!(f, "order-mismatch (group order {actual}, f(1) = {expected})")
            }
            Rejection::TooManyGenerators { ell, needed } => {
                write!(f, "too-many-generators ({ell}-part needs {needed} generators)")
            }
            Rejection::CaseCondition { ell, vector, detail, .. } => {
                write!(f, "{}", self.code())?;
                if let Some(ell) = ell {
                    write!(f, " ell={ell}")?;
                }
                if let Some(v) = vector {
                    write!(f, " vector={}", format_tuple(v))?;
                }
                if !detail.is_empty() {
                    write!(f, " {detail}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No(Rejection),
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }
}

/// Admissible ℓ-parts for one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeDetail {
    pub ell: Integer,
    /// Lexicographically sorted.
    pub admissible: Vec<HodgeVector>,
    /// Case 2 only: a witnessing split for each admissible vector.
    pub splittings: Vec<(HodgeVector, Case2Split)>,
}

impl PrimeDetail {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "ell": int_to_json(&self.ell),
            "admissible": self.admissible.iter().map(|h| json!(h.exponents)).collect::<Vec<_>>(),
        });
        if !self.splittings.is_empty() {
            v["splittings"] = self
                .splittings
                .iter()
                .map(|(h, s)| {
                    json!({
                        "vector": h.exponents,
                        "split": [[s.first.0, s.first.1], [s.second.0, s.second.1]],
                    })
                })
                .collect();
        }
        v
    }
}

/// Everything the classification produces for one Weil polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationResult {
    pub weil: WeilPolynomial,
    pub shape: IsogenyShape,
    pub order: Integer,
    /// Canonically sorted, cyclic groups first.
    pub groups: Vec<FiniteAbelianGroup>,
    pub per_prime: BTreeMap<Integer, PrimeDetail>,
}

/// Per-prime decider state, built once per `(f, ℓ)`.
enum LocalTest {
    Case1(NewtonPolygon),
    Case2(NewtonPolygon),
    Case3(Case3Data),
    Case4 { sign: Sign, s: Integer },
}

impl LocalTest {
    fn new(f: &WeilPolynomial, shape: &IsogenyShape, ell: &Integer) -> Result<Self> {
        Ok(match shape {
            IsogenyShape::Case1 { .. } => {
                LocalTest::Case1(newton_polygon(&f.poly().substitute_one_minus_t(), ell)?)
            }
            IsogenyShape::Case2 { p } => {
                LocalTest::Case2(newton_polygon(&p.substitute_one_minus_t(), ell)?)
            }
            IsogenyShape::Case3 { p, sign, s } => LocalTest::Case3(Case3Data::new(p, *sign, s, ell)?),
            IsogenyShape::Case4 { sign, s } => LocalTest::Case4 {
                sign: *sign,
                s: s.clone(),
            },
        })
    }

    /// `Ok(None)` when admissible (with a case-2 split if any), otherwise the
    /// failure detail.
    fn check(&self, hv: &HodgeVector) -> Result<std::result::Result<Option<Case2Split>, String>> {
        Ok(match self {
            LocalTest::Case1(np) => {
                if decide_case1(np, hv)? {
                    Ok(None)
                } else {
                    Err("Newton polygon of f(1-t) lies below the Hodge polygon".into())
                }
            }
            LocalTest::Case2(np) => match decide_case2_with(np, hv)? {
                Some(split) => Ok(Some(split)),
                None => Err("no split into two pairs under the Newton polygon of P(1-t)".into()),
            },
            LocalTest::Case3(data) => {
                let c = case3_conditions(data, hv)?;
                if c.all() {
                    Ok(None)
                } else {
                    Err(format!("failed={}", c.failed()))
                }
            }
            LocalTest::Case4 { sign, s } => {
                let alpha = Integer::one() + sign.apply(s);
                let k = ord_nonzero(&hv.ell, &alpha);
                if hv.exponents.iter().all(|&e| e == k) {
                    Ok(None)
                } else {
                    Err(format!("expected ({k},{k},{k},{k})"))
                }
            }
        })
    }
}

/// Admissible ℓ-parts of groups of points for a single prime `ℓ | f(1)`.
pub fn admissible_at_prime(f: &WeilPolynomial, shape: &IsogenyShape, ell: &Integer) -> Result<PrimeDetail> {
    let e = ord_nonzero(ell, &f.value_at_one());
    let test = LocalTest::new(f, shape, ell)?;
    let mut admissible = Vec::new();
    let mut splittings = Vec::new();
    for exps in partitions_with_slots(e, SURFACE_SLOTS) {
        let hv = HodgeVector::new(ell.clone(), exps);
        if let Ok(split) = test.check(&hv)? {
            if let Some(s) = split {
                splittings.push((hv.clone(), s));
            }
            admissible.push(hv);
        }
    }
    Ok(PrimeDetail {
        ell: ell.clone(),
        admissible,
        splittings,
    })
}

/// Membership test for a single group.
pub fn decide_group(f: &WeilPolynomial, g: &FiniteAbelianGroup) -> Result<Verdict> {
    let order = f.value_at_one();
    if g.order() != order {
        return Ok(Verdict::No(Rejection::OrderMismatch {
            expected: order,
            actual: g.order(),
        }));
    }
    let primes: Vec<Integer> = factorize(&order)?.primes().cloned().collect();
    let mut parts = Vec::with_capacity(primes.len());
    for ell in &primes {
        match primary_part(g, ell, SURFACE_SLOTS) {
            Ok(hv) => parts.push(hv),
            Err(Error::TooManyGenerators(_)) => {
                let needed = g.invariants().iter().filter(|d| ord_nonzero(ell, d) > 0).count();
                return Ok(Verdict::No(Rejection::TooManyGenerators {
                    ell: ell.clone(),
                    needed,
                }));
            }
            Err(e) => return Err(e),
        }
    }
    let shape = detect_shape(f)?;
    if let IsogenyShape::Case4 { sign, .. } = &shape {
        return Ok(if decide_case4(&f.q, *sign, g)? {
            Verdict::Yes
        } else {
            Verdict::No(Rejection::CaseCondition {
                case: 4,
                ell: None,
                vector: None,
                detail: format!("only (Z/{})^4 occurs", case4_cyclic_order(&f.q, *sign)?),
            })
        });
    }
    for hv in parts {
        let test = LocalTest::new(f, &shape, &hv.ell)?;
        if let Err(detail) = test.check(&hv)? {
            return Ok(Verdict::No(Rejection::CaseCondition {
                case: shape.case_number(),
                ell: Some(hv.ell.clone()),
                vector: Some(hv.exponents.clone()),
                detail,
            }));
        }
    }
    Ok(Verdict::Yes)
}

/// All groups of points in the isogeny class, with per-prime detail.
pub fn enumerate_groups(f: &WeilPolynomial) -> Result<ClassificationResult> {
    let shape = detect_shape(f)?;
    let order = f.value_at_one();
    let primes: Vec<Integer> = factorize(&order)?.primes().cloned().collect();

    let details: Vec<PrimeDetail> = primes
        .par_iter()
        .map(|ell| admissible_at_prime(f, &shape, ell))
        .collect::<Result<Vec<_>>>()?;
    for d in &details {
        if d.admissible.is_empty() {
            return Err(internal(format!("no admissible {}-part for {f}", d.ell)));
        }
    }

    let groups = if let IsogenyShape::Case4 { sign, .. } = &shape {
        let n = case4_cyclic_order(&f.q, *sign)?;
        vec![FiniteAbelianGroup::from_cyclic_orders(&vec![n; SURFACE_SLOTS])?]
    } else {
        let mut combos: Vec<Vec<HodgeVector>> = vec![Vec::new()];
        for d in &details {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    d.admissible.iter().map(move |hv| {
                        let mut next = prefix.clone();
                        next.push(hv.clone());
                        next
                    })
                })
                .collect();
        }
        let mut groups = combos
            .iter()
            .map(|parts| assemble_from_primary(parts))
            .collect::<Result<Vec<_>>>()?;
        groups.sort();
        groups.dedup();
        groups
    };
    if groups.is_empty() {
        return Err(internal("classification produced no groups"));
    }
    for g in &groups {
        if g.order() != order {
            return Err(internal(format!("group {g} has the wrong order")));
        }
    }
    Ok(ClassificationResult {
        weil: f.clone(),
        shape,
        order,
        groups,
        per_prime: details.into_iter().map(|d| (d.ell.clone(), d)).collect(),
    })
}

impl ClassificationResult {
    pub fn to_json(&self) -> Value {
        json!({
            "q": int_to_json(&self.weil.q),
            "poly": self.weil.descending().iter().map(int_to_json).collect::<Vec<_>>(),
            "case": self.shape.case_number(),
            "order": int_to_json(&self.order),
            "groups": self.groups.iter().map(FiniteAbelianGroup::to_json).collect::<Vec<_>>(),
            "per_prime": self.per_prime.values().map(PrimeDetail::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Exponent of `ℓ` in `f(1)` as a small integer.
pub fn local_total(f: &WeilPolynomial, ell: &Integer) -> u64 {
    ord_nonzero(ell, &f.value_at_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abgroup::parse_group;
    use crate::polynomial::validate_weil;

    fn weil(q: i64, desc: &[i64]) -> WeilPolynomial {
        let coeffs: Vec<Integer> = desc.iter().map(|&c| int(c)).collect();
        validate_weil(&int(q), &coeffs).unwrap()
    }

    fn hv(l: i64, e: &[u64]) -> HodgeVector {
        HodgeVector::new(int(l), e.to_vec())
    }

    fn groups(w: &WeilPolynomial) -> Vec<String> {
        enumerate_groups(w)
            .unwrap()
            .groups
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    #[test]
    fn case1_examples() {
        let f = IntPolynomial::from_i64(&[4, 0, 3, 0, 1]).substitute_one_minus_t();
        let np = newton_polygon(&f, &int(2)).unwrap();
        assert!(decide_case1(&np, &hv(2, &[0, 0, 0, 3])).unwrap());
        assert!(decide_case1(&np, &hv(2, &[0, 0, 1, 2])).unwrap());
        assert!(!decide_case1(&np, &hv(2, &[0, 1, 1, 1])).unwrap());
        assert!(decide_case1(&np, &hv(2, &[0, 0, 1, 1])).is_err());
        assert!(decide_case1(&np, &hv(2, &[0, 3])).is_err());
    }

    #[test]
    fn case2_examples() {
        let p = IntPolynomial::from_i64(&[2, 1, 1]);
        let split = decide_case2(&p, &int(2), &hv(2, &[0, 0, 2, 2])).unwrap();
        assert_eq!(
            split,
            Some(Case2Split {
                first: (0, 2),
                second: (0, 2)
            })
        );
        assert_eq!(decide_case2(&p, &int(2), &hv(2, &[0, 1, 1, 2])).unwrap(), None);
        assert_eq!(decide_case2(&p, &int(2), &hv(2, &[1, 1, 1, 1])).unwrap(), None);
        assert!(decide_case2(&p, &int(2), &hv(2, &[0, 0, 0, 3])).is_err());
    }

    #[test]
    fn case3_examples() {
        let p = IntPolynomial::from_i64(&[4, -1, 1]);
        let d2 = Case3Data::new(&p, Sign::Plus, &int(2), &int(2)).unwrap();
        assert_eq!((d2.m, d2.m_q, d2.ord_b_minus_2), (2, 0, Valuation::Finite(0)));
        assert!(decide_case3(&d2, &hv(2, &[0, 0, 0, 2])).unwrap());
        assert!(!decide_case3(&d2, &hv(2, &[0, 0, 1, 1])).unwrap());

        let d3 = Case3Data::new(&p, Sign::Plus, &int(2), &int(3)).unwrap();
        assert_eq!((d3.m, d3.m_q), (0, 1));
        assert!(decide_case3(&d3, &hv(3, &[0, 0, 1, 1])).unwrap());
        let c = case3_conditions(&d3, &hv(3, &[0, 0, 0, 2])).unwrap();
        assert!(!c.a);
        assert!(decide_case3(&d3, &hv(3, &[0, 0, 0, 3])).is_err());
    }

    #[test]
    fn case3_with_b_equal_two_is_vacuous_in_a() {
        // P = t^2 - 2t + 4, q = 4: ord(b - 2) is infinite
        let p = IntPolynomial::from_i64(&[4, -2, 1]);
        let d = Case3Data::new(&p, Sign::Plus, &int(2), &int(3)).unwrap();
        assert_eq!(d.ord_b_minus_2, Valuation::Infinite);
        assert_eq!(d.m, 1);
        // total = m + 2 m_q = 3
        let c = case3_conditions(&d, &hv(3, &[0, 1, 1, 1])).unwrap();
        assert!(c.a);
    }

    #[test]
    fn case4_examples() {
        assert!(decide_case4(&int(4), Sign::Plus, &parse_group("3,3,3,3").unwrap()).unwrap());
        assert!(decide_case4(&int(9), Sign::Minus, &parse_group("2,2,2,2").unwrap()).unwrap());
        assert!(!decide_case4(&int(4), Sign::Plus, &parse_group("9,9").unwrap()).unwrap());
        assert!(decide_case4(&int(8), Sign::Plus, &parse_group("1").unwrap()).is_err());
    }

    #[test]
    fn decide_group_examples() {
        let c1 = weil(2, &[1, 0, 3, 0, 4]);
        assert!(decide_group(&c1, &parse_group("8").unwrap()).unwrap().is_yes());
        let no = decide_group(&c1, &parse_group("2,2,2").unwrap()).unwrap();
        assert!(matches!(&no, Verdict::No(Rejection::CaseCondition { case: 1, .. })));
        assert!(matches!(
            decide_group(&c1, &parse_group("9").unwrap()).unwrap(),
            Verdict::No(Rejection::OrderMismatch { .. })
        ));

        let c3 = weil(4, &[1, 3, 4, 12, 16]);
        assert!(decide_group(&c3, &parse_group("3,12").unwrap()).unwrap().is_yes());
        match decide_group(&c3, &parse_group("36").unwrap()).unwrap() {
            Verdict::No(Rejection::CaseCondition { case, ell, vector, detail }) => {
                assert_eq!(case, 3);
                assert_eq!(ell, Some(int(3)));
                assert_eq!(vector, Some(vec![0, 0, 0, 2]));
                assert!(detail.contains("(a)"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_many_generators_is_rejected_early() {
        // q = 9, (t - 3)^4: f(1) = 16; (Z/2)^4 is the answer, (Z/2)^2 + Z/4 fails
        let c4 = weil(9, &[1, -12, 54, -108, 81]);
        assert!(decide_group(&c4, &parse_group("2,2,2,2").unwrap()).unwrap().is_yes());
        assert!(!decide_group(&c4, &parse_group("2,2,4").unwrap()).unwrap().is_yes());
        // a class with f(1) = 32 and a 5-generator group
        let w = enumerate_groups(&weil(2, &[1, 2, 5, 4, 4])).unwrap();
        assert_eq!(w.order, int(16));
        let five = parse_group("2,2,2,2,2").unwrap();
        let w32 = (1..=20)
            .flat_map(|a2| (-5..=5).map(move |a1| (a1, a2)))
            .map(|(a1, a2)| validate_weil(&int(7), &[int(1), int(a1), int(a2), int(7 * a1), int(49)]))
            .filter_map(|r| r.ok())
            .find(|w| w.value_at_one() == int(32));
        if let Some(w32) = w32 {
            assert!(matches!(
                decide_group(&w32, &five).unwrap(),
                Verdict::No(Rejection::TooManyGenerators { needed: 5, .. })
            ));
        }
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(groups(&weil(2, &[1, 0, 3, 0, 4])), vec!["8", "2,4"]);
        assert_eq!(groups(&weil(2, &[1, 2, 5, 4, 4])), vec!["4,4"]);
        assert_eq!(groups(&weil(4, &[1, 3, 4, 12, 16])), vec!["3,12"]);
        assert_eq!(groups(&weil(4, &[1, 8, 24, 32, 16])), vec!["3,3,3,3"]);
        assert_eq!(groups(&weil(9, &[1, -12, 54, -108, 81])), vec!["2,2,2,2"]);
    }

    #[test]
    fn case2_detail_carries_splittings() {
        let r = enumerate_groups(&weil(2, &[1, 2, 5, 4, 4])).unwrap();
        let d = &r.per_prime[&int(2)];
        assert_eq!(d.admissible, vec![hv(2, &[0, 0, 2, 2])]);
        assert_eq!(d.splittings.len(), 1);
    }

    #[test]
    fn decide_agrees_with_enumeration_on_small_classes() {
        for q in [2i64, 3, 4, 5] {
            for w in crate::polynomial::weil_polynomials_for(&int(q)).unwrap() {
                let r = enumerate_groups(&w).unwrap();
                let e: u64 = r.per_prime.keys().map(|l| local_total(&w, l)).sum();
                // every group of order f(1) with at most 4 generators per prime
                let mut candidates: Vec<Vec<HodgeVector>> = vec![Vec::new()];
                for l in r.per_prime.keys() {
                    let t = local_total(&w, l);
                    candidates = candidates
                        .into_iter()
                        .flat_map(|pre| {
                            partitions_with_slots(t, 4).into_iter().map(move |ex| {
                                let mut v = pre.clone();
                                v.push(HodgeVector::new(l.clone(), ex));
                                v
                            })
                        })
                        .collect();
                }
                assert!(e > 0 || candidates.len() == 1);
                for c in candidates {
                    let g = assemble_from_primary(&c).unwrap();
                    let yes = decide_group(&w, &g).unwrap().is_yes();
                    assert_eq!(yes, r.groups.contains(&g), "{w} {g}");
                }
            }
        }
    }

    #[test]
    fn case1_at_characteristic_keeps_unit_root_slopes_flat() {
        for q in [2i64, 3, 4, 5, 7, 8, 9] {
            for w in crate::polynomial::weil_polynomials_for(&int(q)).unwrap() {
                let shape = detect_shape(&w).unwrap();
                if shape.case_number() != 1 || !(w.value_at_one() % &w.p == int(0)) {
                    continue;
                }
                let np = newton_polygon(&w.poly().substitute_one_minus_t(), &w.p).unwrap();
                let nonzero: u64 = crate::polygon::slope_multiset(&np)
                    .iter()
                    .filter(|(s, _)| *s != crate::numeric::Rational::from_integer(int(0)))
                    .map(|(_, m)| *m)
                    .sum();
                let d = admissible_at_prime(&w, &shape, &w.p).unwrap();
                for h in d.admissible {
                    let k = h.exponents.iter().filter(|&&e| e > 0).count() as u64;
                    assert!(k <= nonzero, "{w}: {:?}", h.exponents);
                }
            }
        }
    }
}
