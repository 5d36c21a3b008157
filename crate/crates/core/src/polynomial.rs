//! Integer polynomials, validation of degree-4 Weil polynomials, and detection
//! of the four factorization shapes an isogeny class of surfaces can have.

use std::fmt;

use num_integer::{Integer as _, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{internal, invalid, Error, Result};
use crate::numeric::{int, integer_sqrt_exact, prime_power_decompose, Integer};

/// Polynomial with integer coefficients, stored in ascending degree.
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    /// Builds from coefficients listed highest degree first.
    pub fn from_descending(coeffs: &[Integer]) -> Self {
        Self::new(coeffs.iter().rev().cloned().collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Integer::one())
    }

    pub fn constant(c: Integer) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// `t + c`.
    pub fn linear(c: Integer) -> Self {
        Self::new(vec![c, Integer::one()])
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Coefficient of `tⁱ` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_else(Integer::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        self.coeffs
            .iter()
            .rev()
            .fold(Integer::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    /// `g(t) = f(1 − t)`.
    pub fn substitute_one_minus_t(&self) -> Self {
        let one_minus_t = Self::from_i64(&[1, -1]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &one_minus_t) + &Self::constant(c.clone()))
    }

    pub fn scale(&self, k: &Integer) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// gcd of the coefficients (nonnegative).
    pub fn content(&self) -> Integer {
        self.coeffs
            .iter()
            .fold(Integer::zero(), |acc, c| acc.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.leading().is_some_and(Signed::is_negative) {
            c = -c;
        }
        Self::new(self.coeffs.iter().map(|x| x / &c).collect())
    }

    /// Division by a monic divisor; returns `(quotient, remainder)`.
    pub fn div_rem_monic(&self, divisor: &Self) -> Result<(Self, Self)> {
        if !divisor.is_monic() {
            return Err(invalid("divisor must be monic"));
        }
        let d = divisor.degree().unwrap_or(0);
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Integer::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = rem[k + d].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * dc;
            }
            quot[k] = c;
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Pseudo-remainder: `lc(b)^(deg a − deg b + 1) · a mod b`.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree().expect("nonzero divisor");
        let lb = b.leading().unwrap().clone();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading().unwrap().clone();
            let shift = dr - db;
            let mut coeffs: Vec<Integer> = r.coeffs.iter().map(|c| c * &lb).collect();
            for (j, bc) in b.coeffs.iter().enumerate() {
                coeffs[j + shift] -= &lr * bc;
            }
            r = Self::new(coeffs);
        }
        r
    }

    /// Greatest common divisor over the rationals, returned primitive with
    /// positive leading coefficient.
    pub fn gcd_rational(&self, other: &Self) -> Self {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.primitive_part()
    }

    /// True when the polynomial has no repeated complex roots.
    pub fn is_squarefree(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(invalid("squarefreeness of the zero polynomial"));
        }
        Ok(self.gcd_rational(&self.derivative()).degree() == Some(0))
    }

    /// Parses comma-separated coefficients, highest degree first.
    pub fn parse_descending(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<Integer>()
                    .map_err(|_| Error::Parse(format!("bad coefficient {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        Ok(Self::from_descending(&coeffs))
    }

    /// Coefficients highest degree first, comma separated.
    pub fn to_descending_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs
            .iter()
            .rev()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

impl<'a> std::ops::Add<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;

    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> std::ops::Sub<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;

    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> std::ops::Mul<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;

    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![Integer::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

impl std::ops::Neg for &IntPolynomial {
    type Output = IntPolynomial;

    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// A validated Weil polynomial of an abelian surface,
/// `t⁴ + a1·t³ + a2·t² + a1·q·t + q²` with `q = pⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeilPolynomial {
    pub q: Integer,
    pub p: Integer,
    pub n: u32,
    pub a1: Integer,
    pub a2: Integer,
}

impl WeilPolynomial {
    pub fn poly(&self) -> IntPolynomial {
        IntPolynomial::new(vec![
            &self.q * &self.q,
            &self.a1 * &self.q,
            self.a2.clone(),
            self.a1.clone(),
            Integer::one(),
        ])
    }

    /// `f(1)`, the number of rational points on any surface in the class.
    pub fn value_at_one(&self) -> Integer {
        self.poly().eval(&Integer::one())
    }

    /// Coefficient list `[1, a1, a2, a1·q, q²]`, highest degree first.
    pub fn descending(&self) -> Vec<Integer> {
        self.poly().coeffs().iter().rev().cloned().collect()
    }
}

impl fmt::Display for WeilPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly())
    }
}

/// Checks prime-power `q`, the functional-equation form, and the archimedean
/// bound on the roots (via the real polynomial `t² + a1·t + (a2 − 2q)`).
pub fn validate_weil(q: &Integer, coeffs: &[Integer]) -> Result<WeilPolynomial> {
    if coeffs.len() != 5 {
        return Err(invalid(format!(
            "expected 5 coefficients, got {}",
            coeffs.len()
        )));
    }
    let (p, n) = prime_power_decompose(q).ok_or_else(|| Error::NotPrimePower(q.to_string()))?;
    if !coeffs[0].is_one() {
        return Err(Error::FormViolation(format!(
            "leading coefficient {} is not 1",
            coeffs[0]
        )));
    }
    let (a1, a2, a3, a4) = (&coeffs[1], &coeffs[2], &coeffs[3], &coeffs[4]);
    if *a3 != a1 * q {
        return Err(Error::FormViolation(format!(
            "coefficient of t is {a3}, expected a1*q = {}",
            a1 * q
        )));
    }
    if *a4 != q * q {
        return Err(Error::FormViolation(format!(
            "constant term is {a4}, expected q^2 = {}",
            q * q
        )));
    }

    let two_q = int(2) * q;
    let disc = a1 * a1 - int(4) * (a2 - &two_q);
    let shifted = a2 + &two_q;
    let checks = [
        (!disc.is_negative(), "real polynomial has complex roots"),
        (!shifted.is_negative(), "a2 + 2q < 0"),
        (
            int(4) * a1 * a1 * q <= &shifted * &shifted,
            "real root outside [-2 sqrt q, 2 sqrt q]",
        ),
        (a1 * a1 <= int(16) * q, "a1^2 > 16q"),
    ];
    if let Some((_, why)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(Error::RootBoundViolation((*why).to_string()));
    }
    Ok(WeilPolynomial {
        q: q.clone(),
        p,
        n,
        a1: a1.clone(),
        a2: a2.clone(),
    })
}

/// Sign σ of the square-root factor `(t + σ·s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply(self, s: &Integer) -> Integer {
        match self {
            Sign::Plus => s.clone(),
            Sign::Minus => -s,
        }
    }
}

/// How a Weil polynomial factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IsogenyShape {
    /// Square-free.
    Case1 { f: IntPolynomial },
    /// `f = P²`, `P` monic quadratic without repeated roots.
    Case2 { p: IntPolynomial },
    /// `f = P·(t + σs)²`, `s = √q`, `P` square-free with `P(−σs) ≠ 0`.
    Case3 {
        p: IntPolynomial,
        sign: Sign,
        s: Integer,
    },
    /// `f = (t + σs)⁴`.
    Case4 { sign: Sign, s: Integer },
}

impl IsogenyShape {
    pub fn case_number(&self) -> u8 {
        match self {
            IsogenyShape::Case1 { .. } => 1,
            IsogenyShape::Case2 { .. } => 2,
            IsogenyShape::Case3 { .. } => 3,
            IsogenyShape::Case4 { .. } => 4,
        }
    }

    /// The quadratic factor, when there is one.
    pub fn quadratic(&self) -> Option<&IntPolynomial> {
        match self {
            IsogenyShape::Case2 { p } | IsogenyShape::Case3 { p, .. } => Some(p),
            _ => None,
        }
    }

    /// Human-readable factorization, e.g. `(t^2 - t + 4)(t + 2)^2`.
    pub fn factors_string(&self) -> String {
        match self {
            IsogenyShape::Case1 { f } => format!("({f})"),
            IsogenyShape::Case2 { p } => format!("({p})^2"),
            IsogenyShape::Case3 { p, sign, s } => {
                format!("({p})({})^2", IntPolynomial::linear(sign.apply(s)))
            }
            IsogenyShape::Case4 { sign, s } => {
                format!("({})^4", IntPolynomial::linear(sign.apply(s)))
            }
        }
    }

    /// Rebuilds the quartic from the factors.
    pub fn reconstruct(&self) -> IntPolynomial {
        match self {
            IsogenyShape::Case1 { f } => f.clone(),
            IsogenyShape::Case2 { p } => p.pow(2),
            IsogenyShape::Case3 { p, sign, s } => {
                p * &IntPolynomial::linear(sign.apply(s)).pow(2)
            }
            IsogenyShape::Case4 { sign, s } => IntPolynomial::linear(sign.apply(s)).pow(4),
        }
    }
}

/// `b` in the convention `P = t² − b·t + c`.
pub fn trace_of_quadratic(p: &IntPolynomial) -> Integer {
    -p.coeff(1)
}

/// Classifies a validated Weil polynomial. The tests run in the order
/// case 4, case 2, case 3, case 1; `(t² − q)²` therefore lands in case 2.
pub fn detect_shape(f: &WeilPolynomial) -> Result<IsogenyShape> {
    let poly = f.poly();
    let q = &f.q;
    let root = integer_sqrt_exact(q)?;

    if let Some(s) = &root {
        for sign in [Sign::Plus, Sign::Minus] {
            let c = sign.apply(s);
            if f.a1 == int(4) * &c && f.a2 == int(6) * q {
                return Ok(IsogenyShape::Case4 { sign, s: s.clone() });
            }
        }
    }

    if f.a1.is_even() {
        let u = &f.a1 / int(2);
        let diff = &f.a2 - &u * &u;
        if diff.is_even() {
            let v = diff / int(2);
            if int(2) * &u * &v == &f.a1 * q && &v * &v == q * q {
                let p = IntPolynomial::new(vec![v, u, Integer::one()]);
                if p.is_squarefree()? {
                    return Ok(IsogenyShape::Case2 { p });
                }
            }
        }
    }

    if let Some(s) = &root {
        let dpoly = poly.derivative();
        for sign in [Sign::Plus, Sign::Minus] {
            let c = sign.apply(s);
            let r = -&c;
            if !poly.eval(&r).is_zero() || !dpoly.eval(&r).is_zero() {
                continue;
            }
            let square = IntPolynomial::linear(c.clone()).pow(2);
            let (p, rem) = poly.div_rem_monic(&square)?;
            if !rem.is_zero() {
                return Err(internal("double root but quotient has a remainder"));
            }
            if p.is_squarefree()? && !p.eval(&r).is_zero() {
                return Ok(IsogenyShape::Case3 {
                    p,
                    sign,
                    s: s.clone(),
                });
            }
        }
    }

    if poly.is_squarefree()? {
        return Ok(IsogenyShape::Case1 { f: poly });
    }
    Err(internal(format!("no factorization shape matches {poly}")))
}

/// Every polynomial `t⁴ + a₁t³ + a₂t² + q·a₁t + q²` that passes
/// [`validate_weil`] for the given `q`, ordered by `(a₁, a₂)`.
pub fn weil_polynomials_for(q: &Integer) -> Result<Vec<WeilPolynomial>> {
    if prime_power_decompose(q).is_none() {
        return Err(Error::NotPrimePower(q.to_string()));
    }
    let qi = q
        .to_i64()
        .filter(|&x| x <= 1_000_000)
        .ok_or_else(|| invalid(format!("q = {q} is too large to sweep")))?;
    let a1_max = (16 * qi).sqrt();
    let mut out = Vec::new();
    for a1 in -a1_max..=a1_max {
        for a2 in -2 * qi..=(a1 * a1 / 4 + 2 * qi) {
            let coeffs = [1, a1, a2, a1 * qi, qi * qi].map(int);
            if let Ok(w) = validate_weil(q, &coeffs) {
                out.push(w);
            }
        }
    }
    Ok(out)
}
