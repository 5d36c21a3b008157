//! Exact integer helpers: ℓ-adic valuations, primality, factorization and
//! perfect-power detection.
//!
//! Everything here works on [`Integer`] (arbitrary precision); there is no
//! floating point anywhere in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};

pub type Integer = BigInt;
pub type Rational = num_rational::BigRational;

/// Shorthand for building an [`Integer`] from a machine integer.
pub fn int(n: i64) -> Integer {
    Integer::from(n)
}

/// An ℓ-adic valuation. `Infinite` is the valuation of zero; it compares
/// above every finite value and absorbs addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Prime factorization as `(prime, exponent)` pairs with strictly increasing
/// primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization(pub Vec<(Integer, u32)>);

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.0.iter().map(|(p, _)| p)
    }

    pub fn expand(&self) -> Integer {
        self.0
            .iter()
            .fold(Integer::one(), |acc, (p, e)| acc * num_traits::pow(p.clone(), *e as usize))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Valuation of `n` at the prime `ell`.
pub fn ord(ell: &Integer, n: &Integer) -> Result<Valuation> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    Ok(ord_unchecked(ell, n))
}

/// Valuation without the primality check; `ell` must be prime.
pub fn ord_unchecked(ell: &Integer, n: &Integer) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let mut m = n.abs();
    let mut e = 0u64;
    loop {
        let (q, r) = m.div_rem(ell);
        if !r.is_zero() {
            break;
        }
        m = q;
        e += 1;
    }
    Valuation::Finite(e)
}

/// Finite valuation of a nonzero integer at a prime.
pub fn ord_nonzero(ell: &Integer, n: &Integer) -> u64 {
    ord_unchecked(ell, n)
        .finite()
        .expect("valuation of a nonzero integer is finite")
}

const SMALL_PRIMES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller–Rabin with the first 13 primes as bases. This is a proof of
/// primality for every n < 3.3·10²⁴ and a fixed-base strong probable-prime
/// test beyond that bound; either way the answer is deterministic.
pub fn is_prime(n: &Integer) -> bool {
    if *n < int(2) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = Integer::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = Integer::one();
    let n_minus_1 = n - &one;
    let mut d = n_minus_1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in SMALL_PRIMES.iter() {
        let mut x = Integer::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Complete prime factorization of a positive integer.
///
/// Trial division up to 10⁶, then Brent's variant of Pollard rho with fixed
/// starting points for whatever cofactor remains.
pub fn factorize(n: &Integer) -> Result<Factorization> {
    if !n.is_positive() {
        return Err(invalid(format!("cannot factorize {n}: not positive")));
    }
    let mut rest = n.clone();
    let mut found: Vec<(Integer, u32)> = Vec::new();

    let mut push = |p: Integer, rest: &mut Integer| {
        let mut e = 0u32;
        while (&*rest % &p).is_zero() {
            *rest /= &p;
            e += 1;
        }
        if e > 0 {
            found.push((p, e));
        }
    };

    push(int(2), &mut rest);
    let mut d = 3u64;
    while d <= TRIAL_LIMIT {
        let dd = Integer::from(d);
        if &dd * &dd > rest {
            break;
        }
        if (&rest % &dd).is_zero() {
            push(dd, &mut rest);
        }
        d += 2;
    }

    let mut large = Vec::new();
    if rest > Integer::one() {
        split_large(rest, &mut large);
    }
    large.sort();
    let mut out = found;
    for p in large {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(Factorization(out))
}

fn split_large(n: Integer, out: &mut Vec<Integer>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    if let Some(r) = integer_sqrt_exact(&n).ok().flatten() {
        split_large(r.clone(), out);
        split_large(r, out);
        return;
    }
    let mut c = 1u32;
    loop {
        if let Some(d) = brent_rho(&n, &Integer::from(c)) {
            let other = &n / &d;
            split_large(d, out);
            split_large(other, out);
            return;
        }
        c += 1;
    }
}

fn brent_rho(n: &Integer, c: &Integer) -> Option<Integer> {
    let f = |x: &Integer| (x * x + c) % n;
    let mut y = int(2);
    let mut r: u64 = 1;
    let mut q = Integer::one();
    let m: u64 = 128;
    let mut g = Integer::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

/// Returns `(p, n)` with `q = pⁿ`, or `None` when `q` is not a prime power.
pub fn prime_power_decompose(q: &Integer) -> Option<(Integer, u32)> {
    if *q < int(2) {
        return None;
    }
    let fac = factorize(q).ok()?;
    match fac.0.as_slice() {
        [(p, e)] => Some((p.clone(), *e)),
        _ => None,
    }
}

/// Exact square root of a perfect square, `None` otherwise.
pub fn integer_sqrt_exact(q: &Integer) -> Result<Option<Integer>> {
    if q.is_negative() {
        return Err(invalid(format!("square root of negative {q}")));
    }
    let s = q.sqrt();
    Ok(if &s * &s == *q { Some(s) } else { None })
}
