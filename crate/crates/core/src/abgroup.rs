//! Finite abelian groups as invariant-factor chains and as per-prime Hodge
//! vectors, with CRT assembly, candidate enumeration, and text/JSON forms.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::numeric::{factorize, int, ord_nonzero, Integer};

/// Number of generator slots for groups of points on a surface.
pub const SURFACE_SLOTS: usize = 4;

/// Sorted exponents `m₁ ≤ … ≤ m_r` of an ℓ-group `⊕ ℤ/ℓ^{mᵢ}`, zero padded
/// to `r` slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HodgeVector {
    pub ell: Integer,
    pub exponents: Vec<u64>,
}

impl HodgeVector {
    pub fn new(ell: Integer, mut exponents: Vec<u64>) -> Self {
        exponents.sort_unstable();
        HodgeVector { ell, exponents }
    }

    pub fn total(&self) -> u64 {
        self.exponents.iter().sum()
    }

    pub fn slots(&self) -> usize {
        self.exponents.len()
    }

    pub fn order(&self) -> Integer {
        num_traits::pow(self.ell.clone(), self.total() as usize)
    }

    /// `(m1,m2,...)`.
    pub fn tuple_string(&self) -> String {
        format_tuple(&self.exponents)
    }
}

pub fn format_tuple(xs: &[u64]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// Invariant factors `d₁ | d₂ | … | d_r`. Stored with leading ones so the
/// chain has at least [`SURFACE_SLOTS`] entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    invariants: Vec<Integer>,
}

impl PartialOrd for FiniteAbelianGroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Chains are compared after left-padding to a common length, so cyclic
/// groups come before non-cyclic ones of the same order.
impl Ord for FiniteAbelianGroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let n = self.invariants.len().max(other.invariants.len());
        self.padded(n).cmp(&other.padded(n))
    }
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            invariants: vec![Integer::one(); SURFACE_SLOTS],
        }
    }

    /// Canonicalizes any list of positive cyclic orders into a chain.
    pub fn from_cyclic_orders(orders: &[Integer]) -> Result<Self> {
        let mut by_prime: BTreeMap<Integer, Vec<u64>> = BTreeMap::new();
        for d in orders {
            if !d.is_positive() {
                return Err(Error::Parse(format!("cyclic order {d} is not positive")));
            }
            for (p, e) in factorize(d)?.0 {
                by_prime.entry(p).or_default().push(e as u64);
            }
        }
        let slots = by_prime
            .values()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(SURFACE_SLOTS);
        let parts: Vec<HodgeVector> = by_prime
            .into_iter()
            .map(|(p, mut es)| {
                es.resize(slots, 0);
                HodgeVector::new(p, es)
            })
            .collect();
        assemble_from_primary(&parts)
    }

    pub fn invariants(&self) -> &[Integer] {
        &self.invariants
    }

    /// Invariant factors without the leading ones (`[1]` for the trivial group).
    pub fn nontrivial_invariants(&self) -> Vec<Integer> {
        let v: Vec<Integer> = self
            .invariants
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect();
        if v.is_empty() {
            vec![Integer::one()]
        } else {
            v
        }
    }

    fn padded(&self, n: usize) -> Vec<Integer> {
        let mut v = vec![Integer::one(); n - self.invariants.len()];
        v.extend(self.invariants.iter().cloned());
        v
    }

    pub fn order(&self) -> Integer {
        self.invariants.iter().product()
    }

    /// Minimal number of generators.
    pub fn rank(&self) -> usize {
        self.invariants.iter().filter(|d| !d.is_one()).count()
    }

    /// Primes dividing the order.
    pub fn primes(&self) -> Vec<Integer> {
        match self.invariants.last() {
            Some(top) => factorize(top)
                .map(|f| f.primes().cloned().collect())
                .unwrap_or_default(),
            None => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let primary: serde_json::Map<String, Value> = self
            .primes()
            .into_iter()
            .map(|p| {
                let slots = self.invariants.len();
                let hv = primary_part(self, &p, slots).expect("slots cover every factor");
                (p.to_string(), json!(hv.exponents))
            })
            .collect();
        json!({
            "invariants": self.invariants.iter().map(int_to_json).collect::<Vec<_>>(),
            "primary": primary,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .get("invariants")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"invariants\" array".into()))?;
        let orders = arr.iter().map(int_from_json).collect::<Result<Vec<_>>>()?;
        Self::from_cyclic_orders(&orders)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_group(self))
    }
}

/// Integers that fit in `i64` become JSON numbers, larger ones strings.
pub fn int_to_json(n: &Integer) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn int_from_json(v: &Value) -> Result<Integer> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(int)
            .ok_or_else(|| Error::Parse(format!("non-integer number {n}"))),
        Value::String(s) => s
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer string {s:?}"))),
        other => Err(Error::Parse(format!("expected an integer, got {other}"))),
    }
}

/// Exponents of the ℓ-primary component, sorted and zero padded to `slots`.
pub fn primary_part(g: &FiniteAbelianGroup, ell: &Integer, slots: usize) -> Result<HodgeVector> {
    let mut exps: Vec<u64> = g
        .invariants
        .iter()
        .map(|d| ord_nonzero(ell, d))
        .filter(|&e| e > 0)
        .collect();
    if exps.len() > slots {
        return Err(Error::TooManyGenerators(format!(
            "{}-part of {} needs {} generators, only {slots} slots",
            ell,
            g,
            exps.len()
        )));
    }
    exps.resize(slots, 0);
    Ok(HodgeVector::new(ell.clone(), exps))
}

/// Chinese-remainder recombination of primary parts into an invariant-factor
/// chain. All parts must have the same number of slots.
pub fn assemble_from_primary(parts: &[HodgeVector]) -> Result<FiniteAbelianGroup> {
    let slots = parts.first().map_or(SURFACE_SLOTS, HodgeVector::slots);
    if parts.iter().any(|p| p.slots() != slots) {
        return Err(invalid("primary parts have different slot counts"));
    }
    let mut seen: Vec<&Integer> = parts.iter().map(|p| &p.ell).collect();
    seen.sort();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("duplicate prime among primary parts"));
    }
    let mut invariants = vec![Integer::one(); slots.max(SURFACE_SLOTS)];
    let offset = invariants.len() - slots;
    for part in parts {
        for (i, &e) in part.exponents.iter().enumerate() {
            invariants[offset + i] *= num_traits::pow(part.ell.clone(), e as usize);
        }
    }
    debug_assert!(invariants.windows(2).all(|w| w[1].is_multiple_of(&w[0])));
    Ok(FiniteAbelianGroup { invariants })
}

/// All `0 ≤ m₁ ≤ … ≤ m_r` with `Σ mᵢ = total`, in lexicographic order.
pub fn partitions_with_slots(total: u64, slots: usize) -> Vec<Vec<u64>> {
    fn go(remaining: u64, slots: usize, min: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 0 {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if slots == 1 {
            if remaining >= min {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let mut v = min;
        while v * slots as u64 <= remaining {
            prefix.push(v);
            go(remaining - v, slots - 1, v, prefix, out);
            prefix.pop();
            v += 1;
        }
    }
    let mut out = Vec::new();
    if slots == 0 {
        return out;
    }
    go(total, slots, 0, &mut Vec::new(), &mut out);
    out
}

/// Parses `"d1,d2,..."` (any positive cyclic orders) into canonical form.
pub fn parse_group(s: &str) -> Result<FiniteAbelianGroup> {
    let orders = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<Integer>()
                .map_err(|_| Error::Parse(format!("bad group factor {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteAbelianGroup::from_cyclic_orders(&orders)
}

/// Invariant factors without the leading ones, comma separated.
pub fn format_group(g: &FiniteAbelianGroup) -> String {
    g.nontrivial_invariants()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
