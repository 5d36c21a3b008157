//! Explicit lattices realizing a given ℓ-part, as matrices of `1 − F`.

use num_integer::Integer as _;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::matrix::{cokernel_exponents, snf, IntMatrix};
use super::oracle::{default_depth, witness_search_case1, StableLattice};
use crate::abgroup::{int_to_json, HodgeVector, SURFACE_SLOTS};
use crate::classify::{case3_conditions, decide_case1, decide_case2, Case3Data};
use crate::error::{internal, invalid, Error, Result};
use crate::numeric::{int, is_prime, ord_nonzero, ord_unchecked, Integer, Valuation};
use crate::polygon::newton_polygon;
use crate::polynomial::{detect_shape, trace_of_quadratic, IntPolynomial, IsogenyShape, WeilPolynomial};

fn ell_pow(ell: &Integer, k: u64) -> Integer {
    num_traits::pow(ell.clone(), k as usize)
}

fn exact_div(a: &Integer, b: &Integer, what: &str) -> Result<Integer> {
    let (q, r) = a.div_rem(b);
    if !r.is_zero() {
        return Err(internal(format!("{what}: {a} is not divisible by {b}")));
    }
    Ok(q)
}

/// `[[−(b−2), −P(1)/ℓ^{n₁}], [ℓ^{n₁}, 0]]` for `P = t² − b·t + c`; its
/// characteristic polynomial is `P(1 − t)` and its ℓ-cokernel is `(n₁, n₂)`.
pub fn witness_case2(p: &IntPolynomial, ell: &Integer, pair: (u64, u64)) -> Result<IntMatrix> {
    if p.degree() != Some(2) || !p.is_monic() {
        return Err(invalid(format!("{p} is not a monic quadratic")));
    }
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    let (n1, n2) = pair;
    let b = trace_of_quadratic(p);
    let p1 = p.eval(&Integer::one());
    if p1.is_zero() {
        return Err(invalid("P(1) must be nonzero"));
    }
    let m = ord_nonzero(ell, &p1);
    if n1 > n2 || n1 + n2 != m {
        return Err(invalid(format!("pair ({n1},{n2}) must be sorted and sum to {m}")));
    }
    if Valuation::Finite(n1) > ord_unchecked(ell, &(&b - int(2))) {
        return Err(invalid(format!("n1 = {n1} exceeds ord(b - 2)")));
    }
    let l1 = ell_pow(ell, n1);
    let m = IntMatrix::from_rows(vec![
        vec![-(&b - int(2)), -exact_div(&p1, &l1, "case-2 witness")?],
        vec![l1, Integer::zero()],
    ])?;
    let got = cokernel_exponents(&m, ell)?;
    if got.exponents != vec![n1, n2] {
        return Err(internal(format!("case-2 witness has cokernel {}", got.tuple_string())));
    }
    Ok(m)
}

/// Matrix of `1 − F` on the lattice spanned by `u₁..u₄` with
/// `α = 1 + σ√q`, `m_b = m₁ + m₃ − m_q` and `c = 2 − b`, the trace of `1 − F`
/// on the `P` part (`P(1 − t) = t² − c·t + P(1)`):
///
/// ```text
/// (1−F)u₁ = (c+α)u₁ + ℓ^{m₁}u₂ + ℓ^{m_b}u₃
/// (1−F)u₂ = −cα/ℓ^{m₁}·u₁ − ℓ^{m_b}α/ℓ^{m₁}·u₃
/// (1−F)u₃ = −P(1)/ℓ^{m_b}·u₁ + α·u₃ + ℓ^{m₂}u₄
/// (1−F)u₄ = P(1)α/ℓ^{m₂+m_b}·u₁
/// ```
pub fn witness_case3(f: &WeilPolynomial, ell: &Integer, hv: &HodgeVector) -> Result<IntMatrix> {
    let IsogenyShape::Case3 { p, sign, s } = detect_shape(f)? else {
        return Err(invalid(format!("{f} is not of the form P·(t ± √q)²")));
    };
    if hv.slots() != SURFACE_SLOTS || hv.ell != *ell {
        return Err(invalid("expected a 4-slot vector at the given prime"));
    }
    let data = Case3Data::new(&p, sign, &s, ell)?;
    if !case3_conditions(&data, hv)?.all() {
        return Err(invalid(format!("{} is not admissible at {ell}", hv.tuple_string())));
    }
    let m = &hv.exponents;
    let mb = data.m_b(m) as u64;
    let alpha = data.alpha();
    let c = int(2) - &data.b;
    let p1 = p.eval(&Integer::one());
    let (l1, l2, lb) = (ell_pow(ell, m[0]), ell_pow(ell, m[1]), ell_pow(ell, mb));
    let zero = Integer::zero;

    let cols = [
        [&c + &alpha, l1.clone(), lb.clone(), zero()],
        [
            exact_div(&-(&c * &alpha), &l1, "case-3 witness u2")?,
            zero(),
            exact_div(&-(&lb * &alpha), &l1, "case-3 witness u2")?,
            zero(),
        ],
        [
            exact_div(&-p1.clone(), &lb, "case-3 witness u3")?,
            zero(),
            alpha.clone(),
            l2.clone(),
        ],
        [
            exact_div(&(&p1 * &alpha), &(&l2 * &lb), "case-3 witness u4")?,
            zero(),
            zero(),
            zero(),
        ],
    ];
    let rows = (0..4)
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    IntMatrix::from_rows(rows)
}

/// A verified witness for one admissible ℓ-part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub target: HodgeVector,
    pub construction: &'static str,
    pub matrix: IntMatrix,
    pub charpoly: IntPolynomial,
    pub snf: Vec<Integer>,
    /// Set for searched witnesses.
    pub lattice: Option<StableLattice>,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        json!({
            "ell": int_to_json(&self.target.ell),
            "vector": self.target.exponents,
            "construction": self.construction,
            "matrix": self.matrix.to_json(),
            "charpoly": self.charpoly.to_descending_string(),
            "snf": self.snf.iter().map(int_to_json).collect::<Vec<_>>(),
            "lattice": self.lattice.as_ref().map(StableLattice::to_json),
        })
    }
}

fn inadmissible(hv: &HodgeVector) -> Error {
    Error::Inadmissible(format!(
        "{} is not an admissible {}-part",
        hv.tuple_string(),
        hv.ell
    ))
}

/// Builds the witness for `hv` with the construction matching the shape of
/// `f`: a lattice search for square-free `f`, two rank-2 blocks for `P²`,
/// the explicit basis for `P·(t ± √q)²`, and the scalar `α·I` for
/// `(t ± √q)⁴`. The characteristic polynomial and the cokernel are checked
/// before returning.
pub fn witness_for(
    f: &WeilPolynomial,
    ell: &Integer,
    hv: &HodgeVector,
    depth: Option<u32>,
) -> Result<Witness> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    if hv.slots() != SURFACE_SLOTS {
        return Err(invalid(format!("expected {SURFACE_SLOTS} exponents")));
    }
    let e = ord_nonzero(ell, &f.value_at_one());
    if hv.total() != e {
        return Err(invalid(format!(
            "exponents sum to {}, but ord_{ell} f(1) = {e}",
            hv.total()
        )));
    }
    let shape = detect_shape(f)?;
    let (construction, matrix, lattice) = match &shape {
        IsogenyShape::Case1 { .. } => {
            let np = newton_polygon(&f.poly().substitute_one_minus_t(), ell)?;
            if !decide_case1(&np, hv)? {
                return Err(inadmissible(hv));
            }
            let depth = depth.unwrap_or_else(|| default_depth(f, ell));
            let lat = witness_search_case1(f, ell, hv, depth)?;
            let frob = super::oracle::frobenius_model(&shape);
            ("lattice-search", lat.one_minus_frobenius(&frob)?, Some(lat))
        }
        IsogenyShape::Case2 { p } => {
            let split = decide_case2(p, ell, hv)?.ok_or_else(|| inadmissible(hv))?;
            let a = witness_case2(p, ell, split.first)?;
            let b = witness_case2(p, ell, split.second)?;
            ("case-2-blocks", IntMatrix::block_diag(&[a, b]), None)
        }
        IsogenyShape::Case3 { p, sign, s } => {
            let data = Case3Data::new(p, *sign, s, ell)?;
            if !case3_conditions(&data, hv)?.all() {
                return Err(inadmissible(hv));
            }
            ("case-3-basis", witness_case3(f, ell, hv)?, None)
        }
        IsogenyShape::Case4 { sign, s } => {
            let alpha = Integer::one() + sign.apply(s);
            let k = ord_nonzero(ell, &alpha);
            if hv.exponents.iter().any(|&x| x != k) {
                return Err(inadmissible(hv));
            }
            ("scalar", IntMatrix::scalar(SURFACE_SLOTS, alpha), None)
        }
    };

    let charpoly = matrix.charpoly();
    if charpoly != f.poly().substitute_one_minus_t() {
        return Err(internal(format!("witness has characteristic polynomial {charpoly}")));
    }
    let got = cokernel_exponents(&matrix, ell)?;
    if got != *hv {
        return Err(internal(format!(
            "witness realizes {} instead of {}",
            got.tuple_string(),
            hv.tuple_string()
        )));
    }
    let invariants = snf(&matrix).invariants;
    let product: Integer = invariants.iter().product();
    if product != f.value_at_one() {
        return Err(internal("Smith invariants do not multiply to f(1)"));
    }
    Ok(Witness {
        target: hv.clone(),
        construction,
        matrix,
        charpoly,
        snf: invariants,
        lattice,
    })
}
