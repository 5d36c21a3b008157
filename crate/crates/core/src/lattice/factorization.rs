//! Matrix factorizations `(X, Y)` over `ℤ[t]` with `det X = f` and
//! `Y·X = f₁·I`, built from an integer matrix annihilated by `f₁`.

use num_traits::Zero;

use super::matrix::{cokernel_exponents, snf, IntMatrix};
use crate::abgroup::HodgeVector;
use crate::error::{internal, invalid, Result};
use crate::numeric::{is_prime, ord_unchecked, Integer};
use crate::polynomial::IntPolynomial;

/// Square matrix of integer polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    data: Vec<IntPolynomial>,
}

impl PolyMatrix {
    pub fn zero(n: usize) -> Self {
        PolyMatrix {
            n,
            data: vec![IntPolynomial::zero(); n * n],
        }
    }

    /// `f·I`.
    pub fn scalar(n: usize, f: &IntPolynomial) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m[(i, i)] = f.clone();
        }
        m
    }

    pub fn from_constant(a: &IntMatrix) -> Self {
        let n = a.dim();
        let mut m = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = IntPolynomial::constant(a[(i, j)].clone());
            }
        }
        m
    }

    /// `t·I − A`.
    pub fn t_minus(a: &IntMatrix) -> Self {
        &Self::scalar(a.dim(), &IntPolynomial::t()) - &Self::from_constant(a)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &Integer) -> IntMatrix {
        let rows = (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].eval(x)).collect())
            .collect();
        IntMatrix::from_rows(rows).expect("square")
    }

    /// Value at `t = 0`.
    pub fn at_zero(&self) -> IntMatrix {
        self.eval(&Integer::zero())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> IntPolynomial {
        fn go(m: &PolyMatrix, rows: &[usize], cols: &[usize]) -> IntPolynomial {
            if rows.is_empty() {
                return IntPolynomial::one();
            }
            let r = rows[0];
            let mut acc = IntPolynomial::zero();
            for (k, &c) in cols.iter().enumerate() {
                let entry = &m[(r, c)];
                if entry.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry * &go(m, &rows[1..], &rest);
                acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
        let idx: Vec<usize> = (0..self.n).collect();
        go(self, &idx, &idx)
    }
}

impl std::ops::Index<(usize, usize)> for PolyMatrix {
    type Output = IntPolynomial;

    fn index(&self, (i, j): (usize, usize)) -> &IntPolynomial {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for PolyMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut IntPolynomial {
        &mut self.data[i * self.n + j]
    }
}

impl std::ops::Mul<&PolyMatrix> for &PolyMatrix {
    type Output = PolyMatrix;

    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut m = PolyMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = IntPolynomial::zero();
                for k in 0..n {
                    acc = &acc + &(&self[(i, k)] * &rhs[(k, j)]);
                }
                m[(i, j)] = acc;
            }
        }
        m
    }
}

impl std::ops::Add<&PolyMatrix> for &PolyMatrix {
    type Output = PolyMatrix;

    fn add(self, rhs: &PolyMatrix) -> PolyMatrix {
        PolyMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub<&PolyMatrix> for &PolyMatrix {
    type Output = PolyMatrix;

    fn sub(self, rhs: &PolyMatrix) -> PolyMatrix {
        PolyMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `X = t·I − A` and `Y = Σ_{j≥1} b_j · Σ_{i<j} tⁱ·A^{j−1−i}` for
/// `f₁ = Σ b_j tʲ`. Requires `f₁(A) = 0`; then `Y·X = f₁·I` and
/// `det X` is the characteristic polynomial of `A`.
pub fn mf_build(a: &IntMatrix, f1: &IntPolynomial) -> Result<(PolyMatrix, PolyMatrix)> {
    if !a.eval_poly(f1).is_zero() {
        return Err(invalid(format!("{f1} does not annihilate the matrix")));
    }
    let n = a.dim();
    let x = PolyMatrix::t_minus(a);

    let mut powers = vec![IntMatrix::identity(n)];
    for _ in 1..f1.coeffs().len() {
        let next = &powers[powers.len() - 1] * a;
        powers.push(next);
    }
    let mut y = PolyMatrix::zero(n);
    for (j, b) in f1.coeffs().iter().enumerate().skip(1) {
        if b.is_zero() {
            continue;
        }
        for i in 0..j {
            let ti = IntPolynomial::new({
                let mut c = vec![Integer::zero(); i + 1];
                c[i] = b.clone();
                c
            });
            let term = &PolyMatrix::from_constant(&powers[j - 1 - i]) * &PolyMatrix::scalar(n, &ti);
            y = &y + &term;
        }
    }

    if &y * &x != PolyMatrix::scalar(n, f1) {
        return Err(internal("Y·X differs from f1·I"));
    }
    if x.det() != a.charpoly() {
        return Err(internal("det X differs from the characteristic polynomial"));
    }
    Ok((x, y))
}

/// Whether `f₁ ≡ t^{deg f₁} (mod ℓ)`.
pub fn mf1_hypothesis_holds(f1: &IntPolynomial, ell: &Integer) -> bool {
    let d = f1.degree().unwrap_or(0);
    (0..d).all(|i| (f1.coeff(i) % ell).is_zero()) && !(f1.coeff(d) % ell).is_zero()
}

/// ℓ-exponents of `coker Y(0)` for `(X, Y) = mf_build(A, f₁)`. Since
/// `Y(0)·X(0) = f₁(0)·I`, these are `m − mᵢ` where `mᵢ` are the exponents of
/// `coker X(0)` and `m = ord_ℓ f₁(0)`.
pub fn mf_dual_hp(a: &IntMatrix, f1: &IntPolynomial, ell: &Integer) -> Result<HodgeVector> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    if f1.coeff(0).is_zero() {
        return Err(invalid("f1(0) must be nonzero"));
    }
    let (_, y) = mf_build(a, f1)?;
    cokernel_exponents(&y.at_zero(), ell)
}

/// The complement `{m − mᵢ}` of a Hodge vector, sorted.
pub fn complement(hv: &HodgeVector, m: u64) -> Result<HodgeVector> {
    let exps = hv
        .exponents
        .iter()
        .map(|&e| m.checked_sub(e).ok_or_else(|| invalid("exponent exceeds m")))
        .collect::<Result<Vec<_>>>()?;
    Ok(HodgeVector::new(hv.ell.clone(), exps))
}

/// `X′ = U·X·V` with `U`, `V` the unimodular SNF transforms of `X(0)`, so
/// that `X′(0)` is diagonal. Over ℤ the diagonal is `unit · ℓ^{mᵢ}`; only the
/// ℓ-adic valuations are normalized.
pub fn mf_normalize(x: &PolyMatrix, ell: &Integer) -> Result<(PolyMatrix, IntMatrix, IntMatrix)> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    let x0 = x.at_zero();
    if x0.det().is_zero() {
        return Err(invalid("X(0) is singular"));
    }
    let s = snf(&x0);
    let xp = &(&PolyMatrix::from_constant(&s.u) * x) * &PolyMatrix::from_constant(&s.v);
    let d = xp.at_zero();
    let n = d.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j && !d[(i, j)].is_zero() {
                return Err(internal("normalized X(0) is not diagonal"));
            }
        }
    }
    Ok((xp, s.u, s.v))
}

/// ℓ-valuations of the diagonal of `X′(0)`, sorted.
pub fn diagonal_valuations(x: &PolyMatrix, ell: &Integer) -> HodgeVector {
    let d = x.at_zero();
    let exps = (0..d.dim())
        .map(|i| ord_unchecked(ell, &d[(i, i)]).finite().unwrap_or(u64::MAX))
        .collect();
    HodgeVector::new(ell.clone(), exps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use num_traits::Signed;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn build_two_by_two() {
        let a = m(&[&[3, -4], &[1, 0]]);
        let f1 = p(&[4, -3, 1]);
        let (x, y) = mf_build(&a, &f1).unwrap();
        assert_eq!(x, PolyMatrix::t_minus(&a));
        let mut expected = PolyMatrix::zero(2);
        expected[(0, 0)] = p(&[0, 1]);
        expected[(0, 1)] = p(&[-4]);
        expected[(1, 0)] = p(&[1]);
        expected[(1, 1)] = p(&[-3, 1]);
        assert_eq!(y, expected);
        assert_eq!(&y * &x, PolyMatrix::scalar(2, &f1));
    }

    #[test]
    fn build_block_case() {
        let blk = m(&[&[3, -4], &[1, 0]]);
        let a = IntMatrix::block_diag(&[blk.clone(), blk]);
        let f1 = p(&[4, -3, 1]);
        let (x, y) = mf_build(&a, &f1).unwrap();
        assert_eq!(x.det(), f1.pow(2));
        assert_eq!(y.det(), f1.pow(2));
        assert_eq!(&x.det() * &y.det(), f1.pow(4));
    }

    #[test]
    fn build_scalar_case() {
        let a = IntMatrix::scalar(3, int(5));
        let (x, y) = mf_build(&a, &p(&[-5, 1])).unwrap();
        assert_eq!(y, PolyMatrix::scalar(3, &IntPolynomial::one()));
        assert_eq!(x.det(), p(&[-5, 1]).pow(3));
    }

    #[test]
    fn build_rejects_non_annihilating() {
        assert!(mf_build(&m(&[&[3, -4], &[1, 0]]), &p(&[4, -2, 1])).is_err());
    }

    #[test]
    fn dual_examples() {
        let blk = m(&[&[3, -4], &[1, 0]]);
        let f1 = p(&[4, -3, 1]);
        let a = IntMatrix::block_diag(&[blk.clone(), blk.clone()]);
        assert_eq!(mf_dual_hp(&a, &f1, &int(2)).unwrap().exponents, vec![0, 0, 2, 2]);
        assert_eq!(mf_dual_hp(&blk, &f1, &int(2)).unwrap().exponents, vec![0, 2]);
        let s = IntMatrix::scalar(2, int(3));
        assert_eq!(mf_dual_hp(&s, &p(&[-3, 1]), &int(2)).unwrap().exponents, vec![0, 0]);
        assert!(mf_dual_hp(&blk, &p(&[0, 1]), &int(2)).is_err());
    }

    #[test]
    fn hypothesis_check() {
        assert!(mf1_hypothesis_holds(&p(&[4, 2, 1]), &int(2)));
        assert!(!mf1_hypothesis_holds(&p(&[4, -3, 1]), &int(2)));
    }

    #[test]
    fn normalize_examples() {
        let a = m(&[&[3, -4], &[1, 0]]);
        let x = PolyMatrix::t_minus(&a);
        let (xp, u, v) = mf_normalize(&x, &int(2)).unwrap();
        let d = xp.at_zero();
        assert_eq!((d[(0, 0)].clone() * d[(1, 1)].clone()).abs(), int(4));
        assert!(u.det().abs() == int(1) && v.det().abs() == int(1));
        assert_eq!(diagonal_valuations(&xp, &int(2)).exponents, vec![0, 2]);

        let diag = PolyMatrix::t_minus(&m(&[&[-2, 0], &[0, -4]]));
        let (_, u, v) = mf_normalize(&diag, &int(2)).unwrap();
        assert_eq!((u, v), (IntMatrix::identity(2), IntMatrix::identity(2)));

        let blk = m(&[&[3, -4], &[1, 0]]);
        let x4 = PolyMatrix::t_minus(&IntMatrix::block_diag(&[blk.clone(), blk]));
        let (xp4, _, _) = mf_normalize(&x4, &int(2)).unwrap();
        assert_eq!(diagonal_valuations(&xp4, &int(2)).exponents, vec![0, 0, 2, 2]);
    }
}
