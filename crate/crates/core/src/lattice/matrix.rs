use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::abgroup::{int_to_json, HodgeVector};
use crate::error::{invalid, Error, Result};
use crate::numeric::{int, is_prime, ord_unchecked, Integer};
use crate::polynomial::IntPolynomial;

/// Square matrix of arbitrary-precision integers, row major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<Integer>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<Integer>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix must be square"));
        }
        Ok(IntMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .expect("square literal")
    }

    pub fn zero(n: usize) -> Self {
        IntMatrix {
            n,
            data: vec![Integer::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Integer::one())
    }

    pub fn scalar(n: usize, c: Integer) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    /// Companion matrix of a monic polynomial: ones below the diagonal and
    /// the negated coefficients in the last column.
    pub fn companion(f: &IntPolynomial) -> Result<Self> {
        if !f.is_monic() || f.degree().unwrap_or(0) == 0 {
            return Err(invalid("companion matrix needs a monic polynomial of positive degree"));
        }
        let n = f.degree().unwrap();
        let mut m = Self::zero(n);
        for i in 1..n {
            m[(i, i - 1)] = Integer::one();
        }
        for i in 0..n {
            m[(i, n - 1)] = -f.coeff(i);
        }
        Ok(m)
    }

    pub fn block_diag(blocks: &[IntMatrix]) -> Self {
        let n = blocks.iter().map(|b| b.n).sum();
        let mut m = Self::zero(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    m[(off + i, off + j)] = b[(i, j)].clone();
                }
            }
            off += b.n;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Integer>> {
        self.data.chunks(self.n.max(1)).map(<[Integer]>::to_vec).collect()
    }

    pub fn is_scalar(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if i == j {
                    self[(i, i)] == self[(0, 0)]
                } else {
                    self[(i, j)].is_zero()
                }
            })
        })
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn trace(&self) -> Integer {
        (0..self.n).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn scale(&self, k: &Integer) -> Self {
        IntMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> Integer {
        let n = self.n;
        if n == 0 {
            return Integer::one();
        }
        let mut a = self.clone();
        let mut sign = Integer::one();
        let mut prev = Integer::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Integer::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// `det(t·I − M)` by Faddeev–LeVerrier; every division is exact.
    pub fn charpoly(&self) -> IntPolynomial {
        let n = self.n;
        let mut coeffs = vec![Integer::zero(); n + 1];
        coeffs[n] = Integer::one();
        let mut mk = IntMatrix::zero(n);
        for k in 1..=n {
            let mut next = self * &mk;
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            mk = next;
            let tr = (self * &mk).trace();
            coeffs[n - k] = -tr / int(k as i64);
        }
        IntPolynomial::new(coeffs)
    }

    /// `f(M)` by Horner's rule.
    pub fn eval_poly(&self, f: &IntPolynomial) -> Self {
        f.coeffs().iter().rev().fold(Self::zero(self.n), |acc, c| {
            let mut m = &acc * self;
            for i in 0..self.n {
                m[(i, i)] += c;
            }
            m
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.n {
                self.data.swap(a * self.n + j, b * self.n + j);
            }
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.n {
                self.data.swap(i * self.n + a, i * self.n + b);
            }
        }
    }

    /// row[dst] += k·row[src]
    pub(crate) fn add_row(&mut self, dst: usize, src: usize, k: &Integer) {
        for j in 0..self.n {
            let v = &self[(src, j)] * k;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += k·col[src]
    pub(crate) fn add_col(&mut self, dst: usize, src: usize, k: &Integer) {
        for i in 0..self.n {
            let v = &self[(i, src)] * k;
            self[(i, dst)] += v;
        }
    }

    pub(crate) fn negate_row(&mut self, r: usize) {
        for j in 0..self.n {
            let v = -&self[(r, j)];
            self[(r, j)] = v;
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows()
                .iter()
                .map(|r| Value::Array(r.iter().map(int_to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("row must be an array".into()))?
                    .iter()
                    .map(crate::abgroup::int_from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Integer;

    fn index(&self, (i, j): (usize, usize)) -> &Integer {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Integer {
        &mut self.data[i * self.n + j]
    }
}

impl std::ops::Mul<&IntMatrix> for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut m = IntMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += a * &rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl std::ops::Sub<&IntMatrix> for &IntMatrix {
    type Output = IntMatrix;

    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        IntMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl std::ops::Add<&IntMatrix> for &IntMatrix {
    type Output = IntMatrix;

    fn add(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        IntMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for (i, row) in cells.chunks(self.n.max(1)).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            write!(f, "[{}]", padded.join(" "))?;
        }
        Ok(())
    }
}

/// `U·M·V = diag(invariants)` with unimodular `U`, `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    /// Nonnegative, each dividing the next; zeros trail.
    pub invariants: Vec<Integer>,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

/// Smith normal form. Pivots on the entry of least absolute value and keeps
/// the row and column transforms.
pub fn snf(m: &IntMatrix) -> SnfResult {
    let n = m.dim();
    let mut a = m.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);

    for t in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !a[(i, j)].is_zero()
                        && pivot.is_none_or(|(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..n {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row(i, t, &q);
                u.add_row(i, t, &q);
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -a[(t, j)].div_floor(&a[(t, t)]);
                a.add_col(j, t, &q);
                v.add_col(j, t, &q);
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..n).find(|&i| {
                (t + 1..n).any(|j| !a[(i, j)].is_multiple_of(&a[(t, t)]))
            });
            match bad {
                Some(i) => {
                    a.add_row(t, i, &Integer::one());
                    u.add_row(t, i, &Integer::one());
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    let invariants = (0..n).map(|i| a[(i, i)].clone()).collect();
    SnfResult { invariants, u, v }
}

/// Sorted ℓ-adic exponents of the cokernel `ℤʳ / M·ℤʳ`.
pub fn cokernel_exponents(m: &IntMatrix, ell: &Integer) -> Result<HodgeVector> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    let s = snf(m);
    if s.invariants.iter().any(Zero::is_zero) {
        return Err(invalid("cokernel of a singular matrix is infinite"));
    }
    let exps = s
        .invariants
        .iter()
        .map(|d| ord_unchecked(ell, d).finite().expect("nonzero"))
        .collect();
    Ok(HodgeVector::new(ell.clone(), exps))
}
