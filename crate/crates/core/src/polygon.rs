//! Newton polygons of integer polynomials at a prime, Hodge polygons of
//! finite abelian ℓ-groups, and the "lies on or above" comparison.
//!
//! Polygons are stored by their integer vertices. Ordinates between vertices
//! come from exact rational interpolation.

use num_traits::Zero;

use crate::error::{invalid, internal, Result};
use crate::numeric::{is_prime, ord_unchecked, Integer, Rational};
use crate::polynomial::IntPolynomial;

/// Anything given by a vertex list with strictly increasing x.
pub trait ConvexPolygon {
    fn vertices(&self) -> &[(i64, i64)];

    fn width(&self) -> i64 {
        self.vertices().last().map_or(0, |v| v.0)
    }

    /// Ordinate at `x`, interpolated between vertices.
    fn ordinate_at(&self, x: i64) -> Rational {
        ordinate(self.vertices(), x)
    }
}

fn ordinate(vs: &[(i64, i64)], x: i64) -> Rational {
    for w in vs.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 <= x && x <= x1 {
            let num = Integer::from(y0) * (x1 - x) + Integer::from(y1) * (x - x0);
            return Rational::new(num, Integer::from(x1 - x0));
        }
    }
    match vs {
        [(x0, y0)] if *x0 == x => Rational::from_integer(Integer::from(*y0)),
        _ => panic!("x = {x} outside polygon"),
    }
}

/// Lower convex hull of `(i, ord_ℓ(Qᵢ))` over the nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NewtonPolygon {
    pub ell: Integer,
    vertices: Vec<(i64, i64)>,
}

impl ConvexPolygon for NewtonPolygon {
    fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }
}

/// Hodge polygon of `⊕ ℤ/ℓ^{mᵢ}`: vertices `(i, m₁ + … + m_{r−i})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HodgePolygon {
    pub exponents: Vec<u64>,
    vertices: Vec<(i64, i64)>,
}

impl ConvexPolygon for HodgePolygon {
    fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    ((a.0 - o.0) as i128) * ((b.1 - o.1) as i128) - ((a.1 - o.1) as i128) * ((b.0 - o.0) as i128)
}

pub fn newton_polygon(q: &IntPolynomial, ell: &Integer) -> Result<NewtonPolygon> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    if q.coeff(0).is_zero() {
        return Err(invalid("Newton polygon needs a nonzero constant term"));
    }
    let points: Vec<(i64, i64)> = q
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            ord_unchecked(ell, c)
                .finite()
                .map(|v| (i as i64, v as i64))
        })
        .collect();

    // monotone chain, lower hull only; collinear points are dropped
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(points.len());
    for pt in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let np = NewtonPolygon {
        ell: ell.clone(),
        vertices: hull,
    };
    check_convex(&np.vertices)?;
    Ok(np)
}

fn check_convex(vs: &[(i64, i64)]) -> Result<()> {
    for w in vs.windows(3) {
        if cross(w[0], w[1], w[2]) <= 0 {
            return Err(internal(format!("polygon {vs:?} is not strictly convex")));
        }
    }
    if vs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(internal(format!("polygon {vs:?} has non-increasing x")));
    }
    Ok(())
}

/// Slopes in increasing order with multiplicities (horizontal lengths).
pub fn slope_multiset<P: ConvexPolygon + ?Sized>(poly: &P) -> Vec<(Rational, u64)> {
    let mut out: Vec<(Rational, u64)> = Vec::new();
    for w in poly.vertices().windows(2) {
        let dx = w[1].0 - w[0].0;
        let slope = Rational::new(Integer::from(w[1].1 - w[0].1), Integer::from(dx));
        match out.last_mut() {
            Some((s, m)) if *s == slope => *m += dx as u64,
            _ => out.push((slope, dx as u64)),
        }
    }
    out
}

fn merge_slopes(a: &[(Rational, u64)], b: &[(Rational, u64)]) -> Vec<(Rational, u64)> {
    let mut all: Vec<(Rational, u64)> = a.iter().chain(b).cloned().collect();
    all.sort_by(|x, y| x.0.cmp(&y.0));
    let mut out: Vec<(Rational, u64)> = Vec::new();
    for (s, m) in all {
        match out.last_mut() {
            Some((t, n)) if *t == s => *n += m,
            _ => out.push((s, m)),
        }
    }
    out
}

/// Whether the slopes of `NP(Q1·Q2)` are the multiset union of the slopes of
/// `NP(Q1)` and `NP(Q2)`. Always true; used as a consistency oracle.
pub fn np_product_property_check(
    q1: &IntPolynomial,
    q2: &IntPolynomial,
    ell: &Integer,
) -> Result<bool> {
    let prod = newton_polygon(&(q1 * q2), ell)?;
    let s1 = slope_multiset(&newton_polygon(q1, ell)?);
    let s2 = slope_multiset(&newton_polygon(q2, ell)?);
    Ok(slope_multiset(&prod) == merge_slopes(&s1, &s2))
}

pub fn hodge_polygon(exponents: &[u64]) -> Result<HodgePolygon> {
    if exponents.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid(format!("exponents {exponents:?} are not sorted")));
    }
    let r = exponents.len();
    let vertices = (0..=r)
        .map(|i| (i as i64, exponents[..r - i].iter().sum::<u64>() as i64))
        .collect();
    Ok(HodgePolygon {
        exponents: exponents.to_vec(),
        vertices,
    })
}

/// True iff both polygons share their endpoints and `upper` is pointwise
/// ≥ `lower` on `[0, r]`. Every breakpoint of either polygon sits at an
/// integer x, so integer abscissae suffice.
pub fn lies_on_or_above<A, B>(upper: &A, lower: &B) -> Result<bool>
where
    A: ConvexPolygon + ?Sized,
    B: ConvexPolygon + ?Sized,
{
    let (ua, la) = (upper.vertices(), lower.vertices());
    let (Some(u0), Some(l0)) = (ua.first(), la.first()) else {
        return Err(invalid("empty polygon"));
    };
    if u0.0 != 0 || l0.0 != 0 || upper.width() != lower.width() {
        return Err(invalid(format!(
            "x-ranges differ: [{}, {}] vs [{}, {}]",
            u0.0,
            upper.width(),
            l0.0,
            lower.width()
        )));
    }
    if u0.1 != l0.1 || ua.last().map(|v| v.1) != la.last().map(|v| v.1) {
        return Ok(false);
    }
    Ok((0..=upper.width()).all(|x| upper.ordinate_at(x) >= lower.ordinate_at(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;

    fn np(c: &[i64], l: i64) -> NewtonPolygon {
        newton_polygon(&IntPolynomial::from_i64(c), &int(l)).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(int(n))
    }

    #[test]
    fn newton_examples() {
        assert_eq!(np(&[4, -3, 1], 2).vertices(), &[(0, 2), (1, 0), (2, 0)]);
        assert_eq!(
            np(&[8, -10, 9, -4, 1], 2).vertices(),
            &[(0, 3), (1, 1), (2, 0), (4, 0)]
        );
        assert_eq!(np(&[-4, 1], 2).vertices(), &[(0, 2), (1, 0)]);
        assert!(newton_polygon(&IntPolynomial::from_i64(&[0, 1]), &int(2)).is_err());
        assert!(newton_polygon(&IntPolynomial::from_i64(&[1, 1]), &int(4)).is_err());
    }

    #[test]
    fn zero_coefficients_are_skipped() {
        // t^4 + 3t^2 + 4 at 2: points (0,2), (2,0), (4,0)
        assert_eq!(np(&[4, 0, 3, 0, 1], 2).vertices(), &[(0, 2), (2, 0), (4, 0)]);
        assert_eq!(np(&[4, 0, 3, 0, 1], 2).ordinate_at(1), r(1));
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slope_multiset(&np(&[4, -3, 1], 2)), vec![(r(-2), 1), (r(0), 1)]);
        assert_eq!(
            slope_multiset(&np(&[8, -10, 9, -4, 1], 2)),
            vec![(r(-2), 1), (r(-1), 1), (r(0), 2)]
        );
        assert_eq!(slope_multiset(&np(&[-4, 1], 2)), vec![(r(-2), 1)]);
        // fractional slope
        assert_eq!(
            slope_multiset(&np(&[2, 0, 1], 2)),
            vec![(Rational::new(int(-1), int(2)), 2)]
        );
    }

    #[test]
    fn product_examples() {
        let check = |a: &[i64], b: &[i64], l| {
            np_product_property_check(
                &IntPolynomial::from_i64(a),
                &IntPolynomial::from_i64(b),
                &int(l),
            )
            .unwrap()
        };
        assert!(check(&[2, -1, 1], &[4, -3, 1], 2));
        assert!(check(&[-4, 1], &[-4, 1], 2));
        assert!(check(&[-2, 1], &[-3, 1], 5));
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(
            hodge_polygon(&[0, 0, 1, 2]).unwrap().vertices(),
            &[(0, 3), (1, 1), (2, 0), (3, 0), (4, 0)]
        );
        assert!(hodge_polygon(&[0, 0, 0, 0])
            .unwrap()
            .vertices()
            .iter()
            .all(|v| v.1 == 0));
        assert_eq!(hodge_polygon(&[2, 2]).unwrap().vertices(), &[(0, 4), (1, 2), (2, 0)]);
        assert!(hodge_polygon(&[2, 1]).is_err());
    }

    #[test]
    fn comparison_examples() {
        let n = np(&[8, -10, 9, -4, 1], 2);
        assert!(lies_on_or_above(&n, &hodge_polygon(&[0, 0, 1, 2]).unwrap()).unwrap());
        assert!(!lies_on_or_above(&n, &hodge_polygon(&[0, 1, 1, 1]).unwrap()).unwrap());
        assert!(lies_on_or_above(&n, &n).unwrap());
        // unequal endpoints are a plain "no"
        assert!(!lies_on_or_above(&n, &hodge_polygon(&[0, 0, 0, 2]).unwrap()).unwrap());
        // mismatched widths are an error
        assert!(lies_on_or_above(&n, &hodge_polygon(&[0, 3]).unwrap()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly_strategy() -> impl Strategy<Value = Vec<i64>> {
            (
                prop::collection::vec(-200i64..200, 1..5),
                prop::sample::select(vec![1i64, -1, 2, 3, 4, 6, 8, 9, 12, 25]),
            )
                .prop_map(|(mut v, c0)| {
                    v.insert(0, c0);
                    if *v.last().unwrap() == 0 {
                        *v.last_mut().unwrap() = 1;
                    }
                    v
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]

            #[test]
            fn slopes_of_products_add(a in poly_strategy(), b in poly_strategy(),
                                      l in prop::sample::select(vec![2i64, 3, 5])) {
                let ok = np_product_property_check(
                    &IntPolynomial::from_i64(&a),
                    &IntPolynomial::from_i64(&b),
                    &int(l),
                ).unwrap();
                prop_assert!(ok);
            }

            #[test]
            fn newton_polygons_are_convex_and_below_points(a in poly_strategy(),
                                                           l in prop::sample::select(vec![2i64, 3, 5])) {
                let f = IntPolynomial::from_i64(&a);
                let n = newton_polygon(&f, &int(l)).unwrap();
                prop_assert_eq!(n.vertices()[0].0, 0);
                prop_assert_eq!(n.width() as usize, f.degree().unwrap());
                for (i, c) in f.coeffs().iter().enumerate() {
                    if let Some(v) = ord_unchecked(&int(l), c).finite() {
                        prop_assert!(r(v as i64) >= n.ordinate_at(i as i64));
                    }
                }
                let total: u64 = slope_multiset(&n).iter().map(|s| s.1).sum();
                prop_assert_eq!(total as usize, f.degree().unwrap());
            }

            #[test]
            fn comparison_is_antisymmetric(a in prop::collection::vec(0u64..4, 4),
                                           b in prop::collection::vec(0u64..4, 4)) {
                let mut a = a; a.sort();
                let mut b = b; b.sort();
                let ha = hodge_polygon(&a).unwrap();
                let hb = hodge_polygon(&b).unwrap();
                prop_assert!(lies_on_or_above(&ha, &ha).unwrap());
                if lies_on_or_above(&ha, &hb).unwrap() && lies_on_or_above(&hb, &ha).unwrap() {
                    prop_assert_eq!(ha.vertices(), hb.vertices());
                }
            }
        }
    }
}
