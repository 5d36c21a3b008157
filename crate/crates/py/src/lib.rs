//! Python bindings. Integers cross the boundary as Python `int`, groups as
//! lists of invariant factors, matrices as lists of rows.

use abelsurf::abgroup::HodgeVector;
use abelsurf::classify::{self, Verdict};
use abelsurf::lattice::{self, IntMatrix, OracleOptions};
use abelsurf::polygon::{self, ConvexPolygon};
use abelsurf::{Error, IntPolynomial};
use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InternalInvariant(_) | Error::Overflow(_) => {
            PyRuntimeError::new_err(format!("{}: {e}", e.code()))
        }
        _ => PyValueError::new_err(format!("{}: {e}", e.code())),
    }
}

fn matrix_rows(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    m.rows()
}

/// A validated Weil polynomial of an abelian surface.
#[pyclass(name = "WeilPolynomial", frozen)]
struct PyWeil {
    inner: abelsurf::WeilPolynomial,
}

#[pymethods]
impl PyWeil {
    /// `coeffs` are the five coefficients, highest degree first.
    #[new]
    fn new(q: BigInt, coeffs: Vec<BigInt>) -> PyResult<Self> {
        let inner = abelsurf::validate_weil(&q, &coeffs).map_err(to_py)?;
        Ok(PyWeil { inner })
    }

    #[getter]
    fn q(&self) -> BigInt {
        self.inner.q.clone()
    }

    #[getter]
    fn coeffs(&self) -> Vec<BigInt> {
        self.inner.descending()
    }

    #[getter]
    fn case(&self) -> PyResult<u8> {
        Ok(abelsurf::detect_shape(&self.inner).map_err(to_py)?.case_number())
    }

    fn factors(&self) -> PyResult<String> {
        Ok(abelsurf::detect_shape(&self.inner).map_err(to_py)?.factors_string())
    }

    fn value_at_one(&self) -> BigInt {
        self.inner.value_at_one()
    }

    /// Every group of points, each as its invariant factors.
    fn groups(&self) -> PyResult<Vec<Vec<BigInt>>> {
        let r = classify::enumerate_groups(&self.inner).map_err(to_py)?;
        Ok(r.groups.iter().map(|g| g.nontrivial_invariants()).collect())
    }

    /// `(True, None)` or `(False, reason)`.
    fn check(&self, group: Vec<BigInt>) -> PyResult<(bool, Option<String>)> {
        let g = abelsurf::FiniteAbelianGroup::from_cyclic_orders(&group).map_err(to_py)?;
        Ok(match classify::decide_group(&self.inner, &g).map_err(to_py)? {
            Verdict::Yes => (true, None),
            Verdict::No(r) => (false, Some(r.to_string())),
        })
    }

    /// Admissible ℓ-parts at one prime.
    fn admissible(&self, ell: BigInt) -> PyResult<Vec<Vec<u64>>> {
        let shape = abelsurf::detect_shape(&self.inner).map_err(to_py)?;
        let d = classify::admissible_at_prime(&self.inner, &shape, &ell).map_err(to_py)?;
        Ok(d.admissible.into_iter().map(|h| h.exponents).collect())
    }

    /// Realized ℓ-parts from the lattice enumeration, with the lattice count.
    #[pyo3(signature = (ell, depth=None, formal=false))]
    fn oracle(&self, ell: BigInt, depth: Option<u32>, formal: bool) -> PyResult<(Vec<Vec<u64>>, u64)> {
        let opts = OracleOptions {
            depth,
            jobs: None,
            formal,
        };
        let r = lattice::run_oracle(&self.inner, &ell, &opts).map_err(to_py)?;
        Ok((r.realized.keys().cloned().collect(), r.lattice_count))
    }

    /// Matrix of `1 − F` on a lattice realizing the given ℓ-part.
    #[pyo3(signature = (ell, exponents, depth=None))]
    fn witness(&self, ell: BigInt, exponents: Vec<u64>, depth: Option<u32>) -> PyResult<Vec<Vec<BigInt>>> {
        let hv = HodgeVector::new(ell.clone(), exponents);
        let w = lattice::witness_for(&self.inner, &ell, &hv, depth).map_err(to_py)?;
        Ok(matrix_rows(&w.matrix))
    }

    fn __repr__(&self) -> String {
        format!("WeilPolynomial(q={}, {})", self.inner.q, self.inner.poly())
    }
}

/// Sorted ℓ-exponents of the cokernel of a square integer matrix.
#[pyfunction]
fn cokernel_exponents(rows: Vec<Vec<BigInt>>, ell: BigInt) -> PyResult<Vec<u64>> {
    let m = IntMatrix::from_rows(rows).map_err(to_py)?;
    Ok(lattice::cokernel_exponents(&m, &ell).map_err(to_py)?.exponents)
}

/// Smith invariants of a square integer matrix.
#[pyfunction]
fn smith_invariants(rows: Vec<Vec<BigInt>>) -> PyResult<Vec<BigInt>> {
    let m = IntMatrix::from_rows(rows).map_err(to_py)?;
    Ok(lattice::snf(&m).invariants)
}

/// Vertices of the Newton polygon; `coeffs` ascending by degree.
#[pyfunction]
fn newton_polygon(coeffs: Vec<BigInt>, ell: BigInt) -> PyResult<Vec<(i64, i64)>> {
    let np = polygon::newton_polygon(&IntPolynomial::new(coeffs), &ell).map_err(to_py)?;
    Ok(np.vertices().to_vec())
}

#[pyfunction]
fn hodge_polygon(exponents: Vec<u64>) -> PyResult<Vec<(i64, i64)>> {
    Ok(polygon::hodge_polygon(&exponents).map_err(to_py)?.vertices().to_vec())
}

/// Number of `F`-stable lattices between `ℓᴺℤ⁴` and `ℤ⁴`.
#[pyfunction]
fn count_stable_lattices(rows: Vec<Vec<BigInt>>, ell: BigInt, depth: u32) -> PyResult<usize> {
    let m = IntMatrix::from_rows(rows).map_err(to_py)?;
    Ok(lattice::enumerate_stable_lattices(&m, &ell, depth).map_err(to_py)?.len())
}

#[pymodule]
#[pyo3(name = "abelsurf")]
fn abelsurf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeil>()?;
    m.add_function(wrap_pyfunction!(cokernel_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(smith_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(newton_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(hodge_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(count_stable_lattices, m)?)?;
    Ok(())
}
