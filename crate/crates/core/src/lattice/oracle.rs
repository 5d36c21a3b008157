//! Brute-force search over Frobenius-stable lattices.
//!
//! A lattice `T` with `ℓᴺ·ℤ⁴ ⊆ T ⊆ ℤ⁴` is stored by its column-style upper
//! triangular Hermite normal form `H`: diagonal `ℓ^{eᵢ}`, entries right of
//! each pivot reduced into `[0, ℓ^{eᵢ})`. `T` is `F`-stable iff
//! `adj(H)·F·H ≡ 0 (mod det H)`, and then the matrix of `1 − F` on `T` is
//! `I − H⁻¹FH`.
//!
//! Lattices are visited breadth first from `ℤ⁴`. The children of `T` are
//! `H·B_W` for every proper subspace `W ⊂ T/ℓT` invariant under `H⁻¹FH mod ℓ`,
//! where `B_W` is a basis of `W̃ + ℓℤ⁴`. Generation `g` holds exactly the
//! stable lattices whose smallest `k` with `ℓᵏℤ⁴ ⊆ T` equals `g`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::matrix::IntMatrix;
use crate::abgroup::{int_to_json, HodgeVector, SURFACE_SLOTS};
use crate::error::{internal, invalid, Error, Result};
use crate::numeric::{int, is_prime, ord_nonzero, Integer};
use crate::polynomial::{detect_shape, IntPolynomial, IsogenyShape, WeilPolynomial};

pub(crate) type M4 = [[i128; 4]; 4];

const ID4: M4 = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

fn overflow() -> Error {
    Error::Overflow("lattice enumeration")
}

fn cmul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn cadd(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(overflow)
}

fn csub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or_else(overflow)
}

pub(crate) fn to_m4(m: &IntMatrix) -> Result<M4> {
    if m.dim() != SURFACE_SLOTS {
        return Err(invalid(format!("expected a 4x4 matrix, got {0}x{0}", m.dim())));
    }
    let mut out = [[0i128; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)].to_i128().ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

pub(crate) fn from_m4(m: &M4) -> IntMatrix {
    IntMatrix::from_rows(
        m.iter()
            .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
            .collect(),
    )
    .expect("4x4")
}

fn mul4(a: &M4, b: &M4) -> Result<M4> {
    let mut c = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0i128;
            for k in 0..4 {
                acc = cadd(acc, cmul(a[i][k], b[k][j])?)?;
            }
            c[i][j] = acc;
        }
    }
    Ok(c)
}

fn det3(m: [[i128; 3]; 3]) -> Result<i128> {
    let t0 = cmul(m[0][0], csub(cmul(m[1][1], m[2][2])?, cmul(m[1][2], m[2][1])?)?)?;
    let t1 = cmul(m[0][1], csub(cmul(m[1][0], m[2][2])?, cmul(m[1][2], m[2][0])?)?)?;
    let t2 = cmul(m[0][2], csub(cmul(m[1][0], m[2][1])?, cmul(m[1][1], m[2][0])?)?)?;
    cadd(csub(t0, t1)?, t2)
}

fn adjugate(a: &M4) -> Result<M4> {
    let mut adj = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut minor = [[0i128; 3]; 3];
            for (r, rr) in (0..4).filter(|&r| r != i).enumerate() {
                for (c, cc) in (0..4).filter(|&c| c != j).enumerate() {
                    minor[r][c] = a[rr][cc];
                }
            }
            let cof = det3(minor)?;
            // adj is the transposed cofactor matrix
            adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    Ok(adj)
}

fn diag_product(h: &M4) -> Result<i128> {
    (0..4).try_fold(1i128, |acc, i| cmul(acc, h[i][i]))
}

/// `H⁻¹·F·H` when it is integral, via `adj(H)·F·H / det H`.
fn conjugate(h: &M4, f: &M4) -> Result<Option<M4>> {
    let d = diag_product(h)?;
    let prod = mul4(&mul4(&adjugate(h)?, f)?, h)?;
    let mut g = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if prod[i][j] % d != 0 {
                return Ok(None);
            }
            g[i][j] = prod[i][j] / d;
        }
    }
    Ok(Some(g))
}

/// `(g, s, t)` with `s·a + t·b = g = gcd(a, b) ≥ 0`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Column-style upper triangular Hermite normal form of a nonsingular
/// matrix (columns are the generators).
pub(crate) fn hnf(mut a: M4) -> Result<M4> {
    for i in (0..4).rev() {
        for j in 0..i {
            let (x, y) = (a[i][i], a[i][j]);
            if y == 0 {
                continue;
            }
            let (g, s, t) = ext_gcd(x, y);
            let (u, v) = (-y / g, x / g);
            for row in a.iter_mut().take(i + 1) {
                let (ci, cj) = (row[i], row[j]);
                row[i] = cadd(cmul(s, ci)?, cmul(t, cj)?)?;
                row[j] = cadd(cmul(u, ci)?, cmul(v, cj)?)?;
            }
        }
        if a[i][i] == 0 {
            return Err(invalid("generators do not span a full-rank lattice"));
        }
        if a[i][i] < 0 {
            for row in a.iter_mut().take(i + 1) {
                row[i] = -row[i];
            }
        }
    }
    for j in 1..4 {
        for i in (0..j).rev() {
            let q = a[i][j].div_euclid(a[i][i]);
            if q != 0 {
                for r in 0..=i {
                    a[r][j] = csub(a[r][j], cmul(q, a[r][i])?)?;
                }
            }
        }
    }
    Ok(a)
}

/// A subspace of `F_ℓ⁴` with the lattice basis of its preimage `W̃ + ℓℤ⁴`.
#[derive(Debug, Clone)]
struct Subspace {
    basis: Vec<[i128; 4]>,
    lift: M4,
}

fn rref(rows: &[[i128; 4]], ell: i128) -> Vec<[i128; 4]> {
    let mut m: Vec<[i128; 4]> = rows
        .iter()
        .map(|r| r.map(|x| x.rem_euclid(ell)))
        .collect();
    let mut rank = 0;
    for col in 0..4 {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = mod_inverse(m[rank][col], ell).expect("nonzero mod prime");
        for x in m[rank].iter_mut() {
            *x = (*x * inv).rem_euclid(ell);
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let c = m[r][col];
                for k in 0..4 {
                    m[r][k] = (m[r][k] - c * m[rank][k]).rem_euclid(ell);
                }
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

fn subspace_from_rref(basis: Vec<[i128; 4]>, ell: i128) -> Subspace {
    let pivots: Vec<usize> = basis
        .iter()
        .map(|r| r.iter().position(|&x| x != 0).expect("rref row"))
        .collect();
    let mut cols: Vec<[i128; 4]> = basis.clone();
    for j in (0..4).filter(|j| !pivots.contains(j)) {
        let mut e = [0i128; 4];
        e[j] = ell;
        cols.push(e);
    }
    let mut lift = [[0i128; 4]; 4];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..4 {
            lift[i][j] = c[i];
        }
    }
    Subspace { basis, lift }
}

fn apply_mod(g: &M4, v: &[i128; 4], ell: i128) -> [i128; 4] {
    let mut out = [0i128; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|k| g[i][k] * v[k]).sum::<i128>().rem_euclid(ell);
    }
    out
}

fn projective_points(ell: i128) -> Vec<[i128; 4]> {
    let mut pts = Vec::new();
    for lead in 0..4 {
        let free = 3 - lead;
        let count = ell.pow(free as u32);
        for idx in 0..count {
            let mut v = [0i128; 4];
            v[lead] = 1;
            let mut k = idx;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = k % ell;
                k /= ell;
            }
            pts.push(v);
        }
    }
    pts
}

/// All RREF subspaces of `F_ℓ⁴`.
fn all_subspaces(ell: i128) -> Vec<Vec<[i128; 4]>> {
    let mut out = Vec::new();
    for mask in 0u32..16 {
        let pivots: Vec<usize> = (0..4).filter(|b| mask & (1 << b) != 0).collect();
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| {
                let pivots = &pivots;
                (p + 1..4).filter(move |c| !pivots.contains(c)).map(move |c| (r, c))
            })
            .collect();
        let count = ell.pow(free.len() as u32);
        for idx in 0..count {
            let mut rows = vec![[0i128; 4]; pivots.len()];
            for (r, &p) in pivots.iter().enumerate() {
                rows[r][p] = 1;
            }
            let mut k = idx;
            for &(r, c) in &free {
                rows[r][c] = k % ell;
                k /= ell;
            }
            out.push(rows);
        }
    }
    out
}

/// Invariant subspaces of `g mod ℓ`, grown from `0` by adding cyclic
/// submodules one vector at a time.
fn invariant_subspaces(g: &M4, ell: i128) -> Vec<Subspace> {
    let scalar = (0..4).all(|i| (0..4).all(|j| i == j || g[i][j] == 0))
        && (0..4).all(|i| g[i][i] == g[0][0]);
    if scalar {
        return all_subspaces(ell)
            .into_iter()
            .map(|b| subspace_from_rref(b, ell))
            .collect();
    }
    let points = projective_points(ell);
    let mut seen: HashSet<Vec<[i128; 4]>> = HashSet::new();
    let mut queue: Vec<Vec<[i128; 4]>> = vec![Vec::new()];
    seen.insert(Vec::new());
    let mut head = 0;
    while head < queue.len() {
        let w = queue[head].clone();
        head += 1;
        if w.len() == 4 {
            continue;
        }
        for v in &points {
            let mut rows = w.clone();
            let mut x = *v;
            for _ in 0..4 {
                rows.push(x);
                x = apply_mod(g, &x, ell);
            }
            let u = rref(&rows, ell);
            if u.len() > w.len() && seen.insert(u.clone()) {
                queue.push(u);
            }
        }
    }
    queue.sort();
    queue.into_iter().map(|b| subspace_from_rref(b, ell)).collect()
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let (g, s, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| s.rem_euclid(m))
}

/// ℓ-exponents of `coker A` when `ord_ℓ det A = e`, by Smith reduction over
/// `ℤ/ℓ^{e+1}`.
fn local_exponents(a: &M4, ell: i128, e: u64) -> Result<Vec<u64>> {
    let modulus = (0..=e).try_fold(1i128, |acc, _| cmul(acc, ell))?;
    if modulus >= 1i128 << 62 {
        return Err(overflow());
    }
    let mut m = a.map(|r| r.map(|x| x.rem_euclid(modulus)));
    let val = |x: i128| -> u64 {
        if x == 0 {
            return e + 1;
        }
        let (mut x, mut v) = (x, 0);
        while x % ell == 0 {
            x /= ell;
            v += 1;
        }
        v
    };
    let mut exps = Vec::with_capacity(4);
    for t in 0..4 {
        let mut best: Option<(u64, usize, usize)> = None;
        for i in t..4 {
            for j in t..4 {
                let v = val(m[i][j]);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, pi, pj) = best.expect("nonempty block");
        if v > e {
            return Err(internal("cokernel exponents exceed ord det"));
        }
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        let lv = ell.pow(v as u32);
        let unit_inv = mod_inverse(m[t][t] / lv, modulus).ok_or_else(|| internal("pivot is not a unit times a power"))?;
        for i in t + 1..4 {
            if m[i][t] == 0 {
                continue;
            }
            let factor = (m[i][t] / lv * unit_inv).rem_euclid(modulus);
            for k in t..4 {
                m[i][k] = (m[i][k] - factor * m[t][k]).rem_euclid(modulus);
            }
        }
        for j in t + 1..4 {
            if m[t][j] == 0 {
                continue;
            }
            let factor = (m[t][j] / lv * unit_inv).rem_euclid(modulus);
            for row in m.iter_mut().skip(t) {
                row[j] = (row[j] - factor * row[t]).rem_euclid(modulus);
            }
        }
        exps.push(v);
    }
    exps.sort_unstable();
    if exps.iter().sum::<u64>() != e {
        return Err(internal(format!("cokernel exponents {exps:?} do not sum to {e}")));
    }
    Ok(exps)
}

fn small_prime(ell: &Integer) -> Result<i128> {
    if !is_prime(ell) {
        return Err(invalid(format!("{ell} is not prime")));
    }
    ell.to_i128()
        .filter(|&l| l < 1 << 20)
        .ok_or_else(|| invalid(format!("prime {ell} is too large for lattice enumeration")))
}

fn identity_minus(g: &M4) -> Result<M4> {
    let mut out = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = csub(ID4[i][j], g[i][j])?;
        }
    }
    Ok(out)
}

/// Runs `work` inside a pool of `jobs` threads, or the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(0) => Err(invalid("--jobs must be positive")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| internal(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Visits every `F`-stable lattice between `ℓᴺℤ⁴` and `ℤ⁴`, in generation
/// order and sorted by `H` within a generation. `visit(H, H⁻¹FH)` is called
/// once per lattice.
fn walk<T, V>(f: &M4, ell: i128, depth: u32, visit: V) -> Result<Vec<(u32, M4, T)>>
where
    T: Send,
    V: Fn(&M4, &M4) -> Result<T> + Sync,
{
    let cache: Mutex<HashMap<M4, Arc<Vec<Subspace>>>> = Mutex::new(HashMap::new());
    let subspaces_for = |g: &M4| -> Arc<Vec<Subspace>> {
        let key = g.map(|r| r.map(|x| x.rem_euclid(ell)));
        if let Some(s) = cache.lock().expect("cache lock").get(&key) {
            return Arc::clone(s);
        }
        let s = Arc::new(invariant_subspaces(&key, ell));
        cache
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert(s)
            .clone()
    };

    let mut seen: HashSet<M4> = HashSet::new();
    seen.insert(ID4);
    let mut generation = vec![ID4];
    let mut out = Vec::new();
    for level in 0..=depth {
        let expand = level < depth;
        let results: Vec<(M4, T, Vec<M4>)> = generation
            .par_iter()
            .map(|h| {
                let g = conjugate(h, f)?
                    .ok_or_else(|| internal("enumerated lattice is not Frobenius-stable"))?;
                let value = visit(h, &g)?;
                let mut children = Vec::new();
                if expand {
                    for w in subspaces_for(&g).iter().filter(|w| w.basis.len() < 4) {
                        children.push(hnf(mul4(h, &w.lift)?)?);
                    }
                }
                Ok((*h, value, children))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (h, value, children) in results {
            out.push((level, h, value));
            for c in children {
                if seen.insert(c) {
                    next.push(c);
                }
            }
        }
        next.sort_unstable();
        generation = next;
    }
    Ok(out)
}

/// A stable lattice, given by its Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StableLattice {
    pub ell: Integer,
    /// Smallest `k` with `ℓᵏℤ⁴ ⊆ T`.
    pub level: u32,
    pub hnf: IntMatrix,
}

impl StableLattice {
    /// Matrix of `1 − F` in the lattice basis, `I − H⁻¹FH`.
    pub fn one_minus_frobenius(&self, f: &IntMatrix) -> Result<IntMatrix> {
        let h = to_m4(&self.hnf)?;
        let g = conjugate(&h, &to_m4(f)?)?.ok_or_else(|| invalid("lattice is not Frobenius-stable"))?;
        Ok(from_m4(&identity_minus(&g)?))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": int_to_json(&self.ell),
            "level": self.level,
            "hnf": self.hnf.to_json(),
        })
    }
}

pub fn enumerate_stable_lattices(f: &IntMatrix, ell: &Integer, depth: u32) -> Result<Vec<StableLattice>> {
    enumerate_stable_lattices_with_jobs(f, ell, depth, None)
}

pub fn enumerate_stable_lattices_with_jobs(
    f: &IntMatrix,
    ell: &Integer,
    depth: u32,
    jobs: Option<usize>,
) -> Result<Vec<StableLattice>> {
    let l = small_prime(ell)?;
    let fm = to_m4(f)?;
    let found = with_jobs(jobs, || walk(&fm, l, depth, |_, _| Ok(())))??;
    Ok(found
        .into_iter()
        .map(|(level, h, ())| StableLattice {
            ell: ell.clone(),
            level,
            hnf: from_m4(&h),
        })
        .collect())
}

/// `F` acting on `ℤ⁴` with characteristic polynomial `f`:
/// companion matrices on the non-scalar factors, `−σs` on `(t + σs)`.
pub fn frobenius_model(shape: &IsogenyShape) -> IntMatrix {
    let comp = |p: &IntPolynomial| IntMatrix::companion(p).expect("monic factor");
    match shape {
        IsogenyShape::Case1 { f } => comp(f),
        IsogenyShape::Case2 { p } => IntMatrix::block_diag(&[comp(p), comp(p)]),
        IsogenyShape::Case3 { p, sign, s } => {
            IntMatrix::block_diag(&[comp(p), IntMatrix::scalar(2, -sign.apply(s))])
        }
        IsogenyShape::Case4 { sign, s } => IntMatrix::scalar(4, -sign.apply(s)),
    }
}

/// `ord_ℓ f(1) + 1`.
pub fn default_depth(f: &WeilPolynomial, ell: &Integer) -> u32 {
    ord_nonzero(ell, &f.value_at_one()) as u32 + 1
}

/// How the lattice space was traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// Every stable lattice was visited.
    Full,
    /// `F` is scalar, so `1 − F` looks the same on every lattice; only the
    /// diagonal lattices `diag(ℓ^{e₁} ≤ … ≤ ℓ^{e₄})` were visited, one per
    /// `GL₄(ℤ_ℓ)`-orbit.
    ScalarOrbits,
}

impl Reduction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reduction::Full => "full",
            Reduction::ScalarOrbits => "scalar-orbits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub ell: Integer,
    pub depth: u32,
    pub lattice_count: u64,
    /// Realized vectors, sorted, each with the first lattice realizing it.
    pub realized: BTreeMap<Vec<u64>, IntMatrix>,
    pub reduction: Reduction,
    /// Set when `ℓ | q` was allowed.
    pub formal: bool,
}

impl OracleReport {
    pub fn realized_vectors(&self) -> Vec<HodgeVector> {
        self.realized
            .keys()
            .map(|e| HodgeVector::new(self.ell.clone(), e.clone()))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": int_to_json(&self.ell),
            "depth": self.depth,
            "lattice_count": self.lattice_count,
            "reduction": self.reduction.as_str(),
            "formal": self.formal,
            "realized": self.realized.keys().collect::<Vec<_>>(),
            "witnesses": self
                .realized
                .iter()
                .map(|(e, h)| json!({"vector": e, "hnf": h.to_json()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Knobs for [`run_oracle`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleOptions {
    /// Defaults to [`default_depth`].
    pub depth: Option<u32>,
    pub jobs: Option<usize>,
    /// Allow `ℓ | q`, treating the lattice statement purely formally.
    pub formal: bool,
}

/// Realized ℓ-parts `T/(1−F)T` over the stable lattices; requires `ℓ ∤ q`.
pub fn oracle_realized_set(f: &WeilPolynomial, ell: &Integer, depth: u32) -> Result<OracleReport> {
    run_oracle(
        f,
        ell,
        &OracleOptions {
            depth: Some(depth),
            ..Default::default()
        },
    )
}

/// Same enumeration with `ℓ | q` permitted.
pub fn formal_oracle_realized_set(f: &WeilPolynomial, ell: &Integer, depth: u32) -> Result<OracleReport> {
    run_oracle(
        f,
        ell,
        &OracleOptions {
            depth: Some(depth),
            formal: true,
            ..Default::default()
        },
    )
}

pub fn run_oracle(f: &WeilPolynomial, ell: &Integer, opts: &OracleOptions) -> Result<OracleReport> {
    let l = small_prime(ell)?;
    let divides_q = (&f.q % ell).is_zero();
    if divides_q && !opts.formal {
        return Err(Error::UnsupportedPrime(format!(
            "{ell} divides q = {}; the lattice oracle covers primes away from q",
            f.q
        )));
    }
    let depth = opts.depth.unwrap_or_else(|| default_depth(f, ell));
    let e = ord_nonzero(ell, &f.value_at_one());
    let shape = detect_shape(f)?;
    let frob = frobenius_model(&shape);
    if frob.charpoly() != f.poly() {
        return Err(internal("Frobenius model has the wrong characteristic polynomial"));
    }
    let fm = to_m4(&frob)?;

    let (reduction, visited): (Reduction, Vec<(M4, Vec<u64>)>) = if frob.is_scalar() {
        let one_minus = identity_minus(&fm)?;
        let exps = local_exponents(&one_minus, l, e)?;
        let mut reps = Vec::new();
        for e1 in 0..=depth {
            for e2 in e1..=depth {
                for e3 in e2..=depth {
                    for e4 in e3..=depth {
                        let mut h = [[0i128; 4]; 4];
                        for (i, k) in [e1, e2, e3, e4].into_iter().enumerate() {
                            h[i][i] = l.checked_pow(k).ok_or_else(overflow)?;
                        }
                        reps.push((h, exps.clone()));
                    }
                }
            }
        }
        (Reduction::ScalarOrbits, reps)
    } else {
        let found = with_jobs(opts.jobs, || {
            walk(&fm, l, depth, |_, g| local_exponents(&identity_minus(g)?, l, e))
        })??;
        (
            Reduction::Full,
            found.into_iter().map(|(_, h, v)| (h, v)).collect(),
        )
    };

    let mut realized: BTreeMap<Vec<u64>, IntMatrix> = BTreeMap::new();
    for (h, v) in &visited {
        realized.entry(v.clone()).or_insert_with(|| from_m4(h));
    }
    Ok(OracleReport {
        ell: ell.clone(),
        depth,
        lattice_count: visited.len() as u64,
        realized,
        reduction,
        formal: divides_q,
    })
}

/// The first stable lattice (in enumeration order) whose `1 − F` cokernel
/// has the given ℓ-exponents. Intended for square-free `f`, where no closed
/// form witness is available.
pub fn witness_search_case1(
    f: &WeilPolynomial,
    ell: &Integer,
    hv: &HodgeVector,
    depth: u32,
) -> Result<StableLattice> {
    let shape = detect_shape(f)?;
    if shape.case_number() != 1 {
        return Err(invalid(format!("{f} is not square-free")));
    }
    if hv.slots() != SURFACE_SLOTS {
        return Err(invalid(format!("expected {SURFACE_SLOTS} slots")));
    }
    let l = small_prime(ell)?;
    let e = ord_nonzero(ell, &f.value_at_one());
    let fm = to_m4(&frobenius_model(&shape))?;
    let found = walk(&fm, l, depth, |_, g| local_exponents(&identity_minus(g)?, l, e))?;
    found
        .into_iter()
        .find(|(_, _, v)| *v == hv.exponents)
        .map(|(level, h, _)| StableLattice {
            ell: ell.clone(),
            level,
            hnf: from_m4(&h),
        })
        .ok_or_else(|| {
            Error::DepthExhausted(format!(
                "no lattice with cokernel {} at depth {depth}; try a larger depth",
                hv.tuple_string()
            ))
        })
}

/// Sanity bound used by callers that accept a user-supplied depth.
pub fn check_depth(ell: &Integer, depth: u32) -> Result<()> {
    let bound = int(1) << 28;
    let mut p = Integer::one();
    for _ in 0..depth {
        p *= ell;
        if p > bound {
            return Err(invalid(format!("depth {depth} is too large for ell = {ell}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::cokernel_exponents;
    use crate::polynomial::validate_weil;

    fn weil(q: i64, desc: &[i64]) -> WeilPolynomial {
        let coeffs: Vec<Integer> = desc.iter().map(|&c| int(c)).collect();
        validate_weil(&int(q), &coeffs).unwrap()
    }

    fn realized(r: &OracleReport) -> Vec<Vec<u64>> {
        r.realized.keys().cloned().collect()
    }

    /// Every reduced HNF with diagonal dividing `ℓᴺ` that contains `ℓᴺℤ⁴`
    /// and passes the adjugate stability test.
    fn naive(f: &M4, ell: i128, depth: u32) -> HashSet<M4> {
        let top = ell.pow(depth);
        let mut out = HashSet::new();
        let exps: Vec<u32> = (0..=depth).collect();
        for &a in &exps {
            for &b in &exps {
                for &c in &exps {
                    for &d in &exps {
                        let diag = [ell.pow(a), ell.pow(b), ell.pow(c), ell.pow(d)];
                        let slots = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
                        let total: i128 = slots.iter().map(|&(i, _)| diag[i]).product();
                        for idx in 0..total {
                            let mut h = [[0i128; 4]; 4];
                            for i in 0..4 {
                                h[i][i] = diag[i];
                            }
                            let mut k = idx;
                            for &(i, j) in &slots {
                                h[i][j] = k % diag[i];
                                k /= diag[i];
                            }
                            let scaled = [[top, 0, 0, 0], [0, top, 0, 0], [0, 0, top, 0], [0, 0, 0, top]];
                            let contains = conjugate(&h, &scaled).unwrap().is_some()
                                && {
                                    let det = diag_product(&h).unwrap();
                                    let adj = adjugate(&h).unwrap();
                                    adj.iter().flatten().all(|x| (x * top) % det == 0)
                                };
                            if contains && conjugate(&h, f).unwrap().is_some() {
                                out.insert(h);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn bfs(f: &M4, ell: i128, depth: u32) -> HashSet<M4> {
        let v = walk(f, ell, depth, |_, _| Ok(())).unwrap();
        let set: HashSet<M4> = v.iter().map(|(_, h, _)| *h).collect();
        assert_eq!(set.len(), v.len(), "duplicate lattices");
        set
    }

    #[test]
    fn hnf_is_canonical() {
        let a = [[2, 1, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        let b = mul4(&a, &[[1, 1, 0, 0], [0, 1, 0, 0], [0, 3, 1, 0], [5, 0, 0, 1]]).unwrap();
        assert_eq!(hnf(a).unwrap(), hnf(b).unwrap());
        let h = hnf([[4, 6, 0, 0], [0, 2, 0, 0], [0, 0, 3, 0], [0, 0, 0, 1]]).unwrap();
        assert_eq!(h, [[4, 2, 0, 0], [0, 2, 0, 0], [0, 0, 3, 0], [0, 0, 0, 1]]);
    }

    #[test]
    fn identity_at_depth_one_has_67_lattices() {
        let all = enumerate_stable_lattices(&IntMatrix::identity(4), &int(2), 1).unwrap();
        assert_eq!(all.len(), 67);
        let by_level: Vec<usize> = (0..=1).map(|k| all.iter().filter(|l| l.level == k).count()).collect();
        assert_eq!(by_level, vec![1, 66]);
    }

    #[test]
    fn depth_zero_is_the_standard_lattice() {
        let f = frobenius_model(&detect_shape(&weil(2, &[1, 0, 3, 0, 4])).unwrap());
        let all = enumerate_stable_lattices(&f, &int(3), 0).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].hnf, IntMatrix::identity(4));
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(all_subspaces(2).len(), 67);
        assert_eq!(all_subspaces(3).len(), 212);
        let g = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        assert_eq!(invariant_subspaces(&g, 3).len(), 212);
        // a single Jordan block has a chain of invariant subspaces
        let j = [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]];
        assert_eq!(invariant_subspaces(&j, 2).len(), 5);
    }

    #[test]
    fn bfs_matches_naive_enumeration() {
        let models = [
            (IntMatrix::identity(4), 2, 1),
            (frobenius_model(&detect_shape(&weil(2, &[1, 2, 5, 4, 4])).unwrap()), 2, 1),
            (frobenius_model(&detect_shape(&weil(2, &[1, 0, 3, 0, 4])).unwrap()), 2, 2),
            (frobenius_model(&detect_shape(&weil(4, &[1, 3, 4, 12, 16])).unwrap()), 3, 1),
            (frobenius_model(&detect_shape(&weil(4, &[1, 3, 4, 12, 16])).unwrap()), 2, 2),
        ];
        for (f, l, n) in models {
            let fm = to_m4(&f).unwrap();
            assert_eq!(bfs(&fm, l, n), naive(&fm, l, n), "F = {f}, ell = {l}, N = {n}");
        }
    }

    #[test]
    fn case2_model_has_fewer_stable_lattices() {
        let f = frobenius_model(&detect_shape(&weil(2, &[1, 2, 5, 4, 4])).unwrap());
        let n = enumerate_stable_lattices(&f, &int(2), 1).unwrap().len();
        assert!(n < 67);
        let fm = to_m4(&f).unwrap();
        assert_eq!(n, naive(&fm, 2, 1).len());
    }

    #[test]
    fn frobenius_models_have_the_right_characteristic_polynomial() {
        for (q, c) in [
            (4, [1, 8, 24, 32, 16]),
            (2, [1, 2, 5, 4, 4]),
            (4, [1, 3, 4, 12, 16]),
            (2, [1, 0, 3, 0, 4]),
            (9, [1, -12, 54, -108, 81]),
        ] {
            let w = weil(q, &c);
            let f = frobenius_model(&detect_shape(&w).unwrap());
            assert_eq!(f.charpoly(), w.poly());
        }
        let case4 = frobenius_model(&detect_shape(&weil(4, &[1, 8, 24, 32, 16])).unwrap());
        assert_eq!(case4, IntMatrix::scalar(4, int(-2)));
    }

    #[test]
    fn local_exponents_agree_with_snf() {
        let mats: [M4; 3] = [
            [[2, 3, -4, 12], [1, 0, 0, 0], [1, -3, 3, 0], [0, 0, 1, 0]],
            [[3, -4, 0, 0], [1, 0, 0, 0], [0, 0, 3, -4], [0, 0, 1, 0]],
            [[4, 2, 0, 6], [2, 8, 4, 0], [0, 0, 12, 2], [6, 0, 2, 18]],
        ];
        for m in mats {
            let big = from_m4(&m);
            for l in [2i128, 3, 5] {
                let expected = cokernel_exponents(&big, &int(l as i64)).unwrap();
                let e = ord_nonzero(&int(l as i64), &big.det());
                assert_eq!(local_exponents(&m, l, e).unwrap(), expected.exponents);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let r = formal_oracle_realized_set(&weil(2, &[1, 0, 3, 0, 4]), &int(2), 4).unwrap();
        assert_eq!(realized(&r), vec![vec![0, 0, 0, 3], vec![0, 0, 1, 2]]);
        assert!(r.formal);

        let r = formal_oracle_realized_set(&weil(2, &[1, 2, 5, 4, 4]), &int(2), 5).unwrap();
        assert_eq!(realized(&r), vec![vec![0, 0, 2, 2]]);

        let r = oracle_realized_set(&weil(4, &[1, 3, 4, 12, 16]), &int(3), 3).unwrap();
        assert_eq!(realized(&r), vec![vec![0, 0, 1, 1]]);
        assert!(!r.formal);
        assert_eq!(r.reduction, Reduction::Full);
    }

    #[test]
    fn oracle_rejects_primes_dividing_q() {
        let err = oracle_realized_set(&weil(2, &[1, 0, 3, 0, 4]), &int(2), 2).unwrap_err();
        assert_eq!(err.code(), "unsupported-prime");
        assert!(oracle_realized_set(&weil(2, &[1, 0, 3, 0, 4]), &int(4), 2).is_err());
    }

    #[test]
    fn scalar_models_use_orbit_representatives() {
        let r = oracle_realized_set(&weil(4, &[1, 8, 24, 32, 16]), &int(3), 5).unwrap();
        assert_eq!(r.reduction, Reduction::ScalarOrbits);
        assert_eq!(realized(&r), vec![vec![1, 1, 1, 1]]);
        // multisets of size 4 from {0..5}
        assert_eq!(r.lattice_count, 126);
    }

    #[test]
    fn realized_sets_grow_with_depth() {
        let w = weil(4, &[1, 3, 4, 12, 16]);
        let mut prev: Vec<Vec<u64>> = Vec::new();
        for n in 0..=3 {
            let cur = realized(&oracle_realized_set(&w, &int(3), n).unwrap());
            assert!(prev.iter().all(|v| cur.contains(v)));
            prev = cur;
        }
    }

    #[test]
    fn homothety_keeps_the_cokernel() {
        let w = weil(4, &[1, 3, 4, 12, 16]);
        let f = frobenius_model(&detect_shape(&w).unwrap());
        for lat in enumerate_stable_lattices(&f, &int(3), 1).unwrap() {
            let scaled = StableLattice {
                hnf: lat.hnf.scale(&int(3)),
                ..lat.clone()
            };
            let a = cokernel_exponents(&lat.one_minus_frobenius(&f).unwrap(), &int(3)).unwrap();
            let b = cokernel_exponents(&scaled.one_minus_frobenius(&f).unwrap(), &int(3)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn witness_search_examples() {
        let w = weil(2, &[1, 0, 3, 0, 4]);
        let f = frobenius_model(&detect_shape(&w).unwrap());
        for target in [[0, 0, 0, 3], [0, 0, 1, 2]] {
            let hv = HodgeVector::new(int(2), target.to_vec());
            let lat = witness_search_case1(&w, &int(2), &hv, 4).unwrap();
            let m = lat.one_minus_frobenius(&f).unwrap();
            assert_eq!(cokernel_exponents(&m, &int(2)).unwrap(), hv);
        }
        let bad = HodgeVector::new(int(2), vec![0, 1, 1, 1]);
        let err = witness_search_case1(&w, &int(2), &bad, 4).unwrap_err();
        assert_eq!(err.code(), "depth-exhausted");
    }

    #[test]
    fn jobs_do_not_change_the_result() {
        let w = weil(4, &[1, 0, -8, 0, 16]);
        let a = run_oracle(&w, &int(3), &OracleOptions { jobs: Some(1), ..Default::default() }).unwrap();
        let b = run_oracle(&w, &int(3), &OracleOptions { jobs: Some(4), ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }
}
