//! Cyclotomic polynomials and the two divisibility tests for mask polynomials:
//! exact remainders modulo `Φ_s`, and vanishing of all `N`-cuboid evaluations.
//! Also fiber decompositions and the divisor profile `S_A`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, factorize, gcd, lcm, PrimeFactorization};
use crate::multiset::Multiset;
use crate::Error;

/// Dense integer polynomial; `coeffs[k]` is the coefficient of `X^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPolynomial { coeffs: vec![1] }
    }

    /// `X^n − 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![0; n + 1];
        c[0] = -1;
        c[n] += 1;
        IntPolynomial::new(c)
    }

    /// Representative polynomial of a multiset: exponents taken in `[0, M)`.
    pub fn from_multiset(a: &Multiset) -> Self {
        let deg = a.weights().keys().next_back().map_or(0, |&x| x as usize + 1);
        let mut c = vec![0; deg];
        for (x, w) in a.iter() {
            c[x as usize] = w;
        }
        IntPolynomial::new(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_int(&self, x: i64) -> i64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::zero();
        }
        let mut c = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPolynomial::new(c)
    }

    /// `P(X^k)`.
    pub fn compose_power(&self, k: usize) -> IntPolynomial {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let mut c = vec![0; (self.coeffs.len() - 1) * k + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[i * k] = a;
        }
        IntPolynomial::new(c)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &IntPolynomial) -> (IntPolynomial, IntPolynomial) {
        let d = divisor
            .degree()
            .expect("division by the zero polynomial");
        assert_eq!(divisor.coeffs[d], 1, "divisor must be monic");
        let mut r = self.coeffs.clone();
        if r.len() <= d {
            return (IntPolynomial::zero(), self.clone());
        }
        let mut q = vec![0i64; r.len() - d];
        for k in (d..r.len()).rev() {
            let lead = r[k];
            if lead == 0 {
                continue;
            }
            q[k - d] = lead;
            for (i, &c) in divisor.coeffs.iter().enumerate() {
                r[k - d + i] -= lead * c;
            }
        }
        r.truncate(d);
        (IntPolynomial::new(q), IntPolynomial::new(r))
    }

    /// Exact quotient by a monic divisor, or `None` if the remainder is nonzero.
    pub fn div_exact(&self, divisor: &IntPolynomial) -> Option<IntPolynomial> {
        let (q, r) = self.div_rem_monic(divisor);
        r.is_zero().then_some(q)
    }
}

fn cache() -> &'static RwLock<HashMap<u64, Arc<IntPolynomial>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<IntPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The `s`-th cyclotomic polynomial, cached process-wide.
///
/// Built from `Φ_s(X) = Φ_{rad s}(X^{s/rad s})` and, for squarefree `s = mp`
/// with `p ∤ m`, `Φ_s(X) = Φ_m(X^p) / Φ_m(X)`.
pub fn cyclotomic_poly(s: u64) -> Arc<IntPolynomial> {
    assert!(s >= 1, "cyclotomic index must be positive");
    if let Some(p) = cache().read().unwrap().get(&s) {
        return p.clone();
    }
    let poly = Arc::new(build_cyclotomic(s));
    cache()
        .write()
        .unwrap()
        .entry(s)
        .or_insert(poly)
        .clone()
}

fn build_cyclotomic(s: u64) -> IntPolynomial {
    if s == 1 {
        return IntPolynomial::new(vec![-1, 1]);
    }
    let f = factorize(s);
    let rad = f.radical();
    if rad != s {
        return cyclotomic_poly(rad).compose_power((s / rad) as usize);
    }
    let p = *f.primes().last().unwrap();
    let m = s / p;
    if m == 1 {
        return IntPolynomial::new(vec![1; p as usize]);
    }
    let base = cyclotomic_poly(m);
    base.compose_power(p as usize)
        .div_exact(&base)
        .expect("Φ_m(X) divides Φ_m(X^p)")
}

/// Exact test of `Φ_s | A(X)` for sparse exponent/weight pairs.
fn sparse_divisible(terms: impl Iterator<Item = (u64, i64)>, s: u64) -> bool {
    // X^s ≡ 1 mod Φ_s, and Φ_s(X) = Φ_rad(X^r): exponent classes mod r split.
    let rad = factorize(s).radical();
    let r = s / rad;
    let mut classes: BTreeMap<u64, BTreeMap<u64, i128>> = BTreeMap::new();
    for (x, w) in terms {
        let x = x % s;
        *classes.entry(x % r).or_default().entry(x / r).or_insert(0) += w as i128;
    }
    let phi = cyclotomic_poly(rad);
    let d = phi.degree().unwrap();
    classes.values().all(|class| {
        let top = match class.iter().rev().find(|(_, &w)| w != 0) {
            Some((&k, _)) => k as usize,
            None => return true,
        };
        let mut v = vec![0i128; top + 1];
        for (&k, &w) in class.range(..=top as u64) {
            v[k as usize] += w;
        }
        for k in (d..v.len()).rev() {
            let lead = v[k];
            if lead == 0 {
                continue;
            }
            for (i, &c) in phi.coeffs().iter().enumerate() {
                v[k - d + i] -= lead * c as i128;
            }
        }
        v.iter().take(d).all(|&c| c == 0)
    })
}

/// `Φ_s | A(X)`, decided by an exact polynomial remainder.
pub fn divides_by_remainder(a: &Multiset, s: u64) -> bool {
    assert!(s >= 1, "cyclotomic index must be positive");
    sparse_divisible(a.iter(), s)
}

/// An `N`-cuboid with mask `X^c ∏_j (1 − X^{d_j N/p_j})`, one unit `d_j mod p_j`
/// per prime `p_j | N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cuboid {
    #[serde(rename = "N")]
    modulus: u64,
    #[serde(rename = "c")]
    offset: u64,
    #[serde(rename = "d")]
    directions: BTreeMap<u64, u64>,
}

impl Cuboid {
    pub fn new(modulus: u64, offset: u64, directions: BTreeMap<u64, u64>) -> Result<Self, Error> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("cuboid modulus must be positive".into()));
        }
        let primes = arith::prime_factors(modulus);
        let given: Vec<u64> = directions.keys().copied().collect();
        if given != primes {
            return Err(Error::InvalidArgument(format!(
                "cuboid directions {given:?} do not match the primes {primes:?} of {modulus}"
            )));
        }
        let mut dirs = BTreeMap::new();
        for (&p, &d) in &directions {
            let d = d % p;
            if d == 0 {
                return Err(Error::InvalidArgument(format!(
                    "direction {d} is not a unit mod {p}"
                )));
            }
            dirs.insert(p, d);
        }
        Ok(Cuboid {
            modulus,
            offset: offset % modulus,
            directions: dirs,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn directions(&self) -> &BTreeMap<u64, u64> {
        &self.directions
    }

    pub fn translate(&self, t: i64) -> Cuboid {
        Cuboid {
            offset: arith::rem(self.offset as i128 + t as i128, self.modulus),
            ..self.clone()
        }
    }

    /// Signed vertices `(position, ±1)`, one per subset of directions.
    pub fn vertices(&self) -> Vec<(u64, i64)> {
        let n = self.modulus;
        let steps: Vec<u64> = self
            .directions
            .iter()
            .map(|(&p, &d)| d * (n / p) % n)
            .collect();
        let mut out = Vec::with_capacity(1 << steps.len());
        for mask in 0u32..(1 << steps.len()) {
            let mut pos = self.offset;
            let mut sign = 1i64;
            for (j, &step) in steps.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    pos = (pos + step) % n;
                    sign = -sign;
                }
            }
            out.push((pos, sign));
        }
        out
    }

    /// The cuboid as a signed multiset over `Z_N`; colliding vertices add.
    pub fn to_multiset(&self) -> Multiset {
        Multiset::from_weights(
            self.modulus,
            self.vertices().into_iter().map(|(x, w)| (x as i64, w)),
        )
        .expect("cuboid modulus is valid")
    }
}

fn eval_on_reduced(reduced: &Multiset, cuboid: &Cuboid) -> i64 {
    cuboid
        .vertices()
        .into_iter()
        .map(|(x, s)| s * reduced.weight(x))
        .sum()
}

/// `A^N[Δ] = Σ_x w_A^N(x) w_Δ(x)`.
pub fn delta_evaluate(a: &Multiset, cuboid: &Cuboid) -> Result<i64, Error> {
    let reduced = a.reduce_mod(cuboid.modulus())?;
    Ok(eval_on_reduced(&reduced, cuboid))
}

/// Every unit choice `(d_1, …, d_K)` with `1 ≤ d_j < p_j`.
fn direction_choices(primes: &[u64]) -> Vec<BTreeMap<u64, u64>> {
    let mut out = vec![BTreeMap::new()];
    for &p in primes {
        out = out
            .into_iter()
            .flat_map(|m| {
                (1..p).map(move |d| {
                    let mut m = m.clone();
                    m.insert(p, d);
                    m
                })
            })
            .collect();
    }
    out
}

/// `N`-cuboids that can have a nonzero evaluation against `reduced`, in
/// lexicographic `(c, d)` order. Cuboids missing the support evaluate to 0.
fn candidate_cuboids(reduced: &Multiset, n: u64) -> Vec<Cuboid> {
    let primes = arith::prime_factors(n);
    let choices = direction_choices(&primes);
    let vertex_count = 1u64 << primes.len();
    let touching = reduced.support_len() as u64 * vertex_count;
    let mut out = BTreeSet::new();
    if touching >= n {
        for c in 0..n {
            for d in &choices {
                out.insert(Cuboid {
                    modulus: n,
                    offset: c,
                    directions: d.clone(),
                });
            }
        }
    } else {
        for d in &choices {
            let probe = Cuboid {
                modulus: n,
                offset: 0,
                directions: d.clone(),
            };
            let shifts: Vec<u64> = probe.vertices().into_iter().map(|(x, _)| x).collect();
            for x in reduced.support() {
                for &v in &shifts {
                    out.insert(Cuboid {
                        modulus: n,
                        offset: (x + n - v) % n,
                        directions: d.clone(),
                    });
                }
            }
        }
    }
    out.into_iter().collect()
}

/// `Φ_N | A`, decided by checking that every `N`-cuboid evaluation vanishes.
/// When `N ∤ M` the representative polynomial of `A` is reduced mod `X^N − 1`.
pub fn divides_by_cuboids(a: &Multiset, n: u64) -> Result<bool, Error> {
    Ok(first_nonvanishing_cuboid(a, n)?.is_none())
}

/// The lexicographically least `(c, d)` cuboid with a nonzero evaluation.
pub fn first_nonvanishing_cuboid(a: &Multiset, n: u64) -> Result<Option<(Cuboid, i64)>, Error> {
    if n == 0 || n > arith::MODULUS_CEILING {
        return Err(Error::InvalidArgument(format!("cuboid scale {n} out of range")));
    }
    let reduced = a.reduce_exponents(n);
    let candidates = candidate_cuboids(&reduced, n);
    let hit = if candidates.len() > 4096 {
        candidates
            .par_iter()
            .map(|c| (c, eval_on_reduced(&reduced, c)))
            .find_first(|&(_, v)| v != 0)
    } else {
        candidates
            .iter()
            .map(|c| (c, eval_on_reduced(&reduced, c)))
            .find(|&(_, v)| v != 0)
    };
    Ok(hit.map(|(c, v)| (c.clone(), v)))
}

/// All `N`-cuboid evaluations that can be nonzero, keyed by cuboid.
pub fn nonzero_evaluations(a: &Multiset, n: u64) -> Result<Vec<(Cuboid, i64)>, Error> {
    let reduced = a.reduce_mod(n)?;
    Ok(candidate_cuboids(&reduced, n)
        .into_iter()
        .map(|c| {
            let v = eval_on_reduced(&reduced, &c);
            (c, v)
        })
        .filter(|&(_, v)| v != 0)
        .collect())
}

/// One direction of a fiber decomposition: `P(X)·F_p^N(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberTerm {
    pub prime: u64,
    /// Coefficients of `P`, indexed by the least residue of each fiber.
    pub coefficients: Multiset,
}

/// `Σ_i P_i(X) F_i^N(X) mod X^N − 1`.
pub fn recompose(terms: &[FiberTerm], n: u64) -> Result<Multiset, Error> {
    let mut out = Multiset::new(n)?;
    for t in terms {
        let fiber = Multiset::fiber(n, t.prime, 0)?;
        out = out.add(&t.coefficients.convolve(&fiber)?)?;
    }
    Ok(out)
}

/// The `Z_N` structure split into `D = N / rad N` blocks, each a copy of
/// `Z_rad ≅ ∏ Z_{p_i}`.
struct BlockGeometry {
    rad: u64,
    block_step: u64,
    primes: Vec<u64>,
}

impl BlockGeometry {
    fn new(n: u64) -> Self {
        let f: PrimeFactorization = factorize(n);
        let rad = f.radical();
        BlockGeometry {
            rad,
            block_step: n / rad,
            primes: f.primes(),
        }
    }

    /// Splits reduced weights into dense block functions on `Z_rad`.
    fn blocks(&self, reduced: &Multiset) -> BTreeMap<u64, Vec<i64>> {
        let mut blocks: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
        for (x, w) in reduced.iter() {
            let b = x % self.block_step;
            let y = x / self.block_step;
            blocks.entry(b).or_insert_with(|| vec![0; self.rad as usize])[y as usize] += w;
        }
        blocks
    }

    fn line_step(&self, p: u64) -> u64 {
        self.rad / p
    }

    /// The point of the `p`-line through `y` whose `p`-coordinate is `a`.
    fn with_coord(&self, y: u64, p: u64, a: u64) -> u64 {
        let step = self.line_step(p);
        let inv = arith::inv_mod(step % p, p).unwrap();
        let cur = y % p;
        let t = arith::mul_mod((a + p - cur) % p, inv, p);
        (y + t * step) % self.rad
    }

    /// Least residue in `Z_N` of the `p`-fiber through block point `(b, y)`.
    fn fiber_base(&self, b: u64, y: u64, p: u64) -> u64 {
        let step = self.line_step(p);
        (0..p)
            .map(|k| b + self.block_step * ((y + k * step) % self.rad))
            .min()
            .unwrap()
    }
}

/// Signed decomposition of `A mod X^N − 1` as a combination of `N`-fibers.
///
/// Requires `Φ_N | A`.
pub fn fiber_decompose(a: &Multiset, n: u64) -> Result<Vec<FiberTerm>, Error> {
    if n < 2 {
        return Err(Error::InvalidArgument("fiber scale must be at least 2".into()));
    }
    if !divides_by_remainder(a, n) {
        return Err(Error::Precondition(format!("Φ_{n} does not divide A")));
    }
    let geo = BlockGeometry::new(n);
    let reduced = a.reduce_exponents(n);
    let mut coeffs: BTreeMap<u64, Multiset> = geo
        .primes
        .iter()
        .map(|&p| (p, Multiset::new(n).unwrap()))
        .collect();
    for (b, mut f) in geo.blocks(&reduced) {
        for &p in &geo.primes {
            // Reference hyperplane: the p-coordinate value with the fewest
            // nonzero residual entries, so a single fiber decomposes to itself.
            let a_ref = (0..p)
                .min_by_key(|&a| {
                    (0..geo.rad)
                        .filter(|&y| y % p == a && f[y as usize] != 0)
                        .count()
                })
                .unwrap();
            let line_vals: Vec<i64> = (0..geo.rad)
                .map(|y| f[geo.with_coord(y, p, a_ref) as usize])
                .collect();
            for y in 0..geo.rad {
                let v = line_vals[y as usize];
                if v == 0 {
                    continue;
                }
                f[y as usize] -= v;
                if y % p == a_ref {
                    coeffs
                        .get_mut(&p)
                        .unwrap()
                        .add_weight(geo.fiber_base(b, y, p), v);
                }
            }
        }
        if f.iter().any(|&v| v != 0) {
            return Err(Error::Internal(
                "residual after fiber elimination is nonzero".into(),
            ));
        }
    }
    let terms: Vec<FiberTerm> = coeffs
        .into_iter()
        .filter(|(_, c)| !c.is_empty())
        .map(|(prime, coefficients)| FiberTerm {
            prime,
            coefficients,
        })
        .collect();
    if recompose(&terms, n)? != reduced {
        return Err(Error::Internal("fiber decomposition does not recompose".into()));
    }
    Ok(terms)
}

/// Decomposition with nonnegative coefficients, for nonnegative `A` and `N`
/// with exactly two prime factors.
pub fn fiber_decompose_nonneg(a: &Multiset, n: u64) -> Result<Vec<FiberTerm>, Error> {
    if !a.is_nonnegative() {
        return Err(Error::Precondition("multiset has a negative weight".into()));
    }
    let primes = arith::prime_factors(n);
    if primes.len() != 2 {
        return Err(Error::Precondition(format!(
            "{n} does not have exactly two prime factors"
        )));
    }
    if !divides_by_remainder(a, n) {
        return Err(Error::Precondition(format!("Φ_{n} does not divide A")));
    }
    let (p, q) = (primes[0], primes[1]);
    let geo = BlockGeometry::new(n);
    let reduced = a.reduce_exponents(n);
    let mut p_coeffs = Multiset::new(n)?;
    let mut q_coeffs = Multiset::new(n)?;
    for (b, f) in geo.blocks(&reduced) {
        // Block point with coordinates (x mod p, y mod q).
        let at = |x: u64, y: u64| {
            let z = geo.with_coord(geo.with_coord(0, p, x), q, y);
            f[z as usize]
        };
        let x_min = (0..p).min_by_key(|&x| (at(x, 0), x)).unwrap();
        let base = at(x_min, 0);
        for y in 0..q {
            let u = at(x_min, y);
            let z = geo.with_coord(geo.with_coord(0, p, 0), q, y);
            p_coeffs.add_weight(geo.fiber_base(b, z, p), u);
        }
        for x in 0..p {
            let v = at(x, 0) - base;
            let z = geo.with_coord(geo.with_coord(0, p, x), q, 0);
            q_coeffs.add_weight(geo.fiber_base(b, z, q), v);
        }
    }
    let terms: Vec<FiberTerm> = [(p, p_coeffs), (q, q_coeffs)]
        .into_iter()
        .filter(|(_, c)| !c.is_empty())
        .map(|(prime, coefficients)| FiberTerm {
            prime,
            coefficients,
        })
        .collect();
    if recompose(&terms, n)? != reduced || terms.iter().any(|t| !t.coefficients.is_nonnegative()) {
        return Err(Error::Internal(
            "nonnegative two-prime decomposition failed".into(),
        ));
    }
    Ok(terms)
}

/// `S_A = {s : Φ_s | A, gcd(s, L) = 1}` with its lcm and per-prime exponent sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorProfile {
    cardinality: i64,
    #[serde(rename = "L")]
    copriming_modulus: u64,
    #[serde(rename = "S_A")]
    members: Vec<u64>,
    #[serde(rename = "s_A")]
    lcm: u64,
    #[serde(rename = "exp")]
    exponents: BTreeMap<u64, Vec<u32>>,
}

impl DivisorProfile {
    /// Profile from an explicit divisor list.
    pub fn from_members(cardinality: i64, l: u64, members: &[u64]) -> Self {
        let mut members: Vec<u64> = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let s_lcm = members.iter().fold(1, |acc, &s| lcm(acc, s));
        let exponents = arith::prime_factors(s_lcm)
            .into_iter()
            .map(|p| {
                let set: BTreeSet<u32> = members.iter().map(|&s| arith::valuation(s, p)).collect();
                (p, set.into_iter().collect())
            })
            .collect();
        DivisorProfile {
            cardinality,
            copriming_modulus: l,
            members,
            lcm: s_lcm,
            exponents,
        }
    }

    pub fn cardinality(&self) -> i64 {
        self.cardinality
    }

    pub fn copriming_modulus(&self) -> u64 {
        self.copriming_modulus
    }

    /// `S_A`, increasing.
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// `s_A = lcm(S_A)`.
    pub fn lcm(&self) -> u64 {
        self.lcm
    }

    /// Primes dividing `s_A`.
    pub fn primes(&self) -> Vec<u64> {
        self.exponents.keys().copied().collect()
    }

    /// `EXP(i)` as a sorted set.
    pub fn exponent_set(&self, p: u64) -> &[u32] {
        self.exponents.get(&p).map_or(&[], |v| v.as_slice())
    }

    /// `E_i`, the number of distinct exponents of `p` across `S_A`.
    pub fn exponent_count(&self, p: u64) -> usize {
        self.exponent_set(p).len()
    }
}

/// Divisor profile of `A` with respect to `L`; candidates are the divisors of
/// the modulus of `A`.
pub fn divisor_profile(a: &Multiset, l: u64) -> Result<DivisorProfile, Error> {
    if a.is_empty() {
        return Err(Error::Precondition("multiset is empty".into()));
    }
    if l < 2 {
        return Err(Error::InvalidArgument("L must be at least 2".into()));
    }
    let members: Vec<u64> = arith::divisors(a.modulus())
        .into_par_iter()
        .filter(|&s| gcd(s, l) == 1 && divides_by_remainder(a, s))
        .collect();
    Ok(DivisorProfile::from_members(a.total_weight(), l, &members))
}

/// Default degree ceiling for [`good_bad_split`].
pub const SPLIT_DEGREE_CEILING: usize = 200_000;

/// Cyclotomic factorization `A(X) = ∏ Φ_s^{e_s} · Q(X)` split by `gcd(s, L)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicSplit {
    /// `(s, multiplicity)` with `gcd(s, L) ≠ 1`.
    pub good: Vec<(u64, u32)>,
    /// `(s, multiplicity)` with `gcd(s, L) = 1`.
    pub bad: Vec<(u64, u32)>,
    /// The part with no cyclotomic factor, left unanalyzed.
    pub quotient: IntPolynomial,
}

impl CyclotomicSplit {
    fn product_of(parts: &[(u64, u32)]) -> IntPolynomial {
        let mut acc = IntPolynomial::one();
        for &(s, e) in parts {
            for _ in 0..e {
                acc = acc.mul(&cyclotomic_poly(s));
            }
        }
        acc
    }

    pub fn good_product(&self) -> IntPolynomial {
        Self::product_of(&self.good)
    }

    pub fn bad_product(&self) -> IntPolynomial {
        Self::product_of(&self.bad)
    }

    pub fn product(&self) -> IntPolynomial {
        self.good_product()
            .mul(&self.bad_product())
            .mul(&self.quotient)
    }
}

/// Upper bound on `s` with `φ(s) ≤ deg`, from `φ(n) > n / (e^γ ln ln n + 3 / ln ln n)`
/// for `n ≥ 3`.
fn totient_index_bound(deg: usize) -> u64 {
    let lower = |n: f64| {
        let ll = n.ln().ln();
        n / (1.781_072_417_990_198 * ll + 3.0 / ll)
    };
    let mut n = 2 * deg as u64 + 30;
    while lower(n as f64) <= deg as f64 {
        n += n / 2;
    }
    n
}

/// Splits the representative polynomial of `A` into cyclotomic factors sharing a
/// prime with `L`, cyclotomic factors coprime to `L`, and the rest.
pub fn good_bad_split(a: &Multiset, l: u64) -> Result<CyclotomicSplit, Error> {
    good_bad_split_with_ceiling(a, l, SPLIT_DEGREE_CEILING)
}

pub fn good_bad_split_with_ceiling(
    a: &Multiset,
    l: u64,
    ceiling: usize,
) -> Result<CyclotomicSplit, Error> {
    let mut poly = IntPolynomial::from_multiset(a);
    let deg = match poly.degree() {
        None => {
            return Ok(CyclotomicSplit {
                good: vec![],
                bad: vec![],
                quotient: poly,
            })
        }
        Some(d) => d,
    };
    if deg > ceiling {
        return Err(Error::Guard(format!(
            "polynomial degree {deg} exceeds the factorization ceiling {ceiling}"
        )));
    }
    let bound = totient_index_bound(deg);
    let mass = a.mass() as f64;
    let candidates: Vec<u64> = (1..=bound)
        .into_par_iter()
        .filter(|&s| (arith::euler_phi(s) as usize) <= deg)
        .filter(|&s| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU / s as f64);
            let v: Complex64 = a
                .iter()
                .map(|(x, w)| w as f64 * z.powu((x % s) as u32))
                .sum();
            v.norm() <= 1e-6 * mass.max(1.0)
        })
        .filter(|&s| sparse_divisible(a.iter(), s))
        .collect();
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for s in candidates {
        let phi = cyclotomic_poly(s);
        let mut e = 0;
        while let Some(q) = poly.div_exact(&phi) {
            poly = q;
            e += 1;
        }
        if e == 0 {
            return Err(Error::Internal(format!("Φ_{s} passed the test but does not divide")));
        }
        if gcd(s, l) == 1 {
            bad.push((s, e));
        } else {
            good.push((s, e));
        }
    }
    Ok(CyclotomicSplit {
        good,
        bad,
        quotient: poly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{divisors, euler_phi, mobius};
    use proptest::prelude::*;

    /// Independent oracle: `Φ_s = ∏_{d|s} (X^d − 1)^{μ(s/d)}`.
    fn mobius_cyclotomic(s: u64) -> IntPolynomial {
        let mut num = IntPolynomial::one();
        let mut den = IntPolynomial::one();
        for d in divisors(s) {
            match mobius(s / d) {
                1 => num = num.mul(&IntPolynomial::x_pow_minus_one(d as usize)),
                -1 => den = den.mul(&IntPolynomial::x_pow_minus_one(d as usize)),
                _ => {}
            }
        }
        let lead = *den.coeffs().last().unwrap();
        let den = if lead == -1 {
            IntPolynomial::new(den.coeffs().iter().map(|c| -c).collect())
        } else {
            den
        };
        let q = num.div_exact(&den).unwrap();
        if lead == -1 {
            IntPolynomial::new(q.coeffs().iter().map(|c| -c).collect())
        } else {
            q
        }
    }

    /// Independent oracle: `Φ_s(ζ_s) = 0` numerically, evaluating the mask at a
    /// primitive root.
    fn vanishes_numerically(a: &Multiset, s: u64) -> bool {
        let z = Complex64::from_polar(1.0, std::f64::consts::TAU / s as f64);
        let v: Complex64 = a
            .iter()
            .map(|(x, w)| w as f64 * z.powu((x % s) as u32))
            .sum();
        v.norm() < 1e-8
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1).coeffs(), &[-1, 1]);
        assert_eq!(cyclotomic_poly(2).coeffs(), &[1, 1]);
        assert_eq!(cyclotomic_poly(7).coeffs(), &[1; 7]);
        assert_eq!(cyclotomic_poly(4).coeffs(), &[1, 0, 1]);
        assert_eq!(cyclotomic_poly(6).coeffs(), &[1, -1, 1]);
        assert_eq!(*cyclotomic_poly(27), cyclotomic_poly(3).compose_power(9));
        let c105 = cyclotomic_poly(105);
        assert_eq!(c105.coeffs()[7], -2);
    }

    #[test]
    fn cyclotomic_matches_mobius_oracle() {
        for s in 1..=400u64 {
            let c = cyclotomic_poly(s);
            assert_eq!(*c, mobius_cyclotomic(s), "s = {s}");
            assert_eq!(c.degree(), Some(euler_phi(s) as usize));
        }
    }

    #[test]
    fn remainder_examples() {
        let f = Multiset::fiber(30, 5, 4).unwrap();
        assert!(divides_by_remainder(&f, 30));
        let a = Multiset::from_residues(4, &[0, 1]).unwrap();
        assert!(!divides_by_remainder(&a, 4));
        // Φ_p(X^{q^j}) with p = 2, q = 3, j = 3 in Z_{2·3^3}.
        let a = Multiset::from_residues(54, &[0, 27]).unwrap();
        for alpha in 0..=3 {
            assert!(divides_by_remainder(&a, 2 * 3u64.pow(alpha)));
        }
        assert!(!divides_by_remainder(&a, 3));
    }

    #[test]
    fn remainder_agrees_with_numeric_root_test() {
        for m in [12u64, 30, 36, 60] {
            for seed in 0..300u64 {
                let pairs: Vec<(i64, i64)> = (0..6)
                    .map(|k| (((seed * 31 + k * k * 7 + k) % m) as i64, ((seed >> k) % 3) as i64))
                    .collect();
                let a = Multiset::from_weights(m, pairs).unwrap();
                for s in divisors(m) {
                    assert_eq!(divides_by_remainder(&a, s), vanishes_numerically(&a, s));
                }
            }
        }
    }

    #[test]
    fn delta_example() {
        let a = Multiset::delta(6, 0).unwrap();
        let cub = Cuboid::new(6, 0, BTreeMap::from([(2, 1), (3, 1)])).unwrap();
        assert_eq!(
            cub.to_multiset(),
            Multiset::from_weights(6, [(0, 1), (3, -1), (2, -1), (5, 1)]).unwrap()
        );
        assert_eq!(delta_evaluate(&a, &cub).unwrap(), 1);
        assert!(delta_evaluate(&Multiset::delta(4, 0).unwrap(), &cub).is_err());
    }

    #[test]
    fn fibers_have_zero_evaluations() {
        let n = 30;
        for p in [2u64, 3, 5] {
            let f = Multiset::fiber(n, p, 7).unwrap();
            for c in 0..n {
                for d in direction_choices(&[2, 3, 5]) {
                    let cub = Cuboid::new(n, c, d).unwrap();
                    assert_eq!(delta_evaluate(&f, &cub).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn single_point_never_divisible() {
        for n in 2..60u64 {
            let a = Multiset::delta(n, 0).unwrap();
            assert!(!divides_by_cuboids(&a, n).unwrap());
        }
    }

    #[test]
    fn cuboid_serialization_shape() {
        let cub = Cuboid::new(30, 4, BTreeMap::from([(2, 1), (3, 2), (5, 4)])).unwrap();
        let s = serde_json::to_string(&cub).unwrap();
        assert_eq!(s, r#"{"N":30,"c":4,"d":{"2":1,"3":2,"5":4}}"#);
    }

    #[test]
    fn cuboid_test_agrees_on_z12_subsets() {
        for mask in 0u32..(1 << 12) {
            let res: Vec<i64> = (0..12).filter(|i| mask >> i & 1 == 1).collect();
            let a = Multiset::from_residues(12, &res).unwrap();
            for s in divisors(12) {
                assert_eq!(divides_by_cuboids(&a, s).unwrap(), divides_by_remainder(&a, s));
            }
        }
    }

    #[test]
    fn fiber_decomposition_single_fiber() {
        let a = Multiset::fiber(30, 5, 2).unwrap();
        let terms = fiber_decompose(&a, 30).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].prime, 5);
        assert_eq!(terms[0].coefficients, Multiset::delta(30, 2).unwrap());
        assert!(fiber_decompose(&Multiset::delta(30, 0).unwrap(), 30).is_err());
    }

    #[test]
    fn nonneg_decomposition_round_trips_in_z36() {
        for seed in 0..200u64 {
            let mut a = Multiset::new(36).unwrap();
            for k in 0..4 {
                let p = if (seed >> k) & 1 == 0 { 2 } else { 3 };
                a = a
                    .add(&Multiset::fiber(36, p, (seed * 11 + k * 5) % 36).unwrap())
                    .unwrap();
            }
            let terms = fiber_decompose_nonneg(&a, 36).unwrap();
            assert_eq!(recompose(&terms, 36).unwrap(), a);
            assert!(terms.iter().all(|t| t.coefficients.is_nonnegative()));
        }
    }

    #[test]
    fn profile_filters_by_gcd() {
        let f = Multiset::fiber(15, 3, 0).unwrap();
        let prof = divisor_profile(&f, 9).unwrap();
        assert!(prof.members().is_empty());
        assert_eq!(prof.lcm(), 1);
        let prof = divisor_profile(&f, 2).unwrap();
        assert_eq!(prof.members(), &[3, 15]);
    }

    #[test]
    fn profile_json_shape() {
        let prof = DivisorProfile::from_members(13, 169, &[36, 6, 12, 18]);
        let v: serde_json::Value = serde_json::to_value(&prof).unwrap();
        assert_eq!(v["S_A"], serde_json::json!([6, 12, 18, 36]));
        assert_eq!(v["s_A"], 36);
        assert_eq!(v["exp"]["2"], serde_json::json!([1, 2]));
        assert_eq!(prof.exponent_count(3), 2);
    }

    #[test]
    fn split_examples() {
        // X·Φ_6(X) = X − X² + X³.
        let a = Multiset::from_weights(10, [(1, 1), (2, -1), (3, 1)]).unwrap();
        let split = good_bad_split(&a, 35).unwrap();
        assert_eq!(split.bad, vec![(6, 1)]);
        assert!(split.good.is_empty());
        assert_eq!(split.quotient.coeffs(), &[0, 1]);
        let split = good_bad_split(&a, 4).unwrap();
        assert_eq!(split.good, vec![(6, 1)]);
        assert_eq!(split.product(), IntPolynomial::from_multiset(&a));
    }

    fn arb_multiset(m: u64) -> impl Strategy<Value = Multiset> {
        proptest::collection::vec((0..m as i64, -2i64..=3), 1..10)
            .prop_map(move |v| Multiset::from_weights(m, v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_reconstructs(a in arb_multiset(40), l in 2u64..50) {
            let split = good_bad_split(&a, l).unwrap();
            prop_assert_eq!(split.product(), IntPolynomial::from_multiset(&a));
            for &(s, _) in &split.bad {
                prop_assert_eq!(gcd(s, l), 1);
            }
            prop_assert!(split.good.iter().all(|&(s, _)| gcd(s, l) != 1));
        }

        #[test]
        fn evaluation_is_translation_invariant(a in arb_multiset(30), t in -60i64..60, c in 0u64..30,
                                               d2 in 1u64..2, d3 in 1u64..3, d5 in 1u64..5) {
            let cub = Cuboid::new(30, c, BTreeMap::from([(2, d2), (3, d3), (5, d5)])).unwrap();
            prop_assert_eq!(
                delta_evaluate(&a.translate(t), &cub.translate(t)).unwrap(),
                delta_evaluate(&a, &cub).unwrap()
            );
        }

        #[test]
        fn signed_decomposition_recomposes(parts in proptest::collection::vec((0usize..3, 0u64..60, -2i64..=2), 1..6)) {
            let n = 60;
            let mut a = Multiset::new(n).unwrap();
            for (i, x, w) in parts {
                let p = [2u64, 3, 5][i];
                a = a.add(&Multiset::fiber(n, p, x).unwrap().scale(w)).unwrap();
            }
            let terms = fiber_decompose(&a, n).unwrap();
            prop_assert_eq!(recompose(&terms, n).unwrap(), a);
        }

        #[test]
        fn divisible_implies_zero_evaluations(parts in proptest::collection::vec((0usize..3, 0u64..90, 1i64..=2), 1..5),
                                              noise in 0u64..90, add_noise: bool) {
            let n = 90;
            let mut a = Multiset::new(n).unwrap();
            for (i, x, w) in parts {
                let p = [2u64, 3, 5][i];
                a = a.add(&Multiset::fiber(n, p, x).unwrap().scale(w)).unwrap();
            }
            if add_noise {
                a.add_weight(noise, 1);
            }
            let by_rem = divides_by_remainder(&a, n);
            prop_assert_eq!(by_rem, !add_noise);
            prop_assert_eq!(nonzero_evaluations(&a, n).unwrap().is_empty(), by_rem);
        }

        #[test]
        fn rescale_transfers_divisibility(ys in proptest::collection::vec((0i64..20, -1i64..=2), 1..8), c in 0u64..9) {
            // M = 180 = 9·20; grid Λ(c, 9); p = 3, β = 2.
            let small = Multiset::from_weights(20, ys).unwrap();
            let a = small.unrescale(c, 9).unwrap();
            let back = a.rescale(c, 3, 2).unwrap();
            prop_assert_eq!(&back, &small);
            for m in divisors(180).into_iter().filter(|m| m % 9 == 0) {
                prop_assert_eq!(divides_by_remainder(&a, m), divides_by_remainder(&back, m / 9));
            }
        }
    }
}
