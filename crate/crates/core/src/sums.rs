//! Vanishing sums of `N`-th roots of unity as nonnegative multisets on `Z_N`
//! with `Φ_N | A`: enumeration, minimality and template classification.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd};
use crate::cyclo::{cyclotomic_poly, divides_by_remainder, IntPolynomial};
use crate::multiset::{Multiset, NonnegMultiset};
use crate::Error;

/// Default ceiling on the number of DFS states of [`enumerate_vanishing`].
pub const CENSUS_STATE_CEILING: u128 = 500_000_000;

/// Ceiling on the number of sub-multisets examined by [`is_minimal`].
pub const SUBMULTISET_CEILING: u128 = 1 << 26;

/// A nonnegative multiset on `Z_N` whose mask is divisible by `Φ_N`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Multiset", into = "Multiset")]
pub struct VanishingSum {
    set: Multiset,
}

impl TryFrom<Multiset> for VanishingSum {
    type Error = Error;

    fn try_from(m: Multiset) -> Result<Self, Error> {
        VanishingSum::new(NonnegMultiset::try_from(m)?)
    }
}

impl From<VanishingSum> for Multiset {
    fn from(v: VanishingSum) -> Multiset {
        v.set
    }
}

impl VanishingSum {
    pub fn new(set: NonnegMultiset) -> Result<Self, Error> {
        let n = set.modulus();
        if set.is_empty() || !divides_by_remainder(&set, n) {
            return Err(Error::NotDivisible(n));
        }
        Ok(VanishingSum { set: set.into_inner() })
    }

    pub fn modulus(&self) -> u64 {
        self.set.modulus()
    }

    pub fn weight(&self) -> i64 {
        self.set.total_weight()
    }

    pub fn multiset(&self) -> &Multiset {
        &self.set
    }

    /// Residues with multiplicity, increasing.
    pub fn residues(&self) -> Vec<u64> {
        expand(&self.set)
    }
}

fn expand(m: &Multiset) -> Vec<u64> {
    m.iter()
        .flat_map(|(x, w)| std::iter::repeat_n(x, w as usize))
        .collect()
}

/// The minimal templates: a `p`-fiber, or `(R_p : k R_q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MinimalTemplate {
    Fiber { p: u64 },
    Replaced { p: u64, q: u64, k: u64 },
}

impl MinimalTemplate {
    pub fn weight(&self) -> u64 {
        match *self {
            MinimalTemplate::Fiber { p } => p,
            MinimalTemplate::Replaced { p, q, k } => p + k * q - 2 * k,
        }
    }

    /// Primes that must divide `N` for the template to exist.
    pub fn primes(&self) -> Vec<u64> {
        match *self {
            MinimalTemplate::Fiber { p } => vec![p],
            MinimalTemplate::Replaced { p, q, .. } => vec![2, p, q],
        }
    }
}

impl fmt::Display for MinimalTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimalTemplate::Fiber { p } => write!(f, "R_{p}"),
            MinimalTemplate::Replaced { p, q, k } if *k == 1 => write!(f, "(R_{p}:R_{q})"),
            MinimalTemplate::Replaced { p, q, k } => write!(f, "(R_{p}:{k}R_{q})"),
        }
    }
}

/// `X^a mod Φ_N` for every `a ∈ Z_N`, plus the complex roots.
struct PowerBasis {
    rows: Vec<Vec<i64>>,
    roots: Vec<Complex64>,
}

impl PowerBasis {
    fn new(n: u64) -> Self {
        let phi = cyclotomic_poly(n);
        let deg = phi.degree().unwrap_or(0);
        let mut rows = Vec::with_capacity(n as usize);
        let mut current = vec![0i64; deg.max(1)];
        current[0] = 1;
        let top: Vec<i64> = phi.coeffs()[..deg].to_vec();
        for _ in 0..n {
            rows.push(current.clone());
            // Multiply by X and reduce with X^deg = −Σ top_j X^j.
            let carry = current[deg - 1];
            for j in (1..deg).rev() {
                current[j] = current[j - 1] - carry * top[j];
            }
            current[0] = -carry * top[0];
        }
        let roots = (0..n)
            .map(|a| Complex64::from_polar(1.0, std::f64::consts::TAU * a as f64 / n as f64))
            .collect();
        PowerBasis { rows, roots }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

struct Search<'a> {
    n: u64,
    k_max: usize,
    basis: &'a PowerBasis,
    picked: Vec<u64>,
    exact: Vec<i64>,
    approx: Complex64,
    found: Vec<Vec<u64>>,
}

impl Search<'_> {
    fn push(&mut self, r: u64) {
        self.picked.push(r);
        for (e, b) in self.exact.iter_mut().zip(&self.basis.rows[r as usize]) {
            *e += b;
        }
        self.approx += self.basis.roots[r as usize];
    }

    fn pop(&mut self) {
        let r = self.picked.pop().unwrap();
        for (e, b) in self.exact.iter_mut().zip(&self.basis.rows[r as usize]) {
            *e -= b;
        }
        self.approx -= self.basis.roots[r as usize];
    }

    fn run(&mut self) {
        if self.exact.iter().all(|&e| e == 0) {
            self.found.push(self.picked.clone());
        }
        let room = self.k_max - self.picked.len();
        if room == 0 || self.approx.norm() > room as f64 + 1e-9 {
            return;
        }
        let start = *self.picked.last().unwrap();
        for r in start..self.n {
            self.push(r);
            self.run();
            self.pop();
        }
    }
}

/// Every nonnegative multiset on `Z_N` of weight `1..=k_max` with `Φ_N | A`,
/// or one representative per translation class when `up_to_translation`.
/// Sorted by weight, then residues.
pub fn enumerate_vanishing(n: u64, k_max: usize, up_to_translation: bool) -> Result<Vec<VanishingSum>, Error> {
    enumerate_vanishing_with_ceiling(n, k_max, up_to_translation, CENSUS_STATE_CEILING)
}

pub fn enumerate_vanishing_with_ceiling(
    n: u64,
    k_max: usize,
    up_to_translation: bool,
    ceiling: u128,
) -> Result<Vec<VanishingSum>, Error> {
    if n < 2 || k_max == 0 {
        return Err(Error::InvalidArgument("need N ≥ 2 and k_max ≥ 1".into()));
    }
    let states = if up_to_translation {
        binomial(n as u128 + k_max as u128 - 2, k_max as u128 - 1)
    } else {
        binomial(n as u128 + k_max as u128 - 1, k_max as u128)
    };
    if states > ceiling {
        return Err(Error::Guard(format!(
            "about {states} enumeration states for N = {n}, k = {k_max} (ceiling {ceiling})"
        )));
    }
    let basis = PowerBasis::new(n);
    let deg = basis.rows[0].len();
    let firsts: Vec<u64> = if up_to_translation { vec![0] } else { (0..n).collect() };
    let mut found: Vec<Vec<u64>> = firsts
        .par_iter()
        .flat_map_iter(|&first| {
            let mut s = Search {
                n,
                k_max,
                basis: &basis,
                picked: Vec::with_capacity(k_max),
                exact: vec![0; deg],
                approx: Complex64::new(0.0, 0.0),
                found: Vec::new(),
            };
            s.push(first);
            s.run();
            s.found
        })
        .collect();
    if up_to_translation {
        found.retain(|res| canonical_residues(res, n, false) == *res);
    }
    found.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    found
        .into_iter()
        .map(|res| {
            let m = Multiset::from_residues(n, &res.iter().map(|&r| r as i64).collect::<Vec<_>>())?;
            VanishingSum::new(NonnegMultiset::try_from(m)?)
        })
        .collect()
}

fn canonical_residues(res: &[u64], n: u64, with_units: bool) -> Vec<u64> {
    let units: Vec<u64> = if with_units {
        (1..n).filter(|&u| gcd(u, n) == 1).collect()
    } else {
        vec![1]
    };
    let mut best: Option<Vec<u64>> = None;
    for &u in &units {
        let scaled: Vec<u64> = res.iter().map(|&r| arith::mul_mod(r, u, n)).collect();
        let mut starts = scaled.clone();
        starts.dedup();
        for &a in &starts {
            let mut v: Vec<u64> = scaled.iter().map(|&r| (r + n - a) % n).collect();
            v.sort_unstable();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    best.unwrap_or_default()
}

/// Lexicographically least translate (optionally also over dilations by
/// units of `Z_N`), as a sorted residue list containing 0.
pub fn canonical_form(m: &Multiset, with_units: bool) -> Vec<u64> {
    canonical_residues(&expand(m), m.modulus(), with_units)
}

/// A nonempty proper sub-multiset `A' ≤ A` with `Φ_N | A'`, if any.
pub fn proper_vanishing_part(v: &VanishingSum) -> Result<Option<Multiset>, Error> {
    let n = v.modulus();
    let entries: Vec<(u64, i64)> = v.multiset().iter().collect();
    let size: u128 = entries.iter().map(|&(_, w)| w as u128 + 1).product();
    if size > SUBMULTISET_CEILING {
        return Err(Error::Guard(format!("{size} sub-multisets")));
    }
    let basis = PowerBasis::new(n);
    let deg = basis.rows[0].len();
    let total = v.weight();
    let mut counts = vec![0i64; entries.len()];
    let mut acc = vec![0i64; deg];
    // A' or its complement contains a copy of the first residue.
    counts[0] = 1;
    for (e, b) in acc.iter_mut().zip(&basis.rows[entries[0].0 as usize]) {
        *e += b;
    }
    fn rec(
        idx: usize,
        entries: &[(u64, i64)],
        basis: &PowerBasis,
        counts: &mut Vec<i64>,
        acc: &mut Vec<i64>,
        weight: i64,
        total: i64,
    ) -> bool {
        if idx == entries.len() {
            return weight < total && acc.iter().all(|&x| x == 0);
        }
        let (r, w) = entries[idx];
        let row = &basis.rows[r as usize];
        let lo = counts[idx];
        let mut found = false;
        let mut c = lo;
        loop {
            if rec(idx + 1, entries, basis, counts, acc, weight + c, total) {
                found = true;
                break;
            }
            if c == w {
                break;
            }
            c += 1;
            counts[idx] = c;
            for (e, b) in acc.iter_mut().zip(row) {
                *e += b;
            }
        }
        if !found {
            for (e, b) in acc.iter_mut().zip(row) {
                *e -= b * (c - lo);
            }
            counts[idx] = lo;
        }
        found
    }
    let found = rec(0, &entries, &basis, &mut counts, &mut acc, 0, total);
    if !found {
        return Ok(None);
    }
    Multiset::from_weights(
        n,
        entries
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&(r, _), &c)| (r as i64, c)),
    )
    .map(Some)
}

/// Property (M): no nonempty proper sub-multiset is also divisible by `Φ_N`.
pub fn is_minimal(v: &VanishingSum) -> Result<bool, Error> {
    Ok(proper_vanishing_part(v)?.is_none())
}

/// Splits `v` into minimal vanishing sums by repeatedly peeling a proper
/// vanishing part.
pub fn decompose_minimal(v: &VanishingSum) -> Result<Vec<VanishingSum>, Error> {
    match proper_vanishing_part(v)? {
        None => Ok(vec![v.clone()]),
        Some(part) => {
            let rest = v.multiset().sub(&part)?;
            let mut out = decompose_minimal(&VanishingSum::new(NonnegMultiset::try_from(part)?)?)?;
            out.extend(decompose_minimal(&VanishingSum::new(NonnegMultiset::try_from(rest)?)?)?);
            out.sort();
            Ok(out)
        }
    }
}

/// The `p`-fiber through `x` in `Z_N`.
pub fn construct_rp(n: u64, p: u64, x: u64) -> Result<VanishingSum, Error> {
    VanishingSum::new(NonnegMultiset::try_from(Multiset::fiber(n, p, x % n)?)?)
}

/// `(R_p : k R_q)` from the `p`-fiber through `x`: the points `x + jN/p` for
/// `j` in `chosen` are replaced by their `q`-fibers, and every resulting
/// negative point `y` is cancelled by the 2-fiber through `y`.
/// Requires odd primes `p ≠ q`, `2pq | N` and `1 ≤ |chosen| < p`.
pub fn construct_rpkrq(n: u64, p: u64, q: u64, x: u64, chosen: &[u64]) -> Result<VanishingSum, Error> {
    for r in [p, q] {
        if !arith::is_prime(r) || r == 2 {
            return Err(Error::InvalidArgument(format!("{r} must be an odd prime")));
        }
    }
    if p == q {
        return Err(Error::InvalidArgument("p and q must differ".into()));
    }
    if !n.is_multiple_of(2 * p * q) {
        return Err(Error::NotADivisor(2 * p * q, n));
    }
    let mut idx = chosen.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != chosen.len() || idx.is_empty() || idx.len() as u64 >= p || idx.iter().any(|&j| j >= p) {
        return Err(Error::InvalidArgument(format!(
            "choices {chosen:?} must be 1 to {} distinct indices below {p}",
            p - 1
        )));
    }
    let x = x % n;
    let mut a = Multiset::fiber(n, p, x)?;
    for &j in &idx {
        a = a.sub(&Multiset::fiber(n, q, (x + j * (n / p)) % n)?)?;
    }
    let negatives: Vec<u64> = a.iter().filter(|&(_, w)| w < 0).map(|(r, _)| r).collect();
    for y in negatives {
        a = a.add(&Multiset::fiber(n, 2, y)?)?;
    }
    VanishingSum::new(NonnegMultiset::try_from(a)?)
}

/// `Ξ = 1 + X^{3N/5} + X^{4N/5} + Σ_{i,j∈{1,2}} X^{iN/5 + jN/3 + N/2}`, `30 | N`.
pub fn xi(n: u64) -> Result<VanishingSum, Error> {
    if !n.is_multiple_of(30) {
        return Err(Error::NotADivisor(30, n));
    }
    let mut res = vec![0, 3 * n / 5, 4 * n / 5];
    for i in 1..=2 {
        for j in 1..=2 {
            res.push((i * n / 5 + j * n / 3 + n / 2) % n);
        }
    }
    let m = Multiset::from_residues(n, &res.iter().map(|&r| r as i64).collect::<Vec<_>>())?;
    VanishingSum::new(NonnegMultiset::try_from(m)?)
}

fn k_subsets(p: u64, k: u64) -> Vec<Vec<u64>> {
    fn rec(start: u64, p: u64, k: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() as u64 == k {
            out.push(cur.clone());
            return;
        }
        for j in start..p {
            cur.push(j);
            rec(j + 1, p, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, p, k, &mut Vec::new(), &mut out);
    out
}

/// Template instances existing in `Z_N` with the given weight.
fn templates_of_weight(n: u64, weight: u64) -> Vec<MinimalTemplate> {
    let primes = arith::prime_factors(n);
    let mut out = Vec::new();
    for &p in &primes {
        if p == weight {
            out.push(MinimalTemplate::Fiber { p });
        }
    }
    if n.is_multiple_of(2) {
        for &p in primes.iter().filter(|&&p| p != 2) {
            for &q in primes.iter().filter(|&&q| q != 2 && q != p) {
                for k in 1..p {
                    let t = MinimalTemplate::Replaced { p, q, k };
                    if t.weight() == weight {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Matches a minimal sum, up to translation, against `R_p` and every
/// `(R_p : k R_q)` instance in `Z_N`. `None` means no template fits.
pub fn classify_minimal(v: &VanishingSum) -> Result<Option<MinimalTemplate>, Error> {
    if !is_minimal(v)? {
        return Err(Error::Precondition("sum is not minimal".into()));
    }
    let n = v.modulus();
    let target = canonical_form(v.multiset(), false);
    for t in templates_of_weight(n, v.weight() as u64) {
        let hit = match t {
            MinimalTemplate::Fiber { p } => canonical_form(construct_rp(n, p, 0)?.multiset(), false) == target,
            MinimalTemplate::Replaced { p, q, k } => k_subsets(p, k).into_iter().any(|c| {
                construct_rpkrq(n, p, q, 0, &c)
                    .map(|s| canonical_form(s.multiset(), false) == target)
                    .unwrap_or(false)
            }),
        };
        if hit {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// One census line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub modulus: u64,
    pub weight: i64,
    pub residues: Vec<u64>,
    pub minimal: bool,
    pub template: Option<String>,
}

/// Enumerates up to translation and classifies every minimal sum.
pub fn census(n: u64, k_max: usize) -> Result<Vec<CensusEntry>, Error> {
    census_with_ceiling(n, k_max, CENSUS_STATE_CEILING)
}

pub fn census_with_ceiling(n: u64, k_max: usize, ceiling: u128) -> Result<Vec<CensusEntry>, Error> {
    let sums = enumerate_vanishing_with_ceiling(n, k_max, true, ceiling)?;
    sums.par_iter()
        .map(|v| {
            let minimal = is_minimal(v)?;
            let template = if minimal {
                classify_minimal(v)?.map(|t| t.to_string())
            } else {
                None
            };
            Ok(CensusEntry {
                modulus: n,
                weight: v.weight(),
                residues: v.residues(),
                minimal,
                template,
            })
        })
        .collect()
}

/// `weight → label → count`, with labels taken from the template or
/// `"non-minimal"` / `"unclassified"`.
pub fn census_table(entries: &[CensusEntry]) -> BTreeMap<i64, BTreeMap<String, usize>> {
    let mut table: BTreeMap<i64, BTreeMap<String, usize>> = BTreeMap::new();
    for e in entries {
        let label = match (&e.template, e.minimal) {
            (Some(t), _) => t.clone(),
            (None, true) => "unclassified".to_string(),
            (None, false) => "non-minimal".to_string(),
        };
        *table.entry(e.weight).or_default().entry(label).or_insert(0) += 1;
    }
    table
}

/// A union of minimal templates, each contributing its weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Structure {
    pub components: Vec<MinimalTemplate>,
}

impl Structure {
    pub fn weight(&self) -> u64 {
        self.components.iter().map(|t| t.weight()).sum()
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.components.iter().flat_map(|t| t.primes()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Unions of templates over the primes of `N` with total weight `|A|`, keeping
/// only components compatible with `N ∈ S_A`: a `p`-fiber needs
/// `gcd(p, |A|) = 1` and `(R_p : k R_q)` needs `gcd(2pq, |A|) = 1`.
pub fn admissible_structures(cardinality: u64, n: u64) -> Result<Vec<Structure>, Error> {
    if !(2..=10).contains(&cardinality) {
        return Err(Error::InvalidArgument(format!(
            "cardinality {cardinality} outside 2..=10"
        )));
    }
    let mut pool: Vec<MinimalTemplate> = (1..=cardinality)
        .flat_map(|w| templates_of_weight(n, w))
        .filter(|t| t.primes().iter().all(|&p| gcd(p, cardinality) == 1))
        .collect();
    pool.sort();
    pool.dedup();
    let mut out = Vec::new();
    fn rec(
        start: usize,
        left: u64,
        pool: &[MinimalTemplate],
        cur: &mut Vec<MinimalTemplate>,
        out: &mut Vec<Structure>,
    ) {
        if left == 0 {
            out.push(Structure { components: cur.clone() });
            return;
        }
        for i in start..pool.len() {
            if pool[i].weight() <= left {
                cur.push(pool[i]);
                rec(i, left - pool[i].weight(), pool, cur, out);
                cur.pop();
            }
        }
    }
    rec(0, cardinality, &pool, &mut Vec::new(), &mut out);
    Ok(out)
}

/// A set in `Z_{N·c}` (`c` components) whose reduction mod `N` is the union
/// of the structure's templates; component `i` sits at base `bases[i]` and is
/// lifted into `[iN, (i+1)N)`. Replaced templates use the first `k` choices.
pub fn instantiate(structure: &Structure, n: u64, bases: &[u64]) -> Result<Multiset, Error> {
    let c = structure.components.len() as u64;
    if bases.len() as u64 != c || c == 0 {
        return Err(Error::InvalidArgument("one base per component".into()));
    }
    let m = n
        .checked_mul(c)
        .filter(|&m| m <= arith::MODULUS_CEILING)
        .ok_or_else(|| Error::Guard("instantiation modulus too large".into()))?;
    let mut a = Multiset::new(m)?;
    for (i, (t, &x)) in structure.components.iter().zip(bases).enumerate() {
        let part = match *t {
            MinimalTemplate::Fiber { p } => construct_rp(n, p, x)?,
            MinimalTemplate::Replaced { p, q, k } => {
                construct_rpkrq(n, p, q, x, &(0..k).collect::<Vec<_>>())?
            }
        };
        for (r, w) in part.multiset().iter() {
            a.add_weight(r + i as u64 * n, w);
        }
    }
    Ok(a)
}

/// `IntPolynomial` of a vanishing sum, for callers that want the mask.
pub fn mask(v: &VanishingSum) -> IntPolynomial {
    IntPolynomial::from_multiset(v.multiset())
}
