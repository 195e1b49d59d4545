//! Lower bounds on `|A|` from cyclotomic divisors, as checkers that return the
//! claimed bound together with the data that certifies it.

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd};
use crate::cyclo::{self, divides_by_remainder, Cuboid, DivisorProfile};
use crate::multiset::{Multiset, NonnegMultiset};
use crate::Error;

/// Supporting data attached to a [`BoundReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// A cuboid with a nonzero evaluation.
    Cuboid { cuboid: Cuboid, evaluation: i64 },
    /// The number of distinct exponents of the bounding prime.
    Exponents { prime: u64, distinct: Vec<u32> },
}

/// `claimed ≤ |A|`, with `satisfied` recording whether it holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub claimed: u64,
    pub cardinality: i64,
    pub satisfied: bool,
    pub witness: Option<Witness>,
}

impl BoundReport {
    fn new(claimed: u64, cardinality: i64, witness: Option<Witness>) -> Self {
        BoundReport {
            claimed,
            cardinality,
            satisfied: cardinality >= 0 && cardinality as u64 >= claimed,
            witness,
        }
    }
}

/// Writes `k = Σ a_j p_j` with `a_j ≥ 0`. Among all representations, returns
/// the lexicographically greatest coefficient vector in the given prime order.
pub fn lam_leung_check(k: u64, primes: &[u64]) -> Option<Vec<u64>> {
    let n = primes.len();
    // reach[j][v]: v is a nonnegative combination of primes[j..].
    let mut reach = vec![vec![false; k as usize + 1]; n + 1];
    reach[n][0] = true;
    for j in (0..n).rev() {
        let p = primes[j] as usize;
        for v in 0..=k as usize {
            reach[j][v] = reach[j + 1][v] || (v >= p && reach[j][v - p]);
        }
    }
    if k == 0 || !reach[0][k as usize] {
        return None;
    }
    let mut rest = k;
    let mut coeffs = Vec::with_capacity(n);
    for (j, &p) in primes.iter().enumerate() {
        let mut a = rest / p;
        while !reach[j + 1][(rest - a * p) as usize] {
            a -= 1;
        }
        coeffs.push(a);
        rest -= a * p;
    }
    Some(coeffs)
}

/// `|A| ≥ p^{E_p}` for nonnegative `A` with `Φ_{m_j} | A`, each `m_j = p^α q^β`,
/// and `q ∤ |A|`.
pub fn two_prime_bound(
    a: &NonnegMultiset,
    p: u64,
    q: u64,
    divisors: &[u64],
) -> Result<BoundReport, Error> {
    if p == q || !arith::is_prime(p) || !arith::is_prime(q) {
        return Err(Error::InvalidArgument(format!(
            "{p} and {q} must be distinct primes"
        )));
    }
    let cardinality = a.total_weight();
    if cardinality % q as i64 == 0 {
        return Err(Error::CardinalityDivisible {
            prime: q,
            cardinality,
        });
    }
    let mut alphas = Vec::new();
    for &m in divisors {
        let f = arith::factorize(m);
        if f.primes().iter().any(|&r| r != p && r != q) {
            return Err(Error::InvalidArgument(format!(
                "{m} is not of the form {p}^a {q}^b"
            )));
        }
        if !divides_by_remainder(a, m) {
            return Err(Error::NotDivisible(m));
        }
        alphas.push(f.exponent_of(p));
    }
    alphas.sort_unstable();
    alphas.dedup();
    let claimed = p
        .checked_pow(alphas.len() as u32)
        .ok_or_else(|| Error::InvalidArgument("bound overflows".into()))?;
    Ok(BoundReport::new(
        claimed,
        cardinality,
        Some(Witness::Exponents {
            prime: p,
            distinct: alphas,
        }),
    ))
}

/// Applies [`two_prime_bound`] with `m_j = S_A` when `s_A` has exactly two
/// prime factors, trying both orientations and keeping the larger bound.
pub fn two_prime_bound_from_profile(
    a: &NonnegMultiset,
    profile: &DivisorProfile,
) -> Result<BoundReport, Error> {
    let primes = profile.primes();
    if primes.len() != 2 {
        return Err(Error::Precondition(format!(
            "s_A = {} does not have exactly two prime factors",
            profile.lcm()
        )));
    }
    let mut best: Option<BoundReport> = None;
    let mut last_err = None;
    for (p, q) in [(primes[0], primes[1]), (primes[1], primes[0])] {
        match two_prime_bound(a, p, q, profile.members()) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.claimed > b.claimed) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap())
}

/// `p^ℓ | A^{m_0}[Δ]` for every `m_0`-cuboid `Δ`, given
/// `Φ_{m_0 p^{α_1}} ⋯ Φ_{m_0 p^{α_ℓ}} | A`.
pub fn cuboid_order(a: &Multiset, m0: u64, p: u64, exponents: &[u32]) -> Result<bool, Error> {
    let m = a.modulus();
    if !arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let n_i = arith::valuation(m, p);
    if m0 == 0 || m0.is_multiple_of(p) || !(m / p.pow(n_i)).is_multiple_of(m0) {
        return Err(Error::Precondition(format!(
            "{m0} does not divide M / {p}^{n_i}"
        )));
    }
    if exponents.windows(2).any(|w| w[0] >= w[1])
        || exponents.first().is_some_and(|&e| e == 0)
        || exponents.last().is_some_and(|&e| e > n_i)
    {
        return Err(Error::InvalidArgument(format!(
            "exponents {exponents:?} must increase within 1..={n_i}"
        )));
    }
    for &alpha in exponents {
        let s = m0 * p.pow(alpha);
        if !divides_by_remainder(a, s) {
            return Err(Error::NotDivisible(s));
        }
    }
    let modulus = p.pow(exponents.len() as u32) as i64;
    Ok(cyclo::nonzero_evaluations(a, m0)?
        .iter()
        .all(|&(_, v)| v % modulus == 0))
}

/// `|A| ≥ p_1 ⋯ p_I` from `Φ_{p_i m} | A` and `Φ_m ∤ A`, with the least
/// nonvanishing `m`-cuboid as witness.
pub fn multi_prime_bound(a: &NonnegMultiset, m: u64, primes: &[u64]) -> Result<BoundReport, Error> {
    let modulus = a.modulus();
    if m == 0 || !modulus.is_multiple_of(m) {
        return Err(Error::NotADivisor(m, modulus));
    }
    let mut claimed = 1u64;
    for &p in primes {
        if !arith::is_prime(p) || claimed.is_multiple_of(p) {
            return Err(Error::InvalidArgument(format!(
                "primes {primes:?} must be distinct primes"
            )));
        }
        if !modulus.is_multiple_of(m * p) {
            return Err(Error::NotADivisor(m * p, modulus));
        }
        if !divides_by_remainder(a, m * p) {
            return Err(Error::NotDivisible(m * p));
        }
        claimed *= p;
    }
    if divides_by_remainder(a, m) {
        return Err(Error::Precondition(format!("Φ_{m} divides A")));
    }
    let (cuboid, evaluation) = cyclo::first_nonvanishing_cuboid(a, m)?.ok_or_else(|| {
        Error::Internal(format!("no nonvanishing {m}-cuboid although Φ_{m} ∤ A"))
    })?;
    if evaluation.unsigned_abs() < claimed {
        return Err(Error::Falsified(format!(
            "cuboid evaluation {evaluation} is smaller than {claimed}"
        )));
    }
    Ok(BoundReport::new(
        claimed,
        a.total_weight(),
        Some(Witness::Cuboid { cuboid, evaluation }),
    ))
}

/// A prime usable for the small-cardinality split, with its exponent count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPrime {
    pub prime: u64,
    pub exponent_count: usize,
}

/// Every prime `p` with `gcd(p, |A|) = 1`, `p | s` for all `s ∈ S_A` and
/// `p^{E_p} < |A|`, increasing.
pub fn split_candidates(profile: &DivisorProfile) -> Vec<SplitPrime> {
    let card = profile.cardinality();
    if profile.members().is_empty() || card <= 0 {
        return Vec::new();
    }
    profile
        .primes()
        .into_iter()
        .filter(|&p| gcd(p, card as u64) == 1)
        .filter(|&p| profile.members().iter().all(|s| s % p == 0))
        .filter_map(|p| {
            let e = profile.exponent_count(p);
            let pe = p.checked_pow(e as u32)?;
            (pe < card as u64).then_some(SplitPrime {
                prime: p,
                exponent_count: e,
            })
        })
        .collect()
}

/// The largest split prime for `|A| ≤ 10`. The small-cardinality lemma says
/// one always exists, so `Ok(None)` is a falsification.
pub fn small_card_split(
    a: &NonnegMultiset,
    profile: &DivisorProfile,
) -> Result<Option<SplitPrime>, Error> {
    let card = a.total_weight();
    if !(1..=10).contains(&card) {
        return Err(Error::InvalidArgument(format!(
            "cardinality {card} outside 1..=10"
        )));
    }
    if profile.cardinality() != card {
        return Err(Error::Precondition(
            "profile was computed for a different multiset".into(),
        ));
    }
    if profile.members().is_empty() {
        return Err(Error::Precondition("S_A is empty".into()));
    }
    Ok(split_candidates(profile).pop())
}
