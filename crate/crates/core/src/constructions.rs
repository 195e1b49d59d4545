//! Generators for the named example multisets used throughout the tests,
//! the guide and the `construct` command.

use crate::arith::{self, crt_join, factorize, CrtCoordinates};
use crate::multiset::Multiset;
use crate::Error;

fn pow(p: u64, e: u32) -> Result<u64, Error> {
    p.checked_pow(e)
        .filter(|&v| v <= arith::MODULUS_CEILING)
        .ok_or_else(|| Error::Guard(format!("{p}^{e} exceeds the modulus ceiling")))
}

fn require_distinct_primes(ps: &[u64]) -> Result<(), Error> {
    for (i, &p) in ps.iter().enumerate() {
        if !arith::is_prime(p) || ps[..i].contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "{ps:?} must be distinct primes"
            )));
        }
    }
    Ok(())
}

/// The fiber `Φ_p(X^step)` placed at 0 in `Z_M`, as `{0, step, …, (p−1)step}`.
fn stepped_fiber(m: u64, p: u64, step: u64) -> Result<Multiset, Error> {
    Multiset::from_weights(m, (0..p).map(|k| ((k * step) as i64, 1)))
}

/// Two well-separated scales over `Z_N`, `N = p^e q^e`:
/// `Φ_p(X^{N/p})Φ_p(X^{N/p^e}) + Φ_q(X^{N/q})Φ_q(X^{N/q^e})`, of weight `p² + q²`
/// with `Φ_N Φ_{pq} | A`.
pub fn two_scale(p: u64, q: u64, e: u32) -> Result<Multiset, Error> {
    require_distinct_primes(&[p, q])?;
    if e < 2 {
        return Err(Error::InvalidArgument("exponent must be at least 2".into()));
    }
    let n = pow(p, e)?
        .checked_mul(pow(q, e)?)
        .filter(|&v| v <= arith::MODULUS_CEILING)
        .ok_or_else(|| Error::Guard("p^e q^e exceeds the modulus ceiling".into()))?;
    let part = |r: u64| -> Result<Multiset, Error> {
        stepped_fiber(n, r, n / r)?.convolve(&stepped_fiber(n, r, n / r.pow(e))?)
    };
    part(p)?.add(&part(q)?)
}

/// The long fiber `∏_j Φ_p(X^{p^{α_j − 1} q^β})` over `Z_{p^α q^β}`, with
/// `α_1 < ⋯ < α_k ≤ α`. It has `p^k` points.
pub fn long_fiber(p: u64, q: u64, alphas: &[u32], alpha: u32, beta: u32) -> Result<Multiset, Error> {
    require_distinct_primes(&[p, q])?;
    if alphas.is_empty()
        || alphas[0] == 0
        || alphas.windows(2).any(|w| w[0] >= w[1])
        || *alphas.last().unwrap() > alpha
    {
        return Err(Error::InvalidArgument(format!(
            "exponents {alphas:?} must increase within 1..={alpha}"
        )));
    }
    let n = pow(p, alpha)?
        .checked_mul(pow(q, beta)?)
        .filter(|&v| v <= arith::MODULUS_CEILING)
        .ok_or_else(|| Error::Guard("p^α q^β exceeds the modulus ceiling".into()))?;
    let qb = q.pow(beta);
    let mut acc = Multiset::delta(n, 0)?;
    for &a in alphas {
        acc = acc.convolve(&stepped_fiber(n, p, p.pow(a - 1) * qb)?)?;
    }
    Ok(acc)
}

/// `(a ∗ F_p ∗ F_q) ∪ (a' ∗ F_q ∗ F_r) ∪ (a'' ∗ F_p ∗ F_r)` with the three
/// components in distinct `D(M)`-grids, so `|A| = pq + pr + qr`.
///
/// `M = pqr·t^{k+1}` where `t` is the least prime outside `{p, q, r}` and
/// `t^k ≥ 3`.
pub fn three_prime(p: u64, q: u64, r: u64) -> Result<Multiset, Error> {
    require_distinct_primes(&[p, q, r])?;
    let t = (2..).find(|&t| arith::is_prime(t) && ![p, q, r].contains(&t)).unwrap();
    let mut tk = t;
    while tk < 3 {
        tk *= t;
    }
    let m = p * q * r * tk * t;
    let fiber = |a: u64, x: u64, y: u64| -> Result<Multiset, Error> {
        Multiset::fiber(m, x, a)?.convolve(&Multiset::fiber(m, y, 0)?)
    };
    fiber(0, p, q)?.add(&fiber(1, q, r)?)?.add(&fiber(2, p, r)?)
}

/// The eighteen-point style set: `A mod p_1q_1` is a `p_1`-fiber plus a
/// `q_1`-fiber and `A mod p_2q_2` a `p_2`-fiber plus a `q_2`-fiber, joined
/// pointwise by CRT in `Z_{p_1q_1p_2q_2}`. Requires `p_1 + q_1 = p_2 + q_2`.
pub fn one_scale_many_primes(p1: u64, q1: u64, p2: u64, q2: u64) -> Result<Multiset, Error> {
    require_distinct_primes(&[p1, q1, p2, q2])?;
    if p1 + q1 != p2 + q2 {
        return Err(Error::InvalidArgument(format!(
            "{p1} + {q1} must equal {p2} + {q2}"
        )));
    }
    let s1 = p1 * q1;
    let s2 = p2 * q2;
    let list = |p: u64, q: u64| -> Vec<u64> {
        let s = p * q;
        let mut v: Vec<u64> = (0..p).map(|k| k * (s / p)).collect();
        v.extend((0..q).map(|k| (1 + k * (s / q)) % s));
        v
    };
    let l1 = list(p1, q1);
    let l2 = list(p2, q2);
    let m = s1 * s2;
    let mf = factorize(m);
    let mut a = Multiset::new(m)?;
    for (&x, &y) in l1.iter().zip(&l2) {
        // Coordinates in the order of the sorted primes of M.
        let coords = mf
            .primes()
            .iter()
            .map(|&pr| if s1.is_multiple_of(pr) { x % pr } else { y % pr })
            .collect();
        a.add_weight(crt_join(&CrtCoordinates::new(mf.clone(), coords)?), 1);
    }
    Ok(a)
}

/// A multiset in `Z_180` with `Φ_30 Φ_60 | A` and nonzero `15`-cuboid
/// evaluations, all divisible by 4.
pub fn cuboid_order_example() -> Multiset {
    let m = 180;
    let base = Multiset::from_residues(m, &[0, 45, 90, 135]).unwrap();
    let spread = Multiset::from_weights(m, [(0, 1), (1, 1), (12, 1), (33, 2)]).unwrap();
    base.convolve(&spread).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{divides_by_remainder, divisor_profile};

    #[test]
    fn two_scale_small() {
        let a = two_scale(2, 3, 2).unwrap();
        assert_eq!(a.modulus(), 36);
        assert_eq!(a.total_weight(), 13);
        assert_eq!(a.weight(0), 2);
        let prof = divisor_profile(&a, 169).unwrap();
        assert_eq!(prof.members(), &[6, 12, 18, 36]);
        assert_eq!(prof.exponent_count(2), 2);
    }

    #[test]
    fn two_scale_large_scale() {
        let a = two_scale(2, 3, 10).unwrap();
        let n = 2u64.pow(10) * 3u64.pow(10);
        assert_eq!(a.modulus(), n);
        assert_eq!(a.total_weight(), 13);
        assert!(divides_by_remainder(&a, n));
        assert!(divides_by_remainder(&a, 6));
        let prof = divisor_profile(&a, 169).unwrap();
        assert!(prof.members().contains(&n));
        assert!(prof.members().contains(&6));
        assert_eq!(prof.exponent_count(2), 2);
    }

    #[test]
    fn long_fiber_divisors() {
        let alphas = [1, 3, 4];
        let f = long_fiber(3, 2, &alphas, 5, 2).unwrap();
        assert_eq!(f.total_weight(), 27);
        assert_eq!(f.support_len(), 27);
        for s in arith::divisors(f.modulus()) {
            let a = arith::valuation(s, 3);
            let expected = alphas.contains(&a);
            assert_eq!(divides_by_remainder(&f, s), expected, "s = {s}");
        }
    }

    #[test]
    fn three_prime_is_a_set_with_pairwise_divisors() {
        let a = three_prime(2, 3, 5).unwrap();
        assert_eq!(a.modulus(), 1470);
        assert_eq!(a.total_weight(), 31);
        assert_eq!(a.support_len(), 31);
        for s in [6, 10, 15] {
            assert!(divides_by_remainder(&a, s));
        }
        for s in [2, 3, 5] {
            assert!(!divides_by_remainder(&a, s));
        }
    }

    #[test]
    fn cuboid_example_divisors() {
        let a = cuboid_order_example();
        assert!(divides_by_remainder(&a, 30) && divides_by_remainder(&a, 60));
        assert!(!divides_by_remainder(&a, 15));
    }
}
