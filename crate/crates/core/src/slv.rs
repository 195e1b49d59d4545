//! Set-of-large-values constructions with exact rational certificates.
//!
//! A cluster `C ⊂ S_A` with modulus `Q` gives the periodic set
//! `Γ(C, ρ) = {ξ : dist(ξ, Q⁻¹Z) < ρ/2}`; translates of several such sets are
//! intersected so the measure stays above a product of targets while
//! `Γ − Γ` keeps a positive distance from the zeros of `∏_{s∈C} Φ_s(e^{2πiξ})`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, lcm, Rational};
use crate::cyclo::{cyclotomic_poly, DivisorProfile};
use crate::Error;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn rat_u(n: u64) -> Rational {
    Rational::from_big(BigInt::from(n), BigInt::one())
}

/// Finite union of open intervals, kept sorted, disjoint and merged.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntervalUnion {
    intervals: Vec<(Rational, Rational)>,
}

impl IntervalUnion {
    pub fn new(mut raw: Vec<(Rational, Rational)>) -> Self {
        raw.retain(|(lo, hi)| lo < hi);
        raw.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn interval(lo: Rational, hi: Rational) -> Self {
        IntervalUnion::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.intervals
            .iter()
            .fold(Rational::zero(), |acc, (lo, hi)| acc + (hi - lo))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|(lo, hi)| lo < x && x < hi)
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = (&a[i].0).max(&b[j].0);
            let hi = (&a[i].1).min(&b[j].1);
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn translate(&self, u: &Rational) -> IntervalUnion {
        IntervalUnion {
            intervals: self
                .intervals
                .iter()
                .map(|(lo, hi)| (lo + u, hi + u))
                .collect(),
        }
    }
}

/// A periodic union of open intervals, stored as its trace on one period
/// `[0, P)`. Intervals crossing `P` are split at the period boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicIntervalSet {
    period: Rational,
    base: IntervalUnion,
}

impl PeriodicIntervalSet {
    /// Union of `(x − w, x + w) + PZ` over the given intervals `(x − w, x + w)`
    /// or any open intervals; reduced modulo the period.
    pub fn from_intervals(period: Rational, raw: &[(Rational, Rational)]) -> Self {
        assert!(period.is_positive(), "period must be positive");
        let mut pieces = Vec::new();
        for (lo, hi) in raw {
            let len = hi - lo;
            if !len.is_positive() {
                continue;
            }
            if len >= period {
                pieces.push((Rational::zero(), period.clone()));
                continue;
            }
            let start = lo.rem_euclid(&period);
            let end = &start + &len;
            if end <= period {
                pieces.push((start, end));
            } else {
                pieces.push((start, period.clone()));
                pieces.push((Rational::zero(), end - &period));
            }
        }
        PeriodicIntervalSet {
            period,
            base: IntervalUnion::new(pieces),
        }
    }

    /// `{ξ : dist(ξ, centers + PZ) < halfwidth}`.
    pub fn from_centers(period: Rational, centers: &[Rational], halfwidth: &Rational) -> Self {
        let raw: Vec<(Rational, Rational)> = centers
            .iter()
            .map(|c| (c - halfwidth, c + halfwidth))
            .collect();
        Self::from_intervals(period, &raw)
    }

    pub fn full(period: Rational) -> Self {
        let base = IntervalUnion::interval(Rational::zero(), period.clone());
        PeriodicIntervalSet { period, base }
    }

    pub fn period(&self) -> &Rational {
        &self.period
    }

    /// Intervals of the trace on `[0, P)`.
    pub fn intervals(&self) -> &[(Rational, Rational)] {
        self.base.intervals()
    }

    /// Measure of one period.
    pub fn measure(&self) -> Rational {
        self.base.measure()
    }

    /// Measure per unit length.
    pub fn density(&self) -> Rational {
        self.measure() / &self.period
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.base.contains(&x.rem_euclid(&self.period))
            || (x.rem_euclid(&self.period).is_zero() && self.wraps_through_zero())
    }

    fn wraps_through_zero(&self) -> bool {
        let iv = self.base.intervals();
        matches!((iv.first(), iv.last()), (Some(f), Some(l)) if f.0.is_zero() && l.1 == self.period)
    }

    pub fn translate(&self, u: &Rational) -> Self {
        let moved: Vec<(Rational, Rational)> = self
            .base
            .intervals()
            .iter()
            .map(|(lo, hi)| (lo + u, hi + u))
            .collect();
        Self::from_intervals(self.period.clone(), &moved)
    }

    /// `f · Γ`, with period `f · P`.
    pub fn scale(&self, f: &Rational) -> Self {
        assert!(f.is_positive(), "scale factor must be positive");
        PeriodicIntervalSet {
            period: &self.period * f,
            base: IntervalUnion {
                intervals: self
                    .base
                    .intervals()
                    .iter()
                    .map(|(lo, hi)| (lo * f, hi * f))
                    .collect(),
            },
        }
    }

    pub fn intersect(&self, other: &PeriodicIntervalSet) -> Result<Self, Error> {
        if self.period != other.period {
            return Err(Error::InvalidArgument(
                "periodic sets with different periods".into(),
            ));
        }
        Ok(PeriodicIntervalSet {
            period: self.period.clone(),
            base: self.base.intersect(&other.base),
        })
    }

    /// `Γ − Γ`, as a periodic set with the same period.
    pub fn difference_set(&self) -> Self {
        let iv = self.base.intervals();
        let mut raw = Vec::with_capacity(iv.len() * iv.len());
        for a in iv {
            for b in iv {
                raw.push((&a.0 - &b.1, &a.1 - &b.0));
            }
        }
        Self::from_intervals(self.period.clone(), &raw)
    }

    /// The set restricted to the window `[lo, hi]`.
    pub fn unroll(&self, lo: &Rational, hi: &Rational) -> IntervalUnion {
        let p = &self.period;
        let first = (lo / p).floor() - BigInt::one();
        let last = (hi / p).floor() + BigInt::one();
        let mut raw = Vec::new();
        let mut k = first;
        while k <= last {
            let shift = p * &Rational::from_big(k.clone(), BigInt::one());
            for (a, b) in self.base.intervals() {
                raw.push((a + &shift, b + &shift));
            }
            k += 1;
        }
        IntervalUnion::new(raw).intersect(&IntervalUnion::interval(lo.clone(), hi.clone()))
    }

    /// Distance from `x` to the closure of the set, modulo the period.
    pub fn distance_to(&self, x: &Rational) -> Option<Rational> {
        let p = &self.period;
        let x = x.rem_euclid(p);
        let mut best: Option<Rational> = None;
        for (lo, hi) in self.base.intervals() {
            if lo <= &x && &x <= hi {
                return Some(Rational::zero());
            }
            for e in [lo, hi] {
                let d = (&x - e).abs();
                let d = d.clone().min(p - &d);
                best = Some(match best {
                    Some(b) => b.min(d),
                    None => d,
                });
            }
        }
        best
    }
}

/// `b/s ∈ [0, 1)` with `gcd(b, s) = 1`, for every `s` in `members`.
pub fn sigma_set(members: &[u64]) -> Vec<Rational> {
    let mut out: Vec<Rational> = members
        .iter()
        .flat_map(|&s| {
            (0..s)
                .filter(move |&b| gcd(b, s) == 1)
                .map(move |b| Rational::from_big(BigInt::from(b), BigInt::from(s)))
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Exact distance from `Γ − Γ` to the finite set `Σ`, zero when they meet.
pub fn verify_separation(gamma: &PeriodicIntervalSet, sigma: &[Rational]) -> Result<Rational, Error> {
    let diff = gamma.difference_set();
    if diff.intervals().is_empty() {
        return Err(Error::Precondition("Γ is empty".into()));
    }
    Ok(sigma
        .iter()
        .map(|s| diff.distance_to(s).unwrap())
        .min()
        .unwrap_or_else(|| diff.period().clone()))
}

/// Number of `b` in `(x, y]` with `gcd(b, s) = 1`.
fn coprime_count(x: &BigInt, y: &BigInt, rad_primes: &[u64]) -> BigInt {
    let mut total = BigInt::zero();
    for mask in 0u32..(1 << rad_primes.len()) {
        let mut d = 1u64;
        let mut sign = 1i32;
        for (j, &p) in rad_primes.iter().enumerate() {
            if mask >> j & 1 == 1 {
                d *= p;
                sign = -sign;
            }
        }
        let d = BigInt::from(d);
        let c = floor_div(y, &d) - floor_div(x, &d);
        if sign > 0 {
            total += c;
        } else {
            total -= c;
        }
    }
    total
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::div_floor(a, b)
}

/// Exact distance from `Γ − Γ` to `Σ = {b/s : s ∈ members, gcd(b, s) = 1}` for
/// a set of period 1, without listing `Σ`.
pub fn separation_from_members(gamma: &PeriodicIntervalSet, members: &[u64]) -> Result<Rational, Error> {
    if !gamma.period().is_one_value() {
        return Err(Error::InvalidArgument("separation needs a 1-periodic set".into()));
    }
    let diff = gamma.difference_set();
    separation_of_difference(&diff, members)
}

fn separation_of_difference(diff: &PeriodicIntervalSet, members: &[u64]) -> Result<Rational, Error> {
    let iv = diff.intervals();
    if iv.is_empty() {
        return Err(Error::Precondition("Γ is empty".into()));
    }
    let one = Rational::one();
    // Open gaps of the complement, as (left end, right end) on the circle.
    let mut gaps = Vec::new();
    for k in 0..iv.len() {
        let left = iv[k].1.clone();
        let right = if k + 1 < iv.len() {
            iv[k + 1].0.clone()
        } else {
            &iv[0].0 + &one
        };
        if left < right {
            gaps.push((left, right));
        }
    }
    let mut best: Option<Rational> = None;
    for &s in members {
        let primes = arith::prime_factors(s);
        let s_big = BigInt::from(s);
        let s_rat = rat_u(s);
        let mut inside = BigInt::zero();
        for (l, r) in &gaps {
            // b with l < b/s < r.
            let lo = (l * &s_rat).floor();
            let hi_r = r * &s_rat;
            let hi = if hi_r.denom().is_one() {
                hi_r.floor() - BigInt::one()
            } else {
                hi_r.floor()
            };
            if hi <= lo {
                continue;
            }
            let count = coprime_count(&lo, &hi, &primes);
            if count.is_zero() {
                continue;
            }
            inside += &count;
            let mut b = &lo + BigInt::one();
            while num_integer::Integer::gcd(&b, &s_big) != BigInt::one() {
                b += 1;
            }
            let d_left = Rational::from_big(b, s_big.clone()) - l;
            let mut b = hi.clone();
            while num_integer::Integer::gcd(&b, &s_big) != BigInt::one() {
                b -= 1;
            }
            let d_right = r - Rational::from_big(b, s_big.clone());
            let d = d_left.min(d_right);
            best = Some(match best {
                Some(x) => x.min(d),
                None => d,
            });
        }
        if inside != BigInt::from(arith::euler_phi(s)) {
            return Ok(Rational::zero());
        }
    }
    Ok(best.unwrap_or(one))
}

trait IsOne {
    fn is_one_value(&self) -> bool;
}

impl IsOne for Rational {
    fn is_one_value(&self) -> bool {
        *self == Rational::one()
    }
}

/// A cluster `C ⊂ S_A` with its modulus `Q`, `r_j = gcd(s_j, Q)`,
/// `t_j = s_j / r_j` and `T = max t_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    members: Vec<u64>,
    #[serde(rename = "Q")]
    modulus: u64,
    #[serde(rename = "T")]
    max_cofactor: u64,
}

impl Cluster {
    /// Requires `Q | lcm(C)` and `s_j ∤ Q` for every member.
    pub fn new(members: &[u64], q: u64) -> Result<Self, Error> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() || q == 0 {
            return Err(Error::InvalidArgument("cluster needs members and Q ≥ 1".into()));
        }
        let n = members.iter().fold(1, |acc, &s| lcm(acc, s));
        if n % q != 0 {
            return Err(Error::Precondition(format!("Q = {q} does not divide lcm = {n}")));
        }
        if let Some(&s) = members.iter().find(|&&s| q.is_multiple_of(s)) {
            return Err(Error::Precondition(format!("cluster member {s} divides Q = {q}")));
        }
        let t = members.iter().map(|&s| s / gcd(s, q)).max().unwrap();
        Ok(Cluster {
            members,
            modulus: q,
            max_cofactor: t,
        })
    }

    /// The power cluster of members with `v_p(s) = α`, with
    /// `Q = p^{α−1} lcm(s/p^α)`.
    pub fn power(profile: &DivisorProfile, p: u64, alpha: u32) -> Result<Self, Error> {
        if alpha == 0 {
            return Err(Error::Precondition(format!("exponent 0 of {p} in S_A")));
        }
        let members: Vec<u64> = profile
            .members()
            .iter()
            .copied()
            .filter(|&s| arith::valuation(s, p) == alpha)
            .collect();
        let pa = p.pow(alpha);
        let q = members.iter().fold(1, |acc, &s| lcm(acc, s / pa)) * p.pow(alpha - 1);
        Cluster::new(&members, q)
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// `Q`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `T = max_j s_j / gcd(s_j, Q)`.
    pub fn max_cofactor(&self) -> u64 {
        self.max_cofactor
    }

    /// `(r_j, t_j)` per member.
    pub fn factors(&self) -> Vec<(u64, u64)> {
        self.members
            .iter()
            .map(|&s| {
                let r = gcd(s, self.modulus);
                (r, s / r)
            })
            .collect()
    }

    /// Supremum `1/T` of the achievable measure `Qρ`.
    pub fn measure_ceiling(&self) -> Rational {
        Rational::from_big(BigInt::one(), BigInt::from(self.max_cofactor))
    }

    /// `ρ = (1/(QT))(1 − 1/(2^j QT))` with the least `j ≥ 1` such that `Qρ > λ`.
    pub fn rho_for_target(&self, lambda: &Rational) -> Result<Rational, Error> {
        if lambda >= &self.measure_ceiling() {
            return Err(Error::Precondition(format!(
                "target {lambda} is not below 1/T = {}",
                self.measure_ceiling()
            )));
        }
        let qt = rat_u(self.modulus) * rat_u(self.max_cofactor);
        let top = qt.recip();
        let q = rat_u(self.modulus);
        let mut scale = Rational::from_integer(2);
        loop {
            let rho = &top * &(Rational::one() - (&scale * &qt).recip());
            if &(&q * &rho) > lambda {
                return Ok(rho);
            }
            scale = scale * Rational::from_integer(2);
        }
    }
}

/// `Γ(C, ρ)`: centers `a/Q`, halfwidth `ρ/2`, period 1. Requires `0 < ρ < 1/(QT)`.
pub fn build_cluster_gamma(cluster: &Cluster, rho: &Rational) -> Result<PeriodicIntervalSet, Error> {
    let qt = rat_u(cluster.modulus) * rat_u(cluster.max_cofactor);
    if !rho.is_positive() || rho >= &qt.recip() {
        return Err(Error::Precondition(format!(
            "ρ = {rho} outside (0, 1/(QT)) with QT = {qt}"
        )));
    }
    let q = cluster.modulus as i64;
    let centers: Vec<Rational> = (0..q).map(|a| rat(a, q)).collect();
    Ok(PeriodicIntervalSet::from_centers(
        Rational::one(),
        &centers,
        &(rho / &Rational::from_integer(2)),
    ))
}

/// One cluster per exponent `α ∈ EXP(i)` of `p = p_i`.
pub fn split_clusters(profile: &DivisorProfile, p: u64) -> Result<Vec<Cluster>, Error> {
    if profile.members().is_empty() {
        return Err(Error::Precondition("S_A is empty".into()));
    }
    if let Some(&s) = profile.members().iter().find(|&&s| s % p != 0) {
        return Err(Error::Precondition(format!("{p} does not divide {s} ∈ S_A")));
    }
    profile
        .exponent_set(p)
        .iter()
        .map(|&alpha| Cluster::power(profile, p, alpha))
        .collect()
}

/// Translation `u ∈ [0, P)` maximizing `|G ∩ (Y + u)|`, with ties toward the
/// smallest `u`. `g` lists intervals (possibly a window), `y` is periodic.
fn maximize_overlap<F>(
    g: &[(Rational, Rational)],
    y: &PeriodicIntervalSet,
    eval: F,
) -> Result<(Rational, Rational), Error>
where
    F: Fn(&Rational) -> Rational,
{
    let p = y.period();
    let mut events: BTreeMap<Rational, i64> = BTreeMap::new();
    for (a, b) in g {
        for (c, d) in y.intervals() {
            for (pos, w) in [(a - d, 1), (b - d, -1), (a - c, -1), (b - c, 1)] {
                *events.entry(pos.rem_euclid(p)).or_insert(0) += w;
            }
        }
    }
    let zero = Rational::zero();
    events.entry(zero.clone()).or_insert(0);
    let positions: Vec<(Rational, i64)> = events.into_iter().collect();
    let mut best_u = zero.clone();
    let mut best_v = eval(&zero);
    if positions.len() == 1 {
        return Ok((best_u, best_v));
    }
    let mut value = best_v.clone();
    let next = eval(&positions[1].0);
    let mut slope = (&next - &value) / (&positions[1].0 - &positions[0].0);
    for k in 1..positions.len() {
        value = &value + &slope * &(&positions[k].0 - &positions[k - 1].0);
        if value > best_v {
            best_v = value.clone();
            best_u = positions[k].0.clone();
        }
        slope = slope + Rational::from_integer(positions[k].1);
    }
    let exact = eval(&best_u);
    if exact != best_v {
        return Err(Error::Internal(format!(
            "overlap sweep predicted {best_v}, exact value {exact}"
        )));
    }
    Ok((best_u, best_v))
}

/// Translations `τ_1 = 0, τ_2, …` chosen greedily so that `⋂(Γ_l + τ_l)` keeps
/// at least the product of the densities; requires `|[0,1] ∩ Γ_l| > λ_l`.
pub fn intersect_translated(
    gammas: &[PeriodicIntervalSet],
    targets: &[Rational],
) -> Result<(Vec<Rational>, PeriodicIntervalSet, Rational), Error> {
    if gammas.is_empty() || gammas.len() != targets.len() {
        return Err(Error::InvalidArgument(
            "need one target per set and at least one set".into(),
        ));
    }
    for (g, l) in gammas.iter().zip(targets) {
        if !g.period().is_one_value() {
            return Err(Error::InvalidArgument("sets must be 1-periodic".into()));
        }
        if &g.measure() <= l {
            return Err(Error::Precondition(format!(
                "target {l} is not below the measure {}",
                g.measure()
            )));
        }
    }
    let mut taus = vec![Rational::zero()];
    let mut current = gammas[0].clone();
    for y in &gammas[1..] {
        let (u, _) = maximize_overlap(current.intervals(), y, |u| {
            current.intersect(&y.translate(u)).unwrap().measure()
        })?;
        current = current.intersect(&y.translate(&u))?;
        taus.push(u);
    }
    let measure = current.measure();
    let target = targets.iter().fold(Rational::one(), |acc, l| acc * l);
    if measure <= target {
        return Err(Error::Falsified(format!(
            "intersection measure {measure} does not exceed {target}"
        )));
    }
    Ok((taus, current, measure))
}

/// Per-cluster data recorded in a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub members: Vec<u64>,
    #[serde(rename = "Q")]
    pub modulus: u64,
    #[serde(rename = "T")]
    pub max_cofactor: u64,
    pub rho: Rational,
    pub lambda: Rational,
    /// `Qρ`.
    pub measure: Rational,
}

/// Self-contained record of an SLV construction; [`verify`] rechecks it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlvCertificate {
    #[serde(rename = "S_A")]
    pub members: Vec<u64>,
    pub cardinality: i64,
    pub prime: Option<u64>,
    pub clusters: Vec<ClusterRecord>,
    /// `∏ λ_l`.
    pub target: Rational,
    pub translations: Vec<Rational>,
    /// `Γ ∩ [0, 1)`.
    pub intervals: Vec<(Rational, Rational)>,
    pub measure: Rational,
    /// Exact `dist(Γ − Γ, Σ_A)`.
    pub separation: Rational,
}

impl SlvCertificate {
    pub fn gamma(&self) -> PeriodicIntervalSet {
        PeriodicIntervalSet::from_intervals(Rational::one(), &self.intervals)
    }
}

fn certify(
    members: &[u64],
    cardinality: i64,
    prime: Option<u64>,
    clusters: Vec<(Cluster, Rational)>,
) -> Result<SlvCertificate, Error> {
    let mut records = Vec::new();
    let mut gammas = Vec::new();
    let mut lambdas = Vec::new();
    for (c, lambda) in clusters {
        let rho = c.rho_for_target(&lambda)?;
        gammas.push(build_cluster_gamma(&c, &rho)?);
        records.push(ClusterRecord {
            members: c.members.clone(),
            modulus: c.modulus,
            max_cofactor: c.max_cofactor,
            measure: rat_u(c.modulus) * &rho,
            rho,
            lambda: lambda.clone(),
        });
        lambdas.push(lambda);
    }
    let (translations, gamma, measure) = intersect_translated(&gammas, &lambdas)?;
    let separation = separation_from_members(&gamma, members)?;
    if !separation.is_positive() {
        return Err(Error::Falsified("Γ − Γ meets Σ_A".into()));
    }
    Ok(SlvCertificate {
        members: members.to_vec(),
        cardinality,
        prime,
        clusters: records,
        target: lambdas.iter().fold(Rational::one(), |acc, l| acc * l),
        translations,
        intervals: gamma.intervals().to_vec(),
        measure,
        separation,
    })
}

/// The cluster-split SLV set for `p = p_i`: requires `p | s` for all `s ∈ S_A`
/// and `0 < λ < 1/p`; the certificate has measure `> λ^{E_i}`.
pub fn build_gamma_a(profile: &DivisorProfile, p: u64, lambda: &Rational) -> Result<SlvCertificate, Error> {
    if !lambda.is_positive() || lambda * &rat_u(p) >= Rational::one() {
        return Err(Error::Precondition(format!("λ = {lambda} outside (0, 1/{p})")));
    }
    let clusters = split_clusters(profile, p)?;
    certify(
        profile.members(),
        profile.cardinality(),
        Some(p),
        clusters.into_iter().map(|c| (c, lambda.clone())).collect(),
    )
}

/// Manual splitting `S_A = ⋃ S_{A,i}` with `p_i | s` on each part; every part
/// is cluster-split by its own prime and all clusters are intersected.
pub fn build_gamma_from_groups(
    profile: &DivisorProfile,
    groups: &[(u64, Vec<u64>, Rational)],
) -> Result<SlvCertificate, Error> {
    let mut seen: Vec<u64> = groups.iter().flat_map(|(_, g, _)| g.clone()).collect();
    seen.sort_unstable();
    if seen != profile.members() {
        return Err(Error::Precondition("groups do not partition S_A".into()));
    }
    let mut clusters = Vec::new();
    for (p, group, lambda) in groups {
        let sub = DivisorProfile::from_members(profile.cardinality(), profile.copriming_modulus(), group);
        for c in split_clusters(&sub, *p)? {
            clusters.push((c, lambda.clone()));
        }
    }
    certify(profile.members(), profile.cardinality(), None, clusters)
}

/// Prime choice for [`build_gamma_a`]: the admissible prime (dividing every `s`)
/// with the smallest `p^{E_p}`, ties toward the smaller prime.
pub fn choose_prime(profile: &DivisorProfile) -> Option<u64> {
    profile
        .primes()
        .into_iter()
        .filter(|&p| profile.members().iter().all(|s| s % p == 0))
        .min_by_key(|&p| (p.checked_pow(profile.exponent_count(p) as u32).unwrap_or(u64::MAX), p))
}

/// A rational `λ` with `1/|A| < λ^E` and `λ < 1/p`, near the midpoint of the
/// admissible range.
pub fn default_lambda(cardinality: i64, p: u64, e: usize) -> Result<Rational, Error> {
    if cardinality <= 0 || (p as f64).powi(e as i32) >= cardinality as f64 {
        return Err(Error::Precondition(format!(
            "no λ with 1/{cardinality} < λ^{e} < {p}^-{e}"
        )));
    }
    let card = Rational::from_integer(cardinality);
    let ok = |l: &Rational| (l.pow(e as u32) * &card) > Rational::one() && l * &rat_u(p) < Rational::one();
    let lo = (cardinality as f64).powf(-1.0 / e as f64);
    let hi = 1.0 / p as f64;
    let mid = (lo + hi) / 2.0;
    let mut den = 1_000i64;
    loop {
        let cand = rat((mid * den as f64).round() as i64, den);
        if ok(&cand) {
            return Ok(cand);
        }
        den *= 10;
        if den > 1_000_000_000_000 {
            return Err(Error::Precondition("λ range too narrow".into()));
        }
    }
}

/// Rechecks every claim of a certificate from its own data.
pub fn verify(cert: &SlvCertificate) -> Result<(), Error> {
    let reject = |m: String| Err(Error::Rejected(m));
    let mut members = cert.members.clone();
    members.sort_unstable();
    members.dedup();
    if members != cert.members || members.is_empty() {
        return reject("S_A must be sorted, distinct and nonempty".into());
    }
    let mut covered: Vec<u64> = cert.clusters.iter().flat_map(|c| c.members.clone()).collect();
    covered.sort_unstable();
    if covered != members {
        return reject("clusters do not partition S_A".into());
    }
    if let Some(p) = cert.prime {
        if members.iter().any(|s| s % p != 0) {
            return reject(format!("{p} does not divide every member"));
        }
    }
    let mut gammas = Vec::new();
    let mut target = Rational::one();
    for rec in &cert.clusters {
        let c = match Cluster::new(&rec.members, rec.modulus) {
            Ok(c) => c,
            Err(e) => return reject(format!("invalid cluster: {e}")),
        };
        if c.max_cofactor != rec.max_cofactor {
            return reject(format!("T mismatch for Q = {}", rec.modulus));
        }
        if rat_u(rec.modulus) * &rec.rho != rec.measure {
            return reject(format!("Qρ mismatch for Q = {}", rec.modulus));
        }
        if rec.measure <= rec.lambda || !rec.lambda.is_positive() {
            return reject(format!("cluster measure does not exceed λ for Q = {}", rec.modulus));
        }
        if let Some(p) = cert.prime {
            if &rec.lambda * &rat_u(p) >= Rational::one() {
                return reject(format!("λ = {} is not below 1/{p}", rec.lambda));
            }
        }
        match build_cluster_gamma(&c, &rec.rho) {
            Ok(g) => gammas.push(g),
            Err(e) => return reject(format!("invalid ρ: {e}")),
        }
        target = target * &rec.lambda;
    }
    if target != cert.target {
        return reject("target is not the product of the λ's".into());
    }
    let lambdas: Vec<Rational> = cert.clusters.iter().map(|c| c.lambda.clone()).collect();
    let (taus, gamma, measure) = match intersect_translated(&gammas, &lambdas) {
        Ok(r) => r,
        Err(e) => return reject(format!("translation search failed: {e}")),
    };
    if taus != cert.translations {
        return reject("translations differ from the canonical search".into());
    }
    if gamma.intervals() != cert.intervals.as_slice() {
        return reject("interval list does not match the construction".into());
    }
    if measure != cert.measure || measure <= cert.target {
        return reject("measure mismatch or not above target".into());
    }
    let sep = separation_from_members(&gamma, &members)?;
    if sep != cert.separation || !sep.is_positive() {
        return reject("separation mismatch or not positive".into());
    }
    Ok(())
}

/// Why a single cluster over all of `S_A` is too small: with modulus `Q` the
/// achievable measure is below `1/T`.
pub fn single_cluster_ceiling(members: &[u64], q: u64) -> Result<(Cluster, Rational), Error> {
    let c = Cluster::new(members, q)?;
    let ceiling = c.measure_ceiling();
    Ok((c, ceiling))
}

/// Lower bound on `|∏_{s∈S} Φ_s(e^{2πiξ})|` over `ξ` with
/// `dist(ξ, Σ_s) ≥ δ` for every `s`, by sampling with a Lipschitz margin.
/// Returns 0 when sampling within the budget cannot certify a positive bound.
pub fn bad_factor_floor(members: &[u64], delta: &Rational, max_samples: usize) -> f64 {
    let delta = delta.to_f64();
    members
        .iter()
        .map(|&s| cyclotomic_floor(s, delta, max_samples))
        .product()
}

fn cyclotomic_floor(s: u64, delta: f64, max_samples: usize) -> f64 {
    // Φ_s(e(ξ)) = Φ_rad(e(rξ)); the region maps into dist(η, Σ_rad) ≥ rδ.
    let f = arith::factorize(s);
    let rad = f.radical();
    let r = (s / rad) as f64;
    let phi = cyclotomic_poly(rad);
    let lip: f64 = std::f64::consts::TAU
        * phi
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, &c)| j as f64 * (c as f64).abs())
            .sum::<f64>();
    let gap = r * delta;
    let dist_to_roots = |eta: f64| -> f64 {
        let x = eta * rad as f64;
        let k0 = x.floor() as i64;
        let mut best = f64::INFINITY;
        for k in (k0 - 64)..=(k0 + 64) {
            if gcd(k.rem_euclid(rad as i64) as u64, rad) == 1 {
                best = best.min((x - k as f64).abs() / rad as f64);
            }
        }
        best
    };
    let mut n = 1usize << 12;
    loop {
        let h = 1.0 / n as f64;
        let mut min_val = f64::INFINITY;
        for k in 0..n {
            let eta = (k as f64 + 0.5) * h;
            if dist_to_roots(eta) < gap - h / 2.0 {
                continue;
            }
            let z = num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * eta);
            min_val = min_val.min(phi.eval_complex(z).norm());
        }
        if min_val.is_infinite() {
            return 1.0;
        }
        let bound = min_val - lip * h / 2.0 - 1e-12;
        if bound > 0.0 {
            return bound;
        }
        if n >= max_samples {
            return 0.0;
        }
        n *= 2;
    }
}

/// `C_1 = 2 log(1/c) / log L`.
pub fn c1_constant(c: f64, l: u64) -> f64 {
    2.0 * (1.0 / c).ln() / (l as f64).ln()
}

/// Smallest integer `R > 1/t` with `((R−1)(R−1/t)/R²)·ν_Aν_B ≥ L^{−(1−ε)}`.
pub fn select_r(nu_a: &Rational, nu_b: &Rational, t: &Rational, l: u64, eps: f64) -> Option<u64> {
    let goal = (l as f64).powf(-(1.0 - eps));
    let nn = (nu_a * nu_b).to_f64();
    if nn <= goal {
        return None;
    }
    let tinv = t.recip().to_f64();
    let mut r = tinv.floor() as u64 + 1;
    loop {
        let rf = r as f64;
        if (rf - 1.0) * (rf - tinv) / (rf * rf) * nn >= goal {
            return Some(r);
        }
        r += 1;
        if r > 1 << 40 {
            return None;
        }
    }
}

/// Output of [`multiscale_gamma`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleReport {
    pub taus_a: Vec<Rational>,
    pub taus_b: Vec<Rational>,
    pub intervals: Vec<(Rational, Rational)>,
    /// Exact `|[0, 1] ∩ Γ|`.
    pub measure: Rational,
    /// `((R−1)(R−1/t)/R² · ν_Aν_B)^m`.
    pub bound: Rational,
    pub meets_bound: bool,
    /// Whether `((R−1)(R−1/t)/R²)·ν_Aν_B ≥ L^{−(1−ε)}`.
    pub meets_decay: bool,
}

/// `Γ = ⋂_{k<m} (L^{−k}Γ_A − τ_{k,A}) ∩ (t^{−1}L^{−k}Γ_B − τ_{k,B})` on `[0, 1]`,
/// with translations chosen greedily inside one period of each factor.
#[allow(clippy::too_many_arguments)]
pub fn multiscale_gamma(
    cert_a: &SlvCertificate,
    cert_b: &SlvCertificate,
    t: &Rational,
    m: u32,
    l: u64,
    r: &Rational,
    eps: f64,
) -> Result<MultiscaleReport, Error> {
    let half = rat(1, 2);
    if t < &half || t > &Rational::one() {
        return Err(Error::InvalidArgument(format!("t = {t} outside [1/2, 1]")));
    }
    if m == 0 || l < 2 {
        return Err(Error::InvalidArgument("need m ≥ 1 and L ≥ 2".into()));
    }
    let tinv = t.recip();
    if r <= &tinv {
        return Err(Error::Precondition(format!("R = {r} must exceed 1/t = {tinv}")));
    }
    let nu_a = cert_a.measure.clone();
    let nu_b = cert_b.measure.clone();
    let ga = cert_a.gamma();
    let gb = cert_b.gamma();
    let lk = |k: u32| Rational::from_big(BigInt::one(), BigInt::from(l).pow(k));
    let zero = Rational::zero();
    let one = Rational::one();
    let mut window = IntervalUnion::interval(zero.clone(), one.clone());
    let mut taus_a = Vec::new();
    let mut taus_b = Vec::new();
    for k in 0..m {
        for (set, which) in [(ga.scale(&lk(k)), 0), (gb.scale(&(lk(k) * &tinv)), 1)] {
            let (u, _) = maximize_overlap(window.intervals(), &set, |u| {
                window.intersect(&set.translate(u).unroll(&zero, &one)).measure()
            })?;
            window = window.intersect(&set.translate(&u).unroll(&zero, &one));
            let tau = (set.period() - &u).rem_euclid(set.period());
            if which == 0 {
                taus_a.push(tau);
            } else {
                taus_b.push(tau);
            }
        }
    }
    let factor = (r - &one) * (r - &tinv) / (r * r) * &nu_a * &nu_b;
    let bound = factor.pow(m);
    let measure = window.measure();
    let goal = (l as f64).powf(-(1.0 - eps));
    Ok(MultiscaleReport {
        taus_a,
        taus_b,
        intervals: window.intervals().to_vec(),
        meets_bound: measure >= bound,
        meets_decay: factor.to_f64() >= goal,
        measure,
        bound,
    })
}

/// Exact check `λ^E` against `1/|A|` used when choosing `λ`.
pub fn exceeds_inverse_cardinality(x: &Rational, cardinality: i64) -> bool {
    x * &Rational::from_integer(cardinality) > Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions;
    use crate::cyclo::divisor_profile;
    use proptest::prelude::*;

    fn two_scale_profile(e: u32) -> DivisorProfile {
        let a = constructions::two_scale(2, 3, e).unwrap();
        divisor_profile(&a, 169).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_set(&[6]), vec![rat(1, 6), rat(5, 6)]);
        assert_eq!(sigma_set(&[2, 3]), vec![rat(1, 3), rat(1, 2), rat(2, 3)]);
        assert!(!sigma_set(&[6, 10, 15]).contains(&Rational::zero()));
    }

    #[test]
    fn interval_union_merges() {
        let u = IntervalUnion::new(vec![(rat(0, 1), rat(1, 3)), (rat(1, 4), rat(1, 2)), (rat(2, 3), rat(3, 4))]);
        assert_eq!(u.intervals().len(), 2);
        assert_eq!(u.measure(), rat(7, 12));
    }

    #[test]
    fn periodic_wraps() {
        let g = PeriodicIntervalSet::from_centers(Rational::one(), &[Rational::zero()], &rat(1, 10));
        assert_eq!(g.intervals(), &[(rat(0, 1), rat(1, 10)), (rat(9, 10), rat(1, 1))]);
        assert_eq!(g.measure(), rat(1, 5));
        assert!(g.contains(&Rational::zero()));
        assert!(g.contains(&rat(19, 20)));
        assert!(!g.contains(&rat(1, 2)));
        let d = g.difference_set();
        assert_eq!(d.measure(), rat(2, 5));
    }

    #[test]
    fn cluster_gamma_measure_and_separation() {
        let c = Cluster::new(&[6, 18], 9).unwrap();
        assert_eq!(c.max_cofactor(), 2);
        let rho = c.rho_for_target(&rat(2, 5)).unwrap();
        assert_eq!(rho, rat(35, 648));
        let g = build_cluster_gamma(&c, &rho).unwrap();
        assert_eq!(g.measure(), rat(9, 1) * &rho);
        assert_eq!(g.measure(), rat(35, 72));
        let sep = verify_separation(&g, &sigma_set(c.members())).unwrap();
        assert!(sep.is_positive());
        assert_eq!(sep, separation_from_members(&g, c.members()).unwrap());
    }

    #[test]
    fn full_set_has_zero_separation() {
        let g = PeriodicIntervalSet::full(Rational::one());
        assert_eq!(verify_separation(&g, &[rat(1, 3)]).unwrap(), Rational::zero());
        assert_eq!(separation_from_members(&g, &[6]).unwrap(), Rational::zero());
    }

    #[test]
    fn q_divisible_by_member_fails_separation() {
        assert!(Cluster::new(&[6], 6).is_err());
        // Build the same Γ by hand with Q = s: the difference set contains 1/6.
        let rho = rat(1, 20);
        let centers: Vec<Rational> = (0..6).map(|a| rat(a, 6)).collect();
        let g = PeriodicIntervalSet::from_centers(Rational::one(), &centers, &(&rho / &rat(2, 1)));
        assert_eq!(verify_separation(&g, &sigma_set(&[6])).unwrap(), Rational::zero());
    }

    #[test]
    fn power_clusters_of_two_scale_example() {
        let prof = two_scale_profile(2);
        let cl = split_clusters(&prof, 2).unwrap();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].members(), &[6, 18]);
        assert_eq!(cl[0].modulus(), 9);
        assert_eq!(cl[1].members(), &[12, 36]);
        assert_eq!(cl[1].modulus(), 18);
        for c in &cl {
            assert!(c.factors().iter().all(|&(_, t)| t == 2));
        }
        let cl3 = split_clusters(&prof, 3).unwrap();
        assert!(cl3.iter().all(|c| c.max_cofactor() == 3));
    }

    #[test]
    fn exponent_ten_clusters() {
        let prof = two_scale_profile(10);
        let n = 2u64.pow(10) * 3u64.pow(10);
        let c = Cluster::power(&prof, 2, 10).unwrap();
        assert!(c.members().contains(&n));
        assert_eq!(c.modulus() % (2u64.pow(9) * 3u64.pow(10)), 0);
        assert_eq!(c.max_cofactor(), 2);
        let (single, ceiling) = single_cluster_ceiling(prof.members(), 3u64.pow(10)).unwrap();
        assert_eq!(single.max_cofactor(), 1024);
        assert!(ceiling * Rational::from_integer(13) < Rational::one());
    }

    #[test]
    fn intersect_trivial_cases() {
        let c = Cluster::new(&[6, 18], 9).unwrap();
        let g = build_cluster_gamma(&c, &c.rho_for_target(&rat(2, 5)).unwrap()).unwrap();
        let (taus, out, m) = intersect_translated(std::slice::from_ref(&g), &[rat(2, 5)]).unwrap();
        assert_eq!(taus, vec![Rational::zero()]);
        assert_eq!(out, g);
        assert_eq!(m, g.measure());
        let (taus, _, m) = intersect_translated(&[g.clone(), g.clone()], &[rat(2, 5), rat(2, 5)]).unwrap();
        assert_eq!(taus, vec![Rational::zero(), Rational::zero()]);
        assert_eq!(m, g.measure());
        assert!(intersect_translated(std::slice::from_ref(&g), &[rat(1, 2)]).is_err());
    }

    #[test]
    fn two_scale_certificate() {
        let prof = two_scale_profile(2);
        assert_eq!(choose_prime(&prof), Some(2));
        let lambda = default_lambda(13, 2, 2).unwrap();
        let cert = build_gamma_a(&prof, 2, &lambda).unwrap();
        assert!(cert.measure > cert.target);
        assert!(exceeds_inverse_cardinality(&cert.measure, 13));
        assert!(cert.separation.is_positive());
        assert_eq!(cert.target, lambda.pow(2));
        assert!(cert.measure >= rat(1, 4) * rat(35, 36) * rat(71, 72) - rat(1, 1000));
        verify(&cert).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: SlvCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn single_member_certificate() {
        let prof = DivisorProfile::from_members(7, 49, &[30]);
        let lambda = rat(1, 6);
        let cert = build_gamma_a(&prof, 5, &lambda).unwrap();
        assert_eq!(cert.clusters.len(), 1);
        assert!(cert.measure > lambda);
        verify(&cert).unwrap();
    }

    #[test]
    fn mutated_certificate_is_rejected() {
        let prof = two_scale_profile(2);
        let cert = build_gamma_a(&prof, 2, &default_lambda(13, 2, 2).unwrap()).unwrap();
        let bump = |r: &Rational| r + &Rational::from_big(BigInt::one(), r.denom() * BigInt::from(1_000_000));
        let mut c = cert.clone();
        c.translations[1] = bump(&c.translations[1]);
        assert!(verify(&c).is_err());
        let mut c = cert.clone();
        c.clusters[0].rho = bump(&c.clusters[0].rho);
        assert!(verify(&c).is_err());
        let mut c = cert.clone();
        c.separation = bump(&c.separation);
        assert!(verify(&c).is_err());
    }

    #[test]
    fn eighteen_element_single_cluster() {
        let a = constructions::one_scale_many_primes(5, 13, 7, 11).unwrap();
        let prof = divisor_profile(&a, 324).unwrap();
        let c = Cluster::new(prof.members(), 13 * 11).unwrap();
        assert_eq!(c.max_cofactor(), 7);
        assert!(c.measure_ceiling() * Rational::from_integer(18) > Rational::one());
    }

    #[test]
    fn bad_factor_floor_is_positive_and_consistent() {
        let prof = two_scale_profile(2);
        let cert = build_gamma_a(&prof, 2, &default_lambda(13, 2, 2).unwrap()).unwrap();
        let c = bad_factor_floor(&cert.members, &cert.separation, 1 << 22);
        assert!(c > 0.0);
        // Sample Γ − Γ and compare.
        let diff = cert.gamma().difference_set();
        for (lo, hi) in diff.intervals() {
            for k in 1..20 {
                let x = lo + &((hi - lo) * rat(k, 20));
                let z = num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * x.to_f64());
                let v: f64 = cert
                    .members
                    .iter()
                    .map(|&s| cyclotomic_poly(s).eval_complex(z).norm())
                    .product();
                assert!(v >= c);
            }
        }
    }

    #[test]
    fn r_selection() {
        let r = select_r(&rat(1, 2), &rat(1, 2), &Rational::one(), 16, 0.1).unwrap();
        let ok = |r: u64| {
            let rf = r as f64;
            (rf - 1.0) * (rf - 1.0) / (rf * rf) * 0.25 >= 16f64.powf(-0.9)
        };
        assert!(ok(r) && !ok(r - 1));
        assert!(select_r(&rat(1, 10), &rat(1, 10), &Rational::one(), 4, 0.1).is_none());
    }

    #[test]
    fn multiscale_m1_matches_pairwise() {
        let prof = two_scale_profile(2);
        let cert = build_gamma_a(&prof, 2, &default_lambda(13, 2, 2).unwrap()).unwrap();
        let rep = multiscale_gamma(&cert, &cert, &Rational::one(), 1, 169, &rat(100, 1), 0.1).unwrap();
        assert!(rep.meets_bound);
        assert!(rep.measure >= &cert.measure * &cert.measure);
    }

    #[test]
    fn explicit_two_scale_clusters() {
        let n = 2u64.pow(10) * 3u64.pow(10);
        let top = Cluster::new(&[n], 2u64.pow(9) * 3u64.pow(10)).unwrap();
        let low = Cluster::new(&[6], 3).unwrap();
        assert_eq!((top.max_cofactor(), low.max_cofactor()), (2, 2));
        // Both clusters can reach any λ < 1/2, so the product exceeds 1/13.
        let lambda = rat(49, 100);
        assert!(top.rho_for_target(&lambda).is_ok() && low.rho_for_target(&lambda).is_ok());
        assert!(exceeds_inverse_cardinality(&lambda.pow(2), 13));
    }

    #[test]
    fn multiscale_two_levels() {
        let prof = two_scale_profile(2);
        let cert = build_gamma_a(&prof, 2, &default_lambda(13, 2, 2).unwrap()).unwrap();
        let t = rat(3, 4);
        let r = select_r(&cert.measure, &cert.measure, &t, 169, 0.3).unwrap();
        let rep = multiscale_gamma(&cert, &cert, &t, 2, 169, &Rational::from_integer(r as i64), 0.3).unwrap();
        assert!(rep.meets_bound && rep.meets_decay);
        assert_eq!(rep.taus_a.len(), 2);
        let u = IntervalUnion::new(rep.intervals.clone());
        assert_eq!(u.measure(), rep.measure);
        // Every sampled point lies in each translated factor.
        for (lo, hi) in u.intervals().iter().take(50) {
            let x = (lo + hi) * rat(1, 2);
            for k in 0..2u32 {
                let lk = Rational::from_big(BigInt::one(), BigInt::from(169u64).pow(k));
                let ga = cert.gamma().scale(&lk);
                assert!(ga.contains(&(&x + &rep.taus_a[k as usize])));
                let gb = cert.gamma().scale(&(&lk * &t.recip()));
                assert!(gb.contains(&(&x + &rep.taus_b[k as usize])));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn sweep_matches_inclusion_exclusion(a in 1i64..20, b in 1i64..20, c in 0i64..20, w1 in 1i64..6, w2 in 1i64..6) {
            let g1 = PeriodicIntervalSet::from_intervals(Rational::one(), &[(rat(a, 20), rat(a, 20) + rat(w1, 20)), (rat(b, 7), rat(b, 7) + rat(w2, 40))]);
            let g2 = PeriodicIntervalSet::from_intervals(Rational::one(), &[(rat(c, 13), rat(c, 13) + rat(w2, 20))]);
            let each = |g: &PeriodicIntervalSet| g.measure();
            let inter = g1.intersect(&g2).unwrap().measure();
            let raw: Vec<(Rational, Rational)> = g1.intervals().iter().chain(g2.intervals()).cloned().collect();
            let union = PeriodicIntervalSet::from_intervals(Rational::one(), &raw).measure();
            prop_assert_eq!(union, each(&g1) + each(&g2) - inter);
        }

        #[test]
        fn greedy_translation_beats_average(q1 in 2u64..8, q2 in 2u64..8, n1 in 1i64..5, n2 in 1i64..5) {
            let g1 = PeriodicIntervalSet::from_centers(Rational::one(), &(0..q1 as i64).map(|k| rat(k, q1 as i64)).collect::<Vec<_>>(), &rat(n1, 20 * q1 as i64));
            let g2 = PeriodicIntervalSet::from_centers(Rational::one(), &(0..q2 as i64).map(|k| rat(2 * k + 1, 2 * q2 as i64)).collect::<Vec<_>>(), &rat(n2, 20 * q2 as i64));
            let (u, v) = maximize_overlap(g1.intervals(), &g2, |u| g1.intersect(&g2.translate(u)).unwrap().measure()).unwrap();
            prop_assert!(v >= g1.measure() * g2.measure());
            prop_assert_eq!(v.clone(), g1.intersect(&g2.translate(&u)).unwrap().measure());
            for k in 0..50 {
                let x = rat(k, 50);
                prop_assert!(g1.intersect(&g2.translate(&x)).unwrap().measure() <= v);
            }
        }
    }
}
