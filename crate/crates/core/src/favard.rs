//! Product Cantor sets `A_n × B_n` thickened by `L^{−n}`, their projections,
//! Favard length by midpoint quadrature, and the bad factor `|φ″|`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::Rational;
use crate::cyclo::{cyclotomic_poly, DivisorProfile};
use crate::slv::{bad_factor_floor, c1_constant, IntervalUnion, MultiscaleReport, SlvCertificate};
use crate::Error;

/// Default ceiling on the number of points `L^n` of [`iterate_points`].
pub const POINT_CEILING: usize = 1 << 22;

/// Digit sets `A`, `B` with `L = |A||B|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorProductSpec {
    a: Vec<u64>,
    b: Vec<u64>,
}

impl CantorProductSpec {
    pub fn new(a: &[u64], b: &[u64]) -> Result<Self, Error> {
        let norm = |d: &[u64]| -> Result<Vec<u64>, Error> {
            let mut v = d.to_vec();
            v.sort_unstable();
            v.dedup();
            if v.len() != d.len() || v.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "digit set {d:?} needs at least two distinct digits"
                )));
            }
            Ok(v)
        };
        Ok(CantorProductSpec { a: norm(a)?, b: norm(b)? })
    }

    /// `A = B = {0, 3}`, `L = 4`.
    pub fn four_corner() -> Self {
        CantorProductSpec { a: vec![0, 3], b: vec![0, 3] }
    }

    pub fn digits_a(&self) -> &[u64] {
        &self.a
    }

    pub fn digits_b(&self) -> &[u64] {
        &self.b
    }

    /// `L = |A||B|`.
    pub fn scale(&self) -> u64 {
        (self.a.len() * self.b.len()) as u64
    }

    fn symmetric(d: &[u64]) -> bool {
        let top = *d.last().unwrap();
        d.iter().rev().map(|&x| top - x).eq(d.iter().copied())
    }
}

/// Points of `A_n × B_n` as integer numerators over `L^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    denominator: u64,
    points: Vec<(u64, u64)>,
}

impl PointSet {
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn points(&self) -> &[(u64, u64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact coordinates.
    pub fn rational_points(&self) -> Vec<(Rational, Rational)> {
        let d = self.denominator as i64;
        self.points
            .iter()
            .map(|&(x, y)| (Rational::new(x as i64, d), Rational::new(y as i64, d)))
            .collect()
    }
}

fn digit_sums(d: &[u64], l: u64, n: u32) -> Vec<u64> {
    let mut cur = vec![0u64];
    for _ in 0..n {
        cur = cur
            .iter()
            .flat_map(|&x| d.iter().map(move |&a| x * l + a))
            .collect();
    }
    cur
}

/// `A_n × B_n` where `A_n = Σ_{j≤n} L^{−j}A`.
pub fn iterate_points(spec: &CantorProductSpec, n: u32) -> Result<PointSet, Error> {
    iterate_points_with_ceiling(spec, n, POINT_CEILING)
}

pub fn iterate_points_with_ceiling(spec: &CantorProductSpec, n: u32, ceiling: usize) -> Result<PointSet, Error> {
    let l = spec.scale();
    let count = (l as u128).checked_pow(n).unwrap_or(u128::MAX);
    if count > ceiling as u128 {
        return Err(Error::Guard(format!("L^n = {count} points exceeds {ceiling}")));
    }
    let denominator = l
        .checked_pow(n)
        .filter(|d| d.checked_mul(spec.a.last().copied().max(spec.b.last().copied()).unwrap() + 1).is_some())
        .ok_or_else(|| Error::Guard("L^n overflows".into()))?;
    let xs = digit_sums(&spec.a, l, n);
    let ys = digit_sums(&spec.b, l, n);
    let points = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    Ok(PointSet { denominator, points })
}

/// Projection of a point set on direction `θ`, thickened by `radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionProfile {
    pub theta: f64,
    pub intervals: Vec<(f64, f64)>,
    pub length: f64,
}

fn union_length(sorted_centers: &[f64], radius: f64) -> f64 {
    if radius <= 0.0 || sorted_centers.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    let mut lo = sorted_centers[0] - radius;
    let mut hi = sorted_centers[0] + radius;
    for &c in &sorted_centers[1..] {
        if c - radius > hi {
            total += hi - lo;
            lo = c - radius;
        }
        hi = c + radius;
    }
    total + (hi - lo)
}

fn sorted_projection(points: &PointSet, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let d = points.denominator as f64;
    let mut v: Vec<f64> = points
        .points
        .iter()
        .map(|&(x, y)| (x as f64 * c + y as f64 * s) / d)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Merged intervals `⋃ [proj_θ(p) − r, proj_θ(p) + r]`.
pub fn projection_profile(points: &PointSet, theta: f64, radius: f64) -> ProjectionProfile {
    let centers = sorted_projection(points, theta);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for c in centers {
        match intervals.last_mut() {
            Some(last) if c - radius <= last.1 => last.1 = c + radius,
            _ => intervals.push((c - radius, c + radius)),
        }
    }
    let length = intervals.iter().map(|(a, b)| b - a).sum();
    ProjectionProfile { theta, intervals, length }
}

/// Length of the thickened projection on direction `θ`.
pub fn projection_length(points: &PointSet, theta: f64, radius: f64) -> f64 {
    union_length(&sorted_projection(points, theta), radius)
}

/// Exact length at `θ = 0` (`axis = 0`) or `θ = π/2` (`axis = 1`).
pub fn projection_length_axis(points: &PointSet, axis: usize, radius: &Rational) -> Rational {
    let d = points.denominator as i64;
    let mut coords: Vec<u64> = points
        .points
        .iter()
        .map(|&(x, y)| if axis == 0 { x } else { y })
        .collect();
    coords.sort_unstable();
    coords.dedup();
    let raw: Vec<(Rational, Rational)> = coords
        .iter()
        .map(|&c| {
            let c = Rational::new(c as i64, d);
            (&c - radius, &c + radius)
        })
        .collect();
    IntervalUnion::new(raw).measure()
}

/// Favard length estimate with a rigorous quadrature error bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FavardEstimate {
    pub n: u32,
    pub nodes: usize,
    /// `(1/π) Σ h |proj_{θ_j}(S_n)|` over midpoints `θ_j`.
    pub value: f64,
    pub error_bound: f64,
}

/// Symmetry factor of `θ ↦ |proj_θ|`: 2 when `A` or `B` is symmetric
/// (`θ ↔ π − θ`), 4 when `A = B` is symmetric (also `θ ↔ π/2 − θ`).
fn fold(spec: &CantorProductSpec) -> usize {
    let sym_a = CantorProductSpec::symmetric(&spec.a);
    match (sym_a, spec.a == spec.b) {
        (true, true) => 4,
        _ if sym_a || CantorProductSpec::symmetric(&spec.b) => 2,
        _ => 1,
    }
}

/// Composite midpoint rule for `(1/π)∫_0^π |proj_θ(S_n)| dθ` with `nodes`
/// cells. On a cell of width `h` centers move by at most `δ = R h/2`
/// (after a common translation, `R` the radius about the bounding-box
/// center), so the cell integral lies between the lengths at radii `r ∓ δ`.
/// The bound is infinite when `δ ≥ r`.
pub fn favard_length(spec: &CantorProductSpec, n: u32, nodes: usize) -> Result<FavardEstimate, Error> {
    if nodes < 16 || !nodes.is_multiple_of(4) {
        return Err(Error::InvalidArgument("nodes must be a multiple of 4, at least 16".into()));
    }
    let points = iterate_points(spec, n)?;
    let l = spec.scale() as f64;
    let radius = l.powi(-(n as i32));
    let d = points.denominator as f64;
    let (max_x, max_y) = points
        .points
        .iter()
        .fold((0u64, 0u64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    let (cx, cy) = (max_x as f64 / (2.0 * d), max_y as f64 / (2.0 * d));
    let reach = points
        .points
        .iter()
        .map(|&(x, y)| (x as f64 / d - cx).hypot(y as f64 / d - cy))
        .fold(0.0, f64::max);
    let h = std::f64::consts::PI / nodes as f64;
    let delta = reach * h / 2.0;
    let f = fold(spec);
    let cells: Vec<usize> = (0..nodes / f).collect();
    // Pairwise reduction keeps the sum independent of scheduling.
    let per_cell: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&j| {
            let theta = (j as f64 + 0.5) * h;
            let centers = sorted_projection(&points, theta);
            let mid = union_length(&centers, radius);
            let err = if delta < radius {
                let hi = union_length(&centers, radius + delta);
                let lo = union_length(&centers, radius - delta);
                (hi - mid).max(mid - lo)
            } else {
                f64::INFINITY
            };
            (mid, err)
        })
        .collect();
    let (sum, err) = pairwise_sum(&per_cell);
    let scale = f as f64 * h / std::f64::consts::PI;
    Ok(FavardEstimate {
        n,
        nodes,
        value: sum * scale,
        error_bound: err * scale,
    })
}

fn pairwise_sum(v: &[(f64, f64)]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => v[0],
        len => {
            let (a, b) = v.split_at(len / 2);
            let (x, y) = (pairwise_sum(a), pairwise_sum(b));
            (x.0 + y.0, x.1 + y.1)
        }
    }
}

/// Doubles the node count from `start` until the error bound is below `tol`
/// or `max_nodes` is reached.
pub fn favard_length_adaptive(
    spec: &CantorProductSpec,
    n: u32,
    tol: f64,
    start: usize,
    max_nodes: usize,
) -> Result<FavardEstimate, Error> {
    let mut nodes = start.max(16).next_power_of_two();
    loop {
        let est = favard_length(spec, n, nodes)?;
        if est.error_bound < tol || nodes * 2 > max_nodes {
            return Ok(est);
        }
        nodes *= 2;
    }
}

/// One row of the decay table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FavardRow {
    pub estimate: FavardEstimate,
    /// `Δ log Fav / Δ log n` against the previous row; `None` on the first row.
    pub loglog_slope: Option<f64>,
}

pub fn favard_table(
    spec: &CantorProductSpec,
    levels: std::ops::RangeInclusive<u32>,
    tol: f64,
    max_nodes: usize,
) -> Result<Vec<FavardRow>, Error> {
    let mut rows: Vec<FavardRow> = Vec::new();
    let mut start = 64;
    for n in levels {
        let est = favard_length_adaptive(spec, n, tol, start, max_nodes)?;
        start = est.nodes;
        let loglog_slope = rows.last().map(|prev| {
            let p = &prev.estimate;
            (est.value.ln() - p.value.ln()) / ((n as f64).ln() - (p.n as f64).ln())
        });
        rows.push(FavardRow { estimate: est, loglog_slope });
    }
    Ok(rows)
}

/// `|∏_{s∈S_A} Φ_s(e^{2πiξ})|`.
pub fn phi_bad(profile: &DivisorProfile, xi: f64) -> f64 {
    phi_bad_members(profile.members(), xi)
}

pub fn phi_bad_members(members: &[u64], xi: f64) -> f64 {
    let z = Complex64::from_polar(1.0, std::f64::consts::TAU * xi);
    members
        .iter()
        .map(|&s| cyclotomic_poly(s).eval_complex(z).norm())
        .product()
}

/// As [`phi_bad`] at a rational point, exactly 0 on `Σ_A`.
pub fn phi_bad_exact(profile: &DivisorProfile, xi: &Rational) -> f64 {
    let one = Rational::one();
    let frac = xi.rem_euclid(&one);
    let den = frac.denom();
    if profile
        .members()
        .iter()
        .any(|&s| *den == num_bigint::BigInt::from(s))
    {
        return 0.0;
    }
    phi_bad(profile, frac.to_f64())
}

/// Outcome of [`slv_value_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlvValueReport {
    pub samples: usize,
    pub c_a: f64,
    pub c_b: f64,
    pub c1: f64,
    /// `L^{−C_1 m}`.
    pub threshold: f64,
    pub min_product: f64,
}

/// Samples `ξ = x − y` with `x, y` uniform in the multiscale `Γ` and checks
/// `∏_{k<m} |φ″_A(L^kξ)||φ″_B(L^k tξ)| ≥ L^{−C_1 m}`; a violation is a
/// falsification.
pub fn slv_value_check(
    cert_a: &SlvCertificate,
    cert_b: &SlvCertificate,
    report: &MultiscaleReport,
    t: &Rational,
    m: u32,
    l: u64,
    samples: usize,
    seed: u64,
) -> Result<SlvValueReport, Error> {
    if report.intervals.is_empty() {
        return Err(Error::Precondition("multiscale Γ is empty".into()));
    }
    let c_a = bad_factor_floor(&cert_a.members, &cert_a.separation, 1 << 22);
    let c_b = bad_factor_floor(&cert_b.members, &cert_b.separation, 1 << 22);
    let c = c_a.min(c_b);
    if c <= 0.0 {
        return Err(Error::Precondition("could not certify a positive bad-factor floor".into()));
    }
    let c1 = c1_constant(c, l);
    let threshold = (l as f64).powf(-c1 * m as f64);
    let iv: Vec<(f64, f64)> = report.intervals.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect();
    let mut cumulative = Vec::with_capacity(iv.len());
    let mut acc = 0.0;
    for (a, b) in &iv {
        acc += b - a;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        let u = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c < u).min(iv.len() - 1);
        let (a, b) = iv[k];
        let frac: f64 = rng.gen();
        // Stay strictly inside the open interval.
        a + (b - a) * (0.001 + 0.998 * frac)
    };
    let tf = t.to_f64();
    let lf = l as f64;
    let mut min_product = f64::INFINITY;
    for _ in 0..samples {
        let xi = draw(&mut rng) - draw(&mut rng);
        let mut prod = 1.0;
        let mut scale = 1.0;
        for _ in 0..m {
            prod *= phi_bad_members(&cert_a.members, (scale * xi).rem_euclid(1.0));
            prod *= phi_bad_members(&cert_b.members, (scale * tf * xi).rem_euclid(1.0));
            scale *= lf;
        }
        if prod < threshold {
            return Err(Error::Falsified(format!(
                "bad-factor product {prod:e} below L^(-C_1 m) = {threshold:e} at ξ = {xi}"
            )));
        }
        min_product = min_product.min(prod);
    }
    Ok(SlvValueReport {
        samples,
        c_a,
        c_b,
        c1,
        threshold,
        min_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions;
    use crate::cyclo::divisor_profile;
    use crate::slv::{build_gamma_a, default_lambda, multiscale_gamma, select_r};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn first_level_points() {
        let spec = CantorProductSpec::four_corner();
        let p = iterate_points(&spec, 1).unwrap();
        assert_eq!(p.denominator(), 4);
        assert_eq!(p.points(), &[(0, 0), (0, 3), (3, 0), (3, 3)]);
        assert_eq!(iterate_points(&spec, 2).unwrap().len(), 16);
        assert!(CantorProductSpec::new(&[0], &[0, 1]).is_err());
        assert!(CantorProductSpec::new(&[0, 0], &[0, 1]).is_err());
        assert!(iterate_points_with_ceiling(&spec, 5, 100).is_err());
    }

    #[test]
    fn nesting_in_sup_norm() {
        let spec = CantorProductSpec::four_corner();
        for n in 1..=4u32 {
            let coarse = iterate_points(&spec, n).unwrap().rational_points();
            let fine = iterate_points(&spec, n + 1).unwrap().rational_points();
            let step = r(1, 4i64.pow(n));
            for (x, y) in &fine {
                assert!(coarse.iter().any(|(a, b)| {
                    (x - a).abs() < step && (y - b).abs() < step && x >= a && y >= b
                }));
            }
        }
    }

    #[test]
    fn axis_projection_exact() {
        let spec = CantorProductSpec::four_corner();
        let p = iterate_points(&spec, 1).unwrap();
        assert_eq!(projection_length_axis(&p, 0, &r(1, 4)), r(1, 1));
        assert!((projection_length(&p, 0.0, 0.25) - 1.0).abs() < 1e-12);
        for n in 1..=4 {
            let p = iterate_points(&spec, n).unwrap();
            let rad = r(1, 4i64.pow(n));
            let exact = projection_length_axis(&p, 0, &rad).to_f64();
            assert!((projection_length(&p, 0.0, rad.to_f64()) - exact).abs() < 1e-12);
            // Direct 1-D computation on A_n alone.
            let xs: Vec<f64> = digit_sums(&[0, 3], 4, n).iter().map(|&x| x as f64 / 4f64.powi(n as i32)).collect();
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            assert!((union_length(&sorted, rad.to_f64()) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_basics() {
        let single = PointSet { denominator: 1, points: vec![(0, 0)] };
        assert_eq!(projection_length(&single, 0.7, 0.1), 0.2);
        let p = iterate_points(&CantorProductSpec::four_corner(), 3).unwrap();
        let mut prev = 0.0;
        for k in 1..20 {
            let len = projection_length(&p, 0.4, k as f64 * 0.002);
            assert!(len >= prev);
            assert!(len <= 2.0 * k as f64 * 0.002 * p.len() as f64 + 1e-12);
            prev = len;
        }
        let prof = projection_profile(&p, 0.4, 0.01);
        assert!((prof.length - projection_length(&p, 0.4, 0.01)).abs() < 1e-12);
    }

    #[test]
    fn full_grid_is_below_hull_average() {
        let spec = CantorProductSpec::new(&[0, 1], &[0, 1]).unwrap();
        let est = favard_length(&spec, 1, 1024).unwrap();
        // Every projection is one interval, so the average equals that of the
        // hull [0, 1/4]² + disc(1/4): perimeter / π.
        let hull = 1.0 / std::f64::consts::PI + 0.5;
        assert!((est.value - hull).abs() <= est.error_bound + 1e-9);
    }

    #[test]
    fn folding_matches_full_sum() {
        let spec = CantorProductSpec::four_corner();
        let est = favard_length(&spec, 2, 256).unwrap();
        let p = iterate_points(&spec, 2).unwrap();
        let h = std::f64::consts::PI / 256.0;
        let full: f64 = (0..256).map(|j| projection_length(&p, (j as f64 + 0.5) * h, 1.0 / 16.0)).sum::<f64>() * h / std::f64::consts::PI;
        assert!((est.value - full).abs() < 1e-9);
        let asym = CantorProductSpec::new(&[0, 1], &[0, 2]).unwrap();
        assert_eq!(fold(&asym), 2);
        assert_eq!(fold(&CantorProductSpec::new(&[0, 1, 3], &[0, 2, 3]).unwrap()), 1);
    }

    #[test]
    fn doubling_nodes_stays_within_bound() {
        let spec = CantorProductSpec::four_corner();
        for n in 1..=3 {
            let a = favard_length(&spec, n, 1 << 12).unwrap();
            let b = favard_length(&spec, n, 1 << 13).unwrap();
            assert!((a.value - b.value).abs() <= a.error_bound, "n = {n}");
            assert!(b.error_bound < a.error_bound);
        }
    }

    #[test]
    fn phi_bad_identities() {
        let a = constructions::two_scale(2, 3, 2).unwrap();
        let prof = divisor_profile(&a, 169).unwrap();
        assert!((phi_bad(&prof, 0.0) - 1.0).abs() < 1e-12);
        assert_eq!(phi_bad_exact(&prof, &r(5, 36)), 0.0);
        assert_eq!(phi_bad_exact(&prof, &r(1, 6)), 0.0);
        assert!(phi_bad_exact(&prof, &r(1, 5)) > 0.0);
        for k in 0..50 {
            let x = k as f64 / 50.0 + 0.0037;
            assert!((phi_bad(&prof, x) - phi_bad(&prof, x + 1.0)).abs() < 1e-9);
            assert!((phi_bad(&prof, x) - phi_bad(&prof, -x)).abs() < 1e-9);
        }
    }

    #[test]
    fn value_check_on_two_scale_example() {
        let a = constructions::two_scale(2, 3, 2).unwrap();
        let prof = divisor_profile(&a, 169).unwrap();
        let cert = build_gamma_a(&prof, 2, &default_lambda(13, 2, 2).unwrap()).unwrap();
        let t = r(3, 4);
        let big_r = select_r(&cert.measure, &cert.measure, &t, 169, 0.3).unwrap();
        for m in [1u32, 2] {
            let rep = multiscale_gamma(&cert, &cert, &t, m, 169, &Rational::from_integer(big_r as i64), 0.3).unwrap();
            let out = slv_value_check(&cert, &cert, &rep, &t, m, 169, 2000, 7).unwrap();
            assert!(out.min_product >= out.threshold);
            assert!((out.c1 - 2.0 * (1.0 / out.c_a).ln() / 169f64.ln()).abs() < 1e-12);
        }
    }
}
