//! Weighted multisets over `Z_M`, stored as sparse mask polynomials
//! `A(X) = Σ w(a) X^a mod X^M − 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::arith::{self, MODULUS_CEILING};
use crate::Error;

/// A signed weighted multiset over `Z_M`. Zero weights are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMultiset")]
pub struct Multiset {
    modulus: u64,
    weights: BTreeMap<u64, i64>,
}

#[derive(Deserialize)]
struct RawMultiset {
    modulus: u64,
    weights: BTreeMap<u64, i64>,
}

impl TryFrom<RawMultiset> for Multiset {
    type Error = Error;

    fn try_from(raw: RawMultiset) -> Result<Self, Error> {
        let mut a = Multiset::new(raw.modulus)?;
        for (x, w) in raw.weights {
            if x >= raw.modulus {
                return Err(Error::InvalidArgument(format!(
                    "residue {x} outside Z_{}",
                    raw.modulus
                )));
            }
            a.add_weight(x, w);
        }
        Ok(a)
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multiset(Z_{}; {:?})", self.modulus, self.weights)
    }
}

impl Multiset {
    /// The empty multiset over `Z_M`.
    pub fn new(modulus: u64) -> Result<Self, Error> {
        if modulus == 0 || modulus > MODULUS_CEILING {
            return Err(Error::InvalidArgument(format!(
                "modulus {modulus} outside 1..={MODULUS_CEILING}"
            )));
        }
        Ok(Multiset {
            modulus,
            weights: BTreeMap::new(),
        })
    }

    /// Builds a multiset from `(residue, weight)` pairs; residues are reduced
    /// mod `M` and repeated entries add up.
    pub fn from_weights<I>(modulus: u64, pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut a = Multiset::new(modulus)?;
        for (x, w) in pairs {
            a.add_weight(arith::rem(x as i128, modulus), w);
        }
        Ok(a)
    }

    /// Each listed residue gets weight one more.
    pub fn from_residues(modulus: u64, residues: &[i64]) -> Result<Self, Error> {
        Self::from_weights(modulus, residues.iter().map(|&x| (x, 1)))
    }

    /// The point mass `δ_c`.
    pub fn delta(modulus: u64, c: u64) -> Result<Self, Error> {
        Self::from_weights(modulus, [(c as i64, 1)])
    }

    /// The fiber `x ∗ F_p^N = {x, x + N/p, …, x + (p−1)N/p}`.
    pub fn fiber(modulus: u64, p: u64, x: u64) -> Result<Self, Error> {
        if !arith::is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if !modulus.is_multiple_of(p) {
            return Err(Error::NotADivisor(p, modulus));
        }
        let step = modulus / p;
        let mut a = Multiset::new(modulus)?;
        for k in 0..p {
            a.add_weight((x + k * step) % modulus, 1);
        }
        Ok(a)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn weight(&self, x: u64) -> i64 {
        self.weights
            .get(&(x % self.modulus))
            .copied()
            .unwrap_or(0)
    }

    /// Nonzero `(residue, weight)` entries in increasing residue order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.weights.iter().map(|(&x, &w)| (x, w))
    }

    pub fn weights(&self) -> &BTreeMap<u64, i64> {
        &self.weights
    }

    pub fn support(&self) -> Vec<u64> {
        self.weights.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.values().all(|&w| w > 0)
    }

    /// `|A| = A(1)`.
    pub fn total_weight(&self) -> i64 {
        self.weights.values().sum()
    }

    /// Sum of absolute weights.
    pub fn mass(&self) -> i64 {
        self.weights.values().map(|w| w.abs()).sum()
    }

    pub fn add_weight(&mut self, x: u64, w: i64) {
        if w == 0 {
            return;
        }
        let x = x % self.modulus;
        let entry = self.weights.entry(x).or_insert(0);
        *entry += w;
        if *entry == 0 {
            self.weights.remove(&x);
        }
    }

    fn check_same(&self, other: &Multiset) -> Result<(), Error> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }

    pub fn add(&self, other: &Multiset) -> Result<Multiset, Error> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (x, w) in other.iter() {
            out.add_weight(x, w);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Multiset) -> Result<Multiset, Error> {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Multiset {
        let mut out = Multiset {
            modulus: self.modulus,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            out.add_weight(x, k * w);
        }
        out
    }

    /// `t ∗ A`.
    pub fn translate(&self, t: i64) -> Multiset {
        let m = self.modulus;
        let mut out = Multiset {
            modulus: m,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            out.add_weight(arith::rem(x as i128 + t as i128, m), w);
        }
        out
    }

    /// Image under `x ↦ u·x`.
    pub fn dilate(&self, u: u64) -> Multiset {
        let m = self.modulus;
        let mut out = Multiset {
            modulus: m,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            out.add_weight(arith::mul_mod(x, u, m), w);
        }
        out
    }

    /// `A ∗ B`, i.e. `A(X)B(X) mod X^M − 1`.
    pub fn convolve(&self, other: &Multiset) -> Result<Multiset, Error> {
        self.check_same(other)?;
        let m = self.modulus;
        let mut out = Multiset {
            modulus: m,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            for (y, v) in other.iter() {
                out.add_weight((x + y) % m, w * v);
            }
        }
        Ok(out)
    }

    /// Induced weights on `Z_N`: `w^N(x) = Σ_{x' ≡ x (N)} w(x')`.
    pub fn reduce_mod(&self, n: u64) -> Result<Multiset, Error> {
        if n == 0 || !self.modulus.is_multiple_of(n) {
            return Err(Error::NotADivisor(n, self.modulus));
        }
        Ok(self.reduce_exponents(n))
    }

    /// Reduces the exponents of the representative polynomial over `[0, M)`
    /// modulo `n`, without requiring `n | M`.
    pub fn reduce_exponents(&self, n: u64) -> Multiset {
        let mut out = Multiset {
            modulus: n,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            out.add_weight(x % n, w);
        }
        out
    }

    /// The same weights seen inside `Z_{kM}` via `X^M − 1 | X^{kM} − 1`
    /// dividing out; residues stay put.
    pub fn lift(&self, new_modulus: u64) -> Result<Multiset, Error> {
        if !new_modulus.is_multiple_of(self.modulus) {
            return Err(Error::NotADivisor(self.modulus, new_modulus));
        }
        let mut out = Multiset::new(new_modulus)?;
        for (x, w) in self.iter() {
            out.add_weight(x, w);
        }
        Ok(out)
    }

    /// `A ∩ Λ`, keeping multiplicities.
    pub fn restrict_to_grid(&self, grid: &Grid) -> Result<Multiset, Error> {
        if grid.modulus != self.modulus {
            return Err(Error::ModulusMismatch(self.modulus, grid.modulus));
        }
        let mut out = Multiset {
            modulus: self.modulus,
            weights: BTreeMap::new(),
        };
        for (x, w) in self.iter() {
            if grid.contains(x) {
                out.add_weight(x, w);
            }
        }
        Ok(out)
    }

    /// For `A` supported in `Λ(c, p^β)`, the multiset `A'` over `Z_{M/p^β}`
    /// with `w_{A'}(x) = w_A(c + p^β x)`.
    pub fn rescale(&self, c: u64, p: u64, beta: u32) -> Result<Multiset, Error> {
        let step = p
            .checked_pow(beta)
            .ok_or_else(|| Error::InvalidArgument("p^β overflows".into()))?;
        if beta == 0 || !arith::is_prime(p) || !self.modulus.is_multiple_of(step) {
            return Err(Error::InvalidArgument(format!(
                "p^β = {p}^{beta} must be a nontrivial prime power dividing {}",
                self.modulus
            )));
        }
        let m2 = self.modulus / step;
        let c = c % step;
        let mut out = Multiset::new(m2)?;
        for (x, w) in self.iter() {
            if x % step != c {
                return Err(Error::Precondition(format!(
                    "residue {x} is not in the grid {c} + {step}Z"
                )));
            }
            out.add_weight((x - c) / step, w);
        }
        Ok(out)
    }

    /// Inverse of [`Multiset::rescale`]: `x ↦ c + p^β x` into `Z_{p^β M'}`.
    pub fn unrescale(&self, c: u64, step: u64) -> Result<Multiset, Error> {
        let m = self
            .modulus
            .checked_mul(step)
            .ok_or_else(|| Error::InvalidArgument("modulus overflows".into()))?;
        let mut out = Multiset::new(m)?;
        for (x, w) in self.iter() {
            out.add_weight(c + step * x, w);
        }
        Ok(out)
    }

    /// Dense coefficient vector of length `M` (small moduli only).
    pub fn to_dense(&self) -> Vec<i64> {
        let mut v = vec![0; self.modulus as usize];
        for (x, w) in self.iter() {
            v[x as usize] = w;
        }
        v
    }
}

/// A multiset with all weights positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct NonnegMultiset(Multiset);

impl NonnegMultiset {
    pub fn into_inner(self) -> Multiset {
        self.0
    }
}

impl TryFrom<Multiset> for NonnegMultiset {
    type Error = Error;

    fn try_from(a: Multiset) -> Result<Self, Error> {
        if a.is_nonnegative() {
            Ok(NonnegMultiset(a))
        } else {
            Err(Error::Precondition("multiset has a negative weight".into()))
        }
    }
}

impl<'de> Deserialize<'de> for NonnegMultiset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = Multiset::deserialize(d)?;
        NonnegMultiset::try_from(a).map_err(serde::de::Error::custom)
    }
}

impl Deref for NonnegMultiset {
    type Target = Multiset;

    fn deref(&self) -> &Multiset {
        &self.0
    }
}

impl AsRef<Multiset> for NonnegMultiset {
    fn as_ref(&self) -> &Multiset {
        &self.0
    }
}

/// `Λ^N(x, D) = x + DZ_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    modulus: u64,
    base: u64,
    step: u64,
}

impl Grid {
    pub fn new(modulus: u64, base: u64, step: u64) -> Result<Self, Error> {
        if step == 0 || !modulus.is_multiple_of(step) {
            return Err(Error::NotADivisor(step, modulus));
        }
        Ok(Grid {
            modulus,
            base: base % step,
            step,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn contains(&self, x: u64) -> bool {
        (x % self.modulus) % self.step == self.base
    }

    /// The `D` grids `Λ(0, D), …, Λ(D−1, D)` partitioning `Z_N`.
    pub fn partition(modulus: u64, step: u64) -> Result<Vec<Grid>, Error> {
        (0..step).map(|b| Grid::new(modulus, b, step)).collect()
    }
}
