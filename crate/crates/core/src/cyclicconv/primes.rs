//! Prime selection and roots of unity for the multi-prime transform.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::modarith::{is_prime, lcm, pow_mod, prime_factors};
use crate::error::{arg, Error, Result};

/// Ascending primes `p ≡ 1 (mod root_modulus)` whose product exceeds
/// `2 * bound`, taken in order from the progression `1 + t * root_modulus`.
pub fn find_primes(root_modulus: u64, bound: u128) -> Result<Vec<u64>> {
    find_primes_from(root_modulus, bound, 0)
}

/// Like [`find_primes`] but skips candidates below `min_prime`.
pub fn find_primes_from(root_modulus: u64, bound: u128, min_prime: u64) -> Result<Vec<u64>> {
    if root_modulus == 0 {
        return arg("root modulus must be positive");
    }
    let target = bound
        .checked_mul(2)
        .ok_or_else(|| Error::Capacity("bound too large for prime planning".into()))?;
    let mut primes = Vec::new();
    let mut product: u128 = 1;
    let mut candidate: u64 = 1 + (min_prime.saturating_sub(1) / root_modulus) * root_modulus;
    if candidate >= min_prime && candidate > 1 && is_prime(candidate) {
        primes.push(candidate);
        product = candidate as u128;
    }
    while primes.is_empty() || product <= target {
        candidate = candidate
            .checked_add(root_modulus)
            .ok_or_else(|| Error::Capacity("prime search left the 64-bit range".into()))?;
        if is_prime(candidate) {
            primes.push(candidate);
            product = product
                .checked_mul(candidate as u128)
                .ok_or_else(|| Error::Capacity("prime product overflows u128".into()))?;
        }
    }
    Ok(primes)
}

/// An element of exact multiplicative order `r` modulo prime `p`.
///
/// Scans `x = 2, 3, ...` and tests `y = x^((p-1)/r)`, whose order always
/// divides `r`; the first `y` of exact order `r` is returned.
pub fn find_root(p: u64, r: u64) -> Result<u64> {
    if r == 0 || p < 2 || !(p - 1).is_multiple_of(r) {
        return arg(format!("no element of order {r} exists modulo {p}"));
    }
    if r == 1 {
        return Ok(1);
    }
    let factors = prime_factors(r);
    let cofactor = (p - 1) / r;
    for x in 2..p {
        let y = pow_mod(x, cofactor, p);
        if factors.iter().all(|&q| pow_mod(y, r / q, p) != 1) {
            return Ok(y);
        }
    }
    Err(Error::Internal(format!("no root of order {r} found modulo {p}; is it prime?")))
}

/// Convolution plans draw primes from `1 + t * lcm(radices)` starting here,
/// so that few primes cover large bounds while products still fit in `u64`.
pub const PLAN_MIN_PRIME: u64 = 1 << 30;

/// Primes and per-axis roots for exact cyclic convolution over given radices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePlan {
    pub radices: Vec<usize>,
    /// `lcm(radices)`; every prime is `1` modulo this.
    pub root_modulus: u64,
    pub primes: Vec<u64>,
    /// `roots[j][i]` has order `radices[i]` modulo `primes[j]`.
    pub roots: Vec<Vec<u64>>,
    /// Largest output magnitude the plan recovers exactly.
    pub bound: u128,
}

impl PrimePlan {
    pub fn new(radices: &[usize], bound: u128) -> Result<Self> {
        let mut root_modulus = 1u64;
        for &r in radices {
            if r == 0 {
                return arg("radices must be positive");
            }
            root_modulus = lcm(root_modulus, r as u64)
                .ok_or_else(|| Error::Capacity("lcm of radices overflows u64".into()))?;
        }
        let primes = find_primes_from(root_modulus, bound, PLAN_MIN_PRIME)?;
        let roots = primes
            .iter()
            .map(|&p| radices.iter().map(|&r| find_root(p, r as u64)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { radices: radices.to_vec(), root_modulus, primes, roots, bound })
    }

    /// Plans are memoized per radix vector with the bound rounded up to a
    /// power of two.
    pub fn cached(radices: &[usize], bound: u128) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(Vec<usize>, u32), Arc<PrimePlan>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let rounded = bound.max(1).checked_next_power_of_two().unwrap_or(bound);
        let key = (radices.to_vec(), rounded.trailing_zeros());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(plan) = cache.lock().expect("plan cache poisoned").get(&key) {
            return Ok(plan.clone());
        }
        let plan = Arc::new(Self::new(radices, rounded)?);
        cache.lock().expect("plan cache poisoned").insert(key, plan.clone());
        Ok(plan)
    }

    pub fn modulus_product(&self) -> u128 {
        self.primes.iter().map(|&p| p as u128).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_in_progressions() {
        assert_eq!(&find_primes(6, 10_000).unwrap()[..3], &[7, 13, 19]);
        assert_eq!(&find_primes(1, 1_000).unwrap()[..3], &[2, 3, 5]);
        // 5·13 = 65 < 200 < 5·13·17 = 1105
        assert_eq!(find_primes(4, 100).unwrap(), vec![5, 13, 17]);
        assert_eq!(find_primes(4, 0).unwrap(), vec![5]);
    }

    #[test]
    fn roots_have_exact_order() {
        // powers of 3 mod 7: 3 2 6 4 5 1
        assert_eq!(find_root(7, 6).unwrap(), 3);
        assert_eq!(find_root(7, 1).unwrap(), 1);
        let w = find_root(13, 4).unwrap();
        assert_eq!(pow_mod(w, 4, 13), 1);
        assert_ne!(pow_mod(w, 2, 13), 1);
        assert!(matches!(find_root(7, 4), Err(Error::Argument(_))));
    }

    #[test]
    fn exhaustive_orders_small_primes() {
        for p in [7u64, 13, 31, 37, 61, 97] {
            for r in 1..p {
                if (p - 1) % r != 0 {
                    continue;
                }
                let w = find_root(p, r).unwrap();
                let order = (1..=r).find(|&e| pow_mod(w, e, p) == 1).unwrap();
                assert_eq!(order, r, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn primes_from_offset() {
        let ps = find_primes_from(6, 1 << 40, 100).unwrap();
        assert_eq!(&ps[..3], &[103, 109, 127]);
        assert_eq!(find_primes_from(6, 3, 7).unwrap(), vec![7]);
    }

    #[test]
    fn plan_covers_bound() {
        let plan = PrimePlan::new(&[2, 3, 4], 1_000_000).unwrap();
        assert_eq!(plan.root_modulus, 12);
        assert!(plan.modulus_product() > 2_000_000);
        assert!(plan.primes.iter().all(|p| p % 12 == 1));
        let cached = PrimePlan::cached(&[2, 3, 4], 1_000_000).unwrap();
        assert!(cached.bound >= 1_000_000);
        assert!(cached.modulus_product() > 2 * cached.bound);
    }
}
