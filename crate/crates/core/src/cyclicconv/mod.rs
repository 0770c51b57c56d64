//! Exact multidimensional cyclic convolution over the integers.
//!
//! `(g ⊙ h)(v) = Σ_{u + w ≡ v} g(u) h(w)` with addition taken modulo `r_i` on
//! axis `i`. Computed modulo several primes `p ≡ 1 (mod lcm(r))` by per-axis
//! transforms and recovered with a signed Chinese remainder step.

mod crt;
pub mod modarith;
mod primes;
mod transform;

use rayon::prelude::*;

pub use crt::{crt_combine, CrtBasis};
pub use primes::{find_primes, find_root, PrimePlan};
pub use transform::{forward, inverse, ModularTensor, DIRECT_DFT_MAX};

use crate::domain::{radix_product, VALUE_CAPACITY};
use crate::error::{arg, Error, Result};
use modarith::mul_mod;

/// Cyclic convolution of two residue tensors modulo their shared prime.
/// `roots[i]` must have order `radices[i]`.
pub fn cyclic_convolve_mod_p(g: &ModularTensor, h: &ModularTensor, roots: &[u64]) -> Result<ModularTensor> {
    if g.radices != h.radices {
        return arg("operands have different radices");
    }
    if g.modulus != h.modulus {
        return arg("operands use different moduli");
    }
    let p = g.modulus;
    let size = radix_product(&g.radices)?;
    if g.values.len() != size || h.values.len() != size {
        return arg("operand length does not match its radices");
    }
    if roots.len() != g.radices.len() {
        return Err(Error::Internal(format!(
            "{} roots supplied for {} axes",
            roots.len(),
            g.radices.len()
        )));
    }
    let mut a = g.values.clone();
    let mut b = h.values.clone();
    forward(&mut a, &g.radices, roots, p)?;
    forward(&mut b, &g.radices, roots, p)?;
    for (x, y) in a.iter_mut().zip(&b) {
        *x = mul_mod(*x, *y, p);
    }
    inverse(&mut a, &g.radices, roots, p)?;
    Ok(ModularTensor { radices: g.radices.clone(), modulus: p, values: a })
}

/// `∏r · Mg · Mh`, the largest possible magnitude of `g ⊙ h`.
pub fn default_bound(radices: &[usize], g: &[i128], h: &[i128]) -> Result<u128> {
    let size = radix_product(radices)? as u128;
    let mg = g.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let mh = h.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    size.checked_mul(mg)
        .and_then(|x| x.checked_mul(mh))
        .filter(|&b| b <= VALUE_CAPACITY)
        .ok_or_else(|| Error::Capacity("cyclic convolution bound exceeds 2^96".into()))
}

/// Exact `g ⊙ h`. `bound` must dominate every output magnitude (see
/// [`default_bound`]); a smaller bound yields wrong results.
pub fn cyclic_convolve(g: &[i128], h: &[i128], radices: &[usize], bound: u128) -> Result<Vec<i128>> {
    let size = radix_product(radices)?;
    if g.len() != size || h.len() != size {
        return arg(format!("operands must have ∏radices = {size} entries"));
    }
    if bound > VALUE_CAPACITY {
        return Err(Error::Capacity("bound exceeds 2^96".into()));
    }
    let plan = PrimePlan::cached(radices, bound)?;
    cyclic_convolve_with_plan(g, h, &plan)
}

pub fn cyclic_convolve_with_plan(g: &[i128], h: &[i128], plan: &PrimePlan) -> Result<Vec<i128>> {
    let radices = &plan.radices;
    let residues: Vec<Vec<u64>> = plan
        .primes
        .par_iter()
        .zip(&plan.roots)
        .map(|(&p, roots)| {
            let a = ModularTensor::from_signed(radices, g, p);
            let b = ModularTensor::from_signed(radices, h, p);
            cyclic_convolve_mod_p(&a, &b, roots).map(|t| t.values)
        })
        .collect::<Result<_>>()?;
    crt_combine(&residues, &plan.primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_cyclic_convolve;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mod_p_example() {
        let g = ModularTensor { radices: vec![2], modulus: 7, values: vec![1, 2] };
        let h = ModularTensor { radices: vec![2], modulus: 7, values: vec![3, 4] };
        let out = cyclic_convolve_mod_p(&g, &h, &[6]).unwrap();
        // 11 mod 7, 10 mod 7
        assert_eq!(out.values, vec![4, 3]);
        assert!(matches!(cyclic_convolve_mod_p(&g, &h, &[]), Err(Error::Internal(_))));
    }

    #[test]
    fn delta_is_identity_mod_p() {
        let radices = vec![3, 4];
        let p = 13;
        let roots = vec![find_root(p, 3).unwrap(), find_root(p, 4).unwrap()];
        let g = ModularTensor { radices: radices.clone(), modulus: p, values: (0..12).map(|i| (i * 5 + 1) % p).collect() };
        let mut delta = vec![0; 12];
        delta[0] = 1;
        let h = ModularTensor { radices, modulus: p, values: delta };
        assert_eq!(cyclic_convolve_mod_p(&g, &h, &roots).unwrap(), g);
    }

    #[test]
    fn mod_p_matches_naive_on_2x3() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let radices = [2, 3];
        let p = 13;
        let roots = vec![find_root(p, 2).unwrap(), find_root(p, 3).unwrap()];
        for _ in 0..20 {
            let g: Vec<i128> = (0..6).map(|_| rng.gen_range(0..13)).collect();
            let h: Vec<i128> = (0..6).map(|_| rng.gen_range(0..13)).collect();
            let expected: Vec<u64> =
                naive_cyclic_convolve(&g, &h, &radices).iter().map(|v| v.rem_euclid(13) as u64).collect();
            let a = ModularTensor::from_signed(&radices, &g, p);
            let b = ModularTensor::from_signed(&radices, &h, p);
            assert_eq!(cyclic_convolve_mod_p(&a, &b, &roots).unwrap().values, expected);
        }
    }

    #[test]
    fn exact_examples() {
        assert_eq!(cyclic_convolve(&[1, 2], &[3, 4], &[2], 100).unwrap(), vec![11, 10]);
        assert_eq!(cyclic_convolve(&[-7], &[6], &[1, 1, 1], 42).unwrap(), vec![-42]);
        assert_eq!(cyclic_convolve(&[5], &[9], &[], 45).unwrap(), vec![45]);
        let g = [3, -1, 0, 2, -5, 4];
        let h = [-2, 0, 1, 7, -3, 3];
        let bound = default_bound(&[2, 3], &g, &h).unwrap();
        assert_eq!(cyclic_convolve(&g, &h, &[2, 3], bound).unwrap(), naive_cyclic_convolve(&g, &h, &[2, 3]));
    }

    #[test]
    fn exact_matches_naive_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..60 {
            let axes = rng.gen_range(0..4);
            let radices: Vec<usize> = (0..axes).map(|_| rng.gen_range(1..7)).collect();
            let size: usize = radices.iter().product();
            if size > 256 {
                continue;
            }
            let g: Vec<i128> = (0..size).map(|_| rng.gen_range(-1000..=1000)).collect();
            let h: Vec<i128> = (0..size).map(|_| rng.gen_range(-1000..=1000)).collect();
            let bound = default_bound(&radices, &g, &h).unwrap();
            let got = cyclic_convolve(&g, &h, &radices, bound).unwrap();
            assert_eq!(got, naive_cyclic_convolve(&g, &h, &radices));
            // commutativity and scaling
            assert_eq!(cyclic_convolve(&h, &g, &radices, bound).unwrap(), got);
            let g3: Vec<i128> = g.iter().map(|x| 3 * x).collect();
            let scaled = cyclic_convolve(&g3, &h, &radices, 3 * bound).unwrap();
            assert_eq!(scaled, got.iter().map(|x| 3 * x).collect::<Vec<_>>());
        }
    }

    #[test]
    fn long_axis_uses_bluestein_path() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let radices = [67usize];
        let g: Vec<i128> = (0..67).map(|_| rng.gen_range(-50..=50)).collect();
        let h: Vec<i128> = (0..67).map(|_| rng.gen_range(-50..=50)).collect();
        let bound = default_bound(&radices, &g, &h).unwrap();
        assert_eq!(cyclic_convolve(&g, &h, &radices, bound).unwrap(), naive_cyclic_convolve(&g, &h, &radices));
    }

    #[test]
    fn shape_errors() {
        assert!(cyclic_convolve(&[1, 2, 3], &[1, 2], &[3], 10).is_err());
        assert!(matches!(cyclic_convolve(&[1], &[1], &[1], u128::MAX), Err(Error::Capacity(_))));
    }
}
