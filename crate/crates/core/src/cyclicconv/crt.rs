use super::modarith::{gcd, inv_mod, mul_mod, sub_mod};
use crate::error::{arg, Error, Result};

/// Precomputed Garner coefficients for a fixed list of pairwise coprime
/// moduli.
#[derive(Clone, Debug)]
pub struct CrtBasis {
    moduli: Vec<u64>,
    /// `inv[i] = (m_0 ... m_{i-1})^-1 mod m_i`.
    inv: Vec<u64>,
    product: u128,
}

impl CrtBasis {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return arg("CRT needs at least one modulus");
        }
        for (i, &a) in moduli.iter().enumerate() {
            if a < 2 {
                return arg(format!("modulus {a} must be at least 2"));
            }
            for &b in &moduli[..i] {
                if gcd(a, b) != 1 {
                    return arg(format!("moduli {b} and {a} are not coprime"));
                }
            }
        }
        let mut inv = Vec::with_capacity(moduli.len());
        let mut product: u128 = 1;
        for &m in moduli {
            let prefix_mod = (product % m as u128) as u64;
            inv.push(inv_mod(prefix_mod, m).expect("coprime moduli"));
            product = product
                .checked_mul(m as u128)
                .ok_or_else(|| Error::Capacity("modulus product overflows u128".into()))?;
        }
        Ok(Self { moduli: moduli.to_vec(), inv, product })
    }

    pub fn product(&self) -> u128 {
        self.product
    }

    /// The unique `s` in `[0, ∏m)` with `s ≡ residues[i] (mod m_i)`.
    pub fn combine(&self, residues: &[u64]) -> u128 {
        // mixed-radix digits c_i: s = c_0 + c_1 m_0 + c_2 m_0 m_1 + ...
        let mut s: u128 = 0;
        let mut prefix: u128 = 1;
        for (i, (&m, &a)) in self.moduli.iter().zip(residues).enumerate() {
            let s_mod = (s % m as u128) as u64;
            let c = mul_mod(sub_mod(a % m, s_mod, m), self.inv[i], m);
            s += prefix * c as u128;
            if i + 1 < self.moduli.len() {
                prefix *= m as u128;
            }
        }
        s
    }

    /// [`combine`](Self::combine) mapped into the symmetric range: values
    /// above `∏m / 2` become negative.
    pub fn combine_signed(&self, residues: &[u64]) -> i128 {
        let s = self.combine(residues);
        if s > self.product / 2 {
            -((self.product - s) as i128)
        } else {
            s as i128
        }
    }
}

/// Cell-wise signed CRT over one residue tensor per prime.
pub fn crt_combine(residues: &[Vec<u64>], primes: &[u64]) -> Result<Vec<i128>> {
    if residues.len() != primes.len() {
        return arg("one residue tensor per prime is required");
    }
    let basis = CrtBasis::new(primes)?;
    let len = residues[0].len();
    if residues.iter().any(|r| r.len() != len) {
        return arg("residue tensors differ in shape");
    }
    let mut cell = vec![0u64; primes.len()];
    Ok((0..len)
        .map(|i| {
            for (c, r) in cell.iter_mut().zip(residues) {
                *c = r[i];
            }
            basis.combine_signed(&cell)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(crt_combine(&[vec![4], vec![11]], &[7, 13]).unwrap(), vec![11]);
        assert_eq!(crt_combine(&[vec![0], vec![0]], &[7, 13]).unwrap(), vec![0]);
        // 90 ≡ 6 (mod 7), 90 ≡ 12 (mod 13), 90 > 91/2
        assert_eq!(crt_combine(&[vec![6], vec![12]], &[7, 13]).unwrap(), vec![-1]);
        assert!(matches!(crt_combine(&[vec![1], vec![1]], &[6, 9]), Err(Error::Argument(_))));
    }

    proptest! {
        #[test]
        fn signed_round_trip(x in any::<i64>()) {
            let primes = [1_000_003u64, 1_000_033, 1_000_037, 1_000_039];
            let basis = CrtBasis::new(&primes).unwrap();
            let half = (basis.product() / 2) as i128;
            let x = (x as i128) % (half - 1);
            let residues: Vec<u64> = primes.iter().map(|&p| x.rem_euclid(p as i128) as u64).collect();
            prop_assert_eq!(basis.combine_signed(&residues), x);
        }
    }
}
