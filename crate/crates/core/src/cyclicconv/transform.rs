//! Multidimensional discrete Fourier transforms over prime fields.
//!
//! Each axis of length `r` is transformed with a given root of order `r`:
//! directly in `O(r^2)` for short axes, otherwise by Bluestein's reduction to a
//! power-of-two convolution computed modulo three fixed NTT primes.

use super::modarith::{add_mod, inv_mod, mul_mod, pow_mod, sub_mod};
use crate::error::{Error, Result};

/// Axes up to this length use the direct transform.
pub const DIRECT_DFT_MAX: usize = 64;

/// Residues of a tensor over `Z_r1 x ... x Z_rn` modulo a prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularTensor {
    pub radices: Vec<usize>,
    pub modulus: u64,
    pub values: Vec<u64>,
}

impl ModularTensor {
    pub fn from_signed(radices: &[usize], values: &[i128], modulus: u64) -> Self {
        let m = modulus as i128;
        let values = values.iter().map(|v| v.rem_euclid(m) as u64).collect();
        Self { radices: radices.to_vec(), modulus, values }
    }
}

/// Forward transform in place along every axis.
pub fn forward(values: &mut [u64], radices: &[usize], roots: &[u64], p: u64) -> Result<()> {
    forward_with_threshold(values, radices, roots, p, DIRECT_DFT_MAX)
}

/// Inverse of [`forward`], including the `(∏ r_i)^-1` scaling.
pub fn inverse(values: &mut [u64], radices: &[usize], roots: &[u64], p: u64) -> Result<()> {
    inverse_with_threshold(values, radices, roots, p, DIRECT_DFT_MAX)
}

pub(crate) fn forward_with_threshold(
    values: &mut [u64],
    radices: &[usize],
    roots: &[u64],
    p: u64,
    threshold: usize,
) -> Result<()> {
    if roots.len() != radices.len() {
        return Err(Error::Internal(format!(
            "{} roots supplied for {} axes",
            roots.len(),
            radices.len()
        )));
    }
    for (axis, &root) in roots.iter().enumerate() {
        transform_axis(values, radices, axis, root, p, threshold)?;
    }
    Ok(())
}

pub(crate) fn inverse_with_threshold(
    values: &mut [u64],
    radices: &[usize],
    roots: &[u64],
    p: u64,
    threshold: usize,
) -> Result<()> {
    let inv_roots: Vec<u64> = roots
        .iter()
        .map(|&w| inv_mod(w, p).ok_or_else(|| Error::Internal("root not invertible".into())))
        .collect::<Result<_>>()?;
    forward_with_threshold(values, radices, &inv_roots, p, threshold)?;
    let size = values.len() as u64 % p;
    let scale = inv_mod(size, p).ok_or_else(|| Error::Internal("tensor size divisible by modulus".into()))?;
    for v in values.iter_mut() {
        *v = mul_mod(*v, scale, p);
    }
    Ok(())
}

fn transform_axis(
    values: &mut [u64],
    radices: &[usize],
    axis: usize,
    omega: u64,
    p: u64,
    threshold: usize,
) -> Result<()> {
    let r = radices[axis];
    if r == 1 {
        return Ok(());
    }
    let inner: usize = radices[axis + 1..].iter().product();
    let outer = values.len() / (r * inner);
    if r == 2 {
        // the only root of order 2 is -1
        for o in 0..outer {
            let base = o * 2 * inner;
            for i in base..base + inner {
                let (a, b) = (values[i], values[i + inner]);
                values[i] = add_mod(a, b, p);
                values[i + inner] = sub_mod(a, b, p);
            }
        }
        return Ok(());
    }
    let mut line = vec![0u64; r];
    let mut out = vec![0u64; r];
    let bluestein = r > threshold && Bluestein::supports(r, p);
    let plan = if bluestein { Some(Bluestein::new(r, omega, p)) } else { None };
    let powers: Vec<u64> = if bluestein {
        Vec::new()
    } else {
        std::iter::successors(Some(1u64), |&x| Some(mul_mod(x, omega, p))).take(r).collect()
    };
    for o in 0..outer {
        let base = o * r * inner;
        for i in 0..inner {
            for (j, x) in line.iter_mut().enumerate() {
                *x = values[base + j * inner + i];
            }
            match &plan {
                Some(b) => out = b.apply(&line),
                None => direct_dft(&line, &powers, p, &mut out),
            }
            for (j, &x) in out.iter().enumerate() {
                values[base + j * inner + i] = x;
            }
        }
    }
    Ok(())
}

fn direct_dft(x: &[u64], powers: &[u64], p: u64, out: &mut [u64]) {
    let r = x.len();
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc: u128 = 0;
        let mut e = 0;
        for &xj in x {
            acc += xj as u128 * powers[e] as u128;
            if acc >= 1 << 126 {
                acc %= p as u128;
            }
            e += k;
            if e >= r {
                e -= r;
            }
        }
        *slot = (acc % p as u128) as u64;
    }
}

/// Length-`r` DFT through the identity `jk = T(j+k) - T(j) - T(k)` with
/// `T(x) = x(x-1)/2`, which needs only a root of order `r`:
/// `X_k = w^-T(k) Σ_j (x_j w^-T(j)) w^T(j+k)`.
struct Bluestein {
    r: usize,
    p: u64,
    /// `w^-T(j)` for `j < r`.
    down: Vec<u64>,
    /// `w^T(m)` for `m < 2r - 1`.
    up: Vec<u64>,
}

impl Bluestein {
    /// The exact linear convolution needs `r p^2` below the product of the
    /// three NTT primes.
    fn supports(r: usize, p: u64) -> bool {
        let lhs = (r as u128).checked_mul(p as u128).and_then(|x| x.checked_mul(p as u128));
        matches!(lhs, Some(x) if x < NTT_PRODUCT) && (3 * r).next_power_of_two() <= 1 << 23
    }

    fn new(r: usize, omega: u64, p: u64) -> Self {
        let tri = |x: usize| ((x * x.saturating_sub(1) / 2) % r) as u64;
        let inv = inv_mod(omega, p).expect("root is a unit");
        let down = (0..r).map(|j| pow_mod(inv, tri(j), p)).collect();
        let up = (0..2 * r - 1).map(|m| pow_mod(omega, tri(m), p)).collect();
        Self { r, p, down, up }
    }

    fn apply(&self, x: &[u64]) -> Vec<u64> {
        let r = self.r;
        let reversed: Vec<u64> = (0..r).map(|j| mul_mod(x[r - 1 - j], self.down[r - 1 - j], self.p)).collect();
        let conv = linear_convolution_mod(&reversed, &self.up, self.p);
        (0..r).map(|k| mul_mod(conv[r - 1 + k], self.down[k], self.p)).collect()
    }
}

const NTT_PRIMES: [u64; 3] = [998_244_353, 167_772_161, 469_762_049];
const NTT_PRODUCT: u128 = 998_244_353u128 * 167_772_161 * 469_762_049;

/// Exact linear convolution of residues modulo `p`, via three NTT primes and
/// Garner reconstruction.
fn linear_convolution_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let per_prime: Vec<Vec<u64>> = NTT_PRIMES
        .iter()
        .map(|&q| {
            let mut fa: Vec<u64> = a.iter().map(|x| x % q).chain(std::iter::repeat(0)).take(size).collect();
            let mut fb: Vec<u64> = b.iter().map(|x| x % q).chain(std::iter::repeat(0)).take(size).collect();
            ntt_pow2(&mut fa, q, false);
            ntt_pow2(&mut fb, q, false);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = mul_mod(*x, *y, q);
            }
            ntt_pow2(&mut fa, q, true);
            fa
        })
        .collect();
    let [q0, q1, q2] = NTT_PRIMES;
    let inv_q0_q1 = inv_mod(q0 % q1, q1).unwrap();
    let q01 = q0 as u128 * q1 as u128;
    let inv_q01_q2 = inv_mod((q01 % q2 as u128) as u64, q2).unwrap();
    (0..len)
        .map(|i| {
            let (a0, a1, a2) = (per_prime[0][i], per_prime[1][i], per_prime[2][i]);
            let c1 = mul_mod(sub_mod(a1, a0 % q1, q1), inv_q0_q1, q1);
            let x01 = a0 as u128 + q0 as u128 * c1 as u128;
            let c2 = mul_mod(sub_mod(a2, (x01 % q2 as u128) as u64, q2), inv_q01_q2, q2);
            let x = x01 + q01 * c2 as u128;
            (x % p as u128) as u64
        })
        .collect()
}

/// Iterative radix-2 NTT; `q` must have primitive root 3 and `2^k | q-1`.
fn ntt_pow2(a: &mut [u64], q: u64, invert: bool) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(3, (q - 1) / len as u64, q);
        if invert {
            w = inv_mod(w, q).unwrap();
        }
        for start in (0..n).step_by(len) {
            let mut wn = 1u64;
            for k in 0..len / 2 {
                let u = a[start + k];
                let v = mul_mod(a[start + k + len / 2], wn, q);
                a[start + k] = add_mod(u, v, q);
                a[start + k + len / 2] = sub_mod(u, v, q);
                wn = mul_mod(wn, w, q);
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = inv_mod(n as u64 % q, q).unwrap();
        for x in a.iter_mut() {
            *x = mul_mod(*x, inv_n, q);
        }
    }
}
