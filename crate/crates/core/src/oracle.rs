//! Brute-force reference implementations.

use crate::domain::{convolution_bound, radix_product, tensor_len, FunctionTable, TensorFunction};
use crate::error::{arg, Error, Result};

/// Largest `|L|^n * |R|^n` the brute-force routines accept.
pub const ORACLE_PAIR_LIMIT: u128 = 100_000_000;

fn check_inputs(f: &FunctionTable, g: &TensorFunction, h: &TensorFunction) -> Result<usize> {
    if g.domain() != f.left() {
        return arg("g must be defined over L^n");
    }
    if h.domain() != f.right() {
        return arg("h must be defined over R^n");
    }
    if g.arity() != h.arity() {
        return arg(format!("arity mismatch: g has n = {}, h has n = {}", g.arity(), h.arity()));
    }
    let n = g.arity();
    let pairs = tensor_len(f.left().len(), n)? as u128 * tensor_len(f.right().len(), n)? as u128;
    if pairs > ORACLE_PAIR_LIMIT {
        return arg(format!("oracle refuses |L|^n·|R|^n = {pairs} > 10^8"));
    }
    convolution_bound(f.left().len(), f.right().len(), n, g.max_abs(), h.max_abs())?;
    Ok(n)
}

/// Flat `T^n` index of `u ⊕_f w` for every `w`, given `u`.
fn images_of(f: &FunctionTable, u: &[usize], n: usize) -> Vec<usize> {
    let (nr, nt) = (f.right().len(), f.target().len());
    let mut out = vec![0usize];
    for &a in u.iter().take(n) {
        let row = f.row(a);
        let mut next = Vec::with_capacity(out.len() * nr);
        for &base in &out {
            next.extend(row.iter().map(|&t| base * nt + t));
        }
        out = next;
    }
    out
}

/// `(g ⊛_f h)(v) = Σ_{u ⊕_f w = v} g(u) h(w)` by enumerating all pairs.
pub fn naive_convolve(f: &FunctionTable, g: &TensorFunction, h: &TensorFunction) -> Result<TensorFunction> {
    let n = check_inputs(f, g, h)?;
    let nl = f.left().len();
    let mut out = vec![0i128; tensor_len(f.target().len(), n)?];
    let mut u = vec![0usize; n];
    for &gu in g.values() {
        if gu != 0 {
            for (&v, &hw) in images_of(f, &u, n).iter().zip(h.values()) {
                out[v] += gu * hw;
            }
        }
        increment(&mut u, nl);
    }
    TensorFunction::new(f.target().clone(), n, out)
}

/// A single entry of `g ⊛_f h`. `v` holds indices into `T`.
pub fn naive_query(f: &FunctionTable, g: &TensorFunction, h: &TensorFunction, v: &[usize]) -> Result<i128> {
    let n = check_inputs(f, g, h)?;
    if v.len() != n {
        return arg("query vector length differs from arity");
    }
    if v.iter().any(|&t| t >= f.target().len()) {
        return Err(Error::Index("query vector entry outside T".into()));
    }
    let target = crate::domain::flatten(v, &vec![f.target().len(); n])?;
    let nl = f.left().len();
    let mut u = vec![0usize; n];
    let mut acc = 0i128;
    for &gu in g.values() {
        if gu != 0 {
            for (&img, &hw) in images_of(f, &u, n).iter().zip(h.values()) {
                if img == target {
                    acc += gu * hw;
                }
            }
        }
        increment(&mut u, nl);
    }
    Ok(acc)
}

/// `(g ⊙ h)(v) = Σ_{u + w ≡ v} g(u) h(w)` over `Z_r1 x ... x Z_rk`.
pub fn naive_cyclic_convolve(g: &[i128], h: &[i128], radices: &[usize]) -> Vec<i128> {
    let size = radix_product(radices).expect("radix product fits usize");
    assert!(g.len() == size && h.len() == size, "operands must have ∏radices entries");
    let mut out = vec![0i128; size];
    let mut u = vec![0usize; radices.len()];
    for &gu in g {
        let mut w = vec![0usize; radices.len()];
        for &hw in h {
            let mut idx = 0;
            for (i, &r) in radices.iter().enumerate() {
                idx = idx * r + (u[i] + w[i]) % r;
            }
            out[idx] += gu * hw;
            increment_mixed(&mut w, radices);
        }
        increment_mixed(&mut u, radices);
    }
    out
}

fn increment(digits: &mut [usize], radix: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}

fn increment_mixed(digits: &mut [usize], radices: &[usize]) {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d += 1;
        if *d < r {
            return;
        }
        *d = 0;
    }
}
