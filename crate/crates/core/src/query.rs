//! Single entries of `g ⊛_f h` as the trace of a product of four matrices.
//!
//! For even `n` split `v = v_high ‖ v_low` into halves. With
//! `W[w][x] = g(w‖x)`, `X[x][y] = [x ⊕_f y = v_low]`, `Y[y][z] = h(z‖y)` and
//! `Z[z][w] = [w ⊕_f z = v_high]`, `(g ⊛_f h)(v) = tr(W·X·Y·Z)`. Odd `n` is
//! reduced to `n + 1` by fixing the last coordinate.

use rayon::prelude::*;

use crate::domain::{convolution_bound, flatten, tensor_len, FunctionTable, TensorFunction};
use crate::error::{arg, Error, Result};

/// Dense row-major exact integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i128>,
}

const BLOCK: usize = 64;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    /// Classical product, blocked over the inner dimension.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return arg(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        if other.cols == 0 {
            return Ok(out);
        }
        out.data.par_chunks_mut(other.cols).enumerate().for_each(|(i, row)| {
            let lhs = &self.data[i * self.cols..(i + 1) * self.cols];
            for k0 in (0..self.cols).step_by(BLOCK) {
                for (k, &a) in lhs.iter().enumerate().skip(k0).take(BLOCK) {
                    if a == 0 {
                        continue;
                    }
                    let rhs = &other.data[k * other.cols..(k + 1) * other.cols];
                    for (o, &b) in row.iter_mut().zip(rhs) {
                        *o += a * b;
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn trace(&self) -> i128 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrices {
    pub w: Matrix,
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
}

impl TransitionMatrices {
    /// `tr((W·X)·(Y·Z))`.
    pub fn trace_of_product(&self) -> Result<i128> {
        let (wx, yz) = rayon::join(|| self.w.mul(&self.x), || self.y.mul(&self.z));
        Ok(wx?.mul(&yz?)?.trace())
    }
}

fn check(f: &FunctionTable, g: &TensorFunction, h: &TensorFunction, v: &[usize]) -> Result<usize> {
    if g.domain() != f.left() {
        return arg("g must be defined over L^n");
    }
    if h.domain() != f.right() {
        return arg("h must be defined over R^n");
    }
    if g.arity() != h.arity() {
        return arg(format!("arity mismatch: g has n = {}, h has n = {}", g.arity(), h.arity()));
    }
    if v.len() != g.arity() {
        return arg(format!("query vector has length {}, expected n = {}", v.len(), g.arity()));
    }
    if let Some(&t) = v.iter().find(|&&t| t >= f.target().len()) {
        return Err(Error::Index(format!("query entry {t} is not an index into T (|T| = {})", f.target().len())));
    }
    convolution_bound(f.left().len(), f.right().len(), g.arity(), g.max_abs(), h.max_abs())?;
    Ok(g.arity())
}

/// Appends a fixed coordinate: `g̃(u‖a) = [a = d_left]·g(u)`,
/// `h̃(w‖b) = [b = d_right]·h(w)`, `ṽ = v‖f(d_left, d_right)`.
pub fn pad_to_even(
    f: &FunctionTable,
    g: &TensorFunction,
    h: &TensorFunction,
    v: &[usize],
    d_left: usize,
    d_right: usize,
) -> Result<(TensorFunction, TensorFunction, Vec<usize>)> {
    let n = check(f, g, h, v)?;
    if n % 2 == 0 {
        return arg("padding applies to odd n only");
    }
    if d_left >= f.left().len() || d_right >= f.right().len() {
        return Err(Error::Index("padding element outside its domain".into()));
    }
    let extend = |t: &TensorFunction, d: usize| {
        let s = t.domain().len();
        let mut values = vec![0i128; t.values().len() * s];
        for (i, &x) in t.values().iter().enumerate() {
            values[i * s + d] = x;
        }
        TensorFunction::new(t.domain().clone(), n + 1, values)
    };
    let mut vt = v.to_vec();
    vt.push(f.get(d_left, d_right));
    Ok((extend(g, d_left)?, extend(h, d_right)?, vt))
}

/// `W`, `X`, `Y`, `Z` for even `n`.
pub fn build_transition_matrices(
    f: &FunctionTable,
    g: &TensorFunction,
    h: &TensorFunction,
    v: &[usize],
) -> Result<TransitionMatrices> {
    let n = check(f, g, h, v)?;
    if n % 2 != 0 {
        return arg("transition matrices need even n; pad first");
    }
    let half = n / 2;
    let (nl, nr) = (f.left().len(), f.right().len());
    let (dl, dr) = (tensor_len(nl, half)?, tensor_len(nr, half)?);
    let t = f.target().len();
    let (v_high, v_low) = v.split_at(half);
    let v_high = flatten(v_high, &vec![t; half])?;
    let v_low = flatten(v_low, &vec![t; half])?;

    let image = images(f, half)?;
    let indicator = |target: usize, rows: usize, cols: usize, left_first: bool| {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let (x, y) = if left_first { (i, j) } else { (j, i) };
                if image[x * dr + y] == target {
                    m.data[i * cols + j] = 1;
                }
            }
        }
        m
    };
    let w = Matrix { rows: dl, cols: dl, data: g.values().to_vec() };
    let x = indicator(v_low, dl, dr, true);
    // Y[y][z] = h(z‖y)
    let mut y = Matrix::zeros(dr, dr);
    for zi in 0..dr {
        for yi in 0..dr {
            y.data[yi * dr + zi] = h.values()[zi * dr + yi];
        }
    }
    let z = indicator(v_high, dr, dl, false);
    Ok(TransitionMatrices { w, x, y, z })
}

/// `image[x * |R|^k + y]` is the flat `T^k` index of `x ⊕_f y`.
fn images(f: &FunctionTable, k: usize) -> Result<Vec<usize>> {
    let (nl, nr, t) = (f.left().len(), f.right().len(), f.target().len());
    let dl = tensor_len(nl, k)?;
    let dr = tensor_len(nr, k)?;
    let mut out = vec![0usize; dl * dr];
    for x in 0..dl {
        for y in 0..dr {
            let (mut xs, mut ys, mut acc, mut scale) = (x, y, 0usize, 1usize);
            for _ in 0..k {
                acc += f.get(xs % nl, ys % nr) * scale;
                scale *= t;
                xs /= nl;
                ys /= nr;
            }
            out[x * dr + y] = acc;
        }
    }
    Ok(out)
}

/// `(g ⊛_f h)(v)`. Odd `n` is padded with the first element of each domain.
pub fn query(f: &FunctionTable, g: &TensorFunction, h: &TensorFunction, v: &[usize]) -> Result<i128> {
    query_with_padding(f, g, h, v, 0, 0)
}

/// Like [`query`] with an explicit padding pair for odd `n`.
pub fn query_with_padding(
    f: &FunctionTable,
    g: &TensorFunction,
    h: &TensorFunction,
    v: &[usize],
    d_left: usize,
    d_right: usize,
) -> Result<i128> {
    let n = check(f, g, h, v)?;
    if n % 2 == 1 {
        let (gt, ht, vt) = pad_to_even(f, g, h, v, d_left, d_right)?;
        return build_transition_matrices(f, &gt, &ht, &vt)?.trace_of_product();
    }
    build_transition_matrices(f, g, h, v)?.trace_of_product()
}
