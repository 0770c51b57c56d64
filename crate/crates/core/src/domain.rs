//! Labeled finite domains, function tables, mixed-radix indexing and dense
//! integer tensors.
//!
//! Every multi-index in the crate uses the same row-major convention:
//! coordinate 1 is the most significant digit.

use std::collections::HashMap;
use std::fmt;

use crate::error::{arg, Error, Result};

/// Largest guaranteed output magnitude any exact computation accepts.
///
/// Values are stored as `i128`; the multi-prime reconstruction needs the
/// product of its primes (each below 2^31) to stay inside `u128`, which holds
/// for every bound up to 2^96.
pub const VALUE_CAPACITY: u128 = 1 << 96;

/// An ordered set of distinct, non-empty labels. Element `i` has index `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteDomain {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl FiniteDomain {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return arg("a domain needs at least one element");
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return arg("domain labels must be non-empty");
            }
            if index.insert(l.clone(), i).is_some() {
                return arg(format!("duplicate domain label {l:?}"));
            }
        }
        Ok(Self { labels, index })
    }

    /// The domain `{"0", "1", ..., "size-1"}`.
    pub fn numeric(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.get(i).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

impl fmt::Debug for FiniteDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.labels).finish()
    }
}

/// An explicit table of `f : L x R -> T`. Rows are indexed by `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    left: FiniteDomain,
    right: FiniteDomain,
    target: FiniteDomain,
    table: Vec<usize>,
}

impl FunctionTable {
    pub fn new(
        left: FiniteDomain,
        right: FiniteDomain,
        target: FiniteDomain,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if rows.len() != left.len() {
            return arg(format!("table has {} rows, expected |L| = {}", rows.len(), left.len()));
        }
        let mut table = Vec::with_capacity(left.len() * right.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != right.len() {
                return arg(format!(
                    "table row {i} has {} columns, expected |R| = {}",
                    row.len(),
                    right.len()
                ));
            }
            for (j, &e) in row.iter().enumerate() {
                if e >= target.len() {
                    return Err(Error::Index(format!(
                        "table entry ({i},{j}) = {e} is not an index into T (|T| = {})",
                        target.len()
                    )));
                }
            }
            table.extend(row);
        }
        Ok(Self { left, right, target, table })
    }

    /// Builds a table over numeric domains of the given sizes.
    pub fn from_fn(
        left: usize,
        right: usize,
        target: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let rows = (0..left).map(|a| (0..right).map(|b| f(a, b)).collect()).collect();
        Self::new(
            FiniteDomain::numeric(left)?,
            FiniteDomain::numeric(right)?,
            FiniteDomain::numeric(target)?,
            rows,
        )
    }

    /// `f : D x D -> D` given as a flat row-major table.
    pub fn square(size: usize, flat: &[usize]) -> Result<Self> {
        if flat.len() != size * size {
            return arg("flat table length must be |D|^2");
        }
        Self::from_fn(size, size, size, |a, b| flat[a * size + b])
    }

    pub fn left(&self) -> &FiniteDomain {
        &self.left
    }

    pub fn right(&self) -> &FiniteDomain {
        &self.right
    }

    pub fn target(&self) -> &FiniteDomain {
        &self.target
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.table[a * self.right.len() + b]
    }

    pub fn row(&self, a: usize) -> &[usize] {
        let w = self.right.len();
        &self.table[a * w..(a + 1) * w]
    }

    /// `f'(r, l) = f(l, r)`.
    pub fn transpose(&self) -> Self {
        let rows = (0..self.right.len())
            .map(|b| (0..self.left.len()).map(|a| self.get(a, b)).collect())
            .collect();
        Self::new(self.right.clone(), self.left.clone(), self.target.clone(), rows)
            .expect("transpose of a valid table is valid")
    }
}

/// `u ⊕_f w`: applies `f` coordinate-wise.
pub fn apply_f_coordinatewise(f: &FunctionTable, u: &[usize], w: &[usize]) -> Result<Vec<usize>> {
    if u.len() != w.len() {
        return arg(format!("vector lengths differ: {} vs {}", u.len(), w.len()));
    }
    u.iter()
        .zip(w)
        .map(|(&a, &b)| {
            if a >= f.left().len() || b >= f.right().len() {
                Err(Error::Index(format!("pair ({a},{b}) outside L x R")))
            } else {
                Ok(f.get(a, b))
            }
        })
        .collect()
}

/// Row-major flat index of `digits` under `radices`.
pub fn flatten(digits: &[usize], radices: &[usize]) -> Result<usize> {
    if digits.len() != radices.len() {
        return arg("digit and radix vectors differ in length");
    }
    let mut flat = 0usize;
    for (i, (&d, &r)) in digits.iter().zip(radices).enumerate() {
        if d >= r {
            return Err(Error::Index(format!("digit {i} = {d} is not below radix {r}")));
        }
        flat = flat
            .checked_mul(r)
            .and_then(|x| x.checked_add(d))
            .ok_or_else(|| Error::Capacity("mixed-radix index overflows usize".into()))?;
    }
    Ok(flat)
}

/// Inverse of [`flatten`].
pub fn unflatten(mut flat: usize, radices: &[usize]) -> Result<Vec<usize>> {
    let total = radix_product(radices)?;
    if flat >= total {
        return Err(Error::Index(format!("flat index {flat} is not below {total}")));
    }
    let mut digits = vec![0; radices.len()];
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = flat % r;
        flat /= r;
    }
    Ok(digits)
}

/// `∏ radices`, failing on overflow or a zero radix.
pub fn radix_product(radices: &[usize]) -> Result<usize> {
    radices.iter().try_fold(1usize, |acc, &r| {
        if r == 0 {
            return arg("radices must be positive");
        }
        acc.checked_mul(r)
            .ok_or_else(|| Error::Capacity("radix product overflows usize".into()))
    })
}

/// `size^n` as a tensor length.
pub fn tensor_len(size: usize, n: usize) -> Result<usize> {
    let n32 = u32::try_from(n).map_err(|_| Error::Capacity("arity too large".into()))?;
    size.checked_pow(n32)
        .ok_or_else(|| Error::Capacity(format!("{size}^{n} overflows usize")))
}

/// A flat index paired with its radices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadixIndex {
    radices: Vec<usize>,
    flat: usize,
}

impl MixedRadixIndex {
    pub fn new(radices: Vec<usize>, flat: usize) -> Result<Self> {
        let total = radix_product(&radices)?;
        if flat >= total {
            return Err(Error::Index(format!("flat index {flat} is not below {total}")));
        }
        Ok(Self { radices, flat })
    }

    pub fn from_digits(digits: &[usize], radices: Vec<usize>) -> Result<Self> {
        let flat = flatten(digits, &radices)?;
        Ok(Self { radices, flat })
    }

    pub fn flat(&self) -> usize {
        self.flat
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn digits(&self) -> Vec<usize> {
        unflatten(self.flat, &self.radices).expect("flat < product by construction")
    }
}

/// A function `D^n -> Z` stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorFunction {
    domain: FiniteDomain,
    arity: usize,
    values: Vec<i128>,
    max_abs: u128,
}

impl TensorFunction {
    pub fn new(domain: FiniteDomain, arity: usize, values: Vec<i128>) -> Result<Self> {
        let expected = tensor_len(domain.len(), arity)?;
        if values.len() != expected {
            return arg(format!(
                "tensor has {} values, expected |D|^n = {}^{} = {expected}",
                values.len(),
                domain.len(),
                arity
            ));
        }
        let max_abs = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        Ok(Self { domain, arity, values, max_abs })
    }

    pub fn zeros(domain: FiniteDomain, arity: usize) -> Result<Self> {
        let len = tensor_len(domain.len(), arity)?;
        Self::new(domain, arity, vec![0; len])
    }

    /// Densifies `(coordinates, value)` entries; unmentioned cells are 0 and
    /// repeated coordinates accumulate.
    pub fn from_entries(
        domain: FiniteDomain,
        arity: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, i128)>,
    ) -> Result<Self> {
        let len = tensor_len(domain.len(), arity)?;
        let radices = vec![domain.len(); arity];
        let mut values = vec![0i128; len];
        for (coords, v) in entries {
            let i = flatten(&coords, &radices)?;
            values[i] = values[i]
                .checked_add(v)
                .ok_or_else(|| Error::Capacity("sparse entry sum overflows".into()))?;
        }
        Self::new(domain, arity, values)
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[i128] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i128> {
        self.values
    }

    /// Cached `max |value|`.
    pub fn max_abs(&self) -> u128 {
        self.max_abs
    }

    pub fn radices(&self) -> Vec<usize> {
        vec![self.domain.len(); self.arity]
    }

    pub fn get(&self, coords: &[usize]) -> Result<i128> {
        if coords.len() != self.arity {
            return arg("coordinate vector length differs from arity");
        }
        Ok(self.values[flatten(coords, &self.radices())?])
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs == 0
    }
}

/// `|L|^n * |R|^n * Mg * Mh`, the worst-case magnitude of any entry of
/// `g ⊛_f h`, checked against [`VALUE_CAPACITY`].
pub fn convolution_bound(
    left_len: usize,
    right_len: usize,
    n: usize,
    max_g: u128,
    max_h: u128,
) -> Result<u128> {
    let pairs = (tensor_len(left_len, n)? as u128).checked_mul(tensor_len(right_len, n)? as u128);
    let bound = pairs
        .and_then(|p| p.checked_mul(max_g))
        .and_then(|p| p.checked_mul(max_h))
        .filter(|&b| b <= VALUE_CAPACITY);
    bound.ok_or_else(|| {
        Error::Capacity(format!(
            "worst-case output |L|^n|R|^n·Mg·Mh exceeds 2^96 (|L|={left_len}, |R|={right_len}, n={n}, Mg={max_g}, Mh={max_h})"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xor() -> FunctionTable {
        FunctionTable::from_fn(2, 2, 2, |a, b| a ^ b).unwrap()
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten(&[0, 0, 0], &[4, 4, 4]).unwrap(), 0);
        assert_eq!(flatten(&[1, 2], &[3, 4]).unwrap(), 6);
        // 2·8 + 1·4 + 3
        assert_eq!(flatten(&[2, 1, 3], &[3, 2, 4]).unwrap(), 23);
        assert!(matches!(flatten(&[3], &[3]), Err(Error::Index(_))));
        assert!(unflatten(24, &[3, 2, 4]).is_err());
        assert_eq!(unflatten(23, &[3, 2, 4]).unwrap(), vec![2, 1, 3]);
        assert_eq!(flatten(&[], &[]).unwrap(), 0);
    }

    #[test]
    fn mixed_radix_index() {
        let m = MixedRadixIndex::from_digits(&[1, 2], vec![3, 4]).unwrap();
        assert_eq!(m.flat(), 6);
        assert_eq!(m.digits(), vec![1, 2]);
        assert!(MixedRadixIndex::new(vec![3, 4], 12).is_err());
    }

    #[test]
    fn coordinatewise_application() {
        let f = xor();
        assert_eq!(apply_f_coordinatewise(&f, &[0, 1], &[1, 1]).unwrap(), vec![1, 0]);
        assert_eq!(apply_f_coordinatewise(&f, &[], &[]).unwrap(), Vec::<usize>::new());
        assert!(apply_f_coordinatewise(&f, &[0], &[0, 1]).is_err());
        assert!(apply_f_coordinatewise(&f, &[2], &[0]).is_err());
    }

    #[test]
    fn coordinatewise_matches_table_lookup() {
        let table = [2, 0, 1, 1, 1, 0, 2, 2, 0];
        let f = FunctionTable::square(3, &table).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(apply_f_coordinatewise(&f, &[a], &[b]).unwrap(), vec![table[a * 3 + b]]);
            }
        }
    }

    #[test]
    fn domain_validation() {
        assert!(FiniteDomain::new(Vec::<String>::new()).is_err());
        assert!(FiniteDomain::new(["a", "a"]).is_err());
        assert!(FiniteDomain::new(["a", ""]).is_err());
        let d = FiniteDomain::new(["x", "y"]).unwrap();
        assert_eq!(d.index_of("y"), Some(1));
        assert_eq!(d.index_of("z"), None);
    }

    #[test]
    fn table_validation() {
        let d = FiniteDomain::numeric(2).unwrap();
        assert!(FunctionTable::new(d.clone(), d.clone(), d.clone(), vec![vec![0, 1]]).is_err());
        assert!(FunctionTable::new(d.clone(), d.clone(), d.clone(), vec![vec![0, 1], vec![0]]).is_err());
        assert!(matches!(
            FunctionTable::new(d.clone(), d.clone(), d, vec![vec![0, 2], vec![0, 1]]),
            Err(Error::Index(_))
        ));
    }

    #[test]
    fn tensor_construction() {
        let d = FiniteDomain::numeric(3).unwrap();
        assert!(TensorFunction::new(d.clone(), 2, vec![0; 8]).is_err());
        let t = TensorFunction::new(d.clone(), 2, (0..9).map(|v| v - 7).collect()).unwrap();
        assert_eq!(t.max_abs(), 7);
        assert_eq!(t.get(&[2, 2]).unwrap(), 1);
        let s = TensorFunction::from_entries(d.clone(), 2, vec![(vec![1, 0], 5), (vec![1, 0], -2)]).unwrap();
        assert_eq!(s.get(&[1, 0]).unwrap(), 3);
        assert_eq!(s.values().iter().filter(|&&v| v != 0).count(), 1);
        let z = TensorFunction::zeros(d, 0).unwrap();
        assert_eq!(z.values().len(), 1);
    }

    #[test]
    fn capacity_guard() {
        assert_eq!(convolution_bound(2, 2, 3, 5, 5).unwrap(), 64 * 25);
        assert!(matches!(convolution_bound(4, 4, 40, 1, 1), Err(Error::Capacity(_))));
    }

    proptest! {
        #[test]
        fn flatten_round_trip(radices in prop::collection::vec(1usize..12, 0..6), seed in any::<u64>()) {
            let total: usize = radices.iter().product();
            prop_assume!(total <= 1_000_000);
            let flat = (seed as usize) % total;
            let digits = unflatten(flat, &radices).unwrap();
            prop_assert!(digits.iter().zip(&radices).all(|(d, r)| d < r));
            prop_assert_eq!(flatten(&digits, &radices).unwrap(), flat);
        }

        #[test]
        fn tensor_length_matches_domain_power(size in 1usize..5, n in 0usize..5) {
            let t = TensorFunction::zeros(FiniteDomain::numeric(size).unwrap(), n).unwrap();
            prop_assert_eq!(t.values().len(), size.pow(n as u32));
        }
    }
}
