//! The f-convolution algorithm over a cyclic partition.
//!
//! Both inputs are projected onto every type `p̄ ∈ [m]^n` by a layer-by-layer
//! dynamic program. Each pair of projections is cyclically convolved over
//! `Z_p̄ = Z_k(p̄1) x ... x Z_k(p̄n)` and the result is scattered into `T^n`
//! through the `sigma_c` relabelings.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cyclicconv::cyclic_convolve;
use crate::domain::{convolution_bound, tensor_len, FunctionTable, TensorFunction, VALUE_CAPACITY};
use crate::error::{arg, Error, Result};
use crate::partition::{validate_partition, CyclicPartition};

/// Minor index per coordinate.
pub type TypeVector = Vec<usize>;

/// Projections keyed by type. Each tensor lives over `Z_p̄` in row-major order.
pub type ProjectionTable = BTreeMap<TypeVector, Vec<i128>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Drop types whose projection is identically zero.
    pub skip_zero_types: bool,
    /// Corrupts one output cell. Used to exercise verification failures.
    #[doc(hidden)]
    pub inject_fault: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { skip_zero_types: true, inject_fault: false }
    }
}

/// Work actually performed by one [`convolve_with`] call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Types whose cyclic convolution was computed.
    pub types_convolved: usize,
    /// Types skipped because one projection vanished.
    pub types_skipped: u128,
    /// `Σ ∏ k` over the convolved types.
    pub work: u128,
    /// Total DP states written across all projection layers of both inputs.
    pub dp_states: u128,
}

/// `(element, label)` pairs per minor for one side of the partition.
fn side_maps(p: &CyclicPartition, side: Side) -> Vec<Vec<(usize, usize)>> {
    p.minors
        .iter()
        .map(|m| match side {
            Side::Left => m.a.iter().copied().zip(m.sigma_a.iter().copied()).collect(),
            Side::Right => m.b.iter().copied().zip(m.sigma_b.iter().copied()).collect(),
        })
        .collect()
}

/// All nonzero projections of `g` (all projections if `keep_zero`), along
/// with the number of DP states written.
fn project(g: &TensorFunction, p: &CyclicPartition, side: Side, keep_zero: bool) -> (ProjectionTable, u128) {
    let maps = side_maps(p, side);
    let ks = p.ks();
    let s = g.domain().len();
    let n = g.arity();
    let mut layer: Vec<(TypeVector, usize, Vec<i128>)> = vec![(Vec::new(), 1, g.values().to_vec())];
    let mut states = 0u128;
    for level in 0..n {
        let suffix = s.pow((n - level - 1) as u32);
        let mut next = Vec::new();
        for (prefix, zsize, old) in &layer {
            for (i, map) in maps.iter().enumerate() {
                let k = ks[i];
                let mut new = vec![0i128; zsize * k * suffix];
                for z in 0..*zsize {
                    for &(a, sigma) in map {
                        let src = &old[z * s * suffix + a * suffix..][..suffix];
                        let dst = &mut new[z * k * suffix + sigma * suffix..][..suffix];
                        for (d, &x) in dst.iter_mut().zip(src) {
                            *d += x;
                        }
                    }
                }
                states += new.len() as u128;
                if keep_zero || new.iter().any(|&x| x != 0) {
                    let mut key = prefix.clone();
                    key.push(i);
                    next.push((key, zsize * k, new));
                }
            }
        }
        layer = next;
    }
    (layer.into_iter().map(|(key, _, t)| (key, t)).collect(), states)
}

fn check_side(f: &FunctionTable, g: &TensorFunction, side: Side) -> Result<()> {
    let (dom, name) = match side {
        Side::Left => (f.left(), "L"),
        Side::Right => (f.right(), "R"),
    };
    if g.domain() != dom {
        return arg(format!("tensor domain does not match {name}"));
    }
    Ok(())
}

/// `g_p̄(q) = Σ_{u ∈ L_p̄, σ_p̄(u) = q} g(u)` for every type `p̄`.
/// Types with an identically zero projection are omitted.
pub fn project_all(f: &FunctionTable, g: &TensorFunction, p: &CyclicPartition, side: Side) -> Result<ProjectionTable> {
    check_side(f, g, side)?;
    Ok(project(g, p, side, false).0)
}

/// `Σ_{p̄ ∈ [m]^n} ∏ k_p̄i`, summed over compositions of `n` with
/// multinomial weights.
pub fn work_count(p: &CyclicPartition, n: usize) -> u128 {
    let ks: Vec<u128> = p.ks().into_iter().map(|k| k as u128).collect();
    // dp[j] = Σ over types of length j using the minors seen so far, where
    // each new minor contributes C(j, c) k^c for c copies.
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        binom[i][0] = 1;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
        }
    }
    let mut dp = vec![0u128; n + 1];
    dp[0] = 1;
    for &k in &ks {
        let mut next = vec![0u128; n + 1];
        for (j, &base) in dp.iter().enumerate() {
            if base == 0 {
                continue;
            }
            let mut power = 1u128;
            for c in 0..=n - j {
                next[j + c] += base * binom[j + c][c] * power;
                power *= k;
            }
        }
        dp = next;
    }
    dp[n]
}

/// [`work_count`] by explicit enumeration of all `m^n` types.
pub fn work_count_exhaustive(p: &CyclicPartition, n: usize) -> u128 {
    let ks = p.ks();
    let m = ks.len();
    if m == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    let mut total = 0u128;
    let mut t = vec![0usize; n];
    loop {
        total += t.iter().map(|&i| ks[i] as u128).product::<u128>();
        let mut pos = n;
        loop {
            if pos == 0 {
                return total;
            }
            pos -= 1;
            t[pos] += 1;
            if t[pos] < m {
                break;
            }
            t[pos] = 0;
        }
    }
}

/// Flat `T^n` offsets of `σ_p̄^T(q)` for every `q ∈ Z_p̄`.
fn scatter_offsets(p: &CyclicPartition, ty: &[usize], t: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for &i in ty {
        let sc = &p.minors[i].sigma_c;
        let mut next = Vec::with_capacity(out.len() * sc.len());
        for &base in &out {
            next.extend(sc.iter().map(|&c| base * t + c));
        }
        out = next;
    }
    out
}

struct Prepared {
    n: usize,
    gp: ProjectionTable,
    hp: ProjectionTable,
    states: u128,
    /// `|A_i|`, `|B_i|` per minor.
    sizes: Vec<(u128, u128)>,
    max_g: u128,
    max_h: u128,
}

fn prepare(
    f: &FunctionTable,
    p: &CyclicPartition,
    g: &TensorFunction,
    h: &TensorFunction,
    options: &EngineOptions,
) -> Result<Prepared> {
    check_side(f, g, Side::Left)?;
    check_side(f, h, Side::Right)?;
    if g.arity() != h.arity() {
        return arg(format!("arity mismatch: g has n = {}, h has n = {}", g.arity(), h.arity()));
    }
    if let Err(v) = validate_partition(f, p) {
        return arg(format!("invalid partition ({} violations): {}", v.len(), v[0]));
    }
    let n = g.arity();
    convolution_bound(f.left().len(), f.right().len(), n, g.max_abs(), h.max_abs())?;
    let keep = !options.skip_zero_types;
    let ((gp, sg), (hp, sh)) = rayon::join(|| project(g, p, Side::Left, keep), || project(h, p, Side::Right, keep));
    let sizes = p.minors.iter().map(|m| (m.a.len() as u128, m.b.len() as u128)).collect();
    Ok(Prepared { n, gp, hp, states: sg + sh, sizes, max_g: g.max_abs(), max_h: h.max_abs() })
}

/// `|L_p̄|·|R_p̄|·Mg·Mh`, or the bound from the projections themselves when
/// that is smaller.
fn type_bound(p: &Prepared, ty: &[usize]) -> Result<u128> {
    let (gq, hq) = (&p.gp[ty], &p.hp[ty]);
    let (la, rb) = ty.iter().fold((1u128, 1u128), |(x, y), &i| (x * p.sizes[i].0, y * p.sizes[i].1));
    let mg = gq.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let mh = hq.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let by_sets = la.checked_mul(rb).and_then(|x| x.checked_mul(p.max_g)).and_then(|x| x.checked_mul(p.max_h));
    let by_projections = (gq.len() as u128).checked_mul(mg).and_then(|x| x.checked_mul(mh));
    match (by_sets, by_projections) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
    .filter(|&b| b <= VALUE_CAPACITY)
    .ok_or_else(|| Error::Capacity("per-type convolution bound exceeds 2^96".into()))
}

fn type_product(p: &Prepared, parts: &CyclicPartition, ty: &[usize]) -> Result<Vec<i128>> {
    let radices = type_radices(parts, ty);
    cyclic_convolve(&p.gp[ty], &p.hp[ty], &radices, type_bound(p, ty)?)
}

/// For every type that [`convolve`] would process: its `Z_p̄` radices and
/// the value bound handed to the cyclic convolution.
pub fn type_plans(
    f: &FunctionTable,
    p: &CyclicPartition,
    g: &TensorFunction,
    h: &TensorFunction,
) -> Result<Vec<(TypeVector, Vec<usize>, u128)>> {
    let prep = prepare(f, p, g, h, &EngineOptions::default())?;
    prep.gp
        .keys()
        .filter(|ty| prep.hp.contains_key(*ty))
        .map(|ty| Ok((ty.clone(), type_radices(p, ty), type_bound(&prep, ty)?)))
        .collect()
}

/// `g ⊛_f h` using the default [`EngineOptions`].
pub fn convolve(f: &FunctionTable, p: &CyclicPartition, g: &TensorFunction, h: &TensorFunction) -> Result<TensorFunction> {
    convolve_with(f, p, g, h, &EngineOptions::default()).map(|(t, _)| t)
}

/// `g ⊛_f h` along with the work performed.
pub fn convolve_with(
    f: &FunctionTable,
    p: &CyclicPartition,
    g: &TensorFunction,
    h: &TensorFunction,
    options: &EngineOptions,
) -> Result<(TensorFunction, EngineStats)> {
    let prep = prepare(f, p, g, h, options)?;
    let t = f.target().len();
    let out_len = tensor_len(t, prep.n)?;
    let types: Vec<&TypeVector> = prep.gp.keys().filter(|ty| prep.hp.contains_key(*ty)).collect();
    let total_types = (p.len() as u128).pow(prep.n as u32);
    let work: u128 = types.iter().map(|ty| ty.iter().map(|&i| p.minors[i].k as u128).product::<u128>()).sum();
    let mut out = types
        .par_iter()
        .try_fold(
            || vec![0i128; out_len],
            |mut acc, ty| {
                let c = type_product(&prep, p, ty)?;
                for (&dst, &x) in scatter_offsets(p, ty, t).iter().zip(&c) {
                    acc[dst] += x;
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0i128; out_len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    if options.inject_fault {
        out[0] += 1;
    }
    let stats = EngineStats {
        types_convolved: types.len(),
        types_skipped: total_types - types.len() as u128,
        work,
        dp_states: prep.states,
    };
    Ok((TensorFunction::new(f.target().clone(), prep.n, out)?, stats))
}

/// The scattered contribution of every nonzero type, each a dense tensor over
/// `T^n`. Their sum is `g ⊛_f h`.
pub fn type_contributions(
    f: &FunctionTable,
    p: &CyclicPartition,
    g: &TensorFunction,
    h: &TensorFunction,
) -> Result<BTreeMap<TypeVector, TensorFunction>> {
    let prep = prepare(f, p, g, h, &EngineOptions::default())?;
    let t = f.target().len();
    let out_len = tensor_len(t, prep.n)?;
    let mut result = BTreeMap::new();
    for ty in prep.gp.keys().filter(|ty| prep.hp.contains_key(*ty)) {
        let c = type_product(&prep, p, ty)?;
        let mut dense = vec![0i128; out_len];
        for (&dst, &x) in scatter_offsets(p, ty, t).iter().zip(&c) {
            dense[dst] += x;
        }
        result.insert(ty.clone(), TensorFunction::new(f.target().clone(), prep.n, dense)?);
    }
    Ok(result)
}

/// `Z_p̄` radices of a type.
pub fn type_radices(p: &CyclicPartition, ty: &[usize]) -> Vec<usize> {
    ty.iter().map(|&i| p.minors[i].k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{unflatten, FiniteDomain};
    use crate::oracle::naive_convolve;
    use crate::partition::{build_partition, CyclicMinor, PartitionOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn numeric(size: usize) -> FiniteDomain {
        FiniteDomain::numeric(size).unwrap()
    }

    fn xor() -> FunctionTable {
        FunctionTable::from_fn(2, 2, 2, |a, b| a ^ b).unwrap()
    }

    fn xor_partition() -> CyclicPartition {
        let f = xor();
        CyclicPartition::new(vec![CyclicMinor::new(&f, vec![(0, 0), (1, 1)], vec![(0, 0), (1, 1)], vec![0, 1]).unwrap()])
    }

    fn random_tensor(rng: &mut ChaCha8Rng, size: usize, n: usize, m: i128) -> TensorFunction {
        let len = size.pow(n as u32);
        TensorFunction::new(numeric(size), n, (0..len).map(|_| rng.gen_range(-m..=m)).collect()).unwrap()
    }

    #[test]
    fn projection_single_coordinate() {
        let f = xor();
        let g = TensorFunction::new(numeric(2), 1, vec![5, 7]).unwrap();
        let proj = project_all(&f, &g, &xor_partition(), Side::Left).unwrap();
        assert_eq!(proj.len(), 1);
        assert_eq!(proj[&vec![0]], vec![5, 7]);
        let zero = TensorFunction::zeros(numeric(2), 3).unwrap();
        assert!(project_all(&f, &zero, &xor_partition(), Side::Left).unwrap().is_empty());
        assert!(project(&zero, &xor_partition(), Side::Left, true).0.values().all(|t| t.iter().all(|&x| x == 0)));
    }

    #[test]
    fn projection_matches_definition_for_and() {
        let f = FunctionTable::from_fn(2, 2, 2, |a, b| a & b).unwrap();
        let p = build_partition(&f, PartitionOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for side in [Side::Left, Side::Right] {
            let g = random_tensor(&mut rng, 2, 2, 9);
            let (proj, _) = project(&g, &p, side, true);
            let maps = side_maps(&p, side);
            for (ty, tensor) in &proj {
                let radices = type_radices(&p, ty);
                let mut expected = vec![0i128; tensor.len()];
                for (flat, &val) in g.values().iter().enumerate() {
                    let u = unflatten(flat, &[2, 2]).unwrap();
                    let labels: Option<Vec<usize>> = u
                        .iter()
                        .zip(ty)
                        .map(|(&x, &i)| maps[i].iter().find(|(a, _)| *a == x).map(|&(_, s)| s))
                        .collect();
                    if let Some(q) = labels {
                        expected[crate::domain::flatten(&q, &radices).unwrap()] += val;
                    }
                }
                assert_eq!(tensor, &expected, "type {ty:?}");
            }
        }
    }

    #[test]
    fn projection_mass_conservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let f = FunctionTable::from_fn(3, 3, 3, |_, _| 0).unwrap();
            let flat: Vec<usize> = (0..9).map(|_| rng.gen_range(0..3)).collect();
            let f = FunctionTable::square(3, &flat).unwrap_or(f);
            let p = build_partition(&f, PartitionOptions::default()).unwrap();
            let n = rng.gen_range(1..=3);
            let g = random_tensor(&mut rng, 3, n, 10);
            let (proj, _) = project(&g, &p, Side::Left, true);
            let maps = side_maps(&p, Side::Left);
            for (ty, tensor) in &proj {
                let mass: i128 = tensor.iter().sum();
                let direct: i128 = g
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(flat, _)| {
                        let u = unflatten(*flat, &vec![3; n]).unwrap();
                        u.iter().zip(ty).all(|(&x, &i)| maps[i].iter().any(|(a, _)| *a == x))
                    })
                    .map(|(_, &v)| v)
                    .sum();
                assert_eq!(mass, direct);
            }
        }
    }

    #[test]
    fn xor_ones() {
        let f = xor();
        let g = TensorFunction::new(numeric(2), 1, vec![1, 1]).unwrap();
        assert_eq!(convolve(&f, &xor_partition(), &g, &g).unwrap().values(), &[2, 2]);
    }

    #[test]
    fn delta_right_factor_scatters_g() {
        let f = FunctionTable::from_fn(3, 3, 4, |a, b| (a * 2 + b * b) % 4).unwrap();
        let p = build_partition(&f, PartitionOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random_tensor(&mut rng, 3, 2, 7);
        let w0 = [2usize, 1];
        let h = TensorFunction::from_entries(numeric(3), 2, [(w0.to_vec(), 1)]).unwrap();
        let out = convolve(&f, &p, &g, &h).unwrap();
        let mut expected = vec![0i128; 16];
        for (flat, &val) in g.values().iter().enumerate() {
            let u = unflatten(flat, &[3, 3]).unwrap();
            expected[f.get(u[0], w0[0]) * 4 + f.get(u[1], w0[1])] += val;
        }
        assert_eq!(out.values(), &expected[..]);
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let d = rng.gen_range(2..=3);
            let n = rng.gen_range(1..=3);
            let flat: Vec<usize> = (0..d * d).map(|_| rng.gen_range(0..d)).collect();
            let f = FunctionTable::square(d, &flat).unwrap();
            let p = build_partition(&f, PartitionOptions::default()).unwrap();
            let g = random_tensor(&mut rng, d, n, 5);
            let h = random_tensor(&mut rng, d, n, 5);
            let expected = naive_convolve(&f, &g, &h).unwrap();
            assert_eq!(convolve(&f, &p, &g, &h).unwrap(), expected);
            let keep = EngineOptions { skip_zero_types: false, ..Default::default() };
            let (unskipped, stats) = convolve_with(&f, &p, &g, &h, &keep).unwrap();
            assert_eq!(unskipped, expected);
            assert_eq!(stats.work, work_count(&p, n));
            let parts = type_contributions(&f, &p, &g, &h).unwrap();
            let mut sum = vec![0i128; expected.values().len()];
            for t in parts.values() {
                for (s, &x) in sum.iter_mut().zip(t.values()) {
                    *s += x;
                }
            }
            assert_eq!(sum, expected.values());
        }
    }

    #[test]
    fn rectangular_function() {
        let f = FunctionTable::from_fn(2, 3, 5, |a, b| (a + 2 * b) % 5).unwrap();
        let p = build_partition(&f, PartitionOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_tensor(&mut rng, 2, 3, 10);
        let h = random_tensor(&mut rng, 3, 3, 10);
        assert_eq!(convolve(&f, &p, &g, &h).unwrap(), naive_convolve(&f, &g, &h).unwrap());
    }

    #[test]
    fn work_count_identity() {
        let f = xor();
        assert_eq!(work_count(&xor_partition(), 5), 32);
        let and = FunctionTable::from_fn(2, 2, 2, |a, b| a & b).unwrap();
        let p = build_partition(&and, PartitionOptions::default()).unwrap();
        for n in 0..=6 {
            let c = p.cost() as u128;
            assert_eq!(work_count(&p, n), c.pow(n as u32));
            assert_eq!(work_count_exhaustive(&p, n), c.pow(n as u32));
        }
        let _ = f;
        // costs {3, 7, 4}
        let parts = CyclicPartition::new(
            [3usize, 7, 4].iter().map(|&k| CyclicMinor::from_parts(vec![(0, 0)], vec![(0, 0)], vec![0; k])).collect(),
        );
        for n in 0..=5 {
            assert_eq!(work_count(&parts, n), 14u128.pow(n as u32));
            assert_eq!(work_count_exhaustive(&parts, n), 14u128.pow(n as u32));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = xor();
        let g1 = TensorFunction::new(numeric(2), 1, vec![1, 1]).unwrap();
        let g2 = TensorFunction::new(numeric(2), 2, vec![1; 4]).unwrap();
        assert!(matches!(convolve(&f, &xor_partition(), &g1, &g2), Err(Error::Argument(_))));
        let empty = CyclicPartition::new(vec![]);
        assert!(matches!(convolve(&f, &empty, &g1, &g1), Err(Error::Argument(_))));
        let g3 = TensorFunction::new(numeric(3), 1, vec![1; 3]).unwrap();
        assert!(convolve(&f, &xor_partition(), &g3, &g1).is_err());
    }

    #[test]
    fn fault_injection_changes_output() {
        let f = xor();
        let g = TensorFunction::new(numeric(2), 1, vec![1, 1]).unwrap();
        let opts = EngineOptions { inject_fault: true, ..Default::default() };
        let (out, _) = convolve_with(&f, &xor_partition(), &g, &g, &opts).unwrap();
        assert_eq!(out.values(), &[3, 2]);
    }
}
