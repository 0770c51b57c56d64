//! Cyclic minors, cyclic partitions, and their construction.
//!
//! A cyclic minor `(A, B, k)` is a rectangle of `f` on which `f` is addition
//! modulo `k` after relabeling. A cyclic partition covers every cell of
//! `L x R` by exactly one minor; its cost is the sum of the `k` values.

mod builder;
mod graph;

use std::fmt;

pub use builder::{
    build_partition, lemma_bound, partition_bound, piece_to_minors, two_row_decomposition,
    two_row_partition, PartitionOptions, RowPairing, SwapPolicy, TwoRowDecomposition,
};
pub use graph::{
    build_representation_graph, decompose_cycles, decompose_instars, decompose_outstars,
    decompose_pairs, nice_shape, weak_components, Edge, GraphPiece, PieceKind,
    RepresentationGraph,
};

use crate::domain::FunctionTable;
use crate::error::{arg, Error, Result};

/// A rectangle `A x B` of `f` together with relabelings witnessing that the
/// restriction is `k`-cyclic:
/// `f(a, b) = sigma_c[(sigma_a(a) + sigma_b(b)) mod k]`.
///
/// `a` and `b` hold domain indices; `sigma_a[i]` is the label of `a[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicMinor {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub k: usize,
    pub sigma_a: Vec<usize>,
    pub sigma_b: Vec<usize>,
    pub sigma_c: Vec<usize>,
}

impl CyclicMinor {
    /// Builds a minor and checks the k-cyclic identity on its full rectangle.
    pub fn new(
        f: &FunctionTable,
        a: Vec<(usize, usize)>,
        b: Vec<(usize, usize)>,
        sigma_c: Vec<usize>,
    ) -> Result<Self> {
        let minor = Self::from_parts(a, b, sigma_c);
        let problems = minor.check(f);
        match problems.into_iter().next() {
            None => Ok(minor),
            Some(v) => Err(Error::Internal(format!("invalid cyclic minor: {v}"))),
        }
    }

    /// Assembles a minor without checking it against any function. Pairs are
    /// sorted by domain index.
    pub fn from_parts(
        mut a: Vec<(usize, usize)>,
        mut b: Vec<(usize, usize)>,
        sigma_c: Vec<usize>,
    ) -> Self {
        a.sort_unstable();
        b.sort_unstable();
        let (a, sigma_a) = a.into_iter().unzip();
        let (b, sigma_b) = b.into_iter().unzip();
        Self { a, b, k: sigma_c.len(), sigma_a, sigma_b, sigma_c }
    }

    /// A minor on a single cell value: `k = 1`.
    pub fn constant(a: Vec<usize>, b: Vec<usize>, value: usize) -> Self {
        let a = a.into_iter().map(|x| (x, 0)).collect();
        let b = b.into_iter().map(|x| (x, 0)).collect();
        Self::from_parts(a, b, vec![value])
    }

    pub fn cell_count(&self) -> usize {
        self.a.len() * self.b.len()
    }

    /// `sigma_c[(sa + sb) mod k]`.
    #[inline]
    pub fn eval(&self, sa: usize, sb: usize) -> usize {
        self.sigma_c[(sa + sb) % self.k]
    }

    /// Swaps the roles of `A` and `B`; valid for the transposed function.
    pub fn transposed(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            k: self.k,
            sigma_a: self.sigma_b.clone(),
            sigma_b: self.sigma_a.clone(),
            sigma_c: self.sigma_c.clone(),
        }
    }

    fn check(&self, f: &FunctionTable) -> Vec<Violation> {
        self.check_indexed(f, 0)
    }

    fn check_indexed(&self, f: &FunctionTable, index: usize) -> Vec<Violation> {
        let bad = |reason: String| vec![Violation::Malformed { minor: index, reason }];
        if self.k == 0 || self.sigma_c.len() != self.k {
            return bad(format!("k = {} but sigmaC has {} entries", self.k, self.sigma_c.len()));
        }
        if self.a.is_empty() || self.b.is_empty() {
            return bad("A and B must be non-empty".into());
        }
        if self.sigma_a.len() != self.a.len() || self.sigma_b.len() != self.b.len() {
            return bad("relabeling maps must cover A and B".into());
        }
        if self.a.iter().any(|&x| x >= f.left().len()) || self.b.iter().any(|&x| x >= f.right().len())
        {
            return bad("A or B contains an index outside the domain".into());
        }
        if self.a.windows(2).any(|w| w[0] >= w[1]) || self.b.windows(2).any(|w| w[0] >= w[1]) {
            return bad("A and B must be sets of distinct, sorted indices".into());
        }
        if self.sigma_a.iter().chain(&self.sigma_b).any(|&s| s >= self.k) {
            return bad(format!("relabeling value outside Z_{}", self.k));
        }
        if self.sigma_c.iter().any(|&t| t >= f.target().len()) {
            return bad("sigmaC maps outside T".into());
        }
        let mut out = Vec::new();
        for (&x, &sx) in self.a.iter().zip(&self.sigma_a) {
            for (&y, &sy) in self.b.iter().zip(&self.sigma_b) {
                let got = self.eval(sx, sy);
                let expected = f.get(x, y);
                if got != expected {
                    out.push(Violation::Identity { minor: index, a: x, b: y, expected, got });
                }
            }
        }
        out
    }
}

/// A set of cyclic minors intended to cover `L x R` exactly once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CyclicPartition {
    pub minors: Vec<CyclicMinor>,
}

impl CyclicPartition {
    pub fn new(minors: Vec<CyclicMinor>) -> Self {
        Self { minors }
    }

    pub fn len(&self) -> usize {
        self.minors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minors.is_empty()
    }

    pub fn cost(&self) -> usize {
        partition_cost(self)
    }

    pub fn transposed(&self) -> Self {
        Self::new(self.minors.iter().map(CyclicMinor::transposed).collect())
    }

    /// Per-minor `k` values, in minor order.
    pub fn ks(&self) -> Vec<usize> {
        self.minors.iter().map(|m| m.k).collect()
    }
}

/// `Σ k_i`.
pub fn partition_cost(p: &CyclicPartition) -> usize {
    p.minors.iter().map(|m| m.k).sum()
}

/// One reason a partition is not a valid cyclic partition of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Malformed { minor: usize, reason: String },
    DuplicateCover { a: usize, b: usize, minors: (usize, usize) },
    Uncovered { a: usize, b: usize },
    Identity { minor: usize, a: usize, b: usize, expected: usize, got: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed { minor, reason } => write!(f, "minor {minor} malformed: {reason}"),
            Violation::DuplicateCover { a, b, minors } => write!(
                f,
                "duplicate cover at ({a},{b}) by minors {} and {}",
                minors.0, minors.1
            ),
            Violation::Uncovered { a, b } => write!(f, "cell ({a},{b}) is not covered"),
            Violation::Identity { minor, a, b, expected, got } => write!(
                f,
                "minor {minor} violates the cyclic identity at ({a},{b}): f = {expected}, relabeling gives {got}"
            ),
        }
    }
}

/// Checks exact cover of `L x R` and the relabeling identity of every minor.
/// Returns every violation found.
pub fn validate_partition(f: &FunctionTable, p: &CyclicPartition) -> std::result::Result<(), Vec<Violation>> {
    let (nl, nr) = (f.left().len(), f.right().len());
    let mut owner: Vec<Option<usize>> = vec![None; nl * nr];
    let mut out = Vec::new();
    for (i, m) in p.minors.iter().enumerate() {
        let problems = m.check_indexed(f, i);
        let malformed = problems.iter().any(|v| matches!(v, Violation::Malformed { .. }));
        out.extend(problems);
        if malformed {
            continue;
        }
        for &x in &m.a {
            for &y in &m.b {
                let cell = &mut owner[x * nr + y];
                match *cell {
                    Some(j) => out.push(Violation::DuplicateCover { a: x, b: y, minors: (j, i) }),
                    None => *cell = Some(i),
                }
            }
        }
    }
    for x in 0..nl {
        for y in 0..nr {
            if owner[x * nr + y].is_none() {
                out.push(Violation::Uncovered { a: x, b: y });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// For each `(a, b)`, the index of the minor covering it. Requires a valid
/// partition.
pub fn cover_map(f: &FunctionTable, p: &CyclicPartition) -> Result<Vec<usize>> {
    if let Err(v) = validate_partition(f, p) {
        return arg(format!("invalid partition: {}", v[0]));
    }
    let nr = f.right().len();
    let mut owner = vec![0; f.left().len() * nr];
    for (i, m) in p.minors.iter().enumerate() {
        for &x in &m.a {
            for &y in &m.b {
                owner[x * nr + y] = i;
            }
        }
    }
    Ok(owner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> FunctionTable {
        FunctionTable::from_fn(2, 2, 2, |a, b| a ^ b).unwrap()
    }

    fn xor_partition() -> CyclicPartition {
        let f = xor();
        CyclicPartition::new(vec![CyclicMinor::new(
            &f,
            vec![(0, 0), (1, 1)],
            vec![(0, 0), (1, 1)],
            vec![0, 1],
        )
        .unwrap()])
    }

    #[test]
    fn cost_examples() {
        assert_eq!(partition_cost(&CyclicPartition::default()), 0);
        assert_eq!(partition_cost(&xor_partition()), 2);
    }

    #[test]
    fn validate_accepts_xor() {
        assert_eq!(validate_partition(&xor(), &xor_partition()), Ok(()));
    }

    #[test]
    fn validate_reports_duplicate_cover() {
        let f = xor();
        let mut p = xor_partition();
        p.minors.push(CyclicMinor::constant(vec![0], vec![0], 0));
        let v = validate_partition(&f, &p).unwrap_err();
        assert_eq!(v, vec![Violation::DuplicateCover { a: 0, b: 0, minors: (0, 1) }]);
        assert!(v[0].to_string().starts_with("duplicate cover at (0,0)"));
    }

    #[test]
    fn validate_reports_corrupted_sigma_c() {
        let f = xor();
        let mut p = xor_partition();
        p.minors[0].sigma_c = vec![1, 1];
        let v = validate_partition(&f, &p).unwrap_err();
        // cells where f = 0: (0,0) and (1,1)
        assert_eq!(v.len(), 2);
        assert!(v.contains(&Violation::Identity { minor: 0, a: 0, b: 0, expected: 0, got: 1 }));
        assert!(v.contains(&Violation::Identity { minor: 0, a: 1, b: 1, expected: 0, got: 1 }));
    }

    #[test]
    fn validate_reports_uncovered_and_malformed() {
        let f = xor();
        let p = CyclicPartition::new(vec![
            CyclicMinor::constant(vec![0], vec![0], 0),
            CyclicMinor { a: vec![], b: vec![1], k: 1, sigma_a: vec![], sigma_b: vec![0], sigma_c: vec![1] },
        ]);
        let v = validate_partition(&f, &p).unwrap_err();
        assert!(v.iter().any(|x| matches!(x, Violation::Malformed { minor: 1, .. })));
        assert_eq!(v.iter().filter(|x| matches!(x, Violation::Uncovered { .. })).count(), 3);
    }

    #[test]
    fn minor_constructor_checks_identity() {
        let f = xor();
        assert!(CyclicMinor::new(&f, vec![(0, 0), (1, 0)], vec![(0, 0)], vec![0]).is_err());
        assert!(CyclicMinor::new(&f, vec![(0, 0), (1, 1)], vec![(0, 0)], vec![0, 1]).is_ok());
    }

    #[test]
    fn transposed_partition_is_valid_for_transposed_function() {
        let f = FunctionTable::from_fn(2, 3, 3, |a, b| (a + b) % 3).unwrap();
        let p = CyclicPartition::new(vec![CyclicMinor::new(
            &f,
            vec![(0, 0), (1, 1)],
            vec![(0, 0), (1, 1), (2, 2)],
            vec![0, 1, 2],
        )
        .unwrap()]);
        assert!(validate_partition(&f, &p).is_ok());
        assert!(validate_partition(&f.transpose(), &p.transposed()).is_ok());
    }
}
