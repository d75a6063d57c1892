//! Cell enumeration and the closed-form counting functions.
//!
//! Cells are produced by brute force: every way of placing the labels on the
//! two vertices and splitting the rest into three ordered arc words is
//! generated and filtered through canonicalization, so duplicate detection is
//! built in.  The closed-form counts (binomial formulas for cyclic cells,
//! `n! * f(m) / aut` for full cells) act as independent cross-checks.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::DecoratedCell;
use crate::theta::{Classification, CyclicOrder, Decoration, Label, MarkedThetaType, ThetaError};

/// Which family of decorated cells to enumerate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CellClass {
    /// Cyclic cells inducing one fixed cyclic ordering.
    CyclicSigma(CyclicOrder),
    /// All cyclic cells, over every cyclic ordering.
    CyclicAll,
    /// Full theta cells only (all three arc interiors marked).
    Full,
    /// Cells in the closure of the full locus: types whose number of empty
    /// arcs does not exceed their number of marked vertices.
    FullClosure,
    /// Every decorated theta cell.
    All,
}

/// Largest multiplicity among the parts of a partition into three parts.
pub fn max_part_multiplicity(parts: (u32, u32, u32)) -> u32 {
    let (a, b, c) = parts;
    debug_assert!(a >= b && b >= c);
    if a == b && b == c {
        3
    } else if a == b || b == c {
        2
    } else {
        1
    }
}

/// Partitions of `n` into exactly three positive parts, descending.
pub fn partitions_into_three(n: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for k1 in n.div_ceil(3)..=n - 2 {
        let rest = n - k1;
        for k2 in rest.div_ceil(2)..=k1.min(rest - 1) {
            let k3 = rest - k2;
            if k3 >= 1 && k2 >= k3 {
                out.push((k1, k2, k3));
            }
        }
    }
    out
}

/// `f(n) = sum over partitions (k1,k2,k3) of n of 1 / alpha(k1,k2,k3)!`,
/// computed by brute-force partition enumeration in exact rationals.
pub fn partition_sum(n: i64) -> BigRational {
    if n < 3 {
        return BigRational::zero();
    }
    let mut total = BigRational::zero();
    for p in partitions_into_three(n as u32) {
        let alpha = max_part_multiplicity(p);
        let fact: u32 = (1..=alpha).product();
        total += BigRational::new(BigInt::one(), BigInt::from(fact));
    }
    total
}

/// The quadratic `n^2/12 - n/4 + 1/6`, an independent verifier for
/// [`partition_sum`] (they agree for all n >= 1).
pub fn partition_sum_closed_form(n: i64) -> BigRational {
    let n = BigRational::from(BigInt::from(n));
    let twelfth = BigRational::new(BigInt::one(), BigInt::from(12));
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let sixth = BigRational::new(BigInt::one(), BigInt::from(6));
    &n * &n * twelfth - n * quarter + sixth
}

/// Per-degree cell counts at a given `n`, split by class.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CellCensus {
    pub n: usize,
    /// Counts of cyclic cells for one cyclic ordering, by dimension
    /// (identical across orderings).
    pub cyclic_per_sigma: std::collections::BTreeMap<usize, usize>,
    /// Counts of full theta cells by dimension.
    pub full: std::collections::BTreeMap<usize, usize>,
    pub sigma_count: usize,
}

/// Closed-form count of cyclic cells of one ordering in each dimension:
/// `n(n+1)/2, n(n+1), n(n+1)/2 + n, n` in dimensions `n+2 .. n-1`.
pub fn cyclic_counts_closed_form(n: usize) -> std::collections::BTreeMap<usize, usize> {
    let mut m = std::collections::BTreeMap::new();
    m.insert(n + 2, n * (n + 1) / 2);
    m.insert(n + 1, n * (n + 1));
    m.insert(n, n * (n + 1) / 2 + n);
    m.insert(n - 1, n);
    m
}

/// Closed-form count of full theta cells: `n! f(n)/2, n! f(n-1), n! f(n-2)/2`
/// in dimensions `n+2, n+1, n`.
pub fn full_counts_closed_form(n: usize) -> std::collections::BTreeMap<usize, usize> {
    let factorial: BigInt = (1..=n as u64).product::<u64>().into();
    let count = |m: i64, halve: bool| -> usize {
        let mut c = BigRational::from(factorial.clone()) * partition_sum(m);
        if halve {
            c /= BigRational::from(BigInt::from(2));
        }
        assert!(c.is_integer(), "full cell count must be integral");
        let digits = c.to_integer().to_string();
        digits.parse().expect("count fits usize")
    };
    let mut out = std::collections::BTreeMap::new();
    out.insert(n + 2, count(n as i64, true));
    out.insert(n + 1, count(n as i64 - 1, false));
    out.insert(n, count(n as i64 - 2, true));
    out
}

/// Number of cyclic orderings of `1..=n`: `(n-1)!/2`.
pub fn sigma_count(n: usize) -> usize {
    (1..n as u64).product::<u64>() as usize / 2
}

fn keeps(class: &CellClass, ty: &MarkedThetaType) -> bool {
    match class {
        CellClass::All => true,
        CellClass::Full => ty.classify() == Classification::Full,
        CellClass::CyclicAll => matches!(ty.classify(), Classification::Cyclic(_)),
        CellClass::CyclicSigma(sigma) => match ty.classify() {
            Classification::Cyclic(s) => s == *sigma,
            Classification::Full => false,
        },
        CellClass::FullClosure => ty.empty_arc_count() <= ty.marked_vertex_count(),
    }
}

/// All distinct canonical marked theta types with `n` labels.
///
/// Generation is sharded over the vertex-mark choice and the leading arc
/// label; the merged output is sorted, so the result is deterministic
/// regardless of scheduling.
fn all_canonical_types(n: usize) -> Vec<MarkedThetaType> {
    let labels: Vec<Label> = (1..=n as Label).collect();
    // (mark at u, mark at v) choices, including None
    let mut mark_choices: Vec<[Option<Label>; 2]> = vec![[None, None]];
    for &a in &labels {
        mark_choices.push([Some(a), None]);
        mark_choices.push([None, Some(a)]);
        for &b in &labels {
            if a != b {
                mark_choices.push([Some(a), Some(b)]);
            }
        }
    }
    let shards: Vec<HashSet<MarkedThetaType>> = mark_choices
        .par_iter()
        .map(|marks| {
            let rest: Vec<Label> = labels
                .iter()
                .copied()
                .filter(|l| Some(*l) != marks[0] && Some(*l) != marks[1])
                .collect();
            let mut seen = HashSet::new();
            permutations(&rest, &mut |perm| {
                for i in 0..=perm.len() {
                    for j in i..=perm.len() {
                        let arcs = [
                            perm[..i].to_vec(),
                            perm[i..j].to_vec(),
                            perm[j..].to_vec(),
                        ];
                        if let Ok(ty) = MarkedThetaType::new(*marks, arcs) {
                            seen.insert(ty.canonicalize().0);
                        }
                    }
                }
            });
            seen
        })
        .collect();
    let mut merged: HashSet<MarkedThetaType> = HashSet::new();
    for shard in shards {
        merged.extend(shard);
    }
    let mut out: Vec<MarkedThetaType> = merged.into_iter().collect();
    out.sort();
    out
}

fn permutations(items: &[Label], visit: &mut impl FnMut(&[Label])) {
    let mut buf = items.to_vec();
    heap_permute(&mut buf, items.len(), visit);
}

fn heap_permute(buf: &mut Vec<Label>, k: usize, visit: &mut impl FnMut(&[Label])) {
    if k <= 1 {
        visit(buf);
        return;
    }
    for i in 0..k {
        heap_permute(buf, k - 1, visit);
        if k % 2 == 0 {
            buf.swap(i, k - 1);
        } else {
            buf.swap(0, k - 1);
        }
    }
}

/// The complete duplicate-free list of canonical decorated cells of the
/// requested class, sorted.  Types with a parallel pair contribute two cells
/// (decorations `<=` and `=`), automorphism-free types one.
pub fn enumerate_cells(n: usize, class: &CellClass) -> Result<Vec<DecoratedCell>, ThetaError> {
    if n < 4 {
        return Err(ThetaError::UnsupportedN(n));
    }
    if let CellClass::CyclicSigma(sigma) = class {
        assert_eq!(sigma.n(), n, "cyclic ordering size must match n");
    }
    let mut cells = Vec::new();
    for ty in all_canonical_types(n) {
        if !keeps(class, &ty) {
            continue;
        }
        if ty.has_parallel_pair() {
            cells.push(DecoratedCell::new(ty.clone(), Decoration::LessEq)?);
            cells.push(DecoratedCell::new(ty, Decoration::Equal)?);
        } else {
            cells.push(DecoratedCell::new(ty, Decoration::Trivial)?);
        }
    }
    cells.sort();
    Ok(cells)
}

/// Tally enumerated cells and check the per-ordering uniformity of the
/// cyclic counts.
pub fn census(n: usize) -> Result<CellCensus, ThetaError> {
    let cells = enumerate_cells(n, &CellClass::All)?;
    let mut cyclic_by_sigma: std::collections::BTreeMap<
        CyclicOrder,
        std::collections::BTreeMap<usize, usize>,
    > = Default::default();
    let mut full: std::collections::BTreeMap<usize, usize> = Default::default();
    for cell in &cells {
        match cell.ty().classify() {
            Classification::Full => {
                *full.entry(cell.dimension()).or_default() += 1;
            }
            Classification::Cyclic(sigma) => {
                *cyclic_by_sigma
                    .entry(sigma)
                    .or_default()
                    .entry(cell.dimension())
                    .or_default() += 1;
            }
        }
    }
    let expected_sigmas = sigma_count(n);
    assert_eq!(
        cyclic_by_sigma.len(),
        expected_sigmas,
        "every cyclic ordering must occur"
    );
    let per_sigma = cyclic_by_sigma.values().next().cloned().unwrap_or_default();
    for counts in cyclic_by_sigma.values() {
        assert_eq!(
            counts, &per_sigma,
            "cyclic cells must split evenly across orderings"
        );
    }
    Ok(CellCensus {
        n,
        cyclic_per_sigma: per_sigma,
        full,
        sigma_count: expected_sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn alpha_examples() {
        assert_eq!(max_part_multiplicity((4, 3, 3)), 2);
        assert_eq!(max_part_multiplicity((2, 2, 2)), 3);
        assert_eq!(max_part_multiplicity((5, 3, 1)), 1);
    }

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn partition_sum_small_values() {
        assert_eq!(partition_sum(2), rat(0, 1));
        assert_eq!(partition_sum(3), rat(1, 6));
        assert_eq!(partition_sum(4), rat(1, 2));
        assert_eq!(partition_sum(6), rat(5, 3));
        assert_eq!(partition_sum(7), rat(5, 2));
        assert_eq!(partition_sum(8), rat(7, 2));
    }

    #[test]
    fn partition_sum_matches_closed_form() {
        for n in 3..=50 {
            assert_eq!(
                partition_sum(n),
                partition_sum_closed_form(n),
                "mismatch at n = {n}"
            );
        }
    }

    #[test]
    fn twelfth_identity() {
        let half = rat(1, 2);
        for n in 4..=50i64 {
            let lhs = partition_sum(n) * &half - partition_sum(n - 1)
                + partition_sum(n - 2) * &half;
            assert_eq!(lhs, rat(1, 12), "identity fails at n = {n}");
        }
    }

    #[test]
    fn enumerate_rejects_small_n() {
        assert!(matches!(
            enumerate_cells(3, &CellClass::All),
            Err(ThetaError::UnsupportedN(3))
        ));
    }

    #[test]
    fn census_n4_matches_closed_forms() {
        let c = census(4).unwrap();
        assert_eq!(c.cyclic_per_sigma, cyclic_counts_closed_form(4));
        assert_eq!(c.full, full_counts_closed_form(4));
        assert_eq!(c.sigma_count, 3);
        // spec'd values: V-ranks (10, 20, 14, 4) per ordering, 6 top full cells
        assert_eq!(c.cyclic_per_sigma[&6], 10);
        assert_eq!(c.cyclic_per_sigma[&5], 20);
        assert_eq!(c.cyclic_per_sigma[&4], 14);
        assert_eq!(c.cyclic_per_sigma[&3], 4);
        assert_eq!(c.full[&6], 6);
        assert_eq!(c.full[&5], 4);
        assert_eq!(c.full.get(&4).copied().unwrap_or(0), 0);
    }

    #[test]
    fn census_n6_full_counts() {
        let c = census(6).unwrap();
        assert_eq!(c.full[&8], 600);
        assert_eq!(c.full[&7], 720);
        assert_eq!(c.full[&6], 180);
    }

    #[test]
    fn cyclic_all_n4_has_three_wedge_summands() {
        let cells = enumerate_cells(4, &CellClass::CyclicAll).unwrap();
        let sigmas: HashSet<_> = cells
            .iter()
            .map(|c| match c.ty().classify() {
                Classification::Cyclic(s) => s,
                Classification::Full => panic!("cyclic class leaked a full cell"),
            })
            .collect();
        assert_eq!(sigmas.len(), 3);
    }

    #[test]
    fn cyclic_sigma_n5_counts() {
        let sigma = CyclicOrder::from_cycle_word(&[1, 2, 3, 4, 5]);
        let cells = enumerate_cells(5, &CellClass::CyclicSigma(sigma)).unwrap();
        let count_dim = |d: usize| cells.iter().filter(|c| c.dimension() == d).count();
        assert_eq!(count_dim(7), 15);
        assert_eq!(count_dim(6), 30);
        assert_eq!(count_dim(5), 20);
        assert_eq!(count_dim(4), 5);
    }

    #[test]
    fn enumerated_cells_are_duplicate_free() {
        let cells = enumerate_cells(5, &CellClass::All).unwrap();
        let set: HashSet<_> = cells.iter().cloned().collect();
        assert_eq!(set.len(), cells.len());
    }

    #[test]
    fn full_closure_matches_taxonomy() {
        // closure cells: full forms plus cyclic forms with enough marked
        // vertices to absorb the empty arcs
        let cells = enumerate_cells(4, &CellClass::FullClosure).unwrap();
        for cell in &cells {
            let ty = cell.ty();
            assert!(ty.empty_arc_count() <= ty.marked_vertex_count());
        }
        let full = enumerate_cells(4, &CellClass::Full).unwrap();
        assert!(cells.len() > full.len());
    }
}
