//! CW cells, orientation conventions, and boundary matrices.
//!
//! Every cell is a simplex whose vertices are edge indicators of the
//! underlying type (plus a midpoint vertex when a parallel pair is
//! decorated).  Boundary coefficients come from the facet analysis:
//!
//! - contracting a singleton edge hands the facet to the contracted type,
//!   with sign `(-1)^j` times the parity of the vertex correspondence,
//!   unless the contraction lands in the bridge locus (dropped) or creates
//!   a new parallel pair (the two identifications cancel, dropped);
//! - the small edge of a `<=` pair hitting zero, or both pair edges hitting
//!   zero on an `=` cell, lands in the bridge locus (dropped);
//! - equalizing a `<=` pair hands the facet to the `=` cell of the same type.
//!
//! Cyclic cells follow the reading-order conventions keyed to the oriented
//! cyclic ordering; full cells use a fixed arc-major convention that an
//! alternative seeded scheme can reshuffle (homology must not change, and
//! tests rebuild complexes under reshuffled conventions to prove it).

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, SparseIntMatrix};
use crate::theta::{
    Classification, ContractionOutcome, CyclicOrder, Decoration, EdgeId, Label, MarkedThetaType,
    ThetaError,
};

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cell {cell} is not canonical")]
    NotCanonical { cell: String },
    #[error("boundary coefficient {coeff} of magnitude >= 2 from {cell} to {target}")]
    UnexpectedCoefficient {
        cell: String,
        target: String,
        coeff: i64,
    },
    #[error("boundary target {target} of {cell} missing from the complex")]
    MissingTarget { cell: String, target: String },
    #[error("boundary-of-boundary is nonzero in degree {degree}")]
    BoundarySquareNonzero { degree: usize },
}

/// A vertex of the simplex attached to a decorated cell: the indicator of a
/// single edge, or the midpoint of the parallel pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SimplexVertex {
    Edge(EdgeId),
    PairMidpoint,
}

/// A canonical marked theta type together with a decoration: one CW cell.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DecoratedCell {
    ty: MarkedThetaType,
    decoration: Decoration,
}

impl DecoratedCell {
    /// Wraps a type and decoration, canonicalizing the type.  Types with a
    /// parallel pair carry `LessEq` or `Equal`; types without carry
    /// `Trivial`.
    pub fn new(ty: MarkedThetaType, decoration: Decoration) -> Result<Self, ThetaError> {
        if (decoration == Decoration::Trivial) == ty.has_parallel_pair() {
            return Err(ThetaError::DecorationWithoutPair(decoration));
        }
        let ty = ty.canonicalize().0;
        Ok(DecoratedCell { ty, decoration })
    }

    pub fn ty(&self) -> &MarkedThetaType {
        &self.ty
    }

    pub fn decoration(&self) -> Decoration {
        self.decoration
    }

    /// `dimension = |E| - 1 - #equal signs`.
    pub fn dimension(&self) -> usize {
        self.ty.edge_count() - 1 - (self.decoration == Decoration::Equal) as usize
    }
}

impl fmt::Display for DecoratedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ty, self.decoration)
    }
}

/// Orientation convention for full cells.  Cyclic cells always follow the
/// reading-order convention; the seeded scheme exists to demonstrate that
/// homology is independent of the choice made for full cells.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OrientationScheme {
    Standard,
    ShuffledFull(u64),
}

impl OrientationScheme {
    fn shuffle_seed(&self) -> Option<u64> {
        match self {
            OrientationScheme::Standard => None,
            OrientationScheme::ShuffledFull(seed) => Some(*seed),
        }
    }
}

/// How a cyclic cell is laid out relative to its oriented cyclic ordering.
struct CyclicLayout {
    /// Roles: `left` is the vertex the reading starts from.
    left_vertex: usize,
    top_arc: usize,
    bottom_arc: usize,
    middle_arc: usize,
}

fn arc_edges_from(ty: &MarkedThetaType, arc: usize, from_left: bool) -> Vec<EdgeId> {
    let k = ty.arc(arc).len() as u8;
    if from_left {
        (0..=k).map(|p| EdgeId::new(arc as u8, p)).collect()
    } else {
        (0..=k).rev().map(|p| EdgeId::new(arc as u8, p)).collect()
    }
}

/// The reading of the cycle starting at `left_vertex`, taking `first_arc`
/// outbound and the other cycle arc back.
fn cycle_reading(
    ty: &MarkedThetaType,
    left_vertex: usize,
    first_arc: usize,
    second_arc: usize,
) -> Vec<Label> {
    let mut word = Vec::with_capacity(ty.n());
    word.extend(ty.vertex_mark(left_vertex));
    let outbound = |arc: usize, out: &mut Vec<Label>| {
        if left_vertex == 0 {
            out.extend_from_slice(ty.arc(arc));
        } else {
            out.extend(ty.arc(arc).iter().rev());
        }
    };
    let inbound = |arc: usize, out: &mut Vec<Label>| {
        if left_vertex == 0 {
            out.extend(ty.arc(arc).iter().rev());
        } else {
            out.extend_from_slice(ty.arc(arc));
        }
    };
    outbound(first_arc, &mut word);
    word.extend(ty.vertex_mark(1 - left_vertex));
    inbound(second_arc, &mut word);
    word
}

/// Layout of a trivially decorated cyclic cell: the top arc is the longer
/// cycle arc read forward along the ordering; ties prefer a marked left
/// vertex, then the lexicographically smaller top word.
fn cyclic_layout(ty: &MarkedThetaType, sigma: &CyclicOrder) -> CyclicLayout {
    let nonempty: Vec<usize> = (0..3).filter(|&a| !ty.arc(a).is_empty()).collect();
    let middle_arc = (0..3).find(|&a| ty.arc(a).is_empty()).expect("cyclic cell");
    assert_eq!(nonempty.len(), 2, "trivial cyclic cell has one empty arc");
    let mut candidates = Vec::with_capacity(2);
    for left_vertex in 0..2usize {
        let (x, y) = (nonempty[0], nonempty[1]);
        let top = if sigma.is_forward(&cycle_reading(ty, left_vertex, x, y)) {
            (x, y)
        } else {
            debug_assert!(sigma.is_forward(&cycle_reading(ty, left_vertex, y, x)));
            (y, x)
        };
        let top_word: Vec<Label> = if left_vertex == 0 {
            ty.arc(top.0).to_vec()
        } else {
            ty.arc(top.0).iter().rev().copied().collect()
        };
        candidates.push((left_vertex, top.0, top.1, top_word));
    }
    let pick = |a: &(usize, usize, usize, Vec<Label>), b: &(usize, usize, usize, Vec<Label>)| {
        let (ka, kb) = (ty.arc(a.1).len(), ty.arc(b.1).len());
        if ka != kb {
            return ka > kb;
        }
        let (ma, mb) = (
            ty.vertex_mark(a.0).is_some(),
            ty.vertex_mark(b.0).is_some(),
        );
        if ma != mb {
            return ma;
        }
        a.3 < b.3
    };
    let best = if pick(&candidates[0], &candidates[1]) {
        &candidates[0]
    } else {
        &candidates[1]
    };
    CyclicLayout {
        left_vertex: best.0,
        top_arc: best.1,
        bottom_arc: best.2,
        middle_arc,
    }
}

/// For a decorated (paired) cell: the edges of the marked path, directed so
/// that the reading follows the ordering forward.
fn directed_path_edges(ty: &MarkedThetaType, sigma: &CyclicOrder) -> Vec<EdgeId> {
    let (p1, p2) = ty.parallel_pair().expect("decorated cell has a pair");
    let path = (0..3).find(|&a| a != p1 as usize && a != p2 as usize).unwrap();
    let mut word = Vec::with_capacity(ty.n());
    word.extend(ty.vertex_mark(0));
    word.extend_from_slice(ty.arc(path));
    word.extend(ty.vertex_mark(1));
    let from_left = sigma.is_forward(&word);
    if !from_left {
        word.reverse();
        debug_assert!(sigma.is_forward(&word));
    }
    arc_edges_from(ty, path, from_left)
}

fn fnv64_cell(cell: &DecoratedCell) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    eat(cell.decoration() as u8);
    for v in 0..2 {
        eat(cell.ty().vertex_mark(v).unwrap_or(0));
        eat(0xff);
    }
    for a in 0..3 {
        for &l in cell.ty().arc(a) {
            eat(l);
        }
        eat(0xfe);
    }
    h
}

/// The ordered simplex-vertex list fixing the cell's orientation.
pub fn simplex_vertices(cell: &DecoratedCell, scheme: OrientationScheme) -> Vec<SimplexVertex> {
    let ty = cell.ty();
    let verts = match (cell.decoration(), ty.classify()) {
        (Decoration::Trivial, Classification::Full) => {
            let mut v: Vec<SimplexVertex> = (0..3)
                .flat_map(|a| arc_edges_from(ty, a, true))
                .map(SimplexVertex::Edge)
                .collect();
            if let Some(seed) = scheme.shuffle_seed() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv64_cell(cell));
                v.shuffle(&mut rng);
            }
            v
        }
        (Decoration::Trivial, Classification::Cyclic(sigma)) => {
            let layout = cyclic_layout(ty, &sigma);
            let from_left = layout.left_vertex == 0;
            let mut v = Vec::with_capacity(ty.edge_count());
            v.extend(arc_edges_from(ty, layout.top_arc, from_left));
            v.push(EdgeId::new(layout.middle_arc as u8, 0));
            v.extend(arc_edges_from(ty, layout.bottom_arc, from_left));
            v.into_iter().map(SimplexVertex::Edge).collect()
        }
        (Decoration::LessEq, Classification::Cyclic(sigma)) => {
            let (_, p2) = ty.parallel_pair().expect("pair");
            let mut v = vec![
                SimplexVertex::Edge(EdgeId::new(p2, 0)),
                SimplexVertex::PairMidpoint,
            ];
            v.extend(directed_path_edges(ty, &sigma).into_iter().map(SimplexVertex::Edge));
            v
        }
        (Decoration::Equal, Classification::Cyclic(sigma)) => {
            let mut v = vec![SimplexVertex::PairMidpoint];
            v.extend(directed_path_edges(ty, &sigma).into_iter().map(SimplexVertex::Edge));
            v
        }
        (dec, Classification::Full) => {
            unreachable!("full cells cannot carry decoration {dec:?}")
        }
    };
    assert_eq!(verts.len(), cell.dimension() + 1);
    verts
}

fn permutation_sign(from: &[SimplexVertex], to: &[SimplexVertex]) -> i64 {
    assert_eq!(from.len(), to.len());
    let perm: Vec<usize> = from
        .iter()
        .map(|v| {
            to.iter()
                .position(|w| w == v)
                .expect("facet vertices must match the target cell")
        })
        .collect();
    let mut sign = 1i64;
    let mut visited = vec![false; perm.len()];
    for start in 0..perm.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0usize;
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn sign_pow(j: usize) -> i64 {
    if j % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The signed cellular boundary of one cell: canonical targets with
/// coefficients, repeated targets summed and zero sums dropped.  Every
/// surviving coefficient must be `+1` or `-1`.
pub fn boundary(
    cell: &DecoratedCell,
    scheme: OrientationScheme,
) -> Result<Vec<(DecoratedCell, i64)>, ComplexError> {
    let ty = cell.ty();
    let verts = simplex_vertices(cell, scheme);
    let pair = ty.parallel_pair();
    let mut acc: BTreeMap<DecoratedCell, i64> = BTreeMap::new();

    for (j, vertex) in verts.iter().enumerate() {
        match (*vertex, cell.decoration()) {
            // dropping the midpoint sets both pair edges to zero (equal cell)
            // or the small pair edge to zero (leq cell): bridge either way
            (SimplexVertex::PairMidpoint, _) => continue,
            (SimplexVertex::Edge(e), Decoration::LessEq) if e.arc == pair.unwrap().1 => {
                // dropping the large-edge indicator equalizes the pair
                let target = DecoratedCell {
                    ty: ty.clone(),
                    decoration: Decoration::Equal,
                };
                let inherited: Vec<SimplexVertex> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .collect();
                let sign =
                    sign_pow(j) * permutation_sign(&inherited, &simplex_vertices(&target, scheme));
                *acc.entry(target).or_insert(0) += sign;
            }
            (SimplexVertex::Edge(e), dec) => {
                let ContractionOutcome::Theta {
                    result,
                    parallel_pair_created,
                    edge_map,
                } = ty.contract(e)?
                else {
                    continue;
                };
                if parallel_pair_created {
                    // the facet folds onto the new pair cell twice with
                    // opposite orientations; net contribution is zero
                    continue;
                }
                let (canon, aut) = result.canonicalize();
                // transport the decoration: keep the stored pair order, i.e.
                // compose with the pair transposition when the symmetry
                // flips it
                let mut pair_flip: Option<(u8, u8)> = None;
                if dec != Decoration::Trivial {
                    let (_, p2) = pair.unwrap();
                    let (q1, q2) = canon.parallel_pair().expect("pair survives path moves");
                    if aut.map_edge(edge_map.map_edge(EdgeId::new(p2, 0))).arc != q2 {
                        pair_flip = Some((q1, q2));
                    }
                }
                let target = DecoratedCell {
                    ty: canon,
                    decoration: dec,
                };
                let inherited: Vec<SimplexVertex> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| match v {
                        SimplexVertex::PairMidpoint => SimplexVertex::PairMidpoint,
                        SimplexVertex::Edge(x) => {
                            let mut y = aut.map_edge(edge_map.map_edge(x));
                            if let Some((q1, q2)) = pair_flip {
                                if y.arc == q1 {
                                    y.arc = q2;
                                } else if y.arc == q2 {
                                    y.arc = q1;
                                }
                            }
                            SimplexVertex::Edge(y)
                        }
                    })
                    .collect();
                let sign =
                    sign_pow(j) * permutation_sign(&inherited, &simplex_vertices(&target, scheme));
                *acc.entry(target).or_insert(0) += sign;
            }
        }
    }

    let mut out = Vec::new();
    for (target, coeff) in acc {
        if coeff == 0 {
            continue;
        }
        if coeff.abs() > 1 {
            return Err(ComplexError::UnexpectedCoefficient {
                cell: cell.to_string(),
                target: target.to_string(),
                coeff,
            });
        }
        out.push((target, coeff));
    }
    Ok(out)
}

/// Which chain complex to assemble.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Variant {
    /// All decorated theta cells; boundary terms landing on the collapsed
    /// bridge point are dropped.
    FullDelta,
    /// Cyclic cells of one fixed ordering.
    CyclicSigma(CyclicOrder),
    /// All cyclic cells (the wedge over all orderings).
    CyclicAll,
    /// Full theta cells only, with cyclic boundary targets dropped
    /// (the relative complex of the full locus modulo its cyclic part).
    FullRelCyclic,
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::FullDelta => "full-delta".into(),
            Variant::CyclicSigma(s) => format!("cyclic-sigma{s}"),
            Variant::CyclicAll => "cyclic-all".into(),
            Variant::FullRelCyclic => "full-rel-cyclic".into(),
        }
    }
}

/// Graded cell lists with sparse integer boundary maps between consecutive
/// degrees.
pub struct ChainComplex {
    n: usize,
    variant: Variant,
    degrees: Vec<usize>,
    cells: BTreeMap<usize, Vec<DecoratedCell>>,
    /// `boundaries[d]` is the map from degree-`d` chains to degree-`d-1`
    /// chains; rows index the lower cells, columns the upper ones.
    boundaries: BTreeMap<usize, SparseIntMatrix>,
}

impl ChainComplex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Degrees carrying cells, ascending (lower degrees of the ambient
    /// complex are a single collapsed point and stay implicit).
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn cells(&self, degree: usize) -> &[DecoratedCell] {
        self.cells.get(&degree).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cell_count(&self, degree: usize) -> usize {
        self.cells(degree).len()
    }

    pub fn boundary_matrix(&self, degree: usize) -> Option<&SparseIntMatrix> {
        self.boundaries.get(&degree)
    }

    /// Verify `boundary . boundary = 0` in every degree.
    pub fn check_boundary_squares(&self) -> Result<(), ComplexError> {
        for d in &self.degrees {
            let (Some(upper), Some(lower)) =
                (self.boundaries.get(d), self.boundaries.get(&(d - 1)))
            else {
                continue;
            };
            if lower.rows() == 0 {
                continue;
            }
            if !lower.multiply(upper).is_zero() {
                return Err(ComplexError::BoundarySquareNonzero { degree: *d });
            }
        }
        Ok(())
    }
}

/// Assemble the requested complex at `n >= 4`, verifying the chain-complex
/// axiom along the way.
pub fn build_complex(
    n: usize,
    variant: Variant,
    scheme: OrientationScheme,
) -> Result<ChainComplex, ComplexError> {
    use crate::enumeration::{enumerate_cells, CellClass};
    let class = match &variant {
        Variant::FullDelta => CellClass::All,
        Variant::CyclicSigma(s) => CellClass::CyclicSigma(s.clone()),
        Variant::CyclicAll => CellClass::CyclicAll,
        Variant::FullRelCyclic => CellClass::Full,
    };
    let all = enumerate_cells(n, &class)?;
    let degree_range: Vec<usize> = match variant {
        Variant::FullRelCyclic => (n..=n + 2).collect(),
        _ => (n - 1..=n + 2).collect(),
    };
    let mut cells: BTreeMap<usize, Vec<DecoratedCell>> = BTreeMap::new();
    for d in &degree_range {
        cells.insert(*d, Vec::new());
    }
    for cell in all {
        cells
            .get_mut(&cell.dimension())
            .expect("cell dimension within the variant's range")
            .push(cell);
    }
    // enumerate_cells returns sorted output, and grouping preserves order
    let index: BTreeMap<usize, BTreeMap<&DecoratedCell, u32>> = cells
        .iter()
        .map(|(d, list)| {
            (
                *d,
                list.iter()
                    .enumerate()
                    .map(|(i, c)| (c, i as u32))
                    .collect(),
            )
        })
        .collect();
    let mut boundaries = BTreeMap::new();
    for d in &degree_range {
        let columns = &cells[d];
        let rows = cells.get(&(d - 1)).map(Vec::len).unwrap_or(0);
        let mut entries = Vec::new();
        for (col, cell) in columns.iter().enumerate() {
            for (target, coeff) in boundary(cell, scheme)? {
                if matches!(variant, Variant::FullRelCyclic)
                    && matches!(target.ty().classify(), Classification::Cyclic(_))
                {
                    continue;
                }
                let Some(row) = index
                    .get(&(d - 1))
                    .and_then(|m| m.get(&target))
                    .copied()
                else {
                    return Err(ComplexError::MissingTarget {
                        cell: cell.to_string(),
                        target: target.to_string(),
                    });
                };
                entries.push((row, col as u32, coeff));
            }
        }
        boundaries.insert(*d, SparseIntMatrix::from_triplets(rows, columns.len(), entries)?);
    }
    let complex = ChainComplex {
        n,
        variant,
        degrees: degree_range,
        cells,
        boundaries,
    };
    complex.check_boundary_squares()?;
    Ok(complex)
}

/// Serializable record for the cell-list export.
#[derive(Serialize)]
pub struct CellRecord {
    pub degree: usize,
    pub form: [u8; 5],
    pub arcs: [Vec<Label>; 3],
    pub vertex_marks: [Option<Label>; 2],
    pub decoration: Decoration,
}

impl From<&DecoratedCell> for CellRecord {
    fn from(cell: &DecoratedCell) -> Self {
        let ty = cell.ty();
        let (e1, e2, ks) = ty.form();
        CellRecord {
            degree: cell.dimension(),
            form: [e1, e2, ks[0], ks[1], ks[2]],
            arcs: [
                ty.arc(0).to_vec(),
                ty.arc(1).to_vec(),
                ty.arc(2).to_vec(),
            ],
            vertex_marks: [ty.vertex_mark(0), ty.vertex_mark(1)],
            decoration: cell.decoration(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::MarkedThetaType;

    fn ty(vm: [Option<Label>; 2], arcs: [&[Label]; 3]) -> MarkedThetaType {
        MarkedThetaType::new(vm, [arcs[0].to_vec(), arcs[1].to_vec(), arcs[2].to_vec()])
            .expect("valid type")
    }

    fn cell(vm: [Option<Label>; 2], arcs: [&[Label]; 3], dec: Decoration) -> DecoratedCell {
        DecoratedCell::new(ty(vm, arcs), dec).unwrap()
    }

    #[test]
    fn dimensions_follow_the_edge_count() {
        let top = cell([None, None], [&[1, 2, 3], &[4], &[]], Decoration::Trivial);
        assert_eq!(top.dimension(), 6); // |E| = 7
        let leq = cell([None, None], [&[1, 2, 3, 4], &[], &[]], Decoration::LessEq);
        assert_eq!(leq.dimension(), 6);
        let eq = cell([None, None], [&[1, 2, 3, 4], &[], &[]], Decoration::Equal);
        assert_eq!(eq.dimension(), 5);
    }

    #[test]
    fn equal_cell_vertices_lead_with_the_midpoint() {
        let eq = cell([None, None], [&[1, 2, 3, 4], &[], &[]], Decoration::Equal);
        let verts = simplex_vertices(&eq, OrientationScheme::Standard);
        assert_eq!(verts[0], SimplexVertex::PairMidpoint);
        assert_eq!(verts.len(), 6);
        assert!(verts[1..].iter().all(|v| matches!(v, SimplexVertex::Edge(e) if e.arc == 0)));
    }

    #[test]
    fn leq_cell_vertices_lead_with_the_large_edge() {
        let leq = cell([None, None], [&[1, 2, 3, 4], &[], &[]], Decoration::LessEq);
        let verts = simplex_vertices(&leq, OrientationScheme::Standard);
        assert_eq!(verts[0], SimplexVertex::Edge(EdgeId::new(2, 0)));
        assert_eq!(verts[1], SimplexVertex::PairMidpoint);
    }

    #[test]
    fn trivial_cell_vertices_are_its_edge_indicators() {
        let c = cell([None, None], [&[1, 2, 3], &[4], &[]], Decoration::Trivial);
        let verts = simplex_vertices(&c, OrientationScheme::Standard);
        assert_eq!(verts.len(), 7);
        // reading order: top arc, middle (empty) arc, bottom arc
        assert_eq!(
            verts[0..4]
                .iter()
                .map(|v| match v {
                    SimplexVertex::Edge(e) => e.arc,
                    _ => 99,
                })
                .collect::<Vec<_>>(),
            vec![0, 0, 0, 0]
        );
        assert_eq!(verts[4], SimplexVertex::Edge(EdgeId::new(2, 0)));
    }

    #[test]
    fn leq_boundary_contains_the_equal_cell_with_unit_sign() {
        let leq = cell(
            [Some(1), Some(4)],
            [&[2, 3], &[], &[]],
            Decoration::LessEq,
        );
        let terms = boundary(&leq, OrientationScheme::Standard).unwrap();
        // both vertices marked: every path contraction repeats a marking,
        // so the equal cell is the only term
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0.decoration(), Decoration::Equal);
        assert_eq!(terms[0].0.ty(), leq.ty());
        assert_eq!(terms[0].1, 1);
    }

    #[test]
    fn bottom_cells_have_empty_boundary() {
        let eq = cell(
            [Some(1), Some(4)],
            [&[2, 3], &[], &[]],
            Decoration::Equal,
        );
        assert!(boundary(&eq, OrientationScheme::Standard).unwrap().is_empty());
    }

    /// Contracting the two outer edges of a top cyclic cell of shape
    /// (k+1, k) at odd n lands on the two adjacent vertex-marked cells with
    /// sign +1 each (the double-diagonal block of the top boundary matrix).
    #[test]
    fn double_diagonal_signs_are_plus_one() {
        for (arcs, expect_u, expect_v) in [
            ([&[1u8, 2, 3][..], &[5, 4][..], &[][..]], 1u8, 3u8),
            ([&[2, 3, 4][..], &[1, 5][..], &[][..]], 2, 4),
        ] {
            let c = cell([None, None], [arcs[0], arcs[1], arcs[2]], Decoration::Trivial);
            let terms = boundary(&c, OrientationScheme::Standard).unwrap();
            assert_eq!(terms.len(), 2, "only the two outer contractions survive");
            for (target, coeff) in &terms {
                assert_eq!(*coeff, 1, "double-diagonal entries carry +1");
                let marks = [target.ty().vertex_mark(0), target.ty().vertex_mark(1)];
                let mark = marks.iter().flatten().next().copied().unwrap();
                assert!(mark == expect_u || mark == expect_v);
            }
        }
    }

    #[test]
    fn full_top_cell_has_six_signed_terms() {
        let c = cell([None, None], [&[1, 2], &[3], &[4]], Decoration::Trivial);
        let terms = boundary(&c, OrientationScheme::Standard).unwrap();
        assert_eq!(terms.len(), 6);
        for (target, coeff) in &terms {
            assert_eq!(coeff.abs(), 1);
            let (e1, e2, _) = target.ty().form();
            assert_eq!((e1, e2), (1, 0));
        }
    }

    #[test]
    fn pair_creation_cancels_out_of_the_boundary() {
        // contracting either end of the singly marked arc would create a
        // parallel pair; both targets must be absent
        let c = cell([None, None], [&[1, 2, 3], &[4], &[]], Decoration::Trivial);
        let terms = boundary(&c, OrientationScheme::Standard).unwrap();
        for (target, _) in &terms {
            assert!(!target.ty().has_parallel_pair());
        }
    }

    #[test]
    fn complexes_satisfy_boundary_square_zero() {
        for n in [4usize, 5] {
            for variant in [
                Variant::FullDelta,
                Variant::FullRelCyclic,
                Variant::CyclicSigma(CyclicOrder::from_cycle_word(
                    &(1..=n as Label).collect::<Vec<_>>(),
                )),
            ] {
                let cx = build_complex(n, variant, OrientationScheme::Standard).unwrap();
                cx.check_boundary_squares().unwrap();
            }
        }
    }

    #[test]
    fn cyclic_sigma_matrix_shapes_at_n4() {
        let sigma = CyclicOrder::from_cycle_word(&[1, 2, 3, 4]);
        let cx = build_complex(4, Variant::CyclicSigma(sigma), OrientationScheme::Standard)
            .unwrap();
        let d6 = cx.boundary_matrix(6).unwrap();
        let d5 = cx.boundary_matrix(5).unwrap();
        let d4 = cx.boundary_matrix(4).unwrap();
        assert_eq!((d6.rows(), d6.cols()), (20, 10));
        assert_eq!((d5.rows(), d5.cols()), (14, 20));
        assert_eq!((d4.rows(), d4.cols()), (4, 14));
    }

    #[test]
    fn full_rel_cyclic_n4_shapes_and_top_nnz() {
        let cx = build_complex(4, Variant::FullRelCyclic, OrientationScheme::Standard).unwrap();
        assert_eq!(cx.cell_count(6), 6);
        assert_eq!(cx.cell_count(5), 4);
        assert_eq!(cx.cell_count(4), 0);
        let d6 = cx.boundary_matrix(6).unwrap();
        assert_eq!((d6.rows(), d6.cols()), (4, 6));
        // each top column keeps the two contractions along its longer arc
        assert_eq!(d6.nnz(), 12);
    }

    #[test]
    fn column_support_is_bounded_by_the_edge_count() {
        let cx = build_complex(5, Variant::FullDelta, OrientationScheme::Standard).unwrap();
        for d in cx.degrees() {
            let m = cx.boundary_matrix(*d).unwrap();
            let mut per_col = vec![0usize; m.cols()];
            for &(_, c, _) in m.entries() {
                per_col[c as usize] += 1;
            }
            for (c, count) in per_col.iter().enumerate() {
                let cell = &cx.cells(*d)[c];
                assert!(*count <= cell.ty().edge_count());
            }
        }
    }

    #[test]
    fn shuffled_conventions_only_flip_signs() {
        let standard = build_complex(4, Variant::FullRelCyclic, OrientationScheme::Standard)
            .unwrap();
        let shuffled = build_complex(
            4,
            Variant::FullRelCyclic,
            OrientationScheme::ShuffledFull(99),
        )
        .unwrap();
        for d in standard.degrees() {
            let a = standard.boundary_matrix(*d).unwrap();
            let b = shuffled.boundary_matrix(*d).unwrap();
            assert_eq!(a.nnz(), b.nnz());
            assert_eq!(a.rank_rational(3), b.rank_rational(3));
        }
    }
}
