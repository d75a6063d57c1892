//! Marked theta graphs: the combinatorial types underlying every cell.
//!
//! A genus-2 theta graph has two trivalent vertices `u`, `v` joined by three
//! parallel arcs.  A *marked theta type* places `n` distinct labels on the
//! vertices and arc interiors, with every label used exactly once.  Each arc
//! is stored as the ordered word of its interior labels read from `u` to `v`.
//!
//! The module provides the three core operations on types:
//!
//! - [`MarkedThetaType::classify`]: cyclic (all marks on one cycle) vs. full;
//! - [`MarkedThetaType::contract`]: edge contraction, with bridge detection;
//! - [`MarkedThetaType::canonicalize`]: a canonical representative under the
//!   order-12 symmetry group of the theta graph (arc permutations times the
//!   vertex swap, which reverses every arc word).

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Marking labels are `1..=n`.
pub type Label = u8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThetaError {
    #[error("marking count n = {0} is unsupported; the cell structure needs n >= 4")]
    UnsupportedN(usize),
    #[error("labels must be exactly 1..={expected}, each used once")]
    BadLabels { expected: usize },
    #[error("unknown edge identifier ({arc}, {pos})")]
    UnknownEdge { arc: u8, pos: u8 },
    #[error("decoration {0:?} requires a parallel pair of edges")]
    DecorationWithoutPair(Decoration),
}

/// An edge of the subdivided theta graph.
///
/// Arc `arc` with interior word `m_1 .. m_k` has `k + 1` edges; edge `pos`
/// joins node `pos` to node `pos + 1`, where node `0` is vertex `u`, node
/// `i` is `m_i`, and node `k + 1` is vertex `v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId {
    pub arc: u8,
    pub pos: u8,
}

impl EdgeId {
    pub fn new(arc: u8, pos: u8) -> Self {
        EdgeId { arc, pos }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.arc, self.pos)
    }
}

/// Relation decorating the unique parallel pair of a type, if any.
///
/// Only `LessEq` and `Equal` occur on canonical cells: the swap automorphism
/// of the parallel pair identifies the two strict orders.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoration {
    Trivial,
    LessEq,
    Equal,
}

impl fmt::Display for Decoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decoration::Trivial => write!(f, "trivial"),
            Decoration::LessEq => write!(f, "leq"),
            Decoration::Equal => write!(f, "eq"),
        }
    }
}

/// A cyclic ordering of `1..=n` up to rotation and reflection, stored as the
/// canonical word: starts at label 1, read in the direction that makes the
/// word lexicographically least.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CyclicOrder(Vec<Label>);

impl CyclicOrder {
    /// Canonicalize an arbitrary reading of a cycle word.
    pub fn from_cycle_word(word: &[Label]) -> Self {
        assert!(!word.is_empty());
        let start = word.iter().position(|&l| l == 1).expect("label 1 missing");
        let n = word.len();
        let forward: Vec<Label> = (0..n).map(|i| word[(start + i) % n]).collect();
        let backward: Vec<Label> = (0..n).map(|i| word[(start + n - i) % n]).collect();
        CyclicOrder(forward.min(backward))
    }

    /// All `(n-1)!/2` cyclic orderings of `1..=n`, sorted.
    pub fn all(n: usize) -> Vec<CyclicOrder> {
        let rest: Vec<Label> = (2..=n as Label).collect();
        let mut out = Vec::new();
        permute(&rest, &mut Vec::new(), &mut |perm| {
            // canonical words are exactly those with second entry < last entry
            if n <= 2 || perm[0] < perm[n - 2] {
                let mut w = Vec::with_capacity(n);
                w.push(1);
                w.extend_from_slice(perm);
                out.push(CyclicOrder(w));
            }
        });
        out.sort();
        out
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn word(&self) -> &[Label] {
        &self.0
    }

    /// True if `reading` traverses this cyclic order in the canonical
    /// (forward) direction, up to rotation.
    pub fn is_forward(&self, reading: &[Label]) -> bool {
        assert_eq!(reading.len(), self.0.len());
        let start = reading.iter().position(|&l| l == 1).expect("label 1 missing");
        let n = reading.len();
        (0..n).all(|i| reading[(start + i) % n] == self.0[i])
    }
}

impl fmt::Display for CyclicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

fn permute<T: Copy>(rest: &[T], prefix: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
    if rest.is_empty() {
        visit(prefix);
        return;
    }
    for i in 0..rest.len() {
        let mut remaining = rest.to_vec();
        let item = remaining.remove(i);
        prefix.push(item);
        permute(&remaining, prefix, visit);
        prefix.pop();
    }
}

/// Whether a type is cyclic (some arc interior empty, so all marks lie on one
/// cycle) or full (all three arc interiors marked).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Classification {
    Cyclic(CyclicOrder),
    Full,
}

/// A genus-2 theta graph with `n` distinct markings.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MarkedThetaType {
    n: u8,
    vertex_marks: [Option<Label>; 2],
    arcs: [Vec<Label>; 3],
}

/// One of the 12 symmetries of the theta graph, as it acts on stored
/// representations: an optional vertex swap (which exchanges the vertex marks
/// and reverses every arc word) followed by a permutation of the three arcs.
#[derive(Clone, Copy, Debug)]
pub struct Symmetry {
    pub swap: bool,
    /// `perm[a]` is the arc index the old arc `a` is sent to.
    pub perm: [u8; 3],
    /// Edge counts of the *source* representation's arcs, needed to reverse
    /// edge positions under the vertex swap.
    edge_counts: [u8; 3],
}

impl Symmetry {
    /// Image of a source edge under this symmetry.
    pub fn map_edge(&self, e: EdgeId) -> EdgeId {
        let pos = if self.swap {
            self.edge_counts[e.arc as usize] - 1 - e.pos
        } else {
            e.pos
        };
        EdgeId::new(self.perm[e.arc as usize], pos)
    }
}

/// Result of contracting one edge of a marked theta type.
#[derive(Clone, Debug)]
pub enum ContractionOutcome {
    /// The contraction lands in the bridge locus (collapsed to a point in the
    /// quotient complex); no data is retained.
    Bridge,
    Theta {
        /// The contracted type, *not* canonicalized: the end mark of the arc
        /// has migrated onto the adjacent vertex, or the arc merely shortened.
        result: MarkedThetaType,
        /// True exactly when the contraction emptied an arc interior while
        /// exactly one other arc was already empty, creating a parallel pair.
        parallel_pair_created: bool,
        /// Correspondence from surviving source edges to edges of `result`.
        edge_map: ContractionEdgeMap,
    },
}

/// Edge correspondence induced by contracting `contracted`: edges on other
/// arcs are unchanged; on the contracted edge's arc, positions shift down by
/// one when the first edge was removed.
#[derive(Clone, Copy, Debug)]
pub struct ContractionEdgeMap {
    contracted: EdgeId,
}

impl ContractionEdgeMap {
    pub fn map_edge(&self, e: EdgeId) -> EdgeId {
        assert_ne!(e, self.contracted, "contracted edge does not survive");
        if e.arc == self.contracted.arc && self.contracted.pos == 0 {
            EdgeId::new(e.arc, e.pos - 1)
        } else {
            e
        }
    }
}

impl MarkedThetaType {
    /// Build and validate a type: labels `1..=n` each used once, `n >= 4`.
    pub fn new(
        vertex_marks: [Option<Label>; 2],
        arcs: [Vec<Label>; 3],
    ) -> Result<Self, ThetaError> {
        let n = vertex_marks.iter().flatten().count()
            + arcs.iter().map(|a| a.len()).sum::<usize>();
        if n < 4 {
            return Err(ThetaError::UnsupportedN(n));
        }
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        let mut mark = |l: Label| {
            if (l as usize) == 0 || (l as usize) > n || seen[l as usize] {
                false
            } else {
                seen[l as usize] = true;
                count += 1;
                true
            }
        };
        for &m in vertex_marks.iter().flatten() {
            if !mark(m) {
                return Err(ThetaError::BadLabels { expected: n });
            }
        }
        for arc in &arcs {
            for &m in arc {
                if !mark(m) {
                    return Err(ThetaError::BadLabels { expected: n });
                }
            }
        }
        debug_assert_eq!(count, n);
        debug_assert!(
            arcs.iter().filter(|a| a.is_empty()).count() <= 2,
            "three empty arcs cannot carry n >= 4 labels"
        );
        Ok(MarkedThetaType {
            n: n as u8,
            vertex_marks,
            arcs,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn vertex_mark(&self, vertex: usize) -> Option<Label> {
        self.vertex_marks[vertex]
    }

    pub fn arc(&self, arc: usize) -> &[Label] {
        &self.arcs[arc]
    }

    pub fn marked_vertex_count(&self) -> usize {
        self.vertex_marks.iter().flatten().count()
    }

    pub fn empty_arc_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.is_empty()).count()
    }

    /// `|E| = n - eps_1 - eps_2 + 3`.
    pub fn edge_count(&self) -> usize {
        self.arcs.iter().map(|a| a.len() + 1).sum()
    }

    fn arc_edge_counts(&self) -> [u8; 3] {
        [
            self.arcs[0].len() as u8 + 1,
            self.arcs[1].len() as u8 + 1,
            self.arcs[2].len() as u8 + 1,
        ]
    }

    /// Arc indices of the parallel pair (the two internally empty arcs),
    /// if the type has one.
    pub fn parallel_pair(&self) -> Option<(u8, u8)> {
        let empties: Vec<u8> = (0..3u8)
            .filter(|&a| self.arcs[a as usize].is_empty())
            .collect();
        match empties.as_slice() {
            [a, b] => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn has_parallel_pair(&self) -> bool {
        self.parallel_pair().is_some()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..3u8).flat_map(move |arc| {
            (0..self.arcs[arc as usize].len() as u8 + 1).map(move |pos| EdgeId::new(arc, pos))
        })
    }

    /// The shape `(eps_1, eps_2, k_1, k_2, k_3)` of the type: vertex-marking
    /// indicators (descending) and arc interior counts (descending).
    pub fn form(&self) -> (u8, u8, [u8; 3]) {
        let mut eps = [
            self.vertex_marks[0].is_some() as u8,
            self.vertex_marks[1].is_some() as u8,
        ];
        eps.sort_unstable_by(|a, b| b.cmp(a));
        let mut ks = [
            self.arcs[0].len() as u8,
            self.arcs[1].len() as u8,
            self.arcs[2].len() as u8,
        ];
        ks.sort_unstable_by(|a, b| b.cmp(a));
        (eps[0], eps[1], ks)
    }

    /// Cyclic if some arc interior is empty, full otherwise.  A cyclic type
    /// determines the ordering of `1..=n` read along the cycle through the
    /// marked arcs and both vertices.
    pub fn classify(&self) -> Classification {
        let empties: Vec<usize> = (0..3).filter(|&a| self.arcs[a].is_empty()).collect();
        if empties.is_empty() {
            return Classification::Full;
        }
        // The cycle consists of the (at most two) nonempty arcs and both
        // vertices; with two empty arcs the single marked arc closes up
        // through either one.
        let nonempty: Vec<usize> = (0..3).filter(|&a| !self.arcs[a].is_empty()).collect();
        let mut word: Vec<Label> = Vec::with_capacity(self.n());
        word.extend(self.vertex_marks[0]);
        word.extend_from_slice(&self.arcs[nonempty[0]]);
        word.extend(self.vertex_marks[1]);
        if nonempty.len() == 2 {
            word.extend(self.arcs[nonempty[1]].iter().rev());
        }
        Classification::Cyclic(CyclicOrder::from_cycle_word(&word))
    }

    /// Contract edge `e`.
    ///
    /// Bridge outcomes: `e` joins two marked nodes (repeated marking), or `e`
    /// is the sole edge of an internally empty arc (merging the vertices
    /// creates a virtual cut vertex).  Otherwise the end mark of the arc
    /// migrates onto the adjacent unmarked vertex.
    pub fn contract(&self, e: EdgeId) -> Result<ContractionOutcome, ThetaError> {
        let arc = e.arc as usize;
        if arc >= 3 || e.pos as usize > self.arcs[arc].len() {
            return Err(ThetaError::UnknownEdge {
                arc: e.arc,
                pos: e.pos,
            });
        }
        let k = self.arcs[arc].len();
        if k == 0 {
            return Ok(ContractionOutcome::Bridge);
        }
        let pos = e.pos as usize;
        let (vertex, migrating) = if pos == 0 {
            (0usize, self.arcs[arc][0])
        } else if pos == k {
            (1usize, self.arcs[arc][k - 1])
        } else {
            // both endpoints are interior marks
            return Ok(ContractionOutcome::Bridge);
        };
        if self.vertex_marks[vertex].is_some() {
            return Ok(ContractionOutcome::Bridge);
        }
        let mut vertex_marks = self.vertex_marks;
        vertex_marks[vertex] = Some(migrating);
        let mut arcs = self.arcs.clone();
        if pos == 0 {
            arcs[arc].remove(0);
        } else {
            arcs[arc].pop();
        }
        let parallel_pair_created =
            k == 1 && (0..3).filter(|&a| a != arc && self.arcs[a].is_empty()).count() == 1;
        let result = MarkedThetaType::new(vertex_marks, arcs)?;
        Ok(ContractionOutcome::Theta {
            result,
            parallel_pair_created,
            edge_map: ContractionEdgeMap { contracted: e },
        })
    }

    fn apply(&self, swap: bool, perm: [u8; 3]) -> MarkedThetaType {
        let (vertex_marks, base_arcs) = if swap {
            let rev = |a: &Vec<Label>| a.iter().rev().copied().collect::<Vec<_>>();
            (
                [self.vertex_marks[1], self.vertex_marks[0]],
                [rev(&self.arcs[0]), rev(&self.arcs[1]), rev(&self.arcs[2])],
            )
        } else {
            (self.vertex_marks, self.arcs.clone())
        };
        let mut arcs: [Vec<Label>; 3] = Default::default();
        for (a, word) in base_arcs.into_iter().enumerate() {
            arcs[perm[a] as usize] = word;
        }
        MarkedThetaType {
            n: self.n,
            vertex_marks,
            arcs,
        }
    }

    /// Key realizing the canonical order on representations: prefer a marked
    /// `u` vertex, then compare arc words with empty arcs collated last, then
    /// the vertex labels themselves.
    fn canonical_key(&self) -> impl Ord + '_ {
        (
            self.vertex_marks[0].is_none(),
            self.vertex_marks[1].is_none(),
            [
                (self.arcs[0].is_empty(), &self.arcs[0]),
                (self.arcs[1].is_empty(), &self.arcs[1]),
                (self.arcs[2].is_empty(), &self.arcs[2]),
            ],
            self.vertex_marks[0],
            self.vertex_marks[1],
        )
    }

    /// The minimal representative of this type's symmetry orbit, together
    /// with the group element mapping `self` onto it.
    pub fn canonicalize(&self) -> (MarkedThetaType, Symmetry) {
        const PERMS: [[u8; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [2, 0, 1],
            [1, 2, 0],
            [2, 1, 0],
        ];
        let mut best: Option<(MarkedThetaType, Symmetry)> = None;
        for swap in [false, true] {
            for perm in PERMS {
                let candidate = self.apply(swap, perm);
                let better = match &best {
                    None => true,
                    Some((b, _)) => candidate.canonical_key() < b.canonical_key(),
                };
                if better {
                    best = Some((
                        candidate,
                        Symmetry {
                            swap,
                            perm,
                            edge_counts: self.arc_edge_counts(),
                        },
                    ));
                }
            }
        }
        best.unwrap()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize().0 == *self
    }
}

impl PartialOrd for MarkedThetaType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MarkedThetaType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.canonical_key().cmp(&other.canonical_key()))
    }
}

impl fmt::Display for MarkedThetaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vm = |m: Option<Label>| match m {
            Some(l) => l.to_string(),
            None => "-".to_string(),
        };
        let word = |w: &[Label]| {
            w.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "[{}|{}|{};{};{}]",
            vm(self.vertex_marks[0]),
            vm(self.vertex_marks[1]),
            word(&self.arcs[0]),
            word(&self.arcs[1]),
            word(&self.arcs[2]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(vm: [Option<Label>; 2], arcs: [&[Label]; 3]) -> MarkedThetaType {
        MarkedThetaType::new(vm, [arcs[0].to_vec(), arcs[1].to_vec(), arcs[2].to_vec()])
            .expect("valid type")
    }

    #[test]
    fn classify_cyclic_reads_the_cycle() {
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        match t.classify() {
            Classification::Cyclic(sigma) => {
                assert_eq!(sigma.word(), &[1, 2, 3, 4]);
            }
            Classification::Full => panic!("expected cyclic"),
        }
    }

    #[test]
    fn classify_full_needs_all_interiors_marked() {
        let t = ty([None, None], [&[1, 2], &[3], &[4]]);
        assert_eq!(t.classify(), Classification::Full);
    }

    #[test]
    fn classify_single_marked_arc_with_pair() {
        let t = ty([None, None], [&[1, 2, 3, 4], &[], &[]]);
        assert!(t.has_parallel_pair());
        match t.classify() {
            Classification::Cyclic(sigma) => assert_eq!(sigma.word(), &[1, 2, 3, 4]),
            Classification::Full => panic!("expected cyclic"),
        }
    }

    #[test]
    fn contract_end_edge_migrates_mark_and_creates_pair() {
        // contracting the last edge of the second arc moves 4 onto vertex v
        // and leaves two empty arcs
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        match t.contract(EdgeId::new(1, 1)).unwrap() {
            ContractionOutcome::Theta {
                result,
                parallel_pair_created,
                ..
            } => {
                assert!(parallel_pair_created);
                assert_eq!(result.vertex_mark(1), Some(4));
                assert_eq!(result.arc(0), &[1, 2, 3]);
                assert!(result.arc(1).is_empty() && result.arc(2).is_empty());
                assert_eq!(result.edge_count(), t.edge_count() - 1);
            }
            ContractionOutcome::Bridge => panic!("expected theta outcome"),
        }
    }

    #[test]
    fn contract_interior_edge_is_bridge() {
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        assert!(matches!(
            t.contract(EdgeId::new(0, 1)).unwrap(),
            ContractionOutcome::Bridge
        ));
        assert!(matches!(
            t.contract(EdgeId::new(0, 2)).unwrap(),
            ContractionOutcome::Bridge
        ));
    }

    #[test]
    fn contract_empty_arc_is_bridge() {
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        assert!(matches!(
            t.contract(EdgeId::new(2, 0)).unwrap(),
            ContractionOutcome::Bridge
        ));
    }

    #[test]
    fn contract_unknown_edge_is_error() {
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        assert_eq!(
            t.contract(EdgeId::new(1, 5)).unwrap_err(),
            ThetaError::UnknownEdge { arc: 1, pos: 5 }
        );
    }

    #[test]
    fn canonicalize_sorts_arcs_with_empties_last() {
        let t = ty([None, None], [&[], &[4], &[1, 2, 3]]);
        let (canon, _) = t.canonicalize();
        assert_eq!(canon, ty([None, None], [&[1, 2, 3], &[4], &[]]));
    }

    #[test]
    fn canonicalize_identifies_swapped_representation() {
        let a = ty([None, None], [&[], &[4], &[1, 2, 3]]);
        let b = ty([None, None], [&[3, 2, 1], &[], &[4]]);
        assert_eq!(a.canonicalize().0, b.canonicalize().0);
    }

    #[test]
    fn canonicalize_is_idempotent_and_orbit_constant() {
        let t = ty([Some(5), Some(6)], [&[1, 2], &[3], &[4]]);
        let (canon, _) = t.canonicalize();
        assert_eq!(canon.canonicalize().0, canon);
        const PERMS: [[u8; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [2, 0, 1],
            [1, 2, 0],
            [2, 1, 0],
        ];
        let mut orbit = std::collections::HashSet::new();
        for swap in [false, true] {
            for perm in PERMS {
                let img = t.apply(swap, perm);
                assert_eq!(img.canonicalize().0, canon);
                orbit.insert(img);
            }
        }
        // full theta with distinct arcs and both vertices marked: free orbit
        assert_eq!(orbit.len(), 12);
    }

    #[test]
    fn symmetry_edge_map_tracks_reversal() {
        let t = ty([None, None], [&[1, 2, 3], &[4], &[]]);
        let (_, g) = t.apply(true, [0, 1, 2]).canonicalize();
        // the swapped representation reverses back onto the canonical one
        let img = g.map_edge(EdgeId::new(0, 0));
        assert_eq!(img, EdgeId::new(0, 3));
    }

    #[test]
    fn cyclic_orders_count() {
        assert_eq!(CyclicOrder::all(4).len(), 3);
        assert_eq!(CyclicOrder::all(5).len(), 12);
        assert_eq!(CyclicOrder::all(6).len(), 60);
        let words: Vec<_> = CyclicOrder::all(4)
            .iter()
            .map(|s| s.word().to_vec())
            .collect();
        assert_eq!(
            words,
            vec![vec![1, 2, 3, 4], vec![1, 2, 4, 3], vec![1, 3, 2, 4]]
        );
    }

    #[test]
    fn classification_invariant_under_canonicalize() {
        let t = ty([Some(2), None], [&[3, 4], &[], &[1]]);
        let (canon, _) = t.canonicalize();
        assert_eq!(t.classify(), canon.classify());
    }
}
