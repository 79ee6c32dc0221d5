//! Bisets, biset families, and the covering and uncrossing predicates.
//!
//! A biset `(X, X+)` is a nested pair of node sets over a fixed universe
//! `0..n`. Its boundary `X+ \ X` is always derived from the two parts.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::graph::Edge;

/// A subset of the node universe `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(FixedBitSet);

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        NodeSet(FixedBitSet::with_capacity(universe))
    }

    pub fn from_nodes(universe: usize, nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut s = NodeSet::empty(universe);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    pub fn full(universe: usize) -> Self {
        let mut s = NodeSet::empty(universe);
        s.0.insert_range(..);
        s
    }

    /// Builds a set from the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        NodeSet::from_nodes(universe, (0..universe).filter(|&i| mask >> i & 1 == 1))
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, v: usize) {
        self.0.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        self.0.set(v, false);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(&self.0 & &other.0)
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet(&self.0 | &other.0)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.0.clone();
        s.difference_with(&other.0);
        NodeSet(s)
    }

    pub fn complement(&self) -> NodeSet {
        let mut s = self.0.clone();
        s.toggle_range(..);
        NodeSet(s)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An ordered pair `(inner, outer)` with `inner ⊆ outer`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Biset {
    inner: NodeSet,
    outer: NodeSet,
}

impl Biset {
    /// Returns `None` unless `inner ⊆ outer` over one universe.
    pub fn new(inner: NodeSet, outer: NodeSet) -> Option<Self> {
        (inner.universe() == outer.universe() && inner.is_subset(&outer))
            .then_some(Biset { inner, outer })
    }

    pub fn from_nodes(
        universe: usize,
        inner: impl IntoIterator<Item = usize>,
        outer: impl IntoIterator<Item = usize>,
    ) -> Option<Self> {
        Biset::new(
            NodeSet::from_nodes(universe, inner),
            NodeSet::from_nodes(universe, outer),
        )
    }

    /// `(∅, ∅)`.
    pub fn empty(universe: usize) -> Self {
        Biset {
            inner: NodeSet::empty(universe),
            outer: NodeSet::empty(universe),
        }
    }

    pub fn inner(&self) -> &NodeSet {
        &self.inner
    }

    pub fn outer(&self) -> &NodeSet {
        &self.outer
    }

    pub fn universe(&self) -> usize {
        self.inner.universe()
    }

    /// `Γ = outer \ inner`.
    pub fn boundary(&self) -> NodeSet {
        self.outer.difference(&self.inner)
    }

    pub fn in_boundary(&self, v: usize) -> bool {
        self.outer.contains(v) && !self.inner.contains(v)
    }

    /// `(V \ X+, V \ X)`.
    pub fn complement(&self) -> Biset {
        Biset {
            inner: self.outer.complement(),
            outer: self.inner.complement(),
        }
    }

    pub fn intersect(&self, other: &Biset) -> Biset {
        Biset {
            inner: self.inner.intersection(&other.inner),
            outer: self.outer.intersection(&other.outer),
        }
    }

    pub fn union(&self, other: &Biset) -> Biset {
        Biset {
            inner: self.inner.union(&other.inner),
            outer: self.outer.union(&other.outer),
        }
    }

    /// `(X \ Y+, X+ \ Y)`.
    pub fn minus(&self, other: &Biset) -> Biset {
        Biset {
            inner: self.inner.difference(&other.outer),
            outer: self.outer.difference(&other.inner),
        }
    }

    /// Biset inclusion: both parts contained.
    pub fn is_subset(&self, other: &Biset) -> bool {
        self.inner.is_subset(&other.inner) && self.outer.is_subset(&other.outer)
    }
}

impl fmt::Debug for Biset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Biset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.inner, self.outer)
    }
}

pub fn biset_intersect(a: &Biset, b: &Biset) -> Biset {
    a.intersect(b)
}

pub fn biset_union(a: &Biset, b: &Biset) -> Biset {
    a.union(b)
}

pub fn biset_minus(a: &Biset, b: &Biset) -> Biset {
    a.minus(b)
}

/// Whether `edge` covers `b`: one end in the inner part and the other outside
/// the outer part. Directed edges must leave through their tail.
pub fn covers(edge: Edge, b: &Biset, directed: bool) -> bool {
    let (u, v) = edge;
    let out = |x: usize| !b.outer.contains(x);
    let forward = b.inner.contains(u) && out(v);
    if directed {
        forward
    } else {
        forward || (b.inner.contains(v) && out(u))
    }
}

/// `δ_J(X̂)`: the edges of `edges` covering `b`, with multiplicity.
pub fn delta(edges: &[Edge], b: &Biset, directed: bool) -> Vec<Edge> {
    edges
        .iter()
        .copied()
        .filter(|&e| covers(e, b, directed))
        .collect()
}

pub fn delta_count(edges: &[Edge], b: &Biset, directed: bool) -> usize {
    edges.iter().filter(|&&e| covers(e, b, directed)).count()
}

/// Edges leaving the plain node set `x` (`δ_J(X)`).
pub fn delta_set(edges: &[Edge], x: &NodeSet, directed: bool) -> Vec<Edge> {
    let b = Biset {
        inner: x.clone(),
        outer: x.clone(),
    };
    delta(edges, &b, directed)
}

fn avoids(e: Edge, b: &Biset) -> bool {
    !b.in_boundary(e.0) && !b.in_boundary(e.1)
}

/// Negation of `D`-independence: some demand covering `a` avoids `Γ(b)` while
/// some demand covering `b` avoids `Γ(a)`.
pub fn d_dependent(a: &Biset, b: &Biset, demands: &[Edge], directed: bool) -> bool {
    let witness_a = demands
        .iter()
        .any(|&e| covers(e, a, directed) && avoids(e, b));
    let witness_b = demands
        .iter()
        .any(|&e| covers(e, b, directed) && avoids(e, a));
    witness_a && witness_b
}

/// Negation of `T`-independence: neither `X ∩ T ⊆ Γ(Y)` nor `Y ∩ T ⊆ Γ(X)`.
pub fn t_dependent(a: &Biset, b: &Biset, terminals: &NodeSet) -> bool {
    let xt = a.inner.intersection(terminals);
    let yt = b.inner.intersection(terminals);
    !(xt.is_subset(&b.boundary()) || yt.is_subset(&a.boundary()))
}

/// A finite family of bisets over a common universe, kept sorted and free of
/// duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisetFamily {
    universe: usize,
    members: Vec<Biset>,
}

impl BisetFamily {
    pub fn new(universe: usize, members: impl IntoIterator<Item = Biset>) -> Self {
        let mut members: Vec<Biset> = members.into_iter().collect();
        debug_assert!(members.iter().all(|b| b.universe() == universe));
        members.sort();
        members.dedup();
        BisetFamily { universe, members }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[Biset] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, b: &Biset) -> bool {
        self.members.binary_search(b).is_ok()
    }

    pub fn filter(&self, keep: impl Fn(&Biset) -> bool) -> BisetFamily {
        BisetFamily {
            universe: self.universe,
            members: self.members.iter().filter(|b| keep(b)).cloned().collect(),
        }
    }

    /// Closed under `X̂ ↦ (V \ X+, V \ X)`.
    pub fn is_symmetric(&self) -> bool {
        self.members.iter().all(|b| self.contains(&b.complement()))
    }

    /// `γ`: the largest boundary size, 0 for the empty family.
    pub fn max_boundary(&self) -> usize {
        self.members
            .iter()
            .map(|b| b.boundary().len())
            .max()
            .unwrap_or(0)
    }

    /// `Δ`: the maximum number of inner parts containing one node.
    pub fn max_inner_degree(&self) -> usize {
        (0..self.universe)
            .map(|v| self.members.iter().filter(|b| b.inner.contains(v)).count())
            .max()
            .unwrap_or(0)
    }

    fn uncrossing_holds(&self, x: &Biset, y: &Biset) -> bool {
        (self.contains(&x.intersect(y)) && self.contains(&x.union(y)))
            || (self.contains(&x.minus(y)) && self.contains(&y.minus(x)))
    }
}

/// Exhaustive check of `D`-uncrossability.
pub fn is_d_uncrossable(family: &BisetFamily, demands: &[Edge], directed: bool) -> bool {
    let covered = family
        .members
        .iter()
        .all(|b| demands.iter().any(|&e| covers(e, b, directed)));
    covered
        && family.members.iter().enumerate().all(|(i, x)| {
            family.members[i..].iter().all(|y| {
                !d_dependent(x, y, demands, directed) || family.uncrossing_holds(x, y)
            })
        })
}

/// Exhaustive check of `T`-uncrossability.
pub fn is_t_uncrossable(family: &BisetFamily, terminals: &NodeSet) -> bool {
    let covered = family
        .members
        .iter()
        .all(|b| !b.inner.is_disjoint(terminals));
    covered
        && family.members.iter().enumerate().all(|(i, x)| {
            family.members[i..]
                .iter()
                .all(|y| !t_dependent(x, y, terminals) || family.uncrossing_holds(x, y))
        })
}

/// Members that contain no other member.
pub fn minimal_members(family: &BisetFamily) -> BisetFamily {
    let members = family.members.iter().filter(|b| {
        !family
            .members
            .iter()
            .any(|c| c != *b && c.is_subset(b))
    });
    BisetFamily {
        universe: family.universe,
        members: members.cloned().collect(),
    }
}
