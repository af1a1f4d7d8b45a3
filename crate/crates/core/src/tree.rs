//! Canonical non-planar decorated rooted trees.
//!
//! A tree node carries a polynomial decoration (a multi-index), an extended
//! decoration (a symbolic degree label, inert except for the grading) and a
//! multiset of decorated child edges. Children are kept sorted under the
//! structural order so that structural equality coincides with tree
//! isomorphism.

use crate::degree::{Degree, Params};
use crate::index::MultiIndex;
use std::fmt;

/// Edge decoration: either an abstract integration edge with a derivative
/// multi-index, or a noise edge. Noise edges are terminal and carry no index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeLabel {
    Noise,
    Kernel(MultiIndex),
}

/// A decorated rooted tree in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DecoratedTree {
    pub root_poly: MultiIndex,
    pub root_ext: Degree,
    children: Vec<(EdgeLabel, DecoratedTree)>,
}

impl DecoratedTree {
    /// The empty tree `1` (a bare undecorated node).
    pub fn one() -> Self {
        DecoratedTree::default()
    }

    /// The noise symbol: a root with one terminal noise edge.
    pub fn xi() -> Self {
        DecoratedTree {
            root_poly: MultiIndex::zero(),
            root_ext: Degree::ZERO,
            children: vec![(EdgeLabel::Noise, DecoratedTree::one())],
        }
    }

    /// The monomial `X^k`.
    pub fn x_pow(k: MultiIndex) -> Self {
        DecoratedTree {
            root_poly: k,
            root_ext: Degree::ZERO,
            children: Vec::new(),
        }
    }

    /// `X_i` (0-based coordinate).
    pub fn x_i(i: usize) -> Self {
        Self::x_pow(MultiIndex::unit(i))
    }

    /// A bare node with an extended decoration.
    pub fn ext_node(e: Degree) -> Self {
        DecoratedTree {
            root_poly: MultiIndex::zero(),
            root_ext: e,
            children: Vec::new(),
        }
    }

    /// Grafts `arg` below a fresh zero-decorated root via a kernel edge.
    pub fn planted(a: MultiIndex, arg: DecoratedTree) -> Self {
        DecoratedTree {
            root_poly: MultiIndex::zero(),
            root_ext: Degree::ZERO,
            children: vec![(EdgeLabel::Kernel(a), arg)],
        }
    }

    /// Builds a tree from raw parts, canonicalizing the child order.
    pub fn from_parts(
        root_poly: MultiIndex,
        root_ext: Degree,
        mut children: Vec<(EdgeLabel, DecoratedTree)>,
    ) -> Self {
        children.sort();
        DecoratedTree {
            root_poly,
            root_ext,
            children,
        }
    }

    pub fn children(&self) -> &[(EdgeLabel, DecoratedTree)] {
        &self.children
    }

    pub fn is_one(&self) -> bool {
        self.root_poly.is_zero() && self.root_ext.is_zero() && self.children.is_empty()
    }

    /// True for `I_a(arg)`: single kernel child, no other structure at the root.
    pub fn is_planted(&self) -> bool {
        self.root_poly.is_zero()
            && self.root_ext.is_zero()
            && self.children.len() == 1
            && matches!(self.children[0].0, EdgeLabel::Kernel(_))
    }

    /// For a planted tree, its `(a, arg)` pair.
    pub fn as_planted(&self) -> Option<(&MultiIndex, &DecoratedTree)> {
        if self.is_planted() {
            match &self.children[0] {
                (EdgeLabel::Kernel(a), arg) => Some((a, arg)),
                _ => unreachable!(),
            }
        } else {
            None
        }
    }

    /// Tree product: roots are identified, decorations add, children merge.
    pub fn product(&self, other: &Self) -> Self {
        let mut children = self.children.clone();
        children.extend(other.children.iter().cloned());
        DecoratedTree::from_parts(
            self.root_poly.add(&other.root_poly),
            self.root_ext + other.root_ext,
            children,
        )
    }

    /// Symbolic degree of the tree.
    pub fn degree_sym(&self) -> Degree {
        let mut d = Degree::int(self.root_poly.total() as i64) + self.root_ext;
        for (label, child) in &self.children {
            d += match label {
                EdgeLabel::Noise => Degree::alpha(),
                EdgeLabel::Kernel(a) => Degree::kernel(a.total()),
            };
            d += child.degree_sym();
        }
        d
    }

    /// Degree evaluated at the spec's `(α, β)`.
    pub fn degree(&self, params: &Params) -> crate::Rat {
        self.degree_sym().eval(params)
    }

    /// Number of noise edges.
    pub fn noise_count(&self) -> u32 {
        self.children
            .iter()
            .map(|(label, child)| {
                child.noise_count() + u32::from(matches!(label, EdgeLabel::Noise))
            })
            .sum()
    }

    /// Total node count.
    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|(_, c)| c.node_count())
            .sum::<usize>()
    }

    /// Number of edges carried by the tree.
    pub fn edge_count(&self) -> usize {
        self.node_count() - 1
    }

    /// True when some node carries a nonzero extended decoration.
    pub fn has_ext(&self) -> bool {
        !self.root_ext.is_zero() || self.children.iter().any(|(_, c)| c.has_ext())
    }

    /// Largest stored multi-index width over all decorations.
    pub fn max_width(&self) -> usize {
        let mut w = self.root_poly.width();
        for (label, child) in &self.children {
            if let EdgeLabel::Kernel(a) = label {
                w = w.max(a.width());
            }
            w = w.max(child.max_width());
        }
        w
    }

    /// Splits the tree into its canonical generator factors:
    /// `X^k · o[e] · Ξ^m · ∏ I_{a_i}(τ_i)` plus the unit when empty.
    pub fn factors(&self) -> Vec<TreeFactor<'_>> {
        let mut out = Vec::new();
        if !self.root_poly.is_zero() {
            out.push(TreeFactor::Poly(&self.root_poly));
        }
        if !self.root_ext.is_zero() {
            out.push(TreeFactor::Ext(self.root_ext));
        }
        for (label, child) in &self.children {
            match label {
                EdgeLabel::Noise => out.push(TreeFactor::Noise),
                EdgeLabel::Kernel(a) => out.push(TreeFactor::Planted(a, child)),
            }
        }
        out
    }
}

/// One multiplicative generator factor of a tree.
#[derive(Clone, Copy, Debug)]
pub enum TreeFactor<'a> {
    /// `X^k` with `k ≠ 0`.
    Poly(&'a MultiIndex),
    /// A nonzero extended decoration at the node.
    Ext(Degree),
    /// One noise edge.
    Noise,
    /// One kernel edge `I_a(arg)`.
    Planted(&'a MultiIndex, &'a DecoratedTree),
}

impl fmt::Debug for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::print_tree(self))
    }
}

impl fmt::Display for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::print_tree(self))
    }
}

/// An element `X^k ∏ I+_{a_i}(τ_i)` of the positive basis.
///
/// Positivity of every branch is a property of the governing spec and is
/// checked by [`PlusTree::branches_positive`], not at construction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PlusTree {
    pub poly: MultiIndex,
    factors: Vec<(MultiIndex, DecoratedTree)>,
}

impl PlusTree {
    pub fn one() -> Self {
        PlusTree::default()
    }

    pub fn x_pow(k: MultiIndex) -> Self {
        PlusTree {
            poly: k,
            factors: Vec::new(),
        }
    }

    pub fn x_i(i: usize) -> Self {
        Self::x_pow(MultiIndex::unit(i))
    }

    /// The single factor `I+_a(arg)`.
    pub fn planted(a: MultiIndex, arg: DecoratedTree) -> Self {
        PlusTree {
            poly: MultiIndex::zero(),
            factors: vec![(a, arg)],
        }
    }

    pub fn from_parts(poly: MultiIndex, mut factors: Vec<(MultiIndex, DecoratedTree)>) -> Self {
        factors.sort();
        PlusTree { poly, factors }
    }

    pub fn factors(&self) -> &[(MultiIndex, DecoratedTree)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.poly.is_zero() && self.factors.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product in the positive algebra: polynomials add, factors merge.
    pub fn product(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        PlusTree::from_parts(self.poly.add(&other.poly), factors)
    }

    pub fn degree_sym(&self) -> Degree {
        let mut d = Degree::int(self.poly.total() as i64);
        for (a, arg) in &self.factors {
            d += Degree::kernel(a.total()) + arg.degree_sym();
        }
        d
    }

    pub fn degree(&self, params: &Params) -> crate::Rat {
        self.degree_sym().eval(params)
    }

    /// True when every branch `I_a(τ_i)` has positive degree at `params`.
    pub fn branches_positive(&self, params: &Params) -> bool {
        let zero = crate::rat_int(0);
        self.factors.iter().all(|(a, arg)| {
            (Degree::kernel(a.total()) + arg.degree_sym()).eval(params) > zero
        })
    }

    /// Structural size used for recursion measures.
    pub fn arg_nodes(&self) -> usize {
        self.factors.iter().map(|(_, t)| t.node_count()).sum()
    }
}

impl fmt::Debug for PlusTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::print_plus(self))
    }
}

impl fmt::Display for PlusTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::print_plus(self))
    }
}

/// A multiset of decorated trees with the disjoint-union product.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Forest(Vec<DecoratedTree>);

impl Forest {
    pub fn empty() -> Self {
        Forest(Vec::new())
    }

    pub fn from_trees(mut trees: Vec<DecoratedTree>) -> Self {
        trees.sort();
        Forest(trees)
    }

    pub fn trees(&self) -> &[DecoratedTree] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Forest product: disjoint union.
    pub fn product(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Forest::from_trees(v)
    }

    pub fn degree_sym(&self) -> Degree {
        self.0
            .iter()
            .fold(Degree::ZERO, |acc, t| acc + t.degree_sym())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    fn params() -> Params {
        Params::new(rat(-3, 2), rat(2, 1), 1)
    }

    #[test]
    fn unit_is_neutral() {
        let t = DecoratedTree::planted(MultiIndex::zero(), DecoratedTree::xi());
        assert_eq!(DecoratedTree::one().product(&t), t);
        assert_eq!(t.product(&DecoratedTree::one()), t);
    }

    #[test]
    fn monomial_roots_add() {
        let x = DecoratedTree::x_i(0);
        assert_eq!(
            x.product(&x),
            DecoratedTree::x_pow(MultiIndex::new(vec![2]))
        );
    }

    #[test]
    fn product_matches_direct_construction() {
        // I_0(Xi) * Xi: root decoration 0, children {Kernel(0) -> Xi, Noise}.
        let t = DecoratedTree::planted(MultiIndex::zero(), DecoratedTree::xi())
            .product(&DecoratedTree::xi());
        let direct = DecoratedTree::from_parts(
            MultiIndex::zero(),
            Degree::ZERO,
            vec![
                (
                    EdgeLabel::Kernel(MultiIndex::zero()),
                    DecoratedTree::xi(),
                ),
                (EdgeLabel::Noise, DecoratedTree::one()),
            ],
        );
        assert_eq!(t, direct);
        assert_eq!(t.noise_count(), 2);
    }

    #[test]
    fn child_order_is_canonical() {
        let a = DecoratedTree::from_parts(
            MultiIndex::zero(),
            Degree::ZERO,
            vec![
                (EdgeLabel::Noise, DecoratedTree::one()),
                (
                    EdgeLabel::Kernel(MultiIndex::zero()),
                    DecoratedTree::xi(),
                ),
            ],
        );
        let b = DecoratedTree::from_parts(
            MultiIndex::zero(),
            Degree::ZERO,
            vec![
                (
                    EdgeLabel::Kernel(MultiIndex::zero()),
                    DecoratedTree::xi(),
                ),
                (EdgeLabel::Noise, DecoratedTree::one()),
            ],
        );
        assert_eq!(a, b);
    }

    #[test]
    fn degrees_evaluate() {
        let p = params();
        assert_eq!(DecoratedTree::xi().degree(&p), rat(-3, 2));
        assert_eq!(DecoratedTree::one().degree(&p), rat_int(0));
        // I_{e1}(Xi): alpha + beta - 1 = -1/2 at (-3/2, 2).
        let t = DecoratedTree::planted(MultiIndex::unit(0), DecoratedTree::xi());
        assert_eq!(t.degree(&p), rat(-1, 2));
    }

    #[test]
    fn degree_additive_under_product() {
        let p = params();
        let a = DecoratedTree::planted(MultiIndex::zero(), DecoratedTree::xi());
        let b = DecoratedTree::xi();
        assert_eq!(
            a.product(&b).degree(&p),
            a.degree(&p) + b.degree(&p)
        );
        assert_eq!(
            a.product(&b).noise_count(),
            a.noise_count() + b.noise_count()
        );
    }

    #[test]
    fn plus_degree() {
        // deg I+_0(Xi) at (-1/2, 2) = 3/2.
        let p = Params::new(rat(-1, 2), rat(2, 1), 1);
        let s = PlusTree::planted(MultiIndex::zero(), DecoratedTree::xi());
        assert_eq!(s.degree(&p), rat(3, 2));
        assert!(s.branches_positive(&p));
        // X^k alone has degree |k|.
        assert_eq!(
            PlusTree::x_pow(MultiIndex::new(vec![3])).degree(&p),
            rat_int(3)
        );
        // Product degree is the sum of factor degrees.
        let prod = s.product(&PlusTree::x_i(0));
        assert_eq!(prod.degree(&p), rat(5, 2));
    }

    #[test]
    fn forest_product_is_union() {
        let f = Forest::from_trees(vec![DecoratedTree::xi()]);
        let g = Forest::from_trees(vec![DecoratedTree::one()]);
        assert_eq!(f.product(&g).trees().len(), 2);
        assert!(Forest::empty().is_empty());
    }
}
