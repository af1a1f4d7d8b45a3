//! Exact formal linear combinations over canonical bases.
//!
//! A combination is a map from basis elements to nonzero rational
//! coefficients. The container is an ordered map so that iteration, printing
//! and equality are deterministic without a separate normalization pass.

use crate::tree::{DecoratedTree, PlusTree};
use crate::Rat;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A basis with a distinguished unit element.
pub trait BasisElement: Clone + Ord {
    fn unit() -> Self;
    fn is_unit(&self) -> bool {
        *self == Self::unit()
    }
}

/// A basis carrying a commutative product (used by multiplicative lifts).
pub trait MulBasis: BasisElement {
    fn mul_basis(&self, other: &Self) -> Self;
}

impl BasisElement for DecoratedTree {
    fn unit() -> Self {
        DecoratedTree::one()
    }
}

impl MulBasis for DecoratedTree {
    fn mul_basis(&self, other: &Self) -> Self {
        self.product(other)
    }
}

impl BasisElement for PlusTree {
    fn unit() -> Self {
        PlusTree::one()
    }
}

impl MulBasis for PlusTree {
    fn mul_basis(&self, other: &Self) -> Self {
        self.product(other)
    }
}

impl<A: BasisElement, B: BasisElement> BasisElement for (A, B) {
    fn unit() -> Self {
        (A::unit(), B::unit())
    }
}

impl<A: MulBasis, B: MulBasis> MulBasis for (A, B) {
    fn mul_basis(&self, other: &Self) -> Self {
        (self.0.mul_basis(&other.0), self.1.mul_basis(&other.1))
    }
}

impl<A: BasisElement, B: BasisElement, C: BasisElement> BasisElement for (A, B, C) {
    fn unit() -> Self {
        (A::unit(), B::unit(), C::unit())
    }
}

/// Finite formal linear combination with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct LinComb<B: BasisElement> {
    terms: BTreeMap<B, Rat>,
}

pub type TreeComb = LinComb<DecoratedTree>;
pub type PlusComb = LinComb<PlusTree>;
pub type TreePlusComb = LinComb<(DecoratedTree, PlusTree)>;
pub type PlusPlusComb = LinComb<(PlusTree, PlusTree)>;
pub type TreePlusPlusComb = LinComb<(DecoratedTree, PlusTree, PlusTree)>;
pub type PlusPlusPlusComb = LinComb<(PlusTree, PlusTree, PlusTree)>;

impl<B: BasisElement> LinComb<B> {
    pub fn zero() -> Self {
        LinComb {
            terms: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        Self::from_basis(B::unit())
    }

    pub fn from_basis(b: B) -> Self {
        Self::from_term(b, Rat::from_integer(1.into()))
    }

    pub fn from_term(b: B, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(b, c);
        }
        LinComb { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (B, Rat)>) -> Self {
        let mut out = Self::zero();
        for (b, c) in it {
            out.add_term(b, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&B, &Rat)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &B> {
        self.terms.keys()
    }

    pub fn coeff(&self, b: &B) -> Rat {
        self.terms.get(b).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, b: B, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(b);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (b, c) in other.iter() {
            self.add_term(b.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb {
            terms: self
                .terms
                .iter()
                .map(|(b, v)| (b.clone(), v.clone() * c))
                .collect(),
        }
    }

    /// Coefficient of the unit basis element.
    pub fn counit(&self) -> Rat {
        self.coeff(&B::unit())
    }

    /// Linear lift of a basis map.
    pub fn map_basis<C: BasisElement>(&self, f: impl Fn(&B) -> LinComb<C>) -> LinComb<C> {
        let mut out = LinComb::zero();
        for (b, c) in self.iter() {
            out.add_assign(&f(b).scale(c));
        }
        out
    }

    /// Linear lift of a basis map that can fail.
    pub fn try_map_basis<C: BasisElement, E>(
        &self,
        mut f: impl FnMut(&B) -> Result<LinComb<C>, E>,
    ) -> Result<LinComb<C>, E> {
        let mut out = LinComb::zero();
        for (b, c) in self.iter() {
            out.add_assign(&f(b)?.scale(c));
        }
        Ok(out)
    }
}

impl<B: MulBasis> LinComb<B> {
    /// Bilinear product extending the basis product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                out.add_term(a.mul_basis(b), ca.clone() * cb);
            }
        }
        out
    }
}

/// Tensor product of combinations.
pub fn tensor<A: BasisElement, B: BasisElement>(
    u: &LinComb<A>,
    v: &LinComb<B>,
) -> LinComb<(A, B)> {
    let mut out = LinComb::zero();
    for (a, ca) in u.iter() {
        for (b, cb) in v.iter() {
            out.add_term((a.clone(), b.clone()), ca.clone() * cb);
        }
    }
    out
}

/// Multiplication operator on the positive algebra: collapses a two-fold
/// tensor to the product of its slots.
pub fn m_plus(u: &PlusPlusComb) -> PlusComb {
    let mut out = PlusComb::zero();
    for ((a, b), c) in u.iter() {
        out.add_term(a.product(b), c.clone());
    }
    out
}

impl<B: BasisElement> Add for &LinComb<B> {
    type Output = LinComb<B>;
    fn add(self, other: Self) -> LinComb<B> {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }
}

impl<B: BasisElement> Sub for &LinComb<B> {
    type Output = LinComb<B>;
    fn sub(self, other: Self) -> LinComb<B> {
        let mut out = self.clone();
        for (b, c) in other.iter() {
            out.add_term(b.clone(), -c.clone());
        }
        out
    }
}

impl<B: BasisElement> Neg for &LinComb<B> {
    type Output = LinComb<B>;
    fn neg(self) -> LinComb<B> {
        self.scale(&-Rat::from_integer(1.into()))
    }
}

impl<B: BasisElement> Mul<&Rat> for &LinComb<B> {
    type Output = LinComb<B>;
    fn mul(self, c: &Rat) -> LinComb<B> {
        self.scale(c)
    }
}

/// Pretty printer used by `Debug`; the JSON form lives in [`crate::serial`].
pub trait BasisDisplay {
    fn basis_text(&self) -> String;
}

impl BasisDisplay for DecoratedTree {
    fn basis_text(&self) -> String {
        crate::grammar::print_tree(self)
    }
}

impl BasisDisplay for PlusTree {
    fn basis_text(&self) -> String {
        crate::grammar::print_plus(self)
    }
}

impl<A: BasisDisplay, B: BasisDisplay> BasisDisplay for (A, B) {
    fn basis_text(&self) -> String {
        format!("{} \u{2297} {}", self.0.basis_text(), self.1.basis_text())
    }
}

impl<A: BasisDisplay, B: BasisDisplay, C: BasisDisplay> BasisDisplay for (A, B, C) {
    fn basis_text(&self) -> String {
        format!(
            "{} \u{2297} {} \u{2297} {}",
            self.0.basis_text(),
            self.1.basis_text(),
            self.2.basis_text()
        )
    }
}

impl<B: BasisElement + BasisDisplay> fmt::Debug for LinComb<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(b, c)| format!("({})*{}", c, b.basis_text()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Multiplicative lift over decorated trees.
///
/// `f` gives the image of each generator factor; the lift multiplies images
/// with the bilinear product of the target algebra. Monomial factors are
/// resolved coordinate-wise, so `f` only sees `X_i` exponents through
/// repeated multiplication.
pub fn lift_multiplicative_tree<T: MulBasis>(
    tree: &DecoratedTree,
    f: &mut impl FnMut(&crate::tree::TreeFactor<'_>) -> LinComb<T>,
) -> LinComb<T> {
    let mut acc = LinComb::<T>::unit();
    for factor in tree.factors() {
        let image = match factor {
            crate::tree::TreeFactor::Poly(k) => {
                let mut m = LinComb::<T>::unit();
                for i in 0..k.width() {
                    let gi = f(&crate::tree::TreeFactor::Poly(&MultiIndexGuard::unit(i)));
                    for _ in 0..k.entry(i) {
                        m = m.mul(&gi);
                    }
                }
                m
            }
            other => f(&other),
        };
        acc = acc.mul(&image);
    }
    acc
}

// Local alias so the closure sees a canonical `X_i` factor.
use crate::index::MultiIndex as MultiIndexGuard;

/// Multiplicative lift over positive-basis elements.
pub fn lift_multiplicative_plus<T: MulBasis>(
    p: &PlusTree,
    var_image: &mut impl FnMut(usize) -> LinComb<T>,
    planted_image: &mut impl FnMut(&MultiIndexGuard, &DecoratedTree) -> LinComb<T>,
) -> LinComb<T> {
    let mut acc = LinComb::<T>::unit();
    for i in 0..p.poly.width() {
        let gi = var_image(i);
        for _ in 0..p.poly.entry(i) {
            acc = acc.mul(&gi);
        }
    }
    for (a, arg) in p.factors() {
        acc = acc.mul(&planted_image(a, arg));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeFactor;
    use crate::{rat, rat_int};

    fn xi() -> DecoratedTree {
        DecoratedTree::xi()
    }

    #[test]
    fn zero_is_neutral_and_coeffs_merge() {
        let u = TreeComb::from_term(xi(), rat(1, 2));
        let z = TreeComb::zero();
        assert_eq!(&u + &z, u);
        // (1/2)Xi + (1/2)Xi = Xi.
        assert_eq!(&u + &u, TreeComb::from_basis(xi()));
        // Cancellation drops the term entirely.
        assert!((&u - &u).is_zero());
    }

    #[test]
    fn tensor_is_bilinear_on_coefficients() {
        let u = TreeComb::from_term(xi(), rat(2, 3));
        let v = PlusComb::from_term(PlusTree::one(), rat(3, 5));
        let t = tensor(&u, &v);
        assert_eq!(t.coeff(&(xi(), PlusTree::one())), rat(2, 5));
    }

    #[test]
    fn counit_examples() {
        assert_eq!(TreeComb::unit().counit(), rat_int(1));
        assert_eq!(TreeComb::from_basis(xi()).counit(), rat_int(0));
        let mut u = TreeComb::from_term(DecoratedTree::one(), rat_int(3));
        u.add_term(xi(), rat_int(2));
        assert_eq!(u.counit(), rat_int(3));
    }

    #[test]
    fn m_plus_merges_factors() {
        let s = PlusTree::planted(MultiIndexGuard::zero(), xi());
        // 1 (x) s -> s.
        let u = tensor(&PlusComb::unit(), &PlusComb::from_basis(s.clone()));
        assert_eq!(m_plus(&u), PlusComb::from_basis(s.clone()));
        // X^k (x) X^m -> X^{k+m}.
        let xk = PlusTree::x_pow(MultiIndexGuard::new(vec![2]));
        let xm = PlusTree::x_pow(MultiIndexGuard::new(vec![1]));
        let u = tensor(&PlusComb::from_basis(xk), &PlusComb::from_basis(xm));
        assert_eq!(
            m_plus(&u),
            PlusComb::from_basis(PlusTree::x_pow(MultiIndexGuard::new(vec![3])))
        );
    }

    #[test]
    fn linear_lift_of_identity() {
        let mut u = TreeComb::from_term(xi(), rat(7, 2));
        u.add_term(DecoratedTree::one(), rat(-1, 3));
        let lifted = u.map_basis(|b| TreeComb::from_basis(b.clone()));
        assert_eq!(lifted, u);
    }

    #[test]
    fn multiplicative_lift_matches_direct_recursion() {
        // f doubles noise factors and fixes everything else; on a 3-factor
        // product the lift must equal the product of the factor images.
        let t = crate::grammar::parse_tree("X^(2) I[Xi] Xi").unwrap();
        let mut f = |factor: &TreeFactor<'_>| match factor {
            TreeFactor::Noise => TreeComb::from_term(xi(), rat_int(2)),
            TreeFactor::Poly(k) => TreeComb::from_basis(DecoratedTree::x_pow((*k).clone())),
            TreeFactor::Ext(e) => TreeComb::from_basis(DecoratedTree::ext_node(*e)),
            TreeFactor::Planted(a, arg) => {
                TreeComb::from_basis(DecoratedTree::planted((*a).clone(), (*arg).clone()))
            }
        };
        let lifted = lift_multiplicative_tree(&t, &mut f);
        assert_eq!(lifted, TreeComb::from_term(t.clone(), rat_int(2)));

        // On a single generator the multiplicative lift agrees with the
        // linear lift.
        let g = TreeComb::from_basis(xi());
        assert_eq!(
            lift_multiplicative_tree(&xi(), &mut f),
            g.map_basis(|b| TreeComb::from_term(b.clone(), rat_int(2)))
        );
    }

    #[test]
    fn exactness_round_trip() {
        let u = TreeComb::from_terms([
            (xi(), rat(355, 113)),
            (DecoratedTree::one(), rat(-22, 7)),
        ]);
        let v = TreeComb::from_terms([(xi(), rat(-1, 3))]);
        assert_eq!(&(&u + &v) - &v, u);
    }
}
