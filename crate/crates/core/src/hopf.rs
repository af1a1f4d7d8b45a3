//! The coaction on trees, the positive coproduct and the antipode.
//!
//! All three maps are computed by structural recursion with memoization and
//! are independent of any generated basis; closure against a basis is
//! checked separately by [`crate::rules`]. Infinite index sums terminate
//! through the positivity convention: a created branch `I+_b(σ)` with
//! non-positive degree is the zero element of the positive algebra and is
//! dropped.

use crate::degree::{Degree, Params};
use crate::index::{indices_below, MultiIndex};
use crate::lincomb::{
    lift_multiplicative_plus, lift_multiplicative_tree, LinComb, PlusComb, PlusPlusComb,
    TreePlusComb,
};
use crate::tree::{DecoratedTree, PlusTree, TreeFactor};
use crate::Rat;
use std::collections::HashMap;
use std::sync::Mutex;

/// Memoized Hopf-structure computations at fixed `(α, β, d)`.
pub struct HopfMemo {
    params: Params,
    delta: Mutex<HashMap<DecoratedTree, TreePlusComb>>,
    delta_plus: Mutex<HashMap<PlusTree, PlusPlusComb>>,
    antipode: Mutex<HashMap<PlusTree, PlusComb>>,
}

impl HopfMemo {
    pub fn new(params: Params) -> Self {
        HopfMemo {
            params,
            delta: Mutex::new(HashMap::new()),
            delta_plus: Mutex::new(HashMap::new()),
            antipode: Mutex::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// The coaction `Δ : T → T ⊗ T+`.
    pub fn delta(&self, t: &DecoratedTree) -> TreePlusComb {
        if let Some(v) = self.delta.lock().unwrap().get(t) {
            return v.clone();
        }
        let result = lift_multiplicative_tree(t, &mut |factor| match factor {
            TreeFactor::Poly(k) => {
                // Only X_i reaches here; X^k is split coordinate-wise.
                let x = DecoratedTree::x_pow((*k).clone());
                let xp = PlusTree::x_pow((*k).clone());
                let mut out = TreePlusComb::from_basis((x, PlusTree::one()));
                out.add_term((DecoratedTree::one(), xp), crate::rat_int(1));
                out
            }
            TreeFactor::Noise => {
                TreePlusComb::from_basis((DecoratedTree::xi(), PlusTree::one()))
            }
            TreeFactor::Ext(e) => {
                TreePlusComb::from_basis((DecoratedTree::ext_node(*e), PlusTree::one()))
            }
            TreeFactor::Planted(a, arg) => self.delta_planted(a, arg),
        });
        self.delta
            .lock()
            .unwrap()
            .insert(t.clone(), result.clone());
        result
    }

    fn delta_planted(&self, a: &MultiIndex, arg: &DecoratedTree) -> TreePlusComb {
        let d_arg = self.delta(arg);
        let mut out = TreePlusComb::zero();
        // (I_a ⊗ Id) Δτ
        for ((sigma, p), c) in d_arg.iter() {
            out.add_term(
                (DecoratedTree::planted(a.clone(), sigma.clone()), p.clone()),
                c.clone(),
            );
        }
        // Σ_{|ℓ+m| < deg(I_a τ)} X^ℓ/ℓ! ⊗ X^m/m! · I+_{a+ℓ+m}(τ)
        let bound = (Degree::kernel(a.total()) + arg.degree_sym()).eval(&self.params);
        for s in indices_below(self.params.dim, &bound) {
            let planted_plus = PlusTree::planted(a.add(&s), arg.clone());
            for l in s.sub_indices() {
                let m = s.checked_sub(&l).expect("sub-index");
                let coef: Rat = l.inv_factorial() * m.inv_factorial();
                let left = DecoratedTree::x_pow(l.clone());
                let right = PlusTree::x_pow(m).product(&planted_plus);
                out.add_term((left, right), coef);
            }
        }
        out
    }

    /// The positive coproduct `Δ+ : T+ → T+ ⊗ T+`.
    pub fn delta_plus(&self, p: &PlusTree) -> PlusPlusComb {
        if let Some(v) = self.delta_plus.lock().unwrap().get(p) {
            return v.clone();
        }
        let result = lift_multiplicative_plus(
            p,
            &mut |i| {
                let x = PlusTree::x_i(i);
                let mut out = PlusPlusComb::from_basis((x.clone(), PlusTree::one()));
                out.add_term((PlusTree::one(), x), crate::rat_int(1));
                out
            },
            &mut |a, arg| self.delta_plus_planted(a, arg),
        );
        self.delta_plus
            .lock()
            .unwrap()
            .insert(p.clone(), result.clone());
        result
    }

    fn delta_plus_planted(&self, a: &MultiIndex, arg: &DecoratedTree) -> PlusPlusComb {
        let d_arg = self.delta(arg);
        let mut out =
            PlusPlusComb::from_basis((PlusTree::one(), PlusTree::planted(a.clone(), arg.clone())));
        for ((sigma, p), c) in d_arg.iter() {
            // Positivity: deg I+_{a+ℓ}(σ) = deg(I_a σ) − |ℓ| > 0.
            let bound = (Degree::kernel(a.total()) + sigma.degree_sym()).eval(&self.params);
            for l in indices_below(self.params.dim, &bound) {
                let sign = if l.total() % 2 == 0 { 1 } else { -1 };
                let coef = c.clone() * l.inv_factorial() * crate::rat_int(sign);
                let left = PlusTree::planted(a.add(&l), sigma.clone());
                let right = PlusTree::x_pow(l.clone()).product(p);
                out.add_term((left, right), coef);
            }
        }
        out
    }

    /// The antipode `S+ : T+ → T+`.
    pub fn antipode(&self, p: &PlusTree) -> PlusComb {
        if let Some(v) = self.antipode.lock().unwrap().get(p) {
            return v.clone();
        }
        let result = lift_multiplicative_plus(
            p,
            &mut |i| PlusComb::from_term(PlusTree::x_i(i), crate::rat_int(-1)),
            &mut |a, arg| self.antipode_planted(a, arg),
        );
        self.antipode
            .lock()
            .unwrap()
            .insert(p.clone(), result.clone());
        result
    }

    fn antipode_planted(&self, a: &MultiIndex, arg: &DecoratedTree) -> PlusComb {
        let d_arg = self.delta(arg);
        let mut out = PlusComb::zero();
        for ((sigma, p), c) in d_arg.iter() {
            let bound = (Degree::kernel(a.total()) + sigma.degree_sym()).eval(&self.params);
            if bound <= crate::rat_int(0) {
                continue;
            }
            let s_p = self.antipode(p);
            for l in indices_below(self.params.dim, &bound) {
                let coef = -(c.clone() * l.inv_factorial());
                let left = PlusTree::planted(a.add(&l), sigma.clone());
                let monomial = PlusTree::x_pow(l.clone());
                for (sp, csp) in s_p.iter() {
                    out.add_term(
                        left.product(&monomial).product(sp),
                        coef.clone() * csp,
                    );
                }
            }
        }
        out
    }

    /// Applies the character `g ∘ S+` pattern: the convolution inverse on a
    /// combination, useful for tests.
    pub fn antipode_comb(&self, u: &PlusComb) -> PlusComb {
        u.map_basis(|p| self.antipode(p))
    }

    /// `(Δ ⊗ Id)Δ` on a tree, as a triple tensor.
    pub fn delta_then_left(&self, t: &DecoratedTree) -> LinComb<(DecoratedTree, PlusTree, PlusTree)> {
        let mut out = LinComb::zero();
        for ((sigma, p), c) in self.delta(t).iter() {
            for ((s2, p2), c2) in self.delta(sigma).iter() {
                out.add_term((s2.clone(), p2.clone(), p.clone()), c.clone() * c2);
            }
        }
        out
    }

    /// `(Id ⊗ Δ+)Δ` on a tree, as a triple tensor.
    pub fn delta_then_right(
        &self,
        t: &DecoratedTree,
    ) -> LinComb<(DecoratedTree, PlusTree, PlusTree)> {
        let mut out = LinComb::zero();
        for ((sigma, p), c) in self.delta(t).iter() {
            for ((p1, p2), c2) in self.delta_plus(p).iter() {
                out.add_term((sigma.clone(), p1.clone(), p2.clone()), c.clone() * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_plus, parse_tree};
    use crate::lincomb::m_plus;
    use crate::{rat, rat_int};

    fn memo_half() -> HopfMemo {
        // (α, β) = (−1/2, 2), d = 1.
        HopfMemo::new(Params::new(rat(-1, 2), rat(2, 1), 1))
    }

    #[test]
    fn delta_primitives() {
        let h = memo_half();
        let xi = DecoratedTree::xi();
        assert_eq!(
            h.delta(&xi),
            TreePlusComb::from_basis((xi.clone(), PlusTree::one()))
        );
        let x = DecoratedTree::x_i(0);
        let mut expect = TreePlusComb::from_basis((x.clone(), PlusTree::one()));
        expect.add_term((DecoratedTree::one(), PlusTree::x_i(0)), rat_int(1));
        assert_eq!(h.delta(&x), expect);
        assert_eq!(
            h.delta(&DecoratedTree::one()),
            TreePlusComb::from_basis((DecoratedTree::one(), PlusTree::one()))
        );
    }

    #[test]
    fn delta_planted_hand_expansion() {
        // Δ I_0(Xi) at (−1/2,2), d=1, deg = 3/2:
        //   I_0(Xi)⊗1 + 1⊗I+_0(Xi) + X⊗I+_1(Xi) + 1⊗X·I+_1(Xi).
        let h = memo_half();
        let t = parse_tree("I[Xi]").unwrap();
        let i0 = parse_plus("I+[Xi]").unwrap();
        let i1 = parse_plus("I+_(1)[Xi]").unwrap();
        let expect = TreePlusComb::from_terms([
            ((t.clone(), PlusTree::one()), rat_int(1)),
            ((DecoratedTree::one(), i0), rat_int(1)),
            ((DecoratedTree::x_i(0), i1.clone()), rat_int(1)),
            (
                (DecoratedTree::one(), PlusTree::x_i(0).product(&i1)),
                rat_int(1),
            ),
        ]);
        assert_eq!(h.delta(&t), expect);
    }

    #[test]
    fn delta_plus_hand_expansion() {
        // Δ+ I+_0(Xi) = I+_0(Xi)⊗1 − I+_1(Xi)⊗X + 1⊗I+_0(Xi).
        let h = memo_half();
        let s = parse_plus("I+[Xi]").unwrap();
        let i1 = parse_plus("I+_(1)[Xi]").unwrap();
        let expect = PlusPlusComb::from_terms([
            ((s.clone(), PlusTree::one()), rat_int(1)),
            ((i1, PlusTree::x_i(0)), rat_int(-1)),
            ((PlusTree::one(), s.clone()), rat_int(1)),
        ]);
        assert_eq!(h.delta_plus(&s), expect);
    }

    #[test]
    fn delta_plus_monomial_is_binomial() {
        let h = memo_half();
        let x2 = PlusTree::x_pow(MultiIndex::new(vec![2]));
        let d = h.delta_plus(&x2);
        // (X⊗1 + 1⊗X)^2 = X^2⊗1 + 2X⊗X + 1⊗X^2.
        assert_eq!(d.coeff(&(x2.clone(), PlusTree::one())), rat_int(1));
        assert_eq!(
            d.coeff(&(PlusTree::x_i(0), PlusTree::x_i(0))),
            rat_int(2)
        );
        assert_eq!(d.coeff(&(PlusTree::one(), x2.clone())), rat_int(1));
        assert_eq!(d.len(), 3);
    }

    /// Independent antipode oracle: solve the convolution identity
    /// `M+(S ⊗ Id)Δ+σ = ε(σ)1` term by term, which only uses Δ+.
    fn antipode_oracle(h: &HopfMemo, p: &PlusTree, cache: &mut HashMap<PlusTree, PlusComb>) -> PlusComb {
        if p.is_one() {
            return PlusComb::unit();
        }
        if let Some(v) = cache.get(p) {
            return v.clone();
        }
        // Δ+σ = σ⊗1 + Σ' σ1⊗σ2  (σ1 ≠ σ)  ⟹  Sσ = −Σ' S(σ1)·σ2.
        let mut acc = PlusComb::zero();
        for ((p1, p2), c) in h.delta_plus(p).iter() {
            if p1 == p {
                continue;
            }
            let s1 = antipode_oracle(h, p1, cache);
            for (b, cb) in s1.iter() {
                acc.add_term(b.product(p2), -(c.clone() * cb));
            }
        }
        cache.insert(p.clone(), acc.clone());
        acc
    }

    #[test]
    fn antipode_matches_convolution_oracle() {
        let h = memo_half();
        let mut cache = HashMap::new();
        for expr in ["X", "X^(2)", "I+[Xi]", "I+_(1)[Xi]", "X I+[Xi]", "I+[I[Xi]]"] {
            let p = parse_plus(expr).unwrap();
            assert_eq!(
                h.antipode(&p),
                antipode_oracle(&h, &p, &mut cache),
                "antipode mismatch on {expr}"
            );
        }
        // Forced by the axioms: S+X = −X.
        assert_eq!(
            h.antipode(&PlusTree::x_i(0)),
            PlusComb::from_term(PlusTree::x_i(0), rat_int(-1))
        );
        assert_eq!(h.antipode(&PlusTree::one()), PlusComb::unit());
    }

    #[test]
    fn char_antipode_on_samples() {
        let h = memo_half();
        for expr in ["I+[Xi]", "X I+_(1)[Xi]", "I+[I[Xi] Xi]", "X^(2)"] {
            let p = parse_plus(expr).unwrap();
            let mut conv = PlusComb::zero();
            for ((a, b), c) in h.delta_plus(&p).iter() {
                let sa = h.antipode(a);
                for (t, ct) in sa.iter() {
                    conv.add_term(t.product(b), c.clone() * ct);
                }
            }
            let expect = if p.is_one() {
                PlusComb::unit()
            } else {
                PlusComb::zero()
            };
            assert_eq!(conv, expect, "convolution failed on {expr}");
        }
        let _ = m_plus(&PlusPlusComb::zero());
    }
}
