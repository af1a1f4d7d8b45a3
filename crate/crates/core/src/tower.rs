//! The renormalization tower generated by a preparation map.
//!
//! Everything here is computed by structural recursion and is independent of
//! a generated basis; membership of the outputs in a basis is checked by the
//! closure machinery in [`crate::rules`] and by the property suites.

use crate::degree::Degree;
use crate::error::CoreError;
use crate::hopf::HopfMemo;
use crate::index::{indices_with_total, MultiIndex};
use crate::lincomb::{PlusComb, PlusPlusComb, TreeComb, TreePlusComb};
use crate::prep::PrepMap;
use crate::tree::{DecoratedTree, PlusTree, TreeFactor};
use crate::Rat;
use num_bigint::BigInt;
use std::collections::HashMap;
use std::sync::Mutex;

/// Hard cap on Neumann iterations; reaching it means the triangular
/// structure is broken.
const NEUMANN_CAP: usize = 512;

pub struct Tower<'a> {
    hopf: &'a HopfMemo,
    prep: &'a PrepMap,
    m_times_memo: Mutex<HashMap<DecoratedTree, TreeComb>>,
    delta_times_memo: Mutex<HashMap<DecoratedTree, TreePlusComb>>,
    m_plus_memo: Mutex<HashMap<PlusTree, PlusComb>>,
}

impl<'a> Tower<'a> {
    pub fn new(hopf: &'a HopfMemo, prep: &'a PrepMap) -> Self {
        Tower {
            hopf,
            prep,
            m_times_memo: Mutex::new(HashMap::new()),
            delta_times_memo: Mutex::new(HashMap::new()),
            m_plus_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn hopf(&self) -> &HopfMemo {
        self.hopf
    }

    pub fn prep(&self) -> &PrepMap {
        self.prep
    }

    fn params(&self) -> &crate::degree::Params {
        self.hopf.params()
    }

    /// `R` itself.
    pub fn r(&self, t: &DecoratedTree) -> TreeComb {
        self.prep.apply(t, self.params())
    }

    /// The multiplicative half of the renormalization map:
    /// `M^×(I_a τ) = I_a(M^×(Rτ))`, fixing the generators.
    pub fn m_times(&self, t: &DecoratedTree) -> TreeComb {
        if let Some(v) = self.m_times_memo.lock().unwrap().get(t) {
            return v.clone();
        }
        let result = crate::lincomb::lift_multiplicative_tree(t, &mut |factor| match factor {
            TreeFactor::Poly(k) => TreeComb::from_basis(DecoratedTree::x_pow((*k).clone())),
            TreeFactor::Noise => TreeComb::from_basis(DecoratedTree::xi()),
            TreeFactor::Ext(e) => TreeComb::from_basis(DecoratedTree::ext_node(*e)),
            TreeFactor::Planted(a, arg) => {
                let inner = self.r(arg).map_basis(|s| self.m_times(s));
                inner.map_basis(|s| {
                    TreeComb::from_basis(DecoratedTree::planted((*a).clone(), s.clone()))
                })
            }
        });
        self.m_times_memo
            .lock()
            .unwrap()
            .insert(t.clone(), result.clone());
        result
    }

    /// The renormalization map `M_R = M^× ∘ R`.
    pub fn m_r(&self, t: &DecoratedTree) -> TreeComb {
        self.r(t).map_basis(|s| self.m_times(s))
    }

    pub fn m_r_comb(&self, u: &TreeComb) -> TreeComb {
        u.map_basis(|t| self.m_r(t))
    }

    /// The multiplicative splitting `δ^× : T → T ⊗ T+`.
    pub fn delta_times(&self, t: &DecoratedTree) -> TreePlusComb {
        if let Some(v) = self.delta_times_memo.lock().unwrap().get(t) {
            return v.clone();
        }
        let result = crate::lincomb::lift_multiplicative_tree(t, &mut |factor| match factor {
            TreeFactor::Poly(k) => {
                TreePlusComb::from_basis((DecoratedTree::x_pow((*k).clone()), PlusTree::one()))
            }
            TreeFactor::Noise => TreePlusComb::from_basis((DecoratedTree::xi(), PlusTree::one())),
            TreeFactor::Ext(e) => {
                TreePlusComb::from_basis((DecoratedTree::ext_node(*e), PlusTree::one()))
            }
            TreeFactor::Planted(a, arg) => self.delta_times_planted(a, arg),
        });
        self.delta_times_memo
            .lock()
            .unwrap()
            .insert(t.clone(), result.clone());
        result
    }

    fn delta_times_planted(&self, a: &MultiIndex, arg: &DecoratedTree) -> TreePlusComb {
        let params = self.params();
        let inner = self.r(arg).map_basis(|s| self.delta_times(s));
        let lower = (Degree::kernel(a.total()) + arg.degree_sym()).eval(params);
        let mut out = TreePlusComb::zero();
        for ((left, p), c) in inner.iter() {
            out.add_term(
                (DecoratedTree::planted(a.clone(), left.clone()), p.clone()),
                c.clone(),
            );
            // − Σ_{|ℓ| ≥ deg(I_a τ)} X^ℓ/ℓ! ⊗ I+_{a+ℓ}(σ)·p, truncated by the
            // positivity of the created branch.
            let upper = (Degree::kernel(a.total()) + left.degree_sym()).eval(params);
            let mut total: u32 = 0;
            loop {
                let tr = Rat::from_integer(BigInt::from(total));
                if tr >= upper {
                    break;
                }
                if tr >= lower {
                    for l in indices_with_total(params.dim, total) {
                        let coef = -(c.clone() * l.inv_factorial());
                        let planted = PlusTree::planted(a.add(&l), left.clone());
                        out.add_term((DecoratedTree::x_pow(l.clone()), planted.product(p)), coef);
                    }
                }
                total += 1;
            }
        }
        out
    }

    /// The splitting `δ_R = δ^× ∘ R`.
    pub fn delta_r(&self, t: &DecoratedTree) -> TreePlusComb {
        self.r(t).map_basis(|s| self.delta_times(s))
    }

    /// `δ_R` recomputed through its defining relation and compared against
    /// the factorized route; any discrepancy is an implementation bug.
    pub fn delta_r_checked(&self, t: &DecoratedTree) -> Result<TreePlusComb, CoreError> {
        let fast = self.delta_r(t);
        let lhs = self.theta(&fast);
        let mut rhs = TreePlusComb::zero();
        for ((sigma, p), c) in self.hopf.delta(t).iter() {
            let ms = self.m_r(sigma);
            let mp = self.m_plus(p);
            for (s1, c1) in ms.iter() {
                for (p1, c2) in mp.iter() {
                    rhs.add_term((s1.clone(), p1.clone()), c.clone() * c1 * c2);
                }
            }
        }
        if lhs != rhs {
            return Err(CoreError::CrossCheck(format!(
                "defining relation for the splitting fails on {t}"
            )));
        }
        Ok(fast)
    }

    /// The positive renormalization map `M+`: multiplicative, fixes
    /// monomials, `M+(I+_a τ) = M+(I+_a ⊗ Id) δ_R τ`.
    pub fn m_plus(&self, p: &PlusTree) -> PlusComb {
        if let Some(v) = self.m_plus_memo.lock().unwrap().get(p) {
            return v.clone();
        }
        let result = crate::lincomb::lift_multiplicative_plus(
            p,
            &mut |i| PlusComb::from_basis(PlusTree::x_i(i)),
            &mut |a, arg| {
                let mut out = PlusComb::zero();
                for ((left, right), c) in self.delta_r(arg).iter() {
                    out.add_term(
                        PlusTree::planted(a.clone(), left.clone()).product(right),
                        c.clone(),
                    );
                }
                out
            },
        );
        self.m_plus_memo
            .lock()
            .unwrap()
            .insert(p.clone(), result.clone());
        result
    }

    pub fn m_plus_comb(&self, u: &PlusComb) -> PlusComb {
        u.map_basis(|p| self.m_plus(p))
    }

    /// `Θ = (Id ⊗ M+)(Δ ⊗ Id)` on `T ⊗ T+`.
    pub fn theta(&self, u: &TreePlusComb) -> TreePlusComb {
        let mut out = TreePlusComb::zero();
        for ((sigma, tau), c) in u.iter() {
            for ((s1, p), c2) in self.hopf.delta(sigma).iter() {
                out.add_term((s1.clone(), p.product(tau)), c.clone() * c2);
            }
        }
        out
    }

    /// Closed-form inverse of `Θ` through the antipode.
    pub fn theta_inv_closed(&self, u: &TreePlusComb) -> TreePlusComb {
        let mut out = TreePlusComb::zero();
        for ((sigma, tau), c) in u.iter() {
            for ((s1, p), c2) in self.hopf.delta(sigma).iter() {
                let sp = self.hopf.antipode(p);
                for (b, cb) in sp.iter() {
                    out.add_term((s1.clone(), b.product(tau)), c.clone() * c2 * cb);
                }
            }
        }
        out
    }

    /// Neumann-series inverse of `Θ`, terminating by nilpotence.
    pub fn theta_inv_neumann(&self, u: &TreePlusComb) -> Result<TreePlusComb, CoreError> {
        let mut acc = u.clone();
        let mut term = u.clone();
        for _ in 0..NEUMANN_CAP {
            // term_{k+1} = -N(term_k) with N = Θ - Id.
            let minus_n = &term - &self.theta(&term);
            if minus_n.is_zero() {
                return Ok(acc);
            }
            acc.add_assign(&minus_n);
            term = minus_n;
        }
        Err(CoreError::NeumannDiverged(NEUMANN_CAP))
    }

    /// `Θ+ = (Id ⊗ M+)(Δ+ ⊗ Id)` on `T+ ⊗ T+`.
    pub fn theta_plus(&self, u: &PlusPlusComb) -> PlusPlusComb {
        let mut out = PlusPlusComb::zero();
        for ((sigma, tau), c) in u.iter() {
            for ((s1, p), c2) in self.hopf.delta_plus(sigma).iter() {
                out.add_term((s1.clone(), p.product(tau)), c.clone() * c2);
            }
        }
        out
    }

    pub fn theta_plus_inv_closed(&self, u: &PlusPlusComb) -> PlusPlusComb {
        let mut out = PlusPlusComb::zero();
        for ((sigma, tau), c) in u.iter() {
            for ((s1, p), c2) in self.hopf.delta_plus(sigma).iter() {
                let sp = self.hopf.antipode(p);
                for (b, cb) in sp.iter() {
                    out.add_term((s1.clone(), b.product(tau)), c.clone() * c2 * cb);
                }
            }
        }
        out
    }

    pub fn theta_plus_inv_neumann(&self, u: &PlusPlusComb) -> Result<PlusPlusComb, CoreError> {
        let mut acc = u.clone();
        let mut term = u.clone();
        for _ in 0..NEUMANN_CAP {
            let minus_n = &term - &self.theta_plus(&term);
            if minus_n.is_zero() {
                return Ok(acc);
            }
            acc.add_assign(&minus_n);
            term = minus_n;
        }
        Err(CoreError::NeumannDiverged(NEUMANN_CAP))
    }

    /// `S+ M+ S+` as a map on the positive algebra.
    pub fn conjugated_m_plus(&self, p: &PlusTree) -> PlusComb {
        let s = self.hopf.antipode(p);
        let ms = s.map_basis(|q| self.m_plus(q));
        ms.map_basis(|q| self.hopf.antipode(q))
    }

    /// The positive splitting: solves
    /// `(Id ⊗ M+)(Δ+ ⊗ Id) δ+_R = (S+ M+ S+ ⊗ M+) Δ+`.
    pub fn delta_r_plus(&self, p: &PlusTree) -> PlusPlusComb {
        self.theta_plus_inv_closed(&self.delta_r_plus_rhs(p))
    }

    fn delta_r_plus_rhs(&self, p: &PlusTree) -> PlusPlusComb {
        let mut rhs = PlusPlusComb::zero();
        for ((p1, p2), c) in self.hopf.delta_plus(p).iter() {
            let left = self.conjugated_m_plus(p1);
            let right = self.m_plus(p2);
            for (l, cl) in left.iter() {
                for (r, cr) in right.iter() {
                    rhs.add_term((l.clone(), r.clone()), c.clone() * cl * cr);
                }
            }
        }
        rhs
    }

    /// Verifies the defining relation of the positive splitting after
    /// solving it.
    pub fn delta_r_plus_checked(&self, p: &PlusTree) -> Result<PlusPlusComb, CoreError> {
        let sol = self.delta_r_plus(p);
        if self.theta_plus(&sol) != self.delta_r_plus_rhs(p) {
            return Err(CoreError::CrossCheck(format!(
                "positive splitting does not solve its defining relation on {p}"
            )));
        }
        Ok(sol)
    }
}

/// Upper-triangularity audit: every left slot of `δ_R τ` has degree at least
/// `deg τ`.
pub fn audit_upper_triangular(tower: &Tower<'_>, trees: &[DecoratedTree]) -> Vec<(String, String)> {
    let params = tower.hopf().params();
    let mut out = Vec::new();
    for t in trees {
        let dt = t.degree(params);
        for ((left, _), _) in tower.delta_r(t).iter() {
            if left.degree(params) < dt {
                out.push((t.to_string(), left.to_string()));
            }
        }
    }
    out
}
