//! Rule-driven basis generation with closure diagnostics.
//!
//! A spec describes which node shapes the equation produces. Generation runs
//! in two phases: a fixed-point production of all rule-conforming trees
//! within the degree and noise cutoffs, followed by a closure extension that
//! adds every tree and positive element reachable from the structure maps
//! (coaction and positive coproduct) and from the renormalization tower of
//! the root-extraction family, probed with characters that weight every
//! extractable shape by a distinct prime.

use crate::degree::Params;
use crate::error::CoreError;
use crate::hopf::HopfMemo;
use crate::index::{indices_with_total, MultiIndex};
use crate::lincomb::LinComb;
use crate::prep::{extractable_shapes, Character, PrepConfig, PrepMap};
use crate::tower::Tower;
use crate::tree::{DecoratedTree, EdgeLabel, PlusTree};
use crate::{rat, rat_int, Rat};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};

const MAX_ROUNDS: usize = 64;
const MAX_BASIS: usize = 100_000;

/// One admissible node shape: caps on the noise multiplicity, the multiset
/// of kernel-edge derivative indices, and whether the node may carry a
/// polynomial decoration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeShape {
    pub max_noise: u32,
    pub kernel_labels: Vec<MultiIndex>,
    pub poly_allowed: bool,
}

impl NodeShape {
    pub fn new(max_noise: u32, kernel_labels: Vec<MultiIndex>, poly_allowed: bool) -> Self {
        let mut kernel_labels = kernel_labels;
        kernel_labels.sort();
        NodeShape {
            max_noise,
            kernel_labels,
            poly_allowed,
        }
    }

    fn admits(&self, poly_nonzero: bool, noise: u32, kernels: &[MultiIndex]) -> bool {
        if noise > self.max_noise {
            return false;
        }
        if poly_nonzero && !self.poly_allowed {
            return false;
        }
        multiset_included(kernels, &self.kernel_labels)
    }
}

fn multiset_included(sub: &[MultiIndex], sup: &[MultiIndex]) -> bool {
    // Both sorted.
    let mut it = sup.iter();
    'outer: for s in sub {
        for t in it.by_ref() {
            if t == s {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A concrete equation spec driving basis generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSpec {
    pub name: String,
    pub params: Params,
    pub rules: Vec<NodeShape>,
    pub degree_cutoff: Rat,
    pub noise_cutoff: u32,
    /// Close the basis under bare-noise extraction as well; needed when
    /// renormalization runs will enable that flag.
    pub bare_noise_closure: bool,
}

impl EquationSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.params.alpha >= rat_int(0) {
            return Err(CoreError::BadSpec("alpha must be negative".into()));
        }
        if self.params.beta <= rat_int(0) {
            return Err(CoreError::BadSpec("beta must be positive".into()));
        }
        if self.params.dim == 0 {
            return Err(CoreError::BadSpec("dimension must be at least 1".into()));
        }
        for shape in &self.rules {
            for label in &shape.kernel_labels {
                label.check_dim(self.params.dim)?;
            }
        }
        Ok(())
    }

    /// Whether every node of the tree fits some shape. Pure polynomial and
    /// extended-decoration nodes always conform; the inert extended labels
    /// are ignored.
    pub fn tree_conforms(&self, t: &DecoratedTree) -> bool {
        let mut noise = 0u32;
        let mut kernels: Vec<MultiIndex> = Vec::new();
        for (label, child) in t.children() {
            match label {
                EdgeLabel::Noise => noise += 1,
                EdgeLabel::Kernel(a) => {
                    kernels.push(a.clone());
                    if !self.tree_conforms(child) {
                        return false;
                    }
                }
            }
        }
        kernels.sort();
        if noise == 0 && kernels.is_empty() {
            return true;
        }
        self.rules
            .iter()
            .any(|s| s.admits(!t.root_poly.is_zero(), noise, &kernels))
    }

    /// Desk-scale parabolic-Anderson-like spec: one noise and one kernel
    /// branch may meet at a node.
    pub fn pam_desk() -> Self {
        EquationSpec {
            name: "pam".into(),
            params: Params::new(rat(-101, 100), rat(2, 1), 1),
            rules: vec![NodeShape::new(1, vec![MultiIndex::zero()], true)],
            degree_cutoff: rat(199, 100),
            noise_cutoff: 3,
            bare_noise_closure: true,
        }
    }

    /// Desk-scale KPZ-like spec: a quadratic gradient nonlinearity plus
    /// noise.
    pub fn kpz_desk() -> Self {
        EquationSpec {
            name: "kpz".into(),
            params: Params::new(rat(-149, 100), rat(2, 1), 1),
            rules: vec![
                NodeShape::new(1, vec![], true),
                NodeShape::new(0, vec![MultiIndex::unit(0), MultiIndex::unit(0)], true),
            ],
            degree_cutoff: rat(3, 2),
            noise_cutoff: 3,
            bare_noise_closure: false,
        }
    }

    /// Desk-scale quartic-model-like spec: a cubic nonlinearity plus noise.
    pub fn phi4_desk() -> Self {
        EquationSpec {
            name: "phi4".into(),
            params: Params::new(rat(-249, 100), rat(2, 1), 1),
            rules: vec![
                NodeShape::new(1, vec![], true),
                NodeShape::new(
                    0,
                    vec![MultiIndex::zero(), MultiIndex::zero(), MultiIndex::zero()],
                    true,
                ),
            ],
            degree_cutoff: rat(3, 2),
            noise_cutoff: 4,
            bare_noise_closure: false,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "pam" => Some(Self::pam_desk()),
            "kpz" => Some(Self::kpz_desk()),
            "phi4" => Some(Self::phi4_desk()),
            _ => None,
        }
    }
}

/// A generated basis: the tree list, the positive list, and the memoized
/// Hopf structure, all tied to one spec.
pub struct Basis {
    spec: EquationSpec,
    hopf: HopfMemo,
    trees: Vec<DecoratedTree>,
    plus_trees: Vec<PlusTree>,
    tree_set: BTreeSet<DecoratedTree>,
    plus_set: BTreeSet<PlusTree>,
    rule_generation: BTreeMap<DecoratedTree, u32>,
}

impl Basis {
    pub fn generate(spec: EquationSpec) -> Result<Self, CoreError> {
        spec.validate()?;
        let params = spec.params.clone();
        let hopf = HopfMemo::new(params.clone());

        // Phase 1: rule-driven production.
        let mut trees: BTreeSet<DecoratedTree> = BTreeSet::new();
        let mut rule_generation: BTreeMap<DecoratedTree, u32> = BTreeMap::new();
        let mut seed = |t: DecoratedTree,
                        trees: &mut BTreeSet<DecoratedTree>,
                        gens: &mut BTreeMap<DecoratedTree, u32>| {
            if trees.insert(t.clone()) {
                gens.insert(t, 0);
            }
        };
        seed(DecoratedTree::one(), &mut trees, &mut rule_generation);
        seed(DecoratedTree::xi(), &mut trees, &mut rule_generation);
        for k in monomial_indices(&spec) {
            seed(DecoratedTree::x_pow(k), &mut trees, &mut rule_generation);
        }

        let mut round: u32 = 0;
        loop {
            round += 1;
            if round as usize > MAX_ROUNDS {
                return Err(CoreError::NonTermination(MAX_ROUNDS));
            }
            let pool: Vec<DecoratedTree> = trees.iter().cloned().collect();
            let mut changed = false;
            for cand in rule_candidates(&spec, &pool) {
                if trees.insert(cand.clone()) {
                    rule_generation.insert(cand, round);
                    changed = true;
                }
            }
            if trees.len() > MAX_BASIS {
                return Err(CoreError::BadSpec(format!(
                    "rule production exceeded {MAX_BASIS} trees"
                )));
            }
            if !changed {
                break;
            }
        }

        // Phase 2: closure under the structure maps and the probed tower.
        let mut plus: BTreeSet<PlusTree> = BTreeSet::new();
        plus.insert(PlusTree::one());
        let mut rounds = 0usize;
        loop {
            rounds += 1;
            if rounds > MAX_ROUNDS {
                return Err(CoreError::NonTermination(MAX_ROUNDS));
            }
            let mut changed = false;
            let tree_snapshot: Vec<DecoratedTree> = trees.iter().cloned().collect();
            for t in &tree_snapshot {
                for ((sigma, p), _) in hopf.delta(t).iter() {
                    changed |= trees.insert(sigma.clone());
                    changed |= plus.insert(p.clone());
                }
            }
            let plus_snapshot: Vec<PlusTree> = plus.iter().cloned().collect();
            for p in &plus_snapshot {
                for ((p1, p2), _) in hopf.delta_plus(p).iter() {
                    changed |= plus.insert(p1.clone());
                    changed |= plus.insert(p2.clone());
                }
            }
            // Tower probes: every extractable shape weighted by a distinct
            // prime, extraction with and without extended decorations.
            for ext in [true, false] {
                let cfg = PrepConfig {
                    extended_decorations: ext,
                    extract_bare_noise: spec.bare_noise_closure,
                };
                let probe = probe_prep(&tree_snapshot, &params, cfg)?;
                let tower = Tower::new(&hopf, &probe);
                for t in &tree_snapshot {
                    for ((sigma, contracted), _) in crate::prep::delta_r(t, &params, &cfg).iter() {
                        changed |= trees.insert(sigma.clone());
                        changed |= trees.insert(contracted.clone());
                    }
                    for (term, _) in tower.m_r(t).iter() {
                        changed |= trees.insert(term.clone());
                    }
                    for ((left, p), _) in tower.delta_r(t).iter() {
                        changed |= trees.insert(left.clone());
                        changed |= plus.insert(p.clone());
                    }
                }
                for p in &plus_snapshot {
                    for (q, _) in tower.m_plus(p).iter() {
                        changed |= plus.insert(q.clone());
                    }
                    for ((q1, q2), _) in tower.delta_r_plus(p).iter() {
                        changed |= plus.insert(q1.clone());
                        changed |= plus.insert(q2.clone());
                    }
                }
            }
            if trees.len() + plus.len() > MAX_BASIS {
                return Err(CoreError::BadSpec(format!(
                    "closure exceeded {MAX_BASIS} elements"
                )));
            }
            if !changed {
                break;
            }
        }

        let mut tree_list: Vec<DecoratedTree> = trees.iter().cloned().collect();
        tree_list.sort_by(|a, b| {
            a.degree(&params)
                .cmp(&b.degree(&params))
                .then_with(|| a.cmp(b))
        });
        let mut plus_list: Vec<PlusTree> = plus.iter().cloned().collect();
        plus_list.sort_by(|a, b| {
            a.degree(&params)
                .cmp(&b.degree(&params))
                .then_with(|| a.cmp(b))
        });

        Ok(Basis {
            spec,
            hopf,
            trees: tree_list,
            plus_trees: plus_list,
            tree_set: trees,
            plus_set: plus,
            rule_generation,
        })
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn params(&self) -> &Params {
        &self.spec.params
    }

    pub fn hopf(&self) -> &HopfMemo {
        &self.hopf
    }

    /// Full tree list, sorted by (degree, structure).
    pub fn trees(&self) -> &[DecoratedTree] {
        &self.trees
    }

    /// Full positive list, sorted by (degree, structure).
    pub fn plus_trees(&self) -> &[PlusTree] {
        &self.plus_trees
    }

    /// The trees produced by the rule phase alone.
    pub fn rule_trees(&self) -> Vec<DecoratedTree> {
        self.rule_generation.keys().cloned().collect()
    }

    pub fn rule_generation(&self, t: &DecoratedTree) -> Option<u32> {
        self.rule_generation.get(t).copied()
    }

    pub fn contains_tree(&self, t: &DecoratedTree) -> bool {
        self.tree_set.contains(t)
    }

    pub fn contains_plus(&self, p: &PlusTree) -> bool {
        self.plus_set.contains(p)
    }

    /// Basis trees of negative degree.
    pub fn negative_trees(&self) -> Vec<DecoratedTree> {
        let zero = rat_int(0);
        self.trees
            .iter()
            .filter(|t| t.degree(self.params()) < zero)
            .cloned()
            .collect()
    }

    pub fn check_tree_comb(
        &self,
        u: &LinComb<DecoratedTree>,
        context: &str,
    ) -> Result<(), CoreError> {
        let escapes: Vec<String> = u
            .support()
            .filter(|t| !self.contains_tree(t))
            .map(|t| t.to_string())
            .collect();
        if escapes.is_empty() {
            Ok(())
        } else {
            Err(CoreError::BasisEscape {
                context: context.into(),
                items: escapes,
            })
        }
    }

    pub fn check_plus_comb(&self, u: &LinComb<PlusTree>, context: &str) -> Result<(), CoreError> {
        let escapes: Vec<String> = u
            .support()
            .filter(|p| !self.contains_plus(p))
            .map(|p| p.to_string())
            .collect();
        if escapes.is_empty() {
            Ok(())
        } else {
            Err(CoreError::BasisEscape {
                context: context.into(),
                items: escapes,
            })
        }
    }

    pub fn check_tree_plus_comb(
        &self,
        u: &LinComb<(DecoratedTree, PlusTree)>,
        context: &str,
    ) -> Result<(), CoreError> {
        let escapes: Vec<String> = u
            .support()
            .filter(|(t, p)| !self.contains_tree(t) || !self.contains_plus(p))
            .map(|(t, p)| format!("{t} \u{2297} {p}"))
            .collect();
        if escapes.is_empty() {
            Ok(())
        } else {
            Err(CoreError::BasisEscape {
                context: context.into(),
                items: escapes,
            })
        }
    }

    /// Coaction with the closure contract enforced.
    pub fn delta_checked(
        &self,
        t: &DecoratedTree,
    ) -> Result<LinComb<(DecoratedTree, PlusTree)>, CoreError> {
        let d = self.hopf.delta(t);
        self.check_tree_plus_comb(&d, &format!("delta({t})"))?;
        Ok(d)
    }
}

/// Monomial exponents within the degree cutoff.
fn monomial_indices(spec: &EquationSpec) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut total = 0u32;
    loop {
        let tr = Rat::from_integer(BigInt::from(total));
        if tr > spec.degree_cutoff {
            break;
        }
        out.extend(indices_with_total(spec.params.dim, total));
        total += 1;
    }
    out
}

/// All sub-multisets of a sorted label multiset.
fn sub_multisets(labels: &[MultiIndex]) -> Vec<Vec<MultiIndex>> {
    let mut out: Vec<Vec<MultiIndex>> = vec![Vec::new()];
    let mut i = 0;
    while i < labels.len() {
        let mut j = i;
        while j < labels.len() && labels[j] == labels[i] {
            j += 1;
        }
        let mult = j - i;
        let mut next = Vec::new();
        for base in &out {
            for take in 0..=mult {
                let mut v = base.clone();
                for _ in 0..take {
                    v.push(labels[i].clone());
                }
                next.push(v);
            }
        }
        out = next;
        i = j;
    }
    out
}

/// One production round: all conforming root configurations over the pool.
fn rule_candidates(spec: &EquationSpec, pool: &[DecoratedTree]) -> Vec<DecoratedTree> {
    let params = &spec.params;
    let mut out: BTreeSet<DecoratedTree> = BTreeSet::new();
    let polys = monomial_indices(spec);
    for shape in &spec.rules {
        for kernels in sub_multisets(&shape.kernel_labels) {
            for noise in 0..=shape.max_noise {
                if noise == 0 && kernels.is_empty() {
                    continue;
                }
                // Argument tuples with non-decreasing pool indices on runs
                // of equal labels, to skip permutations.
                let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
                while let Some(args) = stack.pop() {
                    if args.len() == kernels.len() {
                        let mut children: Vec<(EdgeLabel, DecoratedTree)> = Vec::new();
                        for _ in 0..noise {
                            children.push((EdgeLabel::Noise, DecoratedTree::one()));
                        }
                        for (slot, &ai) in args.iter().enumerate() {
                            children.push((
                                EdgeLabel::Kernel(kernels[slot].clone()),
                                pool[ai].clone(),
                            ));
                        }
                        let poly_iter: &[MultiIndex] = if shape.poly_allowed {
                            &polys
                        } else {
                            std::slice::from_ref(&polys[0])
                        };
                        for k in poly_iter {
                            let cand = DecoratedTree::from_parts(
                                k.clone(),
                                crate::degree::Degree::ZERO,
                                children.clone(),
                            );
                            if cand.noise_count() > spec.noise_cutoff {
                                continue;
                            }
                            if cand.degree(params) > spec.degree_cutoff {
                                continue;
                            }
                            out.insert(cand);
                        }
                        continue;
                    }
                    let pos = args.len();
                    let min_index = if pos > 0 && kernels[pos] == kernels[pos - 1] {
                        args[pos - 1]
                    } else {
                        0
                    };
                    for ai in min_index..pool.len() {
                        let mut next_args = args.clone();
                        next_args.push(ai);
                        stack.push(next_args);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// A probe preparation map weighting each extractable shape by a distinct
/// prime.
fn probe_prep(
    trees: &[DecoratedTree],
    params: &Params,
    cfg: PrepConfig,
) -> Result<PrepMap, CoreError> {
    let mut shapes: BTreeSet<DecoratedTree> = BTreeSet::new();
    for t in trees {
        for s in extractable_shapes(t, params, &cfg) {
            if !s.is_planted() {
                shapes.insert(s);
            }
        }
    }
    let mut ell = Character::zero();
    let mut prime = 2u64;
    for s in shapes {
        ell.set(s, rat_int(prime as i64));
        prime = next_prime(prime);
    }
    PrepMap::from_character(ell, cfg, params)
}

fn next_prime(p: u64) -> u64 {
    let mut q = p + 1;
    'outer: loop {
        let mut d = 2;
        while d * d <= q {
            if q % d == 0 {
                q += 1;
                continue 'outer;
            }
            d += 1;
        }
        return q;
    }
}

/// Per-degree dimensions and generation diagnostics.
#[derive(Clone, Debug)]
pub struct SubcritReport {
    /// (degree, dimension) over the full tree basis, ascending.
    pub degree_classes: Vec<(Rat, usize)>,
    /// (round, trees added, min noise, max noise) for the rule phase.
    pub rounds: Vec<(u32, usize, u32, u32)>,
    /// Whether the maximal noise count strictly grows round over round.
    pub noise_grows: bool,
}

pub fn subcriticality_check(basis: &Basis) -> SubcritReport {
    let cutoff = basis.spec().noise_cutoff;
    let params = basis.params();
    let mut classes: BTreeMap<Rat, usize> = BTreeMap::new();
    for t in basis.trees() {
        *classes.entry(t.degree(params)).or_insert(0) += 1;
    }
    let mut by_round: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for t in basis.rule_trees() {
        let round = basis.rule_generation(&t).unwrap_or(0);
        by_round.entry(round).or_default().push(t.noise_count());
    }
    let mut rounds = Vec::new();
    let mut noise_grows = true;
    let mut prev_max: Option<u32> = None;
    for (round, noises) in &by_round {
        let min = *noises.iter().min().unwrap_or(&0);
        let max = *noises.iter().max().unwrap_or(&0);
        rounds.push((*round, noises.len(), min, max));
        if *round > 0 {
            if let Some(pm) = prev_max {
                if max <= pm && max < cutoff {
                    noise_grows = false;
                }
            }
        }
        prev_max = Some(max);
    }
    SubcritReport {
        degree_classes: classes.into_iter().collect(),
        rounds,
        noise_grows,
    }
}

/// Closure audit: the coaction and the positive coproduct stay inside the
/// basis.
#[derive(Clone, Debug, Default)]
pub struct ClosureReport {
    pub escapes: Vec<String>,
}

impl ClosureReport {
    pub fn ok(&self) -> bool {
        self.escapes.is_empty()
    }
}

pub fn closure_check(basis: &Basis) -> ClosureReport {
    let mut report = ClosureReport::default();
    for t in basis.trees() {
        for ((sigma, p), _) in basis.hopf().delta(t).iter() {
            if !basis.contains_tree(sigma) {
                report
                    .escapes
                    .push(format!("delta({t}) escapes through {sigma}"));
            }
            if !basis.contains_plus(p) {
                report
                    .escapes
                    .push(format!("delta({t}) escapes through {p}"));
            }
        }
    }
    for p in basis.plus_trees() {
        for ((p1, p2), _) in basis.hopf().delta_plus(p).iter() {
            if !basis.contains_plus(p1) {
                report
                    .escapes
                    .push(format!("delta+({p}) escapes through {p1}"));
            }
            if !basis.contains_plus(p2) {
                report
                    .escapes
                    .push(format!("delta+({p}) escapes through {p2}"));
            }
        }
    }
    report.escapes.sort();
    report.escapes.dedup();
    report
}
