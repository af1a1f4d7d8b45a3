//! Root-extraction splitting, characters and preparation maps.
//!
//! The splitting map extracts one rooted divergent subtree at a time: a
//! connected edge region through the root is removed, the region collapses to
//! the root node, pruned branches reattach there, and the relocated
//! polynomial labels accumulate on the collapsed node. When extended
//! decorations are enabled the collapsed node additionally records the degree
//! of the extracted shape, which makes the resulting preparation maps degree
//! preserving.

use crate::degree::{Degree, Params};
use crate::error::CoreError;
use crate::index::MultiIndex;
use crate::lincomb::{LinComb, TreeComb};
use crate::tree::{DecoratedTree, EdgeLabel};
use crate::{rat_int, Rat};
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// Extraction options for root-extraction preparation maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrepConfig {
    /// Record the degree of the extracted shape on the collapsed node.
    pub extended_decorations: bool,
    /// Whether the bare noise symbol may be extracted on its own.
    pub extract_bare_noise: bool,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            extended_decorations: true,
            extract_bare_noise: false,
        }
    }
}

#[derive(Clone)]
struct RegionOutcome {
    sigma_children: Vec<(EdgeLabel, DecoratedTree)>,
    poly: MultiIndex,
    ext: Degree,
    reattach: Vec<(EdgeLabel, DecoratedTree)>,
}

/// All rooted connected edge regions of `t`, including the empty one.
fn region_choices(t: &DecoratedTree) -> Vec<RegionOutcome> {
    let mut outcomes = vec![RegionOutcome {
        sigma_children: Vec::new(),
        poly: t.root_poly.clone(),
        ext: t.root_ext,
        reattach: Vec::new(),
    }];
    for (label, child) in t.children() {
        let child_regions = match label {
            EdgeLabel::Kernel(_) => Some(region_choices(child)),
            EdgeLabel::Noise => None,
        };
        let mut next = Vec::new();
        for o in &outcomes {
            // Leave the edge out of the region: the branch reattaches.
            let mut excluded = o.clone();
            excluded.reattach.push((label.clone(), child.clone()));
            next.push(excluded);
            match (label, &child_regions) {
                (EdgeLabel::Noise, _) => {
                    let mut inc = o.clone();
                    inc.sigma_children
                        .push((EdgeLabel::Noise, DecoratedTree::one()));
                    next.push(inc);
                }
                (EdgeLabel::Kernel(a), Some(regions)) => {
                    for rc in regions {
                        let mut inc = o.clone();
                        inc.sigma_children.push((
                            EdgeLabel::Kernel(a.clone()),
                            DecoratedTree::from_parts(
                                MultiIndex::zero(),
                                Degree::ZERO,
                                rc.sigma_children.clone(),
                            ),
                        ));
                        inc.poly = inc.poly.add(&rc.poly);
                        inc.ext += rc.ext;
                        inc.reattach.extend(rc.reattach.iter().cloned());
                        next.push(inc);
                    }
                }
                _ => unreachable!(),
            }
        }
        outcomes = next;
    }
    outcomes
}

/// The root splitting map: `δ_r τ = 1 ⊗ τ + Σ σ ⊗ C_σ(τ)` over the rooted
/// shapes `σ` with at least one noise and negative degree.
pub fn delta_r(
    t: &DecoratedTree,
    params: &Params,
    cfg: &PrepConfig,
) -> LinComb<(DecoratedTree, DecoratedTree)> {
    let zero = rat_int(0);
    let mut out = LinComb::zero();
    for o in region_choices(t) {
        let sigma =
            DecoratedTree::from_parts(MultiIndex::zero(), Degree::ZERO, o.sigma_children.clone());
        if sigma.is_one() {
            out.add_term((DecoratedTree::one(), t.clone()), rat_int(1));
            continue;
        }
        if sigma.noise_count() == 0 {
            continue;
        }
        if !cfg.extract_bare_noise && sigma == DecoratedTree::xi() {
            continue;
        }
        if sigma.degree(params) >= zero {
            continue;
        }
        let mut ext = o.ext;
        if cfg.extended_decorations {
            ext += sigma.degree_sym();
        }
        let contracted = DecoratedTree::from_parts(o.poly, ext, o.reattach);
        out.add_term((sigma, contracted), rat_int(1));
    }
    out
}

/// The extracted shapes that a character may assign a value to for the tree
/// `t` (left slots of `δ_r t` other than the unit).
pub fn extractable_shapes(
    t: &DecoratedTree,
    params: &Params,
    cfg: &PrepConfig,
) -> Vec<DecoratedTree> {
    delta_r(t, params, cfg)
        .iter()
        .map(|((s, _), _)| s.clone())
        .filter(|s| !s.is_one())
        .collect()
}

/// A character of the extraction algebra: finitely many rational values on
/// negative-degree shapes, implicitly `1` on the empty extraction and `0`
/// elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Character {
    values: BTreeMap<DecoratedTree, Rat>,
}

impl Character {
    pub fn zero() -> Self {
        Character::default()
    }

    pub fn set(&mut self, tree: DecoratedTree, value: Rat) {
        if value.is_zero() {
            self.values.remove(&tree);
        } else {
            self.values.insert(tree, value);
        }
    }

    pub fn value(&self, tree: &DecoratedTree) -> Rat {
        self.values.get(tree).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&DecoratedTree, &Rat)> {
        self.values.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Validates the support against the structural restrictions: negative
    /// degree, at least one noise, no decorations, not planted, and the bare
    /// noise only when enabled.
    pub fn validate(&self, params: &Params, cfg: &PrepConfig) -> Result<(), CoreError> {
        let zero = rat_int(0);
        for (t, _) in self.support() {
            let reject = |msg: &str| Err(CoreError::BadCharacter(format!("{t}: {msg}")));
            if t.degree(params) >= zero {
                return reject("support tree must have negative degree");
            }
            if t.noise_count() == 0 {
                return reject("support tree must contain a noise");
            }
            if !t.root_poly.is_zero() || t.has_ext() {
                return reject("support tree must carry no decorations");
            }
            if t.is_planted() {
                return reject("support on planted trees breaks R I_a = I_a");
            }
            if !cfg.extract_bare_noise && *t == DecoratedTree::xi() {
                return reject("bare-noise extraction is disabled");
            }
        }
        Ok(())
    }
}

enum PrepKind {
    Identity,
    RootExtraction { ell: Character, cfg: PrepConfig },
    Table(BTreeMap<DecoratedTree, TreeComb>),
}

/// A preparation map `R`.
///
/// `R` fixes polynomials and acts as the identity wherever no extraction is
/// possible; the root-extraction family is `R_ℓ = (ℓ ⊗ Id) δ_r`.
pub struct PrepMap {
    kind: PrepKind,
    memo: Mutex<HashMap<DecoratedTree, TreeComb>>,
}

impl PrepMap {
    pub fn identity() -> Self {
        PrepMap {
            kind: PrepKind::Identity,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// `R_ℓ` for a character `ℓ`; the character support is validated against
    /// the structural restrictions.
    pub fn from_character(
        ell: Character,
        cfg: PrepConfig,
        params: &Params,
    ) -> Result<Self, CoreError> {
        ell.validate(params, &cfg)?;
        Ok(PrepMap {
            kind: PrepKind::RootExtraction { ell, cfg },
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Arbitrary tabulated map (identity off the table). Used to build
    /// counterexamples in tests; no validity is implied.
    pub fn from_table(table: BTreeMap<DecoratedTree, TreeComb>) -> Self {
        PrepMap {
            kind: PrepKind::Table(table),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, PrepKind::Identity)
    }

    pub fn config(&self) -> Option<&PrepConfig> {
        match &self.kind {
            PrepKind::RootExtraction { cfg, .. } => Some(cfg),
            _ => None,
        }
    }

    pub fn character(&self) -> Option<&Character> {
        match &self.kind {
            PrepKind::RootExtraction { ell, .. } => Some(ell),
            _ => None,
        }
    }

    pub fn apply(&self, t: &DecoratedTree, params: &Params) -> TreeComb {
        if let Some(v) = self.memo.lock().unwrap().get(t) {
            return v.clone();
        }
        let result = match &self.kind {
            PrepKind::Identity => TreeComb::from_basis(t.clone()),
            PrepKind::Table(table) => table
                .get(t)
                .cloned()
                .unwrap_or_else(|| TreeComb::from_basis(t.clone())),
            PrepKind::RootExtraction { ell, cfg } => {
                let mut out = TreeComb::zero();
                for ((sigma, contracted), coef) in delta_r(t, params, cfg).iter() {
                    let weight = if sigma.is_one() {
                        rat_int(1)
                    } else {
                        ell.value(sigma)
                    };
                    if !weight.is_zero() {
                        out.add_term(contracted.clone(), coef.clone() * weight);
                    }
                }
                out
            }
        };
        self.memo
            .lock()
            .unwrap()
            .insert(t.clone(), result.clone());
        result
    }

    /// `R` applied linearly to a combination.
    pub fn apply_comb(&self, u: &TreeComb, params: &Params) -> TreeComb {
        u.map_basis(|t| self.apply(t, params))
    }
}

/// One violation found while auditing a preparation map.
#[derive(Clone, Debug)]
pub struct PrepViolation {
    pub tree: String,
    pub condition: String,
}

/// Audits the triangular form on a set of trees: `Rτ = τ + Σ λ_i τ_i` with
/// `deg τ_i ≥ deg τ` and strictly fewer noises.
pub fn audit_triangular_form<'a>(
    prep: &PrepMap,
    trees: impl Iterator<Item = &'a DecoratedTree>,
    params: &Params,
) -> Vec<PrepViolation> {
    let mut out = Vec::new();
    for t in trees {
        let rt = prep.apply(t, params);
        if rt.coeff(t) != rat_int(1) {
            out.push(PrepViolation {
                tree: t.to_string(),
                condition: "leading coefficient of R is not 1".into(),
            });
        }
        let dt = t.degree(params);
        for (term, _) in rt.iter() {
            if term == t {
                continue;
            }
            if term.degree(params) < dt {
                out.push(PrepViolation {
                    tree: t.to_string(),
                    condition: format!("term {term} lowers the degree"),
                });
            }
            if term.noise_count() >= t.noise_count() {
                out.push(PrepViolation {
                    tree: t.to_string(),
                    condition: format!("term {term} does not lose a noise"),
                });
            }
        }
    }
    out
}

/// Audits the degree-preserving property: non-leading terms keep the degree
/// exactly and lose a noise.
pub fn audit_degree_preserving<'a>(
    prep: &PrepMap,
    trees: impl Iterator<Item = &'a DecoratedTree>,
    params: &Params,
) -> Vec<PrepViolation> {
    let mut out = Vec::new();
    for t in trees {
        let rt = prep.apply(t, params);
        let dt = t.degree(params);
        for (term, _) in rt.iter() {
            if term == t {
                continue;
            }
            if term.degree(params) != dt {
                out.push(PrepViolation {
                    tree: t.to_string(),
                    condition: format!("term {term} changes the degree"),
                });
            }
            if term.noise_count() >= t.noise_count() {
                out.push(PrepViolation {
                    tree: t.to_string(),
                    condition: format!("term {term} does not lose a noise"),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_tree;
    use crate::rat;

    fn pam_params() -> Params {
        Params::new(rat(-101, 100), rat(2, 1), 1)
    }

    /// Brute-force oracle: enumerate all node subsets, keep the rooted
    /// connected ones, and rebuild the extraction directly.
    mod oracle {
        use super::*;

        pub struct FlatTree {
            pub parent: Vec<Option<usize>>,
            pub edge_label: Vec<Option<EdgeLabel>>,
            pub poly: Vec<MultiIndex>,
            pub ext: Vec<Degree>,
            pub children: Vec<Vec<usize>>,
        }

        pub fn flatten(t: &DecoratedTree) -> FlatTree {
            let mut f = FlatTree {
                parent: Vec::new(),
                edge_label: Vec::new(),
                poly: Vec::new(),
                ext: Vec::new(),
                children: Vec::new(),
            };
            fn rec(
                t: &DecoratedTree,
                parent: Option<usize>,
                label: Option<EdgeLabel>,
                f: &mut FlatTree,
            ) -> usize {
                let id = f.parent.len();
                f.parent.push(parent);
                f.edge_label.push(label);
                f.poly.push(t.root_poly.clone());
                f.ext.push(t.root_ext);
                f.children.push(Vec::new());
                for (l, c) in t.children() {
                    let cid = rec(c, Some(id), Some(l.clone()), f);
                    f.children[id].push(cid);
                }
                id
            }
            rec(t, None, None, &mut f);
            f
        }

        pub fn rebuild(
            f: &FlatTree,
            root: usize,
            keep: &dyn Fn(usize) -> bool,
            strip: bool,
        ) -> DecoratedTree {
            let children = f.children[root]
                .iter()
                .filter(|c| keep(**c))
                .map(|c| {
                    (
                        f.edge_label[*c].clone().unwrap(),
                        rebuild(f, *c, keep, strip),
                    )
                })
                .collect();
            let (poly, ext) = if strip {
                (MultiIndex::zero(), Degree::ZERO)
            } else {
                (f.poly[root].clone(), f.ext[root])
            };
            DecoratedTree::from_parts(poly, ext, children)
        }

        pub fn delta_r_oracle(
            t: &DecoratedTree,
            params: &Params,
            cfg: &PrepConfig,
        ) -> LinComb<(DecoratedTree, DecoratedTree)> {
            let f = flatten(t);
            let n = f.parent.len();
            let mut out = LinComb::zero();
            for mask in 0..(1u32 << (n - 1)) {
                let in_region = |id: usize| id == 0 || (mask >> (id - 1)) & 1 == 1;
                let connected =
                    (1..n).all(|id| !in_region(id) || in_region(f.parent[id].unwrap()));
                if !connected {
                    continue;
                }
                let sigma = rebuild(&f, 0, &in_region, true);
                if sigma.is_one() {
                    out.add_term((DecoratedTree::one(), t.clone()), rat_int(1));
                    continue;
                }
                if sigma.noise_count() == 0
                    || (!cfg.extract_bare_noise && sigma == DecoratedTree::xi())
                    || sigma.degree(params) >= rat_int(0)
                {
                    continue;
                }
                let mut poly = MultiIndex::zero();
                let mut ext = Degree::ZERO;
                let mut reattach = Vec::new();
                for id in 0..n {
                    if in_region(id) {
                        poly = poly.add(&f.poly[id]);
                        ext += f.ext[id];
                        for &c in &f.children[id] {
                            if !in_region(c) {
                                reattach.push((
                                    f.edge_label[c].clone().unwrap(),
                                    rebuild(&f, c, &|_| true, false),
                                ));
                            }
                        }
                    }
                }
                if cfg.extended_decorations {
                    ext += sigma.degree_sym();
                }
                out.add_term(
                    (sigma, DecoratedTree::from_parts(poly, ext, reattach)),
                    rat_int(1),
                );
            }
            out
        }
    }

    #[test]
    fn trivial_when_nothing_diverges() {
        let p = Params::new(rat(-1, 2), rat(2, 1), 1);
        let t = parse_tree("I[Xi] Xi").unwrap();
        let d = delta_r(&t, &p, &PrepConfig::default());
        assert_eq!(d, LinComb::from_basis((DecoratedTree::one(), t.clone())));
    }

    #[test]
    fn pam_extraction_by_hand() {
        // τ = I_0(Xi)·Xi at α = −101/100: δ_r τ = 1⊗τ + τ⊗o[2,1,0].
        let p = pam_params();
        let t = parse_tree("I[Xi] Xi").unwrap();
        let d = delta_r(&t, &p, &PrepConfig::default());
        let node = parse_tree("o[2,1,0]").unwrap();
        let expect = LinComb::from_terms([
            ((DecoratedTree::one(), t.clone()), rat_int(1)),
            ((t.clone(), node), rat_int(1)),
        ]);
        assert_eq!(d, expect);
    }

    #[test]
    fn bare_noise_flag() {
        let p = pam_params();
        let cfg = PrepConfig {
            extended_decorations: true,
            extract_bare_noise: true,
        };
        let t = DecoratedTree::xi();
        let d = delta_r(&t, &p, &cfg);
        let expect = LinComb::from_terms([
            ((DecoratedTree::one(), t.clone()), rat_int(1)),
            ((t.clone(), parse_tree("o[1,0,0]").unwrap()), rat_int(1)),
        ]);
        assert_eq!(d, expect);
        assert_eq!(
            delta_r(&t, &p, &PrepConfig::default()),
            LinComb::from_basis((DecoratedTree::one(), t))
        );
    }

    #[test]
    fn matches_subset_oracle() {
        let p = pam_params();
        let trees = [
            "I[Xi] Xi",
            "I[X Xi] Xi",
            "I[I[Xi] Xi] Xi",
            "X^(2) I[Xi] Xi",
            "I_(1)[Xi] I_(1)[Xi]",
            "I[I[Xi] Xi] I[Xi] Xi",
        ];
        for cfg in [
            PrepConfig::default(),
            PrepConfig {
                extended_decorations: false,
                extract_bare_noise: true,
            },
        ] {
            for expr in trees {
                let t = parse_tree(expr).unwrap();
                assert_eq!(
                    delta_r(&t, &p, &cfg),
                    oracle::delta_r_oracle(&t, &p, &cfg),
                    "delta_r oracle mismatch on {expr}"
                );
            }
        }
        let kpz = Params::new(rat(-149, 100), rat(2, 1), 1);
        for expr in [
            "I_(1)[Xi] I_(1)[Xi]",
            "I_(1)[I_(1)[Xi] I_(1)[Xi]] I_(1)[Xi]",
        ] {
            let t = parse_tree(expr).unwrap();
            assert_eq!(
                delta_r(&t, &kpz, &PrepConfig::default()),
                oracle::delta_r_oracle(&t, &kpz, &PrepConfig::default()),
                "delta_r oracle mismatch on {expr}"
            );
        }
    }

    #[test]
    fn extraction_preserves_degree_with_ext_labels() {
        let p = pam_params();
        let t = parse_tree("I[I[Xi] Xi] Xi").unwrap();
        let cfg = PrepConfig {
            extended_decorations: true,
            extract_bare_noise: true,
        };
        for ((sigma, contracted), _) in delta_r(&t, &p, &cfg).iter() {
            if sigma.is_one() {
                continue;
            }
            assert_eq!(
                contracted.degree(&p),
                t.degree(&p),
                "extraction of {sigma} changed the degree"
            );
            assert!(contracted.noise_count() < t.noise_count());
        }
    }

    #[test]
    fn character_round_extraction() {
        let p = pam_params();
        let sigma0 = parse_tree("I[Xi] Xi").unwrap();
        let mut ell = Character::zero();
        ell.set(sigma0.clone(), rat(1, 3));
        let prep = PrepMap::from_character(ell, PrepConfig::default(), &p).unwrap();
        let t = sigma0.clone();
        let rt = prep.apply(&t, &p);
        let expect = TreeComb::from_terms([
            (t.clone(), rat_int(1)),
            (parse_tree("o[2,1,0]").unwrap(), rat(1, 3)),
        ]);
        assert_eq!(rt, expect);
        let other = parse_tree("I_(1)[Xi]").unwrap();
        assert_eq!(prep.apply(&other, &p), TreeComb::from_basis(other));
        let id = PrepMap::from_character(Character::zero(), PrepConfig::default(), &p).unwrap();
        assert_eq!(id.apply(&t, &p), TreeComb::from_basis(t));
    }

    #[test]
    fn character_validation() {
        let p = pam_params();
        let kpz = Params::new(rat(-149, 100), rat(2, 1), 1);
        let mut planted = Character::zero();
        planted.set(parse_tree("I_(1)[Xi]").unwrap(), rat_int(1));
        assert!(planted.validate(&kpz, &PrepConfig::default()).is_err());
        let mut positive = Character::zero();
        positive.set(parse_tree("I[Xi]").unwrap(), rat_int(1));
        assert!(positive.validate(&p, &PrepConfig::default()).is_err());
        let mut bare = Character::zero();
        bare.set(DecoratedTree::xi(), rat_int(1));
        assert!(bare.validate(&p, &PrepConfig::default()).is_err());
        let cfg_on = PrepConfig {
            extended_decorations: true,
            extract_bare_noise: true,
        };
        assert!(bare.validate(&p, &cfg_on).is_ok());
    }

    #[test]
    fn triangular_audit_flags_bad_maps() {
        let p = pam_params();
        let t = parse_tree("I[Xi] Xi").unwrap();
        let bad_term = parse_tree("I[Xi] Xi Xi").unwrap();
        let mut table = BTreeMap::new();
        table.insert(
            t.clone(),
            TreeComb::from_terms([(t.clone(), rat_int(1)), (bad_term, rat_int(1))]),
        );
        let bad = PrepMap::from_table(table);
        let violations = audit_triangular_form(&bad, [t.clone()].iter(), &p);
        assert!(!violations.is_empty());
        let id = PrepMap::identity();
        assert!(audit_triangular_form(&id, [t].iter(), &p).is_empty());
    }
}
