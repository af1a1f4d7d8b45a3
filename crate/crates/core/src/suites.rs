//! Executable property suites over a generated basis.
//!
//! Each suite aggregates one named check per identity, quantified over the
//! whole basis (or a deterministic sample where quantification is
//! quadratic). A check records the number of instances tested and the first
//! witness on failure.

use crate::hopf::HopfMemo;
use crate::lincomb::{m_plus, tensor, PlusComb, PlusPlusComb, PlusPlusPlusComb, TreeComb,
    TreePlusComb, TreePlusPlusComb};
use crate::prep::{
    audit_degree_preserving, audit_triangular_form, extractable_shapes, Character, PrepConfig,
    PrepMap, PrepViolation,
};
use crate::rules::Basis;
use crate::tower::{audit_upper_triangular, Tower};
use crate::tree::{DecoratedTree, PlusTree};
use crate::{rat, rat_int, Rat};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub label: String,
    pub passed: bool,
    pub instances: usize,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub spec: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn new(suite: &str, spec: &str) -> Self {
        SuiteReport {
            suite: suite.into(),
            spec: spec.into(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, label: &str, instances: usize, witness: Option<String>) {
        self.checks.push(CheckResult {
            label: label.into(),
            passed: witness.is_none(),
            instances,
            witness,
        });
    }

    /// A check that must find a witness to pass (used for required
    /// counterexamples).
    fn push_expecting_witness(&mut self, label: &str, witness: Option<String>) {
        self.checks.push(CheckResult {
            label: label.into(),
            passed: witness.is_some(),
            instances: 1,
            witness,
        });
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }
}

fn triple_left(hopf: &HopfMemo, p: &PlusTree) -> PlusPlusPlusComb {
    let mut out = PlusPlusPlusComb::zero();
    for ((a, b), c) in hopf.delta_plus(p).iter() {
        for ((a1, a2), c2) in hopf.delta_plus(a).iter() {
            out.add_term((a1.clone(), a2.clone(), b.clone()), c.clone() * c2);
        }
    }
    out
}

fn triple_right(hopf: &HopfMemo, p: &PlusTree) -> PlusPlusPlusComb {
    let mut out = PlusPlusPlusComb::zero();
    for ((a, b), c) in hopf.delta_plus(p).iter() {
        for ((b1, b2), c2) in hopf.delta_plus(b).iter() {
            out.add_term((a.clone(), b1.clone(), b2.clone()), c.clone() * c2);
        }
    }
    out
}

/// Co-associativity, the antipode convolution identity, the comodule
/// compatibility and multiplicativity of the antipode, all exact.
pub fn hopf_suite(basis: &Basis) -> SuiteReport {
    let hopf = basis.hopf();
    let mut report = SuiteReport::new("hopf", &basis.spec().name);

    let mut witness = None;
    for p in basis.plus_trees() {
        if triple_left(hopf, p) != triple_right(hopf, p) {
            witness = Some(format!("co-associativity fails on {p}"));
            break;
        }
    }
    report.push("coassociativity", basis.plus_trees().len(), witness);

    let mut witness = None;
    for p in basis.plus_trees() {
        let d = hopf.delta_plus(p);
        let mut left = PlusComb::zero();
        let mut right = PlusComb::zero();
        for ((a, b), c) in d.iter() {
            for (t, ct) in hopf.antipode(a).iter() {
                left.add_term(t.product(b), c.clone() * ct);
            }
            for (t, ct) in hopf.antipode(b).iter() {
                right.add_term(a.product(t), c.clone() * ct);
            }
        }
        let expect = if p.is_one() {
            PlusComb::unit()
        } else {
            PlusComb::zero()
        };
        if left != expect || right != expect {
            witness = Some(format!("antipode convolution fails on {p}"));
            break;
        }
    }
    report.push("antipode-characterization", basis.plus_trees().len(), witness);

    let mut witness = None;
    for t in basis.trees() {
        if hopf.delta_then_left(t) != hopf.delta_then_right(t) {
            witness = Some(format!("comodule compatibility fails on {t}"));
            break;
        }
    }
    report.push("comodule-compatibility", basis.trees().len(), witness);

    // Antipode multiplicativity on a deterministic sample of pairs.
    let mut witness = None;
    let plus = basis.plus_trees();
    let stride = (plus.len() / 8).max(1);
    let mut pairs = 0usize;
    'outer: for (i, a) in plus.iter().step_by(stride).enumerate() {
        for b in plus.iter().skip(i).step_by(stride) {
            pairs += 1;
            let prod = a.product(b);
            let lhs = hopf.antipode(&prod);
            let rhs = {
                let mut out = PlusComb::zero();
                for (x, cx) in hopf.antipode(a).iter() {
                    for (y, cy) in hopf.antipode(b).iter() {
                        out.add_term(x.product(y), cx.clone() * cy);
                    }
                }
                out
            };
            if lhs != rhs {
                witness = Some(format!("antipode multiplicativity fails on {a} * {b}"));
                break 'outer;
            }
        }
    }
    report.push("antipode-multiplicativity", pairs, witness);

    // Closure contract: the structure maps stay inside the basis.
    let closure = crate::rules::closure_check(basis);
    report.push(
        "basis-closure",
        basis.trees().len() + basis.plus_trees().len(),
        closure.escapes.first().cloned(),
    );

    report
}

/// The preparation-map axioms plus basis membership, as a named violation
/// list (empty = valid).
pub fn validate_preparation(prep: &PrepMap, basis: &Basis) -> Vec<PrepViolation> {
    let params = basis.params();
    let hopf = basis.hopf();
    let mut violations = audit_triangular_form(prep, basis.trees().iter(), params);
    for t in basis.trees() {
        let rt = prep.apply(t, params);
        if basis.check_tree_comb(&rt, "R").is_err() {
            violations.push(PrepViolation {
                tree: t.to_string(),
                condition: "R leaves the basis".into(),
            });
        }
        // (R ⊗ Id)Δτ = Δ(Rτ).
        let mut lhs = TreePlusComb::zero();
        for ((sigma, p), c) in hopf.delta(t).iter() {
            for (s1, c1) in prep.apply(sigma, params).iter() {
                lhs.add_term((s1.clone(), p.clone()), c.clone() * c1);
            }
        }
        let mut rhs = TreePlusComb::zero();
        for (s, c) in rt.iter() {
            for ((s1, p), c1) in hopf.delta(s).iter() {
                rhs.add_term((s1.clone(), p.clone()), c.clone() * c1);
            }
        }
        if lhs != rhs {
            violations.push(PrepViolation {
                tree: t.to_string(),
                condition: "commutation with the coaction fails".into(),
            });
        }
    }
    violations
}

/// Degree-preservation predicate for a preparation map over the basis.
pub fn is_degree_preserving(prep: &PrepMap, basis: &Basis) -> bool {
    audit_degree_preserving(prep, basis.trees().iter(), basis.params()).is_empty()
}

/// The shapes a random character may weight under the given flags.
pub fn character_support_pool(basis: &Basis, cfg: &PrepConfig) -> Vec<DecoratedTree> {
    let params = basis.params();
    let mut pool: Vec<DecoratedTree> = Vec::new();
    for t in basis.trees() {
        for s in extractable_shapes(t, params, cfg) {
            if s.is_planted() {
                continue;
            }
            if !cfg.extract_bare_noise && s == DecoratedTree::xi() {
                continue;
            }
            if !pool.contains(&s) {
                pool.push(s);
            }
        }
    }
    pool.sort();
    pool
}

/// A random rational character over the extractable pool.
pub fn random_character(basis: &Basis, cfg: &PrepConfig, rng: &mut ChaCha8Rng) -> Character {
    let pool = character_support_pool(basis, cfg);
    let mut ell = Character::zero();
    for s in pool {
        if rng.gen_range(0..5) == 0 {
            continue; // leave some shapes out
        }
        let num: i64 = loop {
            let v = rng.gen_range(-9..=9);
            if v != 0 {
                break v;
            }
        };
        let den: i64 = rng.gen_range(1..=9);
        ell.set(s, rat(num, den));
    }
    ell
}

/// Preparation suite: `n_chars` random characters, each audited for the
/// preparation axioms, the splitting factorization, upper triangularity,
/// agreement of the two inverse formulas and the defining-relation round
/// trip.
pub fn prep_suite(basis: &Basis, n_chars: usize, seed: u64) -> SuiteReport {
    let params = basis.params();
    let hopf = basis.hopf();
    let mut report = SuiteReport::new("prep", &basis.spec().name);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = PrepConfig::default();

    let mut w_valid = None;
    let mut w_factor = None;
    let mut w_triangular = None;
    let mut w_inverse = None;
    let mut w_roundtrip = None;
    let mut instances = 0usize;

    for k in 0..n_chars {
        let ell = random_character(basis, &cfg, &mut rng);
        let prep = match PrepMap::from_character(ell, cfg, params) {
            Ok(p) => p,
            Err(e) => {
                w_valid.get_or_insert(format!("character {k}: {e}"));
                continue;
            }
        };
        let tower = Tower::new(hopf, &prep);
        instances += 1;

        if w_valid.is_none() {
            if let Some(v) = validate_preparation(&prep, basis).into_iter().next() {
                w_valid = Some(format!("character {k}, {}: {}", v.tree, v.condition));
            }
        }

        if w_triangular.is_none() {
            if let Some((t, left)) = audit_upper_triangular(&tower, basis.trees()).into_iter().next()
            {
                w_triangular = Some(format!("character {k}: slot {left} of splitting({t})"));
            }
        }

        for t in basis.trees() {
            // Factorized route vs solving the defining relation with the
            // closed-form inverse.
            let factored = tower.delta_r(t);
            let mut rhs = TreePlusComb::zero();
            for ((sigma, p), c) in hopf.delta(t).iter() {
                let ms = tower.m_r(sigma);
                let mp = tower.m_plus(p);
                for (s1, c1) in ms.iter() {
                    for (p1, c2) in mp.iter() {
                        rhs.add_term((s1.clone(), p1.clone()), c.clone() * c1 * c2);
                    }
                }
            }
            if w_factor.is_none() {
                let solved = tower.theta_inv_closed(&rhs);
                if solved != factored {
                    w_factor = Some(format!("character {k}: splitting factorization on {t}"));
                }
            }
            if w_roundtrip.is_none() && tower.theta(&factored) != rhs {
                w_roundtrip = Some(format!("character {k}: defining relation on {t}"));
            }
            if w_inverse.is_none() {
                match tower.theta_inv_neumann(&rhs) {
                    Ok(neumann) => {
                        if neumann != tower.theta_inv_closed(&rhs) {
                            w_inverse = Some(format!("character {k}: inverse mismatch on {t}"));
                        }
                    }
                    Err(e) => w_inverse = Some(format!("character {k}: {e}")),
                }
            }
        }

        // Inverse agreement on sampled plain tensors as well.
        if w_inverse.is_none() {
            let stride = (basis.trees().len() / 12).max(1);
            let pstride = (basis.plus_trees().len() / 6).max(1);
            'sample: for t in basis.trees().iter().step_by(stride) {
                for p in basis.plus_trees().iter().step_by(pstride) {
                    let u = tensor(
                        &TreeComb::from_basis(t.clone()),
                        &PlusComb::from_basis(p.clone()),
                    );
                    let closed = tower.theta_inv_closed(&u);
                    match tower.theta_inv_neumann(&u) {
                        Ok(neumann) if neumann == closed => {
                            if tower.theta(&closed) != u {
                                w_inverse =
                                    Some(format!("character {k}: not an inverse on {t} ⊗ {p}"));
                                break 'sample;
                            }
                        }
                        Ok(_) => {
                            w_inverse =
                                Some(format!("character {k}: inverse mismatch on {t} ⊗ {p}"));
                            break 'sample;
                        }
                        Err(e) => {
                            w_inverse = Some(format!("character {k}: {e}"));
                            break 'sample;
                        }
                    }
                }
            }
        }
    }

    report.push("preparation-axioms", instances, w_valid);
    report.push("splitting-factorization", instances, w_factor);
    report.push("upper-triangularity", instances, w_triangular);
    report.push("inverse-formulas-agree", instances, w_inverse);
    report.push("defining-relation-round-trip", instances, w_roundtrip);
    report
}

/// Degree-preserving suite: the extended-decoration family satisfies the
/// collapse and co-interaction identities; the decoration-off family is not
/// degree preserving and breaks at least one of them, with a witness.
pub fn degpres_suite(basis: &Basis, seed: u64) -> SuiteReport {
    let params = basis.params();
    let hopf = basis.hopf();
    let mut report = SuiteReport::new("degpres", &basis.spec().name);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let cfg_on = PrepConfig {
        extended_decorations: true,
        extract_bare_noise: basis.spec().bare_noise_closure,
    };
    let ell = loop {
        let ell = random_character(basis, &cfg_on, &mut rng);
        if !ell.is_zero() {
            break ell;
        }
    };
    let prep = PrepMap::from_character(ell.clone(), cfg_on, params).expect("valid character");
    let tower = Tower::new(hopf, &prep);

    report.push(
        "degree-preserving-audit",
        basis.trees().len(),
        audit_degree_preserving(&prep, basis.trees().iter(), params)
            .into_iter()
            .next()
            .map(|v| format!("{}: {}", v.tree, v.condition)),
    );

    let mut w_collapse = None;
    let mut w_coint = None;
    let mut w_coint_times = None;
    for t in basis.trees() {
        if w_collapse.is_none() {
            let mut collapsed = TreePlusComb::zero();
            for (s, c) in tower.m_r(t).iter() {
                collapsed.add_term((s.clone(), PlusTree::one()), c.clone());
            }
            if tower.delta_r(t) != collapsed {
                w_collapse = Some(format!("splitting does not collapse on {t}"));
            }
        }
        if w_coint.is_none() && cointeraction_defect(&tower, t, false).is_some() {
            w_coint = Some(format!("co-interaction fails on {t}"));
        }
        if w_coint_times.is_none() && cointeraction_defect(&tower, t, true).is_some() {
            w_coint_times = Some(format!("multiplicative co-interaction fails on {t}"));
        }
    }
    report.push("splitting-collapse", basis.trees().len(), w_collapse);
    report.push("cointeraction", basis.trees().len(), w_coint);
    report.push(
        "cointeraction-multiplicative",
        basis.trees().len(),
        w_coint_times,
    );

    let mut w_plus = None;
    let mut w_antipode = None;
    let mut w_plus_deg = None;
    for p in basis.plus_trees() {
        if w_plus.is_none() {
            let mut lhs = PlusPlusComb::zero();
            for ((a, b), c) in hopf.delta_plus(p).iter() {
                for (a1, c1) in tower.m_plus(a).iter() {
                    for (b1, c2) in tower.m_plus(b).iter() {
                        lhs.add_term((a1.clone(), b1.clone()), c.clone() * c1 * c2);
                    }
                }
            }
            let rhs = {
                let mut out = PlusPlusComb::zero();
                for (q, c) in tower.m_plus(p).iter() {
                    for ((a, b), c2) in hopf.delta_plus(q).iter() {
                        out.add_term((a.clone(), b.clone()), c.clone() * c2);
                    }
                }
                out
            };
            if lhs != rhs {
                w_plus = Some(format!("positive co-interaction fails on {p}"));
            }
        }
        if w_antipode.is_none() {
            let lhs = tower.m_plus_comb(&hopf.antipode(p));
            let rhs = hopf.antipode_comb(&tower.m_plus(p));
            if lhs != rhs {
                w_antipode = Some(format!("antipode commutation fails on {p}"));
            }
        }
        if w_plus_deg.is_none() {
            let dp = p.degree(params);
            for (q, _) in tower.m_plus(p).iter() {
                if q.degree(params) != dp {
                    w_plus_deg = Some(format!("positive map changes degree on {p} -> {q}"));
                    break;
                }
            }
        }
    }
    report.push("cointeraction-plus", basis.plus_trees().len(), w_plus);
    report.push(
        "antipode-commutation",
        basis.plus_trees().len(),
        w_antipode,
    );
    report.push(
        "positive-map-degree-preserving",
        basis.plus_trees().len(),
        w_plus_deg,
    );

    // Decoration-off variant: must fail to preserve degrees and must break
    // the collapse or the co-interaction somewhere, witnessed.
    let cfg_off = PrepConfig {
        extended_decorations: false,
        extract_bare_noise: basis.spec().bare_noise_closure,
    };
    let ell_off = loop {
        let ell = random_character(basis, &cfg_off, &mut rng);
        if !ell.is_zero() {
            break ell;
        }
    };
    let prep_off = PrepMap::from_character(ell_off, cfg_off, params).expect("valid character");
    let tower_off = Tower::new(hopf, &prep_off);
    report.push_expecting_witness(
        "decoration-off-not-degree-preserving",
        audit_degree_preserving(&prep_off, basis.trees().iter(), params)
            .into_iter()
            .next()
            .map(|v| format!("{}: {}", v.tree, v.condition)),
    );
    let mut broken = None;
    for t in basis.trees() {
        let mut collapsed = TreePlusComb::zero();
        for (s, c) in tower_off.m_r(t).iter() {
            collapsed.add_term((s.clone(), PlusTree::one()), c.clone());
        }
        if tower_off.delta_r(t) != collapsed {
            broken = Some(format!("splitting-collapse breaks on {t}"));
            break;
        }
        if cointeraction_defect(&tower_off, t, false).is_some() {
            broken = Some(format!("cointeraction breaks on {t}"));
            break;
        }
    }
    report.push_expecting_witness("decoration-off-identity-failure", broken);
    report
}

/// Defect of the (multiplicative) co-interaction identity on one tree;
/// `None` when the identity holds.
fn cointeraction_defect(tower: &Tower<'_>, t: &DecoratedTree, times: bool) -> Option<()> {
    let hopf = tower.hopf();
    let m = if times {
        tower.m_times(t)
    } else {
        tower.m_r(t)
    };
    let mut lhs = TreePlusComb::zero();
    for (s, c) in m.iter() {
        for ((s1, p), c1) in hopf.delta(s).iter() {
            lhs.add_term((s1.clone(), p.clone()), c.clone() * c1);
        }
    }
    let mut rhs = TreePlusComb::zero();
    for ((sigma, p), c) in hopf.delta(t).iter() {
        let ms = if times {
            tower.m_times(sigma)
        } else {
            tower.m_r(sigma)
        };
        let mp = tower.m_plus(p);
        for (s1, c1) in ms.iter() {
            for (p1, c2) in mp.iter() {
                rhs.add_term((s1.clone(), p1.clone()), c.clone() * c1 * c2);
            }
        }
    }
    if lhs == rhs {
        None
    } else {
        Some(())
    }
}

/// Everything at once: preparation axioms, degree-preserving family,
/// positive splitting, commutation with grafting, and noise decrease.
pub fn tower_suite(basis: &Basis, n_chars: usize, seed: u64) -> SuiteReport {
    let params = basis.params();
    let hopf = basis.hopf();
    let mut report = SuiteReport::new("tower", &basis.spec().name);
    report.merge(prep_suite(basis, n_chars.min(5), seed));
    report.merge(degpres_suite(basis, seed.wrapping_add(1)));

    let cfg = PrepConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let ell = random_character(basis, &cfg, &mut rng);
    let prep = PrepMap::from_character(ell, cfg, params).expect("valid character");
    let tower = Tower::new(hopf, &prep);

    // M_R commutes with grafting on every basis tree.
    let mut witness = None;
    let mut count = 0usize;
    for t in basis.trees() {
        if let Some((a, arg)) = t.as_planted() {
            count += 1;
            let lhs = tower.m_r(t);
            let rhs = tower.m_r(arg).map_basis(|s| {
                TreeComb::from_basis(DecoratedTree::planted(a.clone(), s.clone()))
            });
            if lhs != rhs {
                witness = Some(format!("grafting commutation fails on {t}"));
                break;
            }
        }
    }
    report.push("grafting-commutation", count, witness);

    // Non-leading terms of M_R lose noises.
    let mut witness = None;
    for t in basis.trees() {
        let m = tower.m_r(t);
        if m.coeff(t) != rat_int(1) {
            witness = Some(format!("leading term of M_R on {t}"));
            break;
        }
        for (s, _) in m.iter() {
            if s != t && s.noise_count() >= t.noise_count() {
                witness = Some(format!("no noise decrease: {t} -> {s}"));
                break;
            }
        }
        if witness.is_some() {
            break;
        }
    }
    report.push("noise-decrease", basis.trees().len(), witness);

    // Positive splitting solves its defining relation.
    let mut witness = None;
    for p in basis.plus_trees() {
        if let Err(e) = tower.delta_r_plus_checked(p) {
            witness = Some(e.to_string());
            break;
        }
    }
    report.push(
        "positive-splitting-round-trip",
        basis.plus_trees().len(),
        witness,
    );

    // Positive splitting degree audit (observed upper triangularity).
    let mut witness = None;
    for p in basis.plus_trees() {
        let dp = p.degree(params);
        for ((left, _), _) in tower.delta_r_plus(p).iter() {
            if left.degree(params) < dp {
                witness = Some(format!("left slot {left} below degree of {p}"));
                break;
            }
        }
        if witness.is_some() {
            break;
        }
    }
    report.push(
        "positive-splitting-triangularity",
        basis.plus_trees().len(),
        witness,
    );

    // Degree bound on the positive map: deg(M+ σ) ≥ deg σ termwise.
    let mut witness = None;
    for p in basis.plus_trees() {
        let dp = p.degree(params);
        for (q, _) in tower.m_plus(p).iter() {
            if q.degree(params) < dp {
                witness = Some(format!("positive map lowers degree: {p} -> {q}"));
                break;
            }
        }
        if witness.is_some() {
            break;
        }
    }
    report.push("positive-map-degree-bound", basis.plus_trees().len(), witness);

    report
}

/// Comodule identity as a standalone helper used by tests.
pub fn comodule_holds(basis: &Basis, t: &DecoratedTree) -> bool {
    let hopf = basis.hopf();
    hopf.delta_then_left(t) == hopf.delta_then_right(t)
}

// Silence unused-import warnings for items used only in type positions.
#[allow(unused)]
fn _type_anchors(_: TreePlusPlusComb, _: Rat) {
    let _ = m_plus(&PlusPlusComb::zero());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::EquationSpec;

    #[test]
    fn hopf_suite_passes_on_small_spec() {
        let spec = EquationSpec {
            name: "linear".into(),
            params: crate::degree::Params::new(rat(-101, 100), rat(2, 1), 1),
            rules: vec![crate::rules::NodeShape::new(
                1,
                vec![crate::index::MultiIndex::zero()],
                false,
            )],
            degree_cutoff: rat(3, 2),
            noise_cutoff: 1,
            bare_noise_closure: false,
        };
        let basis = Basis::generate(spec).unwrap();
        let report = hopf_suite(&basis);
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn prep_suite_small() {
        let basis = Basis::generate(EquationSpec::kpz_desk()).unwrap();
        let report = prep_suite(&basis, 2, 7);
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn degpres_suite_small() {
        let basis = Basis::generate(EquationSpec::kpz_desk()).unwrap();
        let report = degpres_suite(&basis, 11);
        assert!(report.passed(), "{:?}", report.checks);
    }
}
