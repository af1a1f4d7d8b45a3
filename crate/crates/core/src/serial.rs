//! JSON formats: spec files, character files, combination dumps, basis dumps
//! and suite reports. Rationals travel as strings like `-3/2`.

use crate::degree::Params;
use crate::error::CoreError;
use crate::grammar::parse_tree;
use crate::index::MultiIndex;
use crate::lincomb::{BasisDisplay, BasisElement, LinComb};
use crate::prep::{Character, PrepConfig};
use crate::rules::{Basis, EquationSpec, NodeShape, SubcritReport};
use crate::suites::SuiteReport;
use crate::{parse_rat, Rat};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeFile {
    pub max_noise: u32,
    pub kernel_edges: Vec<Vec<u32>>,
    pub poly: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecFile {
    pub name: String,
    pub alpha: String,
    pub beta: String,
    pub d: usize,
    pub rules: Vec<ShapeFile>,
    pub degree_cutoff: String,
    pub noise_cutoff: u32,
    #[serde(default)]
    pub bare_noise_closure: bool,
}

impl SpecFile {
    pub fn from_spec(spec: &EquationSpec) -> Self {
        SpecFile {
            name: spec.name.clone(),
            alpha: spec.params.alpha.to_string(),
            beta: spec.params.beta.to_string(),
            d: spec.params.dim,
            rules: spec
                .rules
                .iter()
                .map(|s| ShapeFile {
                    max_noise: s.max_noise,
                    kernel_edges: s
                        .kernel_labels
                        .iter()
                        .map(|a| a.entries().to_vec())
                        .collect(),
                    poly: s.poly_allowed,
                })
                .collect(),
            degree_cutoff: spec.degree_cutoff.to_string(),
            noise_cutoff: spec.noise_cutoff,
            bare_noise_closure: spec.bare_noise_closure,
        }
    }

    pub fn into_spec(self) -> Result<EquationSpec, CoreError> {
        let spec = EquationSpec {
            name: self.name,
            params: Params::new(parse_rat(&self.alpha)?, parse_rat(&self.beta)?, self.d),
            rules: self
                .rules
                .into_iter()
                .map(|s| {
                    NodeShape::new(
                        s.max_noise,
                        s.kernel_edges
                            .into_iter()
                            .map(MultiIndex::new)
                            .collect(),
                        s.poly,
                    )
                })
                .collect(),
            degree_cutoff: parse_rat(&self.degree_cutoff)?,
            noise_cutoff: self.noise_cutoff,
            bare_noise_closure: self.bare_noise_closure,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn spec_to_json(spec: &EquationSpec) -> String {
    serde_json::to_string_pretty(&SpecFile::from_spec(spec)).expect("spec serializes")
}

pub fn spec_from_json(text: &str) -> Result<EquationSpec, CoreError> {
    let file: SpecFile = serde_json::from_str(text)?;
    file.into_spec()
}

pub fn load_spec(path: &std::path::Path) -> Result<EquationSpec, CoreError> {
    spec_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharEntry {
    pub tree: String,
    pub value: String,
}

fn default_true() -> bool {
    true
}

/// Character file: either a bare list of entries or an object carrying the
/// extraction flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharFile {
    pub character: Vec<CharEntry>,
    #[serde(default = "default_true")]
    pub extended_decorations: bool,
    #[serde(default)]
    pub extract_bare_noise: bool,
}

impl CharFile {
    pub fn from_parts(ell: &Character, cfg: &PrepConfig) -> Self {
        CharFile {
            character: ell
                .support()
                .map(|(t, v)| CharEntry {
                    tree: t.to_string(),
                    value: v.to_string(),
                })
                .collect(),
            extended_decorations: cfg.extended_decorations,
            extract_bare_noise: cfg.extract_bare_noise,
        }
    }

    pub fn into_parts(self) -> Result<(Character, PrepConfig), CoreError> {
        let mut ell = Character::zero();
        for entry in self.character {
            ell.set(parse_tree(&entry.tree)?, parse_rat(&entry.value)?);
        }
        Ok((
            ell,
            PrepConfig {
                extended_decorations: self.extended_decorations,
                extract_bare_noise: self.extract_bare_noise,
            },
        ))
    }
}

pub fn character_from_json(text: &str) -> Result<(Character, PrepConfig), CoreError> {
    if let Ok(file) = serde_json::from_str::<CharFile>(text) {
        return file.into_parts();
    }
    let entries: Vec<CharEntry> = serde_json::from_str(text)?;
    CharFile {
        character: entries,
        extended_decorations: true,
        extract_bare_noise: false,
    }
    .into_parts()
}

pub fn character_to_json(ell: &Character, cfg: &PrepConfig) -> String {
    serde_json::to_string_pretty(&CharFile::from_parts(ell, cfg)).expect("character serializes")
}

pub fn load_character(path: &std::path::Path) -> Result<(Character, PrepConfig), CoreError> {
    character_from_json(&std::fs::read_to_string(path)?)
}

/// `{"terms":[{"coef":"-3/2","basis":"Xi"}, ...]}` with deterministic term
/// order.
pub fn comb_to_json<B: BasisElement + BasisDisplay>(u: &LinComb<B>) -> Value {
    let terms: Vec<Value> = u
        .iter()
        .map(|(b, c)| json!({"coef": c.to_string(), "basis": b.basis_text()}))
        .collect();
    json!({ "terms": terms })
}

pub fn rat_str(r: &Rat) -> String {
    r.to_string()
}

pub fn basis_to_json(basis: &Basis, subcrit: &SubcritReport, closure_ok: bool) -> Value {
    let params = basis.params();
    let trees: Vec<Value> = basis
        .trees()
        .iter()
        .map(|t| {
            json!({
                "expr": t.to_string(),
                "degree": t.degree(params).to_string(),
                "noises": t.noise_count(),
            })
        })
        .collect();
    let plus: Vec<Value> = basis
        .plus_trees()
        .iter()
        .map(|p| {
            json!({
                "expr": p.to_string(),
                "degree": p.degree(params).to_string(),
            })
        })
        .collect();
    json!({
        "spec": serde_json::to_value(SpecFile::from_spec(basis.spec())).unwrap(),
        "trees": trees,
        "plus_trees": plus,
        "subcriticality": {
            "degree_classes": subcrit
                .degree_classes
                .iter()
                .map(|(d, n)| json!([d.to_string(), n]))
                .collect::<Vec<_>>(),
            "rounds": subcrit.rounds,
            "noise_grows": subcrit.noise_grows,
        },
        "closure_ok": closure_ok,
    })
}

pub fn report_to_json(report: &SuiteReport) -> Value {
    json!({
        "suite": report.suite,
        "spec": report.spec,
        "passed": report.passed(),
        "checks": report
            .checks
            .iter()
            .map(|c| {
                json!({
                    "label": c.label,
                    "passed": c.passed,
                    "instances": c.instances,
                    "witness": c.witness,
                })
            })
            .collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincomb::TreeComb;
    use crate::rat;
    use crate::tree::DecoratedTree;

    #[test]
    fn spec_round_trip() {
        for spec in [
            EquationSpec::pam_desk(),
            EquationSpec::kpz_desk(),
            EquationSpec::phi4_desk(),
        ] {
            let text = spec_to_json(&spec);
            let back = spec_from_json(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn unicode_minus_in_spec() {
        let text = r#"{"name":"t","alpha":"−3/2","beta":"2","d":1,
            "rules":[],"degree_cutoff":"1","noise_cutoff":1}"#;
        let spec = spec_from_json(text).unwrap();
        assert_eq!(spec.params.alpha, rat(-3, 2));
    }

    #[test]
    fn character_round_trip_and_bare_list() {
        let mut ell = Character::zero();
        ell.set(parse_tree("I[Xi] Xi").unwrap(), rat(-3, 2));
        let cfg = PrepConfig::default();
        let text = character_to_json(&ell, &cfg);
        let (back, back_cfg) = character_from_json(&text).unwrap();
        assert_eq!(back, ell);
        assert_eq!(back_cfg, cfg);

        let bare = r#"[{"tree": "I[Xi] Xi", "value": "-3/2"}]"#;
        let (from_bare, cfg2) = character_from_json(bare).unwrap();
        assert_eq!(from_bare, ell);
        assert!(cfg2.extended_decorations);
    }

    #[test]
    fn comb_json_shape() {
        let u = TreeComb::from_term(DecoratedTree::xi(), rat(1, 1));
        let v = comb_to_json(&u);
        assert_eq!(
            v,
            serde_json::json!({"terms": [{"coef": "1", "basis": "Xi"}]})
        );
    }
}
