//! Six-way classification of grasp-state transitions.
//!
//! The cascade is ordered and the first matching rule wins:
//!
//! 1. same grasp, same grasp point, sliding        → `S`
//! 2. same grasp, same grasp point, not sliding    → `GM`
//! 3. starts from a lone environment contact        → `G`
//! 4. ends on a lone environment contact            → `R`
//! 5. the kinds of environment contact differ       → `Ex`
//! 6. anything else                                 → `RG`
//!
//! Releases onto a table both remove hands and change the extrinsic set;
//! checking the destination before the extrinsic kinds is what makes them
//! `R` rather than `Ex`.
//!
//! Rule 5 looks at which extrinsic kinds are present, not how many units use
//! them: `sh 2PPie` and `PP+Pie` both rest on the one table, and going from
//! one to the other is a regrasp.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ClassifyError;
use crate::grasp::{Geometry, GraspState, HandLoad};
use crate::notation::print_grasp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrimitiveType {
    Ex,
    G,
    R,
    RG,
    S,
    GM,
}

impl PrimitiveType {
    /// Reporting order.
    pub const ALL: [PrimitiveType; 6] =
        [PrimitiveType::Ex, PrimitiveType::G, PrimitiveType::R, PrimitiveType::RG, PrimitiveType::GM, PrimitiveType::S];

    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveType::Ex => "Ex",
            PrimitiveType::G => "G",
            PrimitiveType::R => "R",
            PrimitiveType::RG => "RG",
            PrimitiveType::S => "S",
            PrimitiveType::GM => "GM",
        }
    }

    /// Ex, G, R and RG change the grasp; S and GM keep it.
    pub fn is_regrasp(self) -> bool {
        matches!(self, PrimitiveType::Ex | PrimitiveType::G | PrimitiveType::R | PrimitiveType::RG)
    }

    pub fn description(self) -> &'static str {
        match self {
            PrimitiveType::Ex => "add or remove an extrinsic contact",
            PrimitiveType::G => "grasp from a single extrinsic contact",
            PrimitiveType::R => "release to a single extrinsic contact",
            PrimitiveType::RG => "regrasp",
            PrimitiveType::S => "slide the cloth through a fixed grasp",
            PrimitiveType::GM => "move with a fixed grasp",
        }
    }
}

impl fmt::Display for PrimitiveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrimitiveType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrimitiveType::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown primitive type \"{s}\" (expected one of Ex, G, R, RG, GM, S)"))
    }
}

/// Motion facts that grasp expressions alone cannot express.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TransitionFlags {
    pub sliding: bool,
    pub cloth_changed: bool,
    pub grasp_point_changed: bool,
}

/// The rule of the cascade that decided a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    SameGraspSliding,
    SameGraspMotion,
    FromSingleExtrinsic,
    ToSingleExtrinsic,
    ExtrinsicChange,
    Regrasp,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::SameGraspSliding => 1,
            Rule::SameGraspMotion => 2,
            Rule::FromSingleExtrinsic => 3,
            Rule::ToSingleExtrinsic => 4,
            Rule::ExtrinsicChange => 5,
            Rule::Regrasp => 6,
        }
    }

    pub fn primitive(self) -> PrimitiveType {
        match self {
            Rule::SameGraspSliding => PrimitiveType::S,
            Rule::SameGraspMotion => PrimitiveType::GM,
            Rule::FromSingleExtrinsic => PrimitiveType::G,
            Rule::ToSingleExtrinsic => PrimitiveType::R,
            Rule::ExtrinsicChange => PrimitiveType::Ex,
            Rule::Regrasp => PrimitiveType::RG,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Rule::SameGraspSliding => "same grasp, cloth slides through it",
            Rule::SameGraspMotion => "same grasp, no sliding",
            Rule::FromSingleExtrinsic => "pre is a single extrinsic contact",
            Rule::ToSingleExtrinsic => "post is a single extrinsic contact",
            Rule::ExtrinsicChange => "extrinsic contacts differ",
            Rule::Regrasp => "grasp changes with the same extrinsic contacts",
        };
        write!(f, "rule {} ({text})", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub primitive: PrimitiveType,
    pub rule_fired: Rule,
    pub regrasp: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn classify_transition(
    pre: &GraspState,
    post: &GraspState,
    flags: TransitionFlags,
) -> Result<ClassificationResult, ClassifyError> {
    let same = pre == post;
    if flags.sliding && !same {
        return Err(ClassifyError::InvalidTransition(format!(
            "sliding keeps the grasp, but {} differs from {}",
            print_grasp(pre),
            print_grasp(post)
        )));
    }

    let mut warnings = Vec::new();
    let rule = if same && !flags.grasp_point_changed {
        if flags.sliding {
            Rule::SameGraspSliding
        } else {
            if !flags.cloth_changed {
                warnings.push("fixed-grasp motion without a cloth-state change".to_string());
            }
            Rule::SameGraspMotion
        }
    } else if pre.is_single_extrinsic() {
        Rule::FromSingleExtrinsic
    } else if post.is_single_extrinsic() {
        Rule::ToSingleExtrinsic
    } else if pre.extrinsic_kinds() != post.extrinsic_kinds() {
        Rule::ExtrinsicChange
    } else {
        Rule::Regrasp
    };

    let primitive = rule.primitive();
    Ok(ClassificationResult { primitive, rule_fired: rule, regrasp: primitive.is_regrasp(), warnings })
}

fn count<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for it in items {
        *m.entry(it).or_insert(0) += 1;
    }
    m
}

// a - b over multisets, as a flat list
fn multiset_minus<T: Ord + Clone>(a: &BTreeMap<T, usize>, b: &BTreeMap<T, usize>) -> Vec<T> {
    let mut out = Vec::new();
    for (k, &n) in a {
        let m = b.get(k).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(k.clone(), n.saturating_sub(m)));
    }
    out
}

fn extrinsic_name(g: Geometry) -> String {
    crate::grasp::GraspUnit::environment(g).to_string()
}

fn load_name(load: &HandLoad) -> String {
    load.to_string()
}

/// A readable trace of the classification: the rule that fired, the
/// extrinsic contacts that changed and the hand loads engaged or released.
pub fn explain_transition(
    pre: &GraspState,
    post: &GraspState,
    flags: TransitionFlags,
) -> Result<String, ClassifyError> {
    let result = classify_transition(pre, post, flags)?;
    let mut lines = vec![
        format!("{} -> {}", print_grasp(pre), print_grasp(post)),
        format!("{}: {}", result.primitive, result.primitive.description()),
        format!("fired {}", result.rule_fired),
    ];

    let (pre_ex, post_ex) = (pre.extrinsic_kinds(), post.extrinsic_kinds());
    for g in post_ex.difference(&pre_ex) {
        lines.push(format!("added extrinsic {}", extrinsic_name(*g)));
    }
    for g in pre_ex.difference(&post_ex) {
        lines.push(format!("removed extrinsic {}", extrinsic_name(*g)));
    }
    let (pre_n, post_n) = (count(pre.extrinsic_multiset()), count(post.extrinsic_multiset()));
    for g in pre_ex.intersection(&post_ex) {
        let (a, b) = (pre_n[g], post_n[g]);
        if a != b {
            lines.push(format!("extrinsic {} used by {a} -> {b} units (same contact kind)", extrinsic_name(*g)));
        }
    }

    let pre_loads = count(pre.held_loads().cloned());
    let post_loads = count(post.held_loads().cloned());
    for l in multiset_minus(&post_loads, &pre_loads) {
        lines.push(format!("hand engages {}", load_name(&l)));
    }
    for l in multiset_minus(&pre_loads, &post_loads) {
        lines.push(format!("hand releases {}", load_name(&l)));
    }
    let pre_bm = count(pre.bimanual_units().cloned());
    let post_bm = count(post.bimanual_units().cloned());
    for u in multiset_minus(&post_bm, &pre_bm) {
        lines.push(format!("both hands engage bm {u}"));
    }
    for u in multiset_minus(&pre_bm, &post_bm) {
        lines.push(format!("both hands release bm {u}"));
    }
    if pre == post && flags.grasp_point_changed {
        lines.push("grasp point moves on the cloth with the same grasp".to_string());
    }
    lines.push(format!("hands in use: {} -> {}", pre.hands_used(), post.hands_used()));
    for w in &result.warnings {
        lines.push(format!("warning: {w}"));
    }
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::parse_grasp;

    fn c(pre: &str, post: &str, flags: TransitionFlags) -> PrimitiveType {
        classify_transition(&parse_grasp(pre).unwrap(), &parse_grasp(post).unwrap(), flags).unwrap().primitive
    }

    const NONE: TransitionFlags = TransitionFlags { sliding: false, cloth_changed: false, grasp_point_changed: false };

    #[test]
    fn examples() {
        assert_eq!(c("Pie", "2PP+Pie", NONE), PrimitiveType::G);
        assert_eq!(c("PP", "PP+Pie", NONE), PrimitiveType::Ex);
        assert_eq!(c("PP", "2PP", NONE), PrimitiveType::RG);
        assert_eq!(c("2PP+Pie", "Pie", NONE), PrimitiveType::R);
        assert_eq!(c("2PP", "2PP", TransitionFlags { sliding: true, ..NONE }), PrimitiveType::S);
        assert_eq!(c("2PP", "2PP", TransitionFlags { cloth_changed: true, ..NONE }), PrimitiveType::GM);
        assert_eq!(c("2PP", "2PP", TransitionFlags { grasp_point_changed: true, ..NONE }), PrimitiveType::RG);
        assert_eq!(c("sh 2PPie", "PP+Pie", NONE), PrimitiveType::RG);
        assert_eq!(c("PP+Pe", "PP+Pie", NONE), PrimitiveType::Ex);
    }

    #[test]
    fn sliding_requires_same_grasp() {
        let r = classify_transition(
            &parse_grasp("PP").unwrap(),
            &parse_grasp("2PP").unwrap(),
            TransitionFlags { sliding: true, ..NONE },
        );
        assert!(matches!(r, Err(ClassifyError::InvalidTransition(_))));
    }

    #[test]
    fn gm_without_cloth_change_warns() {
        let s = parse_grasp("PP").unwrap();
        let r = classify_transition(&s, &s, NONE).unwrap();
        assert_eq!(r.primitive, PrimitiveType::GM);
        assert_eq!(r.warnings.len(), 1);
        let r = classify_transition(&s, &s, TransitionFlags { cloth_changed: true, ..NONE }).unwrap();
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn explanations() {
        let text = explain_transition(&parse_grasp("PP+Pie").unwrap(), &parse_grasp("PP").unwrap(), NONE).unwrap();
        assert!(text.contains("removed extrinsic Pie"), "{text}");
        assert!(text.contains("rule 5"), "{text}");
        let text = explain_transition(&parse_grasp("Pie").unwrap(), &parse_grasp("PPPie").unwrap(), NONE).unwrap();
        assert!(text.contains("rule 3"), "{text}");
        let s = parse_grasp("2PP").unwrap();
        let text = explain_transition(&s, &s, TransitionFlags { cloth_changed: true, ..NONE }).unwrap();
        assert!(text.contains("GM"), "{text}");
    }

    #[test]
    fn primitive_names_round_trip() {
        for p in PrimitiveType::ALL {
            assert_eq!(p.as_str().parse::<PrimitiveType>().unwrap(), p);
        }
        assert!("X".parse::<PrimitiveType>().is_err());
    }
}
