//! Record types of the corpus documents. Field names are the wire names.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::{PrimitiveType, TransitionFlags};
use crate::grasp::{ClothStateTag, GraspPointClass, GraspState, Hand, HandLoad};

/// A gripper and the one-hand grasps it can realize.
///
/// Capabilities are hand loads rather than bare units so that single-handed
/// pairs such as `sh 2PPie` can be listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperProfile {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub source_refs: Vec<String>,
    pub capabilities: Vec<HandLoad>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl GripperProfile {
    pub fn can_hold(&self, load: &HandLoad) -> bool {
        self.capabilities.contains(load)
    }
}

/// One grasp form used by one cited work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspInstanceRecord {
    pub citation: String,
    pub gripper_id: String,
    pub grasp: GraspState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Who performs a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Actor {
    Hand(Hand),
    Both,
    #[default]
    Unspecified,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Hand(h) => write!(f, "{h}"),
            Actor::Both => f.write_str("Both"),
            Actor::Unspecified => f.write_str("Unspecified"),
        }
    }
}

impl std::str::FromStr for Actor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Both" => Ok(Actor::Both),
            "Unspecified" => Ok(Actor::Unspecified),
            _ => s
                .strip_prefix('H')
                .and_then(|n| n.parse::<u8>().ok())
                .filter(|&n| n >= 1)
                .map(|n| Actor::Hand(Hand(n - 1)))
                .ok_or_else(|| format!("unknown actor \"{s}\" (expected H1, H2, Both or Unspecified)")),
        }
    }
}

impl Serialize for Actor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Actor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Step number as printed, e.g. `"3"`, `"4a"`, `"1alt"`.
    pub number: String,
    #[serde(default)]
    pub actor: Actor,
    pub label: PrimitiveType,
    pub pre: GraspState,
    pub post: GraspState,
    #[serde(default)]
    pub flags: TransitionFlags,
    #[serde(default)]
    pub grasp_point: GraspPointClass,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub grasp: GraspState,
    #[serde(default)]
    pub cloth: ClothStateTag,
    #[serde(default)]
    pub grasp_point: GraspPointClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndState {
    pub grasp: GraspState,
    #[serde(default)]
    pub cloth: ClothStateTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionKind {
    /// The printed label disagrees with the classifier.
    Label,
    /// A step does not start where the previous one ended.
    Chain,
    /// The last step does not end in the printed end state.
    EndState,
}

/// A documented disagreement between the printed task and the rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskException {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    pub kind: ExceptionKind,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScript {
    pub id: String,
    pub name: String,
    pub start: StartState,
    pub steps: Vec<StepRecord>,
    pub end: EndState,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptions: Vec<TaskException>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

impl TaskScript {
    pub fn step(&self, number: &str) -> Option<&StepRecord> {
        self.steps.iter().find(|s| s.number == number)
    }

    pub fn exception(&self, kind: ExceptionKind, step: Option<&str>) -> Option<&TaskException> {
        self.exceptions.iter().find(|e| e.kind == kind && e.step.as_deref() == step)
    }
}

/// A cited work as a column of the task distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub key: String,
    pub name: String,
    /// Printed number of tasks addressed.
    pub tt: usize,
}

/// A footnote marker attached to one mark of a row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkAnnotation {
    pub citation: String,
    pub footnote: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDistributionRecord {
    pub task_id: String,
    /// Printed count column.
    pub count: usize,
    /// Marked papers, as printed.
    pub citations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<MarkAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErratumAction {
    Add,
    Remove,
}

/// A correction to a printed mark, justified by both a row and a column total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erratum {
    pub task_id: String,
    pub action: ErratumAction,
    pub citation: String,
    pub justification: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InconsistencyKind {
    RowCount,
    PaperTotal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownInconsistency {
    pub kind: InconsistencyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Distribution {
    pub papers: Vec<PaperRecord>,
    #[serde(default)]
    pub footnotes: BTreeMap<String, String>,
    pub rows: Vec<TaskDistributionRecord>,
    #[serde(default)]
    pub errata: Vec<Erratum>,
    #[serde(default)]
    pub known_inconsistencies: Vec<KnownInconsistency>,
}

impl Distribution {
    /// Citation sets per task with the errata applied, in row order.
    pub fn effective_rows(&self) -> Vec<(String, Vec<String>)> {
        self.rows
            .iter()
            .map(|row| {
                let mut cites = row.citations.clone();
                for e in self.errata.iter().filter(|e| e.task_id == row.task_id) {
                    match e.action {
                        ErratumAction::Add => {
                            if !cites.contains(&e.citation) {
                                cites.push(e.citation.clone());
                            }
                        }
                        ErratumAction::Remove => cites.retain(|c| c != &e.citation),
                    }
                }
                (row.task_id.clone(), cites)
            })
            .collect()
    }

    pub fn known_row_count(&self, task_id: &str) -> Option<&KnownInconsistency> {
        self.known_inconsistencies
            .iter()
            .find(|k| k.kind == InconsistencyKind::RowCount && k.task_id.as_deref() == Some(task_id))
    }

    pub fn known_paper_total(&self, citation: &str) -> Option<&KnownInconsistency> {
        self.known_inconsistencies
            .iter()
            .find(|k| k.kind == InconsistencyKind::PaperTotal && k.citation.as_deref() == Some(citation))
    }
}

/// One distinct primitive with the steps that realize it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub id: String,
    pub primitive: PrimitiveType,
    pub description: String,
    /// Printed multiplicity.
    pub printed: usize,
    /// Step references of the form `task/number`.
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerInconsistency {
    pub row: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrimitiveLedger {
    pub rows: Vec<LedgerRow>,
    pub printed_totals: BTreeMap<PrimitiveType, usize>,
    #[serde(default)]
    pub known_inconsistencies: Vec<LedgerInconsistency>,
}

/// Splits `task/number`.
pub fn split_step_ref(r: &str) -> Option<(&str, &str)> {
    r.split_once('/').filter(|(t, n)| !t.is_empty() && !n.is_empty())
}
