//! Semantic checks over task scripts and across the corpus tables.
//!
//! Validators never fail; they return diagnostics. Documented exceptions and
//! known inconsistencies downgrade what would be an error to a warning.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{ErratumAction, ExceptionKind, TaskScript};
use super::Corpus;
use crate::classifier::{classify_transition, PrimitiveType};
use crate::grasp::{Component, GraspState, HandLoad, DEFAULT_HANDS};
use crate::notation::Severity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    ChainBreak,
    EndState,
    LabelMismatch,
    InvalidTransition,
    HandOveruse,
    UnusedException,
    Capability,
    Source,
    RowCount,
    PaperTotal,
    Erratum,
    MissingRow,
    LedgerLabel,
    LedgerCoverage,
    LedgerMultiplicity,
    LedgerTotal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, kind: DiagnosticKind, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity, kind, location: location.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        write!(f, "{}[{}] {}: {}", self.severity, kind, self.location, self.message)
    }
}

fn downgrade(documented: bool) -> Severity {
    if documented {
        Severity::Warning
    } else {
        Severity::Error
    }
}

/// Checks one task: the chain start → steps → end, the printed labels
/// against the classifier, and hand usage.
pub fn validate_task(task: &TaskScript) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let at = |n: &str| format!("task {} step {n}", task.id);
    let mut used_exceptions = vec![false; task.exceptions.len()];
    let mut documented = |kind: ExceptionKind, step: Option<&str>| -> Option<String> {
        let i = task.exceptions.iter().position(|e| e.kind == kind && e.step.as_deref() == step)?;
        used_exceptions[i] = true;
        Some(task.exceptions[i].note.clone())
    };

    let mut prev: (&GraspState, String) = (&task.start.grasp, "start".to_string());
    for step in &task.steps {
        if step.pre != *prev.0 {
            let note = documented(ExceptionKind::Chain, Some(&step.number));
            out.push(Diagnostic::new(
                downgrade(note.is_some()),
                DiagnosticKind::ChainBreak,
                at(&step.number),
                format!(
                    "pre {} does not match {} state {}{}",
                    step.pre,
                    prev.1,
                    prev.0,
                    note.map(|n| format!(" (documented: {n})")).unwrap_or_default()
                ),
            ));
        }

        for (which, s) in [("pre", &step.pre), ("post", &step.post)] {
            if s.hands_used() > DEFAULT_HANDS as usize {
                out.push(Diagnostic::new(
                    Severity::Error,
                    DiagnosticKind::HandOveruse,
                    at(&step.number),
                    format!("{which} state {s} uses {} hands", s.hands_used()),
                ));
            }
        }

        match classify_transition(&step.pre, &step.post, step.flags) {
            Err(e) => out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::InvalidTransition,
                at(&step.number),
                e.to_string(),
            )),
            Ok(r) if r.primitive != step.label => {
                let note = documented(ExceptionKind::Label, Some(&step.number));
                out.push(Diagnostic::new(
                    downgrade(note.is_some()),
                    DiagnosticKind::LabelMismatch,
                    at(&step.number),
                    format!(
                        "printed {} but {} -> {} classifies as {} by {}{}",
                        step.label,
                        step.pre,
                        step.post,
                        r.primitive,
                        r.rule_fired,
                        note.map(|n| format!(" (documented: {n})")).unwrap_or_default()
                    ),
                ));
            }
            Ok(_) => {}
        }
        prev = (&step.post, format!("step {} post", step.number));
    }

    if task.end.grasp != *prev.0 {
        let note = documented(ExceptionKind::EndState, None);
        out.push(Diagnostic::new(
            downgrade(note.is_some()),
            DiagnosticKind::EndState,
            format!("task {} end", task.id),
            format!(
                "end state {} does not match {} state {}{}",
                task.end.grasp,
                prev.1,
                prev.0,
                note.map(|n| format!(" (documented: {n})")).unwrap_or_default()
            ),
        ));
    }

    for (e, used) in task.exceptions.iter().zip(used_exceptions) {
        if !used {
            let loc = match &e.step {
                Some(n) => at(n),
                None => format!("task {}", task.id),
            };
            out.push(Diagnostic::new(
                Severity::Warning,
                DiagnosticKind::UnusedException,
                loc,
                format!("documented {:?} exception does not occur", e.kind),
            ));
        }
    }
    out
}

/// Runs every task check and the cross-table checks.
pub fn validate_corpus(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = corpus.tasks.iter().flat_map(validate_task).collect();
    check_grasp_instances(corpus, &mut out);
    check_distribution(corpus, &mut out);
    check_ledger(corpus, &mut out);
    out
}

fn check_grasp_instances(corpus: &Corpus, out: &mut Vec<Diagnostic>) {
    for g in &corpus.grippers {
        if g.capabilities.is_empty() {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::Capability,
                format!("gripper {}", g.id),
                "gripper lists no capabilities",
            ));
        }
    }
    for (i, rec) in corpus.grasp_instances.iter().enumerate() {
        let Some(gripper) = corpus.gripper(&rec.gripper_id) else { continue };
        let loc = format!("grasp instance {} ({}, gripper {})", i + 1, rec.citation, rec.gripper_id);
        if !gripper.source_refs.contains(&rec.citation) {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::Source,
                &loc,
                format!("{} is not listed as a user of gripper {}", rec.citation, gripper.id),
            ));
        }
        for c in rec.grasp.components() {
            let load = match c {
                Component::Held(load) => load.clone(),
                Component::Bimanual(u) => HandLoad::Single(u.clone()),
                Component::Environment(_) => continue,
            };
            if !gripper.can_hold(&load) {
                out.push(Diagnostic::new(
                    Severity::Error,
                    DiagnosticKind::Capability,
                    &loc,
                    format!("grasp {} needs {load}, which gripper {} cannot realize", rec.grasp, gripper.id),
                ));
            }
        }
    }
}

fn check_distribution(corpus: &Corpus, out: &mut Vec<Diagnostic>) {
    let dist = &corpus.distribution;
    let raw_column = |key: &str| dist.rows.iter().filter(|r| r.citations.iter().any(|c| c == key)).count();

    for e in &dist.errata {
        let loc = format!("distribution erratum {} {}", e.task_id, e.citation);
        let Some(row) = dist.rows.iter().find(|r| r.task_id == e.task_id) else { continue };
        let Some(paper) = dist.papers.iter().find(|p| p.key == e.citation) else { continue };
        let (marks, col) = (row.citations.len(), raw_column(&e.citation));
        let present = row.citations.contains(&e.citation);
        let justified = match e.action {
            ErratumAction::Add => !present && marks < row.count && col < paper.tt,
            ErratumAction::Remove => present && marks > row.count && col > paper.tt,
        };
        if justified {
            out.push(Diagnostic::new(
                Severity::Warning,
                DiagnosticKind::Erratum,
                loc,
                format!("applied: {}", e.justification),
            ));
        } else {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::Erratum,
                loc,
                format!(
                    "not justified by the totals (row {} marks vs count {}, column {col} marks vs total {})",
                    marks, row.count, paper.tt
                ),
            ));
        }
    }

    let effective = dist.effective_rows();
    for (row, (task_id, cites)) in dist.rows.iter().zip(&effective) {
        if cites.len() != row.count {
            let known = dist.known_row_count(task_id);
            out.push(Diagnostic::new(
                downgrade(known.is_some()),
                DiagnosticKind::RowCount,
                format!("distribution row {task_id}"),
                format!(
                    "count column says {} but {} papers are marked{}",
                    row.count,
                    cites.len(),
                    known.map(|k| format!(" (known: {})", k.note)).unwrap_or_default()
                ),
            ));
        }
    }

    for paper in &dist.papers {
        let total = effective.iter().filter(|(_, c)| c.contains(&paper.key)).count();
        if total != paper.tt {
            let known = dist.known_paper_total(&paper.key);
            out.push(Diagnostic::new(
                downgrade(known.is_some()),
                DiagnosticKind::PaperTotal,
                format!("distribution column {}", paper.key),
                format!(
                    "total row says {} but {total} tasks are marked{}",
                    paper.tt,
                    known.map(|k| format!(" (known: {})", k.note)).unwrap_or_default()
                ),
            ));
        }
    }

    for t in &corpus.tasks {
        if !dist.rows.iter().any(|r| r.task_id == t.id) {
            out.push(Diagnostic::new(
                Severity::Warning,
                DiagnosticKind::MissingRow,
                format!("task {}", t.id),
                "task has no distribution row",
            ));
        }
    }
}

fn check_ledger(corpus: &Corpus, out: &mut Vec<Diagnostic>) {
    let ledger = &corpus.ledger;
    let mut refs: BTreeMap<(String, String), usize> = BTreeMap::new();

    for row in &ledger.rows {
        let loc = format!("ledger row {}", row.id);
        for r in &row.steps {
            let Some((task, step)) = corpus.step(r) else { continue };
            *refs.entry((task.id.clone(), step.number.clone())).or_insert(0) += 1;
            if step.label != row.primitive {
                out.push(Diagnostic::new(
                    Severity::Error,
                    DiagnosticKind::LedgerLabel,
                    &loc,
                    format!("step {r} is labelled {} but the row describes {}", step.label, row.primitive),
                ));
            }
        }
        if row.steps.is_empty() {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::LedgerCoverage,
                &loc,
                "primitive is not realized by any task step",
            ));
        } else if row.steps.len() != row.printed {
            let known = ledger.known_inconsistencies.iter().find(|k| k.row == row.id);
            out.push(Diagnostic::new(
                downgrade(known.is_some()),
                DiagnosticKind::LedgerMultiplicity,
                &loc,
                format!(
                    "printed multiplicity {} but {} steps realize it{}",
                    row.printed,
                    row.steps.len(),
                    known.map(|k| format!(" (known: {})", k.note)).unwrap_or_default()
                ),
            ));
        }
    }

    for t in &corpus.tasks {
        for s in &t.steps {
            let n = refs.get(&(t.id.clone(), s.number.clone())).copied().unwrap_or(0);
            if n != 1 {
                out.push(Diagnostic::new(
                    Severity::Error,
                    DiagnosticKind::LedgerCoverage,
                    format!("task {} step {}", t.id, s.number),
                    format!("step is described by {n} ledger rows, expected exactly 1"),
                ));
            }
        }
    }

    for p in PrimitiveType::ALL {
        let Some(&printed) = ledger.printed_totals.get(&p) else { continue };
        let row_sum: usize = ledger.rows.iter().filter(|r| r.primitive == p).map(|r| r.printed).sum();
        let steps = corpus.tasks.iter().flat_map(|t| &t.steps).filter(|s| s.label == p).count();
        if row_sum != printed || steps != printed {
            out.push(Diagnostic::new(
                Severity::Error,
                DiagnosticKind::LedgerTotal,
                format!("ledger total {p}"),
                format!("printed total {printed}, rows add up to {row_sum}, task steps labelled {p}: {steps}"),
            ));
        }
    }
}
