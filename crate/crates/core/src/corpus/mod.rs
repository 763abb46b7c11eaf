//! The literature corpus: grippers, grasp instances, task scripts, the task
//! distribution over papers and the primitive ledger.
//!
//! A corpus is five JSON documents. Loading parses every grasp string and
//! resolves every cross-reference; semantic checks live in [`validate`].

mod schema;
pub mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::de::DeserializeOwned;

pub use schema::*;
pub use validate::{validate_corpus, validate_task, Diagnostic, DiagnosticKind};

use crate::error::SchemaError;

pub const GRIPPERS_FILE: &str = "grippers.json";
pub const GRASP_INSTANCES_FILE: &str = "grasp_instances.json";
pub const TASKS_FILE: &str = "tasks.json";
pub const DISTRIBUTION_FILE: &str = "distribution.json";
pub const LEDGER_FILE: &str = "primitives_ledger.json";

pub const DOCUMENT_NAMES: [&str; 5] = [GRIPPERS_FILE, GRASP_INSTANCES_FILE, TASKS_FILE, DISTRIBUTION_FILE, LEDGER_FILE];

/// A named corpus document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub content: String,
}

impl Document {
    pub fn new(name: impl Into<String>, content: impl Into<String>) -> Self {
        Document { name: name.into(), content: content.into() }
    }
}

const REFERENCE: [(&str, &str); 5] = [
    (GRIPPERS_FILE, include_str!("../../data/corpus/grippers.json")),
    (GRASP_INSTANCES_FILE, include_str!("../../data/corpus/grasp_instances.json")),
    (TASKS_FILE, include_str!("../../data/corpus/tasks.json")),
    (DISTRIBUTION_FILE, include_str!("../../data/corpus/distribution.json")),
    (LEDGER_FILE, include_str!("../../data/corpus/primitives_ledger.json")),
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub grippers: Vec<GripperProfile>,
    pub grasp_instances: Vec<GraspInstanceRecord>,
    pub tasks: Vec<TaskScript>,
    pub distribution: Distribution,
    pub ledger: PrimitiveLedger,
}

fn parse_doc<T: DeserializeOwned>(name: &str, content: &str) -> Result<T, SchemaError> {
    serde_json::from_str(content).map_err(|e| SchemaError::Malformed {
        file: name.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn dangling(file: &str, record: String, message: String) -> SchemaError {
    SchemaError::DanglingReference { file: file.to_string(), record, message }
}

fn invalid(file: &str, record: String, message: String) -> SchemaError {
    SchemaError::Invalid { file: file.to_string(), record, message }
}

/// Loads and links a corpus from its five documents, in any order.
pub fn load_corpus(documents: &[Document]) -> Result<Corpus, SchemaError> {
    let mut by_name: BTreeMap<&str, &str> = BTreeMap::new();
    for doc in documents {
        let base = doc.name.rsplit(['/', '\\']).next().unwrap_or(&doc.name);
        if !DOCUMENT_NAMES.contains(&base) {
            return Err(invalid(base, "document".into(), format!("unknown corpus document {base}")));
        }
        if by_name.insert(base, &doc.content).is_some() {
            return Err(invalid(base, "document".into(), "document given twice".into()));
        }
    }
    let get = |name: &str| by_name.get(name).copied().ok_or(SchemaError::MissingDocument { file: name.to_string() });

    let corpus = Corpus {
        grippers: parse_doc(GRIPPERS_FILE, get(GRIPPERS_FILE)?)?,
        grasp_instances: parse_doc(GRASP_INSTANCES_FILE, get(GRASP_INSTANCES_FILE)?)?,
        tasks: parse_doc(TASKS_FILE, get(TASKS_FILE)?)?,
        distribution: parse_doc(DISTRIBUTION_FILE, get(DISTRIBUTION_FILE)?)?,
        ledger: parse_doc(LEDGER_FILE, get(LEDGER_FILE)?)?,
    };
    corpus.link()?;
    Ok(corpus)
}

impl Corpus {
    /// The embedded reference corpus.
    pub fn reference() -> Corpus {
        load_corpus(&Corpus::reference_documents()).expect("embedded reference corpus is well-formed")
    }

    pub fn reference_documents() -> Vec<Document> {
        REFERENCE.iter().map(|(n, c)| Document::new(*n, *c)).collect()
    }

    /// Loads the five documents from a directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Corpus, SchemaError> {
        let dir = dir.as_ref();
        let mut docs = Vec::new();
        for name in DOCUMENT_NAMES {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(content) => docs.push(Document::new(name, content)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    return Err(SchemaError::MissingDocument { file: path.display().to_string() });
                }
                Err(e) => return Err(SchemaError::Io { path: path.display().to_string(), message: e.to_string() }),
            }
        }
        load_corpus(&docs)
    }

    pub fn gripper(&self, id: &str) -> Option<&GripperProfile> {
        self.grippers.iter().find(|g| g.id == id)
    }

    pub fn task(&self, id: &str) -> Option<&TaskScript> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Resolves a `task/number` reference.
    pub fn step(&self, reference: &str) -> Option<(&TaskScript, &StepRecord)> {
        let (t, n) = split_step_ref(reference)?;
        let task = self.task(t)?;
        Some((task, task.step(n)?))
    }

    pub fn paper_keys(&self) -> BTreeSet<&str> {
        self.distribution.papers.iter().map(|p| p.key.as_str()).collect()
    }

    /// A copy without one task. Rows and ledger references to it are
    /// dropped as well, so the result is still linked.
    pub fn without_task(&self, id: &str) -> Corpus {
        let mut c = self.clone();
        c.tasks.retain(|t| t.id != id);
        c.distribution.rows.retain(|r| r.task_id != id);
        c.distribution.errata.retain(|e| e.task_id != id);
        for row in &mut c.ledger.rows {
            row.steps.retain(|r| split_step_ref(r).is_none_or(|(t, _)| t != id));
        }
        c
    }

    // cross-reference resolution; anything that cannot be linked is a schema error
    fn link(&self) -> Result<(), SchemaError> {
        let mut seen = BTreeSet::new();
        for g in &self.grippers {
            if !seen.insert(g.id.as_str()) {
                return Err(invalid(GRIPPERS_FILE, format!("gripper {}", g.id), "duplicate gripper id".into()));
            }
        }

        let papers = self.paper_keys();
        if papers.len() != self.distribution.papers.len() {
            return Err(invalid(DISTRIBUTION_FILE, "papers".into(), "duplicate paper key".into()));
        }

        for (i, rec) in self.grasp_instances.iter().enumerate() {
            let record = format!("record {} ({} {})", i + 1, rec.citation, rec.grasp);
            if self.gripper(&rec.gripper_id).is_none() {
                return Err(dangling(GRASP_INSTANCES_FILE, record, format!("unknown gripper \"{}\"", rec.gripper_id)));
            }
            if !papers.contains(rec.citation.as_str()) {
                return Err(dangling(GRASP_INSTANCES_FILE, record, format!("unknown citation \"{}\"", rec.citation)));
            }
        }

        let mut seen = BTreeSet::new();
        for t in &self.tasks {
            if !seen.insert(t.id.as_str()) {
                return Err(invalid(TASKS_FILE, format!("task {}", t.id), "duplicate task id".into()));
            }
            if t.steps.is_empty() {
                return Err(invalid(TASKS_FILE, format!("task {}", t.id), "task has no steps".into()));
            }
            let mut numbers = BTreeSet::new();
            for s in &t.steps {
                if !numbers.insert(s.number.as_str()) {
                    return Err(invalid(TASKS_FILE, format!("task {}", t.id), format!("duplicate step {}", s.number)));
                }
            }
            for e in &t.exceptions {
                if let Some(n) = &e.step {
                    if t.step(n).is_none() {
                        return Err(dangling(
                            TASKS_FILE,
                            format!("task {}", t.id),
                            format!("exception names missing step {n}"),
                        ));
                    }
                }
            }
        }

        for row in &self.distribution.rows {
            let record = format!("row {}", row.task_id);
            if self.task(&row.task_id).is_none() {
                return Err(dangling(DISTRIBUTION_FILE, record, format!("unknown task \"{}\"", row.task_id)));
            }
            for c in row.citations.iter().chain(row.annotations.iter().map(|a| &a.citation)) {
                if !papers.contains(c.as_str()) {
                    return Err(dangling(DISTRIBUTION_FILE, record, format!("unknown citation \"{c}\"")));
                }
            }
            for a in &row.annotations {
                if !self.distribution.footnotes.contains_key(&a.footnote) {
                    return Err(dangling(DISTRIBUTION_FILE, record, format!("unknown footnote \"{}\"", a.footnote)));
                }
            }
        }
        for e in &self.distribution.errata {
            let record = format!("erratum {} {}", e.task_id, e.citation);
            if !self.distribution.rows.iter().any(|r| r.task_id == e.task_id) {
                return Err(dangling(DISTRIBUTION_FILE, record, format!("no row for task \"{}\"", e.task_id)));
            }
            if !papers.contains(e.citation.as_str()) {
                return Err(dangling(DISTRIBUTION_FILE, record, format!("unknown citation \"{}\"", e.citation)));
            }
        }

        for row in &self.ledger.rows {
            for r in &row.steps {
                if self.step(r).is_none() {
                    return Err(dangling(
                        LEDGER_FILE,
                        format!("row {}", row.id),
                        format!("step \"{r}\" does not exist"),
                    ));
                }
            }
        }
        for k in &self.ledger.known_inconsistencies {
            if !self.ledger.rows.iter().any(|r| r.id == k.row) {
                return Err(dangling(
                    LEDGER_FILE,
                    "known_inconsistencies".into(),
                    format!("unknown row \"{}\"", k.row),
                ));
            }
        }
        Ok(())
    }
}
