//! Tallies over the corpus and enumeration of the bounded grasp space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::PrimitiveType;
use crate::corpus::Corpus;
use crate::error::EnumerationError;
use crate::grasp::{Component, GraspState, GraspUnit, HandLoad, VirtualFinger};
use crate::notation::print_grasp;
use crate::par::{self, Execution};

/// Default cap on the number of enumerated states.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Label attached to per-grasp usage counts: they are recounted from the
/// grasp-instance records, not copied from a printed figure.
pub const USAGE_SOURCE: &str = "derived from the grasp-instance table";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyEntry {
    pub key: String,
    pub count: usize,
}

/// Counts per key plus their sum. Entries keep a meaningful order (report
/// order for primitives, row order for tasks, descending count for grasps).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyReport {
    pub title: String,
    pub entries: Vec<TallyEntry>,
    pub total: usize,
}

impl TallyReport {
    fn new(title: &str, entries: impl IntoIterator<Item = (String, usize)>) -> Self {
        let entries: Vec<TallyEntry> = entries.into_iter().map(|(key, count)| TallyEntry { key, count }).collect();
        let total = entries.iter().map(|e| e.count).sum();
        TallyReport { title: title.to_string(), entries, total }
    }

    /// Count for a key; zero when absent.
    pub fn get(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.key == key).map_or(0, |e| e.count)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }

    /// `k=v` pairs on one line followed by the total.
    pub fn summary_line(&self) -> String {
        let mut parts: Vec<String> = self.entries.iter().map(|e| format!("{}={}", e.key, e.count)).collect();
        parts.push(format!("total={}", self.total));
        parts.join(" ")
    }
}

impl fmt::Display for TallyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        let width = self.entries.iter().map(|e| e.key.chars().count()).max().unwrap_or(0).max(5);
        for e in &self.entries {
            writeln!(f, "  {:<width$}  {}", e.key, e.count)?;
        }
        write!(f, "  {:<width$}  {}", "total", self.total)
    }
}

fn count_by<K: Ord>(items: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for k in items {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

/// Occurrences of each grasp form over the grasp-instance records, most used
/// first (ties by canonical print).
pub fn grasp_instance_tally(corpus: &Corpus) -> TallyReport {
    let counts = count_by(corpus.grasp_instances.iter().map(|r| print_grasp(&r.grasp)));
    let mut entries: Vec<(String, usize)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    TallyReport::new("grasp instances", entries)
}

/// Steps per primitive type over all task scripts, in report order.
pub fn primitive_tally(corpus: &Corpus) -> TallyReport {
    let counts = count_by(corpus.tasks.iter().flat_map(|t| t.steps.iter().map(|s| s.label)));
    TallyReport::new(
        "primitives",
        PrimitiveType::ALL.iter().map(|p| (p.to_string(), counts.get(p).copied().unwrap_or(0))),
    )
}

/// Steps per distinct primitive (ledger row), counting only references that
/// resolve in this corpus.
pub fn primitive_row_tally(corpus: &Corpus) -> TallyReport {
    TallyReport::new(
        "distinct primitives",
        corpus.ledger.rows.iter().map(|row| {
            let n = row.steps.iter().filter(|r| corpus.step(r).is_some_and(|(_, s)| s.label == row.primitive)).count();
            (row.id.clone(), n)
        }),
    )
}

/// Papers per task, with the errata applied, in row order.
pub fn task_distribution(corpus: &Corpus) -> TallyReport {
    TallyReport::new(
        "papers per task",
        corpus.distribution.effective_rows().into_iter().map(|(task, cites)| (task, cites.len())),
    )
}

/// Tasks per paper, with the errata applied, in column order.
pub fn paper_totals(corpus: &Corpus) -> TallyReport {
    let rows = corpus.distribution.effective_rows();
    TallyReport::new(
        "tasks per paper",
        corpus.distribution.papers.iter().map(|p| {
            let n = rows.iter().filter(|(_, cites)| cites.contains(&p.key)).count();
            (p.key.clone(), n)
        }),
    )
}

/// Limits of the enumerated grasp space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnumerationBounds {
    pub max_vfs: usize,
    pub max_units: usize,
    pub hands: u8,
}

impl EnumerationBounds {
    pub fn new(max_vfs: usize, max_units: usize, hands: u8) -> Self {
        EnumerationBounds { max_vfs, max_units, hands }
    }

    fn check(&self) -> Result<(), EnumerationError> {
        if self.max_vfs < 1 || self.max_units < 1 || self.hands < 1 {
            return Err(EnumerationError::InvalidBounds(format!(
                "all bounds must be at least 1 (max_vfs={}, max_units={}, hands={})",
                self.max_vfs, self.max_units, self.hands
            )));
        }
        if self.max_vfs > crate::grasp::MAX_UNIT_VFS {
            return Err(EnumerationError::InvalidBounds(format!(
                "a unit holds at most {} virtual fingers",
                crate::grasp::MAX_UNIT_VFS
            )));
        }
        Ok(())
    }

    /// Whether a state lies inside the bounds.
    pub fn contains(&self, state: &GraspState) -> bool {
        state.unit_count() <= self.max_units
            && state.hands_used() <= self.hands as usize
            && state.units().iter().all(|a| a.unit.len() <= self.max_vfs && !a.unit.is_tool_borne())
    }
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds::new(3, 3, 2)
    }
}

/// Every grasp unit of 1..=`max_vfs` fingers. Intrinsic singletons are not
/// units; tool-borne contacts are left out of the enumeration.
pub fn enumerate_units(max_vfs: usize) -> Vec<GraspUnit> {
    let kinds = VirtualFinger::kinds();
    let mut out = Vec::new();
    // multisets as non-decreasing index sequences
    fn rec(kinds: &[VirtualFinger], start: usize, left: usize, cur: &mut Vec<VirtualFinger>, out: &mut Vec<GraspUnit>) {
        if !cur.is_empty() {
            if let Ok(u) = GraspUnit::new(cur.clone()) {
                out.push(u);
            }
        }
        if left == 0 {
            return;
        }
        for i in start..kinds.len() {
            cur.push(kinds[i]);
            rec(kinds, i, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(&kinds, 0, max_vfs.min(crate::grasp::MAX_UNIT_VFS), &mut Vec::new(), &mut out);
    out.sort();
    out
}

// (component, units, hands)
fn candidate_components(bounds: &EnumerationBounds) -> Vec<(Component, usize, usize)> {
    let units = enumerate_units(bounds.max_vfs);
    let held: Vec<&GraspUnit> = units.iter().filter(|u| u.has_intrinsic()).collect();
    let mut comps = Vec::new();
    for u in &held {
        comps.push((Component::Held(HandLoad::Single((*u).clone())), 1, 1));
    }
    if bounds.max_units >= 2 {
        for (i, a) in held.iter().enumerate() {
            for b in &held[i..] {
                comps.push((Component::Held(HandLoad::shared((*a).clone(), (*b).clone())), 2, 1));
            }
        }
    }
    if bounds.hands >= 2 {
        for u in &held {
            comps.push((Component::Bimanual((*u).clone()), 1, 2));
        }
    }
    for u in units.iter().filter(|u| u.is_environment_only()) {
        comps.push((Component::Environment(u.clone()), 1, 0));
    }
    comps
}

fn extend(
    comps: &[(Component, usize, usize)],
    start: usize,
    units_left: usize,
    hands_left: usize,
    cur: &mut Vec<Component>,
    out: &mut Vec<Vec<Component>>,
    cap: usize,
) -> Result<(), EnumerationError> {
    for i in start..comps.len() {
        let (c, nu, nh) = &comps[i];
        if *nu > units_left || *nh > hands_left {
            continue;
        }
        cur.push(c.clone());
        out.push(cur.clone());
        if out.len() > cap {
            return Err(EnumerationError::BoundExceeded { cap });
        }
        extend(comps, i, units_left - nu, hands_left - nh, cur, out, cap)?;
        cur.pop();
    }
    Ok(())
}

/// All canonical grasp states within the bounds, sorted by canonical print.
pub fn enumerate_grasps(max_vfs: usize, max_units: usize, hands: u8) -> Result<Vec<GraspState>, EnumerationError> {
    enumerate_grasps_with(
        EnumerationBounds::new(max_vfs, max_units, hands),
        DEFAULT_ENUMERATION_CAP,
        Execution::default(),
    )
}

/// [`enumerate_grasps`] with an explicit cardinality cap and execution mode.
pub fn enumerate_grasps_with(
    bounds: EnumerationBounds,
    cap: usize,
    exec: Execution,
) -> Result<Vec<GraspState>, EnumerationError> {
    bounds.check()?;
    let comps = candidate_components(&bounds);
    let firsts: Vec<usize> = (0..comps.len()).collect();
    let hands = bounds.hands as usize;
    // one subtree per first component; every subtree is bounded by the cap on its own
    let parts = par::map(exec, &firsts, |&i| {
        let (c, nu, nh) = &comps[i];
        if *nu > bounds.max_units || *nh > hands {
            return Ok(Vec::new());
        }
        let mut out = vec![vec![c.clone()]];
        let mut cur = vec![c.clone()];
        extend(&comps, i, bounds.max_units - nu, hands - nh, &mut cur, &mut out, cap)?;
        Ok(out)
    });
    let mut total = 0usize;
    let mut sets = Vec::new();
    for p in parts {
        let p = p?;
        total += p.len();
        if total > cap {
            return Err(EnumerationError::BoundExceeded { cap });
        }
        sets.push(p);
    }
    let flat: Vec<Vec<Component>> = sets.into_iter().flatten().collect();
    let mut states: Vec<(String, GraspState)> = par::map(exec, &flat, |cs| {
        let s =
            GraspState::from_components(cs.clone(), bounds.hands).expect("enumerated components respect the bounds");
        (print_grasp(&s), s)
    });
    states.sort_by(|a, b| a.0.cmp(&b.0));
    states.dedup_by(|a, b| a.0 == b.0);
    Ok(states.into_iter().map(|(_, s)| s).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspUsage {
    pub grasp: GraspState,
    pub count: usize,
}

/// The bounded grasp space split by literature usage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub bounds: EnumerationBounds,
    pub enumerated: usize,
    /// Used grasps with their usage counts, most used first.
    pub used: Vec<GraspUsage>,
    pub unused: Vec<GraspState>,
    /// Corpus grasps the enumeration does not reach (tool-borne contacts,
    /// or grasps beyond the bounds).
    pub outside_bounds: Vec<GraspUsage>,
    pub count_source: String,
}

impl CoverageReport {
    pub fn is_used(&self, grasp: &GraspState) -> bool {
        self.used.iter().any(|u| &u.grasp == grasp)
    }

    pub fn usage(&self, grasp: &GraspState) -> usize {
        self.used.iter().chain(&self.outside_bounds).find(|u| &u.grasp == grasp).map_or(0, |u| u.count)
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.bounds;
        writeln!(
            f,
            "coverage at max_vfs={} max_units={} hands={}: {} enumerated, {} used, {} unused",
            b.max_vfs,
            b.max_units,
            b.hands,
            self.enumerated,
            self.used.len(),
            self.unused.len()
        )?;
        writeln!(f, "used (counts {}):", self.count_source)?;
        for u in &self.used {
            writeln!(f, "  {:<14} {}", print_grasp(&u.grasp), u.count)?;
        }
        if !self.outside_bounds.is_empty() {
            writeln!(f, "used but outside the enumeration:")?;
            for u in &self.outside_bounds {
                writeln!(f, "  {:<14} {}", print_grasp(&u.grasp), u.count)?;
            }
        }
        write!(f, "unused: {}", self.unused.len())
    }
}

pub fn coverage_report(corpus: &Corpus, bounds: EnumerationBounds) -> Result<CoverageReport, EnumerationError> {
    coverage_report_with(corpus, bounds, DEFAULT_ENUMERATION_CAP, Execution::default())
}

pub fn coverage_report_with(
    corpus: &Corpus,
    bounds: EnumerationBounds,
    cap: usize,
    exec: Execution,
) -> Result<CoverageReport, EnumerationError> {
    let all = enumerate_grasps_with(bounds, cap, exec)?;
    let tally = grasp_instance_tally(corpus);
    let mut by_print: BTreeMap<String, &GraspState> = BTreeMap::new();
    for r in &corpus.grasp_instances {
        by_print.entry(print_grasp(&r.grasp)).or_insert(&r.grasp);
    }
    let enumerated: BTreeSet<String> = all.iter().map(print_grasp).collect();
    let mut used = Vec::new();
    let mut outside = Vec::new();
    for e in &tally.entries {
        let grasp = by_print[&e.key].clone();
        let usage = GraspUsage { grasp, count: e.count };
        if enumerated.contains(&e.key) {
            used.push(usage);
        } else {
            outside.push(usage);
        }
    }
    let used_prints: BTreeSet<&str> = tally.keys().collect();
    let unused: Vec<GraspState> =
        all.iter().filter(|s| !used_prints.contains(print_grasp(s).as_str())).cloned().collect();
    Ok(CoverageReport {
        bounds,
        enumerated: all.len(),
        used,
        unused,
        outside_bounds: outside,
        count_source: USAGE_SOURCE.to_string(),
    })
}
