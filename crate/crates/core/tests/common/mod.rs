//! Helpers shared by the integration tests: independent oracles and
//! randomized inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use cloth_grasp::corpus::{GripperProfile, TaskScript};
use cloth_grasp::notation::parse_hand_load;
use cloth_grasp::planner::{realizations, CostWeights, EnvContext, Plan, PlanState, PlanStep};
use cloth_grasp::{
    classify_transition, parse_grasp, Component, Geometry, GraspState, GraspUnit, HandLoad, PrimitiveType,
    VirtualFinger,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn g(s: &str) -> GraspState {
    parse_grasp(s).unwrap()
}

pub fn profile(id: &str, caps: &[&str]) -> GripperProfile {
    GripperProfile {
        id: id.into(),
        name: id.into(),
        source_refs: vec![],
        capabilities: caps.iter().map(|c| parse_hand_load(c).unwrap()).collect(),
        notes: None,
    }
}

// Exhaustive oracle: collect every hand-aware state reachable from the start
// realizations, then relax all edges until nothing changes.
pub fn oracle_cost(
    start: &GraspState,
    goal: &GraspState,
    profiles: &[GripperProfile],
    env: &EnvContext,
    w: &CostWeights,
) -> Option<f64> {
    let sources = realizations(start, profiles, env);
    let mut seen: BTreeSet<PlanState> = sources.iter().cloned().collect();
    let mut queue: VecDeque<PlanState> = sources.iter().cloned().collect();
    let mut edges: Vec<(PlanState, PlanState, f64)> = Vec::new();
    while let Some(s) = queue.pop_front() {
        let pre = s.to_grasp_state();
        for (t, _) in s.expand(profiles, env) {
            let post = t.to_grasp_state();
            let p = classify_transition(&pre, &post, Default::default()).unwrap().primitive;
            edges.push((s.clone(), t.clone(), w.get(p)));
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    let mut dist: BTreeMap<PlanState, f64> = sources.into_iter().map(|s| (s, 0.0)).collect();
    loop {
        let mut changed = false;
        for (a, b, c) in &edges {
            if let Some(&da) = dist.get(a) {
                let nd = da + c;
                if dist.get(b).is_none_or(|&db| nd < db - 1e-12) {
                    dist.insert(b.clone(), nd);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.iter().filter(|(s, _)| s.to_grasp_state() == *goal).map(|(_, &d)| d).min_by(f64::total_cmp)
}

pub const CAPS: &[&str] = &["PP", "LL", "PPie", "PiPie", "LPie", "PiPi", "sh 2PP", "sh 2PPie", "PPPie", "PPi", "PPe"];

pub fn random_query(rng: &mut ChaCha8Rng) -> (Vec<GripperProfile>, EnvContext, CostWeights) {
    let profiles: Vec<GripperProfile> = (0..2)
        .map(|h| {
            let n = rng.gen_range(1..=4);
            let caps: Vec<&str> = CAPS.choose_multiple(rng, n).copied().collect();
            profile(&format!("r{h}"), &caps)
        })
        .collect();
    let mut env = EnvContext::table();
    if rng.gen_bool(0.3) {
        env = env.with_extrinsic(Geometry::Point);
    }
    let mut w = CostWeights::default();
    for p in PrimitiveType::ALL {
        w.set(p, rng.gen_range(0..=3) as f64);
    }
    (profiles, env, w)
}

pub fn reachable_states(start: &GraspState, profiles: &[GripperProfile], env: &EnvContext) -> Vec<GraspState> {
    let mut seen: BTreeSet<PlanState> = realizations(start, profiles, env).into_iter().collect();
    let mut queue: VecDeque<PlanState> = seen.iter().cloned().collect();
    while let Some(s) = queue.pop_front() {
        for (t, _) in s.expand(profiles, env) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<GraspState> = seen.iter().map(PlanState::to_grasp_state).collect();
    out.sort_by_key(|s| s.to_string());
    out.dedup();
    out
}

/// The regrasp-class steps of a task as a plan.
pub fn skeleton(task: &TaskScript) -> Plan {
    let steps: Vec<PlanStep> = task
        .steps
        .iter()
        .filter(|s| s.label.is_regrasp())
        .map(|s| PlanStep { primitive: s.label, pre: s.pre.clone(), post: s.post.clone(), actor: s.actor })
        .collect();
    let cost = steps.len() as f64;
    Plan { steps, cost, assumptions: vec![] }
}

pub fn vf_text(vf: &VirtualFinger, rng: &mut ChaCha8Rng) -> &'static str {
    let options: &[&str] = match (vf.geometry, vf.extrinsic) {
        (Geometry::Point, false) => &["P"],
        (Geometry::Line, false) => &["L"],
        (Geometry::Plane, false) => &["Pi", "Π"],
        (Geometry::Point, true) => &["Pe", "P_e"],
        (Geometry::Line, true) => &["Le", "L_e"],
        (Geometry::Plane, true) => &["Pie", "Pi_e", "Πe", "Π_e"],
    };
    options.choose(rng).unwrap()
}

pub fn unit_text(u: &GraspUnit, rng: &mut ChaCha8Rng) -> String {
    let mut vfs = u.vfs().to_vec();
    vfs.shuffle(rng);
    vfs.iter().map(|vf| vf_text(vf, rng)).collect()
}

pub fn ws(rng: &mut ChaCha8Rng) -> &'static str {
    [" ", "", "  ", "\t", ""].choose(rng).unwrap()
}

pub fn component_text(c: &Component, rng: &mut ChaCha8Rng) -> String {
    match c {
        Component::Held(HandLoad::Single(u)) | Component::Environment(u) => unit_text(u, rng),
        Component::Held(HandLoad::Shared(a, b)) if a == b && rng.gen_bool(0.5) => {
            let pre = if rng.gen_bool(0.5) { format!("sh{}2", ws(rng)) } else { format!("2{}sh", ws(rng)) };
            format!("{pre}{}{}", ws(rng), unit_text(a, rng))
        }
        Component::Held(HandLoad::Shared(a, b)) => {
            let (x, y) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            format!("sh{}{}{}+{}sh {}", ws(rng), unit_text(x, rng), ws(rng), ws(rng), unit_text(y, rng))
        }
        Component::Bimanual(u) => format!("bm{}{}", [" ", ""].choose(rng).unwrap(), unit_text(u, rng)),
    }
}

// Same state, different spelling: aliases, finger order, component order,
// optional folding of twins and random whitespace.
pub fn variant(s: &GraspState, rng: &mut ChaCha8Rng) -> String {
    let mut comps: Vec<Component> = s.components().to_vec();
    comps.shuffle(rng);
    let mut parts = Vec::new();
    let mut i = 0;
    while i < comps.len() {
        let c = &comps[i];
        let twin = comps.get(i + 1) == Some(c);
        let foldable =
            matches!(c, Component::Held(HandLoad::Single(_)) | Component::Environment(_) | Component::Bimanual(_));
        if twin && foldable && rng.gen_bool(0.5) {
            let text = component_text(c, rng);
            let folded = match text.strip_prefix("bm") {
                Some(rest) => format!("bm 2{}", rest.trim_start()),
                None => format!("2{}{text}", ws(rng)),
            };
            parts.push(folded);
            i += 2;
        } else {
            parts.push(component_text(c, rng));
            i += 1;
        }
    }
    let mut out = String::from(ws(rng));
    for (k, p) in parts.iter().enumerate() {
        if k > 0 {
            out.push_str(ws(rng));
            out.push('+');
            out.push_str(ws(rng));
        }
        out.push_str(p);
    }
    out.push_str(ws(rng));
    out
}
