//! Regrasp planning over grasp states.
//!
//! Search runs over hand-aware states ([`PlanState`]): which load each hand
//! holds and which environment contacts are present. Grasp states forget hand
//! identity, so one [`GraspState`] may have several realizations; a plan is
//! valid when some sequence of realizations connects its steps.
//!
//! Edges are regrasp-class transitions only (Ex, G, R, RG):
//!
//! * an environment contact is added or removed while at least one hand holds
//!   the cloth;
//! * one hand engages, releases or swaps its load;
//! * two or more free hands engage at once, or two or more holding hands
//!   release at once;
//! * two free hands engage a bimanual unit, or release it.
//!
//! When hands engage or release, the environment may change only in the
//! contact kinds that the loads involved carry themselves: pressing a
//! `PPie` pinch absorbs the table contact, releasing it may leave the cloth
//! on the table.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{classify_transition, PrimitiveType, TransitionFlags};
use crate::corpus::{Actor, Corpus, GripperProfile, TaskScript};
use crate::error::PlanError;
use crate::grasp::{Component, Geometry, GraspState, GraspUnit, Hand, HandLoad, DEFAULT_HANDS};
use crate::notation::print_grasp;
use crate::par::{self, Execution};

/// Explored-state budget used by [`find_plan`].
pub const DEFAULT_BUDGET: usize = 100_000;

/// Stated in every plan: the graph does not tell in-hand gaiting from
/// handovers.
pub const RG_ASSUMPTION: &str =
    "every capability-respecting regrasp (RG) is treated as executable; in-hand gaiting and handovers are not distinguished";

/// What the surroundings offer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvContext {
    /// Environment contact kinds, e.g. the table plane or a hook point.
    pub extrinsic_available: BTreeSet<Geometry>,
    /// Contacts realized through a held tool, e.g. the line of a hanger.
    #[serde(default)]
    pub tools: BTreeSet<Geometry>,
    pub hands: u8,
}

impl Default for EnvContext {
    fn default() -> Self {
        EnvContext { extrinsic_available: BTreeSet::new(), tools: BTreeSet::new(), hands: DEFAULT_HANDS }
    }
}

impl EnvContext {
    pub fn new(hands: u8) -> Self {
        EnvContext { hands, ..EnvContext::default() }
    }

    /// Two hands and a table.
    pub fn table() -> Self {
        EnvContext::default().with_extrinsic(Geometry::Plane)
    }

    pub fn with_extrinsic(mut self, g: Geometry) -> Self {
        self.extrinsic_available.insert(g);
        self
    }

    pub fn with_tool(mut self, g: Geometry) -> Self {
        self.tools.insert(g);
        self
    }

    /// Builds a context from named items: `table`, `hook`, `edge`, `hanger`.
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>, hands: u8) -> Result<Self, String> {
        let mut env = EnvContext::new(hands);
        for name in names {
            match name.trim() {
                "" => {}
                "table" => env = env.with_extrinsic(Geometry::Plane),
                "hook" => env = env.with_extrinsic(Geometry::Point),
                "edge" => env = env.with_extrinsic(Geometry::Line),
                "hanger" => env = env.with_tool(Geometry::Line),
                other => {
                    return Err(format!("unknown environment item \"{other}\" (expected table, hook, edge, hanger)"))
                }
            }
        }
        Ok(env)
    }

    fn load_fits(&self, load: &HandLoad) -> bool {
        load.extrinsic_geometries().iter().all(|g| self.extrinsic_available.contains(g))
            && load.tool_geometries().iter().all(|g| self.tools.contains(g))
    }
}

/// Per-primitive step costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub ex: f64,
    pub g: f64,
    pub r: f64,
    pub rg: f64,
    pub s: f64,
    pub gm: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { ex: 1.0, g: 1.0, r: 1.0, rg: 1.0, s: 1.0, gm: 1.0 }
    }
}

impl CostWeights {
    pub fn get(&self, p: PrimitiveType) -> f64 {
        match p {
            PrimitiveType::Ex => self.ex,
            PrimitiveType::G => self.g,
            PrimitiveType::R => self.r,
            PrimitiveType::RG => self.rg,
            PrimitiveType::S => self.s,
            PrimitiveType::GM => self.gm,
        }
    }

    pub fn set(&mut self, p: PrimitiveType, w: f64) {
        let slot = match p {
            PrimitiveType::Ex => &mut self.ex,
            PrimitiveType::G => &mut self.g,
            PrimitiveType::R => &mut self.r,
            PrimitiveType::RG => &mut self.rg,
            PrimitiveType::S => &mut self.s,
            PrimitiveType::GM => &mut self.gm,
        };
        *slot = w;
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        for p in PrimitiveType::ALL {
            let w = self.get(p);
            if !w.is_finite() || w < 0.0 {
                return Err(PlanError::InvalidWeights(format!("{p}={w}: weights must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

impl FromStr for CostWeights {
    type Err = PlanError;

    /// Parses `Ex=1,G=2.5,...`; unlisted primitives keep weight 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut w = CostWeights::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| PlanError::InvalidWeights(format!("\"{part}\" is not of the form Type=weight")))?;
            let p: PrimitiveType = k.trim().parse().map_err(PlanError::InvalidWeights)?;
            let v: f64 = v.trim().parse().map_err(|_| PlanError::InvalidWeights(format!("\"{v}\" is not a number")))?;
            w.set(p, v);
        }
        w.validate()?;
        Ok(w)
    }
}

/// What one hand is doing in a hand-aware state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Free,
    Holding(HandLoad),
    /// Half of a two-handed unit; `partner` is the other hand.
    Bimanual {
        unit: GraspUnit,
        partner: u8,
    },
}

/// A grasp state with hand identities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanState {
    pub slots: Vec<Slot>,
    pub env: BTreeSet<Geometry>,
}

impl PlanState {
    pub fn is_empty(&self) -> bool {
        self.env.is_empty() && self.slots.iter().all(|s| *s == Slot::Free)
    }

    fn any_held(&self) -> bool {
        self.slots.iter().any(|s| *s != Slot::Free)
    }

    /// Forgets hand identity.
    pub fn to_grasp_state(&self) -> GraspState {
        let mut comps = Vec::new();
        for (i, s) in self.slots.iter().enumerate() {
            match s {
                Slot::Free => {}
                Slot::Holding(load) => comps.push(Component::Held(load.clone())),
                Slot::Bimanual { unit, partner } => {
                    if (i as u8) < *partner {
                        comps.push(Component::Bimanual(unit.clone()));
                    }
                }
            }
        }
        comps.extend(self.env.iter().map(|g| Component::Environment(GraspUnit::environment(*g))));
        GraspState::from_components(comps, self.slots.len() as u8).expect("plan states are valid grasp states")
    }

    /// Whether every hand can hold its load and every contact is available.
    pub fn is_realizable(&self, profiles: &[GripperProfile], env: &EnvContext) -> bool {
        if self.is_empty() || !self.env.is_subset(&env.extrinsic_available) {
            return false;
        }
        self.slots.iter().enumerate().all(|(i, s)| match s {
            Slot::Free => true,
            Slot::Holding(load) => hand_can_hold(profiles, i, load, env),
            Slot::Bimanual { unit, .. } => hand_can_hold(profiles, i, &HandLoad::Single(unit.clone()), env),
        })
    }

    /// All hand-aware successors, each with the hands that moved. Transitions
    /// that leave the grasp state unchanged are omitted.
    pub fn expand(&self, profiles: &[GripperProfile], env: &EnvContext) -> Vec<(PlanState, Actor)> {
        let mut out: Vec<(PlanState, Vec<u8>)> = Vec::new();
        let n = self.slots.len();
        let loads: Vec<Vec<HandLoad>> = (0..n).map(|i| hand_loads(profiles, i, env)).collect();

        // environment toggles
        if self.any_held() {
            for g in &env.extrinsic_available {
                let mut next = self.clone();
                if !next.env.remove(g) {
                    next.env.insert(*g);
                }
                out.push((next, vec![]));
            }
        }

        // one hand: engage, release, swap
        for (i, (slot, hand_loads)) in self.slots.iter().zip(&loads).enumerate() {
            match slot {
                Slot::Free => {
                    for l in hand_loads {
                        self.push_with_env(&mut out, &[(i, Slot::Holding(l.clone()))], kinds([l]), env);
                    }
                }
                Slot::Holding(old) => {
                    self.push_with_env(&mut out, &[(i, Slot::Free)], kinds([old]), env);
                    for l in hand_loads.iter().filter(|l| *l != old) {
                        self.push_with_env(&mut out, &[(i, Slot::Holding(l.clone()))], kinds([old, l]), env);
                    }
                }
                Slot::Bimanual { .. } => {}
            }
        }

        // several hands at once
        let free: Vec<usize> = (0..n).filter(|&i| self.slots[i] == Slot::Free).collect();
        let holding: Vec<usize> = (0..n).filter(|&i| matches!(self.slots[i], Slot::Holding(_))).collect();
        for group in subsets_of_at_least_two(&holding) {
            let changes: Vec<(usize, Slot)> = group.iter().map(|&i| (i, Slot::Free)).collect();
            let ks = kinds(group.iter().map(|&i| match &self.slots[i] {
                Slot::Holding(l) => l,
                _ => unreachable!(),
            }));
            self.push_with_env(&mut out, &changes, ks, env);
        }
        for group in subsets_of_at_least_two(&free) {
            for choice in cartesian(group.iter().map(|&i| loads[i].as_slice()).collect()) {
                let changes: Vec<(usize, Slot)> =
                    group.iter().zip(&choice).map(|(&i, l)| (i, Slot::Holding((*l).clone()))).collect();
                self.push_with_env(&mut out, &changes, kinds(choice.iter().copied()), env);
            }
        }

        // bimanual units
        for (a, &i) in free.iter().enumerate() {
            for &j in &free[a + 1..] {
                for l in &loads[i] {
                    let HandLoad::Single(u) = l else { continue };
                    if !loads[j].contains(l) {
                        continue;
                    }
                    let changes = [
                        (i, Slot::Bimanual { unit: u.clone(), partner: j as u8 }),
                        (j, Slot::Bimanual { unit: u.clone(), partner: i as u8 }),
                    ];
                    self.push_with_env(&mut out, &changes, kinds([l]), env);
                }
            }
        }
        for i in 0..n {
            if let Slot::Bimanual { unit, partner } = &self.slots[i] {
                let j = *partner as usize;
                if i < j {
                    let l = HandLoad::Single(unit.clone());
                    self.push_with_env(&mut out, &[(i, Slot::Free), (j, Slot::Free)], kinds([&l]), env);
                }
            }
        }

        let here = self.to_grasp_state();
        let mut seen = BTreeSet::new();
        out.into_iter()
            .filter(|(s, _)| !s.is_empty() && s.to_grasp_state() != here)
            .filter(|(s, _)| seen.insert(s.clone()))
            .map(|(s, hands)| {
                let actor = match hands.as_slice() {
                    [] => Actor::Unspecified,
                    [h] => Actor::Hand(Hand(*h)),
                    _ => Actor::Both,
                };
                (s, actor)
            })
            .collect()
    }

    // applies slot changes, then every admissible change of the given kinds
    fn push_with_env(
        &self,
        out: &mut Vec<(PlanState, Vec<u8>)>,
        changes: &[(usize, Slot)],
        ks: BTreeSet<Geometry>,
        env: &EnvContext,
    ) {
        let mut base = self.clone();
        for (i, s) in changes {
            base.slots[*i] = s.clone();
        }
        let hands: Vec<u8> = changes.iter().map(|(i, _)| *i as u8).collect();
        let free_kinds: Vec<Geometry> = ks.intersection(&env.extrinsic_available).copied().collect();
        for mask in 0..(1u32 << free_kinds.len()) {
            let mut next = base.clone();
            for (b, g) in free_kinds.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    next.env.insert(*g);
                } else {
                    next.env.remove(g);
                }
            }
            out.push((next, hands.clone()));
        }
    }
}

impl fmt::Display for PlanState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hands: Vec<String> = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Slot::Free => format!("{}:-", Hand(i as u8)),
                Slot::Holding(l) => format!("{}:{l}", Hand(i as u8)),
                Slot::Bimanual { unit, .. } => format!("{}:bm {unit}", Hand(i as u8)),
            })
            .collect();
        let env: Vec<String> = self.env.iter().map(|g| GraspUnit::environment(*g).to_string()).collect();
        write!(f, "[{}] env {{{}}}", hands.join(" "), env.join(","))
    }
}

fn kinds<'a>(loads: impl IntoIterator<Item = &'a HandLoad>) -> BTreeSet<Geometry> {
    loads.into_iter().flat_map(|l| l.extrinsic_geometries()).collect()
}

fn subsets_of_at_least_two(items: &[usize]) -> Vec<Vec<usize>> {
    (0..(1u32 << items.len()))
        .filter(|m| m.count_ones() >= 2)
        .map(|m| items.iter().enumerate().filter(|(b, _)| m & (1 << b) != 0).map(|(_, &i)| i).collect())
        .collect()
}

fn cartesian<T>(lists: Vec<&[T]>) -> Vec<Vec<&T>> {
    lists.into_iter().fold(vec![vec![]], |acc, list| {
        acc.into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

fn hand_can_hold(profiles: &[GripperProfile], hand: usize, load: &HandLoad, env: &EnvContext) -> bool {
    profiles.get(hand).is_some_and(|p| p.can_hold(load)) && env.load_fits(load)
}

fn hand_loads(profiles: &[GripperProfile], hand: usize, env: &EnvContext) -> Vec<HandLoad> {
    let mut v: Vec<HandLoad> = profiles
        .get(hand)
        .map(|p| p.capabilities.iter().filter(|l| env.load_fits(l)).cloned().collect())
        .unwrap_or_default();
    v.sort();
    v.dedup();
    v
}

/// Whether a gripper can realize a unit with the given surroundings: the unit
/// must be one of its capabilities, its environment contacts available and
/// its tool contacts provided.
pub fn gripper_can_realize(profile: &GripperProfile, unit: &GraspUnit, env: &EnvContext) -> bool {
    let load = HandLoad::Single(unit.clone());
    profile.can_hold(&load) && env.load_fits(&load)
}

/// Every way of putting a grasp state on the available hands.
pub fn realizations(state: &GraspState, profiles: &[GripperProfile], env: &EnvContext) -> Vec<PlanState> {
    let n = env.hands as usize;
    let mut env_set = BTreeSet::new();
    let mut jobs: Vec<Slot> = Vec::new();
    for c in state.components() {
        match c {
            Component::Environment(u) => {
                if !u.is_single_extrinsic() || !env_set.insert(u.vfs()[0].geometry) {
                    return vec![];
                }
            }
            Component::Held(l) => jobs.push(Slot::Holding(l.clone())),
            Component::Bimanual(u) => jobs.push(Slot::Bimanual { unit: u.clone(), partner: 0 }),
        }
    }
    let mut found = BTreeSet::new();
    let mut slots = vec![Slot::Free; n];
    assign(&jobs, &mut slots, &mut |slots| {
        let s = PlanState { slots: slots.to_vec(), env: env_set.clone() };
        if s.is_realizable(profiles, env) {
            found.insert(s);
        }
    });
    found.into_iter().collect()
}

fn assign(jobs: &[Slot], slots: &mut [Slot], emit: &mut dyn FnMut(&[Slot])) {
    let Some((job, rest)) = jobs.split_first() else {
        emit(slots);
        return;
    };
    let n = slots.len();
    for i in 0..n {
        if slots[i] != Slot::Free {
            continue;
        }
        match job {
            Slot::Bimanual { unit, .. } => {
                for j in i + 1..n {
                    if slots[j] != Slot::Free {
                        continue;
                    }
                    slots[i] = Slot::Bimanual { unit: unit.clone(), partner: j as u8 };
                    slots[j] = Slot::Bimanual { unit: unit.clone(), partner: i as u8 };
                    assign(rest, slots, emit);
                    slots[i] = Slot::Free;
                    slots[j] = Slot::Free;
                }
            }
            other => {
                slots[i] = other.clone();
                assign(rest, slots, emit);
                slots[i] = Slot::Free;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub primitive: PrimitiveType,
    pub pre: GraspState,
    pub post: GraspState,
    pub actor: Actor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cost: f64,
    #[serde(default)]
    pub assumptions: Vec<String>,
}

impl Plan {
    /// Numbered step list in the style of the task table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.steps.is_empty() {
            out.push_str("(empty plan: start equals goal)\n");
        }
        for (i, s) in self.steps.iter().enumerate() {
            let actor = match s.actor {
                Actor::Unspecified => String::new(),
                a => format!("({a}) "),
            };
            out.push_str(&format!(
                "{}) {actor}({}) {} -> {}\n",
                i + 1,
                s.primitive,
                print_grasp(&s.pre),
                print_grasp(&s.post)
            ));
        }
        out.push_str(&format!("cost: {}\n", self.cost));
        for a in &self.assumptions {
            out.push_str(&format!("assumption: {a}\n"));
        }
        out
    }
}

fn edge_primitive(pre: &GraspState, post: &GraspState) -> PrimitiveType {
    classify_transition(pre, post, TransitionFlags::default())
        .expect("distinct states without sliding always classify")
        .primitive
}

/// One-primitive successors of a grasp state over all of its realizations,
/// sorted by the canonical print of the post state.
pub fn successors(
    state: &GraspState,
    profiles: &[GripperProfile],
    env: &EnvContext,
) -> Result<Vec<PlanStep>, PlanError> {
    let starts = realizations(state, profiles, env);
    if starts.is_empty() {
        return Err(PlanError::UnrealizableState { state: print_grasp(state) });
    }
    let mut by_post: std::collections::BTreeMap<(String, GraspState), Actor> = std::collections::BTreeMap::new();
    for s in &starts {
        for (next, actor) in s.expand(profiles, env) {
            let post = next.to_grasp_state();
            by_post.entry((print_grasp(&post), post)).or_insert(actor);
        }
    }
    Ok(by_post
        .into_iter()
        .map(|((_, post), actor)| PlanStep { primitive: edge_primitive(state, &post), pre: state.clone(), post, actor })
        .collect())
}

struct Entry {
    cost: f64,
    key: String,
    state: PlanState,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// reversed: BinaryHeap is a max-heap
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.state.cmp(&self.state))
    }
}

/// Minimum-cost plan with the default explored-state budget.
pub fn find_plan(
    start: &GraspState,
    goal: &GraspState,
    profiles: &[GripperProfile],
    env: &EnvContext,
    weights: &CostWeights,
) -> Result<Plan, PlanError> {
    find_plan_bounded(start, goal, profiles, env, weights, DEFAULT_BUDGET)
}

/// Uniform-cost search. Ties are broken by the canonical print of the state,
/// then by the hand-aware state itself, so output is reproducible.
pub fn find_plan_bounded(
    start: &GraspState,
    goal: &GraspState,
    profiles: &[GripperProfile],
    env: &EnvContext,
    weights: &CostWeights,
    budget: usize,
) -> Result<Plan, PlanError> {
    weights.validate()?;
    let starts = realizations(start, profiles, env);
    if starts.is_empty() {
        return Err(PlanError::UnrealizableState { state: print_grasp(start) });
    }

    let mut best: HashMap<PlanState, f64> = HashMap::new();
    let mut parent: HashMap<PlanState, (PlanState, Actor)> = HashMap::new();
    let mut settled: BTreeSet<PlanState> = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    for s in starts {
        best.insert(s.clone(), 0.0);
        heap.push(Entry { cost: 0.0, key: print_grasp(&s.to_grasp_state()), state: s });
    }

    let mut explored = 0usize;
    while let Some(Entry { cost, state, .. }) = heap.pop() {
        if settled.contains(&state) || best.get(&state).is_some_and(|&b| b < cost) {
            continue;
        }
        settled.insert(state.clone());
        explored += 1;
        if explored > budget {
            return Err(PlanError::BoundExceeded { budget });
        }
        let here = state.to_grasp_state();
        if here == *goal {
            return Ok(rebuild(&state, &parent, cost));
        }
        for (next, actor) in state.expand(profiles, env) {
            if settled.contains(&next) {
                continue;
            }
            let post = next.to_grasp_state();
            let c = cost + weights.get(edge_primitive(&here, &post));
            if best.get(&next).is_none_or(|&b| c < b) {
                best.insert(next.clone(), c);
                parent.insert(next.clone(), (state.clone(), actor));
                heap.push(Entry { cost: c, key: print_grasp(&post), state: next });
            }
        }
    }
    Err(PlanError::NoPlanFound { explored })
}

fn rebuild(end: &PlanState, parent: &HashMap<PlanState, (PlanState, Actor)>, cost: f64) -> Plan {
    let mut steps = Vec::new();
    let mut cur = end.clone();
    while let Some((prev, actor)) = parent.get(&cur) {
        let (pre, post) = (prev.to_grasp_state(), cur.to_grasp_state());
        steps.push(PlanStep { primitive: edge_primitive(&pre, &post), pre, post, actor: *actor });
        cur = prev.clone();
    }
    steps.reverse();
    Plan { steps, cost, assumptions: vec![RG_ASSUMPTION.to_string()] }
}

/// Checks that a plan chains, that each step is an edge of the graph with the
/// stated primitive, and that its cost is the sum of its step weights.
pub fn validate_plan(
    plan: &Plan,
    start: &GraspState,
    goal: &GraspState,
    profiles: &[GripperProfile],
    env: &EnvContext,
    weights: &CostWeights,
) -> Result<(), String> {
    let mut frontier: BTreeSet<PlanState> = realizations(start, profiles, env).into_iter().collect();
    if frontier.is_empty() {
        return Err(format!("start {} is not realizable", print_grasp(start)));
    }
    let mut current = start.clone();
    let mut total = 0.0;
    for (i, step) in plan.steps.iter().enumerate() {
        if step.pre != current {
            return Err(format!("step {} starts at {} but the previous state is {}", i + 1, step.pre, current));
        }
        let expected = edge_primitive(&step.pre, &step.post);
        if step.pre == step.post || expected != step.primitive {
            return Err(format!("step {} is labelled {} but classifies as {expected}", i + 1, step.primitive));
        }
        frontier = frontier
            .iter()
            .flat_map(|s| s.expand(profiles, env))
            .map(|(s, _)| s)
            .filter(|s| s.to_grasp_state() == step.post)
            .collect();
        if frontier.is_empty() {
            return Err(format!("step {} ({} -> {}) is not an available transition", i + 1, step.pre, step.post));
        }
        total += weights.get(step.primitive);
        current = step.post.clone();
    }
    if current != *goal {
        return Err(format!("plan ends at {current}, not at the goal {goal}"));
    }
    if (total - plan.cost).abs() > 1e-9 {
        return Err(format!("plan cost {} differs from the sum of step weights {total}", plan.cost));
    }
    Ok(())
}

/// Outcome of a feasibility check; `first_failing_step` is a zero-based
/// index into the task's steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub first_failing_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Whether every step's pre and post states can be realized.
pub fn task_feasible(task: &TaskScript, profiles: &[GripperProfile], env: &EnvContext) -> Feasibility {
    for (i, step) in task.steps.iter().enumerate() {
        for (which, s) in [("pre", &step.pre), ("post", &step.post)] {
            if realizations(s, profiles, env).is_empty() {
                return Feasibility {
                    feasible: false,
                    first_failing_step: Some(i),
                    reason: Some(format!("step {} {which} state {} cannot be realized", step.number, print_grasp(s))),
                };
            }
        }
    }
    Feasibility { feasible: true, first_failing_step: None, reason: None }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityEntry {
    pub gripper_id: String,
    pub task_id: String,
    #[serde(flatten)]
    pub result: Feasibility,
}

/// Every gripper (on all hands) against every task.
pub fn feasibility_matrix(corpus: &Corpus, env: &EnvContext, exec: Execution) -> Vec<FeasibilityEntry> {
    let pairs: Vec<(&GripperProfile, &TaskScript)> =
        corpus.grippers.iter().flat_map(|g| corpus.tasks.iter().map(move |t| (g, t))).collect();
    par::map(exec, &pairs, |(g, t)| {
        let profiles = vec![(*g).clone(); env.hands as usize];
        FeasibilityEntry { gripper_id: g.id.clone(), task_id: t.id.clone(), result: task_feasible(t, &profiles, env) }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanQuery {
    pub start: GraspState,
    pub goal: GraspState,
    pub profiles: Vec<GripperProfile>,
    pub env: EnvContext,
    pub weights: CostWeights,
}

/// Runs independent queries, in parallel when asked; results keep query order.
pub fn find_plans(queries: &[PlanQuery], budget: usize, exec: Execution) -> Vec<Result<Plan, PlanError>> {
    par::map(exec, queries, |q| find_plan_bounded(&q.start, &q.goal, &q.profiles, &q.env, &q.weights, budget))
}
