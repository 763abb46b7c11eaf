//! The grasp algebra: geometric virtual fingers, grasp units and bimanual
//! grasp states.
//!
//! A [`GraspState`] is always canonical. The only way to build one is through
//! [`canonicalize`] (or the notation parser, which calls it), so two states
//! compare equal exactly when their canonical forms are equal.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::GraspError;

/// Largest number of virtual fingers a single grasp unit may carry.
pub const MAX_UNIT_VFS: usize = 3;

/// Hands assumed when nothing else is said.
pub const DEFAULT_HANDS: u8 = 2;

/// Shape class of a contact patch, ordered by dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Geometry {
    Point,
    Line,
    Plane,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [Geometry::Point, Geometry::Line, Geometry::Plane];

    /// 0 for points, 1 for lines, 2 for planes.
    pub fn rank(self) -> u8 {
        match self {
            Geometry::Point => 0,
            Geometry::Line => 1,
            Geometry::Plane => 2,
        }
    }

    /// ASCII symbol used by the notation.
    pub fn symbol(self) -> &'static str {
        match self {
            Geometry::Point => "P",
            Geometry::Line => "L",
            Geometry::Plane => "Pi",
        }
    }
}

/// A geometric virtual finger.
///
/// `via_tool` is metadata: it records that an intrinsic contact is realized
/// through a held tool (a hanger, for instance) and takes no part in
/// equality, ordering or hashing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VirtualFinger {
    pub geometry: Geometry,
    pub extrinsic: bool,
    #[serde(default)]
    pub via_tool: bool,
}

impl VirtualFinger {
    pub const fn intrinsic(geometry: Geometry) -> Self {
        VirtualFinger { geometry, extrinsic: false, via_tool: false }
    }

    pub const fn extrinsic(geometry: Geometry) -> Self {
        VirtualFinger { geometry, extrinsic: true, via_tool: false }
    }

    pub const fn tool(geometry: Geometry) -> Self {
        VirtualFinger { geometry, extrinsic: false, via_tool: true }
    }

    /// All six finger kinds in canonical order.
    pub fn kinds() -> [VirtualFinger; 6] {
        [
            VirtualFinger::intrinsic(Geometry::Point),
            VirtualFinger::intrinsic(Geometry::Line),
            VirtualFinger::intrinsic(Geometry::Plane),
            VirtualFinger::extrinsic(Geometry::Point),
            VirtualFinger::extrinsic(Geometry::Line),
            VirtualFinger::extrinsic(Geometry::Plane),
        ]
    }

    fn key(&self) -> (bool, Geometry) {
        (self.extrinsic, self.geometry)
    }
}

impl PartialEq for VirtualFinger {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for VirtualFinger {}

impl Hash for VirtualFinger {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for VirtualFinger {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// intrinsic before extrinsic, then ascending dimension
impl Ord for VirtualFinger {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// A set of opposing virtual fingers, kept sorted in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraspUnit {
    vfs: Vec<VirtualFinger>,
}

impl GraspUnit {
    /// Builds a unit, sorting the fingers into canonical order.
    ///
    /// A one-finger unit has to be extrinsic (gravity supplies the opposing
    /// force) or tool-borne.
    pub fn new(mut vfs: Vec<VirtualFinger>) -> Result<Self, GraspError> {
        if vfs.is_empty() {
            return Err(GraspError::InvalidUnit("a grasp unit needs at least one virtual finger".into()));
        }
        if vfs.len() > MAX_UNIT_VFS {
            return Err(GraspError::InvalidUnit(format!(
                "a grasp unit holds at most {MAX_UNIT_VFS} virtual fingers, got {}",
                vfs.len()
            )));
        }
        if let [vf] = vfs.as_slice() {
            if !vf.extrinsic && !vf.via_tool {
                return Err(GraspError::InvalidUnit(
                    "a single-finger unit must be extrinsic or held through a tool".into(),
                ));
            }
        }
        for vf in &mut vfs {
            if vf.extrinsic {
                vf.via_tool = false;
            }
        }
        vfs.sort();
        Ok(GraspUnit { vfs })
    }

    /// A lone tool-borne contact, such as the line of a hanger.
    pub fn tool(geometry: Geometry) -> Self {
        GraspUnit { vfs: vec![VirtualFinger::tool(geometry)] }
    }

    /// A lone environment contact.
    pub fn environment(geometry: Geometry) -> Self {
        GraspUnit { vfs: vec![VirtualFinger::extrinsic(geometry)] }
    }

    pub fn vfs(&self) -> &[VirtualFinger] {
        &self.vfs
    }

    pub fn len(&self) -> usize {
        self.vfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vfs.is_empty()
    }

    /// True when every finger comes from the environment.
    pub fn is_environment_only(&self) -> bool {
        self.vfs.iter().all(|vf| vf.extrinsic)
    }

    pub fn has_intrinsic(&self) -> bool {
        self.vfs.iter().any(|vf| !vf.extrinsic)
    }

    /// One extrinsic finger and nothing else, e.g. a cloth lying on a table.
    pub fn is_single_extrinsic(&self) -> bool {
        matches!(self.vfs.as_slice(), [vf] if vf.extrinsic)
    }

    pub fn is_tool_borne(&self) -> bool {
        matches!(self.vfs.as_slice(), [vf] if vf.via_tool)
    }

    pub fn extrinsic_geometries(&self) -> impl Iterator<Item = Geometry> + '_ {
        self.vfs.iter().filter(|vf| vf.extrinsic).map(|vf| vf.geometry)
    }

    pub fn tool_geometries(&self) -> impl Iterator<Item = Geometry> + '_ {
        self.vfs.iter().filter(|vf| vf.via_tool).map(|vf| vf.geometry)
    }

    /// Units with two or more environment fingers cannot be produced by a hand
    /// and no environment in the corpus provides them. They are still valid
    /// members of the algebra.
    pub fn is_hand_realizable(&self) -> bool {
        !(self.is_environment_only() && self.len() > 1)
    }
}

impl fmt::Display for GraspUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for vf in &self.vfs {
            f.write_str(vf.geometry.symbol())?;
            if vf.extrinsic {
                f.write_str("e")?;
            }
        }
        Ok(())
    }
}

/// Whether a unit is prehensile in the framework sense: at least two fingers,
/// all of one dimension, at least one of them intrinsic.
pub fn is_prehensile(unit: &GraspUnit) -> bool {
    let vfs = unit.vfs();
    vfs.len() >= 2 && unit.has_intrinsic() && vfs.iter().all(|vf| vf.geometry == vfs[0].geometry)
}

/// Zero-based hand index. Displays as `H1`, `H2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hand(pub u8);

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}", self.0 + 1)
    }
}

/// How a unit is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandAssignment {
    /// One hand realizes the unit alone.
    Hand(Hand),
    /// The hand realizes this unit together with another shared unit (`sh`).
    Shared(Hand),
    /// Two hands realize one unit (`bm`).
    Bimanual,
    /// No hand; the unit is made only of environment contacts.
    Environment,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignedUnit {
    pub unit: GraspUnit,
    pub assignment: HandAssignment,
}

impl AssignedUnit {
    pub fn new(unit: GraspUnit, assignment: HandAssignment) -> Self {
        AssignedUnit { unit, assignment }
    }
}

/// What one hand is doing: a single unit, or a pair of units realized
/// together (`sh`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HandLoad {
    Single(GraspUnit),
    Shared(GraspUnit, GraspUnit),
}

impl HandLoad {
    /// Builds a shared load with its two units in canonical order.
    pub fn shared(a: GraspUnit, b: GraspUnit) -> Self {
        if a <= b {
            HandLoad::Shared(a, b)
        } else {
            HandLoad::Shared(b, a)
        }
    }

    pub fn units(&self) -> Vec<&GraspUnit> {
        match self {
            HandLoad::Single(u) => vec![u],
            HandLoad::Shared(a, b) => vec![a, b],
        }
    }

    pub fn first(&self) -> &GraspUnit {
        match self {
            HandLoad::Single(u) | HandLoad::Shared(u, _) => u,
        }
    }

    pub fn extrinsic_geometries(&self) -> Vec<Geometry> {
        self.units().into_iter().flat_map(|u| u.extrinsic_geometries()).collect()
    }

    pub fn tool_geometries(&self) -> Vec<Geometry> {
        self.units().into_iter().flat_map(|u| u.tool_geometries()).collect()
    }

    fn kind_rank(&self) -> u8 {
        match self {
            HandLoad::Single(_) => 0,
            HandLoad::Shared(..) => 1,
        }
    }
}

impl PartialOrd for HandLoad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HandLoad {
    fn cmp(&self, other: &Self) -> Ordering {
        self.first()
            .cmp(other.first())
            .then(self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| self.units().cmp(&other.units()))
    }
}

/// One hand-level piece of a grasp state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Component {
    Held(HandLoad),
    Bimanual(GraspUnit),
    Environment(GraspUnit),
}

impl Component {
    pub fn hands_used(&self) -> usize {
        match self {
            Component::Held(_) => 1,
            Component::Bimanual(_) => 2,
            Component::Environment(_) => 0,
        }
    }

    pub fn units(&self) -> Vec<&GraspUnit> {
        match self {
            Component::Held(load) => load.units(),
            Component::Bimanual(u) | Component::Environment(u) => vec![u],
        }
    }

    fn first(&self) -> &GraspUnit {
        match self {
            Component::Held(load) => load.first(),
            Component::Bimanual(u) | Component::Environment(u) => u,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Component::Held(load) => load.kind_rank(),
            Component::Bimanual(_) => 2,
            Component::Environment(_) => 3,
        }
    }

    fn is_environment(&self) -> bool {
        matches!(self, Component::Environment(_))
    }
}

impl PartialOrd for Component {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// intrinsic-bearing components first, then by unit canonical form
impl Ord for Component {
    fn cmp(&self, other: &Self) -> Ordering {
        self.is_environment()
            .cmp(&other.is_environment())
            .then_with(|| self.first().cmp(other.first()))
            .then(self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| self.units().cmp(&other.units()))
    }
}

/// A canonical multiset of grasp units with their hand assignments.
///
/// `hands_available` is the capacity the state was checked against; it does
/// not take part in equality.
#[derive(Debug, Clone)]
pub struct GraspState {
    components: Vec<Component>,
    hands_available: u8,
}

impl GraspState {
    /// Builds a state directly from components. The components are sorted and
    /// hand usage is checked.
    pub fn from_components(mut components: Vec<Component>, hands_available: u8) -> Result<Self, GraspError> {
        if components.is_empty() {
            return Err(GraspError::InvalidState("a grasp state needs at least one unit".into()));
        }
        for c in &components {
            match c {
                Component::Environment(u) if !u.is_environment_only() => {
                    return Err(GraspError::InvalidState(format!(
                        "unit {u} has intrinsic fingers but is assigned to the environment"
                    )));
                }
                Component::Held(load) => {
                    if let Some(u) = load.units().into_iter().find(|u| u.is_environment_only()) {
                        return Err(GraspError::InvalidState(format!(
                            "unit {u} is made of environment contacts only and cannot be held by a hand"
                        )));
                    }
                }
                Component::Bimanual(u) if u.is_environment_only() => {
                    return Err(GraspError::InvalidState(format!(
                        "unit {u} is made of environment contacts only and cannot be held by two hands"
                    )));
                }
                _ => {}
            }
        }
        let used: usize = components.iter().map(Component::hands_used).sum();
        if used > hands_available as usize {
            return Err(GraspError::InvalidState(format!(
                "state uses {used} hands but only {hands_available} are available"
            )));
        }
        for c in &mut components {
            if let Component::Held(HandLoad::Shared(a, b)) = c {
                if b < a {
                    std::mem::swap(a, b);
                }
            }
        }
        components.sort();
        Ok(GraspState { components, hands_available })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn hands_available(&self) -> u8 {
        self.hands_available
    }

    /// Same grasp, checked against a different hand capacity.
    pub fn with_hands(&self, hands_available: u8) -> Result<Self, GraspError> {
        GraspState::from_components(self.components.clone(), hands_available)
    }

    pub fn hands_used(&self) -> usize {
        self.components.iter().map(Component::hands_used).sum()
    }

    /// The units with canonical hand tags: hand-held components receive
    /// `H1`, `H2`, ... in canonical order.
    pub fn units(&self) -> Vec<AssignedUnit> {
        let mut next = 0u8;
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                Component::Held(HandLoad::Single(u)) => {
                    out.push(AssignedUnit::new(u.clone(), HandAssignment::Hand(Hand(next))));
                    next += 1;
                }
                Component::Held(HandLoad::Shared(a, b)) => {
                    out.push(AssignedUnit::new(a.clone(), HandAssignment::Shared(Hand(next))));
                    out.push(AssignedUnit::new(b.clone(), HandAssignment::Shared(Hand(next))));
                    next += 1;
                }
                Component::Bimanual(u) => out.push(AssignedUnit::new(u.clone(), HandAssignment::Bimanual)),
                Component::Environment(u) => out.push(AssignedUnit::new(u.clone(), HandAssignment::Environment)),
            }
        }
        out
    }

    pub fn unit_count(&self) -> usize {
        self.components.iter().map(|c| c.units().len()).sum()
    }

    /// A single unit made of one environment finger (a cloth lying on a
    /// table, or hanging from a hook).
    pub fn is_single_extrinsic(&self) -> bool {
        matches!(self.components.as_slice(), [Component::Environment(u)] if u.is_single_extrinsic())
    }

    /// Sorted geometries of every extrinsic finger in the state.
    pub fn extrinsic_multiset(&self) -> Vec<Geometry> {
        let mut out: Vec<Geometry> = self
            .components
            .iter()
            .flat_map(|c| c.units())
            .flat_map(|u| u.extrinsic_geometries().collect::<Vec<_>>())
            .collect();
        out.sort();
        out
    }

    /// Hand-held loads, in canonical order.
    /// Distinct extrinsic geometries present, regardless of multiplicity.
    pub fn extrinsic_kinds(&self) -> std::collections::BTreeSet<Geometry> {
        self.extrinsic_multiset().into_iter().collect()
    }

    pub fn held_loads(&self) -> impl Iterator<Item = &HandLoad> {
        self.components.iter().filter_map(|c| match c {
            Component::Held(load) => Some(load),
            _ => None,
        })
    }

    pub fn environment_units(&self) -> impl Iterator<Item = &GraspUnit> {
        self.components.iter().filter_map(|c| match c {
            Component::Environment(u) => Some(u),
            _ => None,
        })
    }

    pub fn bimanual_units(&self) -> impl Iterator<Item = &GraspUnit> {
        self.components.iter().filter_map(|c| match c {
            Component::Bimanual(u) => Some(u),
            _ => None,
        })
    }

    pub fn involves_tool(&self) -> bool {
        self.components.iter().flat_map(|c| c.units()).any(|u| u.is_tool_borne())
    }
}

impl PartialEq for GraspState {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl Eq for GraspState {}

impl Hash for GraspState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.components.hash(state)
    }
}

impl PartialOrd for GraspState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GraspState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.components.cmp(&other.components)
    }
}

/// Returns the canonical representative of a multiset of assigned units.
///
/// Hand tags are only used to group units: the result renumbers hands in
/// canonical order, so swapping `H1` and `H2` in the input gives the same
/// state.
pub fn canonicalize(units: &[AssignedUnit], hands_available: u8) -> Result<GraspState, GraspError> {
    use std::collections::BTreeMap;

    let mut singles: BTreeMap<Hand, &GraspUnit> = BTreeMap::new();
    let mut shared: BTreeMap<Hand, Vec<&GraspUnit>> = BTreeMap::new();
    let mut components = Vec::new();

    for au in units {
        let u = &au.unit;
        match au.assignment {
            HandAssignment::Environment => {
                if !u.is_environment_only() {
                    return Err(GraspError::InvalidState(format!(
                        "unit {u} has intrinsic fingers but is assigned to the environment"
                    )));
                }
                components.push(Component::Environment(u.clone()));
            }
            HandAssignment::Hand(h) => {
                if singles.insert(h, u).is_some() {
                    return Err(GraspError::InvalidState(format!("hand {h} is assigned two units without sh")));
                }
            }
            HandAssignment::Shared(h) => shared.entry(h).or_default().push(u),
            HandAssignment::Bimanual => components.push(Component::Bimanual(u.clone())),
        }
    }

    for (h, u) in singles {
        if shared.contains_key(&h) {
            return Err(GraspError::InvalidState(format!("hand {h} holds a unit alone and also shares units")));
        }
        components.push(Component::Held(HandLoad::Single(u.clone())));
    }
    for (h, group) in shared {
        match group.as_slice() {
            [a, b] => components.push(Component::Held(HandLoad::shared((*a).clone(), (*b).clone()))),
            _ => {
                return Err(GraspError::InvalidState(format!(
                    "hand {h} shares {} units; sh groups hold exactly two",
                    group.len()
                )));
            }
        }
    }

    GraspState::from_components(components, hands_available)
}

/// Total number of virtual fingers across all units.
pub fn vf_count(state: &GraspState) -> usize {
    state.components.iter().flat_map(|c| c.units()).map(GraspUnit::len).sum()
}

/// Number of opposing force couples: each unit contributes half its fingers,
/// rounded up. A lone extrinsic finger pairs with gravity.
pub fn opposition_couples(state: &GraspState) -> usize {
    state.components.iter().flat_map(|c| c.units()).map(|u| u.len().div_ceil(2)).sum()
}

/// Contact-point class on the cloth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum GraspPointClass {
    Vertex,
    EdgePoint,
    InteriorPoint,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum ClothStateTag {
    Crumpled,
    PartiallyFlat,
    Flat,
    Folded,
    UnfoldedHeld,
    OnHanger,
    #[default]
    Unspecified,
}
