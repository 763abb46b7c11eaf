//! Textual grasp notation.
//!
//! ```text
//! state     := unit_expr { "+" unit_expr }
//! unit_expr := prefix* unit            prefix := "2" | "sh" | "bm"
//! unit      := vf vf? vf?
//! vf        := ( "P" | "L" | "Pi" ) [ "_e" ]
//! ```
//!
//! Compact aliases `Pie`, `Pe`, `Le` (and `Π` for `Pi`) are accepted on
//! input; the printer always emits the compact form. Tokens are matched
//! greedily, longest first. Whitespace may appear around `+` and after a
//! prefix, but not inside a unit.
//!
//! `2X` puts `X` on two hands, `sh 2X` puts two `X` on one hand, and two
//! consecutive single `sh` units (`sh PP+sh LL`) share one hand. `bm X` is one
//! unit realized by two hands. A lone intrinsic finger (`L`) is read as a
//! tool-borne contact.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;
use crate::grasp::{Component, Geometry, GraspState, GraspUnit, HandLoad, VirtualFinger, DEFAULT_HANDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// A message anchored at a character offset of the parsed text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotationDiagnostic {
    pub position: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for NotationDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}: {}", self.severity, self.position, self.message)
    }
}

// longest first; order matters for greedy matching
const VF_TOKENS: &[(&str, Geometry, bool)] = &[
    ("Pi_e", Geometry::Plane, true),
    ("Pie", Geometry::Plane, true),
    ("Π_e", Geometry::Plane, true),
    ("Πe", Geometry::Plane, true),
    ("P_e", Geometry::Point, true),
    ("L_e", Geometry::Line, true),
    ("Pi", Geometry::Plane, false),
    ("Pe", Geometry::Point, true),
    ("Le", Geometry::Line, true),
    ("Π", Geometry::Plane, false),
    ("P", Geometry::Point, false),
    ("L", Geometry::Line, false),
];

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    _text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { chars: text.chars().collect(), pos: 0, _text: text }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        let n = lit.chars().count();
        if self.pos + n > self.chars.len() {
            return false;
        }
        if self.chars[self.pos..self.pos + n].iter().copied().eq(lit.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn vf(&mut self) -> Option<VirtualFinger> {
        VF_TOKENS.iter().find_map(|&(tok, geometry, extrinsic)| {
            self.eat(tok).then_some(VirtualFinger { geometry, extrinsic, via_tool: false })
        })
    }
}

fn error(position: usize, message: impl Into<String>) -> ParseError {
    ParseError { diagnostic: NotationDiagnostic { position, message: message.into(), severity: Severity::Error } }
}

/// Parses a grasp expression assuming two hands.
pub fn parse_grasp(text: &str) -> Result<GraspState, ParseError> {
    parse_grasp_with_hands(text, DEFAULT_HANDS)
}

pub fn parse_grasp_with_hands(text: &str, hands_available: u8) -> Result<GraspState, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.at_end() {
        return Err(error(0, "empty grasp expression"));
    }

    let mut components: Vec<Component> = Vec::new();
    let mut pending_sh: Option<(GraspUnit, usize)> = None;

    loop {
        let expr_start = cur.pos;
        let (mut dup, mut sh, mut bm) = (false, false, false);
        loop {
            cur.skip_ws();
            let at = cur.pos;
            if cur.eat("2") {
                if dup {
                    return Err(error(at, "repeated multiplicity prefix"));
                }
                dup = true;
            } else if cur.eat("sh") {
                if sh || bm {
                    return Err(error(at, "conflicting hand prefix"));
                }
                sh = true;
            } else if cur.eat("bm") {
                if sh || bm {
                    return Err(error(at, "conflicting hand prefix"));
                }
                bm = true;
            } else {
                break;
            }
        }

        let unit_start = cur.pos;
        let mut vfs = Vec::new();
        loop {
            let at = cur.pos;
            match cur.vf() {
                Some(vf) => {
                    if vfs.len() == crate::grasp::MAX_UNIT_VFS {
                        return Err(error(at, "a grasp unit holds at most 3 virtual fingers"));
                    }
                    vfs.push(vf);
                }
                None => break,
            }
        }
        if vfs.is_empty() {
            return Err(match cur.peek() {
                None => error(cur.pos, "expected a grasp unit"),
                Some(c) => error(cur.pos, format!("unknown token '{c}'")),
            });
        }
        if let [vf] = vfs.as_mut_slice() {
            if !vf.extrinsic {
                vf.via_tool = true;
            }
        }
        let unit = GraspUnit::new(vfs).map_err(|e| error(unit_start, e.to_string()))?;
        let env_only = unit.is_environment_only();
        if env_only && (sh || bm) {
            return Err(error(expr_start, format!("environment unit {unit} cannot take a hand prefix")));
        }

        if let Some((_, at)) = &pending_sh {
            if !(sh && !dup) {
                return Err(error(*at, "sh unit without a partner; write sh 2X or sh X+sh Y"));
            }
        }
        let copies = if dup { 2 } else { 1 };
        if sh {
            if dup {
                components.push(Component::Held(HandLoad::shared(unit.clone(), unit)));
            } else if let Some((first, _)) = pending_sh.take() {
                components.push(Component::Held(HandLoad::shared(first, unit)));
            } else {
                pending_sh = Some((unit, expr_start));
            }
        } else if bm {
            components.extend(std::iter::repeat_n(Component::Bimanual(unit), copies));
        } else if env_only {
            components.extend(std::iter::repeat_n(Component::Environment(unit), copies));
        } else {
            components.extend(std::iter::repeat_n(Component::Held(HandLoad::Single(unit)), copies));
        }

        let used: usize =
            components.iter().map(Component::hands_used).sum::<usize>() + usize::from(pending_sh.is_some());
        if used > hands_available as usize {
            return Err(error(expr_start, format!("expression needs more than {hands_available} hands")));
        }

        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let at = cur.pos;
        if !cur.eat("+") {
            let c = cur.peek().unwrap_or(' ');
            return Err(error(at, format!("unknown token '{c}'")));
        }
        cur.skip_ws();
        if cur.at_end() {
            return Err(error(cur.pos, "expected a grasp unit after '+'"));
        }
    }

    if let Some((_, at)) = pending_sh {
        return Err(error(at, "sh unit without a partner; write sh 2X or sh X+sh Y"));
    }

    GraspState::from_components(components, hands_available).map_err(|e| error(0, e.to_string()))
}

/// Prints the canonical compact form of a state.
pub fn print_grasp(state: &GraspState) -> String {
    let comps = state.components();
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < comps.len() {
        let twin = comps.get(i + 1).is_some_and(|next| next == &comps[i]);
        let part = match &comps[i] {
            Component::Held(HandLoad::Single(u)) | Component::Environment(u) => {
                if twin {
                    format!("2{u}")
                } else {
                    u.to_string()
                }
            }
            Component::Held(HandLoad::Shared(a, b)) => {
                if a == b {
                    format!("sh 2{a}")
                } else {
                    format!("sh {a}+sh {b}")
                }
            }
            Component::Bimanual(u) => {
                if twin {
                    format!("bm 2{u}")
                } else {
                    format!("bm {u}")
                }
            }
        };
        let folds = twin && !matches!(comps[i], Component::Held(HandLoad::Shared(..)));
        i += if folds { 2 } else { 1 };
        parts.push(part);
    }
    parts.join("+")
}

impl fmt::Display for GraspState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_grasp(self))
    }
}

impl std::str::FromStr for GraspState {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_grasp(s)
    }
}

impl Serialize for GraspState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&print_grasp(self))
    }
}

impl<'de> Deserialize<'de> for GraspState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_grasp(&text).map_err(|e| serde::de::Error::custom(format!("grasp \"{text}\": {e}")))
    }
}

/// Parses a one-hand load such as `PP`, `sh 2PPie` or `L` (tool).
pub fn parse_hand_load(text: &str) -> Result<HandLoad, ParseError> {
    let state = parse_grasp(text)?;
    match state.components() {
        [Component::Held(load)] => Ok(load.clone()),
        _ => Err(error(0, format!("\"{text}\" is not a single-hand grasp"))),
    }
}

impl fmt::Display for HandLoad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandLoad::Single(u) => write!(f, "{u}"),
            HandLoad::Shared(a, b) if a == b => write!(f, "sh 2{a}"),
            HandLoad::Shared(a, b) => write!(f, "sh {a}+sh {b}"),
        }
    }
}

impl Serialize for HandLoad {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HandLoad {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_hand_load(&text).map_err(|e| serde::de::Error::custom(format!("grasp \"{text}\": {e}")))
    }
}
