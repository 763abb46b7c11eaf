//! Grasp calculus for robotic cloth manipulation.
//!
//! Grasps are written as multisets of *grasp units*, each a small set of
//! geometric virtual fingers (point, line, plane) contributed by a hand or by
//! the environment. On top of that algebra the crate provides a textual
//! notation, a classifier for transitions between grasps, a validated corpus
//! of manipulation tasks and grippers, a cost-based planner over grasp states,
//! and aggregate statistics.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod grasp;
pub mod notation;
pub mod par;
pub mod planner;
pub mod stats;

pub use classifier::{classify_transition, explain_transition, ClassificationResult, PrimitiveType, TransitionFlags};
pub use error::{ClassifyError, EnumerationError, GraspError, ParseError, PlanError, SchemaError};
pub use grasp::{
    canonicalize, is_prehensile, opposition_couples, vf_count, AssignedUnit, ClothStateTag, Component, Geometry,
    GraspPointClass, GraspState, GraspUnit, Hand, HandAssignment, HandLoad, VirtualFinger,
};
pub use notation::{parse_grasp, parse_grasp_with_hands, print_grasp, NotationDiagnostic, Severity};
pub use par::Execution;
pub use stats::{
    coverage_report, enumerate_grasps, grasp_instance_tally, primitive_tally, task_distribution, TallyReport,
};
