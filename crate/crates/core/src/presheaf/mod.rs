//! The base category, finite presheaves over it, and the finite colimits the
//! game needs.

mod base;
mod finite;

pub use base::{
    base_presentation, equations_into, generators_into, hom_into, move_kinds, normalize_path,
    BaseMorphism, BaseObject, Equation, Generator, MoveKind, Presentation,
};
pub use finite::{
    check_presheaf, elements_of_representable, is_isomorphic, is_mono, pushout, Element,
    ElementArrow, ElementCategory, FinPresheaf, PresheafMorphism, Pushout,
};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PresheafError {
    #[error("malformed key {0:?}")]
    BadKey(String),
    #[error("empty generator path")]
    EmptyPath,
    #[error("{0} and {1} are not composable")]
    NotComposable(String, String),
    #[error("object {object} exceeds the maximum arity {max_arity}")]
    ArityExceeded { object: String, max_arity: usize },
    #[error("action of {generator} has {found} entries, expected {expected}")]
    ActionSize { generator: String, expected: usize, found: usize },
    #[error("action of {generator} sends an element outside the carrier of {object}")]
    ActionRange { generator: String, object: String },
    #[error("missing action for {0}")]
    MissingAction(String),
    #[error("equation {0} fails")]
    EquationFails(String),
    #[error("component at {object} is not a function between the carriers")]
    ComponentShape { object: String },
    #[error("naturality square for {0} does not commute")]
    NotNatural(String),
    #[error("morphisms do not share a domain")]
    DomainMismatch,
    #[error("maps out of the pushout legs disagree on the shared part")]
    NotCocone,
    #[error("invalid presheaf JSON: {0}")]
    Json(String),
}
