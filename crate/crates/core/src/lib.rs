//! Game semantics for CCS.
//!
//! The crate models the multi-player game whose positions and moves are
//! finite presheaves and cospans, translates CCS processes into innocent
//! strategies, derives labelled transition systems from process terms and
//! from strategies, and checks bisimulation and fair-testing properties on
//! them with explicit budgets.
//!
//! Module map:
//!
//! - [`ccs`]: CCS syntax, parsing, well-formedness and the standard LTS.
//! - [`presheaf`]: the base category, finite presheaves, pushouts.
//! - [`game`]: positions, local seeds, global moves, plays and views.
//! - [`strategy`]: the strategy syntax, translation, process terms, behaviours.
//! - [`lts`]: derived transition systems, change of base, bisimulation.
//! - [`fairtest`]: the testing predicate, fair testing and tree tests.
//! - [`acceptance`]: the end-to-end acceptance criteria and their oracles.

pub mod acceptance;
pub mod ccs;
pub mod fairtest;
pub mod game;
pub mod lts;
pub mod presheaf;
pub mod strategy;

/// Default bound on player arity used by the presheaf presentation tables.
pub const DEFAULT_MAX_ARITY: usize = 8;

/// Default cap on explored states for any single exploration.
pub const DEFAULT_STATE_CAP: usize = 100_000;
