//! Order-theoretic trees and forests at desk scale.
//!
//! The crate implements an algebra of structured, optionally-axed forests
//! (partial orders whose up-sets are chains, partitioned into convex chains
//! called lines), together with:
//!
//! - finite terms, regular equation systems, and top-down deterministic
//!   automata over binary signatures ([`term`], [`system`]);
//! - arrangements (labelled linear orders), their concatenation algebra,
//!   regular arrangements and per-letter census ([`arrangement`]);
//! - explicit finite order forests with validation ([`oforest`]);
//! - structurings: lines, depths, covering, cuts, tails, substitution and
//!   the recomposition identity ([`structuring`]);
//! - values of terms over the `cat`/`fg`/`om` algebra with node constants,
//!   dual evaluation paths, representative positions ([`value`]);
//! - finite description schemes, extraction and unfolding ([`scheme`]);
//! - a monadic second-order evaluator over finite relational structures with
//!   cross-checking direct algorithms ([`mso`]);
//! - seeded random and exhaustive generators ([`sampling`]) and a fixture
//!   corpus ([`corpus`]).
//!
//! Every major capability has a runnable example under `examples/`; run
//! `cargo run --example term_values` (or any other name) to see the API in
//! action. A thin `otree` binary exposes the same operations as subcommands.

pub mod arrangement;
pub mod corpus;
pub mod mso;
pub mod oforest;
pub mod position;
pub mod sampling;
pub mod scheme;
pub mod structuring;
pub mod system;
pub mod term;
pub mod value;

pub use position::{Dir, Position};
