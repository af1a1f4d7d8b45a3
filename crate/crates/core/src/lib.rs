//! Exact-arithmetic engine for decorated-tree Hopf algebras, preparation maps
//! and the renormalization tower they generate.
//!
//! The crate is organized bottom-up:
//!
//! * [`index`] / [`degree`] — multi-indices and the symbolic degree grading,
//! * [`tree`] — canonical non-planar decorated trees and their products,
//! * [`grammar`] — the textual tree grammar (parser and printer),
//! * [`lincomb`] — formal linear combinations with exact rational coefficients,
//! * [`hopf`] — the coaction, the positive coproduct and the antipode,
//! * [`rules`] — rule-driven basis generation with closure diagnostics,
//! * [`prep`] — root-extraction preparation maps and characters,
//! * [`tower`] — the full renormalization tower built from a preparation map,
//! * [`suites`] — executable property suites over a generated basis,
//! * [`serial`] — JSON formats for specs, characters, bases and reports.
//!
//! All coefficients in this crate are exact rationals; floating point only
//! appears in the companion numeric laboratory crate.

pub mod degree;
pub mod error;
pub mod grammar;
pub mod hopf;
pub mod index;
pub mod lincomb;
pub mod prep;
pub mod rules;
pub mod serial;
pub mod suites;
pub mod tower;
pub mod tree;

/// Exact rational scalar used for every symbolic coefficient.
pub type Rat = num_rational::BigRational;

pub use degree::{Degree, Params};
pub use error::CoreError;
pub use index::MultiIndex;
pub use lincomb::{LinComb, PlusComb, PlusPlusComb, TreeComb, TreePlusComb};
pub use prep::{Character, PrepConfig, PrepMap};
pub use rules::{Basis, EquationSpec, NodeShape};
pub use tree::{DecoratedTree, EdgeLabel, Forest, PlusTree};

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rat {
    use num_bigint::BigInt;
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rat {
    rat(num, 1)
}

/// Parse a rational from a string such as `-3/2`, `7` or `−101/100`.
///
/// Accepts both the ASCII hyphen and the unicode minus sign.
pub fn parse_rat(s: &str) -> Result<Rat, CoreError> {
    let cleaned: String = s.trim().replace('\u{2212}', "-");
    cleaned
        .parse::<Rat>()
        .map_err(|e| CoreError::BadRational(format!("{s:?}: {e}")))
}
