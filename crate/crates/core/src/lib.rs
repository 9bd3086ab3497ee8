//! Ovoidal Buekenhout-Metz and Buekenhout-Tits unitals in PG(2, q^2).
//!
//! The crate builds a deterministic finite field tower GF(p) -> GF(q) ->
//! GF(q^2) ([`gf`]), models the Desarguesian plane PG(2, q^2) with its
//! Baer-subline machinery ([`pg2`]), constructs and validates the two unital
//! families ([`unitals`]), and produces O'Nan configurations in them both by
//! explicit algebraic construction and by independent exhaustive search
//! ([`onan`]).
//!
//! Everything is deterministic: no randomness, reproducible canonical forms,
//! and byte-identical serialized output regardless of thread count.

// Integer expressions like (m + 1) / 2 and m % d == 0 mirror the exponent
// and divisibility formulas they implement; keep them in that shape.
#![allow(clippy::manual_div_ceil, clippy::manual_is_multiple_of)]

pub mod error;
pub mod gf;
pub mod onan;
pub mod pg2;
pub mod unitals;

pub use error::{Error, ParamViolation};
pub use gf::{Field, FieldSpec, Fq, Fq2};
pub use pg2::{Collineation, ProjLine, ProjPoint};
pub use unitals::{Block, BmParams, LineClass, TitsParams, Unital, UnitalParams};
