//! Test support for the Anka crates: random tables and pipelines,
//! brute-force reference implementations of every data operation and the
//! property drivers built from them.

pub mod cases;
pub mod checks;
pub mod corpus;
pub mod gen;
pub mod oracle;
pub mod pipelines;
