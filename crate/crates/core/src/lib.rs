//! Timed synchronous transition systems, real-time requirement patterns and
//! assume-guarantee proof obligations, with an explicit-state enumerator and
//! SMT-based bounded model checking and k-induction.

pub mod ast;
pub mod check;
pub mod cli;
pub mod compose;
mod error;
pub mod lexer;
pub mod oracle;
pub mod parser;
pub mod pattern;
pub mod print;
pub mod semantics;
pub mod source;
pub mod typeck;
pub mod value;
pub mod wf;

pub use error::Error;
