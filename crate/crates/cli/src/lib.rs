//! Command-line front end: surface syntax, resolution and the file driver.

pub mod ast;
pub mod driver;
pub mod lexer;
pub mod parser;
pub mod resolve;

pub use driver::{load_signature, run_source, Options, Outcome};
