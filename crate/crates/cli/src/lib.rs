//! Input documents, commands and report rendering behind the `l2betti`
//! binary.

pub mod commands;
pub mod corpus;
pub mod input;
pub mod render;
