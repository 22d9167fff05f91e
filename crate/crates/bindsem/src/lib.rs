//! Command-line front end for `bindsem-core`: seeded generators, law suites,
//! a named-variable substitution oracle and output rendering.

pub mod cli;
pub mod gen;
pub mod laws;
pub mod oracle;
pub mod render;
