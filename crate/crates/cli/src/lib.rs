//! Command implementations behind the `makeev` binary.

pub mod commands;
pub mod table;
