//! Oracles, seeded generators, text formats and the bench runner.

pub mod bench;
pub mod format;
pub mod gen;
pub mod oracle;
