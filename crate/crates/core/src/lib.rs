//! Two- and three-party communication protocols run on explicit truth
//! tables, with every bit recorded and every answer checked against the table.

pub mod bits;
pub mod error;
pub mod harness;
pub mod hitting;
pub mod instance;
pub mod partition;
pub mod patterns;
pub mod phi;
pub mod psi;
pub mod rect;
pub mod threeparty;
pub mod transcript;
pub mod xi;

pub use error::{Error, Result};
