pub mod cli;
pub mod constructions;
pub mod error;
pub mod freeobjects;
pub mod ground;
pub mod harness;
pub mod matcore;
pub(crate) mod optim;
pub mod sqoperators;
pub mod sqspaces;

pub use error::{Error, Result};
