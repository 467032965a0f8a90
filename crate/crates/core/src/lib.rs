pub mod bloch;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod numerics;
pub mod robustness;
pub mod states;
pub mod subasis;

pub use error::{Error, Result};
