pub mod cli;
pub mod coverage;
pub mod distance;
pub mod error;
pub mod interference;
pub mod link;
pub mod model;
pub mod par;
pub mod ppp;
pub mod quadrature;
pub mod simulation;
pub mod special;
pub mod tabulated;

pub use error::{Error, Result};
