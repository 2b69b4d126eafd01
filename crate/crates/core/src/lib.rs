pub mod congruence;
pub mod error;
pub mod formula;
pub mod ineq;
pub mod kronecker;
pub mod mann;
pub mod numerics;

pub use error::{Error, Result};
