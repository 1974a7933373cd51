// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvfun;
pub mod diag;
pub mod dualgeo;
pub mod error;
pub mod flow;
pub mod grid;
pub mod initial;
pub mod linalg;
pub mod oracles;

pub use error::{Error, Result};
