#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boost;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod forge;
pub mod kinematics;

pub use error::{LabError, Result};
