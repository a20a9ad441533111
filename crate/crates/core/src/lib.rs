#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod extremes;
pub mod gshift;
pub mod conv;
pub mod lan;
pub mod nonuniq;
pub mod report;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
