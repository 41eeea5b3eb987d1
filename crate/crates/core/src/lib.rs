#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basin;
pub mod error;
pub mod lotka;
pub mod poly;
pub mod rational;
pub mod solver;
pub mod special;
pub mod stability;

pub use error::{Error, Result};
