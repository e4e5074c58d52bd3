#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod diff;
pub mod error;
pub mod family;
pub mod generator;
pub mod geometry;
pub mod grid;
pub mod hodograph;
pub mod io;
pub mod pde;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
