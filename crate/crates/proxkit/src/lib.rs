//! Std companion of `proxkit-core`: data generation and ingestion, output
//! files, experiment drivers, the prox catalog check and the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod catalog;
pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{Error, Result};
pub use proxkit_core as core;
