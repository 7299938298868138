//! Command line and HTTP front ends over `tdbcorr_core`.

pub mod cli;
pub mod service;
