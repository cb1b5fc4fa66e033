//! Std companion to `treetune-core`: CSV ingestion and export, versioned
//! JSON model and trial formats, the timing and comparison harness, and the
//! `treetune` command line.

pub mod bench;
pub mod cli;
pub mod error;
pub mod formats;
pub mod io;
pub mod synth;

pub use error::Error;
pub use treetune_core as core;
