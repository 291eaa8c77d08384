//! IO and front ends for `metaqa_core`: file formats, run configuration,
//! the batch pipeline, the command line and the teaching HTTP service.

pub mod assets;
pub mod cli;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod service;

pub use config::RunConfig;
pub use pipeline::AppError;
