//! Persistence and plumbing: run configuration, binary checkpoints,
//! full-precision CSV emission, and locked run directories.

pub mod checkpoint;
pub mod config;
pub mod csv;
pub mod rundir;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use config::RunConfig;
pub use rundir::RunDir;
