pub mod cli;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod interval;
pub mod optimize;
pub mod pipeline;
pub mod scaffold;
pub mod scene;
pub mod tree;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use interval::{Frame, TimeInterval};
