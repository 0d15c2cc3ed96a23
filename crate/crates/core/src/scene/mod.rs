//! Track data, synthetic scenes, initialization from tracks, persistence and
//! track-space evaluation.

mod eval;
mod init;
pub mod io;
mod synth;
mod tracks;

pub use eval::{evaluate, EvalReport};
pub use init::{classify_static, init_points, init_scaffold, scaffold_source_ids};
pub use io::{load_tracks, save_tracks};
pub use synth::{generate_synthetic, is_background_id, SceneKind, SyntheticSpec};
pub use tracks::{Track, TrackSet};
