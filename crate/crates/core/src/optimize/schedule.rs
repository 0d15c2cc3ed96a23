use crate::exec::ExecMode;

/// Number of sequential optimization stages for a depth-`depth` tree: one
/// per layer when nodes of a layer run concurrently, one per node otherwise.
pub fn schedule_cost(depth: u32, mode: ExecMode) -> u64 {
    match mode {
        ExecMode::Parallel => depth as u64 + 1,
        ExecMode::Sequential => (1u64 << (depth + 1)) - 1,
    }
}

/// Fraction of stages saved by layer-parallel training.
pub fn acceleration_ratio(depth: u32) -> f64 {
    let seq = schedule_cost(depth, ExecMode::Sequential) as f64;
    (seq - schedule_cost(depth, ExecMode::Parallel) as f64) / seq
}
