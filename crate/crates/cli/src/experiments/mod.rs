//! The experiment implementations behind the registry.

pub mod extremes;
pub mod jump;
pub mod lpp;
pub mod meander;
pub mod misc;

/// Shortest-round-trip float formatting shared by every CSV writer; the
/// output is deterministic for a given value.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
