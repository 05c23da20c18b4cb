//! Braid monodromy: the closed braid traced by the fiber roots over a loop.

mod lollipop;
mod track;

pub use lollipop::{
    lollipop_loop, max_feasible_radius, qp_factorization, qp_factorization_with, FactorMarker, Lollipop, QpResult,
    RADIUS_RETRIES,
};
pub use track::{
    braid_along, braid_along_with, clearance_floor, track_roots, Clearance, CrossingEvent, TrackOptions, Tracking,
    CLEARANCE_FRACTION,
};

use crate::branch::BranchData;
use crate::path::LoopPath;

/// Branch points enclosed by the loop, weighted by winding number and
/// multiplicity.
pub fn enclosed_count(path: &LoopPath, branch: &BranchData) -> i64 {
    branch
        .points
        .iter()
        .map(|p| path.winding_number(p.z) * p.multiplicity as i64)
        .sum()
}
