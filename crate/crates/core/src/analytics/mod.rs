//! Closed-form subpacketization, gap, and planning computations.
//!
//! Everything that feeds a claim is exact big-integer or rational arithmetic;
//! floating point appears only in the Stirling-bound diagnostics.

pub mod counting;
pub mod gap;
pub mod planner;
pub mod sweep;

pub use counting::{subpacketization, SubpacketizationReport};
pub use gap::{gap_analysis, GapBoundReport, SymmetricBounds};
pub use planner::{
    cap_excess_memory, plan_from_caching_params, plan_memory_sharing, CapOutcome, MemorySharePlan,
    PartitionScheme, PlanPartition,
};
pub use sweep::{render_sweep_csv, sweep_symmetric, SweepRow, SWEEP_CSV_HEADER};
