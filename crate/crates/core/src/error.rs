//! Error types shared across the crate.

use thiserror::Error;

/// Errors from set/permutation machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("input sets must be pairwise disjoint (point {0} appears twice)")]
    OverlappingSets(u16),
    #[error("subset size {size} out of range for a set of {set_size} points")]
    SubsetSizeOutOfRange { size: usize, set_size: usize },
    #[error("groups must be disjoint, non-empty and of equal size")]
    MalformedPartition,
    #[error("permutation has repeated point {0}")]
    DuplicatePoint(u16),
    #[error("permutation does not cover exactly the partition's points")]
    PointSetMismatch,
    #[error("enumeration over {points} points exceeds the cap of {cap}")]
    EnumerationCapExceeded { points: usize, cap: usize },
}

/// A single violated configuration constraint. `validate_config` reports all
/// of them at once so sweep tooling gets full diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigViolation {
    #[error("{field} must be positive")]
    NonPositive { field: &'static str },
    #[error("transmitter caches cannot hold the library: tx_count * tx_cache = {total} < {library} files")]
    LibraryNotCovered { total: String, library: u32 },
    #[error("tx caching parameter tx_count*tx_cache/library = {value} is not a positive integer")]
    NonIntegerTxDims { value: String },
    #[error("rx caching parameter rx_count*rx_cache/library = {value} is not a positive integer")]
    NonIntegerRxDims { value: String },
    #[error("tx points per dimension library/tx_cache = {value} is not a positive integer")]
    NonIntegerTxPerDim { value: String },
    #[error("rx points per dimension library/rx_cache = {value} is not a positive integer")]
    NonIntegerRxPerDim { value: String },
    #[error("dimension ratio t_tx/t_rx = {value} is not a positive integer")]
    NonIntegerDimRatio { value: String },
    #[error("rx points per dimension {rx_per_dim} is below dim_ratio + 1 = {required}")]
    RxPerDimTooSmall { rx_per_dim: u32, required: u32 },
    #[error("step size t_tx + t_rx = {step_size} exceeds rx_count = {rx_count}")]
    StepSizeExceedsReceivers { step_size: String, rx_count: u32 },
}

/// Aggregate of every violated constraint for one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration: {}", self.lines())]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl ConfigError {
    fn lines(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("node index {index} out of range ({role} count is {count})")]
    NodeOutOfRange {
        role: &'static str,
        index: u16,
        count: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemandError {
    #[error("demand vector has length {got}, expected rx_count = {expected}")]
    WrongLength { got: usize, expected: u32 },
    #[error("demanded file {file} out of range (library holds {library})")]
    FileOutOfRange { file: u32, library: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("packet offset {offset} out of range (step size {step_size})")]
    OffsetOutOfRange { offset: usize, step_size: u32 },
    #[error("base transmitter tuple must hold one transmitter per dimension")]
    MalformedBaseTuple,
    #[error("receiver {rx} already caches the subfile; it cannot be a delivery target")]
    TargetInCacheSet { rx: u16 },
    #[error("receiver {rx} does not take part in this step")]
    ReceiverNotInStep { rx: u16 },
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyError {
    #[error("channel shape {got_rx}x{got_tx} does not match the network {want_rx}x{want_tx}")]
    ChannelShapeMismatch {
        got_rx: usize,
        got_tx: usize,
        want_rx: usize,
        want_tx: usize,
    },
    #[error("zero-forcing system for step {step}, packet {packet} is singular or ill-conditioned (condition {condition:e})")]
    IllConditioned {
        step: usize,
        packet: usize,
        condition: f64,
    },
    #[error("precoders must be solved for the same step size ({got} coefficients for {want} packets)")]
    PrecoderMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("tx caching parameter {0} is below 1; the library cannot be covered")]
    TxCachingBelowOne(String),
    #[error("rx caching parameter {0} is below 1; every partition needs a cached receiver dimension")]
    RxCachingBelowOne(String),
    #[error("rx_count {0} leaves no room to cap the step size")]
    CapInfeasible(u32),
}
