//! Parameter validation, hypercube file splitting, and cache manifests for
//! the prefetching phase.
//!
//! Every file is split into one subfile per pair of transmitter/receiver
//! tuples drawn one-per-dimension from the two hypercubes. A transmitter
//! caches exactly the subfiles whose transmitter tuple contains it, and
//! likewise for receivers; the memory budgets then hold with equality.

use std::fmt::Write as _;

use num::rational::Ratio;
use num::{BigInt, BigRational, Signed, ToPrimitive};

use crate::combinatorics::{unordered_product, DimensionPartition, Point};
use crate::error::{ConfigError, ConfigViolation, PlacementError};

/// Exact fraction used for cache sizes and derived caching parameters.
pub type Frac = Ratio<i64>;

/// Raw system parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    pub tx_count: u32,
    pub rx_count: u32,
    /// Per-transmitter cache size, in files.
    pub tx_cache: Frac,
    /// Per-receiver cache size, in files.
    pub rx_cache: Frac,
    /// Library size, in files.
    pub library: u32,
}

impl NetworkConfig {
    pub fn new(tx_count: u32, rx_count: u32, tx_cache: Frac, rx_cache: Frac, library: u32) -> Self {
        Self {
            tx_count,
            rx_count,
            tx_cache,
            rx_cache,
            library,
        }
    }

    /// Caching parameter `tx_count * tx_cache / library`.
    pub fn tx_caching_param(&self) -> Frac {
        Frac::from_integer(self.tx_count as i64) * self.tx_cache
            / Frac::from_integer(self.library as i64)
    }

    /// Caching parameter `rx_count * rx_cache / library`.
    pub fn rx_caching_param(&self) -> Frac {
        Frac::from_integer(self.rx_count as i64) * self.rx_cache
            / Frac::from_integer(self.library as i64)
    }
}

/// Validated caching parameters. `tx_count = tx_per_dim * tx_dims` and
/// `rx_count = rx_per_dim * rx_dims` hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedParams {
    pub tx_count: u32,
    pub rx_count: u32,
    pub library: u32,
    /// Number of transmitter hypercube dimensions (each file is cached by
    /// this many transmitters).
    pub tx_dims: u32,
    /// Number of receiver hypercube dimensions.
    pub rx_dims: u32,
    /// Transmitters per dimension (`library / tx_cache`).
    pub tx_per_dim: u32,
    /// Receivers per dimension (`library / rx_cache`).
    pub rx_per_dim: u32,
    /// `tx_dims / rx_dims`.
    pub dim_ratio: u32,
}

impl DerivedParams {
    /// Packets delivered per communication step: `tx_dims + rx_dims`.
    pub fn step_size(&self) -> u32 {
        self.tx_dims + self.rx_dims
    }

    /// Subfiles each file splits into: `tx_per_dim^tx_dims * rx_per_dim^rx_dims`.
    pub fn subfiles_per_file(&self) -> u64 {
        (self.tx_per_dim as u64).pow(self.tx_dims) * (self.rx_per_dim as u64).pow(self.rx_dims)
    }

    /// Build params straight from hypercube dimensions. Used by sweeps and
    /// tests; `validate_config` is the user-facing route.
    pub fn from_dims(
        tx_per_dim: u32,
        tx_dims: u32,
        rx_per_dim: u32,
        rx_dims: u32,
        library: u32,
    ) -> Result<Self, ConfigError> {
        let mut violations = Vec::new();
        for (field, v) in [
            ("tx_per_dim", tx_per_dim),
            ("tx_dims", tx_dims),
            ("rx_per_dim", rx_per_dim),
            ("rx_dims", rx_dims),
            ("library", library),
        ] {
            if v == 0 {
                violations.push(ConfigViolation::NonPositive { field });
            }
        }
        if !violations.is_empty() {
            return Err(ConfigError { violations });
        }
        if tx_dims % rx_dims != 0 {
            violations.push(ConfigViolation::NonIntegerDimRatio {
                value: format!("{tx_dims}/{rx_dims}"),
            });
        }
        let dim_ratio = tx_dims / rx_dims.max(1);
        if violations.is_empty() && rx_per_dim < dim_ratio + 1 {
            violations.push(ConfigViolation::RxPerDimTooSmall {
                rx_per_dim,
                required: dim_ratio + 1,
            });
        }
        let rx_count = rx_per_dim * rx_dims;
        if violations.is_empty() && tx_dims + rx_dims > rx_count {
            violations.push(ConfigViolation::StepSizeExceedsReceivers {
                step_size: (tx_dims + rx_dims).to_string(),
                rx_count,
            });
        }
        if !violations.is_empty() {
            return Err(ConfigError { violations });
        }
        Ok(Self {
            tx_count: tx_per_dim * tx_dims,
            rx_count,
            library,
            tx_dims,
            rx_dims,
            tx_per_dim,
            rx_per_dim,
            dim_ratio,
        })
    }
}

fn frac_as_positive_integer(v: Frac) -> Option<u32> {
    if v.is_integer() && v.is_positive() {
        v.to_integer().to_u32()
    } else {
        None
    }
}

/// Check every integrality and regime constraint, reporting all violations at
/// once.
pub fn validate_config(cfg: &NetworkConfig) -> Result<DerivedParams, ConfigError> {
    let mut violations = Vec::new();
    for (field, v) in [
        ("tx_count", cfg.tx_count as i64),
        ("rx_count", cfg.rx_count as i64),
        ("library", cfg.library as i64),
    ] {
        if v <= 0 {
            violations.push(ConfigViolation::NonPositive { field });
        }
    }
    for (field, v) in [("tx_cache", cfg.tx_cache), ("rx_cache", cfg.rx_cache)] {
        if !v.is_positive() {
            violations.push(ConfigViolation::NonPositive { field });
        }
    }
    if !violations.is_empty() {
        return Err(ConfigError { violations });
    }

    let library = Frac::from_integer(cfg.library as i64);
    if Frac::from_integer(cfg.tx_count as i64) * cfg.tx_cache < library {
        violations.push(ConfigViolation::LibraryNotCovered {
            total: (Frac::from_integer(cfg.tx_count as i64) * cfg.tx_cache).to_string(),
            library: cfg.library,
        });
    }

    let t_tx = cfg.tx_caching_param();
    let t_rx = cfg.rx_caching_param();
    let tx_dims = frac_as_positive_integer(t_tx);
    let rx_dims = frac_as_positive_integer(t_rx);
    if tx_dims.is_none() {
        violations.push(ConfigViolation::NonIntegerTxDims {
            value: t_tx.to_string(),
        });
    }
    if rx_dims.is_none() {
        violations.push(ConfigViolation::NonIntegerRxDims {
            value: t_rx.to_string(),
        });
    }

    let d_tx = library / cfg.tx_cache;
    let d_rx = library / cfg.rx_cache;
    let tx_per_dim = frac_as_positive_integer(d_tx);
    let rx_per_dim = frac_as_positive_integer(d_rx);
    if tx_per_dim.is_none() {
        violations.push(ConfigViolation::NonIntegerTxPerDim {
            value: d_tx.to_string(),
        });
    }
    if rx_per_dim.is_none() {
        violations.push(ConfigViolation::NonIntegerRxPerDim {
            value: d_rx.to_string(),
        });
    }

    let ratio = t_tx / t_rx;
    let dim_ratio = frac_as_positive_integer(ratio);
    if dim_ratio.is_none() {
        violations.push(ConfigViolation::NonIntegerDimRatio {
            value: ratio.to_string(),
        });
    }

    if let (Some(rx_per_dim), Some(dim_ratio)) = (rx_per_dim, dim_ratio) {
        if rx_per_dim < dim_ratio + 1 {
            violations.push(ConfigViolation::RxPerDimTooSmall {
                rx_per_dim,
                required: dim_ratio + 1,
            });
        }
    }

    if t_tx + t_rx > Frac::from_integer(cfg.rx_count as i64) {
        violations.push(ConfigViolation::StepSizeExceedsReceivers {
            step_size: (t_tx + t_rx).to_string(),
            rx_count: cfg.rx_count,
        });
    }

    if !violations.is_empty() {
        return Err(ConfigError { violations });
    }
    Ok(DerivedParams {
        tx_count: cfg.tx_count,
        rx_count: cfg.rx_count,
        library: cfg.library,
        tx_dims: tx_dims.unwrap(),
        rx_dims: rx_dims.unwrap(),
        tx_per_dim: tx_per_dim.unwrap(),
        rx_per_dim: rx_per_dim.unwrap(),
        dim_ratio: dim_ratio.unwrap(),
    })
}

/// Transmitter dimensions: dimension `i` holds transmitters `k` with
/// `k / tx_per_dim == i`.
pub fn tx_dimensions(p: &DerivedParams) -> DimensionPartition {
    DimensionPartition::canonical(p.tx_per_dim as usize, p.tx_dims as usize)
}

/// Receiver dimensions, analogously.
pub fn rx_dimensions(p: &DerivedParams) -> DimensionPartition {
    DimensionPartition::canonical(p.rx_per_dim as usize, p.rx_dims as usize)
}

/// One subfile: a file index plus the transmitter and receiver tuples that
/// exclusively cache it. Both tuples are sorted and hold one node per
/// dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfileId {
    pub file: u32,
    pub tx_set: Vec<Point>,
    pub rx_set: Vec<Point>,
}

/// Cache owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Tx(u16),
    Rx(u16),
}

/// The exact set of subfiles one node stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheManifest {
    pub owner: Node,
    pub subfiles: Vec<SubfileId>,
}

/// Split every file of the library. Order: file-major, then lexicographic on
/// the sorted transmitter tuple, then on the sorted receiver tuple.
pub fn split_files(p: &DerivedParams) -> Vec<SubfileId> {
    let tx_tuples = unordered_product(tx_dimensions(p).groups())
        .expect("dimension groups are disjoint");
    let rx_tuples = unordered_product(rx_dimensions(p).groups())
        .expect("dimension groups are disjoint");
    let mut out = Vec::with_capacity(p.library as usize * tx_tuples.len() * rx_tuples.len());
    for file in 0..p.library {
        for tx_set in &tx_tuples {
            for rx_set in &rx_tuples {
                out.push(SubfileId {
                    file,
                    tx_set: tx_set.clone(),
                    rx_set: rx_set.clone(),
                });
            }
        }
    }
    out
}

/// Manifest of the given owner: membership of the owner's index in the
/// matching tuple decides what is cached.
pub fn cache_manifest(p: &DerivedParams, owner: Node) -> Result<CacheManifest, PlacementError> {
    match owner {
        Node::Tx(i) if (i as u32) >= p.tx_count => {
            return Err(PlacementError::NodeOutOfRange {
                role: "tx",
                index: i,
                count: p.tx_count,
            })
        }
        Node::Rx(j) if (j as u32) >= p.rx_count => {
            return Err(PlacementError::NodeOutOfRange {
                role: "rx",
                index: j,
                count: p.rx_count,
            })
        }
        _ => {}
    }
    let subfiles = split_files(p)
        .into_iter()
        .filter(|s| match owner {
            Node::Tx(i) => s.tx_set.contains(&i),
            Node::Rx(j) => s.rx_set.contains(&j),
        })
        .collect();
    Ok(CacheManifest { owner, subfiles })
}

/// True iff the manifest fills the owner's budget with exact equality:
/// `|subfiles| / subfiles_per_file == cache size in files`. The per-file
/// packet count stays symbolic, so the check is pure rational arithmetic.
pub fn verify_memory_budget(p: &DerivedParams, manifest: &CacheManifest) -> bool {
    let per_file = BigRational::from_integer(BigInt::from(p.subfiles_per_file()));
    let held = BigRational::from_integer(BigInt::from(manifest.subfiles.len() as u64)) / per_file;
    let budget = match manifest.owner {
        Node::Tx(_) => {
            BigRational::new(BigInt::from(p.library), BigInt::from(p.tx_per_dim))
        }
        Node::Rx(_) => {
            BigRational::new(BigInt::from(p.library), BigInt::from(p.rx_per_dim))
        }
    };
    held == budget
}

fn write_set(out: &mut String, set: &[Point]) {
    out.push('{');
    for (k, p) in set.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{p}");
    }
    out.push('}');
}

/// Structured-text manifest export: one `file=.. tx={..} rx={..}` record per
/// subfile, preceded by an owner header.
pub fn render_manifest(manifest: &CacheManifest) -> String {
    let mut out = String::new();
    let owner = match manifest.owner {
        Node::Tx(i) => format!("tx {i}"),
        Node::Rx(j) => format!("rx {j}"),
    };
    let _ = writeln!(out, "owner: {owner}");
    let _ = writeln!(out, "subfiles: {}", manifest.subfiles.len());
    for s in &manifest.subfiles {
        let _ = write!(out, "file={} tx=", s.file);
        write_set(&mut out, &s.tx_set);
        out.push_str(" rx=");
        write_set(&mut out, &s.rx_set);
        out.push('\n');
    }
    out
}
