//! Memory-sharing planner for fractional caching parameters, and the memory
//! cap for networks whose aggregate caching exceeds the receiver count.
//!
//! A plan splits the cache memories and the files proportionally so that each
//! partition carries integer caching parameters with an integer dimension
//! ratio. Non-integer parameters split at their floor/ceiling; an integer
//! pair with a fractional ratio splits either toward the shared-link scheme
//! (ratio below one) or between the two neighbouring integer ratios. The
//! weighted sum of partition DoF values always reproduces `t_tx + t_rx`
//! exactly.

use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};

use super::counting;
use crate::error::PlanError;
use crate::placement::{DerivedParams, Frac, NetworkConfig};

/// Delivery scheme a partition is served by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionScheme {
    /// This crate's construction.
    Hypercube,
    /// Single-transmitter-equivalent coded caching over a shared link;
    /// parameters are reported but its subpacketization is external.
    SharedLink,
}

/// One memory-and-file partition of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPartition {
    pub scheme: PartitionScheme,
    /// Fraction of every file assigned to this partition.
    pub weight: BigRational,
    /// Share of each transmitter cache assigned to this partition.
    pub tx_memory_fraction: BigRational,
    /// Share of each receiver cache assigned to this partition.
    pub rx_memory_fraction: BigRational,
    pub t_tx: BigRational,
    pub t_rx: BigRational,
    pub dim_ratio: Option<BigRational>,
    pub dof: BigRational,
    /// Per-(original)-file packet count contributed by this partition, when
    /// the surrounding network makes the partition's dimensions integral.
    pub subpacketization: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemorySharePlan {
    pub t_tx: BigRational,
    pub t_rx: BigRational,
    pub partitions: Vec<PlanPartition>,
    /// Weighted DoF; equals `t_tx + t_rx` exactly.
    pub combined_dof: BigRational,
    /// Sum of partition subpacketizations when every partition has one.
    pub combined_subpacketization: Option<BigUint>,
}

impl MemorySharePlan {
    /// True when no split was needed.
    pub fn is_identity(&self) -> bool {
        self.partitions.len() == 1 && self.partitions[0].weight.is_one()
    }
}

pub fn frac_to_rational(v: Frac) -> BigRational {
    BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()))
}

fn floor_of(v: &BigRational) -> BigRational {
    BigRational::from_integer(v.floor().to_integer())
}

/// Weighted integer corners of a possibly fractional value.
fn corner_split(v: &BigRational) -> Vec<(BigRational, BigRational)> {
    if v.is_integer() {
        return vec![(v.clone(), BigRational::one())];
    }
    let lo = floor_of(v);
    let hi = lo.clone() + BigRational::one();
    vec![(lo.clone(), hi.clone() - v), (hi, v - lo)]
}

fn push_partition(
    out: &mut Vec<(PartitionScheme, BigRational, BigRational, BigRational)>,
    scheme: PartitionScheme,
    weight: BigRational,
    t_tx: BigRational,
    t_rx: BigRational,
) {
    if !weight.is_zero() {
        out.push((scheme, weight, t_tx, t_rx));
    }
}

fn plan_point(
    t_tx: &BigRational,
    t_rx: &BigRational,
    weight: BigRational,
    out: &mut Vec<(PartitionScheme, BigRational, BigRational, BigRational)>,
) {
    if !t_tx.is_integer() || !t_rx.is_integer() {
        for (ta, wa) in corner_split(t_tx) {
            for (tb, wb) in corner_split(t_rx) {
                let w = weight.clone() * &wa * &wb;
                if !w.is_zero() {
                    plan_point(&ta, &tb, w, out);
                }
            }
        }
        return;
    }
    let ratio = t_tx / t_rx;
    if ratio.is_integer() {
        push_partition(
            out,
            PartitionScheme::Hypercube,
            weight,
            t_tx.clone(),
            t_rx.clone(),
        );
    } else if ratio < BigRational::one() {
        // Below ratio one: mix the shared-link point (t_tx' = 1) with the
        // square point (t_tx'' = t_rx).
        let one = BigRational::one();
        let p = (t_rx - t_tx) / (t_rx - &one);
        push_partition(
            out,
            PartitionScheme::SharedLink,
            weight.clone() * &p,
            one.clone(),
            t_rx.clone(),
        );
        push_partition(
            out,
            PartitionScheme::Hypercube,
            weight * (one - p),
            t_rx.clone(),
            t_rx.clone(),
        );
    } else {
        // Between integer ratios q and q+1.
        let q = floor_of(&ratio);
        let lo = q.clone() * t_rx;
        let hi = (q + BigRational::one()) * t_rx;
        let p = (hi.clone() - t_tx) / (hi.clone() - &lo);
        push_partition(
            out,
            PartitionScheme::Hypercube,
            weight.clone() * &p,
            lo,
            t_rx.clone(),
        );
        push_partition(
            out,
            PartitionScheme::Hypercube,
            weight * (BigRational::one() - p),
            hi,
            t_rx.clone(),
        );
    }
}

/// Plan from the caching parameters alone. Subpacketizations stay unset; use
/// [`plan_memory_sharing`] to attach them for a concrete network.
pub fn plan_from_caching_params(
    t_tx: &BigRational,
    t_rx: &BigRational,
) -> Result<MemorySharePlan, PlanError> {
    let one = BigRational::one();
    if t_tx < &one {
        return Err(PlanError::TxCachingBelowOne(t_tx.to_string()));
    }
    if t_rx < &one {
        return Err(PlanError::RxCachingBelowOne(t_rx.to_string()));
    }
    let mut raw = Vec::new();
    plan_point(t_tx, t_rx, BigRational::one(), &mut raw);
    let partitions: Vec<PlanPartition> = raw
        .into_iter()
        .map(|(scheme, weight, pt_tx, pt_rx)| {
            let dof = match scheme {
                PartitionScheme::Hypercube => pt_tx.clone() + &pt_rx,
                PartitionScheme::SharedLink => pt_rx.clone() + BigRational::one(),
            };
            PlanPartition {
                scheme,
                tx_memory_fraction: weight.clone() * &pt_tx / t_tx,
                rx_memory_fraction: weight.clone() * &pt_rx / t_rx,
                dim_ratio: match scheme {
                    PartitionScheme::Hypercube => Some(pt_tx.clone() / &pt_rx),
                    PartitionScheme::SharedLink => None,
                },
                dof,
                t_tx: pt_tx,
                t_rx: pt_rx,
                weight,
                subpacketization: None,
            }
        })
        .collect();
    let combined_dof = partitions
        .iter()
        .fold(BigRational::zero(), |acc, p| acc + p.weight.clone() * &p.dof);
    debug_assert_eq!(combined_dof, t_tx + t_rx);
    Ok(MemorySharePlan {
        t_tx: t_tx.clone(),
        t_rx: t_rx.clone(),
        partitions,
        combined_dof,
        combined_subpacketization: None,
    })
}

fn partition_params(cfg: &NetworkConfig, part: &PlanPartition) -> Option<DerivedParams> {
    if part.scheme != PartitionScheme::Hypercube {
        return None;
    }
    let t_tx = part.t_tx.to_integer().to_u32()?;
    let t_rx = part.t_rx.to_integer().to_u32()?;
    if t_tx == 0 || t_rx == 0 || cfg.tx_count % t_tx != 0 || cfg.rx_count % t_rx != 0 {
        return None;
    }
    DerivedParams::from_dims(
        cfg.tx_count / t_tx,
        t_tx,
        cfg.rx_count / t_rx,
        t_rx,
        cfg.library,
    )
    .ok()
}

/// Plan for a concrete network, attaching each hypercube partition's
/// subpacketization whenever the partition's dimensions are integral.
pub fn plan_memory_sharing(cfg: &NetworkConfig) -> Result<MemorySharePlan, PlanError> {
    let t_tx = frac_to_rational(cfg.tx_caching_param());
    let t_rx = frac_to_rational(cfg.rx_caching_param());
    let mut plan = plan_from_caching_params(&t_tx, &t_rx)?;
    for part in &mut plan.partitions {
        part.subpacketization =
            partition_params(cfg, part).map(|p| counting::per_file_packets_hcb(&p));
    }
    plan.combined_subpacketization = plan
        .partitions
        .iter()
        .map(|p| p.subpacketization.clone())
        .sum::<Option<BigUint>>();
    Ok(plan)
}

/// Outcome of capping excess aggregate cache memory down to a step size of
/// `rx_count`.
#[derive(Debug, Clone, PartialEq)]
pub enum CapOutcome {
    /// The step size already fits.
    Unchanged,
    /// Reduced memories keep every derived parameter integral.
    Capped {
        config: NetworkConfig,
        params: DerivedParams,
    },
    /// No integral reduction exists; the reduced caching parameters are
    /// routed through the memory-sharing planner.
    RoutedToSharing {
        config: NetworkConfig,
        plan: MemorySharePlan,
    },
}

fn reduced_config(cfg: &NetworkConfig, t_tx: Frac, t_rx: Frac) -> NetworkConfig {
    let library = Frac::from_integer(cfg.library as i64);
    NetworkConfig {
        tx_cache: t_tx * library / Frac::from_integer(cfg.tx_count as i64),
        rx_cache: t_rx * library / Frac::from_integer(cfg.rx_count as i64),
        ..cfg.clone()
    }
}

/// When `t_tx + t_rx > rx_count`, shrink the cache memories so the sum lands
/// exactly on `rx_count`. Receiver memory is reduced first; transmitter
/// memory only shrinks when keeping it full leaves no room. Integral
/// reductions are preferred; otherwise the reduced point goes through the
/// memory-sharing planner.
pub fn cap_excess_memory(cfg: &NetworkConfig) -> Result<CapOutcome, PlanError> {
    let t_tx = cfg.tx_caching_param();
    let t_rx = cfg.rx_caching_param();
    let k_rx = cfg.rx_count;
    if t_tx + t_rx <= Frac::from_integer(k_rx as i64) {
        return Ok(CapOutcome::Unchanged);
    }
    if k_rx < 2 {
        return Err(PlanError::CapInfeasible(k_rx));
    }

    // Integral candidates, largest kept transmitter parameter first.
    let t_tx_max = t_tx.floor().to_integer().min(k_rx as i64 - 1);
    for cand_tx in (1..=t_tx_max).rev() {
        let cand_rx = k_rx as i64 - cand_tx;
        if Frac::from_integer(cand_rx) > t_rx {
            continue;
        }
        if cfg.tx_count as i64 % cand_tx != 0 || k_rx as i64 % cand_rx != 0 {
            continue;
        }
        let reduced = reduced_config(cfg, Frac::from_integer(cand_tx), Frac::from_integer(cand_rx));
        if let Ok(params) = crate::placement::validate_config(&reduced) {
            return Ok(CapOutcome::Capped {
                config: reduced,
                params,
            });
        }
    }

    // Fractional fallback, still reducing receiver memory first.
    let one = Frac::from_integer(1);
    let (cand_tx, cand_rx) = if t_tx <= Frac::from_integer(k_rx as i64 - 1) {
        (t_tx, Frac::from_integer(k_rx as i64) - t_tx)
    } else if t_rx >= one {
        (Frac::from_integer(k_rx as i64 - 1), one)
    } else {
        (Frac::from_integer(k_rx as i64) - t_rx, t_rx)
    };
    let reduced = reduced_config(cfg, cand_tx, cand_rx);
    let plan = plan_memory_sharing(&reduced)?;
    Ok(CapOutcome::RoutedToSharing {
        config: reduced,
        plan,
    })
}
